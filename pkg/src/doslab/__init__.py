"""doslab: density-of-states and Dixmier-trace approximants on discrete metric spaces."""

__version__ = "0.1.0"
