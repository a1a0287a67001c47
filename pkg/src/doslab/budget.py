"""Point-budget plumbing for enumeration-heavy operations.

Every operation that materialises lattice points, graph nodes or group
elements checks its total against a budget before allocating.  The default
can be overridden per call or globally through the ``DOSLAB_BUDGET``
environment variable.
"""
from __future__ import annotations

import os

from .errors import BudgetExceeded, ConfigError

DEFAULT_POINT_BUDGET = 50_000_000
ENV_VAR = "DOSLAB_BUDGET"

# Dense matrices have their own ceiling (entries, not points): a truncation
# can legitimately hold ~1e8 float64 entries while the point budget guards
# much larger enumerations.
DEFAULT_ENTRY_BUDGET = 250_000_000


def point_budget(override: int | None = None) -> int:
    """Resolve the active point budget (override > env var > default)."""
    if override is not None:
        value = int(override)
        if value <= 0:
            raise ConfigError("budget must be positive", "budget")
        return value
    raw = os.environ.get(ENV_VAR)
    if raw is not None:
        try:
            value = int(raw)
        except ValueError:
            raise ConfigError(f"not an integer: {raw!r}", ENV_VAR) from None
        if value <= 0:
            raise ConfigError("budget must be positive", ENV_VAR)
        return value
    return DEFAULT_POINT_BUDGET


def charge(count: int, budget: int, what: str) -> None:
    """Raise ``BudgetExceeded`` if ``count`` points would overrun ``budget``."""
    if count > budget:
        raise BudgetExceeded(
            f"{what} needs {count} points, budget is {budget}",
            requested=int(count), allowed=int(budget))
