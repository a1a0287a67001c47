"""Density-of-states approximants and the trace identity they feed.

The pipeline has three independent legs:

* ``dos_approximant``    ball averages of diag g(H), whose tail estimates
                         the DOS integral of g,
* ``dixmier_lhs``        log-scale slope of the eigenvalue partial sums of
                         g(H) M_w on a truncation,
* ``weight_dixmier_trace``  the same slope for M_w alone, computed from
                         the ladder without any matrix.

``main_theorem_check`` joins them and reports the relative gap between
the slope of g(H) M_w and (slope of M_w) x (DOS tail value), together
with a diagonal-replacement diagnostic: the partial sums of the ordered
eigenvalues of g(H) M_w and of diag(g(H)) w should stay within O(1) of
each other, so the gap series must not grow at log scale.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import NotEstablished, PreconditionFailed
from .hamiltonians import (TruncatedOperator, WeightFunction, build_truncated,
                           weak_l1_bound)
from .spaces import CRatioReport, RadiiLadder, condition_c_report
from .spectral import (CesaroSeries, SlopeFit, function_diagonal, log_cesaro,
                       product_eigenvalues, run_length_series,
                       slope_dixmier_estimate, symmetric_eigenvalues)

DEFAULT_MARGIN = 50.0

# DOS tail estimator: mean over the last quarter of the requested radii,
# abstaining when the spread there is out of proportion to the mean.
DOS_TAIL_FRACTION = 0.25
DOS_DIVERGENCE_TOL = 0.25
GAP_FLOOR = 1e-3

# measurability thresholds, calibrated on the harmonic sequence, the
# dyadic-block sequence and a sin(log log) drifter at 2^20..2^24 terms:
# slope drift between window halves is ~1e-4 of scale for the first two
# and ~0.11 for the drifter, so 0.04 splits them with wide margin
SLOPE_DRIFT_TOL = 0.04
RESID_GROWTH_TOL = 0.05
MODULATED_SLOPE_TOL = 0.05


@dataclass
class DosEstimate:
    """Ball averages of diag g(H) per radius with a tail-limit diagnostic."""

    radii: np.ndarray
    ball_counts: np.ndarray
    values: np.ndarray
    margin: float
    outer_radius: float
    tail_start: int
    tail_mean: float
    tail_spread: float

    def rows(self):
        for r, c, v in zip(self.radii, self.ball_counts, self.values):
            yield float(r), int(c), float(v)

    @property
    def diverged(self) -> bool:
        floor = max(abs(self.tail_mean), GAP_FLOOR)
        return self.tail_spread > DOS_DIVERGENCE_TOL * floor


def _ball_prefix_counts(op: TruncatedOperator, radii: np.ndarray) -> np.ndarray:
    idx = np.searchsorted(op.level_radii, radii + 1e-9, side="right") - 1
    if np.any(idx < 0):
        raise ValueError("requested radius below the base level")
    return op.level_counts[idx]


def dos_approximant(space, spec, fn, radii, margin: float = DEFAULT_MARGIN,
                    budget: int | None = None,
                    operator: TruncatedOperator | None = None,
                    fold: str | bool = "auto") -> DosEstimate:
    """Tr(g(H) chi_B)/|B| along the given radii.

    The Hamiltonian is built once on the ball of radius max(radii)+margin
    so the requested balls sit away from the truncation boundary; a
    prebuilt ``operator`` of at least that radius is reused as is.
    """
    radii = np.atleast_1d(np.asarray(radii, dtype=np.float64))
    if len(radii) == 0:
        raise ValueError("need at least one radius")
    if np.any(np.diff(radii) <= 0):
        raise ValueError("radii must be strictly increasing")
    if margin < 0:
        raise ValueError("margin must be >= 0")
    if margin == 0:
        warnings.warn("margin 0: ball averages touch the truncation boundary "
                      "and pick up edge contamination", stacklevel=2)
    outer = float(radii[-1]) + float(margin)
    if operator is None:
        operator = build_truncated(space, spec, outer, budget=budget, fold=fold)
    elif operator.radius + 1e-9 < outer:
        raise ValueError(
            f"supplied operator truncated at {operator.radius}, need >= {outer}")
    diag = function_diagonal(operator, fn)
    csum = np.cumsum(diag)
    counts = _ball_prefix_counts(operator, radii)
    values = csum[counts - 1] / counts
    q = max(1, int(len(radii) * DOS_TAIL_FRACTION))
    tail = values[-q:]
    return DosEstimate(radii=radii, ball_counts=counts, values=values,
                       margin=float(margin), outer_radius=float(operator.radius),
                       tail_start=len(radii) - q,
                       tail_mean=float(tail.mean()),
                       tail_spread=float(tail.max() - tail.min()))


@dataclass
class IdsHistogram:
    """Empirical integrated density of states of a single truncation."""

    energies: np.ndarray
    fractions: np.ndarray
    radius: float
    margin: float

    @property
    def n(self) -> int:
        return len(self.energies)

    def evaluate(self, e):
        """Fraction of eigenvalues <= e."""
        e = np.asarray(e, dtype=np.float64)
        return np.searchsorted(self.energies, e, side="right") / self.n

    def sup_distance(self, ref_fn, window: tuple) -> float:
        """sup |empirical - ref| over the energy window.

        The sup of a step function against a monotone reference is
        attained at the jumps, so both one-sided values at each
        eigenvalue in the window are checked, plus the window edges.
        """
        lo, hi = window
        inside = np.flatnonzero((self.energies >= lo) & (self.energies <= hi))
        worst = max(abs(float(self.evaluate(lo)) - float(ref_fn(lo))),
                    abs(float(self.evaluate(hi)) - float(ref_fn(hi))))
        if len(inside):
            ref = np.asarray(ref_fn(self.energies[inside]), dtype=np.float64)
            above = np.abs(self.fractions[inside] - ref)
            below = np.abs((inside / self.n) - ref)
            worst = max(worst, float(above.max()), float(below.max()))
        return worst


def ids_histogram(space, spec, radius: float, margin: float = 0.0,
                  budget: int | None = None,
                  operator: TruncatedOperator | None = None,
                  fold: str | bool = "auto") -> IdsHistogram:
    """Sorted eigenvalues of the truncation at ``radius`` with ECDF fractions.

    ``margin`` is provenance only: the histogram is a spectral object of
    the plain truncation, so there is no larger build to restrict from.
    """
    if operator is None:
        operator = build_truncated(space, spec, radius, budget=budget, fold=fold)
    energies = np.sort(symmetric_eigenvalues(operator).values)
    n = len(energies)
    return IdsHistogram(energies=energies,
                        fractions=np.arange(1, n + 1, dtype=np.float64) / n,
                        radius=float(radius), margin=float(margin))


# ---------------------------------------------------------------------------
# Dixmier side


@dataclass
class MeasurabilityReport:
    verdict: str
    slope_drift: float
    drift_tol: float
    residual_growth: float
    residual_tol: float

    def __str__(self) -> str:
        return (f"{self.verdict} (slope drift {self.slope_drift:.2e} "
                f"vs {self.drift_tol:.2e}, residual growth "
                f"{self.residual_growth:.2e} vs {self.residual_tol:.2e})")


@dataclass
class DixmierEstimate:
    """Slope estimate of a log-Cesaro series plus measurability evidence."""

    series: CesaroSeries
    fit: SlopeFit
    lam_counts: np.ndarray
    lam_values: np.ndarray
    half_slopes: tuple
    measurability: MeasurabilityReport

    @property
    def value(self) -> float:
        return self.fit.slope


def _half_window_slopes(series: CesaroSeries, fit: SlopeFit) -> tuple:
    counts = fit.indices
    mid = len(counts) // 2
    halves = []
    for part in (counts[:mid + 1], counts[mid:]):
        x = np.log(2.0 + part)
        y = series.partial[part - 1]
        halves.append(float(np.polyfit(x, y, 1)[0]))
    return tuple(halves)


def _classify(fit: SlopeFit, half_slopes: tuple) -> MeasurabilityReport:
    drift = abs(half_slopes[1] - half_slopes[0])
    drift_tol = SLOPE_DRIFT_TOL * max(abs(fit.slope), 1e-3)
    resid_tol = RESID_GROWTH_TOL * max(fit.scale, 1e-3)
    if drift > drift_tol:
        verdict = "not-established"
    elif fit.residual_growth_slope > resid_tol:
        verdict = "weak-measurable"
    else:
        verdict = "strong-measurable"
    return MeasurabilityReport(verdict=verdict, slope_drift=drift,
                               drift_tol=drift_tol,
                               residual_growth=fit.residual_growth_slope,
                               residual_tol=resid_tol)


def dixmier_estimate_from_series(series: CesaroSeries,
                                 window: tuple | None = None,
                                 min_points: int = 8) -> DixmierEstimate:
    fit = slope_dixmier_estimate(series, window=window, min_points=min_points)
    halves = _half_window_slopes(series, fit)
    counts, lam = series.lam_table()
    return DixmierEstimate(series=series, fit=fit, lam_counts=counts,
                           lam_values=lam, half_slopes=halves,
                           measurability=_classify(fit, halves))


def measurability_diagnostic(estimate: DixmierEstimate) -> MeasurabilityReport:
    """Re-derive the verdict from the estimate's stored evidence."""
    return _classify(estimate.fit, estimate.half_slopes)


def certify_weight(w: WeightFunction) -> None:
    """Reject weights whose level sums w*N keep growing (not weak-l1)."""
    report = weak_l1_bound(w)
    if report.divergent_trend:
        raise PreconditionFailed(
            f"weight '{w.kind}' failed weak-l1 certification: level products "
            f"w*N grow without the bounded trend the trace needs "
            f"(c estimate {report.c_estimate:.3g})")


def truncation_fit_window(n: int) -> tuple:
    """Default slope window for product eigenvalues of a truncation.

    The top quarter of the ordered sequence is left out: those eigenvalues
    of the infinite operator draw on sites outside the ball, so the
    truncated partial sums go flat there no matter how large R is.  The
    remaining range still needs eight dyadic points, hence n >= 2048.
    """
    if n < 2048:
        raise ValueError(
            f"truncation yields {n} eigenvalues; the slope window needs at "
            "least 2048 (pass an explicit window to override)")
    return (max(3, n >> 9), n >> 2)


def dixmier_lhs(space, spec, fn, w: WeightFunction, R_outer: float,
                budget: int | None = None,
                operator: TruncatedOperator | None = None,
                window: tuple | None = None,
                fold: str | bool = "auto") -> DixmierEstimate:
    """Slope estimate for g(H) M_w on the truncation at ``R_outer``.

    A supplied ``operator`` is taken as the truncation itself (its radius
    wins over ``R_outer``); its eigendecomposition cache makes repeated
    calls with different ``fn`` cheap.
    """
    certify_weight(w)
    if operator is None:
        operator = build_truncated(space, spec, R_outer, budget=budget, fold=fold)
    prods = product_eigenvalues(operator, w, fn=fn)
    series = log_cesaro(prods)
    if window is None:
        window = truncation_fit_window(len(series))
    return dixmier_estimate_from_series(series, window=window)


def weight_dixmier_trace(w: WeightFunction, ladder: RadiiLadder | None = None,
                         window: tuple | None = None) -> SlopeFit:
    """Slope estimate for M_w alone, straight from the level tables.

    The eigenvalues of M_w are the level values with shell multiplicities,
    already in non-increasing order, so no matrix is involved.
    """
    if ladder is not None:
        counts = np.concatenate(([1], ladder.counts))
        if len(counts) != len(w.level_counts) or np.any(counts != w.level_counts):
            raise ValueError("ladder does not match the weight's level tables")
    mults = np.diff(w.level_counts, prepend=0)
    series = run_length_series(w.level_values, mults)
    if window is None and len(series) < 1024:
        raise ValueError(
            f"ladder reaches only {len(series)} points; the default slope "
            "window needs at least 1024 for eight dyadic points")
    return slope_dixmier_estimate(series, window=window)


# ---------------------------------------------------------------------------
# the identity check


@dataclass
class TheoremCheck:
    """Both sides of the trace identity on one space, with provenance."""

    lhs: DixmierEstimate
    weight_fit: SlopeFit
    dos: DosEstimate
    rhs_limit: float
    product: float
    relative_gap: float
    gap_floor: float
    condition_c: CRatioReport
    modulated_gap_slope: float
    modulated_scale: float
    modulated_ok: bool
    R_outer: float
    margin: float

    @property
    def lhs_value(self) -> float:
        return self.lhs.fit.slope

    def passed(self, tolerance: float) -> bool:
        return self.relative_gap <= tolerance and self.modulated_ok


def _modulated_gap(series: CesaroSeries, operator: TruncatedOperator,
                   fn, w: WeightFunction, fit: SlopeFit) -> tuple:
    diag = function_diagonal(operator, fn)
    w_sites = w.values_for_levels(operator.levels)
    diag_sums = np.cumsum(diag * w_sites)
    gap = np.abs(series.partial - diag_sums)
    counts = fit.indices
    slope = float(np.polyfit(np.log(2.0 + counts), gap[counts - 1], 1)[0])
    return slope, fit.scale


def main_theorem_check(space, spec, fn, w: WeightFunction, R_outer: float,
                       margin: float = DEFAULT_MARGIN,
                       ladder: RadiiLadder | None = None,
                       radii=None,
                       operator: TruncatedOperator | None = None,
                       dos_operator: TruncatedOperator | None = None,
                       budget: int | None = None,
                       fold: str | bool = "auto",
                       c_threshold: float = 0.01,
                       window: tuple | None = None) -> TheoremCheck:
    """Compare slope(g(H) M_w) with slope(M_w) x DOS tail value.

    Refuses on a failed ball-ratio check (the identity's hypothesis) and
    when the DOS tail has not settled; ``operator``/``dos_operator`` allow
    reusing truncations at R_outer and R_outer+margin across calls.
    """
    if ladder is None:
        ladder = space.ladder_to_radius(R_outer, budget)
    c_report = condition_c_report(ladder, threshold=c_threshold)
    if c_report.verdict == "fail":
        raise PreconditionFailed(
            "ball-count ratios stabilise above 1 "
            f"(tail min deviation {c_report.min_tail_deviation:.4f} > "
            f"{c_threshold}); the trace identity's hypothesis fails on this "
            "space, so the gap would be meaningless")
    certify_weight(w)

    if radii is None:
        radii = ladder.radii
    dos = dos_approximant(space, spec, fn, radii, margin=margin, budget=budget,
                          operator=dos_operator, fold=fold)
    if dos.diverged:
        raise NotEstablished(
            "DOS limit not numerically established: tail spread "
            f"{dos.tail_spread:.4g} against tail mean {dos.tail_mean:.4g}")

    if operator is None:
        operator = build_truncated(space, spec, R_outer, budget=budget, fold=fold)
    lhs = dixmier_lhs(space, spec, fn, w, R_outer, operator=operator,
                      window=window)
    weight_fit = weight_dixmier_trace(w, window=window)

    rhs_limit = dos.tail_mean
    product = weight_fit.slope * rhs_limit
    gap = abs(lhs.fit.slope - product) / max(abs(product), GAP_FLOOR)

    mod_slope, mod_scale = _modulated_gap(lhs.series, operator, fn, w, lhs.fit)
    return TheoremCheck(
        lhs=lhs, weight_fit=weight_fit, dos=dos, rhs_limit=rhs_limit,
        product=product, relative_gap=float(gap), gap_floor=GAP_FLOOR,
        condition_c=c_report, modulated_gap_slope=mod_slope,
        modulated_scale=mod_scale,
        modulated_ok=bool(mod_slope <= MODULATED_SLOPE_TOL * max(mod_scale, 1e-3)),
        R_outer=float(R_outer), margin=float(margin))
