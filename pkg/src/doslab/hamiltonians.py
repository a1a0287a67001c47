"""Finite-range operators truncated to balls, and radial weight functions.

``build_truncated`` applies a hopping kernel plus a potential to the points
of a closed ball and stores the result as

* a dense symmetric matrix (the generic case),
* a bare diagonal when there is no hopping, or
* a pair of parity sectors for 1-d lattice operators with an even
  potential, where folding into reflection-symmetric/antisymmetric
  combinations halves every subsequent eigensolve.

Truncation is plain Dirichlet: matrix elements between ball points are
kept exactly as in the infinite operator (graph Laplacians keep the full
degree on the diagonal), everything else is dropped.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from ._rng import site_keys, uniform_stream
from .budget import DEFAULT_ENTRY_BUDGET, charge, point_budget
from .errors import BudgetExceeded
from .spaces import CayleyF2, Graph, Lattice, RadiiLadder

_FOLD_MIN_SIZE = 64


@dataclass(frozen=True)
class Hopping:
    """Hopping part of an operator spec.

    ``kind`` is one of ``adjacency`` (nearest-neighbour graph of the
    space), ``laplacian`` (degree minus adjacency), ``kernel`` (finite
    list of lattice offsets with real amplitudes, validated symmetric) or
    ``none``.
    """

    kind: str
    offsets: tuple = ()
    amplitudes: tuple = ()

    def __post_init__(self):
        if self.kind not in ("adjacency", "laplacian", "kernel", "none"):
            raise ValueError(f"unknown hopping kind {self.kind!r}")
        if self.kind == "kernel":
            if len(self.offsets) != len(self.amplitudes):
                raise ValueError("offsets and amplitudes length mismatch")
            table = {tuple(o): float(a)
                     for o, a in zip(self.offsets, self.amplitudes)}
            if len(table) != len(self.offsets):
                raise ValueError("duplicate kernel offsets")
            for o, a in table.items():
                neg = tuple(-c for c in o)
                if neg not in table or table[neg] != a:
                    raise ValueError(
                        f"kernel is not symmetric: offset {o} with amplitude "
                        f"{a} has no matching {neg}")


@dataclass(frozen=True)
class Potential:
    """Diagonal part: ``zero``, ``periodic`` (lattice), ``iid_uniform``
    (counter-based field over sites) or ``table`` (explicit values).

    ``shift`` translates the field: a nonempty shift makes the potential
    evaluate its rule at x + shift instead of x.  Because the random field
    is a pure function of (seed, site), this is how conjugation by a
    lattice translation acts on the diagonal part.
    """

    kind: str
    values: tuple = ()
    period: tuple = ()
    low: float = 0.0
    high: float = 1.0
    seed: int = 0
    table: dict | None = None
    shift: tuple = ()

    def __post_init__(self):
        if self.kind not in ("zero", "periodic", "iid_uniform", "table"):
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.kind == "periodic" and not self.values:
            raise ValueError("periodic potential needs values")
        if self.kind == "iid_uniform" and self.high < self.low:
            raise ValueError("iid_uniform needs high >= low")
        if self.kind == "table" and not self.table:
            raise ValueError("table potential needs entries")
        if self.shift and not all(isinstance(s, int) for s in self.shift):
            raise ValueError("potential shift must be integer coordinates")


@dataclass(frozen=True)
class HamiltonianSpec:
    hopping: Hopping
    potential: Potential

    def shifted(self, shift: Sequence[int]) -> "HamiltonianSpec":
        """Spec of the translated operator: fields evaluated at x + shift.

        Hopping kernels are translation invariant and stay untouched, so
        only the potential picks up the shift (shifts compose additively).
        """
        shift = tuple(int(s) for s in np.atleast_1d(shift))
        pot = self.potential
        if pot.kind == "zero":
            return self
        current = pot.shift if pot.shift else (0,) * len(shift)
        if len(current) != len(shift):
            raise ValueError(
                f"shift has {len(shift)} components, potential shift has "
                f"{len(current)}")
        total = tuple(a + b for a, b in zip(current, shift))
        return HamiltonianSpec(self.hopping, replace(pot, shift=total))


def adjacency(potential: Potential | None = None) -> HamiltonianSpec:
    return HamiltonianSpec(Hopping("adjacency"), potential or Potential("zero"))


def laplacian(potential: Potential | None = None) -> HamiltonianSpec:
    return HamiltonianSpec(Hopping("laplacian"), potential or Potential("zero"))


def kernel(offsets, amplitudes, potential: Potential | None = None) -> HamiltonianSpec:
    return HamiltonianSpec(
        Hopping("kernel", tuple(tuple(o) for o in offsets), tuple(amplitudes)),
        potential or Potential("zero"))


def diagonal_spec(potential: Potential) -> HamiltonianSpec:
    return HamiltonianSpec(Hopping("none"), potential)


def periodic_potential(values) -> Potential:
    arr = np.asarray(values, dtype=np.float64)
    return Potential("periodic", values=tuple(arr.ravel().tolist()),
                     period=arr.shape)


def iid_potential(low: float, high: float, seed: int) -> Potential:
    return Potential("iid_uniform", low=float(low), high=float(high),
                     seed=int(seed))


def table_potential(table: dict) -> Potential:
    return Potential("table", table=dict(table))


@dataclass
class FoldedSectors:
    """Parity-sector storage for reflection-symmetric 1-d operators.

    ``plus`` acts on span{e_0} + {(e_x + e_-x)/sqrt2}, ``minus`` on
    {(e_x - e_-x)/sqrt2}; ``pair_plus``/``pair_minus`` give the full-basis
    indices of +x and -x for x = 1..R, ``center`` the index of x = 0.
    """

    plus: np.ndarray
    minus: np.ndarray
    center: int
    pair_plus: np.ndarray
    pair_minus: np.ndarray

    def sector_levels(self, levels: np.ndarray):
        lev_plus = np.concatenate(([levels[self.center]], levels[self.pair_plus]))
        return lev_plus, levels[self.pair_plus].copy()


@dataclass
class TruncatedOperator:
    """A symmetric operator restricted to a ball, with point metadata.

    Exactly one of ``matrix`` (dense), ``diagonal`` or ``sectors`` is set.
    ``levels[i]`` maps point i to its ladder level (0 = base point), and
    ``level_radii``/``level_counts`` include the level-0 entry, so weight
    profiles and ball prefixes can be evaluated without float comparisons.
    """

    space_kind: str
    radius: float
    points: np.ndarray
    dists: np.ndarray
    levels: np.ndarray
    level_radii: np.ndarray
    level_counts: np.ndarray
    potential: np.ndarray
    spec: HamiltonianSpec
    matrix: np.ndarray | None = None
    diagonal: np.ndarray | None = None
    sectors: FoldedSectors | None = None
    labels: np.ndarray | None = None
    eig_cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return len(self.dists)

    @property
    def storage(self) -> str:
        if self.diagonal is not None:
            return "diagonal"
        if self.sectors is not None:
            return "folded"
        return "dense"

    def dense(self) -> np.ndarray:
        """Materialise the full matrix (reconstructs folded storage)."""
        if self.matrix is not None:
            return self.matrix
        if self.diagonal is not None:
            return np.diag(self.diagonal)
        s = self.sectors
        n = self.n
        out = np.zeros((n, n))
        core_p = s.plus[1:, 1:]
        core_m = s.minus
        pp = (core_p + core_m) / 2.0
        pm = (core_p - core_m) / 2.0
        out[np.ix_(s.pair_plus, s.pair_plus)] = pp
        out[np.ix_(s.pair_plus, s.pair_minus)] = pm
        out[np.ix_(s.pair_minus, s.pair_plus)] = pm.T
        out[np.ix_(s.pair_minus, s.pair_minus)] = pp
        border = s.plus[0, 1:] / math.sqrt(2.0)
        out[s.center, s.pair_plus] = border
        out[s.center, s.pair_minus] = border
        out[s.pair_plus, s.center] = border
        out[s.pair_minus, s.center] = border
        out[s.center, s.center] = s.plus[0, 0]
        return out

    def with_same_metadata(self, **replacements) -> "TruncatedOperator":
        return TruncatedOperator(
            space_kind=self.space_kind, radius=self.radius, points=self.points,
            dists=self.dists, levels=self.levels, level_radii=self.level_radii,
            level_counts=self.level_counts, potential=self.potential,
            spec=self.spec, labels=self.labels,
            **replacements)


def _lattice_point_keys(coords: np.ndarray) -> np.ndarray:
    return site_keys(coords)


def _potential_values(space, spec: HamiltonianSpec, points: np.ndarray) -> np.ndarray:
    pot = spec.potential
    n = len(points)
    if pot.kind == "zero":
        return np.zeros(n)
    if pot.shift:
        if not isinstance(space, Lattice):
            raise ValueError("shifted potentials need a lattice space")
        if len(pot.shift) != space.d:
            raise ValueError("potential shift dimension mismatch")
        points = points + np.asarray(pot.shift, dtype=np.int64)
    if pot.kind == "periodic":
        if not isinstance(space, Lattice):
            raise ValueError("periodic potential requires a lattice space")
        values = np.asarray(pot.values).reshape(pot.period)
        idx = tuple(np.mod(points[:, a], pot.period[a]) for a in range(space.d))
        return values[idx].astype(np.float64)
    if pot.kind == "iid_uniform":
        if isinstance(space, Lattice):
            counters = site_keys(points)
        elif isinstance(space, Graph):
            counters = space.labels[points].astype(np.uint64)
        else:
            counters = points.astype(np.uint64)
        u = uniform_stream(pot.seed, counters)
        return pot.low + (pot.high - pot.low) * u
    if pot.kind == "table":
        out = np.empty(n)
        for i in range(n):
            key = (tuple(int(c) for c in points[i]) if points.ndim == 2
                   else int(space.labels[points[i]]) if isinstance(space, Graph)
                   else int(points[i]))
            if key not in pot.table:
                raise ValueError(f"table potential missing value for point {key}")
            out[i] = pot.table[key]
        return out
    raise AssertionError(pot.kind)  # pragma: no cover


def _lattice_hopping_matrix(space: Lattice, spec: HamiltonianSpec,
                            points: np.ndarray) -> np.ndarray:
    n = len(points)
    hop = spec.hopping
    if hop.kind == "adjacency":
        offsets = [e for a in range(space.d) for e in
                   (tuple(1 if i == a else 0 for i in range(space.d)),
                    tuple(-1 if i == a else 0 for i in range(space.d)))]
        amps = [1.0] * len(offsets)
    elif hop.kind == "laplacian":
        offsets = [(0,) * space.d]
        amps = [2.0 * space.d]
        for a in range(space.d):
            offsets.append(tuple(1 if i == a else 0 for i in range(space.d)))
            offsets.append(tuple(-1 if i == a else 0 for i in range(space.d)))
            amps.extend([-1.0, -1.0])
    else:
        offsets = [tuple(o) for o in hop.offsets]
        amps = list(hop.amplitudes)
    keys = _lattice_point_keys(points)
    order = np.argsort(keys)
    sorted_keys = keys[order]
    m = np.zeros((n, n))
    rows = np.arange(n)
    for off, amp in zip(offsets, amps):
        target = points + np.asarray(off, dtype=np.int64)
        tkeys = site_keys(target)
        pos = np.searchsorted(sorted_keys, tkeys)
        pos_clipped = np.minimum(pos, n - 1)
        hit = sorted_keys[pos_clipped] == tkeys
        m[rows[hit], order[pos_clipped[hit]]] += amp
    return m


def _graph_hopping_matrix(space: Graph, spec: HamiltonianSpec,
                          node_idx: np.ndarray) -> np.ndarray:
    n = len(node_idx)
    remap = -np.ones(space.n_nodes, dtype=np.int64)
    remap[node_idx] = np.arange(n)
    m = np.zeros((n, n))
    for local_i, old_i in enumerate(node_idx):
        nbrs = remap[space.indices[space.indptr[old_i]:space.indptr[old_i + 1]]]
        nbrs = nbrs[nbrs >= 0]
        m[local_i, nbrs] = 1.0
    if spec.hopping.kind == "laplacian":
        deg = (space.indptr[node_idx + 1] - space.indptr[node_idx]).astype(np.float64)
        m = np.diag(deg) - m
    return m


def _f2_hopping_matrix(spec: HamiltonianSpec, words: np.ndarray) -> np.ndarray:
    n = len(words)
    order = np.argsort(words)
    sorted_words = words[order]
    m = np.zeros((n, n))
    child_mask = words > 1
    parents = words[child_mask] >> 2
    pos = np.searchsorted(sorted_words, parents)
    parent_idx = order[pos]
    child_idx = np.flatnonzero(child_mask)
    m[child_idx, parent_idx] = 1.0
    m[parent_idx, child_idx] = 1.0
    if spec.hopping.kind == "laplacian":
        m = 4.0 * np.eye(n) - m
    return m


def _fold_pairing(points: np.ndarray, dists: np.ndarray):
    """Index pairing x <-> -x for a 1-d ball in canonical order."""
    coords = points[:, 0]
    order = np.argsort(coords)
    idx_of = {int(coords[i]): i for i in order}
    center = idx_of[0]
    radius = int(coords.max())
    pair_plus = np.array([idx_of[x] for x in range(1, radius + 1)], dtype=np.int64)
    pair_minus = np.array([idx_of[-x] for x in range(1, radius + 1)], dtype=np.int64)
    return center, pair_plus, pair_minus


def _fold_dense(dense: np.ndarray, center: int, pair_plus: np.ndarray,
                pair_minus: np.ndarray) -> FoldedSectors:
    app = dense[np.ix_(pair_plus, pair_plus)]
    apm = dense[np.ix_(pair_plus, pair_minus)]
    p = len(pair_plus)
    plus = np.zeros((p + 1, p + 1))
    plus[1:, 1:] = app + apm
    border = dense[center, pair_plus] * math.sqrt(2.0)
    plus[0, 1:] = border
    plus[1:, 0] = border
    plus[0, 0] = dense[center, center]
    minus = app - apm
    return FoldedSectors(plus=plus, minus=minus, center=center,
                         pair_plus=pair_plus, pair_minus=pair_minus)


def build_truncated(space, spec: HamiltonianSpec, radius: float,
                    budget: int | None = None,
                    entry_budget: int = DEFAULT_ENTRY_BUDGET,
                    fold: str | bool = "auto") -> TruncatedOperator:
    """Dirichlet truncation of the operator to the closed ball of ``radius``.

    ``fold="auto"`` switches 1-d lattice operators with an even potential
    to parity-sector storage once they are large enough to matter; pass
    ``False`` to force plain dense storage (small cross-check tests) or
    ``True`` to fold whenever valid.
    """
    b = point_budget(budget)
    points, keys, dists = space.ball_arrays(radius, b)
    uniq = np.unique(keys)
    levels = np.searchsorted(uniq, keys).astype(np.int64)
    # canonical order sorts by distance first, so levels is non-decreasing
    # and the cumulative count per level is a plain searchsorted
    level_counts = np.searchsorted(levels, np.arange(len(uniq)), side="right")
    level_radii = np.zeros(len(uniq))
    level_radii[levels] = dists
    v = _potential_values(space, spec, points)
    n = len(points)
    common = dict(space_kind=space.kind, radius=float(radius), points=points,
                  dists=dists, levels=levels, level_radii=level_radii,
                  level_counts=level_counts.astype(np.int64), potential=v,
                  spec=spec, labels=getattr(space, "labels", None))
    if isinstance(space, Graph):
        common["labels"] = space.labels[points]
    if spec.hopping.kind == "none":
        return TruncatedOperator(diagonal=v.copy(), **common)
    if n * n > entry_budget:
        raise BudgetExceeded(
            f"dense truncation at radius {radius:g} needs {n * n} entries, "
            f"entry budget is {entry_budget}", requested=n * n,
            allowed=entry_budget)
    if isinstance(space, Lattice):
        m = _lattice_hopping_matrix(space, spec, points)
    elif isinstance(space, Graph):
        m = _graph_hopping_matrix(space, spec, points)
    elif isinstance(space, CayleyF2):
        m = _f2_hopping_matrix(spec, points)
    else:
        raise ValueError(f"unsupported space kind {space.kind!r}")
    m[np.arange(n), np.arange(n)] += v
    if not np.array_equal(m, m.T):
        raise AssertionError("truncated matrix lost exact symmetry")
    do_fold = False
    if isinstance(space, Lattice) and space.d == 1 and space.base == (0,):
        center, pp, pm = _fold_pairing(points, dists)
        even_potential = np.array_equal(v[pp], v[pm])
        if fold is True:
            do_fold = even_potential
            if not even_potential:
                raise ValueError("fold requested but potential is not even")
        elif fold == "auto":
            do_fold = even_potential and n >= _FOLD_MIN_SIZE
    if do_fold:
        sectors = _fold_dense(m, center, pp, pm)
        return TruncatedOperator(sectors=sectors, **common)
    return TruncatedOperator(matrix=m, **common)


@dataclass
class WeightFunction:
    """Strictly decreasing radial weight evaluated through ladder levels.

    ``level_values[l]`` is the weight on the shell at ``level_radii[l]``
    (level 0 is the base point).  ``radius_fn`` is set when the weight has
    a closed form in the distance and can be evaluated off-ladder.
    """

    kind: str
    level_values: np.ndarray
    level_radii: np.ndarray
    level_counts: np.ndarray
    radius_fn: Callable[[np.ndarray], np.ndarray] | None = None
    descriptor: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.level_values, dtype=np.float64)
        if np.any(w <= 0):
            raise ValueError("weight values must be strictly positive")
        if np.any(np.diff(w) >= 0):
            raise ValueError("weight values must be strictly decreasing in the level")
        self.level_values = w

    @property
    def n_levels(self) -> int:
        return len(self.level_values)

    def values_for_levels(self, levels: np.ndarray) -> np.ndarray:
        levels = np.asarray(levels, dtype=np.int64)
        if levels.max(initial=0) >= self.n_levels:
            raise ValueError(
                "operator reaches ladder levels the weight was not built for; "
                "rebuild the weight from a longer ladder")
        return self.level_values[levels]

    def value_at_radius(self, r):
        if self.radius_fn is None:
            raise ValueError(f"{self.kind} weight has no closed form in the radius")
        return self.radius_fn(np.asarray(r, dtype=np.float64))


def default_weight(ladder: RadiiLadder) -> WeightFunction:
    """w = 1 / (1 + |B(x0, d(x))|): certified summable on the weak-l1 scale.

    The base point gets 1/(1+N_0) = 1/2.  Superlevel sets of this weight
    are exactly the balls of the ladder.
    """
    radii, counts, _ = ladder.level_arrays()
    values = 1.0 / (1.0 + counts.astype(np.float64))
    return WeightFunction("default", values, radii, counts,
                          descriptor={"rule": "1/(1+ball_count)"})


def lattice_weight(space, ladder: RadiiLadder) -> WeightFunction:
    """w(x) = (1 + |x|_p)^(-d) on a d-dimensional l_p lattice."""
    if not isinstance(space, Lattice):
        raise ValueError("lattice weight requires a lattice space")
    d = space.d
    radii, counts, _ = ladder.level_arrays()
    fn = lambda r: (1.0 + r) ** (-float(d))
    return WeightFunction("lattice_power", fn(radii), radii, counts, radius_fn=fn,
                          descriptor={"d": d, "p": space.p})


def custom_weight(ladder: RadiiLadder, fn: Callable, name: str = "custom") -> WeightFunction:
    radii, counts, _ = ladder.level_arrays()
    values = np.asarray([fn(r) for r in radii], dtype=np.float64)
    return WeightFunction("custom", values, radii, counts, radius_fn=None,
                          descriptor={"name": name})


@dataclass
class WeakL1Report:
    """Empirical weak-l1 certificate: C = max_l w_l * #{w >= w_l}.

    Because the weight is radial and strictly decreasing, the superlevel
    count at threshold w_l is exactly the ball count N_l.  ``divergent_trend``
    flags profiles whose products keep growing through the ladder (e.g.
    logarithmic decay), meaning no finite C is in sight.
    """

    products: np.ndarray
    c_estimate: float
    divergent_trend: bool


def weak_l1_bound(w: WeightFunction) -> WeakL1Report:
    products = w.level_values * w.level_counts.astype(np.float64)
    c = float(products.max())
    half = len(products) // 2
    divergent = bool(len(products) >= 8
                     and products[-1] >= 1.5 * products[half]
                     and np.all(np.diff(products[half:]) > 0))
    return WeakL1Report(products=products, c_estimate=c, divergent_trend=divergent)
