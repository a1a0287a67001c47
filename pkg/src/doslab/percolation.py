"""Bond percolation on a finite box, clusters and chemical-ball growth.

Edges of [0, L)^d carry counter-based uniforms: edge id ``v*d + axis``
(``v`` the C-order flattened tail vertex) is a stream counter of the
sample seed, and the edge is open iff its uniform is below p.  Samples are
therefore pure functions of (d, L, p, seed), reruns are bit-identical, and
raising p only adds open edges (monotone coupling on shared uniforms).

Clusters come from a union-find pass over open edges; the largest cluster
becomes a graph space whose hop metric is the chemical distance.
"""
from __future__ import annotations

import hashlib
import math
import struct
from dataclasses import dataclass

import numpy as np

from ._rng import uniform_stream
from .budget import charge, point_budget
from .spaces import Graph, RadiiLadder

_MAGIC = b"DLPC"
_P_FIXED_SCALE = float(1 << 32)


@dataclass
class PercolationSample:
    """Open-edge configuration plus per-vertex cluster roots."""

    d: int
    L: int
    p: float
    seed: int
    open_mask: np.ndarray
    labels: np.ndarray

    @property
    def n_vertices(self) -> int:
        return self.L ** self.d

    def vertex_coords(self, flat: np.ndarray) -> np.ndarray:
        return np.stack(np.unravel_index(np.asarray(flat, dtype=np.int64),
                                         (self.L,) * self.d), axis=-1)

    def open_fraction(self) -> float:
        valid = _valid_edge_mask(self.d, self.L)
        return float(self.open_mask[valid].mean())


def _valid_edge_mask(d: int, L: int) -> np.ndarray:
    """Edges leaving the box (tail coordinate L-1 along its axis) are void."""
    shape = (L,) * d
    n = L ** d
    coords = np.stack(np.unravel_index(np.arange(n), shape), axis=-1)
    mask = np.empty(n * d, dtype=bool)
    for axis in range(d):
        mask[axis::d] = coords[:, axis] < L - 1
    return mask


def percolate_bonds(d: int, L: int, p: float, seed: int,
                    budget: int | None = None) -> PercolationSample:
    """Sample open edges and label clusters on [0, L)^d."""
    if d < 1 or L < 2:
        raise ValueError("need d >= 1 and L >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must be in [0, 1]")
    b = point_budget(budget)
    n = L ** d
    charge(n + n * d, b, f"percolation sample d={d} L={L}")
    edge_ids = np.arange(n * d, dtype=np.uint64)
    u = uniform_stream(seed, edge_ids)
    open_mask = (u < p) & _valid_edge_mask(d, L)
    labels = _union_find_labels(d, L, open_mask)
    return PercolationSample(d=d, L=L, p=float(p), seed=int(seed),
                             open_mask=open_mask, labels=labels)


def _union_find_labels(d: int, L: int, open_mask: np.ndarray) -> np.ndarray:
    n = L ** d
    strides = [L ** (d - 1 - a) for a in range(d)]  # C-order neighbour steps
    parent = list(range(n))
    size = [1] * n
    edge_idx = np.flatnonzero(open_mask)
    tails = (edge_idx // d).tolist()
    axes = (edge_idx % d).tolist()
    for v, axis in zip(tails, axes):
        a = v
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        w = v + strides[axis]
        bnode = w
        while parent[bnode] != bnode:
            parent[bnode] = parent[parent[bnode]]
            bnode = parent[bnode]
        if a == bnode:
            continue
        if size[a] < size[bnode]:
            a, bnode = bnode, a
        parent[bnode] = a
        size[a] += size[bnode]
    roots = np.empty(n, dtype=np.int64)
    for v in range(n):
        a = v
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        roots[v] = a
    return roots


def largest_cluster(sample: PercolationSample) -> Graph:
    """The largest cluster as a graph space under the chemical metric.

    The base point is the cluster vertex closest (euclidean, then
    lexicographic) to the box center.
    """
    roots, counts = np.unique(sample.labels, return_counts=True)
    root = roots[int(np.argmax(counts))]
    members = np.flatnonzero(sample.labels == root)
    coords = sample.vertex_coords(members)
    center = (sample.L - 1) / 2.0
    d2 = ((coords - center) ** 2).sum(axis=1)
    order = np.lexsort(tuple(coords[:, a] for a in range(sample.d - 1, -1, -1))
                       + (d2,))
    base_flat = int(members[order[0]])
    edges = _cluster_edges(sample, members)
    coords_by_label = {int(m): tuple(int(c) for c in coords[i])
                       for i, m in enumerate(members)}
    g = Graph.from_edges(edges, base_flat, coords_by_label=coords_by_label,
                         meta={"d": sample.d, "L": sample.L, "p": sample.p,
                             "seed": sample.seed,
                             "cluster_size": int(len(members)),
                             "n_clusters": int(len(roots))})
    return g


def _cluster_edges(sample: PercolationSample, members: np.ndarray):
    # open edges always stay inside the box, and an open edge out of a
    # cluster vertex lands in the same cluster by construction
    d, L = sample.d, sample.L
    strides = [L ** (d - 1 - a) for a in range(d)]
    out = []
    for axis in range(d):
        open_here = sample.open_mask[members * d + axis]
        heads = members + strides[axis]
        for u, v in zip(members[open_here], heads[open_here]):
            out.append((int(u), int(v)))
    return out


@dataclass
class GrowthTable:
    """Chemical ball counts around the cluster base and their t^-d scaling."""

    t: np.ndarray
    ball_counts: np.ndarray
    normalized: np.ndarray
    plateau_window: tuple
    plateau_stat: float


def chemical_ball_growth(cluster: Graph, t_max: int) -> GrowthTable:
    """|B_chem(base, t)| for t = 1..t_max with the plateau statistic.

    ``plateau_stat`` is (max - min)/mean of |B|/t^d over the second half
    of the t range.  t_max beyond L/2 is refused: chemical balls would
    touch the box boundary and the growth constant would be contaminated.
    """
    d = cluster.meta.get("d")
    L = cluster.meta.get("L")
    if d is None or L is None:
        raise ValueError("cluster graph lacks box metadata")
    if t_max < 2:
        raise ValueError("t_max must be >= 2")
    if t_max > L // 2:
        raise ValueError(f"t_max={t_max} exceeds L/2={L // 2}; "
                         "chemical balls would hit the box boundary")
    dist = cluster.bfs_from(cluster.base_index)
    dist = dist[dist >= 0]
    t = np.arange(1, t_max + 1, dtype=np.int64)
    counts = np.cumsum(np.bincount(dist, minlength=t_max + 1))[1:t_max + 1]
    normalized = counts / t.astype(np.float64) ** d
    lo = int(math.ceil(t_max / 2))
    window = normalized[lo - 1:]
    stat = float((window.max() - window.min()) / window.mean())
    return GrowthTable(t=t, ball_counts=counts, normalized=normalized,
                       plateau_window=(lo, t_max), plateau_stat=stat)


def cluster_ladder(cluster: Graph, k_max: int,
                   budget: int | None = None) -> RadiiLadder:
    return cluster.radii_ladder(k_max, budget)


def save_sample(sample: PercolationSample, path) -> None:
    """Binary layout: magic, three u64 (d, L, p fixed-point/2^32), u64 seed,
    then the open-edge bitmask packed MSB-first."""
    header = _MAGIC + struct.pack(
        "<QQQQ", sample.d, sample.L,
        int(round(sample.p * _P_FIXED_SCALE)), sample.seed)
    packed = np.packbits(sample.open_mask)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(packed.tobytes())


def load_sample(path) -> PercolationSample:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != _MAGIC:
        raise ValueError("not a percolation sample file")
    d, L, p_fixed, seed = struct.unpack("<QQQQ", blob[4:36])
    d, L = int(d), int(L)
    n_edges = d * L ** d
    bits = np.unpackbits(np.frombuffer(blob[36:], dtype=np.uint8),
                         count=n_edges).astype(bool)
    labels = _union_find_labels(d, L, bits)
    return PercolationSample(d=d, L=L, p=p_fixed / _P_FIXED_SCALE,
                             seed=int(seed), open_mask=bits, labels=labels)


def sample_digest(sample: PercolationSample) -> str:
    """SHA-256 of the packed open-edge mask (rerun identity checks)."""
    return hashlib.sha256(np.packbits(sample.open_mask).tobytes()).hexdigest()
