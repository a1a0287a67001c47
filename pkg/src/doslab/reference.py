"""Closed-form reference sequences and constants.

These are the analytically known objects the numerical pipelines are tested
against: a 0/1 sequence whose running means oscillate while its log-scaled
means settle, asymptotic ball-volume constants for l_p lattices, and the
arcsine integrated density of states of the free 1-d hopping chain.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

_CHUNK = 1 << 22


def block_indicator(n: int) -> int:
    """0/1 sequence constant on the dyadic blocks (2^m, 2^(m+1)].

    Entry 1 is 1; a block is all ones when m is odd and all zeros when m is
    even.  Running means therefore oscillate between 2/3 (at n = 4^m) and
    1/3 (at n = 2*4^m) while the harmonic-weighted log-scale means converge
    to 1/2.  O(log n) per evaluation.
    """
    if n < 1:
        raise ValueError("index starts at 1")
    if n == 1:
        return 1
    m = (n - 1).bit_length() - 1  # n lies in (2^m, 2^(m+1)]
    return m & 1


def block_indicator_ones(n: int) -> int:
    """Exact number of ones among entries 1..n (integer arithmetic)."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return 0
    count = 1
    m = 1
    while True:
        lo = (1 << (2 * m - 1)) + 1  # ones block is [2^(2m-1)+1, 2^(2m)]
        if lo > n:
            break
        hi = min(n, 1 << (2 * m))
        count += hi - lo + 1
        m += 1
    return count


def block_even_mean(m: int) -> Fraction:
    """Running mean at n = 4^m, exactly (1 + 2^(2m+1)) / (3 * 4^m)."""
    return Fraction(1 + (1 << (2 * m + 1)), 3 * 4 ** m)


def block_odd_mean(m: int) -> Fraction:
    """Running mean at n = 2 * 4^m, exactly (1 + 2^(2m+1)) / (3 * 2^(2m+1))."""
    return Fraction(1 + (1 << (2 * m + 1)), 3 * (1 << (2 * m + 1)))


def harmonic_block_sum(n: int) -> float:
    """Direct summation of sum_{k<=n} block_indicator(k)/k."""
    if n < 1:
        raise ValueError("n must be >= 1")
    total = 1.0
    m = 1
    while True:
        lo = (1 << (2 * m - 1)) + 1
        if lo > n:
            break
        hi = min(n, 1 << (2 * m))
        start = lo
        while start <= hi:
            stop = min(hi, start + _CHUNK - 1)
            k = np.arange(start, stop + 1, dtype=np.float64)
            total += float(np.add.reduce(1.0 / k))
            start = stop + 1
        m += 1
    return total


@dataclass
class BlockMeansRow:
    m: int
    n: int
    cesaro: Fraction
    log_cesaro: float


@dataclass
class BlockMeansReport:
    """Running means at the checkpoints n = 4^m and n = 2*4^m.

    ``cesaro`` values are exact rationals; ``log_cesaro`` is the float
    value of (sum_{k<=n} a_k/k) / log(2+n).
    """

    m_max: int
    rows: list

    def even_rows(self):
        return [r for r in self.rows if r.n == 4 ** r.m]

    def odd_rows(self):
        return [r for r in self.rows if r.n == 2 * 4 ** r.m]


def block_means_report(m_max: int) -> BlockMeansReport:
    if not 0 <= m_max <= 14:
        raise ValueError("m_max must be in 0..14 (n stays below 2^29)")
    rows = []
    for m in range(m_max + 1):
        for n in (4 ** m, 2 * 4 ** m):
            ces = Fraction(block_indicator_ones(n), n)
            lc = harmonic_block_sum(n) / math.log(2 + n)
            rows.append(BlockMeansRow(m=m, n=n, cesaro=ces, log_cesaro=lc))
    return BlockMeansReport(m_max=m_max, rows=rows)


def lp_ball_volume(d: int, p: float) -> float:
    """Volume of the unit l_p ball in R^d: 2^d Gamma(1+1/p)^d / Gamma(1+d/p).

    This is the leading coefficient of lattice ball counts,
    |B(0, r)| ~ V r^d, and the limiting trace slope of the standard
    lattice weight (1 + |x|_p)^(-d).
    """
    if d < 1:
        raise ValueError("dimension must be >= 1")
    if not p >= 1:
        raise ValueError("p must be >= 1")
    if math.isinf(p):
        return float(2 ** d)
    return (2.0 ** d) * math.gamma(1 + 1 / p) ** d / math.gamma(1 + d / p)


def arcsine_ids(energy):
    """Integrated density of states of the free 1-d chain, clamped to [0, 1].

    N(E) = 1/2 + arcsin(E/2)/pi on [-2, 2]; 0 below, 1 above.  Works on
    scalars and arrays.
    """
    e = np.clip(np.asarray(energy, dtype=np.float64), -2.0, 2.0)
    out = 0.5 + np.arcsin(e / 2.0) / np.pi
    if np.isscalar(energy) or np.ndim(energy) == 0:
        return float(out)
    return out
