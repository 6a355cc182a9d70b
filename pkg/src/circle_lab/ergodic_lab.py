"""Finite cyclic model systems and convergence diagnostics for polynomial
averages.

A system is Z/QZ with the shift x -> x - s; its averages along a polynomial
orbit reduce to the convolution operators of `polyavg` with the coefficient
scaling c -> s*c.  Diagnostics never assert limit theorems, they measure:
variation and oscillation along a scale set, tail Cauchy widths, finite-N
correlation estimates, and star discrepancy of real orbits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .polyavg import IntPolynomial, Signal, average_linear, riesz_split
from .seminorms import LacunarySet, variation_values


@dataclass(frozen=True)
class FiniteSystem:
    """Z/QZ with the measure-preserving shift T(x) = x - s mod Q."""

    modulus: int
    shift: int

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")

    @property
    def is_ergodic(self) -> bool:
        return math.gcd(self.shift % self.modulus, self.modulus) == 1

    def compose(self, f: Signal, power: int = 1) -> Signal:
        """f after T^power, i.e. x -> f(x - power * s)."""
        return Signal(self.modulus, np.roll(f.values, (power * self.shift) % self.modulus))


@dataclass(frozen=True)
class AverageSeries:
    """Averages A_N f for every N in an increasing index set."""

    indices: tuple[int, ...]
    signals: tuple[Signal, ...]
    system: FiniteSystem
    poly: IntPolynomial

    def __post_init__(self):
        if list(self.indices) != sorted(set(self.indices)):
            raise ValueError("index set must be strictly increasing")
        if len(self.indices) != len(self.signals):
            raise ValueError("one signal per index required")

    def matrix(self) -> np.ndarray:
        """Stacked values, shape (number of N, Q)."""
        return np.stack([sig.values for sig in self.signals])


def orbit_polynomial(sys: FiniteSystem, poly: IntPolynomial) -> IntPolynomial:
    """f(T^P(n) x) = f(x - s*P(n)), so the effective orbit map is s*P."""
    return IntPolynomial(sys.shift * c for c in poly.coefficients)


def average_series(
    sys: FiniteSystem,
    poly: IntPolynomial,
    f: Signal,
    n_values: "LacunarySet | Sequence[int]",
    uniform_from: int = 0,
) -> AverageSeries:
    """A_N f for each N, via the convolution operators on Z/QZ.

    uniform_from = M > 0 averages over n in (M, N] instead of [1, N]
    (reported as-is; nothing is asserted about that variant).
    """
    if f.modulus != sys.modulus:
        raise ValueError("signal modulus must match the system")
    ns = tuple(int(n) for n in n_values)
    scaled = orbit_polynomial(sys, poly)
    m = int(uniform_from)
    signals = []
    for n in ns:
        if m > 0:
            if n <= m:
                raise ValueError("uniform averages need N > M")
            full = average_linear(scaled, n, f)
            head = average_linear(scaled, m, f)
            signals.append((n * full - m * head) * (1.0 / (n - m)))
        else:
            signals.append(average_linear(scaled, n, f))
    return AverageSeries(ns, tuple(signals), sys, poly)


def uniform_average(
    sys: FiniteSystem, poly: IntPolynomial, f: Signal, m: int, n: int
) -> Signal:
    """Average of f(T^P(k) x) over k in (m, n]."""
    return average_series(sys, poly, f, [n], uniform_from=m).signals[0]


def convergence_diagnostic(
    series: AverageSeries,
    r: float,
    tail_start: int,
    p_values: Sequence[float] = (2.0,),
) -> dict:
    """Per-point variation, blockwise oscillation, and tail Cauchy width of
    N -> A_N f(x), aggregated over x.

    Oscillation anchors default to every other index of the series (the
    finest choice whose blocks are nonempty); whether the anchors double is
    reported, not required.  Aggregates use the uniform probability measure
    on Z/QZ.
    """
    if not (1 <= r < math.inf):
        raise ValueError("diagnostic exponent must satisfy 1 <= r < inf")
    ns = np.array(series.indices)
    tail_mask = ns >= tail_start
    if tail_mask.sum() < 2:
        raise ValueError("need at least two indices >= tail_start")
    mat = series.matrix()  # (T, Q)

    vr = variation_values(mat, r)

    anchors = list(range(0, len(ns), 2))
    if anchors[-1] != len(ns) - 1:
        anchors.append(len(ns) - 1)
    if len(anchors) < 2:
        anchors = [0, len(ns) - 1]
    osc_pow = np.zeros(mat.shape[1])
    for a, b in zip(anchors, anchors[1:]):
        block = np.abs(mat[a:b] - mat[a]).max(axis=0)
        osc_pow += block**r
    osc = osc_pow ** (1.0 / r)
    anchor_ns = [int(ns[i]) for i in anchors]
    doubling = all(b > 2 * a for a, b in zip(anchor_ns, anchor_ns[1:]))

    tail = mat[tail_mask]
    width = np.zeros(mat.shape[1])
    for i in range(tail.shape[0] - 1):
        width = np.maximum(width, np.abs(tail[i + 1 :] - tail[i]).max(axis=0))

    def aggregate(stat: np.ndarray) -> dict:
        out = {"max": float(stat.max())}
        for p in p_values:
            out[f"l{p:g}"] = float((np.abs(stat) ** p).mean() ** (1.0 / p))
        return out

    return {
        "r": r,
        "tail_start": int(tail_start),
        "indices": [int(n) for n in ns],
        "variation": aggregate(vr),
        "oscillation": {**aggregate(osc), "anchors": anchor_ns, "doubling": doubling},
        "tail_width": aggregate(width),
    }


def vdc_correlation(vectors, max_lag: int) -> np.ndarray:
    """Finite-N correlation estimates s_h = |mean over n of <u_(n+h), u_n>|
    for h = 1..max_lag; a diagnostic, no limit claim attached."""
    u = np.asarray(vectors, dtype=np.complex128)
    if u.ndim == 1:
        u = u[:, None]
    n = u.shape[0]
    if not 1 <= max_lag < n:
        raise ValueError("need 1 <= max_lag < number of vectors")
    out = np.empty(max_lag)
    for h in range(1, max_lag + 1):
        inner = (u[h:] * np.conj(u[:-h])).sum(axis=1)
        out[h - 1] = abs(inner.mean())
    return out


@dataclass(frozen=True)
class DiscrepancyReport:
    entries: tuple[tuple[int, float], ...]

    def __post_init__(self):
        for _, d in self.entries:
            if not 0.0 <= d <= 1.0:
                raise ValueError("star discrepancy lies in [0, 1]")

    def to_dict(self) -> dict:
        return {"entries": [{"n": n, "d_star": d} for n, d in self.entries]}


def _orbit_fractions(poly: IntPolynomial, theta: float, n_max: int) -> np.ndarray:
    """Fractional parts of P(n) * theta for n = 1..n_max, exact with respect
    to the binary value of theta: P(n) is an exact integer and theta an
    exact dyadic rational, so each product is reduced mod 1 in integers."""
    frac_theta = Fraction(theta)
    num, den = frac_theta.numerator, frac_theta.denominator
    out = np.empty(n_max)
    for n in range(1, n_max + 1):
        out[n - 1] = ((poly(n) * num) % den) / den
    return out


def star_discrepancy(points: np.ndarray) -> float:
    """D*_N of a point set in [0, 1) by the sorted-points formula."""
    xs = np.sort(np.asarray(points, dtype=float) % 1.0)
    n = xs.size
    idx = np.arange(1, n + 1)
    return float(np.maximum(idx / n - xs, xs - (idx - 1) / n).max())


def discrepancy(
    poly: IntPolynomial, theta: float, n_values: Sequence[int]
) -> DiscrepancyReport:
    """Star discrepancy of {P(n) * theta mod 1 : n <= N} for each N."""
    ns = sorted(set(int(n) for n in n_values))
    if not ns or ns[0] < 1:
        raise ValueError("discrepancy needs N values >= 1")
    pts = _orbit_fractions(poly, theta, ns[-1])
    entries = tuple((n, star_discrepancy(pts[:n])) for n in ns)
    return DiscrepancyReport(entries)


def mean_ergodic_check(
    sys: FiniteSystem, f: Signal, n_values: Sequence[int]
) -> dict:
    """Root-mean-square distance of the linear averages A_N f from the
    shift-invariant part of f, per N.

    For an ergodic shift the invariant part is the constant mean and the
    deviation vanishes exactly at every multiple of Q.
    """
    if f.modulus != sys.modulus:
        raise ValueError("signal modulus must match the system")
    invariant = riesz_split(f, sys.shift).invariant
    linear = IntPolynomial((0, 1))
    entries = []
    for n in sorted(set(int(v) for v in n_values)):
        avg = average_series(sys, linear, f, [n]).signals[0]
        dev = float(np.sqrt(np.mean(np.abs((avg - invariant).values) ** 2)))
        entries.append((n, dev))
    return {
        "ergodic": sys.is_ergodic,
        "entries": entries,
    }
