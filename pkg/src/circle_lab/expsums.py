"""Exponential sums along polynomial orbits and their oscillatory-integral
counterpart.

m_N(xi)  = mean over n = 1..N of e(xi * P(n)),  e(t) = exp(2*pi*i*t)
G(a/q)   = m_q(a/q), the complete rational sum
mm_N(xi) = integral over t in [0,1] of e(xi * P(N*t)) dt

Rational points are evaluated with exact integer phase reduction through a
root-of-unity table; real points use Horner recursion with a mod-1 reduction
at every step, which keeps the phase error near machine precision even when
P(n) is huge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import NamedTuple, Sequence

import numpy as np

from ._util import parallel_map, substream
from .arcs import ArcSystem, ReducedFraction, TorusPoint, minor_sample, wrap_signed
from .polyavg import IndexRange, IntPolynomial, kernel, spectrum


@lru_cache(maxsize=256)
def _unity_roots(q: int) -> np.ndarray:
    table = np.exp(2j * math.pi * np.arange(q) / q)
    table.flags.writeable = False
    return table


def _phase_fracs(poly: IntPolynomial, xi: float, ns: np.ndarray) -> np.ndarray:
    """Fractional parts of xi * P(n), reduced mod 1 after each Horner step.

    Valid because multiplying by an integer n preserves values mod 1.
    """
    acc = np.full(ns.shape, (xi * poly.coefficients[-1]) % 1.0)
    for c in reversed(poly.coefficients[:-1]):
        acc = (acc * ns + (xi * c) % 1.0) % 1.0
    return acc


def weyl_sum(
    poly: IntPolynomial,
    n_range: IndexRange | int,
    xi: "TorusPoint | ReducedFraction | Fraction | float",
) -> complex:
    """Normalized exponential sum m_N(xi); |m_N| <= 1 always.

    A ReducedFraction or Fraction argument takes the exact path: phases
    a*P(n) are reduced mod q in integers, the sum uses only q-th roots of
    unity, and periodicity in n collapses the cost to O(q).
    """
    n = int(IndexRange.of(n_range))
    if isinstance(xi, (ReducedFraction, Fraction)):
        a, q = xi.numerator % xi.denominator, xi.denominator
        table = _unity_roots(q)
        # n and n + q produce identical phases, so count residues of [1, N]
        counts = np.full(q, n // q, dtype=np.int64)
        for r in range(1, n % q + 1):
            counts[r % q] += 1
        phases = np.array([(a * poly.eval_mod(r, q)) % q for r in range(q)])
        return complex(np.dot(counts, table[phases]) / n)
    x = TorusPoint.of(xi).value if isinstance(xi, TorusPoint) else float(xi)
    ns = np.arange(1, n + 1, dtype=float)
    return complex(np.exp(2j * math.pi * _phase_fracs(poly, x, ns)).mean())


def complete_sum(poly: IntPolynomial, theta: ReducedFraction) -> complex:
    """G(a/q) = m_q(a/q), computed with exact rational phases."""
    a, q = theta.numerator, theta.denominator
    table = _unity_roots(q)
    acc = 0j
    for n in range(1, q + 1):
        acc += table[(a * poly.eval_mod(n, q)) % q]
    return acc / q


def weyl_multiplier_grid(poly: IntPolynomial, n_range: IndexRange | int, grid_q: int) -> np.ndarray:
    """m_N at every grid frequency j/grid_q, via one FFT of the kernel."""
    return spectrum(kernel(poly, n_range, grid_q))


def minor_sup_grid(
    poly: IntPolynomial, n_range: IndexRange | int, arcs: ArcSystem, grid_q: int
) -> float:
    """Full-grid oracle: sup of |m_N| over grid frequencies outside the arcs."""
    vals = np.abs(weyl_multiplier_grid(poly, n_range, grid_q))
    xs = np.arange(grid_q) / grid_q
    minor = arcs.distances(xs) > arcs.halfwidth
    if not minor.any():
        raise ValueError("arcs cover every grid frequency")
    return float(vals[minor].max())


# ---------------------------------------------------------------------------
# Oscillatory integral mm_N
# ---------------------------------------------------------------------------

_GL_NODES = 16


@lru_cache(maxsize=8)
def _gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return (nodes + 1.0) / 2.0, weights / 2.0  # mapped to [0, 1]


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the oscillatory quadrature: panels scale with the total
    phase variation so each oscillation gets nodes_per_oscillation points."""

    base_panels: int = 4
    nodes_per_oscillation: int = 8
    tolerance: float = 1e-9
    panel_budget: int = 1 << 18

    def __post_init__(self):
        if self.base_panels < 1:
            raise ValueError("base panel count must be >= 1")
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")


def _integrate_panels(scaled_coeffs: np.ndarray, panels: int) -> complex:
    nodes, weights = _gauss_legendre(_GL_NODES)
    edges = np.linspace(0.0, 1.0, panels + 1)
    widths = np.diff(edges)
    ts = edges[:-1, None] + widths[:, None] * nodes[None, :]
    phase = np.zeros_like(ts)
    for c in scaled_coeffs[::-1]:
        phase = phase * ts + c
    vals = np.exp(2j * math.pi * (phase % 1.0))
    return complex(np.sum(vals * (widths[:, None] * weights[None, :])))


def continuous_multiplier(
    poly: IntPolynomial,
    n_range: IndexRange | int,
    xi: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> complex:
    """mm_N(xi) = integral of e(xi * P(N t)) over t in [0, 1].

    Composite Gauss-Legendre with the panel count driven by the phase
    variation bound |xi| * sum_k |c_k| N^k, then doubled until two successive
    answers agree within the tolerance.  Raises if the panel budget runs out
    first.
    """
    n = int(IndexRange.of(n_range))
    x = float(xi)
    variation = abs(x) * poly.abs_bound(n)
    panels = max(
        quad.base_panels,
        math.ceil(variation * quad.nodes_per_oscillation / _GL_NODES),
    )

    def budget_error() -> RuntimeError:
        return RuntimeError(
            f"quadrature did not reach tolerance {quad.tolerance} within "
            f"{quad.panel_budget} panels (phase variation ~{variation:.3g})"
        )

    if panels > quad.panel_budget:
        raise budget_error()
    scaled = np.array(
        [x * c * float(n) ** k for k, c in enumerate(poly.coefficients)], dtype=float
    )
    prev = _integrate_panels(scaled, panels)
    while True:
        panels *= 2
        if panels > quad.panel_budget:
            raise budget_error()
        curr = _integrate_panels(scaled, panels)
        if abs(curr - prev) <= quad.tolerance:
            return curr
        prev = curr


# ---------------------------------------------------------------------------
# Decay scan over minor arcs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DecayScanReport:
    """Per-N minor-arc suprema with a log-log least squares exponent fit."""

    points: tuple[tuple[int, float], ...]
    exponent: float
    fit_residual: float
    params: dict

    def __post_init__(self):
        ns = [n for n, _ in self.points]
        if ns != sorted(set(ns)):
            raise ValueError("scan N values must be strictly increasing")
        for _, s in self.points:
            if not 0.0 <= s <= 1.0 + 1e-12:
                raise ValueError("sup |m_N| must lie in [0, 1]")

    def to_dict(self) -> dict:
        return {
            "points": [{"n": n, "sup_abs": s} for n, s in self.points],
            "c_fit": self.exponent,
            "residual": self.fit_residual,
            "params": self.params,
        }


def scan_arcs(
    n: int, degree: int, eps: float, big_c: float, halfwidth: float | None = None
) -> ArcSystem:
    """Arc system for scale N under the rule delta = N^(-eps): denominators
    up to delta^(-C), halfwidth N^(-d) * delta^(-C) unless overridden."""
    delta_pow = float(n) ** (eps * big_c)
    n2 = halfwidth if halfwidth is not None else float(n) ** (-degree) * delta_pow
    return ArcSystem(max(1.0, delta_pow), n2)


def weyl_decay_scan(
    poly: IntPolynomial,
    n_values: Sequence[int],
    eps: float,
    big_c: float,
    samples: int,
    seed: int,
    halfwidth: float | None = None,
    threads: int | None = None,
) -> DecayScanReport:
    """Sampled sup of |m_N| over minor arcs for each N, plus the fitted decay
    exponent c (sup ~ N^(-c)).

    Each N gets its own seed substream, so the report is independent of the
    worker count.  `halfwidth` freezes the arc width instead of the
    N^(-d)*delta^(-C) rule (useful for the degree-one closed-form check).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    ns = sorted(set(int(n) for n in n_values))
    degree = poly.degree

    # sample and evaluate per N; substream key is the position in the scan
    def evaluate(task: tuple[int, int]) -> float:
        idx, n = task
        arcs = scan_arcs(n, degree, eps, big_c, halfwidth)
        pts = minor_sample(arcs, samples, substream(seed, idx))
        xs = np.array([p.value for p in pts])
        return float(_weyl_abs_many(poly, n, xs).max())

    sups = parallel_map(evaluate, list(enumerate(ns)), threads)
    if len(ns) >= 2:
        log_n = np.log(np.array(ns, dtype=float))
        log_s = np.log(np.maximum(np.array(sups), 1e-300))
        slope, intercept = np.polyfit(log_n, log_s, 1)
        resid = float(np.sqrt(np.mean((log_s - (slope * log_n + intercept)) ** 2)))
    else:
        slope, resid = 0.0, 0.0  # a single scale carries no fit
    return DecayScanReport(
        points=tuple(zip(ns, sups)),
        exponent=float(-slope),
        fit_residual=resid,
        params={
            "poly": str(poly),
            "eps": eps,
            "big_c": big_c,
            "samples": samples,
            "seed": seed,
            "halfwidth": halfwidth,
        },
    )


def _weyl_abs_many(poly: IntPolynomial, n: int, xs: np.ndarray) -> np.ndarray:
    """|m_N| at an array of real points, chunked to bound memory."""
    ns = np.arange(1, n + 1, dtype=float)
    out = np.empty(xs.size)
    chunk = max(1, (1 << 21) // max(n, 1))
    for start in range(0, xs.size, chunk):
        block = xs[start : start + chunk]
        acc = np.full((block.size, n), (block[:, None] * poly.coefficients[-1]) % 1.0)
        for c in reversed(poly.coefficients[:-1]):
            acc = (acc * ns[None, :] + (block[:, None] * c) % 1.0) % 1.0
        out[start : start + block.size] = np.abs(
            np.exp(2j * math.pi * acc).mean(axis=1)
        )
    return out


# ---------------------------------------------------------------------------
# Rational-center approximation residual
# ---------------------------------------------------------------------------


class Lemma1Result(NamedTuple):
    residual: float
    bound: float
    ratio: float


def shell_index(q: int) -> int:
    """Dyadic shell of a denominator: smallest l with q <= 2^l."""
    return (q - 1).bit_length()


def lemma1_residual(
    poly: IntPolynomial,
    n_range: IndexRange | int,
    theta: ReducedFraction,
    xi: TorusPoint | float,
    big_m: float,
    quad: QuadratureSpec = QuadratureSpec(),
) -> Lemma1Result:
    """Compare m_N(xi) with G(theta) * mm_N(xi - theta) for xi near theta.

    Returns the residual, the reference bound 2^l (M^-1 N^(d-1) + N^-1)
    where 2^(l-1) < q <= 2^l, and their ratio.  Requires the torus distance
    |xi - theta| <= 1/M.
    """
    n = int(IndexRange.of(n_range))
    x = TorusPoint.of(xi).value
    offset = float(wrap_signed(x - theta.value))
    if abs(offset) > 1.0 / big_m + 1e-15:
        raise ValueError(
            f"|xi - theta| = {abs(offset):.3e} exceeds 1/M = {1.0 / big_m:.3e}"
        )
    level = shell_index(theta.denominator)
    approx = complete_sum(poly, theta) * continuous_multiplier(poly, n, offset, quad)
    residual = abs(weyl_sum(poly, n, x) - approx)
    degree = poly.degree
    bound = 2.0**level * (float(n) ** (degree - 1) / big_m + 1.0 / n)
    return Lemma1Result(float(residual), float(bound), float(residual / bound))


def lemma1_grid_sweep(
    poly: IntPolynomial,
    n_values: Sequence[int],
    l_max: int,
    samples_per_cell: int,
    seed: int,
    quad: QuadratureSpec = QuadratureSpec(),
) -> dict:
    """Max residual/bound ratio over a (N, shell level) grid with
    M = N^d * 2^(-l) and seeded admissible (theta, xi) pairs per cell."""
    from .arcs import dyadic_shell

    degree = poly.degree
    cells = {}
    per_n: dict[int, float] = {}
    for i, n in enumerate(sorted(set(int(v) for v in n_values))):
        for level in range(l_max + 1):
            shell = dyadic_shell(level)
            big_m = float(n) ** degree * 2.0**-level
            rng = substream(seed, i, level)
            worst = 0.0
            for _ in range(samples_per_cell):
                theta = shell[rng.integers(len(shell))]
                offset = rng.uniform(-1.0, 1.0) / big_m
                xi = (theta.value + offset) % 1.0
                res = lemma1_residual(poly, n, theta, xi, big_m, quad)
                worst = max(worst, res.ratio)
            cells[(n, level)] = worst
            per_n[n] = max(per_n.get(n, 0.0), worst)
    return {
        "degree": degree,
        "cells": cells,
        "max_ratio_per_n": per_n,
        "max_ratio": max(per_n.values()),
    }
