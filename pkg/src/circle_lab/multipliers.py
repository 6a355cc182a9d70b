"""Smooth multi-frequency Fourier multipliers on Z/QZ.

The basic object is a symbol built by planting a bump (or any base symbol)
at every canonical fraction and evaluating the sum exactly at the grid
frequencies j/Q; centers never get rounded to the grid.  Projections onto
major-arc frequencies, the general coefficient-weighted operators, and the
major/minor pipeline split are all built on that one primitive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from ._util import substream
from .arcs import (
    DyadicScale,
    ReducedFraction,
    TorusIntervalSet,
    canonical_fractions,
    dyadic_shell,
    wrap_signed,
)
from .polyavg import (
    IndexRange,
    IntPolynomial,
    Signal,
    average_linear,
    grid_frequencies,
    signal_from_spectrum,
    spectrum,
)


def eta(x):
    """Even smooth cutoff: 1 on [-1/4, 1/4], 0 outside (-1/2, 1/2), glued
    with exp(-1/t) so the transition is smooth to all orders."""
    ax = np.abs(np.asarray(x, dtype=float))
    out = np.zeros(ax.shape)
    out[ax <= 0.25] = 1.0
    band = (ax > 0.25) & (ax < 0.5)
    if band.any():
        t_out = 0.5 - ax[band]   # distance to the outer edge
        t_in = ax[band] - 0.25   # distance past the flat part
        with np.errstate(over="ignore"):
            out[band] = 1.0 / (1.0 + np.exp(1.0 / t_out - 1.0 / t_in))
    if np.isscalar(x) or np.ndim(x) == 0:
        return float(out)
    return out


def eta_at_scale(log2_scale: float) -> Callable[[np.ndarray], np.ndarray]:
    """The dilated cutoff x -> eta(2^(-log2_scale) * x)."""
    factor = 2.0**-log2_scale
    return lambda x: eta(np.asarray(x, dtype=float) * factor)


# ---------------------------------------------------------------------------
# Projection operators
# ---------------------------------------------------------------------------


def projection_symbol(modulus: int, n1: float, n2: float) -> np.ndarray:
    """Symbol of the smooth major-arc projection at the grid frequencies:
    sum over canonical fractions theta of eta((j/Q - theta)/n2), offsets
    wrapped to (-1/2, 1/2]."""
    xs = grid_frequencies(modulus)
    sym = np.zeros(modulus)
    for fr in canonical_fractions(n1):
        sym += eta(wrap_signed(xs - fr.value) / n2)
    return sym


def project(f: Signal, n1: float, n2: float) -> Signal:
    """Smoothly restrict the spectrum of f to halfwidth-n2/2 neighborhoods
    of the canonical fractions of denominator <= n1."""
    sym = projection_symbol(f.modulus, n1, n2)
    return signal_from_spectrum(f.modulus, sym * spectrum(f))


def project_dyadic(f: Signal, scale: DyadicScale, shell: bool = False) -> Signal:
    """Dyadic projection at denominators <= 2^l, halfwidth scale 2^m.

    With shell=True only the level-l fractions contribute (the difference
    of consecutive full projections)."""
    if not shell or scale.l == 0:
        return project(f, 2.0**scale.l, 2.0**scale.m)
    full = project(f, 2.0**scale.l, 2.0**scale.m)
    lower = project(f, 2.0 ** (scale.l - 1), 2.0**scale.m)
    return full - lower


def projection_property_report(q: int, l: int, m: int, seed: int) -> dict:
    """Deviations for the four structural projection properties at (l, m):
    self-adjointness, l2 contraction, spectral support containment, and
    reproduction of deeply supported signals."""
    rng = substream(seed)
    scale = DyadicScale(l, m)
    f = Signal(q, rng.standard_normal(q) + 1j * rng.standard_normal(q))
    g = Signal(q, rng.standard_normal(q) + 1j * rng.standard_normal(q))
    pf, pg = project_dyadic(f, scale), project_dyadic(g, scale)
    self_adjoint = abs(np.vdot(pf.values, g.values) - np.vdot(f.values, pg.values))
    contraction = pf.norm(2) / f.norm(2)

    xs = grid_frequencies(q)
    centers = np.array([fr.value for fr in canonical_fractions(2.0**l)])
    dist = np.abs(wrap_signed(xs[:, None] - centers[None, :])).min(axis=1)
    outside = dist > 2.0**m
    support_leak = float(np.abs(spectrum(pf)[outside]).max()) if outside.any() else 0.0

    deep = dist <= 2.0 ** (m - 2)
    spec = np.zeros(q, dtype=np.complex128)
    spec[deep] = rng.standard_normal(int(deep.sum())) + 1j * rng.standard_normal(
        int(deep.sum())
    )
    h = signal_from_spectrum(q, spec)
    reproduction = (project_dyadic(h, scale) - h).norm(2)
    return {
        "q": q,
        "l": l,
        "m": m,
        "self_adjoint_gap": float(self_adjoint),
        "l2_contraction_ratio": float(contraction),
        "support_leak": support_leak,
        "reproduction_gap": float(reproduction),
        "deep_support_size": int(deep.sum()),
    }


def shell_vanishing_overlap(
    level: int, cut_log2: float, lower_level: int, lower_cut_log2: float
) -> float:
    """Overlap measure between the level-`level` shell arcs of halfwidth
    2^cut_log2 and the arcs around all denominators <= 2^lower_level of
    halfwidth 2^lower_cut_log2.

    Zero overlap certifies that a multiplier supported on the first family
    annihilates spectra living on the second.  Both cut exponents are free
    real parameters, so width rules like -d*u + eps*(level-1) plug in
    without fixing eps.
    """
    shell_set = TorusIntervalSet.from_arcs(
        [fr.value for fr in dyadic_shell(level)], 2.0**cut_log2
    )
    lower_set = TorusIntervalSet.from_arcs(
        [fr.value for fr in canonical_fractions(2.0**lower_level)],
        2.0**lower_cut_log2,
    )
    return shell_set.intersect(lower_set).measure


# ---------------------------------------------------------------------------
# General multi-frequency multiplier operators
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MultiplierOp:
    """Operator with symbol sum_theta S(theta) * base(xi - theta).

    `coefficients` maps each frequency to its weight (missing keys count as
    1).  `base_symbol` must accept a float array of wrapped offsets; when
    `support_halfwidth` is set, the base symbol is treated as 0 beyond that
    offset, which skips useless evaluations.
    """

    frequencies: tuple[ReducedFraction, ...]
    coefficients: Mapping[ReducedFraction, complex] | None
    base_symbol: Callable[[np.ndarray], np.ndarray]
    support_halfwidth: float | None = None

    def __post_init__(self):
        if not self.frequencies:
            raise ValueError("multiplier needs at least one frequency")

    def weight(self, fr: ReducedFraction) -> complex:
        if self.coefficients is None:
            return 1.0
        return complex(self.coefficients.get(fr, 1.0))

    def symbol_on_grid(self, modulus: int) -> np.ndarray:
        xs = grid_frequencies(modulus)
        sym = np.zeros(modulus, dtype=np.complex128)
        for fr in self.frequencies:
            offsets = wrap_signed(xs - fr.value)
            if self.support_halfwidth is not None:
                live = np.abs(offsets) <= self.support_halfwidth
                if not live.any():
                    continue
                vals = np.zeros(modulus, dtype=np.complex128)
                vals[live] = self.weight(fr) * np.asarray(
                    self.base_symbol(offsets[live]), dtype=np.complex128
                )
                sym += vals
            else:
                sym += self.weight(fr) * np.asarray(
                    self.base_symbol(offsets), dtype=np.complex128
                )
        return sym


def identity_op() -> MultiplierOp:
    return MultiplierOp(
        (ReducedFraction(0, 1),), None, lambda x: np.ones_like(np.asarray(x, dtype=float))
    )


def projection_op(n1: float, n2: float) -> MultiplierOp:
    """The major-arc projection as a MultiplierOp (weights 1, bump base)."""
    return MultiplierOp(
        tuple(canonical_fractions(n1)),
        None,
        lambda x, s=float(n2): eta(np.asarray(x, dtype=float) / s),
        support_halfwidth=float(n2) / 2.0,
    )


def multiplier_apply(f: Signal, op: MultiplierOp) -> Signal:
    return signal_from_spectrum(f.modulus, op.symbol_on_grid(f.modulus) * spectrum(f))


def l2_operator_norm(op: MultiplierOp, modulus: int) -> float:
    """On Z/QZ the l2 operator norm of a multiplier is the max of |symbol|
    over the grid frequencies."""
    return float(np.abs(op.symbol_on_grid(modulus)).max())


def kernel_l1_bound(op: MultiplierOp, modulus: int) -> float:
    """l1 norm of the convolution kernel: an upper bound for the operator
    norm on every l^p, 1 <= p <= inf."""
    kern = signal_from_spectrum(modulus, op.symbol_on_grid(modulus))
    return float(np.abs(kern.values).sum())


def lp_norm_probe(
    op: MultiplierOp,
    p: float,
    modulus: int,
    trials: int,
    seed: int,
    ascent_steps: int = 12,
) -> float:
    """Certified lower bound for the l^p -> l^p operator norm.

    Random complex starts refined by the power-type ascent for p-norms of
    linear maps (apply, take the dual-exponent signed power, apply the
    adjoint, repeat).  Every iterate's ratio ||Tf||_p / ||f||_p is achieved
    by an explicit vector, so the maximum over trials is a true lower bound.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if p <= 1:
        raise ValueError("probe needs p > 1")
    sym = op.symbol_on_grid(modulus)
    conj_sym = np.conj(sym)
    p_dual = p / (p - 1.0)

    def apply(vec: np.ndarray, symbol: np.ndarray) -> np.ndarray:
        return np.fft.fft(symbol * np.fft.ifft(vec))

    def lp(vec: np.ndarray) -> float:
        return float((np.abs(vec) ** p).sum() ** (1.0 / p))

    def signed_power(vec: np.ndarray, exponent: float) -> np.ndarray:
        mags = np.abs(vec)
        phases = np.where(mags > 0, vec / np.where(mags > 0, mags, 1.0), 0.0)
        return (mags**exponent) * phases

    best = 0.0
    for t in range(trials):
        rng = substream(seed, t)
        f = rng.standard_normal(modulus) + 1j * rng.standard_normal(modulus)
        for _ in range(ascent_steps):
            nf = lp(f)
            if nf == 0.0:
                break
            tf = apply(f, sym)
            best = max(best, lp(tf) / nf)
            g = signed_power(tf, p - 1.0)
            h = apply(g, conj_sym)
            if not np.any(h):
                break
            f = signed_power(h, p_dual - 1.0)
    return best


# ---------------------------------------------------------------------------
# Scale bookkeeping and the major/minor split
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    """Scale parameters of the major/minor split.

    Dyadic logs throughout: at scale N the projection uses denominators up
    to 2^(low_scale) and halfwidth 2^(-degree * high_scale) with
    low_scale = floor(alpha * log2 N) and high_scale = floor(log2 N) -
    low_scale.
    """

    alpha: float
    c0: int
    p0: int
    degree: int
    tau: float

    def __post_init__(self):
        limit = 1.0 / (1_000_000 * self.degree * self.p0)
        if not 0.0 < self.alpha < limit:
            raise ValueError(
                f"alpha must lie in (0, {limit:.3e}) for degree {self.degree}, p0 {self.p0}"
            )
        if self.p0 < 2 or self.p0 % 2:
            raise ValueError("p0 must be an even integer >= 2")
        if self.tau <= 1.0:
            raise ValueError("tau must exceed 1")
        if self.c0 < 1:
            raise ValueError("c0 must be a positive integer")

    @classmethod
    def desk(
        cls, degree: int, p0: int = 4, tau: float = 2.0, c0: int = 64
    ) -> "PipelineConfig":
        """Desk-scale defaults.

        alpha is half of 1e-7/(degree*p0).  The analysis that motivates the
        split wants c0 at least 2^(10^6 * degree * p0), which no computation
        can touch; c0 = 64 keeps the same pipeline shape at reachable sizes,
        and the split identity holds for every N >= c0 regardless.
        """
        return cls(
            alpha=0.5e-7 / (degree * p0), c0=c0, p0=p0, degree=degree, tau=tau
        )

    def low_scale(self, n: int) -> int:
        return math.floor(self.alpha * math.log2(n))

    def high_scale(self, n: int) -> int:
        return math.floor(math.log2(n)) - self.low_scale(n)

    def scale_at(self, n: int) -> DyadicScale:
        return DyadicScale(self.low_scale(n), -self.degree * self.high_scale(n))


def arc_split(
    f: Signal,
    poly: IntPolynomial,
    n_range: IndexRange | int,
    cfg: PipelineConfig,
    p_values: Sequence[float] = (2.0,),
) -> tuple[Signal, Signal, dict]:
    """Split A_N f into the averaged major-arc projection plus the rest.

    major = A_N (Pi f), minor = A_N (f - Pi f); the two add back to A_N f
    by linearity.  The report carries the minor/input norm ratios.
    """
    n = int(IndexRange.of(n_range))
    if n < cfg.c0:
        raise ValueError(f"scale N={n} is below the pipeline floor c0={cfg.c0}")
    if poly.degree != cfg.degree:
        raise ValueError(
            f"config degree {cfg.degree} does not match polynomial degree {poly.degree}"
        )
    scale = cfg.scale_at(n)
    projected = project_dyadic(f, scale)
    major = average_linear(poly, n, projected)
    minor = average_linear(poly, n, f - projected)
    ratios = {}
    for p in p_values:
        denom = f.norm(p)
        ratios[str(p)] = float(minor.norm(p) / denom) if denom > 0 else 0.0
    report = {
        "n": n,
        "low_scale": scale.l,
        "halfwidth_log2": scale.m,
        "minor_ratio": ratios,
        "l2_ratio": float(minor.norm(2) / f.norm(2)) if f.norm(2) > 0 else 0.0,
    }
    return major, minor, report


# ---------------------------------------------------------------------------
# Rational-approximation operators and their factorization
# ---------------------------------------------------------------------------


def gauss_coefficients(
    poly: IntPolynomial, frequencies: Sequence[ReducedFraction]
) -> dict[ReducedFraction, complex]:
    from .expsums import complete_sum

    return {fr: complete_sum(poly, fr) for fr in frequencies}


def approx_average_op(
    poly: IntPolynomial,
    n_range: IndexRange | int,
    level: int,
    high_scale: int,
    quad=None,
    shell_only: bool = False,
) -> MultiplierOp:
    """The rational-center model of A_N on major arcs: weights are the
    complete sums, the base symbol is mm_N times the cutoff at scale
    2^(-degree * high_scale)."""
    from .expsums import QuadratureSpec, continuous_multiplier

    n = int(IndexRange.of(n_range))
    quad = quad or QuadratureSpec()
    degree = poly.degree
    cut = eta_at_scale(-degree * high_scale)
    freqs = tuple(dyadic_shell(level) if shell_only else canonical_fractions(2.0**level))

    def base(offsets: np.ndarray) -> np.ndarray:
        offs = np.atleast_1d(np.asarray(offsets, dtype=float))
        out = np.empty(offs.shape, dtype=np.complex128)
        for i, x in enumerate(offs):
            out[i] = continuous_multiplier(poly, n, float(x), quad)
        return out * cut(offs)

    return MultiplierOp(
        freqs,
        gauss_coefficients(poly, freqs),
        base,
        support_halfwidth=2.0 ** (-degree * high_scale - 1),
    )


def factorization_gap(
    f: Signal,
    poly: IntPolynomial,
    n_range: IndexRange | int,
    level: int,
    high_scale: int,
    narrow_scale: int,
    quad=None,
) -> float:
    """Deviation between the one-step operator T[G; mm_N eta_high] and its
    two-step factorization T[1; mm_N eta_high] after T[G; eta_narrow], all
    over the level-`level` shell frequencies.

    The factorization is exact when the narrow cutoff still flattens the
    high one (narrow_scale >= high_scale + 1 up to the bump's flat part)
    and distinct shell centers stay out of each other's cutoffs; callers
    pick scales satisfying that support geometry.
    """
    from .expsums import QuadratureSpec

    quad = quad or QuadratureSpec()
    n = int(IndexRange.of(n_range))
    one_step = approx_average_op(poly, n, level, high_scale, quad, shell_only=True)
    freqs = one_step.frequencies
    narrow = MultiplierOp(
        freqs,
        gauss_coefficients(poly, freqs),
        eta_at_scale(-narrow_scale),
        support_halfwidth=2.0 ** (-narrow_scale - 1),
    )
    smooth = MultiplierOp(
        freqs, None, one_step.base_symbol, support_halfwidth=one_step.support_halfwidth
    )
    direct = multiplier_apply(f, one_step)
    factored = multiplier_apply(multiplier_apply(f, narrow), smooth)
    return float((direct - factored).norm(2))
