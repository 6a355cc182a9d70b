"""Integer polynomials and polynomial averaging operators on Z/QZ.

Averages of the form  A_N f(x) = mean over n = 1..N of f(x - P(n) mod Q)
are cyclic convolutions with an integer-orbit kernel.  Everything here is
exact integer arithmetic up to the final complex accumulation, and every
operator is a pure function of its inputs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, NamedTuple, Sequence

import numpy as np

# average_linear switches to the FFT path once N * Q exceeds this.
FFT_THRESHOLD = 1 << 22


@dataclass(frozen=True)
class IntPolynomial:
    """Polynomial with integer coefficients, constant term first."""

    coefficients: tuple[int, ...]

    def __init__(self, coefficients: Iterable[int]):
        coeffs = [int(c) for c in coefficients]
        if not coeffs:
            coeffs = [0]
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coefficients", tuple(coeffs))

    @classmethod
    def parse(cls, text: str) -> "IntPolynomial":
        """Parse a comma-separated coefficient list, constant term first
        ("0,0,1" is n^2)."""
        return cls(int(part) for part in text.split(","))

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.coefficients == (0,)

    def __call__(self, n: int) -> int:
        """Exact evaluation by nested multiplication; Python integers never
        overflow."""
        acc = 0
        for c in reversed(self.coefficients):
            acc = acc * n + c
        return acc

    def eval_mod(self, n: int, q: int) -> int:
        """P(n) mod q in 0..q-1, reduced at every Horner step."""
        acc = 0
        for c in reversed(self.coefficients):
            acc = (acc * n + c) % q
        return acc

    def abs_bound(self, n_max: int) -> int:
        """Sum of |c_k| * n_max^k, an upper bound for |P(n)| on [1, n_max]."""
        return sum(abs(c) * n_max**k for k, c in enumerate(self.coefficients))

    def __str__(self) -> str:
        terms = []
        for k, c in enumerate(self.coefficients):
            if c == 0 and not self.is_zero:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"{c}*n" if c != 1 else "n")
            else:
                terms.append(f"{c}*n^{k}" if c != 1 else f"n^{k}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class IndexRange:
    """The summation range n = 1..N."""

    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"index range needs an integer N >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))

    @classmethod
    def of(cls, value: "IndexRange | int") -> "IndexRange":
        return value if isinstance(value, IndexRange) else cls(value)

    def __int__(self) -> int:
        return self.n

    def __iter__(self) -> Iterator[int]:
        return iter(range(1, self.n + 1))


@dataclass(frozen=True)
class Signal:
    """Complex-valued function on Z/QZ, indexed by residues 0..Q-1."""

    modulus: int
    values: np.ndarray

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be a positive integer")
        vals = np.asarray(self.values, dtype=np.complex128).copy()
        if vals.shape != (self.modulus,):
            raise ValueError(
                f"signal needs exactly {self.modulus} values, got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals.real) & np.isfinite(vals.imag)):
            raise ValueError("signal entries must be finite")
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, modulus: int, value: complex = 1.0) -> "Signal":
        return cls(modulus, np.full(modulus, value, dtype=np.complex128))

    @classmethod
    def delta(cls, modulus: int, at: int = 0, weight: complex = 1.0) -> "Signal":
        vals = np.zeros(modulus, dtype=np.complex128)
        vals[at % modulus] = weight
        return cls(modulus, vals)

    def __add__(self, other: "Signal") -> "Signal":
        self._check_modulus(other)
        return Signal(self.modulus, self.values + other.values)

    def __sub__(self, other: "Signal") -> "Signal":
        self._check_modulus(other)
        return Signal(self.modulus, self.values - other.values)

    def __mul__(self, scalar: complex) -> "Signal":
        return Signal(self.modulus, self.values * scalar)

    __rmul__ = __mul__

    def _check_modulus(self, other: "Signal") -> None:
        if self.modulus != other.modulus:
            raise ValueError(
                f"modulus mismatch: {self.modulus} vs {other.modulus}"
            )

    def norm(self, p: float = 2) -> float:
        """Counting-measure norm on Z/QZ; p may be math.inf."""
        mags = np.abs(self.values)
        if p == math.inf:
            return float(mags.max())
        return float((mags**p).sum() ** (1.0 / p))

    def mean(self) -> complex:
        return complex(self.values.mean())

    def to_dict(self) -> dict:
        return {
            "modulus": self.modulus,
            "re": self.values.real.tolist(),
            "im": self.values.imag.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Signal":
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data["im"], dtype=float)
        return cls(int(data["modulus"]), re + 1j * im)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "Signal":
        return cls.from_dict(json.loads(text))

    def to_csv(self, out: IO[str]) -> None:
        out.write("index,re,im\n")
        for i, v in enumerate(self.values):
            out.write(f"{i},{float(v.real)!r},{float(v.imag)!r}\n")

    @classmethod
    def from_csv(cls, src: IO[str]) -> "Signal":
        rows = []
        for line in src:
            line = line.strip()
            if not line or line.startswith("index"):
                continue
            _, re, im = line.split(",")
            rows.append(complex(float(re), float(im)))
        return cls(len(rows), np.asarray(rows))


# ---------------------------------------------------------------------------
# Fourier helpers.  Spectrum convention: hat f(j) = sum_x f(x) e(+ j x / Q),
# so grid index j carries the torus frequency j / Q and a convolution kernel
# K acts as multiplication by hat K(j).
# ---------------------------------------------------------------------------


def spectrum(f: Signal) -> np.ndarray:
    return f.modulus * np.fft.ifft(f.values)


def signal_from_spectrum(modulus: int, coeffs: np.ndarray) -> Signal:
    return Signal(modulus, np.fft.fft(np.asarray(coeffs, dtype=np.complex128)) / modulus)


def grid_frequencies(modulus: int) -> np.ndarray:
    """Torus points j/Q for j = 0..Q-1."""
    return np.arange(modulus) / modulus


# ---------------------------------------------------------------------------
# Kernels and averages
# ---------------------------------------------------------------------------


def eval_poly(poly: IntPolynomial, n: int) -> int:
    """Exact P(n)."""
    return poly(n)


def _residues(poly: IntPolynomial, n_max: int, modulus: int) -> np.ndarray:
    """P(n) mod Q for n = 1..n_max as an int64 array.

    Fast path keeps every Horner intermediate below Q*(n_max+1); anything
    larger falls back to exact Python integers.
    """
    if modulus * (n_max + 1) < 2**62:
        ns = np.arange(1, n_max + 1, dtype=np.int64)
        acc = np.zeros(n_max, dtype=np.int64)
        for c in reversed(poly.coefficients):
            acc = (acc * ns + c % modulus) % modulus
        return acc
    return np.array([poly.eval_mod(n, modulus) for n in range(1, n_max + 1)], dtype=np.int64)


def kernel(poly: IntPolynomial, n_range: IndexRange | int, modulus: int) -> Signal:
    """Averaging kernel on Z/QZ: K(x) = #{n in [N] : P(n) = x mod Q} / N."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    n = int(IndexRange.of(n_range))
    counts = np.bincount(_residues(poly, n, modulus), minlength=modulus)
    return Signal(modulus, counts.astype(np.complex128) / n)


def average_linear(
    poly: IntPolynomial,
    n_range: IndexRange | int,
    f: Signal,
    method: str = "auto",
) -> Signal:
    """A_N f(x) = mean of f(x - P(n)) over n = 1..N, a cyclic convolution.

    `method` is "direct" (exact grouped sum), "fft", or "auto" (FFT once
    N*Q passes FFT_THRESHOLD).
    """
    n = int(IndexRange.of(n_range))
    q = f.modulus
    if method == "auto":
        method = "fft" if n * q > FFT_THRESHOLD else "direct"
    if method == "direct":
        residues = _residues(poly, n, q)
        shifts, counts = np.unique(residues, return_counts=True)
        out = np.zeros(q, dtype=np.complex128)
        for shift, count in zip(shifts, counts):
            out += count * np.roll(f.values, int(shift))
        return Signal(q, out / n)
    if method == "fft":
        spec = spectrum(kernel(poly, n, q)) * spectrum(f)
        return signal_from_spectrum(q, spec)
    raise ValueError(f"unknown method {method!r}")


def average_bilinear(
    poly: IntPolynomial,
    n_range: IndexRange | int,
    f1: Signal,
    f2: Signal,
) -> Signal:
    """Mean over n = 1..N of f1(x - n) * f2(x - P(n)) on a shared Z/QZ."""
    f1._check_modulus(f2)
    n = int(IndexRange.of(n_range))
    q = f1.modulus
    residues = _residues(poly, n, q)
    out = np.zeros(q, dtype=np.complex128)
    for i in range(n):
        out += np.roll(f1.values, (i + 1) % q) * np.roll(f2.values, int(residues[i]))
    return Signal(q, out / n)


def maximal_function(
    poly: IntPolynomial,
    f: Signal,
    n_ranges: Sequence[IndexRange | int],
    method: str = "auto",
) -> Signal:
    """Pointwise sup of |A_N f| over the given N values."""
    if not n_ranges:
        raise ValueError("maximal function needs at least one N")
    best = np.zeros(f.modulus)
    for n_range in n_ranges:
        best = np.maximum(best, np.abs(average_linear(poly, n_range, f, method).values))
    return Signal(f.modulus, best.astype(np.complex128))


class RieszSplit(NamedTuple):
    invariant: Signal
    complement: Signal


def riesz_split(f: Signal, shift: int) -> RieszSplit:
    """Split f into its part invariant under x -> x - shift plus the rest.

    The invariant part averages f over each orbit of the shift, so the two
    parts are orthogonal and sum back to f.
    """
    q = f.modulus
    g = math.gcd(shift % q, q)
    if g == q:
        # shift acts trivially; everything is invariant
        return RieszSplit(f, Signal(q, np.zeros(q, dtype=np.complex128)))
    # orbit of x under repeated shifts is the congruence class x mod g
    table = f.values.reshape(q // g, g).mean(axis=0)
    invariant = Signal(q, np.tile(table, q // g))
    return RieszSplit(invariant, f - invariant)


def aliasing_safe_modulus(
    poly: IntPolynomial, n_range: IndexRange | int, support_diameter: int
) -> int:
    """Smallest Q guaranteeing no wraparound when a finitely supported
    function on Z is modelled on Z/QZ and averaged along P over [1, N]."""
    n = int(IndexRange.of(n_range))
    return 2 * int(support_diameter) + poly.abs_bound(n) + 1
