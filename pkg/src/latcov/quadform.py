"""Exact geometry of ellipse sublevel sets ``a x^2 + b xy + c y^2 <= 1``.

Frequencies of the lattice error term of such an ellipse are the support
values ``Y(n)``.  Their squares are rational whenever the form is rational,

    Y(n)^2 = 4 (a n2^2 - b n1 n2 + c n1^2) / (4ac - b^2),

so every frequency is keyed by the exact rational ``y2 = Y(n)^2``.  Internally
``y2 = scale * q`` where ``q`` is an integer value of a primitive integral
binary form (the "dual form"); all matching is done on those integers.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import CutoffMismatch, CutoffTooSmall, NotPositiveDefinite, ZeroVector

DEFAULT_MAX_DENOMINATOR = 10**9
SQRT_8PI = math.sqrt(8 * math.pi)
# q-values and cross products must stay inside int64
_INT64_GUARD = 2**62


def as_fraction(x, max_den: int = DEFAULT_MAX_DENOMINATOR) -> Fraction:
    """Coerce ``x`` to an exact rational.

    Integers, Fractions and strings such as ``"4/3"`` or ``"0.75"`` are exact.
    Floats (e.g. an irrational parameter) are replaced by their best rational
    approximant with denominator at most ``max_den``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(float(x)).limit_denominator(max_den)
    return Fraction(x)


def _lcm(*vals: int) -> int:
    out = 1
    for v in vals:
        out = out * v // math.gcd(out, v)
    return out


@dataclass(frozen=True)
class QuadForm:
    """Positive-definite form ``a x^2 + b xy + c y^2``; the domain is ``Q <= 1``."""

    a: Fraction
    b: Fraction
    c: Fraction

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, as_fraction(getattr(self, name)))
        if self.a <= 0 or self.det <= 0:
            raise NotPositiveDefinite(
                f"form ({self.a}, {self.b}, {self.c}) is not positive definite "
                f"(a={self.a}, 4ac-b^2={4 * self.a * self.c - self.b ** 2})"
            )

    @property
    def det(self) -> Fraction:
        return 4 * self.a * self.c - self.b * self.b

    @property
    def area(self) -> float:
        return 2 * math.pi / math.sqrt(self.det)

    @property
    def coeffs(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.a, self.b, self.c)

    def __str__(self) -> str:
        return f"QuadForm({self.a}, {self.b}, {self.c})"

    def scaled(self, lam) -> "QuadForm":
        lam = as_fraction(lam)
        return QuadForm(self.a * lam, self.b * lam, self.c * lam)

    def value(self, x: int, y: int) -> Fraction:
        return self.a * x * x + self.b * x * y + self.c * y * y

    @cached_property
    def integral(self) -> tuple[int, int, int, int]:
        """``(A, B, C, L)`` with ``Q(x, y) = (A x^2 + B xy + C y^2) / L``, A,B,C coprime."""
        L = _lcm(self.a.denominator, self.b.denominator, self.c.denominator)
        A, B, C = (int(v * L) for v in self.coeffs)
        g = math.gcd(math.gcd(A, B), C)
        return A // g, B // g, C // g, Fraction(L, g)

    @cached_property
    def dual(self) -> tuple[int, int, int, Fraction]:
        """``(P, R, S, scale)`` with ``y2(n) = scale * (P n1^2 + R n1 n2 + S n2^2)``."""
        A, B, C, L = self.integral
        disc = 4 * A * C - B * B
        # a n2^2 - b n1 n2 + c n1^2 in integral form is C n1^2 - B n1 n2 + A n2^2
        scale = 4 * L / disc
        return C, -B, A, Fraction(scale)


def normalize(a, b, c, level=1) -> QuadForm:
    """Rescale the domain ``a x^2 + bxy + c y^2 <= level`` to the ``<= 1`` convention."""
    level = as_fraction(level)
    if level <= 0:
        raise ValueError(f"level must be positive, got {level}")
    return QuadForm(as_fraction(a) / level, as_fraction(b) / level, as_fraction(c) / level)


@dataclass(frozen=True, order=True)
class FreqKey:
    """Exact frequency key ``y2 = Y(n)^2``; the angular frequency is ``2 pi sqrt(y2)``."""

    y2: Fraction

    def __post_init__(self):
        y2 = as_fraction(self.y2)
        if y2 <= 0:
            raise ValueError(f"frequency key must be positive, got {y2}")
        object.__setattr__(self, "y2", y2)

    @property
    def y(self) -> float:
        return math.sqrt(self.y2)

    @property
    def nu(self) -> float:
        return 2 * math.pi * self.y


def _check_vector(n: Sequence[int]) -> tuple[int, int]:
    n1, n2 = int(n[0]), int(n[1])
    if n1 == 0 and n2 == 0:
        raise ZeroVector("frequency vector n must be nonzero")
    return n1, n2


def y_key(form: QuadForm, n: Sequence[int]) -> FreqKey:
    n1, n2 = _check_vector(n)
    num = form.a * n2 * n2 - form.b * n1 * n2 + form.c * n1 * n1
    return FreqKey(4 * num / form.det)


def curvature_radius(form: QuadForm, n: Sequence[int]) -> float:
    """Radius of curvature of the boundary at the point with outer normal ``n``."""
    n1, n2 = _check_vector(n)
    num = form.a * n2 * n2 - form.b * n1 * n2 + form.c * n1 * n1
    ratio = Fraction(n1 * n1 + n2 * n2) / num
    return math.sqrt(form.det) / 2 * float(ratio) ** 1.5


def freq_coefficient(form: QuadForm, key: FreqKey, multiplicity: int) -> float:
    """One-sided magnitude ``|F^(nu)|`` of the frequency ``nu = 2 pi Y``.

    The phase is ``exp(-3 pi i / 4)`` at ``+nu`` and its conjugate at ``-nu``.
    """
    if multiplicity < 0:
        raise ValueError("multiplicity must be nonnegative")
    if multiplicity == 0:
        return 0.0
    return multiplicity * SQRT_8PI / math.sqrt(form.det) * key.nu ** -1.5


def coeff_magnitudes(form: QuadForm, y: np.ndarray, mult: np.ndarray) -> np.ndarray:
    return mult * (SQRT_8PI / math.sqrt(form.det)) * (2 * np.pi * y) ** -1.5


def norm_bounds(form: QuadForm, y: float) -> tuple[float, float]:
    """Range of ``|n|`` over real vectors with ``Y(n) = y`` (both cutoff conventions)."""
    a, b, c = (float(v) for v in form.coeffs)
    d = float(form.det)
    # y2 = n^T M n, M = (4/det) [[c, -b/2], [-b/2, a]]
    tr, dd = 4 * (a + c) / d, 16 * (a * c - b * b / 4) / d**2
    disc = math.sqrt(max(tr * tr / 4 - dd, 0.0))
    lam_lo, lam_hi = tr / 2 - disc, tr / 2 + disc
    return y / math.sqrt(lam_hi), y / math.sqrt(lam_lo)


def iter_form_points(P: int, R: int, S: int, qmax: int, chunk: int = 4_000_000,
                     with_coords: bool = False) -> Iterator:
    """Yield values ``q = P x^2 + R xy + S y^2 <= qmax`` over all integer points.

    The origin is included.  With ``with_coords`` the chunks are ``(x, y, q)``.
    Bounds are computed in floating point, widened, then filtered exactly.
    """
    disc = 4 * P * S - R * R
    if P <= 0 or disc <= 0:
        raise NotPositiveDefinite(f"integral form ({P}, {R}, {S}) is not positive definite")
    if qmax < 0:
        return
    if 4 * qmax * max(abs(P), abs(R), abs(S), disc) >= _INT64_GUARD:
        raise OverflowError(f"qmax={qmax} too large for int64 enumeration")
    xmax = math.isqrt(4 * S * qmax // disc) + 1
    xs_all = np.arange(-xmax, xmax + 1, dtype=np.int64)
    # per column: S y^2 + R x y + (P x^2 - qmax) <= 0
    d_all = 4.0 * S * qmax - float(disc) * xs_all.astype(np.float64) ** 2
    keep = d_all >= -1.0
    xs_all, d_all = xs_all[keep], d_all[keep]
    root = np.sqrt(np.maximum(d_all, 0.0))
    lo_all = np.floor((-R * xs_all - root) / (2 * S)).astype(np.int64) - 1
    hi_all = np.ceil((-R * xs_all + root) / (2 * S)).astype(np.int64) + 1
    widths = hi_all - lo_all + 1
    start = 0
    ncols = len(xs_all)
    while start < ncols:
        stop = start
        total = 0
        while stop < ncols and (total == 0 or total + widths[stop] <= chunk):
            total += int(widths[stop])
            stop += 1
        w = widths[start:stop]
        xs = np.repeat(xs_all[start:stop], w)
        offs = np.arange(total, dtype=np.int64) - np.repeat(np.cumsum(w) - w, w)
        ys = np.repeat(lo_all[start:stop], w) + offs
        q = P * xs * xs + R * xs * ys + S * ys * ys
        m = q <= qmax
        if with_coords:
            yield xs[m], ys[m], q[m]
        else:
            yield q[m]
        start = stop


def _qmax_for(scale: Fraction, y_max) -> int:
    # floats are taken at their exact binary value here, not approximated
    ym = Fraction(y_max) if isinstance(y_max, float) else as_fraction(y_max)
    return math.floor(ym * ym / scale)


@dataclass(frozen=True, eq=False)
class SpectrumEntry:
    key: FreqKey
    multiplicity: int
    coeff_mag: float


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Frequencies ``Y(n) <= y_max`` of one form, grouped by exact key.

    ``qvals`` holds the integer dual-form values (sorted, unique, nonzero) and
    ``mult`` the number of lattice vectors at each; ``y2 = scale * qvals``.
    """

    form: QuadForm
    y_max: float
    qvals: np.ndarray
    mult: np.ndarray
    scale: Fraction = field(repr=False)

    def __len__(self) -> int:
        return len(self.qvals)

    @property
    def total_multiplicity(self) -> int:
        return int(self.mult.sum())

    @cached_property
    def y2(self) -> np.ndarray:
        return self.qvals.astype(np.float64) * float(self.scale)

    @cached_property
    def y(self) -> np.ndarray:
        return np.sqrt(self.y2)

    @cached_property
    def coeff_mag(self) -> np.ndarray:
        return coeff_magnitudes(self.form, self.y, self.mult)

    def key(self, i: int) -> FreqKey:
        return FreqKey(self.scale * int(self.qvals[i]))

    @property
    def entries(self) -> list[SpectrumEntry]:
        return [SpectrumEntry(self.key(i), int(self.mult[i]), float(self.coeff_mag[i]))
                for i in range(len(self))]

    def truncate(self, y_max) -> "Spectrum":
        qmax = _qmax_for(self.scale, y_max)
        k = int(np.searchsorted(self.qvals, qmax, side="right"))
        if k == 0:
            raise CutoffTooSmall(f"no frequency of {self.form} below y_max={y_max}")
        return Spectrum(self.form, y_max, self.qvals[:k], self.mult[:k], self.scale)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["y2_num", "y2_den", "y", "multiplicity", "coeff_mag"])
            for i in range(len(self)):
                k = self.key(i)
                w.writerow([k.y2.numerator, k.y2.denominator, f"{k.y:.17g}",
                            int(self.mult[i]), f"{self.coeff_mag[i]:.17g}"])


def enumerate_spectrum(form: QuadForm, y_max) -> Spectrum:
    """All frequencies with ``Y(n) <= y_max``, multiplicities counting ``n`` and ``-n``."""
    P, R, S, scale = form.dual
    qmax = _qmax_for(scale, y_max)
    parts = [q[q > 0] for q in iter_form_points(P, R, S, qmax)]
    q = np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)
    if q.size == 0:
        raise CutoffTooSmall(f"no nonzero lattice vector of {form} has Y <= {y_max}")
    qvals, mult = np.unique(q, return_counts=True)
    return Spectrum(form, y_max, qvals.astype(np.int64), mult.astype(np.int64), scale)


def _match_indices(s1: Spectrum, s2: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs ``(i, j)`` with ``s1.scale*q1[i] == s2.scale*q2[j]`` exactly."""
    u = s1.scale.numerator * s2.scale.denominator
    v = s2.scale.numerator * s1.scale.denominator
    g = math.gcd(u, v)
    u, v = u // g, v // g
    # q1 * u == q2 * v  <=>  q1 = v j, q2 = u j
    if v * int(s1.qvals[-1]) >= _INT64_GUARD or u * int(s2.qvals[-1]) >= _INT64_GUARD:
        raise OverflowError("key cross-multiplication exceeds int64")
    i1 = np.nonzero(s1.qvals % v == 0)[0]
    target = (s1.qvals[i1] // v) * u
    j = np.searchsorted(s2.qvals, target)
    j = np.minimum(j, len(s2.qvals) - 1)
    hit = s2.qvals[j] == target
    return i1[hit], j[hit]


def common_frequencies(s1: Spectrum, s2: Spectrum) -> list[tuple[FreqKey, int, int]]:
    if s1.y_max != s2.y_max:
        raise CutoffMismatch(f"spectra cut at different y_max ({s1.y_max} vs {s2.y_max})")
    i, j = _match_indices(s1, s2)
    return [(s1.key(int(a)), int(s1.mult[a]), int(s2.mult[b])) for a, b in zip(i, j)]


@dataclass(frozen=True, eq=False)
class CommonSpectrum:
    """Array view of common frequencies (same order as ``common_frequencies``)."""

    forms: tuple[QuadForm, QuadForm]
    y_max: float
    y: np.ndarray
    r1: np.ndarray
    r2: np.ndarray
    c1: np.ndarray
    c2: np.ndarray

    def __len__(self) -> int:
        return len(self.y)

    @property
    def nu(self) -> np.ndarray:
        return 2 * np.pi * self.y


def common_arrays(s1: Spectrum, s2: Spectrum) -> CommonSpectrum:
    if s1.y_max != s2.y_max:
        raise CutoffMismatch(f"spectra cut at different y_max ({s1.y_max} vs {s2.y_max})")
    i, j = _match_indices(s1, s2)
    return CommonSpectrum((s1.form, s2.form), s1.y_max, s1.y[i], s1.mult[i], s2.mult[j],
                          s1.coeff_mag[i], s2.coeff_mag[j])
