"""Lattice-point counts, normalized error functions and explicit Dirichlet spectra.

``N(R) = #{n in Z^2 : Q(n) <= R^2}`` (closed domain), ``E(R) = N(R) - area R^2``
and ``F(R) = E(R) / sqrt(R)``.  Boundary membership is always decided in
integer arithmetic.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GridTooCoarse, NonPositiveTime
from .quadform import QuadForm, as_fraction, iter_form_points, normalize

# cumulative tables above this many entries fall back to per-t counting
TABLE_LIMIT = 200_000_000


def _exact(x) -> Fraction:
    return Fraction(x) if isinstance(x, float) else as_fraction(x)


def _column_range(A: int, B: int, C: int, x: int, kmax: int) -> tuple[int, int] | None:
    """Integer ``y`` range with ``A x^2 + B x y + C y^2 <= kmax`` (``None`` if empty)."""
    disc = 4 * C * kmax - (4 * A * C - B * B) * x * x
    if disc < 0:
        return None
    s = math.isqrt(disc)

    def f(y):
        return A * x * x + B * x * y + C * y * y

    lo = -((B * x + s) // (2 * C))  # ceil((-Bx - s) / 2C)
    hi = (-B * x + s) // (2 * C)
    while f(lo - 1) <= kmax:
        lo -= 1
    while lo <= hi and f(lo) > kmax:
        lo += 1
    while f(hi + 1) <= kmax:
        hi += 1
    while hi >= lo and f(hi) > kmax:
        hi -= 1
    return (lo, hi) if lo <= hi else None


def _kmax(form: QuadForm, R2: Fraction) -> int:
    A, B, C, L = form.integral
    return math.floor(L * R2)


def lattice_count(form: QuadForm, R) -> int:
    """Exact ``#{(x, y) : Q(x, y) <= R^2}``, O(R) column scan.

    A float ``R`` is taken at its exact binary value; use
    ``lattice_count_r2`` when the squared radius is known exactly.
    """
    R = _exact(R)
    if R < 0:
        raise ValueError(f"R must be nonnegative, got {R}")
    return lattice_count_r2(form, R * R)


def lattice_count_r2(form: QuadForm, R2) -> int:
    """Exact ``#{(x, y) : Q(x, y) <= R2}`` for a squared radius ``R2 >= 0``."""
    R2 = _exact(R2)
    if R2 < 0:
        raise ValueError(f"R2 must be nonnegative, got {R2}")
    A, B, C, _ = form.integral
    kmax = _kmax(form, R2)
    disc = 4 * A * C - B * B
    xmax = math.isqrt(4 * C * kmax // disc) + 1
    total = 0
    for x in range(-xmax, xmax + 1):
        rng = _column_range(A, B, C, x, kmax)
        if rng is not None:
            total += rng[1] - rng[0] + 1
    return total


def brute_force_count(form: QuadForm, R) -> int:
    """O(R^2) double loop; the independent oracle for ``lattice_count``."""
    R2 = _exact(R) ** 2
    a, b, c = form.coeffs
    # |x| <= R * sqrt(4c/det) <= R * (4c/det + 1)
    bound = math.isqrt(math.ceil(R2 * max(4 * c / form.det, 4 * a / form.det))) + 1
    return sum(1 for x in range(-bound, bound + 1) for y in range(-bound, bound + 1)
               if a * x * x + b * x * y + c * y * y <= R2)


def _floor_scaled_squares(t: np.ndarray, L: Fraction) -> np.ndarray:
    """Exact ``floor(L * t^2)`` for float ``t`` (near-integers re-checked as Fractions)."""
    v = (t * t) * float(L)
    k = np.floor(v)
    near = np.abs(v - np.round(v)) <= 1e-9 * np.maximum(v, 1.0)
    for i in np.nonzero(near)[0]:
        k[i] = math.floor(L * Fraction(float(t[i])) ** 2)
    return k.astype(np.int64)


class LatticeCounter:
    """Vectorized exact ``N(t)`` for ``t <= t_max`` from a cumulative count table.

    The table has one slot per integer value of the primitive integral form, so
    ``N(t) = cum[floor(L t^2)]``.
    """

    def __init__(self, form: QuadForm, t_max: float):
        self.form = form
        self.t_max = float(t_max)
        A, B, C, L = form.integral
        self._L = L
        kmax = _kmax(form, Fraction(self.t_max) ** 2)
        self._streaming = kmax + 1 > TABLE_LIMIT
        if self._streaming:
            self._cum = None
            return
        counts = np.zeros(kmax + 1, dtype=np.int64)
        for q in iter_form_points(A, B, C, kmax):
            counts += np.bincount(q, minlength=kmax + 1)
        cum = np.cumsum(counts)
        del counts
        self._cum = cum.astype(np.int32) if cum[-1] < 2**31 else cum

    def count(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < 0):
            raise ValueError("t must be nonnegative")
        if np.any(t > self.t_max):
            raise ValueError(f"t exceeds table range t_max={self.t_max}")
        if self._streaming:
            return np.array([lattice_count(self.form, float(x)) for x in t.ravel()],
                            dtype=np.int64).reshape(t.shape)
        k = _floor_scaled_squares(t.ravel(), self._L)
        return self._cum[k].astype(np.int64).reshape(t.shape)

    def error(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        return self.count(t) - self.form.area * t * t

    def normalized(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if np.any(t <= 0):
            raise NonPositiveTime("F(t) needs t > 0")
        return self.error(t) / np.sqrt(t)

    def window(self, t, h: float, variant: str = "diff") -> np.ndarray:
        t = np.asarray(t, dtype=np.float64)
        if np.any(t <= 0) or h <= 0:
            raise NonPositiveTime("window error needs t > 0 and h > 0")
        if variant == "diff":
            return self.normalized(t + h) - self.normalized(t)
        if variant == "scaled":
            return (self.error(t + h) - self.error(t)) / np.sqrt(t)
        raise ValueError(f"unknown window variant {variant!r}")


def lattice_error(form: QuadForm, t) -> float:
    return lattice_count(form, t) - form.area * float(t) ** 2


def error_normalized(form: QuadForm, t) -> float:
    if t <= 0:
        raise NonPositiveTime(f"F(t) needs t > 0, got {t}")
    return lattice_error(form, t) / math.sqrt(t)


def window_error(form: QuadForm, t, h, variant: str = "diff") -> float:
    """Short-interval error on ``[t, t + h]``.

    ``variant="diff"`` gives ``F(t+h) - F(t)`` (the default), ``"scaled"`` gives
    ``(E(t+h) - E(t)) / sqrt(t)``.
    """
    if t <= 0 or h <= 0:
        raise NonPositiveTime(f"window error needs t > 0 and h > 0, got t={t}, h={h}")
    if variant == "diff":
        return error_normalized(form, t + h) - error_normalized(form, t)
    if variant == "scaled":
        return (lattice_error(form, t + h) - lattice_error(form, t)) / math.sqrt(t)
    raise ValueError(f"unknown window variant {variant!r}")


@dataclass(frozen=True)
class GridSpec:
    """Sampling grid on ``[t0, T]``; ``y_max`` is the highest frequency to resolve."""

    step: float
    t0: float = 1.0
    jitter: bool = False
    seed: int | None = None
    y_max: float | None = None

    def points(self, T: float) -> np.ndarray:
        n = int(math.floor((T - self.t0) / self.step + 1e-9)) + 1
        i = np.arange(n, dtype=np.float64)
        if self.jitter:
            rng = np.random.default_rng(self.seed)
            i = i + rng.uniform(0.0, 1.0, size=n) * (1 - 1e-9)
            i = i[self.t0 + i * self.step <= T]
        return self.t0 + i * self.step


@dataclass(frozen=True, eq=False)
class ErrorSamples:
    label: str
    t: np.ndarray
    values: np.ndarray
    T: float
    t0: float = 1.0
    h: float | None = None

    def __post_init__(self):
        if len(self.t) != len(self.values):
            raise ValueError("t grid and values differ in length")
        if len(self.t) and (self.t[0] < self.t0 or self.t0 <= 0):
            raise ValueError("grid must start at or after t0 > 0")
        if len(self.t) > 1 and np.any(np.diff(self.t) <= 0):
            raise ValueError("t grid must be strictly increasing")

    def __len__(self) -> int:
        return len(self.t)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "value"])
            for t, v in zip(self.t, self.values):
                w.writerow([f"{t:.17g}", f"{v:.17g}"])


def check_resolution(step: float, y_max: float | None = None, h: float | None = None) -> None:
    if y_max is not None and step > 1.0 / (8.0 * y_max):
        raise GridTooCoarse(f"step {step} > 1/(8 y_max) = {1 / (8 * y_max)} for y_max={y_max}")
    if h is not None and step > h / 20.0:
        raise GridTooCoarse(f"step {step} > h/20 = {h / 20} for h={h}")


def sample_error(form: QuadForm, T: float, grid: GridSpec, h: float | None = None,
                 variant: str = "diff", counter: LatticeCounter | None = None,
                 label: str | None = None) -> ErrorSamples:
    """Sample ``F(t)`` (or the window error when ``h`` is given) on ``grid``."""
    if T <= grid.t0:
        raise ValueError(f"T={T} must exceed t0={grid.t0}")
    check_resolution(grid.step, grid.y_max, h)
    t = grid.points(T)
    t_top = T + (h or 0.0)
    if counter is None or counter.t_max < t_top:
        counter = LatticeCounter(form, t_top)
    vals = counter.normalized(t) if h is None else counter.window(t, h, variant)
    return ErrorSamples(label or str(form), t, vals, float(T), grid.t0, h)


# -- explicit Dirichlet spectra ---------------------------------------------

@dataclass(frozen=True)
class EigenDomain:
    """Rectangle or equilateral triangle with explicitly known Dirichlet spectrum.

    Side lengths are given in natural units so that eigenvalues stay rational:
    a rectangle has sides ``pi * a_units`` and ``pi * b_units``; a triangle has
    side ``scale * 2 pi / sqrt(3)``.  Every eigenvalue equals ``Q(n, m)`` with
    ``n, m >= 1`` for the associated ellipse form ``Q``.
    """

    kind: str
    params: tuple

    @classmethod
    def rectangle(cls, a_units=1, b_units=1) -> "EigenDomain":
        return cls("rectangle", (as_fraction(a_units), as_fraction(b_units)))

    @classmethod
    def triangle(cls, scale=1) -> "EigenDomain":
        return cls("triangle", (as_fraction(scale),))

    @property
    def form(self) -> QuadForm:
        if self.kind == "rectangle":
            sa, sb = self.params
            return QuadForm(1 / sa**2, 0, 1 / sb**2)
        (s,) = self.params
        # x^2 + xy + y^2 <= 9 l^2 / (16 pi^2) with l = s * 2 pi / sqrt(3)
        return normalize(1, 1, 1, Fraction(3, 4) * s * s)

    @property
    def kappa(self) -> int:
        return 4 if self.kind == "rectangle" else 6

    @property
    def sides(self) -> tuple[float, ...]:
        if self.kind == "rectangle":
            return tuple(math.pi * float(v) for v in self.params)
        return (float(self.params[0]) * 2 * math.pi / math.sqrt(3),)

    @property
    def area(self) -> float:
        if self.kind == "rectangle":
            a, b = self.sides
            return a * b
        (l,) = self.sides
        return math.sqrt(3) / 4 * l * l

    @property
    def perimeter(self) -> float:
        if self.kind == "rectangle":
            a, b = self.sides
            return 2 * (a + b)
        return 3 * self.sides[0]

    def eigen_q(self, X_max) -> np.ndarray:
        """Sorted integral-form values ``q`` of all eigenvalues ``<= X_max`` (``lambda = q / L``)."""
        A, B, C, L = self.form.integral
        kmax = math.floor(L * _exact(X_max))
        parts = []
        for x, y, q in iter_form_points(A, B, C, kmax, with_coords=True):
            parts.append(q[(x >= 1) & (y >= 1)])
        return np.sort(np.concatenate(parts)) if parts else np.empty(0, dtype=np.int64)

    def eigenvalues(self, X_max) -> list[tuple[Fraction, int]]:
        _, _, _, L = self.form.integral
        q, mult = np.unique(self.eigen_q(X_max), return_counts=True)
        return [(Fraction(int(v)) / L, int(m)) for v, m in zip(q, mult)]

    def eigenvalues_to_csv(self, X_max, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["lambda", "multiplicity"])
            for lam, m in self.eigenvalues(X_max):
                w.writerow([f"{float(lam):.17g}", m])


def eigen_count(dom: EigenDomain, X) -> int:
    """Number of Dirichlet eigenvalues ``<= X`` (boundary inclusive)."""
    X = _exact(X)
    if X < 0:
        raise ValueError("X must be nonnegative")
    A, B, C, L = dom.form.integral
    kmax = math.floor(L * X)
    xmax = math.isqrt(4 * C * kmax // (4 * A * C - B * B)) + 1
    total = 0
    for x in range(1, xmax + 1):
        rng = _column_range(A, B, C, x, kmax)
        if rng is not None and rng[1] >= max(rng[0], 1):
            total += rng[1] - max(rng[0], 1) + 1
    return total


def eigen_error(dom: EigenDomain, t) -> float:
    """``e(t) = n(t) - Area t^2 / 4pi + Length t / 4pi`` with ``n(t) = #{lambda <= t^2}``."""
    if t <= 0:
        raise NonPositiveTime(f"e(t) needs t > 0, got {t}")
    n = eigen_count(dom, _exact(t) ** 2)
    t = float(t)
    return n - dom.area * t * t / (4 * math.pi) + dom.perimeter * t / (4 * math.pi)


def connection_defect(dom: EigenDomain, X_grid: Sequence[float]) -> np.ndarray:
    """``E_Omega(X) - kappa * e_Gamma(X)`` on ``X_grid``; bounded in ``X``."""
    X = np.asarray(X_grid, dtype=np.float64)
    if np.any(X <= 0):
        raise NonPositiveTime("connection defect needs X > 0")
    form = dom.form
    _, _, _, L = form.integral
    q_eig = dom.eigen_q(Fraction(float(X.max())) ** 2)
    k = _floor_scaled_squares(X, L)
    n_eig = np.searchsorted(q_eig, k, side="right")
    counter = LatticeCounter(form, float(X.max()))
    E = counter.error(X)
    e = n_eig - dom.area * X * X / (4 * math.pi) + dom.perimeter * X / (4 * math.pi)
    return E - dom.kappa * e
