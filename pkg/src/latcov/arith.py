"""Representation numbers of binary forms and their partial sums.

r_w(k) counts n1^2 - n1 n2 + n2^2 = k, r_ab(k) counts n1^2 + (a/b) n2^2 = k
(i.e. b n1^2 + a n2^2 = b k), and a(k) = r_w(k^2) / 6.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import FactorizationFailure
from .quadform import iter_form_points

TRIAL_BOUND = 10**6


# -- representation numbers ---------------------------------------------------

def r_omega(k: int) -> int:
    """Solutions of ``x^2 - xy + y^2 = k`` by scanning x and solving for y."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1
    count = 0
    xmax = math.isqrt(4 * k // 3)
    for x in range(-xmax, xmax + 1):
        # y^2 - x y + (x^2 - k) = 0, discriminant 4k - 3x^2
        disc = 4 * k - 3 * x * x
        if disc < 0:
            continue
        s = math.isqrt(disc)
        if s * s != disc or (x + s) % 2:
            continue
        count += 1 if s == 0 else 2
    return count


def r_ab(k: int, a: int, b: int) -> int:
    """Solutions of ``b n1^2 + a n2^2 = b k``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if a <= 0 or b <= 0:
        raise ValueError("a and b must be positive")
    target = b * k
    count = 0
    for n2 in range(0, math.isqrt(target // a) + 1):
        rest = target - a * n2 * n2
        if rest % b:
            continue
        m = rest // b
        s = math.isqrt(m)
        if s * s == m:
            count += (1 if s == 0 else 2) * (1 if n2 == 0 else 2)
    return count


def _form_table(P: int, R: int, S: int, qmax: int) -> np.ndarray:
    cnt = np.zeros(qmax + 1, dtype=np.int64)
    for q in iter_form_points(P, R, S, qmax):
        cnt += np.bincount(q, minlength=qmax + 1)
    return cnt


@lru_cache(maxsize=8)
def _omega_cached(N: int) -> np.ndarray:
    t = _form_table(1, -1, 1, N)
    t.flags.writeable = False
    return t


def r_omega_table(N: int) -> np.ndarray:
    """``r_omega(k)`` for ``k = 0..N`` by enumerating the form once."""
    return _omega_cached(int(N))


@lru_cache(maxsize=8)
def _ab_cached(N: int, a: int, b: int) -> np.ndarray:
    t = _form_table(b, 0, a, b * N)[::b].copy()
    t.flags.writeable = False
    return t


def r_ab_table(N: int, a: int, b: int) -> np.ndarray:
    """``r_ab(k, a, b)`` for ``k = 0..N``: values of ``b x^2 + a y^2`` divisible by b."""
    return _ab_cached(int(N), int(a), int(b))


# -- the multiplicative function a(k) --------------------------------------------

def factorize(n: int, bound: int = TRIAL_BOUND) -> dict[int, int]:
    """Prime factorisation by trial division up to ``bound``.

    A leftover cofactor is accepted as prime only when it is below ``bound**2``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    out: dict[int, int] = {}
    d = 2
    while d * d <= n and d <= bound:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        if n >= bound * bound:
            raise FactorizationFailure(f"cofactor {n} not certified prime by trial division to {bound}")
        out[n] = out.get(n, 0) + 1
    return out


def a_from_factorization(k: int) -> int:
    out = 1
    for p, e in factorize(k).items():
        if p % 3 == 1:
            out *= 2 * e + 1
    return out


def a_mult(k: int) -> int:
    """``a(k)`` computed as ``r_omega(k^2)/6`` and from the prime-power table; both must agree."""
    if k < 1:
        raise ValueError("k must be positive")
    via_product = a_from_factorization(k)
    direct, rem = divmod(r_omega(k * k), 6)
    if rem or direct != via_product:
        raise ArithmeticError(f"a({k}): r_omega(k^2)/6 = {direct} (rem {rem}) but product gives {via_product}")
    return direct


def primes_upto(n: int) -> np.ndarray:
    if n < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p::p] = False
    return np.nonzero(sieve)[0]


def a_table(N: int) -> np.ndarray:
    """``a(k)`` for ``k = 0..N`` (entry 0 unused) by sieving over primes ``p = 1 mod 3``."""
    a = np.ones(N + 1, dtype=np.int64)
    a[0] = 0
    exps = np.zeros(N + 1, dtype=np.int16)
    for p in primes_upto(N):
        p = int(p)
        if p % 3 != 1:
            continue
        pk = p
        while pk <= N:
            exps[pk::pk] += 1
            pk *= p
        a[p::p] *= 2 * exps[p::p] + 1
        exps[p::p] = 0
    return a


# -- partial sums -------------------------------------------------------------------

MULT_CONSTANT = 3 * math.sqrt(3) / math.pi


@dataclass
class PartialSumFit:
    kind: str
    params: tuple
    N: np.ndarray
    S: np.ndarray
    model: str
    slope: float
    intercept: float
    slope_se: float
    residual_norm: float
    reference: float | None = None

    @property
    def rel_deviation(self) -> float | None:
        if self.reference is None:
            return None
        return abs(self.slope - self.reference) / abs(self.reference)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "S"])
            for n, s in zip(self.N, self.S):
                w.writerow([int(n), int(s)])

    def summary(self) -> str:
        ref = "" if self.reference is None else (
            f"\nreference = {self.reference:.10g}, relative deviation = {self.rel_deviation:.4g}")
        return (f"kind = {self.kind} params = {self.params}\nmodel: {self.model}\n"
                f"slope = {self.slope:.10g} +- {self.slope_se:.3g}\n"
                f"intercept = {self.intercept:.10g}\nresidual norm = {self.residual_norm:.4g}{ref}\n")


def _fit(N: np.ndarray, S: np.ndarray, with_log: bool):
    N = N.astype(np.float64)
    S = S.astype(np.float64)
    if with_log:
        X = np.c_[N * np.log(N), N]
    else:
        X = N[:, None]
    # rows scaled by 1/N so that every grid point carries comparable weight
    Xw, Sw = X / N[:, None], S / N
    coef, *_ = np.linalg.lstsq(Xw, Sw, rcond=None)
    resid = Sw - Xw @ coef
    dof = max(len(N) - X.shape[1], 1)
    s2 = float(resid @ resid) / dof
    cov = s2 * np.linalg.inv(Xw.T @ Xw)
    slope = float(coef[0])
    intercept = float(coef[1]) if with_log else 0.0
    return slope, intercept, math.sqrt(cov[0, 0]), float(np.linalg.norm(resid))


def n_grid(lo: int, hi: int, points: int = 25) -> np.ndarray:
    return np.unique(np.geomspace(lo, hi, points).round().astype(np.int64))


def partial_sum(kind: str, N, params: tuple = (), points: int = 25,
                N_min: int | None = None) -> PartialSumFit:
    """Partial sums on a geometric grid up to ``N`` and their fit.

    kinds: ``mult_case`` (sum of r_w(k^2), model slope N log N + intercept N),
    ``square_case`` and ``non_square`` (sum of r_w(k) r_ab(k); the latter
    with model slope N).  An explicit sequence for ``N`` overrides the grid.
    """
    if np.ndim(N):
        grid = np.asarray(N, dtype=np.int64)
    else:
        grid = n_grid(N_min or max(1, int(N) // 100), int(N), points)
    top = int(grid.max())
    if kind == "mult_case":
        cum = 6 * np.cumsum(a_table(top))
        reference = MULT_CONSTANT
        with_log = True
    elif kind in ("square_case", "non_square"):
        a, b = params
        prod = r_omega_table(top) * r_ab_table(top, a, b)
        prod[0] = 0
        cum = np.cumsum(prod)
        from .singular import constant_C, square_constant, squarefree_part, is_square
        if kind == "square_case":
            if not is_square(3 * a * squarefree_part(b)):
                raise ValueError(f"(a, b) = {params}: 3ab' is not a square")
            reference = square_constant(a, b)
            with_log = True
        else:
            reference = constant_C(a, b).C
            with_log = False
    else:
        raise ValueError(f"unknown partial-sum kind {kind!r}")
    S = cum[grid]
    model = "slope*N*log(N) + intercept*N" if with_log else "slope*N"
    if len(grid) < (3 if with_log else 2):
        return PartialSumFit(kind, tuple(params), grid, S, model, float("nan"),
                             float("nan"), float("nan"), float("nan"), reference)
    slope, intercept, se, rn = _fit(grid, S, with_log)
    return PartialSumFit(kind, tuple(params), grid, S, model, slope, intercept, se, rn, reference)


def dirichlet_partial(N: int, s: float = 2.0) -> float:
    """``sum_{n <= N} a(n) n^-s``."""
    a = a_table(N)[1:].astype(np.float64)
    n = np.arange(1, N + 1, dtype=np.float64)
    return float(np.sum(a / n ** s))


def dirichlet_closed(s: float = 2.0) -> float:
    """Euler-product value ``zeta(s)^2 L(s, chi_3) / (zeta(2s) (1 + 3^-s))`` for ``s > 1``."""
    from scipy.special import zeta
    from .singular import l_value
    L, _ = l_value(s, 3)
    return float(zeta(s) ** 2 * L / (zeta(2 * s) * (1 + 3.0 ** -s)))


def table_to_csv(values: Sequence[int], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "value"])
        for k, v in enumerate(values):
            w.writerow([k, int(v)])
