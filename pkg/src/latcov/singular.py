"""Local densities and the constant of the non-square partial-sum asymptotic.

The quaternary form throughout is ``F = x^2 - xy + y^2 - z^2 - alpha w^2``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import factorize
from .errors import BudgetExceeded, PrincipalCharacter, SquareCase, UnhandledCase

PAIR_BUDGET = 2 * 10**8


def is_square(n: int) -> bool:
    return n >= 0 and math.isqrt(n) ** 2 == n


def squarefree_part(n: int) -> int:
    """Largest squarefree ``d`` with ``n / d`` a perfect square."""
    if n < 1:
        raise ValueError("n must be positive")
    d = 1
    for p, e in factorize(n).items():
        if e % 2:
            d *= p
    return d


def valuation(n: int, p: int) -> int:
    if n == 0:
        raise ValueError("valuation of 0")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


# -- characters ----------------------------------------------------------------

def jacobi_symbol(a: int, n: int) -> int:
    if n <= 0 or n % 2 == 0:
        raise ValueError("n must be an odd positive integer")
    a %= n
    out = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                out = -out
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            out = -out
        a %= n
    return out if n == 1 else 0


def kronecker_symbol(d: int, n: int) -> int:
    """Kronecker symbol ``(d / n)`` for arbitrary integers."""
    if n == 0:
        return 1 if abs(d) == 1 else 0
    out = 1
    if n < 0:
        n = -n
        if d < 0:
            out = -1
    v = 0
    while n % 2 == 0:
        n //= 2
        v += 1
    if v:
        if d % 2 == 0:
            return 0
        if v % 2 and d % 8 in (3, 5):
            out = -out
    if n == 1:
        return out
    return out * jacobi_symbol(d, n)


def is_qr(a: int, p: int) -> bool:
    """Euler's criterion for a nonzero residue modulo an odd prime."""
    a %= p
    if a == 0:
        raise ValueError(f"{a} is divisible by {p}")
    return pow(a, (p - 1) // 2, p) == 1


def character_discriminant(modulus: int) -> int:
    """Discriminant ``D = +-modulus`` whose Kronecker symbol is a real character mod ``modulus``."""
    if modulus % 4 in (0, 1):
        return modulus
    if modulus % 4 == 3:
        return -modulus
    raise ValueError(f"no real character of the form (+-{modulus} / .) for modulus = 2 mod 4")


def _l_at(s: int, D: int, chi: np.ndarray, M: int) -> float:
    from scipy.special import digamma, zeta
    m = abs(D)
    n = np.arange(1, M + 1, dtype=np.float64)
    head = float(np.sum(np.tile(chi, M // m) / n ** s))
    x = (M + np.arange(1, m + 1, dtype=np.float64)) / m
    # complete periods beyond M, summed in closed form; the constant terms cancel
    if s == 1:
        tail = -float(np.sum(chi * digamma(x))) / m
    else:
        tail = float(np.sum(chi * zeta(s, x))) / m ** s
    return head + tail


def l_value(s: int, chi_modulus: int, terms: int = 10**6) -> tuple[float, float]:
    """``L(s, chi)`` for the real character ``(D / .)`` mod ``chi_modulus``.

    The first ``terms`` (rounded to whole periods) are summed directly and the
    remaining periods in closed form via Hurwitz zeta / digamma.  Returns the
    value and an error estimate from halving the number of direct terms.
    """
    if s not in (1, 2):
        raise ValueError("s must be 1 or 2")
    if terms < 10**4:
        raise ValueError("terms must be at least 10^4")
    D = character_discriminant(chi_modulus)
    if is_square(D):
        raise PrincipalCharacter(f"(D/.) with D = {D} is principal")
    m = abs(D)
    chi = np.array([kronecker_symbol(D, r) for r in range(1, m + 1)], dtype=np.float64)
    M = max(m, (terms // m) * m)
    half = max(m, (M // 2 // m) * m)
    value = _l_at(s, D, chi, M)
    err = abs(value - _l_at(s, D, chi, half)) + 1e-14
    return value, err


# -- singular integral ------------------------------------------------------------

def sigma_infinity(alpha: float) -> float:
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return 2 * math.pi ** 2 / math.sqrt(3 * alpha)


def sigma_infinity_mc(alpha: float, epsilon: float = 0.01, samples: int = 10**7,
                      seed: int = 0, chunk: int = 10**6,
                      correct_bias: bool = False) -> tuple[float, float]:
    """Monte Carlo estimate of the singular integral and its standard error.

    Samples ``(x, y)`` uniformly in ``x^2 - xy + y^2 <= 1`` and ``(z, w)`` in
    the box ``|z| <= sqrt(1+eps)``, ``|w| <= sqrt((1+eps)/alpha)`` that contains
    the shell ``|F| < eps``; the hit volume is divided by ``2 eps``.  Chunks use
    seeds spawned from ``seed`` so the result does not depend on ``chunk``
    boundaries beyond their count.

    At finite ``eps`` the shell is thinner where ``x^2 - xy + y^2 < eps``, and
    the quotient equals ``sigma_inf (1 - eps/4)`` exactly.  ``correct_bias``
    divides that factor out.
    """
    if alpha <= 0 or not 0 < epsilon <= 0.1:
        raise ValueError("need alpha > 0 and 0 < epsilon <= 0.1")
    if samples < 10**6:
        raise ValueError("at least 10^6 samples are required")
    zb = math.sqrt(1 + epsilon)
    wb = math.sqrt((1 + epsilon) / alpha)
    volume = (2 * math.pi / math.sqrt(3)) * (2 * zb) * (2 * wb)
    nchunks = -(-samples // chunk)
    hits = 0
    for i, ss in enumerate(np.random.SeedSequence(seed).spawn(nchunks)):
        rng = np.random.default_rng(ss)
        n = min(chunk, samples - i * chunk)
        # uniform point in the unit disc mapped onto the ellipse
        r = np.sqrt(rng.random(n))
        th = 2 * np.pi * rng.random(n)
        u, v = r * np.cos(th), r * np.sin(th)
        x = 2 * v / math.sqrt(3)
        y = v / math.sqrt(3) - u
        z = rng.uniform(-zb, zb, n)
        w = rng.uniform(-wb, wb, n)
        F = x * x - x * y + y * y - z * z - alpha * w * w
        hits += int(np.count_nonzero(np.abs(F) < epsilon))
    frac = hits / samples
    est = volume * frac / (2 * epsilon)
    se = volume * math.sqrt(frac * (1 - frac) / samples) / (2 * epsilon)
    if correct_bias:
        est, se = est / (1 - epsilon / 4), se / (1 - epsilon / 4)
    return est, se


# -- p-adic densities ----------------------------------------------------------------

def _ez2(alpha: int) -> Fraction:
    m = alpha % 8
    if m == 3:
        return Fraction(3, 2)
    if m == 7:
        return Fraction(7, 6)
    return Fraction(1)


def _ez3(alpha: int) -> Fraction:
    if alpha % 3:
        return Fraction(1)
    return Fraction(2) if (alpha // 3) % 3 == 1 else Fraction(3, 2)


def sigma_p_lemma(p: int, alpha: int) -> tuple[Fraction, str]:
    """Closed-form density at ``p`` together with the lemma branch used."""
    if alpha < 1:
        raise ValueError("alpha must be a positive integer")
    if p < 2 or factorize(p) != {p: 1}:
        raise ValueError(f"{p} is not prime")
    if p == 2:
        s = valuation(alpha, 2) // 2
        base = _ez2(alpha // 4 ** s)
        if s == 0:
            return base, "2-ez"
        return Fraction(3, 2) + (base - Fraction(3, 2)) / 2 ** s, "a-9"
    if p == 3:
        s = valuation(alpha, 3) // 2
        base = _ez3(alpha // 9 ** s)
        if s == 0:
            return base, "a-10"
        return 2 - (2 - base) / Fraction(3) ** s, "a-11"
    r = valuation(alpha, p)
    inv = Fraction(1, p)
    if r % 2:
        return 1 + inv - inv ** ((r + 1) // 2), "a-7"
    if is_qr(3 * alpha // p ** r, p):
        return 1 + inv, "a-5" if r == 0 else "a-6"
    if r == 0:
        return (1 + inv * inv) / (1 + inv), "a-5"
    return 1 + inv - Fraction(2, p ** (r // 2) * (p + 1)), "a-6"


def sigma_p(p: int, alpha: int) -> Fraction:
    return sigma_p_lemma(p, alpha)[0]


def _histograms(p: int, k: int, alpha: int):
    """Value histograms of ``x^2 - xy + y^2`` and ``-(z^2 + alpha w^2)`` mod p^k.

    Each comes as (all pairs, pairs restricted to the first variable(s) = 0 mod p).
    """
    m = p ** k
    r = np.arange(m, dtype=np.int64)
    A = np.zeros(m, dtype=np.int64)
    Adiv = np.zeros(m, dtype=np.int64)
    B = np.zeros(m, dtype=np.int64)
    Bdiv = np.zeros(m, dtype=np.int64)
    r_div = r[r % p == 0]
    am = alpha % m
    w_part = (am * r % m) * r % m
    for x in range(m):
        h = np.bincount((x * x - x * r + r * r) % m, minlength=m)
        A += h
        if x % p == 0:
            Adiv += np.bincount((x * x - x * r_div + r_div * r_div) % m, minlength=m)
        hb = np.bincount((-(x * x) - w_part) % m, minlength=m)
        B += hb
        if x % p == 0:
            Bdiv += hb
    return A, Adiv, B, Bdiv


def padic_counts(p: int, k: int, alpha: int) -> tuple[int, int]:
    """``(N_k, good_k)``: all solutions of ``F = 0 mod p^k`` and those with ``(x, y, z)`` not all ``= 0 mod p``."""
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k == 0:
        return 1, 1
    if 2 * p ** (2 * k) > PAIR_BUDGET:
        raise BudgetExceeded(f"p^k = {p}^{k}: {2 * p ** (2 * k)} pair evaluations exceed {PAIR_BUDGET}")
    A, Adiv, B, Bdiv = _histograms(p, k, alpha)
    m = p ** k
    neg = (-np.arange(m)) % m
    total = int(np.dot(A, B[neg]))
    bad = int(np.dot(Adiv, Bdiv[neg]))
    return total, total - bad


def padic_bruteforce(p: int, k: int, r: int = 0, alpha_prime: int = 1) -> Fraction:
    """Exact ``N_k / p^{3k}`` for ``alpha = p^r alpha'`` (``N_0 = 1``)."""
    n, _ = padic_counts(p, k, p ** r * alpha_prime)
    return Fraction(n, p ** (3 * k))


def default_kmax(p: int, budget: int = 10**7) -> int:
    k = 1
    while p ** (2 * (k + 1)) <= budget:
        k += 1
    return k


@dataclass
class RecursionCheck:
    k: int
    lhs: int
    rhs: int

    @property
    def ok(self) -> bool:
        return self.lhs == self.rhs


@dataclass
class PadicDensity:
    p: int
    alpha: int
    closed_form: Fraction
    lemma_id: str
    empirical: list[tuple[int, Fraction]]
    checks: list[RecursionCheck] = field(default_factory=list)
    base_good: Fraction | None = None

    @property
    def recursion_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def final_gap(self) -> float:
        return abs(float(self.empirical[-1][1] - self.closed_form))

    def tolerance(self) -> float:
        return 1.0 / self.p ** (self.empirical[-1][0] // 2)

    def rows(self):
        for k, frac in self.empirical:
            yield (self.p, k, frac.numerator * (self.p ** (3 * k) // frac.denominator),
                   self.p ** (3 * k), self.closed_form.numerator, self.closed_form.denominator)


def base_level(p: int) -> int:
    return 1 if p >= 5 else 3


def density_report(p: int, alpha: int, kmax: int | None = None) -> PadicDensity:
    """Exhaustive counts up to ``kmax`` with the lifting recursion checked at every level.

    ``base`` is 1 for ``p >= 5`` and 3 for ``p = 2, 3``.  For every ``k >= max(2, base)``
    the count splits into lifts of nonsingular solutions and solutions with
    ``x, y, z = 0 mod p``:

        N_k(alpha) = good_base p^{3(k - base)} + p^4 N_{k-2}(alpha)          if p^2 does not divide alpha
        N_k(alpha) = good_base p^{3(k - base)} + p^5 N_{k-2}(alpha / p^2)    otherwise
    """
    if kmax is None:
        kmax = default_kmax(p)
    closed, lemma = sigma_p_lemma(p, alpha)
    counts = {k: padic_counts(p, k, alpha) for k in range(0, kmax + 1)}
    empirical = [(k, Fraction(counts[k][0], p ** (3 * k))) for k in range(1, kmax + 1)]
    b = base_level(p)
    checks = []
    inner = alpha // (p * p) if alpha % (p * p) == 0 else alpha
    e = 5 if alpha % (p * p) == 0 else 4
    if b <= kmax:
        good_b = counts[b][1]
        for k in range(max(2, b), kmax + 1):
            n_inner = counts[k - 2][0] if inner == alpha else padic_counts(p, k - 2, inner)[0]
            checks.append(RecursionCheck(k, counts[k][0],
                                         good_b * p ** (3 * (k - b)) + p ** e * n_inner))
        base_good = Fraction(good_b, p ** (3 * b))
    else:
        base_good = None
    return PadicDensity(p, alpha, closed, lemma, empirical, checks, base_good)


def densities_to_csv(reports, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["p", "k", "nk", "den", "closed_num", "closed_den"])
        for rep in reports:
            for row in rep.rows():
                w.writerow(row)


# -- the constant -----------------------------------------------------------------------

def square_constant(a: int, b: int) -> float:
    return 3 * math.sqrt(3) / math.sqrt(a * squarefree_part(b))


@dataclass
class SingularConstant:
    a: int
    b: int
    b_prime: int
    chi_modulus: int
    L1: float
    L2: float
    sigma2: Fraction
    odd_sigma_factors: list[tuple[int, Fraction]]
    C: float
    L_errors: tuple[float, float] = (0.0, 0.0)
    C_simplified: float | None = None

    @property
    def alpha(self) -> int:
        return self.a * self.b_prime

    def to_text(self) -> str:
        lines = [f"a = {self.a}, b = {self.b}, b' = {self.b_prime}, alpha = {self.alpha}",
                 f"character modulus = {self.chi_modulus}",
                 f"L(1) = {self.L1:.12g} (err {self.L_errors[0]:.2g})",
                 f"L(2) = {self.L2:.12g} (err {self.L_errors[1]:.2g})",
                 f"sigma_2 = {self.sigma2}"]
        lines += [f"sigma_{p} = {s}" for p, s in self.odd_sigma_factors]
        lines.append(f"C = {self.C:.12g}")
        if self.C_simplified is not None:
            lines.append(f"C (simplified form) = {self.C_simplified:.12g}")
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["factor", "value"])
            w.writerow(["prefactor", f"{2 * math.pi ** 2 / math.sqrt(3 * self.alpha):.17g}"])
            w.writerow(["L1", f"{self.L1:.17g}"])
            w.writerow(["L2", f"{self.L2:.17g}"])
            w.writerow(["sigma_2", str(self.sigma2)])
            for p, s in self.odd_sigma_factors:
                w.writerow([f"sigma_{p}", str(s)])
            w.writerow(["C", f"{self.C:.17g}"])


def constant_C(a: int, b: int, terms: int = 10**6) -> SingularConstant:
    if a < 1 or b < 1:
        raise ValueError("a and b must be positive")
    bp = squarefree_part(b)
    alpha = a * bp
    if is_square(3 * alpha):
        raise SquareCase(f"3ab' = {3 * alpha} is a perfect square", square_constant(a, b))
    mod = 12 * alpha
    L1, e1 = l_value(1, mod, terms)
    L2, e2 = l_value(2, mod, terms)
    s2 = sigma_p(2, alpha)
    odd = [(p, sigma_p(p, alpha)) for p, r in sorted(factorize(3 * alpha).items())
           if p >= 3 and r >= 2]
    prod = float(s2)
    for _, s in odd:
        prod *= float(s)
    pre = 2 * math.pi ** 2 / math.sqrt(3 * alpha)
    C = pre * L1 / L2 * prod
    simple = None
    if squarefree_part(3 * alpha) == 3 * alpha and alpha % 8 in (1, 5):
        simple = pre * L1 / L2
    return SingularConstant(a, b, bp, mod, L1, L2, s2, odd, C, (e1, e2), simple)


def square_case_chain(a: int, b: int, primes=(2, 5, 7, 11, 13, 17, 19, 23)) -> float:
    """Rebuild the square-case constant from the local densities.

    Checks ``sigma_p = 1 + 1/p`` for the listed primes and uses ``sigma_3``
    in ``(1/2) sigma_inf (6/pi^2) (sigma_3 / (1 + 1/3))``.
    """
    alpha = a * squarefree_part(b)
    if not is_square(3 * alpha):
        raise UnhandledCase(f"3ab' = {3 * alpha} is not a square")
    for p in primes:
        if sigma_p(p, alpha) != 1 + Fraction(1, p):
            raise UnhandledCase(f"sigma_{p}({alpha}) = {sigma_p(p, alpha)} differs from 1 + 1/p")
    s3 = sigma_p(3, alpha)
    return 0.5 * sigma_infinity(alpha) * (6 / math.pi ** 2) * float(s3 / Fraction(4, 3))
