"""Time averages, trigonometric approximations and covariance formulas.

Convention: every spectrum stores one-sided magnitudes ``c`` at ``nu > 0``.
The two-sided Fourier expansion has ``|F^(+nu)| = |F^(-nu)| = c`` with
conjugate phases, so the truncated approximant is ``sum 2 c cos(nu t - 3pi/4)``,
the two-sided covariance series is ``2 sum c1 c2`` and the short-interval
function is ``8 sum c1 c2 sin^2(h nu / 2)``.  Public results are two-sided.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, asdict
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (CutoffMismatch, CutoffTooSmallForH, EmptySamples, GridMismatch,
                     UnclassifiedCase)
from .quadform import (CommonSpectrum, QuadForm, Spectrum, as_fraction, common_arrays,
                       enumerate_spectrum, iter_form_points, _INT64_GUARD)
from .counting import ErrorSamples, GridSpec, LatticeCounter, sample_error

PHASE = 3 * math.pi / 4
TRIANGLE = QuadForm(Fraction(4, 3), Fraction(4, 3), Fraction(4, 3))


# -- averaging ----------------------------------------------------------------

def _trapezoid_mean(t: np.ndarray, v: np.ndarray) -> float:
    if len(t) == 1:
        return float(v[0])
    dt = np.diff(t)
    # np.sum reduces pairwise, so the result does not depend on chunking
    return float(np.sum(dt * (v[1:] + v[:-1])) / 2 / (t[-1] - t[0]))


def average(samples: ErrorSamples, return_error: bool = False):
    """Trapezoid mean of the samples over their grid.

    With ``return_error`` the pair ``(mean, err)`` is returned where ``err``
    is the difference to the same rule on every second grid point.
    """
    if len(samples) == 0:
        raise EmptySamples(f"no samples in {samples.label!r}")
    t, v = np.asarray(samples.t, dtype=np.float64), np.asarray(samples.values, dtype=np.float64)
    mean = _trapezoid_mean(t, v)
    if not return_error:
        return mean
    if len(t) < 3:
        return mean, float("nan")
    # keep the last point so both rules cover the same interval
    idx = np.unique(np.r_[np.arange(0, len(t), 2), len(t) - 1])
    return mean, abs(mean - _trapezoid_mean(t[idx], v[idx]))


def empirical_covariance(s1: ErrorSamples, s2: ErrorSamples, return_error: bool = False):
    if len(s1) != len(s2) or not np.array_equal(s1.t, s2.t):
        raise GridMismatch(f"sample grids of {s1.label!r} and {s2.label!r} differ")
    prod = ErrorSamples(f"{s1.label}*{s2.label}", s1.t, s1.values * s2.values, s1.T, s1.t0, s1.h)
    return average(prod, return_error)


# -- trigonometric approximation ----------------------------------------------

def trig_poly(spectrum: Spectrum | None, t, h: float | None = None,
              chunk: int = 2_000_000):
    """Truncated approximant ``sum 2c cos(2 pi y t - 3pi/4)`` at ``t``.

    With ``h`` the windowed version ``P(t+h) - P(t)`` is returned.
    """
    scalar = np.ndim(t) == 0
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.zeros_like(t)
    if spectrum is None or len(spectrum) == 0:
        return float(out[0]) if scalar else out
    nu = 2 * np.pi * spectrum.y
    amp = 2 * spectrum.coeff_mag
    step = max(1, chunk // len(nu))
    for s in range(0, len(t), step):
        tt = t[s:s + step]
        if h is None:
            out[s:s + step] = np.cos(np.outer(tt, nu) - PHASE) @ amp
        else:
            out[s:s + step] = (np.cos(np.outer(tt + h, nu) - PHASE)
                               - np.cos(np.outer(tt, nu) - PHASE)) @ amp
    return float(out[0]) if scalar else out


def spectrum_below(form: QuadForm, N) -> Spectrum:
    """Spectrum restricted to ``Y < N`` (strict, matching a ``|n| < N`` cut for the circle)."""
    sp = enumerate_spectrum(form, N)
    bound = as_fraction(N) ** 2 / sp.scale
    keep = np.array([Fraction(int(q)) < bound for q in sp.qvals], dtype=bool)
    return Spectrum(form, sp.y_max, sp.qvals[keep], sp.mult[keep], sp.scale)


def approximation_defect(form: QuadForm, N, T: float, step: float | None = None,
                         counter: LatticeCounter | None = None) -> float:
    """Time average of ``(F - P_N)^2`` over ``[1, T]``."""
    sp = spectrum_below(form, N)
    if step is None:
        step = 1.0 / (8.0 * float(N))
    samples = sample_error(form, T, GridSpec(step, y_max=float(N)), counter=counter)
    diff = samples.values - trig_poly(sp, samples.t)
    return average(ErrorSamples("defect", samples.t, diff * diff, samples.T))


# -- global covariance ---------------------------------------------------------

def _prefactor(f1: QuadForm, f2: QuadForm) -> float:
    return 16 * math.pi / (math.sqrt(f1.det) * math.sqrt(f2.det))


def global_covariance_formula(s1: Spectrum, s2: Spectrum) -> float:
    """Truncated two-sided series ``16 pi/(sqrt d1 sqrt d2) sum r1 r2 / nu^3``."""
    cs = common_arrays(s1, s2)
    if len(cs) == 0:
        return 0.0
    return _prefactor(s1.form, s2.form) * float(np.sum(cs.r1 * cs.r2 / cs.nu ** 3))


def global_covariance_partial_sums(s1: Spectrum, s2: Spectrum) -> tuple[np.ndarray, np.ndarray]:
    """Cumulative series along increasing common frequency: ``(nu, partial sums)``."""
    cs = common_arrays(s1, s2)
    return cs.nu, _prefactor(s1.form, s2.form) * np.cumsum(cs.r1 * cs.r2 / cs.nu ** 3)


def global_covariance_tail_bound(s1: Spectrum, s2: Spectrum) -> float:
    """Bound on the omitted part of the series beyond the cutoff.

    Fits the cumulative weight ``S(nu) = sum_{nu' <= nu} r1 r2 <= A nu^2.5``
    on the enumerated range and sums by parts:
    ``sum_{nu > V} r1 r2 nu^-3 <= 6 A V^-1/2 - S(V) V^-3``.
    """
    cs = common_arrays(s1, s2)
    if len(cs) == 0:
        return 0.0
    S = np.cumsum((cs.r1 * cs.r2).astype(np.float64))
    A = float(np.max(S / cs.nu ** 2.5))
    V = 2 * math.pi * float(s1.y_max)
    return _prefactor(s1.form, s2.form) * max(6 * A / math.sqrt(V) - S[-1] / V ** 3, 0.0)


def _vector_weights(form: QuadForm, y_max) -> tuple[np.ndarray, np.ndarray]:
    """Per-key sums of ``sqrt(rho(n)) / |n|^1.5`` over all nonzero n with Y(n) <= y_max."""
    P, R, S, scale = form.dual
    ym = as_fraction(y_max)
    qmax = math.floor(ym * ym / scale)
    a, b, c = (float(v) for v in form.coeffs)
    d = float(form.det)
    qs, ws = [], []
    for x, y, q in iter_form_points(P, R, S, qmax, with_coords=True):
        nz = q > 0
        x, y, q = x[nz].astype(np.float64), y[nz].astype(np.float64), q[nz]
        norm2 = x * x + y * y
        num = a * y * y - b * x * y + c * x * x
        rho = math.sqrt(d) / 2 * (norm2 / num) ** 1.5
        qs.append(q)
        ws.append(np.sqrt(rho) / norm2 ** 0.75)
    q = np.concatenate(qs)
    w = np.concatenate(ws)
    keys, inv = np.unique(q, return_inverse=True)
    return keys, np.bincount(inv, weights=w)


def global_covariance_general(form1: QuadForm, form2: QuadForm, y_max) -> float:
    """The same truncated series as a double sum over lattice vectors.

    ``(1 / 2 pi^2) sum_n sum_m sqrt(rho1(n) rho2(m)) / (|n||m|)^1.5`` over
    nonzero ``n, m`` with ``Y1(n) = Y2(m) <= y_max``, using curvature radii
    and norms of individual vectors rather than the grouped coefficients.
    """
    k1, w1 = _vector_weights(form1, y_max)
    k2, w2 = _vector_weights(form2, y_max)
    s1, s2 = form1.dual[3], form2.dual[3]
    u = s1.numerator * s2.denominator
    v = s2.numerator * s1.denominator
    g = math.gcd(u, v)
    u, v = u // g, v // g
    if v * int(k1[-1]) >= _INT64_GUARD or u * int(k2[-1]) >= _INT64_GUARD:
        raise OverflowError("key cross-multiplication exceeds int64")
    i = np.nonzero(k1 % v == 0)[0]
    target = (k1[i] // v) * u
    j = np.minimum(np.searchsorted(k2, target), len(k2) - 1)
    hit = k2[j] == target
    return float(np.sum(w1[i[hit]] * w2[j[hit]])) / (2 * math.pi ** 2)


# -- short intervals -------------------------------------------------------------

def _common(common, forms, y_max) -> CommonSpectrum:
    if isinstance(common, CommonSpectrum):
        return common
    if forms is None or y_max is None:
        raise ValueError("a plain list of common frequencies needs forms and y_max")
    from .quadform import freq_coefficient
    f1, f2 = forms
    y = np.array([k.y for k, _, _ in common], dtype=np.float64)
    r1 = np.array([r for _, r, _ in common], dtype=np.int64)
    r2 = np.array([r for _, _, r in common], dtype=np.int64)
    c1 = np.array([freq_coefficient(f1, k, r) for k, r, _ in common])
    c2 = np.array([freq_coefficient(f2, k, r) for k, _, r in common])
    return CommonSpectrum((f1, f2), y_max, y, r1, r2, c1, c2)


def f_of_h(common, h: float, forms: tuple[QuadForm, QuadForm] | None = None,
           y_max: float | None = None) -> float:
    """Truncated ``f(h) = 8 sum_{nu > 0} c1 c2 sin^2(h nu / 2)``.

    The phases of the two coefficients are equal at every frequency, so only
    magnitudes enter.  ``common`` is a ``CommonSpectrum`` or a list of
    ``(FreqKey, r1, r2)`` together with ``forms`` and ``y_max``.
    """
    cs = _common(common, forms, y_max)
    if not 0 < h < 1:
        raise ValueError(f"h={h} must lie in (0, 1)")
    if float(cs.y_max) < 1.0 / h:
        raise CutoffTooSmallForH(f"y_max={cs.y_max} < 1/h={1 / h}")
    if len(cs) == 0:
        return 0.0
    return 8 * float(np.sum(cs.c1 * cs.c2 * np.sin(h * cs.nu / 2) ** 2))


def f_rational_series(p: int, q: int, h: float, y_max: float) -> float:
    """``f(h)`` for the triangle ellipse against ``(1, 0, p/q)`` via representation numbers.

    Common values of ``Y^2`` are integers ``l``; the series is
    ``sqrt(3)/(pi^2 sqrt(alpha)) sum_l r_w(l) r_{q,p}(l) l^-1.5 sin^2(pi h sqrt(l))``.
    """
    from .arith import r_ab_table, r_omega_table
    if not 0 < h < 1:
        raise ValueError(f"h={h} must lie in (0, 1)")
    if y_max < 1.0 / h:
        raise CutoffTooSmallForH(f"y_max={y_max} < 1/h={1 / h}")
    L = int(math.floor(y_max * y_max))
    prod = (r_omega_table(L) * r_ab_table(L, q, p))[1:].astype(np.float64)
    ell = np.arange(1, L + 1, dtype=np.float64)
    nz = prod > 0
    terms = prod[nz] / ell[nz] ** 1.5 * np.sin(np.pi * h * np.sqrt(ell[nz])) ** 2
    return math.sqrt(3) / (math.pi ** 2 * math.sqrt(p / q)) * float(np.sum(terms))


def tail_r(s1: Spectrum, s2: Spectrum, M: float) -> float:
    """Two-sided tail ``sum_{|nu| > M} F1^(nu) conj F2^(nu)`` within the cutoff.

    At ``M = 0`` this equals ``global_covariance_formula`` (both two-sided,
    ratio 1).
    """
    cs = common_arrays(s1, s2)
    if len(cs) == 0:
        return 0.0
    sel = cs.nu > M
    return 2 * float(np.sum(cs.c1[sel] * cs.c2[sel]))


def minimal_f_constant(common: CommonSpectrum) -> float:
    """``2 nu0^2 |F1^(nu0)| |F2^(nu0)|`` at the smallest common frequency.

    This is the leading coefficient of ``h^2 log(1/h)`` when all common
    frequencies are integer multiples of ``nu0`` with constant multiplicities.
    """
    if len(common) == 0:
        raise UnclassifiedCase("no common frequency")
    nu0 = float(common.nu[0])
    return 2 * nu0 * nu0 * float(common.c1[0] * common.c2[0])


def lower_bound_fit(hs: Sequence[float], fvals: Sequence[float]) -> float:
    """Least-squares ``c`` in ``f(h) ~ c h^2 log(1/h)`` (through the origin)."""
    hs = np.asarray(hs, dtype=np.float64)
    x = hs ** 2 * np.log(1 / hs)
    y = np.asarray(fvals, dtype=np.float64)
    return float(x @ y / (x @ x))


def trig_hypothesis(T: float, h: float, y_max: float, kappa: float) -> dict:
    """Report (not enforce) whether ``(T, h, y_max)`` lies in the regime where the trigonometric approximation is controlled."""
    n_allowed = T ** (1 / (25 / 6 + kappa))
    return {
        "N": y_max,
        "N_max": n_allowed,
        "N_ok": y_max <= n_allowed,
        "h_ok": 0 < h < 1 and y_max >= 1 / h,
        "error_scale": y_max ** (-1 / 6),
    }


# -- Diophantine gaps ------------------------------------------------------------

@dataclass(frozen=True)
class DioGap:
    M: int
    gap: float
    n: tuple[int, int]
    m: tuple[int, int]
    kappa: float | None = None


def _ball_keys(form: QuadForm, M: int):
    """Distinct dual-form values over nonzero n with |n| <= M and one vector for each."""
    P, R, S, _ = form.dual
    r = np.arange(-M, M + 1, dtype=np.int64)
    x, y = np.meshgrid(r, r, indexing="ij")
    x, y = x.ravel(), y.ravel()
    keep = (x * x + y * y <= M * M) & ((x != 0) | (y != 0))
    x, y = x[keep], y[keep]
    q = P * x * x + R * x * y + S * y * y
    keys, idx = np.unique(q, return_index=True)
    return keys, x[idx], y[idx]


def _form_of(s) -> QuadForm:
    return s.form if isinstance(s, Spectrum) else s


def _gap_setup(s1, s2, M):
    if M < 1:
        raise ValueError("M must be >= 1")
    f1, f2 = _form_of(s1), _form_of(s2)
    k1, x1, y1 = _ball_keys(f1, M)
    k2, x2, y2 = _ball_keys(f2, M)
    sc1, sc2 = f1.dual[3], f2.dual[3]
    # y2 difference = (u1 q1 - u2 q2) / den with integer numerators
    den = sc1.denominator * sc2.denominator // math.gcd(sc1.denominator, sc2.denominator)
    u1 = sc1.numerator * (den // sc1.denominator)
    u2 = sc2.numerator * (den // sc2.denominator)
    if u1 * int(k1[-1]) >= _INT64_GUARD or u2 * int(k2[-1]) >= _INT64_GUARD:
        raise OverflowError("gap numerators exceed int64")
    Y1 = np.sqrt(k1 * float(sc1))
    Y2 = np.sqrt(k2 * float(sc2))
    return (k1 * u1, Y1, x1, y1), (k2 * u2, Y2, x2, y2), den


def _gap_from(i, j, A, B, den):
    num = A[0][i] - B[0][j]
    ok = num != 0
    i, j, num = i[ok], j[ok], num[ok]
    if len(num) == 0:
        return math.inf, None, None
    gaps = np.abs(num).astype(np.float64) / den / (A[1][i] + B[1][j])
    best = int(np.argmin(gaps))
    return float(gaps[best]), int(i[best]), int(j[best])


def diophantine_gap(s1, s2, M: int) -> DioGap:
    """Smallest ``|Y1(n) - Y2(m)| > 0`` over ``|n|, |m| <= M`` (Euclidean norms).

    When no positive difference exists the gap is ``inf`` with no witnesses.

    ``s1``/``s2`` may be spectra or forms; only the forms are used.  Each
    value of the first list is compared with its neighbours in the sorted
    second list, which contains the global minimiser.
    """
    A, B, den = _gap_setup(s1, s2, M)
    j0 = np.searchsorted(B[1], A[1])
    ii, jj = [], []
    for off in (-2, -1, 0, 1):
        j = np.clip(j0 + off, 0, len(B[1]) - 1)
        ii.append(np.arange(len(A[1])))
        jj.append(j)
    gap, i, j = _gap_from(np.concatenate(ii), np.concatenate(jj), A, B, den)
    return _make_gap(M, gap, i, j, A, B)


def _make_gap(M, gap, i, j, A, B) -> DioGap:
    if i is None:  # every value in one ball also occurs in the other
        return DioGap(M, gap, None, None)
    return DioGap(M, gap, (int(A[2][i]), int(A[3][i])), (int(B[2][j]), int(B[3][j])))


def diophantine_gap_bruteforce(s1, s2, M: int) -> DioGap:
    A, B, den = _gap_setup(s1, s2, M)
    i, j = np.meshgrid(np.arange(len(A[1])), np.arange(len(B[1])), indexing="ij")
    gap, i, j = _gap_from(i.ravel(), j.ravel(), A, B, den)
    return _make_gap(M, gap, i, j, A, B)


def kappa_fit(Ms: Sequence[int], gaps: Sequence[float]) -> float:
    """Exponent ``kappa`` in ``D(M) ~ M^-kappa``: minus the log-log least-squares slope."""
    D = np.asarray([float(getattr(g, "gap", g)) for g in gaps])
    keep = np.isfinite(D)  # balls without distinct values carry no information
    if keep.sum() < 2:
        return float("nan")
    x = np.log(np.asarray(Ms, dtype=np.float64)[keep])
    y = np.log(D[keep])
    slope = np.polyfit(x, y, 1)[0]
    return float(-slope)


# -- asymptotic constants -------------------------------------------------------------

@dataclass(frozen=True)
class CaseParams:
    """Arithmetic regime of a pair.

    kind is one of ``irrational``, ``rational_nonsquare``, ``rational_square``
    (triangle ellipse against ``(1, 0, alpha)``) or ``generic``.
    """

    kind: str
    alpha: float | None = None
    p: int | None = None
    q: int | None = None
    nu0: float | None = None
    det1: float | None = None
    det2: float | None = None


def rational_case(alpha) -> CaseParams:
    from .singular import is_square
    a = as_fraction(alpha)
    p, q = a.numerator, a.denominator
    kind = "rational_square" if is_square(3 * p * q) else "rational_nonsquare"
    return CaseParams(kind, float(a), p, q)


def classify_pair(form1: QuadForm, form2: QuadForm, y_max: float = 50.0,
                  irrational: bool = False) -> CaseParams:
    """Identify the regime of a pair of forms.

    The triangle ellipse against a diagonal ``(1, 0, alpha)`` form gives one of
    the three specific regimes (``irrational`` marks alpha as a surrogate for
    an irrational value).  Otherwise the pair is generic when every common
    frequency up to ``y_max`` is a multiple of the smallest one with constant
    multiplicities.
    """
    for f, g in ((form1, form2), (form2, form1)):
        if f == TRIANGLE and g.b == 0 and g.a == 1:
            if irrational:
                return CaseParams("irrational", float(g.c))
            return rational_case(g.c)
    cs = common_arrays(enumerate_spectrum(form1, y_max), enumerate_spectrum(form2, y_max))
    if len(cs) == 0:
        raise UnclassifiedCase(f"{form1} and {form2} share no frequency up to y_max={y_max}")
    ratio = cs.y / cs.y[0]
    mult = np.rint(ratio)
    if (np.allclose(ratio, mult, rtol=0, atol=1e-9) and np.all(cs.r1 == cs.r1[0])
            and np.all(cs.r2 == cs.r2[0])):
        return CaseParams("generic", nu0=float(cs.nu[0]), det1=float(form1.det),
                          det2=float(form2.det))
    raise UnclassifiedCase(f"{form1} and {form2} fit none of the known regimes")


def generic_constant(nu0: float, det1: float, det2: float) -> float:
    return 16 * math.pi / (nu0 * math.sqrt(det1) * math.sqrt(det2))


def predicted_covariance(case: CaseParams, h: float) -> float:
    """Leading asymptotic of the short-interval covariance at window ``h``."""
    if not 0 < h < 1:
        raise ValueError(f"h={h} must lie in (0, 1)")
    L = math.log(1 / h)
    if case.kind == "irrational":
        return 9 / (math.pi * math.sqrt(case.alpha)) * h * h * L * L
    if case.kind == "rational_square":
        from .singular import squarefree_part
        return 18 / math.sqrt(case.p * squarefree_part(case.p)) * h * L
    if case.kind == "rational_nonsquare":
        from .singular import constant_C
        C = constant_C(case.q, case.p).C
        return C * math.sqrt(3) / math.sqrt(case.p / case.q) * h
    if case.kind == "generic":
        return generic_constant(case.nu0, case.det1, case.det2) * h * h * L
    raise UnclassifiedCase(f"unknown case kind {case.kind!r}")


# -- reports -----------------------------------------------------------------------------

@dataclass
class CovarianceReport:
    forms: tuple[str, str]
    T: float
    y_max: float
    n_samples: int
    empirical: float
    quad_error: float
    formula: float
    tail_bound: float
    h: float | None = None
    predicted_asymptotic: float | None = None
    rel_error: float = field(init=False)
    rel_error_predicted: float | None = field(init=False)

    def __post_init__(self):
        self.rel_error = _rel(self.empirical, self.formula)
        self.rel_error_predicted = (None if self.predicted_asymptotic is None
                                    else _rel(self.empirical, self.predicted_asymptotic))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["form1"], d["form2"] = d.pop("forms")
        return d

    def to_csv(self, path) -> None:
        d = self.as_dict()
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(list(d))
            w.writerow([_fmt(v) for v in d.values()])

    def to_text(self) -> str:
        lines = [f"pair: {self.forms[0]} vs {self.forms[1]}",
                 f"T = {self.T:g}, y_max = {self.y_max:g}, samples = {self.n_samples}"]
        if self.h is not None:
            lines.append(f"h = {self.h:g}")
        lines += [f"empirical = {self.empirical:.10g} (quadrature err {self.quad_error:.3g})",
                  f"formula   = {self.formula:.10g} (tail bound {self.tail_bound:.3g})",
                  f"relative difference = {self.rel_error:.4g}"]
        if self.predicted_asymptotic is not None:
            lines.append(f"predicted asymptotic = {self.predicted_asymptotic:.10g} "
                         f"(relative difference {self.rel_error_predicted:.4g})")
        return "\n".join(lines) + "\n"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b) if b != 0 else float("inf")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def covariance_report(form1: QuadForm, form2: QuadForm, T: float, y_max: float,
                      h: float | None = None, step: float | None = None,
                      case: CaseParams | None = None) -> CovarianceReport:
    """Empirical covariance on ``[1, T]`` next to the truncated formula.

    Without ``h`` the formula is the global series; with ``h`` it is ``f(h)``
    and ``case`` (if given) supplies the predicted asymptotic.
    """
    if step is None:
        step = 1.0 / (8.0 * y_max)
        if h is not None:
            step = min(step, h / 20.0)
    grid = GridSpec(step, y_max=y_max)
    top = T + (h or 0.0)
    c1 = LatticeCounter(form1, top)
    c2 = c1 if form2 == form1 else LatticeCounter(form2, top)
    e1 = sample_error(form1, T, grid, h=h, counter=c1)
    e2 = sample_error(form2, T, grid, h=h, counter=c2)
    emp, qerr = empirical_covariance(e1, e2, return_error=True)
    sp1, sp2 = enumerate_spectrum(form1, y_max), enumerate_spectrum(form2, y_max)
    if h is None:
        formula = global_covariance_formula(sp1, sp2)
        tail = global_covariance_tail_bound(sp1, sp2)
        pred = None
    else:
        formula = f_of_h(common_arrays(sp1, sp2), h)
        tail = float("nan")
        pred = predicted_covariance(case, h) if case is not None else None
    return CovarianceReport((str(form1), str(form2)), float(T), float(y_max), len(e1),
                            emp, qerr, formula, tail, h, pred)


def write_plot_script(path_prefix, hs: Sequence[float], fvals: Sequence[float],
                      predicted: Sequence[float]) -> tuple[str, str]:
    """Write ``<prefix>.dat`` and a gnuplot-style ``<prefix>.plt``; nothing is rendered."""
    dat, plt = f"{path_prefix}.dat", f"{path_prefix}.plt"
    with open(dat, "w") as fh:
        fh.write("# h f predicted\n")
        for h, f, p in zip(hs, fvals, predicted):
            fh.write(f"{h:.17g} {f:.17g} {p:.17g}\n")
    with open(plt, "w") as fh:
        fh.write("set logscale xy\nset xlabel 'h'\nset ylabel 'f(h)'\n"
                 f"plot '{dat}' using 1:2 with linespoints title 'f(h)', "
                 f"'{dat}' using 1:3 with lines title 'predicted'\n")
    return dat, plt
