"""Fast in-process invariant checks used by ``latcov verify``.

Each check returns ``(passed, detail)``; sizes are kept small so the whole
suite runs in well under a minute.
"""
from __future__ import annotations

import math
import random
from fractions import Fraction

import numpy as np


def _quadform_spectrum():
    from .quadform import QuadForm, enumerate_spectrum
    sp = enumerate_spectrum(QuadForm(Fraction(4, 3), Fraction(4, 3), Fraction(4, 3)), 2)
    got = {e.key.y2: e.multiplicity for e in sp.entries}
    return got == {1: 6, 3: 6, 4: 6}, f"triangle spectrum up to Y=2: {got}"


def _quadform_scaling():
    from .quadform import QuadForm, enumerate_spectrum
    f = QuadForm(2, 1, 3)
    lam = Fraction(9, 4)
    s1 = enumerate_spectrum(f, 10)
    s2 = enumerate_spectrum(f.scaled(lam), Fraction(20, 3))
    ok = (len(s1) == len(s2) and all(a.key.y2 == b.key.y2 * lam for a, b in zip(s1.entries, s2.entries))
          and np.allclose(s2.coeff_mag, s1.coeff_mag * float(lam) ** -0.25, rtol=1e-12))
    return ok, f"{len(s1)} entries compared under scaling by {lam}"


def _counting_oracle():
    from .counting import brute_force_count, lattice_count
    from .quadform import QuadForm
    rng = random.Random(1)
    bad = 0
    for _ in range(40):
        a, c = rng.randint(1, 5), rng.randint(1, 5)
        b = rng.randint(-1, 1) * rng.randint(0, min(a, c))
        f = QuadForm(a, b, c)
        R = Fraction(rng.randint(0, 200), 10)
        bad += lattice_count(f, R) != brute_force_count(f, R)
    return bad == 0, f"{bad} mismatches in 40 random cases"


def _counting_eigen():
    from .counting import EigenDomain, eigen_count, lattice_count_r2
    dom = EigenDomain.rectangle(1, 1)
    bad = 0
    for X in range(0, 2001, 7):
        n = lattice_count_r2(dom.form, X)
        axes = 4 * math.isqrt(X) + 1
        bad += eigen_count(dom, X) != (n - axes) // 4
    return bad == 0, f"{bad} mismatches for X <= 2000"


def _counting_defect():
    from .counting import EigenDomain, connection_defect
    grid = np.linspace(1, 100, 2000)
    r = connection_defect(EigenDomain.rectangle(1, 1), grid)
    t = connection_defect(EigenDomain.triangle(1), grid)
    ok = r.min() >= -3 - 1e-9 and r.max() <= 1 + 1e-9 and t.min() >= -5 - 1e-9 and t.max() <= 1 + 1e-9
    return ok, f"rectangle in [{r.min():.3g}, {r.max():.3g}], triangle in [{t.min():.3g}, {t.max():.3g}]"


def _cov_routes():
    from .covariance import TRIANGLE, global_covariance_formula, global_covariance_general
    from .quadform import QuadForm, enumerate_spectrum
    circ = QuadForm(1, 0, 1)
    a = global_covariance_formula(enumerate_spectrum(TRIANGLE, 50), enumerate_spectrum(circ, 50))
    b = global_covariance_general(TRIANGLE, circ, 50)
    return abs(a - b) <= 1e-10 * abs(a), f"grouped {a:.15g} vs vector double sum {b:.15g}"


def _cov_tail():
    from .covariance import TRIANGLE, global_covariance_formula, tail_r
    from .quadform import QuadForm, enumerate_spectrum
    s1, s2 = enumerate_spectrum(TRIANGLE, 40), enumerate_spectrum(QuadForm(1, 0, 1), 40)
    a, b = global_covariance_formula(s1, s2), tail_r(s1, s2, 0)
    return math.isclose(a, b, rel_tol=1e-12), f"tail at 0 = {b:.12g}, series = {a:.12g}"


def _cov_gap():
    from .covariance import TRIANGLE, diophantine_gap, diophantine_gap_bruteforce
    from .quadform import QuadForm
    bad = [M for M in (1, 2, 5, 10, 20, 30)
           if diophantine_gap(TRIANGLE, QuadForm(1, 0, 3), M).gap
           != diophantine_gap_bruteforce(TRIANGLE, QuadForm(1, 0, 3), M).gap]
    return not bad, f"scan vs brute force mismatches at M in {bad}"


def _cov_monotone():
    from .covariance import TRIANGLE, f_of_h
    from .quadform import QuadForm, common_arrays, enumerate_spectrum
    vals = []
    for y in (100, 150, 200):
        cs = common_arrays(enumerate_spectrum(TRIANGLE, y), enumerate_spectrum(QuadForm(1, 0, 3), y))
        vals.append(f_of_h(cs, 0.02))
    return all(x <= y for x, y in zip(vals, vals[1:])), f"f(0.02) by cutoff: {vals}"


def _app_routes():
    from .arith import a_from_factorization, r_omega_table
    t = r_omega_table(2000 ** 2)
    bad = [k for k in range(1, 2001) if t[k * k] != 6 * a_from_factorization(k)]
    mod6 = bool(np.all(t[1:10001] % 6 == 0))
    return not bad and mod6, f"route mismatches {bad[:5]}, r_omega = 0 mod 6: {mod6}"


def _app_dirichlet():
    from .arith import dirichlet_closed, dirichlet_partial
    a, b = dirichlet_partial(10**6), dirichlet_closed()
    return abs(a - b) <= 0.005 * b, f"partial {a:.8g} vs Euler product {b:.8g}"


def _app_padic():
    from .singular import density_report
    bad = []
    for p, k in ((2, 7), (3, 5), (5, 3), (7, 3)):
        for al in (1, 2, 3, 5, 6, 9, 12, 45):
            r = density_report(p, al, k)
            if not r.recursion_ok or r.final_gap > r.tolerance():
                bad.append((p, al))
    return not bad, f"failing (p, alpha): {bad}"


def _app_sigma_inf():
    from .singular import sigma_infinity, sigma_infinity_mc
    est, se = sigma_infinity_mc(1, 0.01, 10**6, seed=7)
    return abs(est - sigma_infinity(1)) <= 3 * se, f"{est:.6g} +- {se:.3g} vs {sigma_infinity(1):.6g}"


def _app_constant():
    from .singular import constant_C, square_case_chain, square_constant
    c = constant_C(1, 1)
    chain = square_case_chain(3, 1)
    ok = (c.C_simplified is not None and math.isclose(c.C, c.C_simplified, rel_tol=1e-15)
          and abs(chain - square_constant(3, 1)) <= 1e-12)
    return ok, f"C(1,1) = {c.C:.10g}, square chain {chain:.15g}"


SUITES = {
    "quadform": [("spectrum", _quadform_spectrum), ("scaling", _quadform_scaling)],
    "counting": [("oracle", _counting_oracle), ("eigen_lattice", _counting_eigen),
                 ("connection", _counting_defect)],
    "covariance": [("routes", _cov_routes), ("tail_at_zero", _cov_tail), ("gap_scan", _cov_gap),
                   ("f_monotone_cutoff", _cov_monotone)],
    "appendix": [("a_routes", _app_routes), ("dirichlet", _app_dirichlet), ("padic", _app_padic),
                 ("sigma_inf", _app_sigma_inf), ("constant", _app_constant)],
}


def run_suite(name: str = "all") -> list[tuple[str, bool, str]]:
    if name != "all" and name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; choose from all, {', '.join(SUITES)}")
    out = []
    for suite in (SUITES if name == "all" else [name]):
        for check, fn in SUITES[suite]:
            try:
                ok, detail = fn()
            except Exception as exc:  # a crashing check is a failed check
                ok, detail = False, f"{type(exc).__name__}: {exc}"
            out.append((f"{suite}.{check}", bool(ok), detail))
    return out
