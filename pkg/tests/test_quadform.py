import csv
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latcov import (QuadForm, FreqKey, common_frequencies, curvature_radius, enumerate_spectrum,
                    freq_coefficient, normalize, y_key)
from latcov.errors import CutoffMismatch, CutoffTooSmall, NotPositiveDefinite, ZeroVector

F = Fraction
TRI = QuadForm(F(4, 3), F(4, 3), F(4, 3))
CIRCLE = QuadForm(1, 0, 1)


def brute_spectrum(form, y_max, box=12):
    """Direct loop over |n_i| <= box collecting y2 -> count."""
    out = {}
    for x in range(-box, box + 1):
        for y in range(-box, box + 1):
            if (x, y) == (0, 0):
                continue
            k = y_key(form, (x, y)).y2
            if k <= F(y_max) ** 2:
                out[k] = out.get(k, 0) + 1
    return out


# -- construction -------------------------------------------------------------

def test_normalize_triangle():
    f = normalize(1, 1, 1, F(3, 4))
    assert f.coeffs == (F(4, 3), F(4, 3), F(4, 3))
    assert f.det == F(16, 3)


def test_circle_area_and_det():
    f = normalize(1, 0, 1, 1)
    assert f.det == 4
    assert f.area == pytest.approx(math.pi, rel=1e-15)


def test_indefinite_rejected():
    with pytest.raises(NotPositiveDefinite):
        normalize(1, 0, -1, 1)
    with pytest.raises(NotPositiveDefinite):
        QuadForm(-1, 0, -1)


@given(st.fractions(min_value=F(1, 10), max_value=10), st.fractions(min_value=-1, max_value=1),
       st.fractions(min_value=F(1, 10), max_value=10), st.fractions(min_value=F(1, 10), max_value=10))
def test_normalize_level_consistency(a, b, c, L):
    b = b * min(a, c)  # keeps 4ac - b^2 > 0
    assert normalize(a, b, c, L) == normalize(a / L, b / L, c / L, 1)


def test_as_fraction_strings():
    f = QuadForm("4/3", "4/3", "4/3")
    assert f == TRI


# -- keys and curvature ------------------------------------------------------------

def test_y_key_examples():
    assert y_key(CIRCLE, (3, 4)).y2 == 25
    assert y_key(TRI, (1, 1)).y2 == 1
    assert y_key(QuadForm(1, 0, 3), (0, 1)).y2 == F(1, 3)


def test_zero_vector():
    with pytest.raises(ZeroVector):
        y_key(CIRCLE, (0, 0))
    with pytest.raises(ZeroVector):
        curvature_radius(CIRCLE, (0, 0))


def test_freqkey_rejects_nonpositive():
    with pytest.raises(ValueError):
        FreqKey(F(0))


@given(st.integers(-1000, 1000), st.integers(-1000, 1000))
def test_circle_key_is_norm(x, y):
    if (x, y) != (0, 0):
        assert y_key(CIRCLE, (x, y)).y2 == x * x + y * y


@settings(max_examples=200)
@given(st.fractions(min_value=F(1, 5), max_value=5, max_denominator=50),
       st.fractions(min_value=-1, max_value=1, max_denominator=50),
       st.fractions(min_value=F(1, 5), max_value=5, max_denominator=50),
       st.integers(-1000, 1000), st.integers(-1000, 1000))
def test_y_key_exact_vs_float(a, t, c, x, y):
    b = t * min(a, c)
    if (x, y) == (0, 0):
        return
    f = QuadForm(a, b, c)
    fa, fb, fc = float(a), float(b), float(c)
    Y = 2 * math.sqrt(fa * y * y - fb * x * y + fc * x * x) / math.sqrt(4 * fa * fc - fb * fb)
    assert y_key(f, (x, y)).y == pytest.approx(Y, rel=1e-9)
    assert y_key(f, (x, y)) == y_key(f, (-x, -y))
    assert curvature_radius(f, (x, y)) == curvature_radius(f, (-x, -y))


def test_curvature_circle():
    for n in [(1, 0), (3, 4), (-2, 7)]:
        assert curvature_radius(CIRCLE, n) == pytest.approx(1.0, rel=1e-15)


def test_curvature_triangle():
    assert curvature_radius(TRI, (1, 0)) == pytest.approx(0.75, rel=1e-14)


def fd_curvature(form, n, eps=1e-5):
    """Curvature radius of the boundary at the point whose outer normal is n, by finite differences."""
    a, b, c = (float(v) for v in form.coeffs)

    def point(theta):
        d = np.array([math.cos(theta), math.sin(theta)])
        q = a * d[0] ** 2 + b * d[0] * d[1] + c * d[1] ** 2
        return d / math.sqrt(q)

    def normal(theta):
        p = point(theta)
        g = np.array([2 * a * p[0] + b * p[1], b * p[0] + 2 * c * p[1]])
        return g / np.linalg.norm(g)

    # locate the boundary point with the requested normal by bisection on the angle
    target = np.array(n, dtype=float) / np.hypot(*n)
    ths = np.linspace(0, 2 * math.pi, 20001)
    best = ths[np.argmax([normal(t) @ target for t in ths])]
    lo, hi = best - 1e-3, best + 1e-3
    for _ in range(80):
        mid = (lo + hi) / 2
        cross = normal(mid)[0] * target[1] - normal(mid)[1] * target[0]
        if cross > 0:
            lo = mid
        else:
            hi = mid
    t = (lo + hi) / 2
    p0, p1, p2 = point(t - eps), point(t), point(t + eps)
    d1 = (p2 - p0) / (2 * eps)
    d2 = (p2 - 2 * p1 + p0) / eps ** 2
    return np.linalg.norm(d1) ** 3 / abs(d1[0] * d2[1] - d1[1] * d2[0])


@pytest.mark.parametrize("form,n", [(TRI, (1, 0)), (QuadForm(1, 0, F(1, 4)), (0, 1)),
                                    (QuadForm(1, 0, F(1, 4)), (1, 0)), (QuadForm(2, 1, 3), (2, -1))])
def test_curvature_matches_finite_differences(form, n):
    assert curvature_radius(form, n) == pytest.approx(fd_curvature(form, n), rel=1e-5)


def test_curvature_stretched_ellipse():
    # x^2 + y^2/4 <= 1: semi-axes 1 (x) and 2 (y).  Normal (0,1) meets the pointed
    # end (0,2) with radius 1/2; normal (1,0) meets the flat side (1,0) with radius 4.
    f = QuadForm(1, 0, F(1, 4))
    assert curvature_radius(f, (0, 1)) == pytest.approx(0.5, rel=1e-15)
    assert curvature_radius(f, (1, 0)) == pytest.approx(4.0, rel=1e-15)


# -- coefficients ----------------------------------------------------------------------

def test_coefficient_circle_unit():
    c = freq_coefficient(CIRCLE, FreqKey(F(1)), 4)
    assert c == pytest.approx(2 / math.pi, rel=1e-14)
    assert c == pytest.approx(4 * (1 / (2 * math.pi)) * 1.0, rel=1e-14)


def test_coefficient_triangle():
    c = freq_coefficient(TRI, FreqKey(F(1)), 6)
    expected = 6 * math.sqrt(8 * math.pi) / math.sqrt(16 / 3) * (2 * math.pi) ** -1.5
    assert c == pytest.approx(expected, rel=1e-14)
    # second route through the curvature radius of each of the six vectors
    vecs = [(1, 0), (0, 1), (1, 1), (-1, 0), (0, -1), (-1, -1)]
    direct = sum(math.sqrt(curvature_radius(TRI, v)) / math.hypot(*v) ** 1.5 for v in vecs) / (2 * math.pi)
    assert c == pytest.approx(direct, rel=1e-12)


def test_coefficient_zero_multiplicity():
    assert freq_coefficient(TRI, FreqKey(F(7)), 0) == 0.0


@pytest.mark.parametrize("form", [TRI, CIRCLE, QuadForm(2, 1, 3), QuadForm(1, 0, F(5, 2))])
def test_coefficients_match_vector_sums(form):
    sp = enumerate_spectrum(form, 6)
    groups = {}
    for x in range(-20, 21):
        for y in range(-20, 21):
            if (x, y) == (0, 0):
                continue
            k = y_key(form, (x, y)).y2
            if k in groups or k <= 36:
                groups.setdefault(k, []).append((x, y))
    for e in sp.entries:
        vecs = groups[e.key.y2]
        assert len(vecs) == e.multiplicity
        direct = sum(math.sqrt(curvature_radius(form, v)) / math.hypot(*v) ** 1.5
                     for v in vecs) / (2 * math.pi)
        assert e.coeff_mag == pytest.approx(direct, rel=1e-12)


# -- spectra ------------------------------------------------------------------------------

def test_spectrum_examples():
    # (1, 1) has Y = sqrt(2) < 1.5, so y_max = 1.5 already holds two keys
    assert {e.key.y2: e.multiplicity for e in enumerate_spectrum(CIRCLE, 1.5).entries} == {1: 4, 2: 4}
    assert {e.key.y2: e.multiplicity for e in enumerate_spectrum(CIRCLE, 1.2).entries} == {1: 4}
    assert {e.key.y2: e.multiplicity for e in enumerate_spectrum(TRI, 2.1).entries} == {1: 6, 3: 6, 4: 6}
    got = {e.key.y2: e.multiplicity for e in enumerate_spectrum(QuadForm(1, 0, 3), 1.01).entries}
    assert got == {F(1, 3): 2, 1: 2}


@pytest.mark.parametrize("form,y_max", [(TRI, 7), (CIRCLE, 7.5), (QuadForm(2, 1, 3), 5),
                                        (QuadForm(1, 0, F(7, 3)), 6), (QuadForm(F(3, 2), F(-1, 2), 1), 4)])
def test_spectrum_matches_brute_force(form, y_max):
    sp = enumerate_spectrum(form, y_max)
    got = {e.key.y2: e.multiplicity for e in sp.entries}
    assert got == brute_spectrum(form, y_max, box=20)
    assert sp.total_multiplicity == sum(got.values())
    assert np.all(np.diff(sp.y2) > 0)
    assert all(m % 2 == 0 for m in got.values())


def test_spectrum_cutoff_too_small():
    with pytest.raises(CutoffTooSmall):
        enumerate_spectrum(CIRCLE, 0.5)


def test_truncate_consistent():
    big = enumerate_spectrum(TRI, 10)
    small = enumerate_spectrum(TRI, 4)
    t = big.truncate(4)
    assert np.array_equal(t.qvals, small.qvals) and np.array_equal(t.mult, small.mult)


def test_scaling_covariance():
    f = QuadForm(2, 1, 3)
    lam = F(9, 4)
    s1 = enumerate_spectrum(f, 10)
    s2 = enumerate_spectrum(f.scaled(lam), F(20, 3))  # y scales by lam^(-1/2)
    assert len(s1) == len(s2)
    for a, b in zip(s1.entries, s2.entries):
        assert b.key.y2 == a.key.y2 / lam
        assert b.multiplicity == a.multiplicity
    np.testing.assert_allclose(s2.coeff_mag, s1.coeff_mag * float(lam) ** -0.25, rtol=1e-12)


def test_spectrum_csv(tmp_path):
    sp = enumerate_spectrum(TRI, 2.1)
    path = tmp_path / "s.csv"
    sp.to_csv(path)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["y2_num", "y2_den", "y", "multiplicity", "coeff_mag"]
    assert [r[:2] + [r[3]] for r in rows[1:]] == [["1", "1", "6"], ["3", "1", "6"], ["4", "1", "6"]]
    assert float(rows[2][2]) == math.sqrt(3)


# -- common frequencies ------------------------------------------------------------------

def test_common_triangle_circle():
    got = common_frequencies(enumerate_spectrum(TRI, 2.5), enumerate_spectrum(CIRCLE, 2.5))
    assert [(k.y2, r1, r2) for k, r1, r2 in got] == [(1, 6, 4), (4, 6, 4)]


def test_common_rectangle_circle():
    got = common_frequencies(enumerate_spectrum(QuadForm(1, 0, 3), 1.5), enumerate_spectrum(CIRCLE, 1.5))
    assert [(k.y2, r1, r2) for k, r1, r2 in got] == [(1, 2, 4)]


def test_common_self():
    s = enumerate_spectrum(QuadForm(2, 1, 3), 6)
    got = common_frequencies(s, s)
    assert len(got) == len(s)
    assert all(r1 == r2 for _, r1, r2 in got)


def test_common_matches_brute_force():
    f1, f2 = QuadForm(1, 0, F(3, 2)), QuadForm(F(1, 2), 0, 1)
    s1, s2 = enumerate_spectrum(f1, 6), enumerate_spectrum(f2, 6)
    b1, b2 = brute_spectrum(f1, 6, 20), brute_spectrum(f2, 6, 20)
    expected = sorted((k, b1[k], b2[k]) for k in set(b1) & set(b2))
    assert [(k.y2, r1, r2) for k, r1, r2 in common_frequencies(s1, s2)] == expected


def test_common_cutoff_mismatch():
    with pytest.raises(CutoffMismatch):
        common_frequencies(enumerate_spectrum(TRI, 3), enumerate_spectrum(CIRCLE, 4))
