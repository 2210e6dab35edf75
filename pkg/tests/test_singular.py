import csv
import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latcov.errors import BudgetExceeded, PrincipalCharacter, SquareCase, UnhandledCase
from latcov.singular import (base_level, character_discriminant, constant_C, density_report,
                             densities_to_csv, is_qr, kronecker_symbol, l_value, padic_bruteforce,
                             padic_counts, sigma_infinity, sigma_infinity_mc, sigma_p,
                             sigma_p_lemma, square_case_chain, square_constant, squarefree_part)

F = Fraction
PRIMES = (2, 3, 5, 7, 11, 13)
ALPHAS = (1, 2, 3, 5, 6, 9, 12, 45)


def nested_count(p, k, alpha):
    # literal four-fold loop over residues
    m = p ** k
    return sum(1 for x, y, z, w in itertools.product(range(m), repeat=4)
               if (x * x - x * y + y * y - z * z - alpha * w * w) % m == 0)


# -- squarefree parts and characters --------------------------------------------------

def test_squarefree_examples():
    assert [squarefree_part(12), squarefree_part(1), squarefree_part(360)] == [3, 1, 10]


@given(st.integers(1, 10**6))
def test_squarefree_property(n):
    d = squarefree_part(n)
    q = n // d
    assert n % d == 0 and math.isqrt(q) ** 2 == q
    assert all(d % (p * p) for p in range(2, math.isqrt(d) + 1))


def test_kronecker_examples():
    assert all(kronecker_symbol(d, 1) == 1 for d in range(-20, 21))
    assert kronecker_symbol(12, 5) == -1
    assert kronecker_symbol(6, 9) == 0 and kronecker_symbol(12, 2) == 0


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13, 17, 19, 23, 101])
def test_kronecker_vs_residues(p):
    squares = {x * x % p for x in range(1, p)}
    for d in range(-30, 31):
        expected = 0 if d % p == 0 else (1 if d % p in squares else -1)
        assert kronecker_symbol(d, p) == expected
        if d % p:
            assert is_qr(d, p) == (d % p in squares)


def test_kronecker_two_convention():
    # (d/2) = 1 for d = +-1 mod 8, -1 for d = +-3 mod 8
    for d in range(-41, 42, 2):
        assert kronecker_symbol(d, 2) == (1 if d % 8 in (1, 7) else -1)


@settings(max_examples=100)
@given(st.integers(-200, 200), st.integers(1, 200), st.integers(1, 200))
def test_kronecker_multiplicative(d, m, n):
    assert kronecker_symbol(d, m * n) == kronecker_symbol(d, m) * kronecker_symbol(d, n)


def test_character_discriminant():
    assert character_discriminant(3) == -3
    assert character_discriminant(12) == 12
    assert character_discriminant(5) == 5
    with pytest.raises(ValueError):
        character_discriminant(6)


def test_l_value_examples():
    v, err = l_value(1, 3)
    assert v == pytest.approx(math.pi / (3 * math.sqrt(3)), abs=1e-9)
    assert err < 1e-6
    v2, _ = l_value(2, 3)
    assert 0.7 < v2 < 1.0
    assert l_value(2, 3, 10**5)[0] == pytest.approx(v2, abs=1e-8)
    # L(1, chi_12) = log(2 + sqrt 3) / sqrt 3
    assert l_value(1, 12)[0] == pytest.approx(math.log(2 + math.sqrt(3)) / math.sqrt(3), abs=1e-9)


def test_l_value_brute_partial_sum():
    # modulus 7 -> D = -7; L(1) = pi / sqrt 7 (class number 1)
    assert l_value(1, 7)[0] == pytest.approx(math.pi / math.sqrt(7), abs=1e-9)


def test_l_value_principal():
    with pytest.raises(PrincipalCharacter):
        l_value(1, 4)
    with pytest.raises(ValueError):
        l_value(3, 3)


# -- singular integral ---------------------------------------------------------------------

def test_sigma_infinity_examples():
    assert sigma_infinity(1) == pytest.approx(11.3964, abs=1e-4)
    assert sigma_infinity(3) == pytest.approx(6.5797, abs=1e-4)


@pytest.mark.parametrize("alpha", [1, 3, 5])
def test_mc_small_epsilon(alpha):
    est, se = sigma_infinity_mc(alpha, 0.01, 10**6)
    assert abs(est - sigma_infinity(alpha)) <= 3 * se


@pytest.mark.parametrize("alpha", [1, 3, 5])
@pytest.mark.parametrize("eps", [0.05, 0.01])
def test_mc_bias_corrected(alpha, eps):
    est, se = sigma_infinity_mc(alpha, eps, 10**6, correct_bias=True)
    assert abs(est - sigma_infinity(alpha)) <= 3 * se


def test_mc_finite_shell_bias():
    # the uncorrected quotient targets sigma_inf (1 - eps/4); at eps = 0.05 and
    # 10^7 samples that shortfall is about ten standard errors
    eps = 0.05
    est, se = sigma_infinity_mc(1, eps, 10**7)
    assert abs(est - sigma_infinity(1) * (1 - eps / 4)) <= 3 * se
    assert sigma_infinity(1) - est > 6 * se


def test_mc_standard_error_calibrated():
    z = []
    for seed in range(20):
        est, se = sigma_infinity_mc(1, 0.02, 10**6, seed=seed, correct_bias=True)
        z.append((est - sigma_infinity(1)) / se)
    assert abs(np.mean(z)) < 3 / math.sqrt(20)
    assert 0.6 < np.std(z) < 1.5


def test_mc_deterministic_and_guarded():
    assert sigma_infinity_mc(2, 0.02, 10**6, seed=5) == sigma_infinity_mc(2, 0.02, 10**6, seed=5)
    with pytest.raises(ValueError):
        sigma_infinity_mc(1, 0.01, 10**5)
    with pytest.raises(ValueError):
        sigma_infinity_mc(1, 0.2, 10**6)


# -- local densities ---------------------------------------------------------------------------

def test_sigma_p_examples():
    assert sigma_p_lemma(5, 1) == (F(13, 15), "a-5")
    assert sigma_p(3, 3) == 2
    assert sigma_p(2, 3) == F(3, 2)


def test_sigma_p_positive():
    for p in PRIMES + (17, 19):
        for alpha in range(1, 200):
            assert sigma_p(p, alpha) > 0


def test_sigma_p_rejects():
    with pytest.raises(ValueError):
        sigma_p(4, 1)
    with pytest.raises(ValueError):
        sigma_p(5, 0)


def test_padic_examples():
    assert padic_counts(5, 1, 1)[0] == 105
    for p in (2, 3, 7):
        assert padic_bruteforce(p, 0) == 1


@pytest.mark.parametrize("p,k,alpha", [(2, 1, 1), (2, 2, 3), (2, 3, 6), (3, 1, 1), (3, 2, 3),
                                       (3, 2, 9), (5, 1, 2), (5, 2, 5), (7, 1, 3)])
def test_padic_histogram_vs_nested(p, k, alpha):
    assert padic_counts(p, k, alpha)[0] == nested_count(p, k, alpha)


def test_padic_good_count():
    p, k, alpha = 3, 2, 3
    m = p ** k
    good = sum(1 for x, y, z, w in itertools.product(range(m), repeat=4)
               if (x * x - x * y + y * y - z * z - alpha * w * w) % m == 0
               and not (x % p == 0 and y % p == 0 and z % p == 0))
    assert padic_counts(p, k, alpha)[1] == good


def test_padic_r_alpha_prime():
    assert padic_bruteforce(3, 2, 1, 1) == F(nested_count(3, 2, 3), 3 ** 6)
    assert padic_bruteforce(3, 2, 1, 1) == padic_bruteforce(3, 2, 0, 3)


def test_padic_budget():
    with pytest.raises(BudgetExceeded):
        padic_counts(13, 4, 1)
    with pytest.raises(ValueError):
        padic_counts(3, -1, 1)


@pytest.mark.parametrize("p", PRIMES)
def test_density_grid(p):
    for alpha in ALPHAS:
        rep = density_report(p, alpha)
        assert rep.closed_form > 0
        assert rep.checks and rep.recursion_ok, (p, alpha)
        assert rep.final_gap <= rep.tolerance(), (p, alpha, rep.final_gap)


def test_density_gaps_shrink():
    rep = density_report(5, 1, 5)
    gaps = [abs(v - rep.closed_form) for _, v in rep.empirical]
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))
    assert gaps[-1] < gaps[0] / 5


def test_base_good_tables():
    # lift-count densities at the base level for the residue classes of alpha
    assert base_level(2) == base_level(3) == 3 and base_level(5) == 1
    assert [density_report(2, a, 3).base_good for a in (3, 7, 1)] == [F(9, 8), F(7, 8), F(3, 4)]
    assert [density_report(3, a, 3).base_good for a in (1, 3, 6)] == [F(8, 9), F(16, 9), F(4, 3)]


def test_nine_divides_alpha():
    # alpha = 9: base density 4/3 for p = 3, and the closed form matches the count
    rep = density_report(3, 9, 7)
    assert rep.base_good == F(4, 3)
    assert rep.final_gap <= rep.tolerance()


def test_density_csv(tmp_path):
    densities_to_csv([density_report(5, 1, 2)], tmp_path / "d.csv")
    rows = list(csv.reader(open(tmp_path / "d.csv")))
    assert rows[0] == ["p", "k", "nk", "den", "closed_num", "closed_den"]
    assert rows[1] == ["5", "1", "105", "125", "13", "15"]


# -- the constant ------------------------------------------------------------------------------

def test_constant_C_one_one():
    c = constant_C(1, 1)
    assert c.chi_modulus == 12 and c.b_prime == 1
    assert c.sigma2 == 1 and c.odd_sigma_factors == []
    expected = 2 * math.pi ** 2 / math.sqrt(3) * c.L1 / c.L2
    assert c.C == pytest.approx(expected, rel=1e-15)
    assert c.C_simplified == pytest.approx(c.C, rel=1e-15)
    assert "C =" in c.to_text()


def test_constant_C_square_case():
    with pytest.raises(SquareCase) as exc:
        constant_C(3, 1)
    assert exc.value.square_constant == pytest.approx(3.0, rel=1e-15)


def test_constant_C_reduces_b():
    assert constant_C(1, 4).b_prime == 1
    assert constant_C(1, 4).C == pytest.approx(constant_C(1, 1).C, rel=1e-15)


def test_constant_C_odd_factors():
    c = constant_C(9, 1)  # 3 alpha = 27: p = 3 with r = 3
    assert [p for p, _ in c.odd_sigma_factors] == [3]
    assert c.C_simplified is None


def test_constant_csv(tmp_path):
    constant_C(2, 1).to_csv(tmp_path / "c.csv")
    rows = dict(list(csv.reader(open(tmp_path / "c.csv")))[1:])
    assert {"prefactor", "L1", "L2", "sigma_2", "C"} <= set(rows)


def test_square_chain():
    for a, b in ((3, 1), (1, 3), (12, 1), (3, 4)):
        assert abs(square_case_chain(a, b) - square_constant(a, b)) <= 1e-12
    with pytest.raises(UnhandledCase):
        square_case_chain(1, 1)
