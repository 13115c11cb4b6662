from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from fractran.numerics import pi_digit_reference, sqrt2_digit_reference
from fractran.oracles import (
    AccuracyError,
    Kind,
    ParityError,
    ResourceLimitError,
    accuracy_ok,
    bound_check,
    bracketing_check,
    catalan_truncation,
    epsilon_chain,
    heron_contraction_check,
    mahler_check,
    minimal_E,
    mod4_recurrence_check,
    newton_digit,
    newton_digit_materialized,
    newton_iterate,
    newton_iterate_exact,
    non_integrality_check,
    sqrt2_newton_enclosure,
    truncation,
    truncation_digit,
    truncation_enclosure,
    wallis_truncation,
)

catalan_E = st.integers(min_value=1, max_value=500).map(lambda j: 4 * j + 2)
wallis_E = st.integers(min_value=2, max_value=1000).map(lambda j: 2 * j)


def test_catalan_examples():
    t = catalan_truncation(6)
    assert (t.N, t.D, t.value) == (24, 15, Fraction(8, 5))
    t = catalan_truncation(10)
    assert (t.N, t.D) == (1440, 945)
    assert t.value == Fraction(32, 21) == t.factorwise_value()


def test_wallis_examples():
    t = wallis_truncation(4)
    assert (t.N, t.D) == (32, 9)
    t = wallis_truncation(8)
    assert (t.N, t.D) == (36864, 11025)
    assert t.value == Fraction(4096, 1225) == t.factorwise_value()


@pytest.mark.parametrize("maker, E", [(catalan_truncation, 8), (catalan_truncation, 2), (wallis_truncation, 5), (wallis_truncation, 2)])
def test_parity_errors(maker, E):
    with pytest.raises(ParityError):
        maker(E)


@settings(max_examples=40, deadline=None)
@given(catalan_E)
def test_catalan_structural_form_matches_factors(E):
    t = catalan_truncation(E)
    assert t.value == t.factorwise_value()


@settings(max_examples=40, deadline=None)
@given(wallis_E)
def test_wallis_structural_form_matches_factors(E):
    t = wallis_truncation(E)
    assert t.value == t.factorwise_value()


def test_wallis_matches_central_binomial_form():
    from math import comb

    for m in range(2, 60):
        t = wallis_truncation(2 * m)
        assert t.value == Fraction(16**m, m * comb(2 * m, m) ** 2)


def test_truncation_digit_examples():
    assert truncation_digit(wallis_truncation(8), 0, checked=False) == 3
    assert truncation_digit(catalan_truncation(10), 0) == 1
    assert truncation_digit(catalan_truncation(30), 1) == 4 == sqrt2_digit_reference(1)


def test_truncation_digit_checked_mode():
    with pytest.raises(AccuracyError):
        truncation_digit(catalan_truncation(26), 1)
    with pytest.raises(AccuracyError):
        truncation_digit(wallis_truncation(8), 1)
    assert truncation_digit(catalan_truncation(26), 1, checked=False) == 4


@pytest.mark.parametrize(
    "kind, n, E",
    [("catalan", 0, 6), ("catalan", 1, 30), ("catalan", 2, 286), ("wallis", 0, 4), ("wallis", 1, 32), ("wallis", 3, 3142)],
)
def test_minimal_E(kind, n, E):
    assert minimal_E(kind, n) == E


def test_minimal_E_is_minimal():
    for n in range(8):
        E = minimal_E(Kind.CATALAN_SQRT2, n)
        assert accuracy_ok("catalan", E, n) and (E - 4 < 6 or not accuracy_ok("catalan", E - 4, n))
        E = minimal_E(Kind.WALLIS_PI, n)
        assert accuracy_ok("wallis", E, n) and (E - 2 < 4 or not accuracy_ok("wallis", E - 2, n))


@pytest.mark.parametrize("E", [6, 10])
def test_catalan_bracketing_examples(E):
    result = bracketing_check(catalan_truncation(E))
    assert result.passed
    if E == 10:
        assert result.witnesses["N^2-2D^2"] == str(2073600 - 1786050)


def test_wallis_bracketing_example():
    assert bracketing_check(wallis_truncation(4)).passed


def test_bracketing_small_sweep():
    for E in range(6, 400, 4):
        assert bracketing_check(catalan_truncation(E))
        assert bound_check(catalan_truncation(E), 0)
    for E in range(4, 400, 2):
        assert bracketing_check(wallis_truncation(E))


def test_non_integrality_examples():
    assert non_integrality_check(catalan_truncation(10), 0).passed
    assert non_integrality_check(catalan_truncation(10), 3).passed
    r = non_integrality_check(wallis_truncation(8), 2)
    assert r.passed and r.witnesses["reduced_denominator"] == "1225"


def test_enclosure_contains_exact_value():
    for kind in Kind:
        for E in (1002, 2002, 4002, 10002):
            t = truncation(kind, E)
            lo, hi = truncation_enclosure(t, 40)
            assert lo < t.value < hi
            assert hi - lo < Fraction(1, E * E)


def test_exact_and_certified_digits_agree():
    import fractran.oracles as o

    for kind in Kind:
        for n in range(0, 5):
            t = truncation(kind, minimal_E(kind, n))
            exact = truncation_digit(t, n)
            old = o.MAX_EXACT_E
            o.MAX_EXACT_E = 0
            try:
                certified = truncation_digit(truncation(kind, t.E), n)
            finally:
                o.MAX_EXACT_E = old
            assert exact == certified


def test_exact_products_have_a_size_guard():
    with pytest.raises(ResourceLimitError):
        catalan_truncation(10**12 + 2).N


def test_truncation_overshoots_by_about_a_constant_over_E():
    # 10^n * (x_E - x) stays near a constant fraction of a unit at minimal E,
    # which is why the last digit can come out one too large
    for kind, target in ((Kind.CATALAN_SQRT2, 0.375), (Kind.WALLIS_PI, 0.5)):
        n = 3
        t = truncation(kind, minimal_E(kind, n))
        const = mpmath.sqrt(2) if kind is Kind.CATALAN_SQRT2 else mpmath.pi
        gap = (mpmath.mpf(t.N) / t.D - const) * 10**n
        assert abs(float(gap) - target) < 0.05


def test_newton_iterates():
    assert [newton_iterate(k).value for k in (1, 2, 3, 4)] == [1, Fraction(3, 2), Fraction(17, 12), Fraction(577, 408)]


def test_newton_iterates_reduced_and_in_range():
    for k in range(1, 15):
        x = newton_iterate(k)
        assert Fraction(x.p, x.q).denominator == x.q
        assert 1 <= x.value <= 2


@pytest.mark.parametrize("k", [1, 2, 5, 12])
def test_heron_contraction(k):
    assert heron_contraction_check(k).passed


def test_heron_contraction_guard():
    with pytest.raises(ResourceLimitError):
        heron_contraction_check(40, max_bits=1 << 16)
    with pytest.raises(ValueError):
        newton_iterate_exact(0)


@pytest.mark.parametrize("n, digit", [(0, 1), (1, 4), (2, 1)])
def test_newton_digit_examples(n, digit):
    assert newton_digit(n) == digit == newton_digit_materialized(n)


def test_newton_digit_bracketing_matches_materialized():
    for n in range(0, 12):
        assert newton_digit(n) == newton_digit_materialized(n) == sqrt2_digit_reference(n)


def test_newton_digits_reference():
    assert [newton_digit(n) for n in range(201)] == [sqrt2_digit_reference(n) for n in range(201)]


def test_sqrt2_newton_enclosure_is_independent_and_tight():
    lo, hi = sqrt2_newton_enclosure(80)
    assert hi - lo < Fraction(1, 10**80)
    assert lo * lo < 2 < hi * hi


def test_epsilon_chain_witnesses():
    chain = epsilon_chain(6)
    assert [c.passed for c in chain] == [False, False, False, True, True, True]
    assert chain[1].witnesses["eps"].startswith("0.0857864376")
    assert chain[2].witnesses["eps"].startswith("0.0024531042")


def test_mod4_recurrence():
    assert mod4_recurrence_check(10**4).passed


def test_mahler_small():
    for E in range(4, 201, 2):
        assert mahler_check(wallis_truncation(E)).passed
    with pytest.raises(ValueError):
        mahler_check(catalan_truncation(6))


def test_check_result_records():
    r = non_integrality_check(catalan_truncation(10), 3)
    assert r.line() == "PASS non-integrality kind=CATALAN_SQRT2 E=10 n=3"
    assert '"pass": true' in r.json()


def test_pi_reference_used_by_wallis_digits():
    t = wallis_truncation(minimal_E("wallis", 2))
    assert truncation_digit(t, 2) == pi_digit_reference(2)
