from fractions import Fraction

import mpmath as mp
import pytest

from hpade.coefficients import Coefficient
from hpade.errors import SeriesError
from hpade.series import (ExpSeries, LogShift, MultiIndex, PolySeries,
                          RationalSeries, ScaledSeries, SeriesSystem,
                          SqrtBranch, poly_combo, series_add, series_mul)

P = 128


def frac(c):
    assert c.exact
    assert c.im_q == 0
    return c.re_q


def test_geometric_coefficients():
    f = RationalSeries([1], [-1, 1])  # 1/(z-1)
    for k in range(0, 30):
        assert frac(f.coeff(k, P)) == -1


def test_rational_requires_unit_at_origin():
    with pytest.raises(SeriesError):
        RationalSeries([1], [0, 1])


def test_exp_coefficients():
    f = ExpSeries()
    fact = 1
    for k in range(0, 15):
        if k:
            fact *= k
        assert frac(f.coeff(k, P)) == Fraction(1, fact)


def test_log_shift_constant_term_is_i_pi():
    f = LogShift(1)
    c0 = f.coeff(0, 256)
    assert not c0.exact and c0.prec == 256
    with mp.workprec(256):
        assert abs(c0.value - mp.mpc(0, 1) * mp.pi) < mp.mpf(2) ** -250
    for k in range(1, 12):
        ck = f.coeff(k, P)
        assert ck.exact
        assert frac(ck) == Fraction(-1, k)


def test_log_shift_needs_nonzero_shift():
    with pytest.raises(SeriesError):
        LogShift(0)


def test_sqrt_branch_matches_binomial_series():
    a = Fraction(2)
    f = SqrtBranch(a)
    # oracle: c_k = binom(1/2, k) (-1/a)^k computed independently
    binom = Fraction(1)
    for k in range(0, 12):
        if k:
            binom *= (Fraction(1, 2) - (k - 1)) / k
        expected = binom * Fraction(-1, 2) ** k
        got = f.coeff(k, P)
        assert got.exact
        assert frac(got) == expected


def test_sqrt_branch_at_origin_rejected():
    with pytest.raises(SeriesError):
        SqrtBranch(0)


def test_series_add_identity_and_cancellation():
    f = ExpSeries()
    zero = PolySeries([0])
    s = series_add(zero, f)
    for k in range(8):
        assert frac(s.coeff(k, P)) == frac(f.coeff(k, P))
    t = series_add(f, ScaledSeries(-1, f))
    for k in range(12):
        assert t.coeff(k, P).is_zero()


def test_series_add_known_value():
    f = series_add(RationalSeries([1], [-1, 1]), ExpSeries())
    assert frac(f.coeff(2, P)) == Fraction(-1) + Fraction(1, 2)


def test_series_mul_exact_cancellation():
    # (z-1) * 1/(z-1) = 1
    prod = series_mul(PolySeries([-1, 1]), RationalSeries([1], [-1, 1]), 10)
    assert frac(prod.coeff(0, P)) == 1
    for k in range(1, 11):
        assert prod.coeff(k, P).is_zero()


def test_series_mul_identity():
    prod = series_mul(PolySeries([1]), ExpSeries(), 5)
    assert frac(prod.coeff(3, P)) == Fraction(1, 6)


def test_series_mul_exp_squared_against_cauchy_oracle():
    # brute-force Cauchy convolution of the 1/k! sequences
    def oracle(n):
        acc = Fraction(0)
        fact = [Fraction(1)]
        for k in range(1, n + 1):
            fact.append(fact[-1] * k)
        for j in range(n + 1):
            acc += Fraction(1, int(fact[j])) * Fraction(1, int(fact[n - j]))
        return acc
    prod = series_mul(ExpSeries(), ExpSeries(), 4)
    assert frac(prod.coeff(4, P)) == oracle(4)
    assert oracle(4) == Fraction(2 ** 4, 24)


def test_negative_index_rejected():
    with pytest.raises(SeriesError):
        ExpSeries().coeff(-1, P)


def test_determinism_bit_identical():
    f = LogShift(1)
    a = f.coeff(0, 192)
    b = f.coeff(0, 192)
    assert a.value == b.value
    assert a.value.imag._mpf_ == b.value.imag._mpf_


def test_precision_monotonicity_sampled():
    shift = Coefficient(re_q=Fraction(3, 2))
    samples = [LogShift(shift), SqrtBranch(3), ExpSeries(),
               RationalSeries([1, 2], [3, -1, 1])]
    for s in samples:
        for n in (0, 3, 11):
            for prec in (96, 160):
                lo = s.coeff(n, prec).to_mpc(prec)
                hi = s.coeff(n, 2 * prec).to_mpc(2 * prec)
                bound = mp.mpf(2) ** (2 - prec) * (1 + abs(hi))
                assert abs(lo - hi) <= bound


def test_rational_recurrence_against_partial_fractions():
    # 1/((z-1)(z-2)) = 1/(z-2) - 1/(z-1): c_n = 1 - 2^-(n+1)
    f = RationalSeries([1], [2, -3, 1])
    for n in range(0, 201):
        expected = Fraction(1) - Fraction(1, 2 ** (n + 1))
        assert frac(f.coeff(n, P)) == expected


def test_exactness_propagation():
    f = series_mul(series_add(ExpSeries(), PolySeries([1, 1])), ExpSeries())
    for n in range(6):
        assert f.coeff(n, P).exact


def test_point_values():
    f = series_add(RationalSeries([1], [-1, 1]), ExpSeries())
    with mp.workprec(P):
        v = f.value(mp.mpf("0.25"), P)
        expected = 1 / (mp.mpf("0.25") - 1) + mp.exp(mp.mpf("0.25"))
        assert abs(v - expected) < mp.mpf(2) ** -100


def test_multi_index_validation():
    with pytest.raises(SeriesError):
        MultiIndex([0, 0])
    with pytest.raises(SeriesError):
        MultiIndex([-1, 2])
    m = MultiIndex([2, 1])
    assert m.total == 3


def test_system_shape_validation():
    with pytest.raises(SeriesError):
        SeriesSystem([ExpSeries()], MultiIndex([1, 1]))


@pytest.fixture
def paper_pair_system():
    f1 = series_add(RationalSeries([1], [-1, 1]), ExpSeries())
    f2 = LogShift(1)
    return SeriesSystem([f1, f2], MultiIndex([1, 1]))


def test_poly_combo_selector(paper_pair_system):
    combo = poly_combo(paper_pair_system, [[1], [0]], "strict")
    f1 = paper_pair_system.components[0]
    for k in range(6):
        assert combo.coeff(k, P).to_mpc(P) == f1.coeff(k, P).to_mpc(P)
    assert not combo.degenerate


def test_poly_combo_second_component_is_log(paper_pair_system):
    combo = poly_combo(paper_pair_system, [[0], [1]], "strict")
    assert frac(combo.coeff(3, P)) == Fraction(-1, 3)


def test_poly_combo_zero_flagged_degenerate(paper_pair_system):
    combo = poly_combo(paper_pair_system, [[0], [0]], "strict")
    assert combo.degenerate
    assert combo.coeff(4, P).is_zero()


def test_poly_combo_degree_bounds(paper_pair_system):
    with pytest.raises(SeriesError):
        poly_combo(paper_pair_system, [[1, 1], [0]], "strict")
    # slack(1) with m=(1,1) allows constants
    combo = poly_combo(paper_pair_system, [[2], [3]], ("slack", 1))
    assert combo is not None
    with pytest.raises(SeriesError):
        poly_combo(paper_pair_system, [[0, 1], [0]], ("slack", 1))


def test_poly_combo_zero_component_forced():
    system = SeriesSystem([ExpSeries(), LogShift(1)], MultiIndex([1, 0]))
    with pytest.raises(SeriesError):
        poly_combo(system, [[1], [1]], "strict")
    combo = poly_combo(system, [[1], [0]], "strict")
    assert not combo.degenerate
