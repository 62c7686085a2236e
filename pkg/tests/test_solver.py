from fractions import Fraction

import mpmath as mp
import pytest

from hpade.coefficients import Coefficient
from hpade.errors import SolveError
from hpade.series import (ExpSeries, LogShift, MultiIndex, RationalSeries,
                          SeriesSystem, series_add)
from hpade.solver import (HPApproximant, build_constraint_matrix,
                          hp_approximant, normalize, numerators, pade,
                          reduce_common_zeros, solve_denominator,
                          window_residual, DenominatorSolution)

P = 256


def geom():
    return RationalSeries([1], [-1, 1])  # 1/(z-1)


def paper_system():
    f1 = series_add(geom(), ExpSeries())
    return SeriesSystem([f1, LogShift(1)], MultiIndex([1, 1]))


def as_f(c):
    return c.re_q if c.exact else None


def test_matrix_geometric_row():
    system = SeriesSystem([geom()], MultiIndex([1]))
    mtx = build_constraint_matrix(system, 3, P)
    assert mtx.rows == 1 and mtx.cols == 2
    assert [as_f(c) for c in mtx.entries[0]] == [-1, -1]


def test_matrix_exp_row():
    system = SeriesSystem([ExpSeries()], MultiIndex([1]))
    mtx = build_constraint_matrix(system, 2, P)
    assert [as_f(c) for c in mtx.entries[0]] == [Fraction(1, 2), 1]


def test_matrix_paper_example_hand_computed():
    mtx = build_constraint_matrix(paper_system(), 2, P)
    assert mtx.rows == 2 and mtx.cols == 3
    # phi_{2,1} = -1 + 1/2, phi_{1,1} = -1 + 1 = 0, phi_{0,1} = 0
    assert [as_f(c) for c in mtx.entries[0]] == [Fraction(-1, 2), 0, 0]
    # phi_{2,2} = -1/2, phi_{1,2} = -1, phi_{0,2} = i*pi (inexact)
    assert as_f(mtx.entries[1][0]) == Fraction(-1, 2)
    assert as_f(mtx.entries[1][1]) == -1
    assert not mtx.entries[1][2].exact


def test_matrix_below_row_start():
    with pytest.raises(SolveError):
        build_constraint_matrix(paper_system(), 0, P)


def test_solve_geometric_gives_monic_z_minus_1():
    system = SeriesSystem([geom()], MultiIndex([1]))
    for n in (1, 4, 9):
        mtx = build_constraint_matrix(system, n, P)
        sol = solve_denominator(mtx, precision_bits=P)
        assert sol.nullspace_dim == 1
        assert sol.exact
        assert as_f(sol.q[1]) == 1 and as_f(sol.q[0]) == -1
        assert sol.residual == 0


def test_duplicated_component_rank_deficiency():
    f = geom()
    system = SeriesSystem([f, RationalSeries([1], [-1, 1])], MultiIndex([1, 1]))
    mtx = build_constraint_matrix(system, 5, P)
    sol = solve_denominator(mtx, precision_bits=P)
    assert sol.nullspace_dim >= 2


def test_all_zero_matrix_degenerate():
    system = SeriesSystem([geom()], MultiIndex([1]))
    mtx = build_constraint_matrix(system, 3, P)
    for row in mtx.entries:
        for i in range(len(row)):
            row[i] = Coefficient.zero()
    sol = solve_denominator(mtx, precision_bits=P)
    assert sol.degenerate
    assert sol.nullspace_dim == mtx.cols
    assert as_f(sol.q[0]) == 1


def test_numerators_examples():
    system = SeriesSystem([geom()], MultiIndex([1]))
    q = [Coefficient(re_q=-1), Coefficient(re_q=1)]  # z - 1
    ps = numerators(system, q, 5, P)
    assert as_f(ps[0][0]) == 1
    assert all(c.is_zero() for c in ps[0][1:])

    system2 = SeriesSystem([ExpSeries()], MultiIndex([1]))
    ps2 = numerators(system2, [Coefficient.one()], 3, P)
    assert [as_f(c) for c in ps2[0]] == [1, 1, Fraction(1, 2)]
    assert len(ps2[0]) == 3  # degree <= n - m = 2


def test_window_residual_detects_bad_q():
    system = SeriesSystem([geom()], MultiIndex([1]))
    good = window_residual(system, [Coefficient(re_q=-1), Coefficient.one()],
                           6, P)
    bad = window_residual(system, [Coefficient(re_q=-2), Coefficient.one()],
                          6, P)
    assert good == 0
    assert bad > mp.mpf("0.5")


def test_pade_exact_rational_recovery():
    f = RationalSeries([1], [2, -3, 1])  # 1/((z-1)(z-2))
    a = pade(f, 6, 2, P)
    q = [as_f(c) for c in a.denominator.q]
    assert q == [2, -3, 1]
    assert a.residual == 0
    r = pade(geom(), 4, 1, P)
    assert [as_f(c) for c in r.denominator.q] == [-1, 1]
    assert as_f(r.numerators[0][0]) == 1
    with pytest.raises(SolveError):
        pade(geom(), 1, 2, P)


def test_pade_independent_toeplitz_oracle():
    """Classical m x m Toeplitz system with q_m = 1, Fraction elimination."""
    cases = [
        (RationalSeries([1], [2, -3, 1]), 2, [8, 14, 20, 30]),
        (RationalSeries([1, 1], [6, -5, 1]), 2, [8, 16, 24, 30]),
        (series_add(geom(), RationalSeries([1], [-2, 1])), 1, [6, 12, 22, 30]),
        (ExpSeries(), 3, [6, 14, 26]),
    ]
    for f, m, ns in cases:
        for n in ns:
            phi = [f.coeff(j, P).re_q for j in range(n + 1)]

            def c(j):
                return phi[j] if j >= 0 else Fraction(0)
            # rows j = n-m+1..n: sum_i q_i c(j-i) = 0, q_m = 1
            rows = []
            rhs = []
            for j in range(n - m + 1, n + 1):
                rows.append([c(j - i) for i in range(m)])
                rhs.append(-c(j - m))
            # plain Fraction Gaussian elimination (partial pivot by first nonzero)
            M = [row[:] + [rhs[k]] for k, row in enumerate(rows)]
            cols = m
            piv_r = 0
            piv_cols = []
            for col in range(cols):
                sel = None
                for r in range(piv_r, len(M)):
                    if M[r][col] != 0:
                        sel = r
                        break
                if sel is None:
                    continue
                M[piv_r], M[sel] = M[sel], M[piv_r]
                for r in range(len(M)):
                    if r != piv_r and M[r][col] != 0:
                        factor = M[r][col] / M[piv_r][col]
                        M[r] = [a - factor * b for a, b in zip(M[r], M[piv_r])]
                piv_cols.append(col)
                piv_r += 1
            if len(piv_cols) < m:
                continue  # oracle degenerate; skip this n
            qvec = [Fraction(0)] * m
            for r, col in enumerate(piv_cols):
                qvec[col] = M[r][m] / M[r][col]
            oracle = qvec + [Fraction(1)]

            a = pade(f, n, m, P)
            got = [cc.re_q for cc in a.denominator.q]
            # both monic by construction; compare directly
            assert got == oracle, (n, m)


def test_exact_and_float_paths_agree():
    systems = [
        SeriesSystem([RationalSeries([1], [2, -3, 1])], MultiIndex([2])),
        SeriesSystem([series_add(geom(), ExpSeries()),
                      RationalSeries([1], [-2, 1])], MultiIndex([1, 1])),
        SeriesSystem([ExpSeries()], MultiIndex([2])),
        SeriesSystem([RationalSeries([1, 3], [6, -5, 1]),
                      ExpSeries()], MultiIndex([2, 2])),
    ]
    tol = mp.mpf(2) ** (-(P // 2))
    for system in systems:
        for n in (max(system.m.entries) + 2, 17, 40):
            mtx = build_constraint_matrix(system, n, P)
            if not all(c.exact for row in mtx.entries for c in row):
                continue
            exact = solve_denominator(mtx, method="exact", precision_bits=P)
            flt = solve_denominator(mtx, method="float", precision_bits=P)
            if exact.nullspace_dim != 1:
                continue
            qe = [c.to_mpc(P) for c in exact.q]
            qf = [c.to_mpc(P) for c in flt.q]
            assert max(abs(a - b) for a, b in zip(qe, qf)) <= tol, (system.m.entries, n)


def test_normalization_round_trip():
    system = paper_system()
    a = hp_approximant(system, 12, P)
    q = a.denominator.q
    unit, _ = normalize(q, "unit_coeff_sum", P)
    back, _ = normalize(unit, "monic", P)
    tol = mp.mpf(2) ** (8 - P)
    for x, y in zip(back, q):
        assert abs(x.to_mpc(P) - y.to_mpc(P)) <= tol
    s = mp.fsum([abs(c.to_mpc(P)) for c in unit])
    assert abs(s - 1) <= tol


def test_residual_invariant_on_produced_approximants():
    system = paper_system()
    for n in (5, 12, 25):
        a = hp_approximant(system, n, P)
        mtx = build_constraint_matrix(system, n, P)
        top = max(c.abs_mpf(P) for row in mtx.entries for c in row)
        assert a.residual <= mp.mpf(2) ** (-(P // 2)) * top
        assert len(a.denominator.q) <= system.m.total + 1
        for k, p in enumerate(a.numerators):
            assert len(p) - 1 <= n - system.m[k]


def test_reduce_removes_shared_root():
    # construct q = (z-1)(z-2), numerators sharing the root 2
    q = [Coefficient(re_q=2), Coefficient(re_q=-3), Coefficient(re_q=1)]
    p_shared = [Coefficient(re_q=-2), Coefficient(re_q=1)]  # z - 2
    den = DenominatorSolution(q, 1, mp.mpf(0), "monic", True, 2)
    approx = HPApproximant(6, MultiIndex([2]), den, [p_shared], mp.mpf(0), P)
    red = reduce_common_zeros(approx)
    assert red.reduced
    qv = [c.to_mpc(P) for c in red.denominator.q]
    assert len(qv) == 2
    assert abs(qv[0] + 1) < mp.mpf(2) ** -100  # z - 1 monic


def test_reduce_no_common_zero_is_identity():
    q = [Coefficient(re_q=2), Coefficient(re_q=-3), Coefficient(re_q=1)]
    p = [Coefficient(re_q=5), Coefficient(re_q=1)]  # z + 5
    den = DenominatorSolution(q, 1, mp.mpf(0), "monic", True, 2)
    approx = HPApproximant(6, MultiIndex([2]), den, [p], mp.mpf(0), P)
    red = reduce_common_zeros(approx)
    qv = [c.to_mpc(P) for c in red.denominator.q]
    assert len(qv) == 3
    assert abs(qv[1] + 3) < mp.mpf(2) ** -100


def test_reduce_origin_common_zero_recorded():
    # q = z^2 + z = z(z+1), p = z: common origin zero of order 1
    q = [Coefficient.zero(), Coefficient.one(), Coefficient.one()]
    p = [Coefficient.zero(), Coefficient.one()]
    den = DenominatorSolution(q, 1, mp.mpf(0), "monic", True, 2)
    approx = HPApproximant(6, MultiIndex([2]), den, [p], mp.mpf(0), P)
    red = reduce_common_zeros(approx)
    assert red.origin_common_order == 1


def test_unit_coeff_sum_exact_real_path():
    system = SeriesSystem([RationalSeries([1], [2, -3, 1])], MultiIndex([2]))
    mtx = build_constraint_matrix(system, 8, P)
    sol = solve_denominator(mtx, normalization="unit_coeff_sum",
                            precision_bits=P)
    assert sol.exact
    total = sum(abs(c.re_q) for c in sol.q)
    assert total == 1


def test_m_zero_component_contributes_no_rows():
    system = SeriesSystem([RationalSeries([1], [2, -3, 1]), ExpSeries()],
                          MultiIndex([2, 0]))
    mtx = build_constraint_matrix(system, 6, P)
    assert mtx.rows == 2 and mtx.cols == 3
    a = hp_approximant(system, 6, P)
    assert [as_f(c) for c in a.denominator.q] == [2, -3, 1]
    # the m_k = 0 numerator may use degree up to n
    assert len(a.numerators[1]) - 1 <= 6
