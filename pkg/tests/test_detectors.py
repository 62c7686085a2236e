import dataclasses

import mpmath as mp
import pytest

from hpade.detectors import (_distinct_zeros, cauchy_hadamard_radius,
                             classify_zeros, combo_lattice,
                             combo_singularity_count, detect_system_poles,
                             fabry_ratio, suetin_scalar, verify_attraction)
from hpade.errors import HypothesisUnmet
from hpade.incomplete import (estimate_rm_star, hp_projection,
                              records_from_pairs)
from hpade.trajectory import collect

from conftest import sweep


def scalar_records(system, run):
    pairs = [hp_projection(system, 0, a) for a in run]
    return records_from_pairs(pairs)


def test_detect_rational_system_montessus():
    system, run = sweep(["1/(z-1)", "1/(z-2)"], [1, 1], 2, 40, 256)
    rep = detect_system_poles(run)
    zs = sorted(float(mp.re(c.zeta)) for c in rep.candidates)
    assert len(zs) == 2
    assert abs(zs[0] - 1) < 1e-12 and abs(zs[1] - 2) < 1e-12
    assert all(c.tau_hat == 1 for c in rep.candidates)
    assert rep.theta_hat == 0
    assert rep.montessus
    assert sum(c.tau_hat for c in rep.candidates) <= system.m.total


def test_detect_paper_example_not_montessus(paper_system_run_long):
    system, run = paper_system_run_long
    rep = detect_system_poles(run)
    assert len(rep.candidates) == 1
    assert abs(rep.candidates[0].zeta - 1) < 1e-6
    assert rep.candidates[0].tau_hat >= 1
    assert sum(c.tau_hat for c in rep.candidates) < system.m.total
    assert not rep.montessus
    assert rep.slow_attractors  # the logarithmic attractor is reported


def test_detect_scalar_gonchar(gonchar_run):
    system, run = gonchar_run
    rep = detect_system_poles(run)
    assert len(rep.candidates) == 1
    assert abs(rep.candidates[0].zeta - 1) < 1e-6
    assert 0.4 <= float(rep.theta_hat) <= 0.6


def test_detect_requires_unique_rows(paper_system_run):
    system, run = paper_system_run
    degraded = []
    for i, a in enumerate(run):
        if i % 3 == 0:
            den = dataclasses.replace(a.denominator, nullspace_dim=2)
            degraded.append(dataclasses.replace(a, denominator=den))
        else:
            degraded.append(a)
    with pytest.raises(HypothesisUnmet):
        detect_system_poles(degraded)
    with pytest.raises(HypothesisUnmet):
        detect_system_poles(run[:8])


# Theorem-level attraction checks on constructed systems with known
# system poles; each entry is (series, m, [(pole, order), ...]).
ATTRACTION_CASES = [
    (["1/(z-1)", "1/(z-2)"], [1, 1], [(1, 1), (2, 1)]),
    (["1/(z-1) + exp(z)", "log(z-1)"], [1, 1], [(1, 1)]),
    (["1/(z-1)^2", "1/(z-2)"], [2, 1], [(1, 2), (2, 1)]),
    (["1/(z-1) + 1/(z-3)", "1/(z-2)"], [1, 1], [(1, 1), (2, 1)]),
    (["1/((z-1)*(z-2))"], [2], [(1, 1), (2, 1)]),
    (["1/(z-1)^2 + 1/(z-2)"], [2], [(1, 2)]),
    (["exp(z) + 1/(z-1)", "1/(z+1)"], [1, 1], [(1, 1), (-1, 1)]),
    (["1/(z-1) + 1/(z-2)", "1/(z-2)"], [1, 1], [(1, 1), (2, 1)]),
    (["1/(z^2+1)"], [2], [(mp.mpc(0, 1), 1), (mp.mpc(0, -1), 1)]),
    (["1/((z-1)^2*(z+2))", "exp(z)"], [2, 0], [(1, 2)]),
]


@pytest.mark.parametrize("exprs,m,poles", ATTRACTION_CASES)
def test_verify_attraction_known_system_poles(exprs, m, poles):
    system, run = sweep(exprs, m, max(max(m), 6), 48, 256)
    for zeta, tau in poles:
        passed, lm = verify_attraction((mp.mpc(zeta), tau), run)
        assert passed, (exprs, zeta, tau, lm)
        assert lm.mu_hat >= tau
        assert lm.mu_hat <= lm.lambda_hat


def test_verify_attraction_negative_control():
    # 3 is a pole of f1 but NOT a system pole for m=(1,1); no zero goes there
    system, run = sweep(["1/(z-1) + 1/(z-3)", "1/(z-2)"], [1, 1], 6, 48, 256)
    passed, lm = verify_attraction((mp.mpc(3), 1), run)
    assert not passed
    assert lm.mu_hat == 0


def test_classify_sqrt_run_pole_and_boundary(sqrt_run):
    system, run = sqrt_run
    prec = run[0].precision_bits
    recs = scalar_records(system, run)
    rm = estimate_rm_star(recs)
    zeros = _distinct_zeros(run[-1].q_mpc(prec), prec)
    rootsets, _ = collect(run)
    cls = classify_zeros(zeros, recs, rm, rootsets, prec)
    by_pos = {}
    for v in cls.verdicts:
        key = "near1" if abs(v.zeta - 1) < 0.5 else "near2"
        by_pos[key] = v
    assert by_pos["near1"].verdict == "pole_of_order"
    assert by_pos["near1"].tau == 1
    assert abs(by_pos["near1"].zeta - 1) <= 1e-4
    assert by_pos["near2"].verdict == "boundary_singular"
    assert abs(abs(by_pos["near2"].zeta) - 2) <= 0.05 * 2
    # verdicts stay within the allowed set of their position class
    for v in cls.verdicts:
        if v.position == "inside":
            assert v.verdict in ("attracts_qstar", "pole_of_order", "undecided")
        elif v.position == "boundary":
            assert v.verdict in ("attracts_qstar", "boundary_singular",
                                 "undecided")
        else:
            assert v.verdict in ("attracts_qstar", "undecided")


def test_classify_exact_termination_skips(rational_exact_run):
    system, run = rational_exact_run
    prec = run[0].precision_bits
    recs = scalar_records(system, run)
    rm = estimate_rm_star(recs)
    zeros = _distinct_zeros(run[-1].q_mpc(prec), prec)
    rootsets, _ = collect(run)
    cls = classify_zeros(zeros, recs, rm, rootsets, prec)
    assert cls.exactness
    assert not cls.verdicts


def test_no_boundary_singular_on_rational_negative_control(gonchar_run):
    system, run = gonchar_run
    prec = run[0].precision_bits
    recs = scalar_records(system, run)
    rm = estimate_rm_star(recs)
    zeros = _distinct_zeros(run[-1].q_mpc(prec), prec)
    rootsets, _ = collect(run)
    cls = classify_zeros(zeros, recs, rm, rootsets, prec)
    assert all(v.verdict != "boundary_singular" for v in cls.verdicts)


def test_suetin_rational_degenerate_no_boundary(rational_exact_run):
    system, run = rational_exact_run
    prec = run[0].precision_bits
    recs = scalar_records(system, run)
    rm = estimate_rm_star(recs)
    zeros = _distinct_zeros(run[-1].q_mpc(prec), prec)
    rootsets, _ = collect(run)
    rep = suetin_scalar(zeros, rm, rootsets, prec)
    assert rep.N == 2
    assert not rep.boundary_points
    assert abs(rep.r_m_minus_1 - 2) < 1e-12
    assert all(rep.moduli[i] <= rep.moduli[i + 1]
               for i in range(len(rep.moduli) - 1))


def test_suetin_sqrt_run(sqrt_run):
    system, run = sqrt_run
    prec = run[0].precision_bits
    recs = scalar_records(system, run)
    rm = estimate_rm_star(recs)
    zeros = _distinct_zeros(run[-1].q_mpc(prec), prec)
    rootsets, _ = collect(run)
    rep = suetin_scalar(zeros, rm, rootsets, prec)
    assert rep.N == 1
    assert abs(rep.r_m_minus_1 - 2) <= 0.05 * 2
    assert len(rep.boundary_points) == 1


def test_combo_counts_on_paper_example(paper_system_run):
    system, run = paper_system_run
    for polys in ([[1], [0]], [[0], [1]]):
        rep = combo_singularity_count(system, 1, polys, run)
        assert rep.passed
        assert rep.count >= 1
        assert any(abs(v.zeta - 1) <= 1e-3 for v in rep.counted)
        assert rep.hypothesis_ok


def test_combo_rational_matches_partial_fractions():
    # F = f1 + f2 = 1/(z-1) + 1/(z-2): in the closed unit disk the only
    # pole is z=1 (partial-fraction oracle), so exactly one zero counts
    system, run = sweep(["1/(z-1)", "1/(z-2)"], [1, 1], 2, 40, 256)
    rep = combo_singularity_count(system, 1, [[1], [1]], run)
    assert rep.count == 1
    assert abs(rep.counted[0].zeta - 1) < 1e-10
    assert float(rep.closure_radius) == pytest.approx(1.0, rel=0.05)


def test_combo_degenerate_rejected(paper_system_run):
    system, run = paper_system_run
    with pytest.raises(HypothesisUnmet):
        combo_singularity_count(system, 1, [[0], [0]], run)


def test_fabry_ratio_localizes_log_singularity():
    from hpade.expressions import parse_series
    f = parse_series("log(z-1)")
    point, spread = fabry_ratio(f, 256, 60)
    assert point is not None
    assert abs(point - 1) < 0.05
    assert spread < 0.05


def test_fabry_ratio_unstable_for_two_poles():
    from hpade.expressions import parse_series
    f = parse_series("1/(z^2+1)")   # conjugate poles: ratios oscillate
    point, spread = fabry_ratio(f, 256, 60)
    assert point is None


def test_cauchy_hadamard_radius():
    from hpade.expressions import parse_series
    assert abs(cauchy_hadamard_radius(parse_series("log(z-1)"), 256, 80) - 1) < 0.1
    assert abs(cauchy_hadamard_radius(parse_series("1/(z-2)"), 256, 80) - 2) < 0.1


def test_combo_lattice_enumerates_admissible(paper_system_run):
    system, _ = paper_system_run
    combos = list(combo_lattice(system, 1, values=(-1, 0, 1)))
    assert [[1], [0]] in combos or [1] in [c[0] for c in combos]
    for polys in combos:
        assert any(any(c != 0 for c in p) for p in polys)
        for p, mk in zip(polys, system.m):
            assert len(p) - 1 <= mk - 1 or all(c == 0 for c in p)
