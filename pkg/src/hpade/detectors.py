"""Theorem-level classification of denominator-zero behavior.

Four detectors: system-pole candidates from the convergence of the
denominators, attraction verification for known poles, the trichotomy
classification of limit-denominator zeros against R*_m, and the
polynomial-combination singularity count.  Every verdict is an estimate
under recorded cutoffs; these routines never prove anything.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp

from .errors import HypothesisUnmet, WindowError
from .incomplete import (IncompletePair, Regularization, RmStarEstimate,
                         estimate_rm_star, records_from_pairs, regularize)
from .polynomials import poly_mul_mpc, poly_to_mpc
from .roots import roots as find_roots
from .series import SeriesSystem, poly_combo
from .trajectory import (EPS_LAMBDA, EPS_MU, ZeroTrajectory,
                         build_trajectories, collect, estimate_rate,
                         estimate_theta, lambda_mu, ordered_distance_table)

__all__ = [
    "PoleCandidate", "SystemPoleReport", "ZeroVerdict",
    "SingularityClassification", "SuetinReport", "ComboReport",
    "detect_system_poles", "verify_attraction", "classify_zeros",
    "suetin_scalar", "combo_singularity_count", "fabry_ratio",
    "cauchy_hadamard_radius", "combo_lattice",
]

BOUNDARY_BAND = 0.05


@dataclass
class PoleCandidate:
    zeta: mp.mpc
    tau_hat: int                 # = mu_hat under the recorded cutoffs
    lambda_hat: int
    theta_contrib: float         # trailing max of the nearest-zero n-th root


@dataclass
class SystemPoleReport:
    candidates: list
    q_limit: list
    theta_hat: mp.mpf
    unique_fraction: float
    montessus: bool              # sum of orders equals |m|
    capped: bool
    cutoffs: dict
    slow_attractors: list = field(default_factory=list)


@dataclass
class ZeroVerdict:
    zeta: mp.mpc
    multiplicity: int
    position: str                # inside | boundary | outside
    verdict: str                 # attracts_qstar | pole_of_order | boundary_singular | undecided
    tau: int = 0
    evidence: dict = field(default_factory=dict)


@dataclass
class SingularityClassification:
    verdicts: list
    rm_star: RmStarEstimate
    band_center: mp.mpf
    band_rel: float
    exactness: bool = False


@dataclass
class SuetinReport:
    moduli: list                 # nondecreasing, with multiplicity
    N: int                       # interior pole count
    r_m_minus_1: mp.mpf          # largest zero modulus
    boundary_points: list
    interior_poles: list


@dataclass
class ComboReport:
    polys: list
    m_star: int
    rm_star: RmStarEstimate
    closure_radius: mp.mpf
    closure_method: str
    fabry_point: object
    fabry_spread: float
    verdicts: list
    counted: list                # zeros counted as singular in the closure
    count: int
    passed: bool
    hypothesis_ok: bool
    hypothesis_notes: list


def _distinct_zeros(q, prec):
    """Clustered zeros of a polynomial, as (center, multiplicity) pairs."""
    rs = find_roots(q, prec)
    return list(zip(rs.roots, rs.multiplicities))


def _trajectory_near(trajectories, zeta, prec):
    best, best_d = None, None
    for t in trajectories:
        d = abs(t.final_position() - mp.mpc(zeta))
        if best_d is None or d < best_d:
            best, best_d = t, d
    return best


def _step_class(traj: ZeroTrajectory, prec):
    """Rate class of a trajectory from its increment sequence.

    Increments avoid the self-matching bias of measuring distances to a
    zero of the last denominator.  Steps at or below the precision floor
    are exactness evidence and classify as geometric.
    """
    steps = traj.steps()
    floor = mp.mpf(2) ** (-(prec // 2))
    scale = max([abs(v) for v in traj.path.values()] + [mp.mpf(1)])
    positive = {n: s for n, s in steps.items() if s > floor * scale}
    if len(positive) < 8:
        if len(steps) >= 4 and len(positive) <= len(steps) // 2:
            return "geometric", 0.0, 1.0
        try:
            est = estimate_rate(steps, window="all")
            return est.klass, est.rate, est.fit_quality
        except WindowError:
            return "undetermined", 0.0, 0.0
    est = estimate_rate(positive, window="trailing_half")
    return est.klass, est.rate, est.fit_quality


def detect_system_poles(run, precision_bits=None, min_rows: int = 16,
                        eps_lambda=EPS_LAMBDA, eps_mu=EPS_MU) -> SystemPoleReport:
    """Candidates for system poles from the limit of the denominators.

    Requires a mostly-unique run (nontrivial kernels beyond 20% of the
    window abort with "uniqueness hypothesis unmet").  q_limit is the
    last unique denominator; candidates are its clustered zeros whose
    empirical geometric attraction index is at least one.
    """
    prec = precision_bits or run[0].precision_bits
    unique = [a for a in run if a.denominator.nullspace_dim == 1]
    if len(run) == 0 or len(unique) < min_rows:
        raise HypothesisUnmet("need at least %d unique consecutive rows" % min_rows)
    frac = len(unique) / len(run)
    if 1.0 - frac > 0.20:
        raise HypothesisUnmet("uniqueness hypothesis unmet")
    longest = _longest_unique_streak(run)
    if longest < min_rows:
        raise HypothesisUnmet("need at least %d unique consecutive rows" % min_rows)
    total = run[0].m.total
    last = unique[-1]
    q_limit = last.q_mpc(prec)
    rootsets, _ = collect(unique, prec)
    theta = estimate_theta(unique[:-1], q_limit, prec)
    trajectories = build_trajectories(rootsets)
    candidates = []
    slow_attractors = []
    ns = sorted(rootsets)
    win = ns[len(ns) // 2:]
    for zeta, mult in _distinct_zeros(q_limit, prec):
        table = ordered_distance_table(rootsets, zeta, total)
        lm = lambda_mu(table, eps_lambda, eps_mu)
        if lm.mu_hat < 1:
            continue
        contrib = max(table[n][0] ** (mp.mpf(1) / n) for n in win)
        cand = PoleCandidate(zeta, lm.mu_hat, lm.lambda_hat, float(contrib))
        # a limit point the zeros merely pass through on a slow approach
        # fakes a small n-th root at the window end; demand a geometric
        # increment class on the attracted trajectory
        traj = _trajectory_near(trajectories, zeta, prec)
        klass = _step_class(traj, prec)[0] if traj is not None else "undetermined"
        if klass == "geometric":
            candidates.append(cand)
        else:
            slow_attractors.append(cand)
    capped = False
    while sum(c.tau_hat for c in candidates) > total:
        capped = True
        worst = max(candidates, key=lambda c: (c.tau_hat, abs(c.zeta)))
        worst.tau_hat -= 1
        candidates = [c for c in candidates if c.tau_hat > 0]
    montessus = sum(c.tau_hat for c in candidates) == total and theta < 1
    cutoffs = {"eps_lambda": eps_lambda, "eps_mu": eps_mu,
               "window": (win[0], win[-1]) if win else None,
               "precision_bits": prec}
    return SystemPoleReport(candidates, q_limit, theta, frac, montessus,
                            capped, cutoffs, slow_attractors)


def _longest_unique_streak(run):
    best = cur = 0
    for a in sorted(run, key=lambda a: a.n):
        if a.denominator.nullspace_dim == 1:
            cur += 1
            best = max(best, cur)
        else:
            cur = 0
    return best


def verify_attraction(known_pole, run, precision_bits=None,
                      eps_lambda=EPS_LAMBDA, eps_mu=EPS_MU):
    """Check mu_hat >= tau at a ground-truth system pole.

    ``known_pole`` is (zeta, tau) supplied by the experiment author.
    Returns (passed, LambdaMu).
    """
    zeta, tau = known_pole
    prec = precision_bits or run[0].precision_bits
    total = run[0].m.total
    rootsets, _ = collect(run, prec)
    table = ordered_distance_table(rootsets, zeta, total)
    lm = lambda_mu(table, eps_lambda, eps_mu)
    return lm.mu_hat >= tau, lm


def classify_zeros(q_limit_zeros, records, rm_star: RmStarEstimate,
                   rootsets, precision_bits, trajectories=None,
                   band_rel=BOUNDARY_BAND, eps_lambda=EPS_LAMBDA,
                   eps_mu=EPS_MU) -> SingularityClassification:
    """Trichotomy verdicts for the zeros of the limit denominator.

    Position classes come from the drift-corrected R*_m center with a
    relative band (R*_m itself carries estimation error).  q*-attraction
    is measured along the contact set of the regularization; the pole
    verdict additionally needs lambda = mu and a geometric rate class on
    the attracted trajectory's increments.  Boundary zeros that do not
    attract the q* zeros are singular by the trichotomy.
    """
    prec = precision_bits
    live = [r for r in records if not r.exact_termination and abs(r.A) > 0]
    if not live:
        return SingularityClassification([], rm_star, mp.inf, band_rel,
                                         exactness=True)
    center = rm_star.refined if (rm_star.refined is not None
                                 and mp.isfinite(rm_star.refined)
                                 and rm_star.refined > 0) else rm_star.value
    if not mp.isfinite(center):
        center = mp.inf
    reg = regularize({r.n: abs(r.A) for r in live},
                     scale_r=(1 / center) if mp.isfinite(center) and center > 0 else 1.0)
    contact = set(reg.contact_set)
    qstar_zeros = {r.n: r.qstar_zeros for r in live}
    if trajectories is None:
        trajectories = build_trajectories(rootsets)
    total_pad = max(rs.count() for rs in rootsets.values())
    verdicts = []
    for zeta, mult in q_limit_zeros:
        zeta = mp.mpc(zeta)
        az = abs(zeta)
        if not mp.isfinite(center):
            position = "inside"
        elif abs(az - center) <= band_rel * center:
            position = "boundary"
        elif az < center:
            position = "inside"
        else:
            position = "outside"
        attracts, attract_end = _attracts_qstar(zeta, qstar_zeros, contact,
                                                eps_lambda)
        table = ordered_distance_table(rootsets, zeta, total_pad)
        lm = lambda_mu(table, eps_lambda, eps_mu)
        traj = _trajectory_near(trajectories, zeta, prec)
        klass, rate, quality = ("undetermined", 0.0, 0.0)
        if traj is not None:
            klass, rate, quality = _step_class(traj, prec)
        pole_ok = (lm.lambda_hat == lm.mu_hat >= 1 and klass == "geometric")
        evidence = {
            "attracts_qstar_distance_at_end": attract_end,
            "lambda_hat": lm.lambda_hat,
            "mu_hat": lm.mu_hat,
            "step_class": klass,
            "step_rate": rate,
            "step_fit_quality": quality,
        }
        if attracts:
            verdict, tau = "attracts_qstar", 0
        elif position == "inside" and pole_ok:
            verdict, tau = "pole_of_order", lm.mu_hat
        elif position == "boundary":
            verdict, tau = "boundary_singular", 0
        else:
            verdict, tau = "undecided", 0
        verdicts.append(ZeroVerdict(zeta, mult, position, verdict, tau,
                                    evidence))
    return SingularityClassification(verdicts, rm_star, center, band_rel)


def _attracts_qstar(zeta, qstar_zeros, contact, eps_lambda):
    ns = sorted(n for n in qstar_zeros if n in contact)
    if len(ns) < 2:
        return False, None
    tail = ns[len(ns) // 2:]
    dists = []
    for n in tail:
        zs = qstar_zeros[n]
        if not zs:
            dists.append(mp.mpf(1))
        else:
            dists.append(min(abs(z - zeta) for z in zs))
    end = dists[-1]
    return bool(end <= eps_lambda), float(end)


def suetin_scalar(q_limit_zeros, rm_star, rootsets, precision_bits,
                  trajectories=None, band_rel=BOUNDARY_BAND) -> SuetinReport:
    """Scalar inverse report: interior poles versus boundary points.

    Zeros whose trajectories converge geometrically (or terminate
    exactly) are interior poles; the rest must share the maximal
    modulus within the band, else the modulus pattern required by the
    theorem does not hold and the report refuses ("ordering ambiguous").
    """
    prec = precision_bits
    if trajectories is None:
        trajectories = build_trajectories(rootsets)
    expanded = []
    for zeta, mult in q_limit_zeros:
        expanded.extend([mp.mpc(zeta)] * mult)
    moduli = sorted(abs(z) for z in expanded)
    rhat = moduli[-1] if moduli else mp.mpf(0)
    interior, boundary = [], []
    for zeta, mult in q_limit_zeros:
        traj = _trajectory_near(trajectories, zeta, prec)
        klass, _, _ = _step_class(traj, prec) if traj else ("undetermined", 0, 0)
        if klass == "geometric":
            interior.append((mp.mpc(zeta), mult))
        else:
            boundary.append((mp.mpc(zeta), mult))
    for zeta, mult in boundary:
        if abs(abs(zeta) - rhat) > band_rel * rhat:
            raise HypothesisUnmet("ordering ambiguous")
    if boundary:
        cut = min(abs(z) for z, _ in boundary)
        for zeta, mult in interior:
            if abs(zeta) > cut * (1 + band_rel) and abs(abs(zeta) - rhat) > band_rel * rhat:
                raise HypothesisUnmet("ordering ambiguous")
    N = sum(m for _, m in interior)
    return SuetinReport(moduli, N, rhat,
                        [z for z, _ in boundary for _ in range(1)],
                        [z for z, _ in interior])


def fabry_ratio(series, precision_bits, upto, tail: int = 8):
    """Fabry-style singularity localization from coefficient ratios.

    If c_n / c_{n+1} stabilizes, its limit is a singular point on the
    circle of convergence.  Returns (point, relative spread) or
    (None, spread) when the trailing ratios do not stabilize within 25%.
    """
    prec = precision_bits
    with mp.workprec(prec + 32):
        ratios = []
        for j in range(max(1, upto - 3 * tail), upto):
            c0 = series.coeff(j, prec).to_mpc(prec + 32)
            c1 = series.coeff(j + 1, prec).to_mpc(prec + 32)
            if abs(c1) > 0:
                ratios.append(c0 / c1)
        if len(ratios) < tail:
            return None, float("inf")
        tail_r = ratios[-tail:]
        center = sum(tail_r, mp.mpc(0)) / len(tail_r)
        if abs(center) == 0:
            return None, float("inf")
        spread = max(abs(r - center) for r in tail_r) / abs(center)
        if spread > 0.25:
            return None, float(spread)
        return center, float(spread)


def cauchy_hadamard_radius(series, precision_bits, upto):
    """1 / (trailing max |c_j|^(1/j)): the radius of analyticity proxy."""
    prec = precision_bits
    with mp.workprec(prec + 32):
        best = mp.mpf(0)
        for j in range(max(1, upto // 2), upto + 1):
            c = series.coeff(j, prec).to_mpc(prec + 32)
            a = abs(c)
            if a > 0:
                best = max(best, a ** (mp.mpf(1) / j))
        return mp.inf if best == 0 else 1 / best


def combo_singularity_count(system: SeriesSystem, m_star: int, polys, run,
                            precision_bits=None, band_rel=BOUNDARY_BAND,
                            eps_lambda=EPS_LAMBDA, eps_mu=EPS_MU) -> ComboReport:
    """Count limit-denominator zeros that are singular for F = sum p_k f_k.

    The combination pairs (sum_k p_k p_{n,m,k}, q_{n,m}) are incomplete
    of type (n, |m|, m*) for F, so the section-3 machinery applies with
    the SAME denominators.  Zeros inside the closure of the (m*-1)-th
    meromorphy disk of F count as singular when the trichotomy verdict
    is pole or boundary-singular, or when a boundary-band zero is hit by
    the Fabry ratio point (attraction alone cannot refute singularity).
    """
    prec = precision_bits or run[0].precision_bits
    total = system.m.total
    notes = []
    unique = [a for a in run if a.denominator.nullspace_dim == 1]
    if len(unique) < len(run):
        notes.append(f"{len(run) - len(unique)} non-unique rows dropped")
    full_deg = [a for a in unique if a.denominator.pivot_index == total]
    if len(full_deg) < len(unique):
        notes.append(f"{len(unique) - len(full_deg)} rows with degree drop dropped")
    F = poly_combo(system, polys, ("slack", m_star))
    if getattr(F, "degenerate", False):
        raise HypothesisUnmet("zero combination is degenerate")
    with mp.workprec(prec + 32):
        pairs = []
        for a in full_deg:
            q = a.q_mpc(prec + 32)
            P = [mp.mpc(0)]
            for pk, num in zip(polys, a.numerators):
                pk_mpc = [mp.mpc(c) if not hasattr(c, "to_mpc") else c.to_mpc(prec + 32)
                          for c in pk]
                if all(c == 0 for c in pk_mpc):
                    continue
                term = poly_mul_mpc(pk_mpc, [c.to_mpc(prec + 32) for c in num])
                L = max(len(P), len(term))
                P = [(P[i] if i < len(P) else mp.mpc(0))
                     + (term[i] if i < len(term) else mp.mpc(0)) for i in range(L)]
            pairs.append(IncompletePair(P, q, a.n, total, m_star, prec))
        records = records_from_pairs(pairs)
        rm_F = estimate_rm_star(records)
        n_max = max(a.n for a in full_deg)
        if m_star == 1:
            closure_radius = cauchy_hadamard_radius(F, prec, n_max)
            closure_method = "cauchy_hadamard(m*-1=0)"
        else:
            closure_radius = rm_F.refined if rm_F.refined is not None else rm_F.value
            closure_method = "rm_star_proxy"
        fab_point, fab_spread = fabry_ratio(F, prec, n_max)
        last = full_deg[-1]
        zeros = _distinct_zeros(last.q_mpc(prec), prec)
        simple = all(m == 1 for _, m in zeros)
        if not simple:
            notes.append("q_limit zeros not all simple (theorem hypothesis)")
        rootsets, _ = collect(full_deg, prec)
        classification = classify_zeros(zeros, records, rm_F, rootsets, prec,
                                        band_rel=band_rel,
                                        eps_lambda=eps_lambda, eps_mu=eps_mu)
        if classification.exactness:
            # exact termination: P/q equals F beyond some n0, so a zero of
            # q_limit is a pole of F exactly when the numerator does not
            # cancel it; this reproduces the partial-fraction answer
            from .polynomials import poly_eval_mpc, poly_norm_mpc
            last_pair = pairs[-1]
            verdicts = []
            p_eff = list(last_pair.p)
            top = max(abs(c) for c in p_eff)
            floor = top * mp.mpf(2) ** (-(prec // 2))
            while len(p_eff) > 1 and abs(p_eff[-1]) <= floor:
                p_eff.pop()
            pnorm = poly_norm_mpc(p_eff)
            tol = mp.mpf(2) ** (-(prec // 8))
            for zeta, mult in zeros:
                scale = pnorm * max(mp.mpf(1), abs(zeta)) ** (len(p_eff) - 1)
                cancels = abs(poly_eval_mpc(p_eff, zeta)) <= tol * scale
                verdict = "undecided" if cancels else "pole_of_order"
                verdicts.append(ZeroVerdict(
                    zeta, mult, "inside", verdict, 0 if cancels else mult,
                    {"exact_termination": True, "numerator_cancels": cancels}))
            classification = SingularityClassification(
                verdicts, rm_F, closure_radius, band_rel, exactness=True)
        counted = []
        for v in classification.verdicts:
            if mp.isfinite(closure_radius) and \
                    abs(v.zeta) > closure_radius * (1 + band_rel):
                continue
            singular = v.verdict in ("pole_of_order", "boundary_singular")
            if not singular and v.position == "boundary" and fab_point is not None:
                if abs(v.zeta - fab_point) <= max(eps_lambda,
                                                  band_rel * abs(fab_point)):
                    singular = True
                    v.evidence["fabry_hit"] = True
            if singular:
                counted.append(v)
    hypothesis_ok = simple and not any("non-unique" in s for s in notes)
    count = len(counted)
    return ComboReport(polys, m_star, rm_F, closure_radius, closure_method,
                       fab_point, fab_spread, classification.verdicts,
                       counted, count, count >= m_star, hypothesis_ok, notes)


def combo_lattice(system: SeriesSystem, m_star: int, values=(-1, 0, 1)):
    """All admissible combinations with coefficients on a small lattice.

    Supports the open search for combinations realizing a prescribed
    meromorphy radius; exhaustiveness is never claimed.
    """
    from itertools import product

    degs = [mk - m_star for mk in system.m]
    slots = []
    for dg in degs:
        slots.append(max(0, dg + 1))
    total_slots = sum(slots)
    for combo in product(values, repeat=total_slots):
        polys, idx = [], 0
        for s in slots:
            polys.append(list(combo[idx:idx + s]) if s else [0])
            idx += s
        if all(all(c == 0 for c in p) for p in polys):
            continue
        yield polys
