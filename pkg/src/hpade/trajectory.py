"""Zero trajectories across a row sweep: matching, rates, attraction.

All estimators here are finite-n proxies for asymptotic quantities, so
every report carries the window and cutoffs that produced it.  The
limsup proxy is the trailing-window maximum of d_n^(1/n), which is the
conservative reading of limsup semantics at desk scale.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import WindowError
from .polynomials import poly_norm_mpc, poly_to_mpc
from .roots import RootSet, order_by_distance, roots as find_roots

__all__ = [
    "ZeroTrajectory", "RateEstimate", "LambdaMu", "collect", "match",
    "build_trajectories", "estimate_rate", "lambda_mu", "estimate_theta",
    "ordered_distance_table",
]

EPS_LAMBDA = 1e-2      # absolute distance cutoff, checked at window end
EPS_MU = 0.05          # margin under 1 on the n-th-root scale
POLY_SLOPE_CAP = 32.0  # steeper log-log slopes are not algebraic rates


@dataclass
class ZeroTrajectory:
    """One matched zero path across n; distances appear once a target is set."""

    path: dict                    # n -> mpc
    target: object = None         # mpc or None
    distances: dict = field(default_factory=dict)
    trajectory_id: int = 0

    def ns(self):
        return sorted(self.path)

    def final_position(self):
        return self.path[max(self.path)]

    def set_target(self, zeta):
        self.target = mp.mpc(zeta)
        self.distances = {n: abs(z - self.target) for n, z in self.path.items()}

    def steps(self):
        """Distances between consecutive positions (bias-free rate data)."""
        ns = self.ns()
        return {ns[i]: abs(self.path[ns[i + 1]] - self.path[ns[i]])
                for i in range(len(ns) - 1)}


@dataclass
class RateEstimate:
    klass: str                    # geometric | polynomial | stagnant | divergent
    rate: float                   # theta_hat (geometric) or p_hat (polynomial)
    fit_quality: float            # R^2 of the winning regression
    window: tuple

    def is_geometric(self):
        return self.klass == "geometric"


@dataclass
class LambdaMu:
    lambda_hat: int
    mu_hat: int
    thresholds: dict


def collect(run, precision_bits=None, deflate_origin=False):
    """Root sets per n; rows with a nontrivial kernel are excluded.

    Returns (rootsets, excluded) where excluded lists (n, reason); root
    finder failures are recorded per n without aborting the sweep.
    """
    rootsets, excluded = {}, []
    for approx in run:
        prec = precision_bits or approx.precision_bits
        if approx.denominator.nullspace_dim > 1:
            excluded.append((approx.n, "non-unique"))
            continue
        try:
            rootsets[approx.n] = find_roots(
                approx.denominator.q, prec, deflate_origin=deflate_origin)
        except Exception as exc:  # noqa: BLE001 - recorded, sweep continues
            excluded.append((approx.n, f"roots: {exc}"))
    return rootsets, excluded


def match(prev: RootSet, next_: RootSet):
    """Minimum-total-distance assignment between two root sets.

    Exact optimal assignment (Hungarian) on the multiplicity-expanded
    root lists; the result pairs indices (i_prev, i_next) on the smaller
    cardinality, leaving the rest unmatched.
    """
    a = prev.with_multiplicity()
    b = next_.with_multiplicity()
    if not a or not b:
        return []
    cost = np.zeros((len(a), len(b)))
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            cost[i, j] = float(abs(x - y))
    rows, cols = linear_sum_assignment(cost)
    return sorted(zip(rows.tolist(), cols.tolist()))


def build_trajectories(rootsets: dict, max_gap: int = 2):
    """Chain per-n root sets into trajectories; short gaps pause a path."""
    ns = sorted(rootsets)
    active = []                   # (trajectory, last_n, last_index_unused)
    done = []
    next_id = 0
    prev_n = None
    prev_rs = None
    for n in ns:
        rs = rootsets[n]
        if prev_rs is None or (n - prev_n) > max_gap:
            done.extend(t for t, _ in active)
            active = []
            for r in rs.with_multiplicity():
                t = ZeroTrajectory({n: r}, trajectory_id=next_id)
                next_id += 1
                active.append((t, n))
            prev_n, prev_rs = n, rs
            continue
        pairs = match(prev_rs, rs)
        prev_expanded = prev_rs.with_multiplicity()
        # map expanded index of prev to active trajectory by position
        pos_to_traj = {}
        taken = set()
        for i, r in enumerate(prev_expanded):
            best, best_t = None, None
            for t, _ in active:
                if id(t) in taken:
                    continue
                d = abs(t.path[prev_n] - r)
                if best is None or d < best:
                    best, best_t = d, t
            if best_t is not None:
                pos_to_traj[i] = best_t
                taken.add(id(best_t))
        new_active = []
        next_expanded = rs.with_multiplicity()
        matched_next = set()
        for i, j in pairs:
            t = pos_to_traj.get(i)
            if t is None:
                continue
            t.path[n] = next_expanded[j]
            matched_next.add(j)
            new_active.append((t, n))
        matched_ids = {id(t) for t, _ in new_active}
        for t, last in active:
            if id(t) not in matched_ids:
                done.append(t)
        for j, r in enumerate(next_expanded):
            if j not in matched_next:
                t = ZeroTrajectory({n: r}, trajectory_id=next_id)
                next_id += 1
                new_active.append((t, n))
        active = new_active
        prev_n, prev_rs = n, rs
    done.extend(t for t, _ in active)
    return sorted(done, key=lambda t: t.trajectory_id)


def _select_window(ns, window):
    if window == "all":
        return ns
    if window == "trailing_half":
        return ns[len(ns) // 2:]
    lo, hi = window
    return [n for n in ns if lo <= n <= hi]


def estimate_rate(distances: dict, window="trailing_half") -> RateEstimate:
    """Classify a positive decay sequence by competing least-squares fits.

    log d_n against n (geometric, slope s gives theta = e^s) versus
    log d_n against log n (polynomial, slope -p); the winner is chosen
    by R^2.  Sequences whose total decay over the window is under 10%
    are stagnant; a positive trend is divergent.  Log-log slopes beyond
    POLY_SLOPE_CAP are not meaningful algebraic rates (the data is
    faster than any fixed power) and fall back to the geometric class.
    """
    ns_all = sorted(n for n, d in distances.items()
                    if d is not None and mp.isfinite(mp.mpf(d)) and d > 0)
    ns = _select_window(ns_all, window)
    if len(ns) < 8:
        raise WindowError("window too short")
    xs = np.array([float(n) for n in ns])
    ys = np.array([float(mp.log(distances[n])) for n in ns])
    win = (ns[0], ns[-1])

    def fit(x):
        A = np.column_stack([np.ones_like(x), x])
        sol, res, *_ = np.linalg.lstsq(A, ys, rcond=None)
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        if ss_tot == 0:
            return sol[1], 1.0
        ss_res = float(res[0]) if len(res) else float(
            np.sum((ys - A @ sol) ** 2))
        return sol[1], 1.0 - ss_res / ss_tot

    slope_g, r2_g = fit(xs)
    slope_p, r2_p = fit(np.log(xs))

    first, last = float(distances[ns[0]]), float(distances[ns[-1]])
    if slope_g > 0 and last > first:
        return RateEstimate("divergent", math.exp(slope_g), r2_g, win)
    if last > 0.9 * first:
        return RateEstimate("stagnant", last / first, max(r2_g, r2_p), win)
    if r2_p > r2_g and 0 < -slope_p <= POLY_SLOPE_CAP:
        return RateEstimate("polynomial", -slope_p, r2_p, win)
    return RateEstimate("geometric", math.exp(slope_g), r2_g, win)


def ordered_distance_table(rootsets: dict, zeta, pad_len: int):
    """Per-n distances to zeta, nondecreasing, padded with the value 1.

    The padding implements the convention that missing zeros count as
    distance one, so the nu-th sequence is defined for nu up to pad_len.
    """
    zeta = mp.mpc(zeta)
    table = {}
    for n, rs in rootsets.items():
        ordered = order_by_distance(rs, zeta)
        ds = [abs(r - zeta) for r in ordered]
        while len(ds) < pad_len:
            ds.append(mp.mpf(1))
        table[n] = ds[:pad_len]
    return table


def lambda_mu(ordered_distances: dict, eps_lambda=EPS_LAMBDA, eps_mu=EPS_MU,
              window="trailing_half") -> LambdaMu:
    """Empirical attraction indices from ordered distance sequences.

    lambda: largest nu whose nu-th distance is below eps_lambda at the
    window end.  mu: largest nu whose trailing-window max of d^(1/n)
    stays below 1 - eps_mu.  Geometric attraction implies attraction,
    so lambda is lifted to at least mu when the absolute cutoff lags
    the n-th-root test on short windows (both raw values are recorded).
    """
    ns_all = sorted(ordered_distances)
    ns = _select_window(ns_all, window)
    if not ns:
        raise WindowError("window too short")
    depth = min(len(ordered_distances[n]) for n in ns)
    n_end = ns[-1]
    lam = 0
    for nu in range(1, depth + 1):
        if ordered_distances[n_end][nu - 1] <= eps_lambda:
            lam = nu
        else:
            break
    mu = 0
    for nu in range(1, depth + 1):
        proxy = max(ordered_distances[n][nu - 1] ** (mp.mpf(1) / n) for n in ns)
        if proxy < 1 - eps_mu:
            mu = nu
        else:
            break
    thresholds = {
        "eps_lambda": eps_lambda,
        "eps_mu": eps_mu,
        "window": (ns[0], ns[-1]),
        "limsup_proxy": "trailing_max",
        "lambda_raw": lam,
        "mu_raw": mu,
    }
    return LambdaMu(max(lam, mu), mu, thresholds)


def estimate_theta(run, q_limit, precision_bits=None, window="trailing_half") -> mp.mpf:
    """Trailing geometric estimate of ||q_n - q_limit||^(1/n).

    The norm is the Euclidean coefficient norm on the space of
    polynomials of degree <= |m|; exact agreement contributes zero and
    an all-exact tail yields theta = 0.
    """
    prec = precision_bits or (run[0].precision_bits if run else mp.mp.prec)
    with mp.workprec(prec + 32):
        qlim = [mp.mpc(c) if not hasattr(c, "to_mpc") else c.to_mpc(prec + 32)
                for c in q_limit]
        errs = {}
        for approx in run:
            qn = approx.q_mpc(prec + 32)
            L = max(len(qn), len(qlim))
            diff = [(qn[i] if i < len(qn) else mp.mpc(0))
                    - (qlim[i] if i < len(qlim) else mp.mpc(0))
                    for i in range(L)]
            errs[approx.n] = poly_norm_mpc(diff)
        ns = _select_window(sorted(errs), window)
        vals = [errs[n] ** (mp.mpf(1) / n) for n in ns if errs[n] > 0]
        if not vals:
            return mp.mpf(0)
        return max(vals)
