"""Incomplete Pade machinery: difference identity, q* factors, R*_m.

Consecutive approximant pairs (p_n, q_n), (p_{n+1}, q_{n+1}) of type
(n, m, m*) satisfy an exact polynomial identity: the cross difference
N = p_{n+1} q_n - p_n q_{n+1} collapses onto a single monomial window
of width m - m*, scaled by a constant A_n and a normalized polynomial
factor q*.  Everything in this module is a pure transformation of the
run log; magnitudes |A_n| then drive the R*_m radius estimate and the
regularizing majorant sequence.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .errors import SeriesError, StructureError, WindowError
from .polynomials import (poly_eval_mpc, poly_mul_mpc, poly_from_roots_mpc,
                          poly_valuation_mpc)
from .roots import roots as find_roots
from .series import PowerSeries, SeriesSystem

__all__ = [
    "IncompletePair", "IncompleteRecord", "Regularization", "RmStarEstimate",
    "hp_projection", "normalize_unit_circle", "incomplete_record",
    "records_from_pairs", "estimate_rm_star", "regularize", "lemma_probe",
]

RM_STAR_METHOD = "trailing max of |A_n|^(1/n)"


@dataclass
class IncompletePair:
    """One (p, q) pair of incomplete type (n, m, m*), as mpc polys."""

    p: list
    q: list
    n: int
    m: int
    m_star: int
    precision_bits: int


@dataclass
class IncompleteRecord:
    n: int
    A: mp.mpc
    lambda_n: int
    lambda_n1: int
    qstar: list                   # normalized, degree <= m - m*
    structural_residual: mp.mpf   # relative to ||N||_inf
    exact_termination: bool = False
    qstar_zeros: list = field(default_factory=list)


@dataclass
class Regularization:
    alpha_star: dict              # n -> positive majorant value
    log_alpha_star: dict
    contact_set: list             # the Lambda of property (iv)
    c_bound: float
    scale_r: float
    window: tuple


@dataclass
class RmStarEstimate:
    value: mp.mpf                 # pinned method; mp.inf when A's vanish
    window: tuple
    method: str = RM_STAR_METHOD
    refined: mp.mpf = None        # drift-corrected center for banding
    refined_quality: float = 0.0


def hp_projection(system: SeriesSystem, k: int, approx) -> IncompletePair:
    """Component k of a vector approximant as an incomplete pair.

    The projection has type (n, |m|, m_k): the common denominator over-
    shoots the single component's pole budget by |m| - m_k.
    """
    if not (0 <= k < system.d):
        raise SeriesError(f"component index {k} out of range")
    prec = approx.precision_bits
    with mp.workprec(prec + 32):
        p = [c.to_mpc(prec + 32) for c in approx.numerators[k]]
        q = approx.q_mpc(prec + 32)
    return IncompletePair(p, q, approx.n, system.m.total, system.m[k], prec)


def normalize_unit_circle(pair: IncompletePair) -> IncompletePair:
    """Rescale (p, q) so q matches the unit-circle product normalization.

    Zeros inside the unit circle contribute monic factors (z - zeta),
    zeros outside contribute (1 - z/zeta); the polynomial itself is only
    multiplied by a constant, so the pair keeps its defining properties
    exactly.
    """
    prec = pair.precision_bits
    with mp.workprec(prec + 32):
        rs = find_roots(pair.q, prec)
        lead_index = len(pair.q) - 1 - _leading_drop(pair.q, prec)
        lead = pair.q[lead_index]
        c = 1 / lead
        for r in rs.with_multiplicity():
            if abs(r) >= 1:
                c *= -1 / r
        return IncompletePair([x * c for x in pair.p],
                              [x * c for x in pair.q],
                              pair.n, pair.m, pair.m_star, prec)


def _strip_origin(pair: IncompletePair, rel_val):
    """Cancel the common zero at the origin, per the reduced form c.3/c.4.

    The difference identity holds for the reduced pairs; the stripped
    order is the lambda_n that appears in the monomial exponent.
    """
    lam = min(poly_valuation_mpc(pair.p, rel_val),
              poly_valuation_mpc(pair.q, rel_val))
    if lam == 0:
        return pair, 0
    p = pair.p[lam:] or [mp.mpc(0)]
    q = pair.q[lam:] or [mp.mpc(1)]
    return IncompletePair(p, q, pair.n, pair.m, pair.m_star,
                          pair.precision_bits), lam


def _leading_drop(q, prec):
    mags = [abs(c) for c in q]
    top = max(mags)
    if top == 0:
        return 0
    thr = top * mp.mpf(2) ** (-(prec // 4))
    drop = 0
    i = len(q) - 1
    while i > 0 and mags[i] <= thr:
        drop += 1
        i -= 1
    return drop


def incomplete_record(pair_n: IncompletePair, pair_n1: IncompletePair,
                      rescale: bool = True) -> IncompleteRecord:
    """Extract (A, lambda, q*) from one consecutive pair of approximants.

    The cross difference must vanish below z^(n+1-lambda_n-lambda_{n+1})
    and above the q* window; coefficient mass outside that window is the
    structural residual and signals an invalid input pair or starved
    precision when it exceeds 2^(-P/2) relative to ||N||.
    """
    if pair_n1.n != pair_n.n + 1 or pair_n1.m != pair_n.m \
            or pair_n1.m_star != pair_n.m_star:
        raise StructureError("pairs must be consecutive with equal (m, m*)")
    prec = min(pair_n.precision_bits, pair_n1.precision_bits)
    n, m, m_star = pair_n.n, pair_n.m, pair_n.m_star
    with mp.workprec(prec + 32):
        rel_val = mp.mpf(2) ** (-(prec // 2))
        a, lam_n = _strip_origin(pair_n, rel_val)
        b, lam_n1 = _strip_origin(pair_n1, rel_val)
        if rescale:
            a = normalize_unit_circle(a)
            b = normalize_unit_circle(b)
        t1 = poly_mul_mpc(b.p, a.q)
        t2 = poly_mul_mpc(a.p, b.q)
        L = max(len(t1), len(t2))
        t1 += [mp.mpc(0)] * (L - len(t1))
        t2 += [mp.mpc(0)] * (L - len(t2))
        N = [x - y for x, y in zip(t1, t2)]
        scale = max(max(abs(x) for x in t1), max(abs(x) for x in t2))
        norm_N = max(abs(x) for x in N) if N else mp.mpf(0)
        tol = mp.mpf(2) ** (-(prec // 2))
        if scale == 0 or norm_N <= tol * scale:
            return IncompleteRecord(n, mp.mpc(0), lam_n, lam_n1, [mp.mpc(1)],
                                    mp.mpf(0), exact_termination=True)
        v0 = n + 1 - lam_n - lam_n1
        hi = v0 + (m - m_star)
        outside = mp.mpf(0)
        for j, x in enumerate(N):
            if j < v0 or j > hi:
                outside = max(outside, abs(x))
        rel_resid = outside / norm_N
        if rel_resid > tol:
            raise StructureError("difference identity violated")
        window = [N[j] if j < len(N) else mp.mpc(0) for j in range(v0, hi + 1)]
        wmags = [abs(x) for x in window]
        wtop = max(wmags)
        deg = 0
        deg_thr = wtop * mp.mpf(2) ** (-(prec // 4))
        for j, w in enumerate(wmags):
            if w > deg_thr:
                deg = j
        if deg == 0:
            qstar = [mp.mpc(1)]
            zeros = []
            A = window[0]
        else:
            rs = find_roots(window[:deg + 1], prec)
            zeros = rs.with_multiplicity()
            qstar = [mp.mpc(1)]
            for z in zeros:
                if abs(z) < 1:
                    qstar = poly_mul_mpc(qstar, [-z, mp.mpc(1)])
                else:
                    qstar = poly_mul_mpc(qstar, [mp.mpc(1), -1 / z])
            A = window[deg] / qstar[deg] if qstar[deg] != 0 else window[0] / qstar[0]
        return IncompleteRecord(n, A, lam_n, lam_n1, qstar,
                                rel_resid, False, zeros)


def records_from_pairs(pairs, strict: bool = True):
    """Records for every consecutive-n pair present in the input.

    With ``strict`` False, pairs violating the difference identity are
    skipped and their indices returned alongside the records.
    """
    by_n = {p.n: p for p in pairs}
    out, violations = [], []
    for n in sorted(by_n):
        if n + 1 not in by_n:
            continue
        try:
            out.append(incomplete_record(by_n[n], by_n[n + 1]))
        except StructureError:
            if strict:
                raise
            violations.append(n)
    if strict:
        return out
    return out, violations


def _select_window(ns, window):
    if window == "all":
        return ns
    if window == "trailing_half":
        return ns[len(ns) // 2:]
    lo, hi = window
    return [n for n in ns if lo <= n <= hi]


def estimate_rm_star(records, window="trailing_half") -> RmStarEstimate:
    """R*_m from |A_n|: pinned trailing-max proxy plus a drift fit.

    The pinned value is 1 / max |A_n|^(1/n) over the trailing window
    (infinite when every trailing A vanishes).  Algebraic prefactors
    n^(-beta) bias that proxy at desk scale, so a three-parameter fit
    log|A_n| = C + n log(sigma) - beta log(n) is also reported; the
    refined radius 1/sigma is what position banding should use.
    """
    nonzero = {r.n: abs(r.A) for r in records if not r.exact_termination
               and abs(r.A) > 0}
    if len([r for r in records if not r.exact_termination]) < 8 and len(nonzero) < 8:
        if not nonzero:
            ns = sorted(r.n for r in records)
            win = (ns[0], ns[-1]) if ns else (0, 0)
            return RmStarEstimate(mp.inf, win)
        raise WindowError("need at least 8 records with nonzero A")
    ns_all = sorted(nonzero)
    ns = _select_window(ns_all, window)
    if not ns:
        return RmStarEstimate(mp.inf, (0, 0))
    proxy = max(nonzero[n] ** (mp.mpf(1) / n) for n in ns)
    value = 1 / proxy if proxy > 0 else mp.inf
    win = (ns[0], ns[-1])
    refined, quality = None, 0.0
    if len(ns) >= 8:
        xs = np.array([float(n) for n in ns])
        ys = np.array([float(mp.log(nonzero[n])) for n in ns])
        X = np.column_stack([np.ones_like(xs), xs, np.log(xs)])
        sol, res, *_ = np.linalg.lstsq(X, ys, rcond=None)
        ss_tot = float(np.sum((ys - ys.mean()) ** 2))
        if ss_tot > 0:
            ss_res = float(res[0]) if len(res) else float(
                np.sum((ys - X @ sol) ** 2))
            quality = 1.0 - ss_res / ss_tot
        else:
            quality = 1.0
        try:
            sigma = math.exp(sol[1])
        except OverflowError:
            sigma = float("inf")
        if sigma == 0 or sigma < 1e-300:
            refined = mp.inf
        elif math.isfinite(sigma):
            refined = mp.mpf(1) / mp.mpf(sigma)
    return RmStarEstimate(value, win, RM_STAR_METHOD, refined, quality)


def regularize(alpha: dict, scale_r, weighted: bool = False) -> Regularization:
    """Least concave majorant of log(alpha_n * r^n) on the window.

    Properties (ii)-(iv) hold by construction: the hull is concave, sits
    on or above the data, and touches it on the contact set (where the
    ratio constant is exactly one).  Zero entries are skipped; they are
    exact-termination evidence, not data.  With ``weighted`` the hull is
    taken on log(alpha_n / n!) instead (the classical form) and mapped
    back, for comparison probes.
    """
    pts = []
    for n in sorted(alpha):
        a = alpha[n]
        if a is None or a == 0:
            continue
        y = float(mp.log(a)) + n * float(mp.log(scale_r))
        if weighted:
            y -= float(mp.log(mp.factorial(n)))
        pts.append((n, y))
    if not pts:
        raise SeriesError("regularization of an all-zero sequence")
    hull = _upper_hull(pts)
    hull_x = [p[0] for p in hull]
    hull_y = [p[1] for p in hull]
    log_star, star = {}, {}
    contact = []
    for n, y in pts:
        y_star = _interp(hull_x, hull_y, 0, n)
        if weighted:
            y_star += float(mp.log(mp.factorial(n)))
            y += float(mp.log(mp.factorial(n)))
        log_star[n] = y_star
        star[n] = mp.e ** mp.mpf(y_star)
        if abs(y_star - y) <= 1e-9 * max(1.0, abs(y)):
            contact.append(n)
    window = (pts[0][0], pts[-1][0])
    return Regularization(star, log_star, contact, 1.0, float(scale_r), window)


def _upper_hull(pts):
    """Upper concave envelope via the monotone chain (points sorted by x)."""
    hull = []
    for p in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # pop while the middle point is not above the chord
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _interp(xs, ys, seg, x):
    while seg + 1 < len(xs) and xs[seg + 1] < x:
        seg += 1
    if seg + 1 >= len(xs):
        return ys[-1]
    x0, x1 = xs[seg], xs[seg + 1]
    y0, y1 = ys[seg], ys[seg + 1]
    if x1 == x0:
        return max(y0, y1)
    t = (x - x0) / (x1 - x0)
    return y0 + t * (y1 - y0)


def lemma_probe(pairs, F: PowerSeries, regularization: Regularization,
                region, precision_bits: int, angles: int = 32):
    """Evaluate the boundedness ratios of the two lemmas on a grid.

    ``region`` is ("outside", delta), ("inside", delta) or
    ("boundary_arc", z0, delta).  The radius scale is the regularization
    scale r (so the probe works in the rescaled frame where R*_m = 1).
    Outside probes |p_n(z) / (alpha*_n (z/r)^n)|; the other regions
    probe |(q_n F - p_n)(z) / (alpha*_n (z/r)^n)|.  This is numerical
    evidence of boundedness along the contact set, never a proof.
    """
    prec = precision_bits
    r = mp.mpf(regularization.scale_r)
    kind = region[0]
    with mp.workprec(prec + 32):
        if kind == "outside":
            delta = mp.mpf(region[1])
            radii = [r * mp.exp(delta)]
            args = [2 * mp.pi * k / angles for k in range(angles)]
            grid = [rad * mp.exp(1j * t) for rad in radii for t in args]
            use_error_ratio = False
        elif kind == "inside":
            delta = mp.mpf(region[1])
            radii = [r * mp.exp(-delta) * mp.mpf(k) / 4 for k in (1, 2, 3, 4)]
            args = [2 * mp.pi * k / angles for k in range(angles)]
            grid = [rad * mp.exp(1j * t) for rad in radii for t in args]
            use_error_ratio = True
        elif kind == "boundary_arc":
            z0, delta = mp.mpc(region[1]), mp.mpf(region[2])
            base = mp.arg(z0)
            radii = [r * mp.exp(delta * (mp.mpf(k) / 2 - 1)) for k in range(5)]
            args = [base + delta * (mp.mpf(k) / 4 - 1) for k in range(9)]
            grid = [rad * mp.exp(1j * t) for rad in radii for t in args]
            use_error_ratio = True
        else:
            raise SeriesError(f"unknown probe region {region!r}")
        if use_error_ratio:
            exclusion = r * min(mp.mpf("0.05"), delta / 2)
            sing = F.known_singularities(prec)
            grid = [z for z in grid
                    if all(abs(z - s) > exclusion for s in sing)]
        by_n = {p.n: p for p in pairs}
        per_n = {}
        overall = mp.mpf(0)
        for n in regularization.contact_set:
            if n not in by_n:
                continue
            pair = by_n[n]
            alpha_star = regularization.alpha_star[n]
            worst = mp.mpf(0)
            for z in grid:
                denom = alpha_star * abs(z / r) ** n
                if denom == 0:
                    continue
                if use_error_ratio:
                    val = abs(poly_eval_mpc(pair.q, z) * F.value(z, prec)
                              - poly_eval_mpc(pair.p, z)) / denom
                else:
                    val = abs(poly_eval_mpc(pair.p, z)) / denom
                worst = max(worst, val)
            per_n[n] = worst
            overall = max(overall, worst)
    return {
        "region": kind,
        "grid_points": len(grid),
        "indices": sorted(per_n),
        "per_n_max": per_n,
        "running_max": overall,
    }
