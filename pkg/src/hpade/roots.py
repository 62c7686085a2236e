"""Simultaneous polynomial root finding at arbitrary precision.

Aberth-Ehrlich iteration with deterministic initial iterates on the
Fujiwara-bound circle.  Multiplicities come from clustering, not exact
GCDs, because the inputs are generally inexact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath as mp

from .coefficients import Coefficient
from .errors import RootFindingError, SeriesError
from .polynomials import poly_eval_mpc, poly_norm_mpc

__all__ = ["RootSet", "roots", "order_by_distance"]


@dataclass
class RootSet:
    """Roots of one polynomial with clustering metadata.

    ``roots[i]`` appears with multiplicity ``multiplicities[i]``;
    ``degree_drop`` counts leading coefficients below the rank threshold
    and ``origin_order`` counts origin zeros stripped on request, so
    sum(multiplicities) + degree_drop + origin_order equals the nominal
    degree of the input.
    """

    roots: list
    multiplicities: list
    degree_drop: int = 0
    origin_order: int = 0
    nominal_degree: int = 0
    residuals: list = field(default_factory=list)

    def with_multiplicity(self):
        out = []
        for r, m in zip(self.roots, self.multiplicities):
            out.extend([r] * m)
        return out

    def count(self):
        return sum(self.multiplicities)


def _to_mpc_list(q, prec):
    out = []
    for c in q:
        if isinstance(c, Coefficient):
            out.append(c.to_mpc(prec))
        else:
            out.append(mp.mpc(c))
    return out


def _fujiwara_radius(p):
    """Upper bound on root moduli (Fujiwara): 2 max |a_{n-k}/a_n|^(1/k)."""
    n = len(p) - 1
    an = abs(p[n])
    best = mp.mpf(0)
    for k in range(1, n + 1):
        a = abs(p[n - k]) / an
        if k == n:
            a = a / 2
        if a > 0:
            cand = a ** (mp.mpf(1) / k)
            if cand > best:
                best = cand
    if best == 0:
        best = mp.mpf(1)
    return 2 * best


def _initial_points(p, n):
    radius = _fujiwara_radius(p)
    pts = []
    for j in range(n):
        # fixed angular offset avoids symmetry traps, stays reproducible
        theta = 2 * mp.pi * (j + mp.mpf("0.357")) / n + mp.mpf("0.5") / n
        pts.append(radius * mp.exp(1j * theta))
    return pts


def _derivative(p):
    return [p[k] * k for k in range(1, len(p))]


def roots(q, precision_bits: int, deflate_origin: bool = False,
          max_iterations: int = None) -> RootSet:
    """All roots of q refined to the residual bound 2^(-P/2)*scale.

    Raises :class:`RootFindingError` carrying the best iterate when the
    bound is not met within the iteration budget ("raise precision").
    """
    prec = int(precision_bits)
    with mp.workprec(prec + 32):
        p = _to_mpc_list(q, prec + 32)
        if all(c == 0 for c in p):
            raise SeriesError("cannot find roots of the zero polynomial")
        nominal = len(p) - 1
        mags = [abs(c) for c in p]
        top = max(mags)
        # leading coefficients under the rank threshold do not count as degree
        drop_thr = top * mp.mpf(2) ** (-(prec // 4))
        deg = nominal
        while deg > 0 and mags[deg] <= drop_thr:
            deg -= 1
        degree_drop = nominal - deg
        p = p[:deg + 1]

        origin_order = 0
        if deflate_origin:
            val_thr = top * mp.mpf(2) ** (-(prec // 2))
            while len(p) > 1 and abs(p[0]) <= val_thr:
                p = p[1:]
                origin_order += 1
        if len(p) == 1:
            return RootSet([], [], degree_drop, origin_order, nominal, [])

        found = _aberth(p, prec, max_iterations)
        clustered, mults = _cluster(found, prec)
        resid = [abs(poly_eval_mpc(p, r)) for r in clustered]
        rs = RootSet(clustered, mults, degree_drop, origin_order, nominal, resid)
        return rs


def _aberth(p, prec, max_iterations=None):
    deg = len(p) - 1
    if deg == 1:
        return [-p[0] / p[1]]
    dp = _derivative(p)
    z = _initial_points(p, deg)
    norm_p = poly_norm_mpc(p)
    tol = norm_p * mp.mpf(2) ** (-(prec // 2))
    step_floor = mp.mpf(2) ** (-prec - 16)
    if max_iterations is None:
        max_iterations = 128 + 2 * prec
    stalled = 0
    for _ in range(max_iterations):
        max_step = mp.mpf(0)
        converged = True
        for j in range(deg):
            pv = poly_eval_mpc(p, z[j])
            bound = tol * max(mp.mpf(1), abs(z[j])) ** deg
            if abs(pv) > bound:
                converged = False
            dv = poly_eval_mpc(dp, z[j])
            if dv == 0:
                dv = step_floor * norm_p
            w = pv / dv
            s = mp.mpc(0)
            for k in range(deg):
                if k != j:
                    dz = z[j] - z[k]
                    if dz == 0:
                        dz = step_floor
                    s += 1 / dz
            denom = 1 - w * s
            if denom == 0:
                corr = w
            else:
                corr = w / denom
            z[j] = z[j] - corr
            rel = abs(corr) / max(mp.mpf(1), abs(z[j]))
            if rel > max_step:
                max_step = rel
        if converged:
            return z
        if max_step < step_floor:
            stalled += 1
            if stalled >= 3:
                break
        else:
            stalled = 0
    # final residual check (clusters stall before per-point convergence)
    ok = True
    for j in range(deg):
        pv = poly_eval_mpc(p, z[j])
        if abs(pv) > tol * max(mp.mpf(1), abs(z[j])) ** deg:
            ok = False
            break
    if ok:
        return z
    raise RootFindingError("raise precision", best=z)


def _cluster(points, prec):
    """Merge points closer than 2^(-P/8) (relative) into multiple roots."""
    pts = sorted(points, key=lambda w: (mp.re(w), mp.im(w)))
    used = [False] * len(pts)
    centers, mults = [], []
    radius = mp.mpf(2) ** (-(prec // 8))
    for i, zi in enumerate(pts):
        if used[i]:
            continue
        group = [zi]
        used[i] = True
        for j in range(i + 1, len(pts)):
            if used[j]:
                continue
            scale = max(mp.mpf(1), abs(zi))
            if abs(pts[j] - zi) <= radius * scale:
                group.append(pts[j])
                used[j] = True
        center = sum(group, mp.mpc(0)) / len(group)
        centers.append(center)
        mults.append(len(group))
    return centers, mults


def order_by_distance(rootset: RootSet, zeta) -> list:
    """Roots (with multiplicity) by nondecreasing distance from zeta.

    Ties break by argument, then by input order, matching the indexing
    convention used for the attraction indices.
    """
    zeta = zeta.to_mpc() if isinstance(zeta, Coefficient) else mp.mpc(zeta)
    expanded = rootset.with_multiplicity()
    keyed = []
    for idx, r in enumerate(expanded):
        keyed.append((abs(r - zeta), mp.arg(r), idx, r))
    keyed.sort(key=lambda t: (t[0], t[1], t[2]))
    return [t[3] for t in keyed]
