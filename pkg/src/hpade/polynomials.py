"""Dense polynomial helpers used by the solver and the analysis layers.

Polynomials are plain lists of :class:`~hpade.coefficients.Coefficient`
in ascending degree order.  A second set of helpers works on lists of
``mpmath.mpc`` for the numeric paths (root finding, residual checks);
those are suffixed ``_mpc``.
"""

from __future__ import annotations

import mpmath as mp

from .coefficients import Coefficient, as_coefficient


def poly_trim(p):
    """Drop trailing exactly-zero coefficients (keeps at least one entry)."""
    out = list(p)
    while len(out) > 1 and out[-1].is_zero():
        out.pop()
    return out


def poly_add(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else Coefficient.zero()
        y = b[i] if i < len(b) else Coefficient.zero()
        out.append(x + y)
    return out


def poly_neg(a):
    return [-x for x in a]


def poly_scale(a, c):
    c = as_coefficient(c)
    return [x * c for x in a]


def poly_mul(a, b):
    out = [Coefficient.zero() for _ in range(len(a) + len(b) - 1)]
    for i, ai in enumerate(a):
        if ai.is_zero():
            continue
        for j, bj in enumerate(b):
            out[i + j] = out[i + j] + ai * bj
    return out


def poly_degree(p, prec=None):
    """Numeric degree: index of the last coefficient above threshold.

    Exact polynomials use exact zero tests; inexact ones use the relative
    threshold 2^(-prec/4) against the largest coefficient magnitude.
    """
    if all(c.exact for c in p):
        q = poly_trim(p)
        if len(q) == 1 and q[0].is_zero():
            return -1
        return len(q) - 1
    prec = prec or mp.mp.prec
    with mp.workprec(prec):
        mags = [c.abs_mpf(prec) for c in p]
        top = max(mags) if mags else mp.mpf(0)
        if top == 0:
            return -1
        thr = top * mp.mpf(2) ** (-prec // 4)
        deg = -1
        for i, m in enumerate(mags):
            if m > thr:
                deg = i
        return deg


def poly_eval(p, z):
    """Horner evaluation; z may be a Coefficient or an mp number."""
    z = as_coefficient(z) if not isinstance(z, Coefficient) else z
    acc = Coefficient.zero()
    for c in reversed(p):
        acc = acc * z + c
    return acc


def poly_to_mpc(p, prec):
    with mp.workprec(prec):
        return [c.to_mpc(prec) for c in p]


# numeric (mpc list) helpers

def poly_eval_mpc(p, z):
    acc = mp.mpc(0)
    for c in reversed(p):
        acc = acc * z + c
    return acc


def poly_mul_mpc(a, b):
    out = [mp.mpc(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def poly_norm_mpc(p):
    """Euclidean norm of the coefficient vector."""
    return mp.sqrt(mp.fsum([abs(c) ** 2 for c in p]))


def poly_deflate_mpc(p, root):
    """Synthetic division by (z - root); remainder is discarded."""
    n = len(p) - 1
    out = [mp.mpc(0)] * n
    acc = p[n]
    for i in range(n - 1, -1, -1):
        out[i] = acc
        acc = p[i] + acc * root
    return out


def poly_valuation_mpc(p, rel_threshold):
    """Order of the zero at the origin under a relative magnitude cutoff."""
    mags = [abs(c) for c in p]
    top = max(mags) if mags else mp.mpf(0)
    if top == 0:
        return len(p)
    thr = top * rel_threshold
    for i, m in enumerate(mags):
        if m > thr:
            return i
    return len(p)


def poly_from_roots_mpc(roots, lead=1):
    out = [mp.mpc(lead)]
    for r in roots:
        out = poly_mul_mpc(out, [-r, mp.mpc(1)])
    return out
