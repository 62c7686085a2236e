"""Hermite-Pade linear systems: build, solve, normalize, reduce.

The common denominator q of a type-II row element solves a homogeneous
system with |m| rows and |m|+1 unknowns: for each component k and each
order j in the window n-m_k+1..n, the coefficient of z^j in q*f_k must
vanish (choosing the numerator as the truncation of q*f_k makes the two
formulations equivalent).

Two solve paths: fraction-free Gaussian elimination over Gaussian
integers when every entry is exact, column-pivoted orthogonal
triangularization at working precision otherwise.  Kernel selection is
deterministic: the free column of largest index is set to one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath as mp

from .coefficients import Coefficient
from .errors import SolveError
from .polynomials import (poly_eval_mpc, poly_norm_mpc, poly_deflate_mpc,
                          poly_to_mpc, poly_valuation_mpc)
from .series import MultiIndex, PowerSeries, SeriesSystem

__all__ = [
    "ConstraintMatrix", "DenominatorSolution", "HPApproximant",
    "build_constraint_matrix", "solve_denominator", "numerators",
    "hp_approximant", "reduce_common_zeros", "pade", "normalize",
    "window_residual",
]

MONIC = "monic"
UNIT_COEFF_SUM = "unit_coeff_sum"


@dataclass
class ConstraintMatrix:
    """|m| x (|m|+1) coefficient matrix of the homogeneous conditions."""

    entries: list                 # rows of Coefficient
    n: int
    m: MultiIndex
    row_index: list               # (component k, order j) per row

    @property
    def rows(self):
        return len(self.entries)

    @property
    def cols(self):
        return self.m.total + 1


@dataclass
class DenominatorSolution:
    q: list                       # Coefficient, ascending, length |m|+1
    nullspace_dim: int
    residual: mp.mpf
    normalization: str
    exact: bool
    pivot_index: int              # normalization point; detects degree drop
    degenerate: bool = False


@dataclass
class HPApproximant:
    n: int
    m: MultiIndex
    denominator: DenominatorSolution
    numerators: list              # one Coefficient poly per component
    residual: mp.mpf              # max |[z^j](q f_k - p_k)| over the windows
    precision_bits: int
    reduced: bool = False
    origin_common_order: int = 0

    def q_mpc(self, prec=None):
        return poly_to_mpc(self.denominator.q, prec or self.precision_bits)


def build_constraint_matrix(system: SeriesSystem, n: int,
                            precision_bits: int) -> ConstraintMatrix:
    """Rows are [z^j](z^i f_k) = coeff(f_k, j-i) for the a.2 windows."""
    mmax = max(system.m.entries)
    if n < mmax:
        raise SolveError("index below row start")
    total = system.m.total
    entries, row_index = [], []
    for k, (f, mk) in enumerate(zip(system.components, system.m)):
        for j in range(n - mk + 1, n + 1):
            row = []
            for i in range(total + 1):
                if j - i >= 0:
                    row.append(f.coeff(j - i, precision_bits))
                else:
                    row.append(Coefficient.zero())
            entries.append(row)
            row_index.append((k, j))
    return ConstraintMatrix(entries, n, system.m, row_index)


# Gaussian-integer helpers for the fraction-free path

def _gi_mul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def _gi_sub(a, b):
    return (a[0] - b[0], a[1] - b[1])


def _gi_divexact(a, b):
    n = b[0] * b[0] + b[1] * b[1]
    re = a[0] * b[0] + a[1] * b[1]
    im = a[1] * b[0] - a[0] * b[1]
    qr, rr = divmod(re, n)
    qi, ri = divmod(im, n)
    if rr or ri:
        raise SolveError("fraction-free elimination lost exact divisibility")
    return (qr, qi)


def _rows_to_gaussian_integers(entries):
    out = []
    for row in entries:
        denoms = []
        for c in row:
            denoms.append(c.re_q.denominator)
            denoms.append(c.im_q.denominator)
        scale = 1
        for d in denoms:
            scale = scale * d // math.gcd(scale, d)
        out.append([(int(c.re_q * scale), int(c.im_q * scale)) for c in row])
    return out


def _exact_kernel(entries):
    """Bareiss elimination; kernel vector with the last free column = 1."""
    rows = len(entries)
    cols = len(entries[0])
    M = _rows_to_gaussian_integers(entries)
    prev = (1, 0)
    pivots = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        pr = None
        for i in range(r, rows):
            if M[i][c] != (0, 0):
                pr = i
                break
        if pr is None:
            continue
        if pr != r:
            M[r], M[pr] = M[pr], M[r]
        piv = M[r][c]
        for i in range(r + 1, rows):
            mic = M[i][c]
            for j in range(cols):
                if j == c:
                    continue
                M[i][j] = _gi_divexact(
                    _gi_sub(_gi_mul(piv, M[i][j]), _gi_mul(mic, M[r][j])), prev)
            M[i][c] = (0, 0)
        prev = piv
        pivots.append((r, c))
        r += 1
    rank = len(pivots)
    pivot_cols = {c for _, c in pivots}
    free_cols = [c for c in range(cols) if c not in pivot_cols]
    chosen = free_cols[-1]
    x = [(Fraction(0), Fraction(0)) for _ in range(cols)]
    x[chosen] = (Fraction(1), Fraction(0))
    for rr, cc in reversed(pivots):
        s_re, s_im = Fraction(0), Fraction(0)
        for j in range(cc + 1, cols):
            mre, mim = M[rr][j]
            xre, xim = x[j]
            s_re += mre * xre - mim * xim
            s_im += mre * xim + mim * xre
        pre, pim = M[rr][cc]
        den = Fraction(pre * pre + pim * pim)
        if den == 0:
            raise SolveError("zero pivot in back substitution")
        x[cc] = ((-s_re * pre - s_im * pim) / den,
                 (-s_im * pre + s_re * pim) / den)
    vec = [Coefficient(re_q=a, im_q=b) for a, b in x]
    return vec, cols - rank


def _qr_column_pivoted(A, rows, cols):
    """Householder triangularization with column pivoting (in place)."""
    R = [row[:] for row in A]
    perm = list(range(cols))
    for k in range(min(rows, cols)):
        best, best_j = mp.mpf(-1), k
        for j in range(k, cols):
            s = mp.fsum([abs(R[i][j]) ** 2 for i in range(k, rows)])
            if s > best:
                best, best_j = s, j
        if best_j != k:
            perm[k], perm[best_j] = perm[best_j], perm[k]
            for i in range(rows):
                R[i][k], R[i][best_j] = R[i][best_j], R[i][k]
        xnorm = mp.sqrt(mp.fsum([abs(R[i][k]) ** 2 for i in range(k, rows)]))
        if xnorm == 0:
            continue
        x0 = R[k][k]
        phase = x0 / abs(x0) if x0 != 0 else mp.mpc(1)
        alpha = -phase * xnorm
        v = [R[i][k] for i in range(k, rows)]
        v[0] = v[0] - alpha
        vnorm2 = mp.fsum([abs(t) ** 2 for t in v])
        if vnorm2 == 0:
            continue
        for j in range(k, cols):
            dot = mp.fsum([mp.conj(v[i - k]) * R[i][j] for i in range(k, rows)])
            coefc = 2 * dot / vnorm2
            for i in range(k, rows):
                R[i][j] = R[i][j] - coefc * v[i - k]
        R[k][k] = alpha
        for i in range(k + 1, rows):
            R[i][k] = mp.mpc(0)
    return R, perm


def _float_kernel(entries, prec):
    rows = len(entries)
    cols = len(entries[0])
    with mp.workprec(prec + 32):
        A = [[c.to_mpc(prec + 32) for c in row] for row in entries]
        # equilibrate rows by powers of two (exact, kernel-preserving):
        # constraint rows from different components can differ in scale by
        # hundreds of orders of magnitude, which would fool the rank test
        for i in range(rows):
            top = max(abs(x) for x in A[i])
            if top > 0:
                scale = mp.mpf(2) ** (-mp.floor(mp.log(top, 2)))
                A[i] = [x * scale for x in A[i]]
        sv = mp.svd_c(mp.matrix(A), compute_uv=False)
        smax = max(sv[i] for i in range(rows)) if rows else mp.mpf(0)
        thr = smax * mp.mpf(2) ** (-(prec // 4))
        rank = sum(1 for i in range(rows) if sv[i] > thr)
        nullspace = cols - rank
        R, perm = _qr_column_pivoted(A, rows, cols)
        free_perm_positions = list(range(rank, cols))
        free_orig = [perm[j] for j in free_perm_positions]
        chosen = max(free_orig)
        x = [mp.mpc(0)] * cols
        x[chosen] = mp.mpc(1)
        for i in range(rank - 1, -1, -1):
            s = mp.mpc(0)
            for j in range(i + 1, cols):
                s += R[i][j] * x[perm[j]]
            if R[i][i] == 0:
                raise SolveError("rank detection and triangular factor disagree")
            x[perm[i]] = -s / R[i][i]
        vec = [Coefficient(value=v, prec=prec) for v in x]
    return vec, nullspace


def normalize(q, mode, prec):
    """Normalize a coefficient vector; returns (vector, pivot_index).

    monic: divide by the highest-index coefficient whose magnitude
    clears the rank threshold, so degree drops are detected rather than
    assumed away.  unit_coeff_sum: rotate the pivot to the positive real
    axis and scale so the absolute coefficient sum is one.
    """
    with mp.workprec(prec + 32):
        mags = [c.abs_mpf(prec + 32) for c in q]
        top = max(mags)
        if top == 0:
            raise SolveError("cannot normalize the zero vector")
        thr = top * mp.mpf(2) ** (-(prec // 4))
        pivot = 0
        for i, m_ in enumerate(mags):
            if m_ > thr:
                pivot = i
        piv = q[pivot]
        if mode == MONIC:
            out = [c / piv for c in q]
        elif mode == UNIT_COEFF_SUM:
            all_real_exact = all(c.exact and c.im_q == 0 for c in q)
            if all_real_exact:
                s = sum((abs(c.re_q) for c in q), Fraction(0))
                sign = 1 if piv.re_q > 0 else -1
                scale = Coefficient(re_q=Fraction(sign) / s)
                out = [c * scale for c in q]
            else:
                phase = piv.to_mpc(prec + 32)
                phase = phase / abs(phase)
                total = mp.fsum([m_ for m_ in mags])
                scale = Coefficient(value=1 / (phase * total), prec=prec)
                out = [c * scale for c in q]
        else:
            raise SolveError(f"unknown normalization {mode!r}")
    return out, pivot


def solve_denominator(matrix: ConstraintMatrix, normalization=MONIC,
                      method="auto", precision_bits=None) -> DenominatorSolution:
    """Kernel vector of the constraint matrix as the denominator q."""
    prec = precision_bits or mp.mp.prec
    rows, cols = matrix.rows, matrix.cols
    if rows + 1 != cols:
        raise SolveError("matrix dimensions must be |m| x (|m|+1)")
    all_exact = all(c.exact for row in matrix.entries for c in row)
    with mp.workprec(prec + 32):
        if all(c.is_zero() for row in matrix.entries for c in row):
            q = [Coefficient.one()] + [Coefficient.zero()] * (cols - 1)
            return DenominatorSolution(
                q, nullspace_dim=cols, residual=mp.mpf(0),
                normalization=normalization, exact=True, pivot_index=0,
                degenerate=True)
        if method == "exact" and not all_exact:
            raise SolveError("exact solve requested on inexact entries")
        use_exact = all_exact if method == "auto" else (method == "exact")
        if use_exact:
            vec, nullspace = _exact_kernel(matrix.entries)
        else:
            vec, nullspace = _float_kernel(matrix.entries, prec)
        vec, pivot = normalize(vec, normalization, prec)
        # residual: worst violated constraint at working precision
        resid = mp.mpf(0)
        vnum = [c.to_mpc(prec + 32) for c in vec]
        for row in matrix.entries:
            acc = mp.mpc(0)
            for c, x in zip(row, vnum):
                acc += c.to_mpc(prec + 32) * x
            resid = max(resid, abs(acc))
        exact_out = all(c.exact for c in vec)
    return DenominatorSolution(vec, nullspace, resid, normalization,
                               exact_out, pivot)


def numerators(system: SeriesSystem, q, n: int, precision_bits: int):
    """p_k = truncation of q*f_k to degree n-m_k, one per component."""
    out = []
    for f, mk in zip(system.components, system.m):
        deg = n - mk
        p = []
        for j in range(deg + 1):
            acc = Coefficient.zero()
            for i in range(min(j, len(q) - 1) + 1):
                if not q[i].is_zero():
                    acc = acc + q[i] * f.coeff(j - i, precision_bits)
            p.append(acc)
        out.append(p)
    return out


def window_residual(system: SeriesSystem, q, n: int, precision_bits: int):
    """max |[z^j](q f_k - p_k)| over the a.2 windows (p_k truncated)."""
    prec = precision_bits
    worst = mp.mpf(0)
    with mp.workprec(prec + 32):
        for f, mk in zip(system.components, system.m):
            for j in range(n - mk + 1, n + 1):
                acc = mp.mpc(0)
                for i in range(min(j, len(q) - 1) + 1):
                    acc += q[i].to_mpc(prec + 32) * \
                        f.coeff(j - i, prec).to_mpc(prec + 32)
                worst = max(worst, abs(acc))
    return worst


def hp_approximant(system: SeriesSystem, n: int, precision_bits: int,
                   normalization=MONIC, method="auto") -> HPApproximant:
    matrix = build_constraint_matrix(system, n, precision_bits)
    sol = solve_denominator(matrix, normalization, method, precision_bits)
    ps = numerators(system, sol.q, n, precision_bits)
    resid = window_residual(system, sol.q, n, precision_bits)
    return HPApproximant(n, system.m, sol, ps, resid, precision_bits)


def reduce_common_zeros(approx: HPApproximant, precision_bits=None) -> HPApproximant:
    """Deflate zeros shared by q and every numerator (within 2^(-P/8)).

    A common zero at the origin is the lambda_n of the incomplete
    machinery; it is deflated exactly by power stripping and recorded.
    """
    from .roots import roots as find_roots
    prec = precision_bits or approx.precision_bits
    with mp.workprec(prec + 32):
        q = poly_to_mpc(approx.denominator.q, prec + 32)
        ps = [poly_to_mpc(p, prec + 32) for p in approx.numerators]
        rel_val = mp.mpf(2) ** (-(prec // 2))
        lam = min([poly_valuation_mpc(q, rel_val)]
                  + [poly_valuation_mpc(p, rel_val) for p in ps])
        if lam > 0:
            q = q[lam:]
            ps = [p[lam:] for p in ps]
        rs = find_roots(q, prec)
        tol = mp.mpf(2) ** (-(prec // 8))
        removed = []
        for root in rs.with_multiplicity():
            shared = True
            for p in ps:
                scale = poly_norm_mpc(p) * max(mp.mpf(1), abs(root)) ** (len(p) - 1)
                if scale == 0:
                    continue
                if abs(poly_eval_mpc(p, root)) > tol * scale:
                    shared = False
                    break
            if shared and len(q) > 1:
                q = poly_deflate_mpc(q, root)
                ps = [poly_deflate_mpc(p, root) if len(p) > 1 else p for p in ps]
                removed.append(root)
        qc = [Coefficient(value=c, prec=prec) for c in q]
        psc = [[Coefficient(value=c, prec=prec) for c in p] for p in ps]
        qc, pivot = normalize(qc, approx.denominator.normalization, prec)
    den = DenominatorSolution(
        qc, approx.denominator.nullspace_dim, approx.denominator.residual,
        approx.denominator.normalization, False, pivot,
        approx.denominator.degenerate)
    return HPApproximant(approx.n, approx.m, den, psc, approx.residual,
                         prec, reduced=True, origin_common_order=lam)


def pade(f: PowerSeries, n: int, m: int, precision_bits: int,
         normalization=MONIC, method="auto") -> HPApproximant:
    """Scalar row element: the d=1 case of the solver."""
    if not (n >= m >= 1):
        raise SolveError("pade needs n >= m >= 1")
    system = SeriesSystem([f], MultiIndex([m]))
    return hp_approximant(system, n, precision_bits, normalization, method)
