"""Coefficient oracles for formal power series about the origin.

Each series kind knows how to produce its Taylor coefficient at any
index and precision, how to evaluate itself at a point (used by the
boundedness probes, where summing the series would be wrong outside the
disk of analyticity), and which singularities it owns structurally.

Coefficients are memoized per index (exact kinds) or per (precision,
index).  Dict insertion is atomic under the GIL, so concurrent readers
are safe; the experiment driver additionally precomputes the needed
index window before fanning out per-n solves.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .coefficients import Coefficient, as_coefficient, mpf_from_fraction
from .errors import SeriesError
from .polynomials import poly_degree, poly_trim

__all__ = [
    "PowerSeries", "RationalSeries", "ExpSeries", "LogShift", "SqrtBranch",
    "PolySeries", "SumSeries", "ProductSeries", "ScaledSeries",
    "series_add", "series_mul", "poly_combo", "MultiIndex", "SeriesSystem",
]


def _rational_poly(p):
    """Coerce a list of ints/Fractions/Coefficients into Coefficient list."""
    out = []
    for c in p:
        out.append(as_coefficient(c) if not isinstance(c, Coefficient) else c)
    if not out:
        out = [Coefficient.zero()]
    return out


class PowerSeries:
    """Base class: lazy, memoized coefficient oracle."""

    kind = "abstract"

    def __init__(self):
        self._exact_cache = {}
        self._float_cache = {}

    # subclasses implement one of the two underscore hooks
    def _coeff_exact(self, n):
        return None

    def _coeff_float(self, n, prec):
        raise NotImplementedError

    def coeff(self, n: int, prec: int) -> Coefficient:
        """Taylor coefficient at index ``n`` with ``prec`` working bits."""
        if n < 0:
            raise SeriesError("coefficient index must be nonnegative")
        hit = self._exact_cache.get(n)
        if hit is not None:
            return hit
        per_prec = self._float_cache.setdefault(prec, {})
        hit = per_prec.get(n)
        if hit is not None:
            return hit
        exact = self._coeff_exact(n)
        if exact is not None:
            self._exact_cache[n] = exact
            return exact
        with mp.workprec(prec):
            val = self._coeff_float(n, prec)
        per_prec[n] = val
        return val

    def value(self, z, prec: int) -> mp.mpc:
        """Evaluate the represented function at the point z."""
        raise NotImplementedError

    def radius_hint(self):
        """Known radius of analyticity, or None."""
        return None

    def known_singularities(self, prec):
        """Structurally known singular points (poles, branch points)."""
        return []


class RationalSeries(PowerSeries):
    """numer/denom with denom(0) != 0, expanded by the linear recurrence."""

    kind = "rational_fn"

    def __init__(self, numer, denom):
        super().__init__()
        self.numer = _rational_poly(numer)
        self.denom = _rational_poly(denom)
        if self.denom[0].is_zero():
            raise SeriesError("not expandable at origin")
        self._all_exact = all(c.exact for c in self.numer + self.denom)

    def _coeff_exact(self, n):
        if not self._all_exact:
            return None
        return self._recurrence(n, None)

    def _coeff_float(self, n, prec):
        return self._recurrence(n, prec)

    def _recurrence(self, n, prec):
        # d_0 c_n = numer_n - sum_{j>=1} d_j c_{n-j}
        cache = self._exact_cache if prec is None else \
            self._float_cache.setdefault(prec, {})
        top = max(cache) + 1 if cache else 0
        for k in range(top, n + 1):
            acc = self.numer[k] if k < len(self.numer) else Coefficient.zero()
            for j in range(1, min(k, len(self.denom) - 1) + 1):
                acc = acc - self.denom[j] * cache[k - j]
            c = acc / self.denom[0]
            if prec is not None and c.exact:
                c = Coefficient(value=c.to_mpc(prec), prec=prec)
            cache[k] = c
        return cache[n]

    def value(self, z, prec):
        with mp.workprec(prec):
            z = mp.mpc(z)
            num = mp.mpc(0)
            for c in reversed(self.numer):
                num = num * z + c.to_mpc(prec)
            den = mp.mpc(0)
            for c in reversed(self.denom):
                den = den * z + c.to_mpc(prec)
            return num / den

    def known_singularities(self, prec):
        from .roots import roots as find_roots
        d = poly_degree(self.denom, prec)
        if d < 1:
            return []
        rs = find_roots(self.denom, prec)
        return list(rs.roots)

    def radius_hint(self):
        try:
            sings = self.known_singularities(128)
        except Exception:
            return None
        if not sings:
            return mp.inf
        return min(abs(s) for s in sings)


class ExpSeries(PowerSeries):
    """exp(z); coefficients 1/n!."""

    kind = "exp"

    def _coeff_exact(self, n):
        return Coefficient(re_q=Fraction(1, _factorial(n)))

    def value(self, z, prec):
        with mp.workprec(prec):
            return mp.exp(mp.mpc(z))

    def radius_hint(self):
        return mp.inf


def _factorial(n):
    out = 1
    for k in range(2, n + 1):
        out *= k
    return out


class LogShift(PowerSeries):
    """log(z - a), principal branch; a != 0.

    The constant term log(-a) is transcendental in general (i*pi for
    a = 1) and is the only inexact coefficient; the tail is -1/(k a^k).
    """

    kind = "log_shift"

    def __init__(self, a):
        super().__init__()
        self.a = _as_exact_scalar(a)
        if self.a.is_zero():
            raise SeriesError("log shift must avoid the origin")

    def _coeff_exact(self, n):
        if n == 0:
            minus_a = -self.a
            if minus_a == Coefficient.one():
                return Coefficient.zero()
            return None
        # log(z-a) = log(-a) - sum_k (z/a)^k / k
        ak = _coeff_pow(self.a, n)
        return -(Coefficient(re_q=Fraction(1, n)) / ak)

    def _coeff_float(self, n, prec):
        # only the constant term lands here
        a = self.a.to_mpc(prec)
        return Coefficient(value=mp.log(-a), prec=prec)

    def value(self, z, prec):
        with mp.workprec(prec):
            return mp.log(mp.mpc(z) - self.a.to_mpc(prec))

    def known_singularities(self, prec):
        return [self.a.to_mpc(prec)]

    def radius_hint(self):
        return self.a.abs_mpf(128)


class SqrtBranch(PowerSeries):
    """sqrt(1 - z/a), principal branch; binomial series, a != 0."""

    kind = "algebraic_branch"

    def __init__(self, a):
        super().__init__()
        self.a = _as_exact_scalar(a)
        if self.a.is_zero():
            raise SeriesError("branch at origin")

    def _coeff_exact(self, n):
        # c_k = c_{k-1} * (1/2 - (k-1)) / k * (-1/a), c_0 = 1
        if n == 0:
            return Coefficient.one()
        prev = self._exact_cache.get(n - 1)
        if prev is None:
            prev = self._coeff_exact(n - 1)
            self._exact_cache[n - 1] = prev
        factor = Coefficient(re_q=Fraction(1, 2) - (n - 1)) \
            * Coefficient(re_q=Fraction(1, n))
        return prev * factor * (-(Coefficient.one() / self.a))

    def value(self, z, prec):
        with mp.workprec(prec):
            return mp.sqrt(1 - mp.mpc(z) / self.a.to_mpc(prec))

    def known_singularities(self, prec):
        return [self.a.to_mpc(prec)]

    def radius_hint(self):
        return self.a.abs_mpf(128)


class PolySeries(PowerSeries):
    """A polynomial viewed as a terminating series."""

    kind = "polynomial"

    def __init__(self, coeffs):
        super().__init__()
        self.coeffs = _rational_poly(coeffs)

    def _coeff_exact(self, n):
        if n < len(self.coeffs):
            c = self.coeffs[n]
            return c if c.exact else None
        return Coefficient.zero()

    def _coeff_float(self, n, prec):
        c = self.coeffs[n]
        return Coefficient(value=c.to_mpc(prec), prec=prec)

    def value(self, z, prec):
        with mp.workprec(prec):
            z = mp.mpc(z)
            acc = mp.mpc(0)
            for c in reversed(self.coeffs):
                acc = acc * z + c.to_mpc(prec)
            return acc

    def radius_hint(self):
        return mp.inf


class SumSeries(PowerSeries):
    kind = "sum"

    def __init__(self, terms):
        super().__init__()
        self.terms = list(terms)

    def coeff(self, n, prec):
        acc = Coefficient.zero()
        for t in self.terms:
            acc = acc + t.coeff(n, prec)
        return acc

    def value(self, z, prec):
        with mp.workprec(prec):
            return sum((t.value(z, prec) for t in self.terms), mp.mpc(0))

    def known_singularities(self, prec):
        out = []
        for t in self.terms:
            out.extend(t.known_singularities(prec))
        return out

    def radius_hint(self):
        hints = [t.radius_hint() for t in self.terms]
        if any(h is None for h in hints):
            return None
        return min(hints)


class ProductSeries(PowerSeries):
    """Cauchy product; ``truncation`` is a laziness hint, not a cutoff."""

    kind = "product"

    def __init__(self, left, right, truncation=None):
        super().__init__()
        self.left = left
        self.right = right
        self.truncation = truncation

    def coeff(self, n, prec):
        acc = Coefficient.zero()
        for j in range(n + 1):
            acc = acc + self.left.coeff(j, prec) * self.right.coeff(n - j, prec)
        return acc

    def value(self, z, prec):
        with mp.workprec(prec):
            return self.left.value(z, prec) * self.right.value(z, prec)

    def known_singularities(self, prec):
        return (self.left.known_singularities(prec)
                + self.right.known_singularities(prec))

    def radius_hint(self):
        hints = [self.left.radius_hint(), self.right.radius_hint()]
        if any(h is None for h in hints):
            return None
        return min(hints)


class ScaledSeries(PowerSeries):
    kind = "scalar_multiple"

    def __init__(self, c, series):
        super().__init__()
        self.c = as_coefficient(c) if not isinstance(c, Coefficient) else c
        self.series = series

    def coeff(self, n, prec):
        return self.c * self.series.coeff(n, prec)

    def value(self, z, prec):
        with mp.workprec(prec):
            return self.c.to_mpc(prec) * self.series.value(z, prec)

    def known_singularities(self, prec):
        return [] if self.c.is_zero() else self.series.known_singularities(prec)

    def radius_hint(self):
        return mp.inf if self.c.is_zero() else self.series.radius_hint()


def _as_exact_scalar(a):
    c = as_coefficient(a) if not isinstance(a, Coefficient) else a
    return c


def _coeff_pow(c, n):
    out = Coefficient.one()
    for _ in range(n):
        out = out * c
    return out


def series_add(a: PowerSeries, b: PowerSeries) -> PowerSeries:
    return SumSeries([a, b])


def series_mul(a: PowerSeries, b: PowerSeries, truncation=None) -> PowerSeries:
    if truncation is not None and truncation < 0:
        raise SeriesError("truncation must be nonnegative")
    return ProductSeries(a, b, truncation)


class MultiIndex:
    """m = (m_1, ..., m_d), nonnegative, not all zero."""

    def __init__(self, entries):
        entries = [int(e) for e in entries]
        if any(e < 0 for e in entries):
            raise SeriesError("multi-index entries must be nonnegative")
        if not entries or all(e == 0 for e in entries):
            raise SeriesError("multi-index must not be identically zero")
        self.entries = entries

    @property
    def total(self):
        return sum(self.entries)

    def __len__(self):
        return len(self.entries)

    def __getitem__(self, k):
        return self.entries[k]

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        return isinstance(other, MultiIndex) and self.entries == other.entries

    def __repr__(self):
        return f"MultiIndex({self.entries})"


class SeriesSystem:
    """The (f, m) pair: d component series plus the multi-index."""

    def __init__(self, components, m):
        self.components = list(components)
        self.m = m if isinstance(m, MultiIndex) else MultiIndex(m)
        if len(self.components) < 1:
            raise SeriesError("system needs at least one component")
        if len(self.m) != len(self.components):
            raise SeriesError("multi-index length must match component count")

    @property
    def d(self):
        return len(self.components)


def poly_combo(system: SeriesSystem, polys, degree_bounds="strict") -> PowerSeries:
    """Form sum_k p_k f_k under the admissible degree bounds.

    ``degree_bounds`` is either "strict" (deg p_k < m_k, with p_k = 0
    forced where m_k = 0) or ("slack", m_star) (deg p_k <= m_k - m_star).
    The returned series carries a ``degenerate`` attribute that is True
    when every p_k is identically zero.
    """
    if len(polys) != system.d:
        raise SeriesError("need one polynomial per component")
    coerced = [poly_trim(_rational_poly(p)) for p in polys]
    degs = [poly_degree(p) for p in coerced]
    for k, (deg, mk) in enumerate(zip(degs, system.m)):
        if degree_bounds == "strict":
            bound_ok = (deg < mk) if mk > 0 else (deg < 0)
        else:
            tag, m_star = degree_bounds
            if tag != "slack":
                raise SeriesError(f"unknown degree bound mode {degree_bounds!r}")
            bound_ok = deg <= mk - m_star
        if not bound_ok:
            raise SeriesError("combination outside admissible class")
    terms = []
    for p, f, deg in zip(coerced, system.components, degs):
        if deg < 0:
            continue
        terms.append(ProductSeries(PolySeries(p), f))
    out = SumSeries(terms) if terms else PolySeries([0])
    out.degenerate = not terms
    return out
