"""Tiny expression grammar for series definitions in run configs.

Grammar (precedence climbing): rational literals, the variable z,
+ - * / ^ with parentheses, and the function forms exp(z), log(z - a),
sqrt(1 - z/a) with rational a.  Polynomial subexpressions stay exact;
division by a non-constant polynomial builds a rational series (the
denominator must not vanish at the origin).
"""

from __future__ import annotations

from fractions import Fraction

from .coefficients import Coefficient
from .errors import ConfigError, SeriesError
from .polynomials import poly_add, poly_mul, poly_scale, poly_trim
from .series import (ExpSeries, LogShift, PolySeries, PowerSeries,
                     ProductSeries, RationalSeries, ScaledSeries, SqrtBranch,
                     SumSeries)

__all__ = ["parse_series"]


class _Token:
    def __init__(self, kind, text, pos):
        self.kind = kind
        self.text = text
        self.pos = pos


def _tokenize(text):
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            tokens.append(_Token("number", text[i:j], i))
            i = j
            continue
        if ch.isalpha():
            j = i
            while j < n and text[j].isalnum():
                j += 1
            tokens.append(_Token("name", text[i:j], i))
            i = j
            continue
        if ch in "+-*/^()":
            tokens.append(_Token(ch, ch, i))
            i += 1
            continue
        raise ConfigError(f"unexpected character {ch!r}", line=1, column=i + 1)
    tokens.append(_Token("end", "", n))
    return tokens


class _Value:
    """Either an exact polynomial in z or a general series."""

    def __init__(self, poly=None, series=None):
        self.poly = poly
        self.series = series

    @classmethod
    def constant(cls, q):
        return cls(poly=[Coefficient(re_q=q)])

    def as_series(self) -> PowerSeries:
        if self.series is not None:
            return self.series
        return PolySeries(self.poly)

    def is_constant(self):
        return self.poly is not None and len(poly_trim(self.poly)) == 1

    def constant_value(self):
        return poly_trim(self.poly)[0]


def _add(a, b, sign=1):
    if a.poly is not None and b.poly is not None:
        other = b.poly if sign == 1 else [-c for c in b.poly]
        return _Value(poly=poly_add(a.poly, other))
    right = b.as_series()
    if sign == -1:
        right = ScaledSeries(-1, right)
    return _Value(series=SumSeries([a.as_series(), right]))


def _mul(a, b):
    if a.poly is not None and b.poly is not None:
        return _Value(poly=poly_mul(a.poly, b.poly))
    if a.is_constant():
        return _Value(series=ScaledSeries(a.constant_value(), b.as_series()))
    if b.is_constant():
        return _Value(series=ScaledSeries(b.constant_value(), a.as_series()))
    return _Value(series=ProductSeries(a.as_series(), b.as_series()))


def _div(a, b, pos):
    if b.poly is None:
        raise ConfigError("division by a series is not supported",
                          line=1, column=pos + 1)
    den = poly_trim(b.poly)
    if len(den) == 1:
        if den[0].is_zero():
            raise ConfigError("division by zero", line=1, column=pos + 1)
        inv = Coefficient.one() / den[0]
        if a.poly is not None:
            return _Value(poly=poly_scale(a.poly, inv))
        return _Value(series=ScaledSeries(inv, a.series))
    try:
        if a.poly is not None:
            return _Value(series=RationalSeries(a.poly, den))
        return _Value(series=ProductSeries(
            a.series, RationalSeries([Coefficient.one()], den)))
    except SeriesError as exc:
        raise ConfigError(str(exc), line=1, column=pos + 1) from exc


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    def peek(self):
        return self.tokens[self.k]

    def next(self):
        t = self.tokens[self.k]
        self.k += 1
        return t

    def expect(self, kind):
        t = self.next()
        if t.kind != kind:
            raise ConfigError(f"expected {kind!r}, found {t.text!r}",
                              line=1, column=t.pos + 1)
        return t

    def parse(self):
        v = self.expression()
        t = self.peek()
        if t.kind != "end":
            raise ConfigError(f"trailing input {t.text!r}",
                              line=1, column=t.pos + 1)
        return v

    def expression(self):
        t = self.peek()
        neg = False
        if t.kind in "+-":
            self.next()
            neg = t.kind == "-"
        v = self.term()
        if neg:
            v = _mul(_Value.constant(Fraction(-1)), v)
        while self.peek().kind in "+-":
            op = self.next()
            rhs = self.term()
            v = _add(v, rhs, 1 if op.kind == "+" else -1)
        return v

    def term(self):
        v = self.power()
        while self.peek().kind in "*/":
            op = self.next()
            rhs = self.power()
            v = _mul(v, rhs) if op.kind == "*" else _div(v, rhs, op.pos)
        return v

    def power(self):
        v = self.atom()
        if self.peek().kind == "^":
            t = self.next()
            e = self.atom()
            if not (e.poly is not None and e.is_constant()):
                raise ConfigError("exponent must be a constant integer",
                                  line=1, column=t.pos + 1)
            cv = e.constant_value()
            if not (cv.exact and cv.im_q == 0 and cv.re_q.denominator == 1
                    and cv.re_q >= 0):
                raise ConfigError("exponent must be a nonnegative integer",
                                  line=1, column=t.pos + 1)
            k = int(cv.re_q)
            out = _Value.constant(Fraction(1))
            for _ in range(k):
                out = _mul(out, v)
            return out
        return v

    def atom(self):
        t = self.next()
        if t.kind == "number":
            if "." in t.text:
                return _Value.constant(Fraction(t.text))
            return _Value.constant(Fraction(int(t.text)))
        if t.kind == "(":
            v = self.expression()
            self.expect(")")
            return v
        if t.kind == "name":
            if t.text == "z":
                return _Value(poly=[Coefficient.zero(), Coefficient.one()])
            if t.text in ("exp", "log", "sqrt"):
                self.expect("(")
                arg = self.expression()
                self.expect(")")
                return self.call(t, arg)
            raise ConfigError(f"unknown name {t.text!r}",
                              line=1, column=t.pos + 1)
        raise ConfigError(f"unexpected token {t.text!r}",
                          line=1, column=t.pos + 1)

    def call(self, t, arg):
        col = t.pos + 1
        if arg.poly is None:
            raise ConfigError(f"{t.text} argument must be polynomial",
                              line=1, column=col)
        p = poly_trim(arg.poly)
        if t.text == "exp":
            if len(p) == 2 and p[0].is_zero() and p[1] == Coefficient.one():
                return _Value(series=ExpSeries())
            raise ConfigError("exp only supports exp(z)", line=1, column=col)
        if len(p) != 2:
            raise ConfigError(f"{t.text} argument must be linear in z",
                              line=1, column=col)
        c0, c1 = p
        if t.text == "log":
            if c1 == Coefficient.one():
                try:
                    return _Value(series=LogShift(-c0))
                except SeriesError as exc:
                    raise ConfigError(str(exc), line=1, column=col) from exc
            raise ConfigError("log only supports log(z - a)",
                              line=1, column=col)
        # sqrt(1 - z/a): constant term one, a = -1/c1
        if c0 == Coefficient.one() and not c1.is_zero():
            try:
                return _Value(series=SqrtBranch(-(Coefficient.one() / c1)))
            except SeriesError as exc:
                raise ConfigError(str(exc), line=1, column=col) from exc
        raise ConfigError("sqrt only supports sqrt(1 - z/a)",
                          line=1, column=col)


def parse_series(text: str) -> PowerSeries:
    """Parse one series expression into its coefficient oracle."""
    return _Parser(text).parse().as_series()
