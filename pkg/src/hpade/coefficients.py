"""Arbitrary-precision coefficient values with exactness tracking.

A :class:`Coefficient` is either an exact Gaussian rational (a pair of
``fractions.Fraction``) or an inexact arbitrary-precision complex number
(``mpmath.mpc``) tagged with the working precision, in bits, at which it
was produced.  Exact values survive arithmetic exactly and round-trip
through serialization without loss; inexact values always carry their
precision so downstream tolerances can be derived from it.
"""

from __future__ import annotations

from fractions import Fraction

import mpmath as mp

from .errors import SeriesError

MIN_PRECISION = 64


def _as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise SeriesError(f"not an exact rational: {x!r}")


def mpf_from_fraction(f: Fraction, prec: int) -> mp.mpf:
    with mp.workprec(prec):
        return mp.mpf(f.numerator) / mp.mpf(f.denominator)


class Coefficient:
    """One series coefficient: exact Gaussian rational or tagged mpc."""

    __slots__ = ("exact", "re_q", "im_q", "value", "prec")

    def __init__(self, *, re_q=None, im_q=None, value=None, prec=None):
        if value is None:
            self.exact = True
            self.re_q = _as_fraction(re_q if re_q is not None else 0)
            self.im_q = _as_fraction(im_q if im_q is not None else 0)
            self.value = None
            self.prec = None
        else:
            if prec is None or prec < MIN_PRECISION:
                raise SeriesError(
                    f"inexact coefficient needs precision >= {MIN_PRECISION}")
            self.exact = False
            self.re_q = None
            self.im_q = None
            # store verbatim: mpmath constructors round to the ambient
            # context, which would silently discard computed mantissa bits
            if isinstance(value, mp.mpc):
                self.value = value
            else:
                with mp.workprec(int(prec) + 8):
                    self.value = mp.mpc(value)
            self.prec = int(prec)

    @classmethod
    def from_rational(cls, re, im=0) -> "Coefficient":
        return cls(re_q=re, im_q=im)

    @classmethod
    def from_mpc(cls, value, prec) -> "Coefficient":
        return cls(value=value, prec=prec)

    @classmethod
    def zero(cls) -> "Coefficient":
        return cls(re_q=0, im_q=0)

    @classmethod
    def one(cls) -> "Coefficient":
        return cls(re_q=1, im_q=0)

    def is_zero(self) -> bool:
        if self.exact:
            return self.re_q == 0 and self.im_q == 0
        return self.value == 0

    def to_mpc(self, prec=None) -> mp.mpc:
        """Numeric value at the requested precision (exact values rounded)."""
        if self.exact:
            p = prec if prec is not None else mp.mp.prec
            with mp.workprec(p):
                return mp.mpc(mpf_from_fraction(self.re_q, p),
                              mpf_from_fraction(self.im_q, p))
        return self.value

    def abs_mpf(self, prec=None) -> mp.mpf:
        p = prec if prec is not None else (self.prec or mp.mp.prec)
        with mp.workprec(p):
            return abs(self.to_mpc(p))

    def _own_width(self) -> int:
        return max(self.prec, self.value.real._mpf_[3],
                   self.value.imag._mpf_[3]) + 8

    def conjugate(self) -> "Coefficient":
        if self.exact:
            return Coefficient(re_q=self.re_q, im_q=-self.im_q)
        with mp.workprec(self._own_width()):
            return Coefficient(value=mp.conj(self.value), prec=self.prec)

    def __neg__(self) -> "Coefficient":
        if self.exact:
            return Coefficient(re_q=-self.re_q, im_q=-self.im_q)
        with mp.workprec(self._own_width()):
            return Coefficient(value=-self.value, prec=self.prec)

    def _join_prec(self, other) -> int:
        ps = [p for p in (self.prec, other.prec) if p is not None]
        return min(ps) if ps else mp.mp.prec

    def __add__(self, other) -> "Coefficient":
        other = as_coefficient(other)
        if self.exact and other.exact:
            return Coefficient(re_q=self.re_q + other.re_q,
                               im_q=self.im_q + other.im_q)
        # adding an exact zero is the identity; keeps exactness intact
        if self.exact and self.is_zero():
            return other
        if other.exact and other.is_zero():
            return self
        p = self._join_prec(other)
        with mp.workprec(p):
            return Coefficient(value=self.to_mpc(p) + other.to_mpc(p), prec=p)

    def __sub__(self, other) -> "Coefficient":
        return self + (-as_coefficient(other))

    def __mul__(self, other) -> "Coefficient":
        other = as_coefficient(other)
        if self.exact and other.exact:
            a, b, c, d = self.re_q, self.im_q, other.re_q, other.im_q
            return Coefficient(re_q=a * c - b * d, im_q=a * d + b * c)
        # an exact zero annihilates exactly, whatever the other side is
        if (self.exact and self.is_zero()) or (other.exact and other.is_zero()):
            return Coefficient.zero()
        p = self._join_prec(other)
        with mp.workprec(p):
            return Coefficient(value=self.to_mpc(p) * other.to_mpc(p), prec=p)

    def __truediv__(self, other) -> "Coefficient":
        other = as_coefficient(other)
        if other.is_zero():
            raise ZeroDivisionError("coefficient division by zero")
        if self.exact and other.exact:
            a, b, c, d = self.re_q, self.im_q, other.re_q, other.im_q
            den = c * c + d * d
            return Coefficient(re_q=(a * c + b * d) / den,
                               im_q=(b * c - a * d) / den)
        p = self._join_prec(other)
        with mp.workprec(p):
            return Coefficient(value=self.to_mpc(p) / other.to_mpc(p), prec=p)

    __radd__ = __add__
    __rmul__ = __mul__

    def __rsub__(self, other):
        return as_coefficient(other) - self

    def __eq__(self, other):
        if not isinstance(other, Coefficient):
            return NotImplemented
        if self.exact and other.exact:
            return self.re_q == other.re_q and self.im_q == other.im_q
        return self.to_mpc() == other.to_mpc()

    def __hash__(self):
        if self.exact:
            return hash((self.re_q, self.im_q))
        return hash((str(self.value), self.prec))

    def __repr__(self):
        if self.exact:
            return f"Coefficient({self.re_q!s}{'+' if self.im_q >= 0 else ''}{self.im_q!s}j exact)"
        return f"Coefficient({self.value} @{self.prec}b)"


def as_coefficient(x, prec=None) -> Coefficient:
    """Coerce ints, Fractions, and mp numbers into a Coefficient."""
    if isinstance(x, Coefficient):
        return x
    if isinstance(x, (int, Fraction)):
        return Coefficient(re_q=x)
    if isinstance(x, (mp.mpf, mp.mpc, float, complex)):
        return Coefficient(value=x, prec=prec if prec else mp.mp.prec)
    raise SeriesError(f"cannot interpret {x!r} as a coefficient")


# Serialization: exact values as rational strings, inexact as hex float
# strings built from the mantissa/exponent pair, so binary round-trips
# are lossless at any precision.

def mpf_to_hex(x) -> str:
    if not isinstance(x, mp.mpf):
        with mp.workprec(MIN_PRECISION):
            x = mp.mpf(x)
    if mp.isnan(x) or mp.isinf(x):
        raise SeriesError("cannot serialize non-finite value")
    sign, man, exp, bc = x._mpf_
    if man == 0:
        return "0x0p0"
    s = "-" if sign else ""
    return f"{s}0x{man:x}p{exp}"


def mpf_from_hex(text: str) -> mp.mpf:
    text = text.strip()
    neg = text.startswith("-")
    if neg:
        text = text[1:]
    if not text.startswith("0x"):
        raise SeriesError(f"bad hex float: {text!r}")
    man_s, exp_s = text[2:].split("p")
    man = int(man_s, 16)
    exp = int(exp_s)
    # reconstruct (and negate) at the mantissa's own width so nothing is
    # rounded away; mpmath rounds even unary minus to the ambient context
    with mp.workprec(max(MIN_PRECISION, man.bit_length() + 8)):
        val = mp.mpf(mp.libmp.from_man_exp(man, exp))
        return -val if neg else val


def encode_coefficient(c: Coefficient) -> str:
    if c.exact:
        return f"rat:{c.re_q}:{c.im_q}"
    return (f"mpc{c.prec}:{mpf_to_hex(c.value.real)}"
            f":{mpf_to_hex(c.value.imag)}")


def decode_coefficient(text: str) -> Coefficient:
    tag, re_s, im_s = text.split(":")
    if tag == "rat":
        return Coefficient(re_q=Fraction(re_s), im_q=Fraction(im_s))
    if tag.startswith("mpc"):
        prec = int(tag[3:])
        re_v = mpf_from_hex(re_s)
        im_v = mpf_from_hex(im_s)
        width = max(prec, re_v._mpf_[3], im_v._mpf_[3]) + 8
        with mp.workprec(width):
            val = mp.mpc(re_v, im_v)
        return Coefficient(value=val, prec=prec)
    raise SeriesError(f"bad coefficient encoding: {text!r}")
