"""Exact rational-complex arithmetic used throughout the symbolic kernel.

Every coefficient in the expression kernel is a :class:`QQi`, a complex
number with `fractions.Fraction` real and imaginary parts.  No floats ever
enter canonical forms, so identity residuals are exact: a verified identity
cancels to the empty canonical form, not to something small.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Union

RatLike = Union[int, Fraction]


def _frac(x: RatLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    raise TypeError(f"expected int or Fraction, got {type(x).__name__}")


class QQi:
    """Gaussian rational: re + im*i with exact Fraction components."""

    __slots__ = ("re", "im")

    def __init__(self, re: RatLike = 0, im: RatLike = 0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, name, value):
        raise AttributeError("QQi is immutable")

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "QQi") -> "QQi":
        other = _coerce(other)
        return QQi(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other: "QQi") -> "QQi":
        other = _coerce(other)
        return QQi(self.re - other.re, self.im - other.im)

    def __rsub__(self, other) -> "QQi":
        return _coerce(other) - self

    def __neg__(self) -> "QQi":
        return QQi(-self.re, -self.im)

    def __mul__(self, other) -> "QQi":
        other = _coerce(other)
        return QQi(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "QQi":
        other = _coerce(other)
        den = other.re * other.re + other.im * other.im
        if den == 0:
            raise ZeroDivisionError("division by zero QQi")
        return QQi(
            (self.re * other.re + self.im * other.im) / den,
            (self.im * other.re - self.re * other.im) / den,
        )

    def __pow__(self, k: int) -> "QQi":
        if not isinstance(k, int) or k < 0:
            raise ValueError("QQi power must be a nonnegative int")
        out = QQi(1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self) -> "QQi":
        return QQi(self.re, -self.im)

    # -- predicates ------------------------------------------------------

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def __bool__(self) -> bool:
        return not self.is_zero()

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = QQi(other)
        if not isinstance(other, QQi):
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self) -> int:
        return hash((self.re, self.im))

    # -- formatting ------------------------------------------------------

    def __repr__(self) -> str:
        return f"QQi({self.re!r}, {self.im!r})"

    def __str__(self) -> str:
        return format_qqi(self)

    def to_complex(self) -> complex:
        return complex(self.re, self.im)


def _coerce(x) -> QQi:
    if isinstance(x, QQi):
        return x
    if isinstance(x, (int, Fraction)):
        return QQi(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to QQi")


ZERO = QQi(0)
ONE = QQi(1)
IMAG = QQi(0, 1)


def _frac_str(q: Fraction) -> str:
    return str(q)  # "p" or "p/q", deterministic


def format_qqi(c: QQi) -> str:
    """Deterministic text form, parseable by the expression grammar.

    Real values print bare ("3", "-1/2").  Imaginary and mixed values use
    the unit `i` with explicit `*`, mixed values are parenthesized so the
    result is always safe to embed as a factor.
    """
    if c.im == 0:
        return _frac_str(c.re)
    if c.re == 0:
        if c.im == 1:
            return "i"
        if c.im == -1:
            return "-i"
        return f"{_frac_str(c.im)}*i"
    sign = "+" if c.im > 0 else "-"
    mag = abs(c.im)
    istr = "i" if mag == 1 else f"{_frac_str(mag)}*i"
    return f"({_frac_str(c.re)}{sign}{istr})"
