"""Number representations used by the purification models.

Three interchangeable backends are supported:

* ``float`` -- native machine floats, fast but limited to ~1e-308.
* ``rational`` -- :class:`fractions.Fraction`, exact, used for oracle checks.
* ``extended`` -- :class:`ExtReal`, a nonnegative decimal-mantissa real with an
  unbounded integer exponent, able to hold values such as ``10**-(10**28)``.

Model code is written against ordinary arithmetic operators, so any of the
three types can flow through it unchanged.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal, localcontext, ROUND_FLOOR
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Union

__all__ = [
    "ExtReal",
    "ExactRational",
    "Backend",
    "BACKENDS",
    "get_backend",
    "ext_from_decimal",
    "ext_to_display",
    "format_number",
    "to_ext",
]

#: Exact rational type. The stdlib implementation already normalizes to
#: lowest terms with a positive denominator.
ExactRational = Fraction

# Exponent gap (in decimal digits) beyond which addition absorbs the smaller term.
ABSORPTION_GAP = 40
# Largest exponent magnitude rendered in flat ``<m>e<exp>`` display form.
NESTED_DISPLAY_THRESHOLD = 10**6
# Relative slack tolerated when a subtraction lands marginally below zero.
_SUB_SLACK = 1e-12

Number = Union[int, float, Fraction, "ExtReal"]


def _split_decimal(d: Decimal) -> tuple[float, int]:
    """Split a positive Decimal into a float mantissa in [1, 10) and exponent."""
    exp = d.adjusted()
    m = float(d.scaleb(-exp))
    if m >= 10.0:
        m /= 10.0
        exp += 1
    return m, exp


@total_ordering
class ExtReal:
    """Nonnegative real stored as ``mantissa * 10**exponent``.

    The mantissa is a float in ``[1, 10)`` and the exponent an arbitrary
    precision int. Zero is represented by a zero mantissa. Instances are
    immutable.

    Each arithmetic operation carries a relative error of a few ulps of the
    float mantissa. Addition of operands whose exponents differ by more than
    ``ABSORPTION_GAP`` digits returns the larger operand unchanged.
    """

    __slots__ = ("_m", "_e")

    def __init__(self, value: Number | str = 0):
        if isinstance(value, ExtReal):
            m, e = value._m, value._e
        elif isinstance(value, str):
            m, e = _parse(value)
        elif isinstance(value, bool):
            raise TypeError("bool is not a valid ExtReal value")
        elif isinstance(value, int):
            m, e = _from_int(value)
        elif isinstance(value, float):
            m, e = _from_float(value)
        elif isinstance(value, Fraction):
            m, e = _from_fraction(value)
        else:
            raise TypeError(f"cannot convert {type(value).__name__} to ExtReal")
        object.__setattr__(self, "_m", m)
        object.__setattr__(self, "_e", e)

    def __setattr__(self, name, value):
        raise AttributeError("ExtReal is immutable")

    @classmethod
    def _raw(cls, m: float, e: int) -> "ExtReal":
        obj = object.__new__(cls)
        if m == 0.0:
            e = 0
        elif m >= 10.0:
            m /= 10.0
            e += 1
            if m >= 10.0:  # can only happen after an add carry from 9.99.. + 9.99..
                m /= 10.0
                e += 1
        elif m < 1.0:
            k = math.floor(math.log10(m))
            m /= 10.0**k
            e += k
            if m >= 10.0:
                m /= 10.0
                e += 1
            elif m < 1.0:
                m *= 10.0
                e -= 1
        object.__setattr__(obj, "_m", m)
        object.__setattr__(obj, "_e", e)
        return obj

    # -- accessors -----------------------------------------------------------

    @property
    def mantissa(self) -> float:
        return self._m

    @property
    def exponent(self) -> int:
        return self._e

    def is_zero(self) -> bool:
        return self._m == 0.0

    def log10(self) -> float:
        """Decimal logarithm as a float (precision degrades for huge exponents)."""
        if self._m == 0.0:
            return -math.inf
        return self._e + math.log10(self._m)

    def log10_decimal(self, prec: int = 60) -> Decimal:
        if self._m == 0.0:
            raise ValueError("log10 of zero")
        with localcontext() as ctx:
            ctx.prec = prec + len(str(abs(self._e)))
            return Decimal(self._e) + Decimal(self._m).log10()

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        a, b = self, other
        if a._m == 0.0:
            return b
        if b._m == 0.0:
            return a
        if a._e < b._e:
            a, b = b, a
        gap = a._e - b._e
        if gap > ABSORPTION_GAP:
            return a
        return ExtReal._raw(a._m + b._m * 10.0**-gap, a._e)

    __radd__ = __add__

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other._m == 0.0:
            return self
        if self < other:
            if self._m != 0.0 and (other - self) <= other * _SUB_SLACK:
                return ExtReal(0)
            raise ValueError("ExtReal subtraction would produce a negative value")
        gap = self._e - other._e
        if gap > ABSORPTION_GAP:
            return self
        m = self._m - other._m * 10.0**-gap
        if m <= 0.0:
            return ExtReal(0)
        return ExtReal._raw(m, self._e)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other - self

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self._m == 0.0 or other._m == 0.0:
            return ExtReal(0)
        return ExtReal._raw(self._m * other._m, self._e + other._e)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other._m == 0.0:
            raise ZeroDivisionError("ExtReal division by zero")
        if self._m == 0.0:
            return ExtReal(0)
        return ExtReal._raw(self._m / other._m, self._e - other._e)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other / self

    def __pow__(self, power):
        if isinstance(power, ExtReal):
            raise TypeError("ExtReal exponents are not supported")
        if isinstance(power, bool) or not isinstance(power, (int, float, Fraction)):
            return NotImplemented
        if power == 0:
            return ExtReal(1)
        if self._m == 0.0:
            if power < 0:
                raise ZeroDivisionError("zero raised to a negative power")
            return ExtReal(0)
        if self._m == 1.0 and self._e == 0:
            return self
        if isinstance(power, int) and abs(power) <= 4:
            out = self
            for _ in range(abs(power) - 1):
                out = out * self
            return out if power > 0 else ExtReal(1) / out
        # Work in the log domain with enough digits to keep the fractional
        # part of the result exponent accurate to ~1e-17.
        if isinstance(power, int):
            digits = len(str(abs(power)))
        else:
            digits = max(0, int(math.log10(abs(float(power)) + 1))) + 1
        with localcontext() as ctx:
            ctx.prec = 40 + digits + len(str(abs(self._e)))
            if isinstance(power, Fraction):
                p = Decimal(power.numerator) / Decimal(power.denominator)
            else:
                p = Decimal(power)
            log = p * (Decimal(self._e) + Decimal(self._m).log10())
            whole = log.to_integral_value(rounding=ROUND_FLOOR)
            frac = log - whole
            m = float(Decimal(10) ** frac)
        return ExtReal._raw(m, int(whole))

    # -- comparison ----------------------------------------------------------

    def _key(self):
        return (0, 0.0) if self._m == 0.0 else (1, self._e, self._m)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._m == other._m and self._e == other._e

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._key() < other._key()

    def __hash__(self):
        return hash((self._m, self._e))

    def __bool__(self):
        return self._m != 0.0

    def __float__(self):
        if self._m == 0.0:
            return 0.0
        if self._e > 308:
            return math.inf
        if self._e < -340:
            return 0.0
        return float(Decimal(repr(self._m)).scaleb(self._e))

    # -- text ----------------------------------------------------------------

    def __str__(self):
        if self._m == 0.0:
            return "0"
        m = repr(self._m)
        if m.endswith(".0"):
            m = m[:-2]
        return f"{m}e{self._e}"

    def __repr__(self):
        return f"ExtReal('{self}')"

    def display(self, sig_figs: int = 2, nested_threshold: int = NESTED_DISPLAY_THRESHOLD) -> str:
        return ext_to_display(self, sig_figs, nested_threshold)


def _from_int(n: int) -> tuple[float, int]:
    if n < 0:
        raise ValueError("ExtReal values must be nonnegative")
    if n == 0:
        return 0.0, 0
    return _split_decimal(Decimal(n))


def _from_float(x: float) -> tuple[float, int]:
    if x < 0 or math.isnan(x):
        raise ValueError("ExtReal values must be nonnegative")
    if math.isinf(x):
        raise ValueError("ExtReal cannot represent infinity")
    if x == 0.0:
        return 0.0, 0
    return _split_decimal(Decimal(x))


def _from_fraction(q: Fraction) -> tuple[float, int]:
    if q < 0:
        raise ValueError("ExtReal values must be nonnegative")
    if q == 0:
        return 0.0, 0
    num = ExtReal(q.numerator)
    den = ExtReal(q.denominator)
    r = num / den
    return r._m, r._e


def _parse(text: str) -> tuple[float, int]:
    s = text.strip().lower().replace("e+", "e")
    if not s:
        raise ValueError("empty ExtReal literal")
    if "/" in s:
        return _from_fraction(Fraction(s))
    if s.startswith("-"):
        raise ValueError(f"negative ExtReal literal: {text!r}")
    head, sep, tail = s.partition("e")
    try:
        mant = Decimal(head)
        if not sep:
            exp = 0
        else:
            exp_dec = Decimal(tail)
            if exp_dec != exp_dec.to_integral_value():
                raise ValueError(f"non-integral exponent in {text!r}")
            exp = int(exp_dec)
    except ArithmeticError as exc:
        raise ValueError(f"malformed ExtReal literal: {text!r}") from exc
    if mant < 0:
        raise ValueError(f"negative ExtReal literal: {text!r}")
    if mant == 0:
        return 0.0, 0
    m, e = _split_decimal(mant)
    return m, e + exp


def _coerce(x) -> ExtReal:
    if isinstance(x, ExtReal):
        return x
    if isinstance(x, (int, float, Fraction)) and not isinstance(x, bool):
        return ExtReal(x)
    return NotImplemented


def ext_from_decimal(mantissa: float | int | str, exponent: int | str) -> ExtReal:
    """Build ``mantissa * 10**exponent``; the exponent may be a big-int string."""
    m = Decimal(str(mantissa)) if not isinstance(mantissa, Decimal) else mantissa
    if m < 0:
        raise ValueError("mantissa must be nonnegative")
    e = int(exponent) if isinstance(exponent, str) else exponent
    if m == 0:
        return ExtReal(0)
    mm, ee = _split_decimal(m)
    return ExtReal._raw(mm, ee + e)


def to_ext(x) -> ExtReal:
    return x if isinstance(x, ExtReal) else ExtReal(x)


def _compact_int(n: int, sig_figs: int) -> str:
    """``10**28`` -> ``'1e28'``; ``77700...`` -> ``'7.8e28'``."""
    d = Decimal(n)
    text = f"{d:.{sig_figs - 1}e}"
    mant, _, exp = text.partition("e")
    if "." in mant:
        mant = mant.rstrip("0").rstrip(".")
    return f"{mant}e{int(exp)}"


def ext_to_display(a, sig_figs: int = 2, nested_threshold: int = NESTED_DISPLAY_THRESHOLD) -> str:
    """Short human display, e.g. ``3.2e-1`` or ``1e-1e28`` for huge exponents."""
    if sig_figs < 1:
        raise ValueError("sig_figs must be >= 1")
    a = to_ext(a)
    if a.is_zero():
        return "0"
    if abs(a.exponent) > nested_threshold:
        # The mantissa carries no information at this scale.
        sign = "-" if a.exponent < 0 else ""
        return f"1e{sign}{_compact_int(abs(a.exponent), sig_figs)}"
    text = f"{a.mantissa:.{sig_figs - 1}e}"
    mant, _, off = text.partition("e")
    return f"{mant}e{a.exponent + int(off)}"


def format_number(x, sig_figs: int = 2) -> str:
    return ext_to_display(x, sig_figs)


@dataclass(frozen=True)
class Backend:
    """A numeric backend: a name plus a converter from literals to numbers."""

    name: str
    convert: Callable[[object], object]

    def __call__(self, value):
        return self.convert(value)


def _to_float(value) -> float:
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return float(ExtReal(value))
    return float(value)


def _to_rational(value) -> Fraction:
    if isinstance(value, ExtReal):
        if value.exponent < -10_000 or value.exponent > 10_000:
            raise OverflowError("exponent too large for an exact rational")
        return Fraction(Decimal(repr(value.mantissa)).scaleb(value.exponent))
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            return _to_rational(ExtReal(value))
    return Fraction(value)


BACKENDS = {
    "float": Backend("float", _to_float),
    "rational": Backend("rational", _to_rational),
    "extended": Backend("extended", to_ext),
}


def get_backend(name: str | Backend) -> Backend:
    if isinstance(name, Backend):
        return name
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(BACKENDS)}") from None
