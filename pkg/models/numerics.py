# models/numerics.py
"""
Err-Extended Numerics

This module implements the two value sets the semantics work over and the
conversions between them:
1. RealE: exact rationals extended with the absorbing error value err
2. FloatValue / FloatFormat: a parametric finite float format (tiny formats
   without subnormals, or binary64 driven by hardware arithmetic)
3. inj / proj: the canonical injection of floats into RealE and the
   round-to-nearest-even projection back, with err outside [F_min, F_max]

Tiny formats are small enough to enumerate, which gives the brute-force
rounding oracle and the exact preimage intervals of every representable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import List, Optional, Union

from models.errors import FormatTooLarge, NotRepresentable

HALF = Fraction(1, 2)
DEFAULT_ENUMERATION_BOUND = 2 ** 20

# rationals used for generated environments and programs
VALUE_GRID = tuple(Fraction(k, 2) for k in range(-4, 5))


class _Err:
    """The single value collapsing +inf, -inf and NaN."""
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "err"

    def __reduce__(self):
        return (_Err, ())


ERR = _Err()

RealE = Union[Fraction, _Err]


def is_err(value) -> bool:
    return value is ERR


def pow2(k: int) -> Fraction:
    return Fraction(2) ** k


def floor_log2(a: Fraction) -> int:
    """Exact floor(log2(a)) for a positive rational."""
    e = a.numerator.bit_length() - a.denominator.bit_length()
    if pow2(e) > a:
        e -= 1
    return e


# ---------------------------------------------------------------------------
# Real (exact rational) arithmetic
# ---------------------------------------------------------------------------

BINARY_OPS = ("+", "-", "*", "/")
UNARY_OPS = ("neg",)


def real_arith(op: str, a: RealE, b: Optional[RealE] = None) -> RealE:
    """
    Apply an arithmetic operator in R_e.

    err is absorbing and division by zero yields err:
    err <> r = r <> err = r / 0 = -err = err.

    Parameters
    ----------
    op : str
        One of '+', '-', '*', '/' (binary) or 'neg' (unary).
    a : Fraction or ERR
        First operand.
    b : Fraction or ERR, optional
        Second operand, present iff op is binary.

    Returns
    -------
    Fraction or ERR
        The exact result, or ERR.
    """
    if op in UNARY_OPS:
        if b is not None:
            raise ValueError(f"operator {op!r} takes one operand")
        return ERR if a is ERR else -a
    if op not in BINARY_OPS:
        raise ValueError(f"unknown operator {op!r}")
    if b is None:
        raise ValueError(f"operator {op!r} takes two operands")
    if a is ERR or b is ERR:
        return ERR
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if b == 0:
        return ERR
    return a / b


# ---------------------------------------------------------------------------
# Float formats and values
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FloatFormat:
    """
    A binary floating point format.

    Attributes
    ----------
    precision : int
        Significand bits including the implicit leading one (p >= 2).
    emin, emax : int
        Exponent range of normal numbers.
    mode : str
        'tiny' (exact rounding, enumerable, no subnormals) or 'binary64'
        (hardware arithmetic).
    """
    precision: int
    emin: int
    emax: int
    mode: str = "tiny"

    def __post_init__(self):
        if self.precision < 2:
            raise ValueError("precision must be at least 2")
        if self.emin > self.emax:
            raise ValueError("emin must not exceed emax")
        if self.mode not in ("tiny", "binary64"):
            raise ValueError(f"unknown format mode {self.mode!r}")

    @classmethod
    def binary64(cls) -> "FloatFormat":
        return cls(precision=53, emin=-1022, emax=1023, mode="binary64")

    @classmethod
    def tiny(cls, precision: int, emin: int, emax: int) -> "FloatFormat":
        return cls(precision=precision, emin=emin, emax=emax, mode="tiny")

    @classmethod
    def parse(cls, text: str) -> "FloatFormat":
        """
        Parse a format string such as 'tiny:p=3,emin=-1,emax=1' or 'binary64'.
        """
        text = text.strip()
        if text == "binary64":
            return cls.binary64()
        kind, _, params = text.partition(":")
        if kind != "tiny" or not params:
            raise ValueError(f"unrecognised float format {text!r}")
        fields = {}
        for item in params.split(","):
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"malformed format parameter {item!r}")
            fields[key.strip()] = int(value)
        missing = {"p", "emin", "emax"} - set(fields)
        if missing:
            raise ValueError(f"format {text!r} lacks {', '.join(sorted(missing))}")
        return cls.tiny(fields["p"], fields["emin"], fields["emax"])

    def __str__(self):
        if self.mode == "binary64":
            return "binary64"
        return f"tiny:p={self.precision},emin={self.emin},emax={self.emax}"

    @property
    def f_max(self) -> Fraction:
        return (2 - pow2(1 - self.precision)) * pow2(self.emax)

    @property
    def f_min(self) -> Fraction:
        return -self.f_max

    @property
    def min_normal(self) -> Fraction:
        return pow2(self.emin)

    @property
    def size(self) -> int:
        """Number of representables, zero counted once."""
        return 2 * (self.emax - self.emin + 1) * 2 ** (self.precision - 1) + 1


@total_ordering
@dataclass(frozen=True, eq=True)
class FloatValue:
    """
    A representable float, stored as sign, exponent and integer significand.

    The value is (-1)^sign * significand * 2^(exponent - precision + 1) with
    significand in [2^(p-1), 2^p) for non-zero values. Zero is stored once
    (sign 0, exponent 0, significand 0); there is no -0.
    """
    sign: int
    exponent: int
    significand: int
    precision: int

    @classmethod
    def zero(cls, precision: int) -> "FloatValue":
        return cls(0, 0, 0, precision)

    @classmethod
    def from_fraction(cls, value: Fraction, precision: int) -> "FloatValue":
        value = Fraction(value)
        if value == 0:
            return cls.zero(precision)
        sign = 1 if value < 0 else 0
        a = abs(value)
        e = floor_log2(a)
        scaled = a / pow2(e - precision + 1)
        if scaled.denominator != 1:
            raise NotRepresentable(f"{value} needs more than {precision} significand bits")
        return cls(sign, e, scaled.numerator, precision)

    @classmethod
    def from_float(cls, x: float) -> Union["FloatValue", _Err]:
        if not math.isfinite(x):
            return ERR
        if x == 0.0:
            return cls.zero(53)
        return cls.from_fraction(Fraction(x), 53)

    @property
    def is_zero(self) -> bool:
        return self.significand == 0

    @property
    def last_bit(self) -> int:
        return self.significand & 1

    def to_fraction(self) -> Fraction:
        if self.is_zero:
            return Fraction(0)
        magnitude = self.significand * pow2(self.exponent - self.precision + 1)
        return -magnitude if self.sign else magnitude

    def __float__(self):
        return float(self.to_fraction())

    def __neg__(self):
        if self.is_zero:
            return self
        return FloatValue(1 - self.sign, self.exponent, self.significand, self.precision)

    def __lt__(self, other):
        if not isinstance(other, FloatValue):
            return NotImplemented
        return self.to_fraction() < other.to_fraction()

    def __str__(self):
        return format_decimal(self.to_fraction())

    def __repr__(self):
        return f"FloatValue({format_decimal(self.to_fraction())})"


FloatE = Union[FloatValue, _Err]


def inj(f: FloatE) -> RealE:
    """Canonical injection of F_e into R_e: err maps to err, floats to their exact value."""
    if f is ERR:
        return ERR
    return f.to_fraction()


def _round_tiny(fmt: FloatFormat, r: Fraction) -> FloatValue:
    p = fmt.precision
    if r == 0:
        return FloatValue.zero(p)
    sign = 1 if r < 0 else 0
    a = abs(r)
    e = floor_log2(a)
    if e < fmt.emin:
        # Only 0 and the smallest normal are candidates; their midpoint goes to 0.
        if a <= fmt.min_normal / 2:
            return FloatValue.zero(p)
        return FloatValue(sign, fmt.emin, 2 ** (p - 1), p)
    scaled = a / pow2(e - p + 1)
    q = scaled.numerator // scaled.denominator
    rem = scaled - q
    if rem > HALF or (rem == HALF and q % 2 == 1):
        q += 1
    if q == 2 ** p:
        q = 2 ** (p - 1)
        e += 1
    return FloatValue(sign, e, q, p)


def proj(fmt: FloatFormat, r: RealE) -> FloatE:
    """
    Round an err-extended real to the format.

    Parameters
    ----------
    fmt : FloatFormat
        Target format.
    r : Fraction or ERR
        Value to round.

    Returns
    -------
    FloatValue or ERR
        ERR when r is err or lies outside [F_min, F_max]; otherwise the
        nearest representable, ties going to the even last significand bit
        (and to zero for the tie between zero and the smallest normal).
    """
    if r is ERR:
        return ERR
    r = Fraction(r)
    if r < fmt.f_min or r > fmt.f_max:
        return ERR
    if fmt.mode == "binary64":
        return FloatValue.from_float(float(r))
    return _round_tiny(fmt, r)


def float_arith(fmt: FloatFormat, op: str, a: FloatE, b: Optional[FloatE] = None) -> FloatE:
    """
    One float operation: exact on inj-images then proj in tiny formats,
    hardware arithmetic collapsed to err in binary64.
    """
    if fmt.mode == "tiny":
        return proj(fmt, real_arith(op, inj(a), None if b is None else inj(b)))
    if a is ERR or (b is not None and b is ERR):
        return ERR
    x = float(a)
    try:
        if op == "neg":
            result = -x
        elif op == "+":
            result = x + float(b)
        elif op == "-":
            result = x - float(b)
        elif op == "*":
            result = x * float(b)
        elif op == "/":
            result = x / float(b)
        else:
            raise ValueError(f"unknown operator {op!r}")
    except (ZeroDivisionError, OverflowError):
        return ERR
    return FloatValue.from_float(result)


def enumerate_format(fmt: FloatFormat, bound: int = DEFAULT_ENUMERATION_BOUND) -> List[FloatValue]:
    """
    List every representable of a tiny format in increasing order.

    Raises
    ------
    FormatTooLarge
        For binary64 or when the format has more than `bound` values.
    """
    if fmt.mode != "tiny" or fmt.size > bound:
        raise FormatTooLarge(f"format {fmt} has {fmt.size} values, bound is {bound}")
    p = fmt.precision
    positives = [
        FloatValue(0, e, q, p)
        for e in range(fmt.emin, fmt.emax + 1)
        for q in range(2 ** (p - 1), 2 ** p)
    ]
    negatives = [-f for f in reversed(positives)]
    return negatives + [FloatValue.zero(p)] + positives


def successor(fmt: FloatFormat, f: FloatValue) -> Optional[FloatValue]:
    """Next representable above f, or None at F_max."""
    p = fmt.precision
    if f.is_zero:
        return FloatValue(0, fmt.emin, 2 ** (p - 1), p)
    if f.sign == 1:
        below = predecessor(fmt, -f)
        return FloatValue.zero(p) if below is None or below.is_zero else -below
    q, e = f.significand + 1, f.exponent
    if q == 2 ** p:
        q, e = 2 ** (p - 1), e + 1
    if e > fmt.emax:
        return None
    return FloatValue(0, e, q, p)


def predecessor(fmt: FloatFormat, f: FloatValue) -> Optional[FloatValue]:
    """Next representable below f, or None at F_min."""
    p = fmt.precision
    if f.is_zero:
        return FloatValue(1, fmt.emin, 2 ** (p - 1), p)
    if f.sign == 1:
        above = successor(fmt, -f)
        return None if above is None else -above
    if f.exponent == fmt.emin and f.significand == 2 ** (p - 1):
        return FloatValue.zero(p)
    q, e = f.significand - 1, f.exponent
    if q < 2 ** (p - 1):
        q, e = 2 ** p - 1, e - 1
    return FloatValue(0, e, q, p)


# ---------------------------------------------------------------------------
# Preimages of proj
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """A real interval; None endpoints are infinite."""
    low: Optional[Fraction]
    high: Optional[Fraction]
    low_closed: bool
    high_closed: bool

    def __contains__(self, r) -> bool:
        if r is ERR:
            return False
        if self.low is not None and (r < self.low or (r == self.low and not self.low_closed)):
            return False
        if self.high is not None and (r > self.high or (r == self.high and not self.high_closed)):
            return False
        return True

    def __str__(self):
        left = "[" if self.low_closed else "("
        right = "]" if self.high_closed else ")"
        low = "-inf" if self.low is None else format_decimal(self.low)
        high = "+inf" if self.high is None else format_decimal(self.high)
        return f"{left}{low}, {high}{right}"


@dataclass(frozen=True)
class Preimage:
    """The set of err-extended reals that proj sends to one value."""
    intervals: tuple
    includes_err: bool = False

    def __contains__(self, value) -> bool:
        if value is ERR:
            return self.includes_err
        return any(value in interval for interval in self.intervals)

    def __str__(self):
        parts = [str(i) for i in self.intervals]
        if self.includes_err:
            parts.insert(0, "{err}")
        return " u ".join(parts)


def _wins_tie(f: FloatValue, other: FloatValue) -> bool:
    if f.is_zero:
        return True
    if other.is_zero:
        return False
    return f.last_bit == 0


def rounding_boundaries(fmt: FloatFormat, f: FloatE) -> Preimage:
    """
    Exact preimage of a representable (or of err) under proj.

    Interior values own [(f+f')/2, (f+f'')/2], each endpoint closed iff f
    wins the tie against that neighbour (even last bit; zero wins against
    the smallest normals). F_max and F_min own their outer endpoint closed.
    err owns {err} and everything outside [F_min, F_max].
    """
    if fmt.mode != "tiny":
        raise FormatTooLarge("rounding boundaries are only tabulated for tiny formats")
    if f is ERR:
        return Preimage(
            (Interval(None, fmt.f_min, False, False), Interval(fmt.f_max, None, False, False)),
            includes_err=True,
        )
    below = predecessor(fmt, f)
    above = successor(fmt, f)
    value = f.to_fraction()
    if below is None:
        low, low_closed = fmt.f_min, True
    else:
        low, low_closed = (value + below.to_fraction()) / 2, _wins_tie(f, below)
    if above is None:
        high, high_closed = fmt.f_max, True
    else:
        high, high_closed = (value + above.to_fraction()) / 2, _wins_tie(f, above)
    return Preimage((Interval(low, high, low_closed, high_closed),))


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def format_rational(r: RealE) -> str:
    """Render a real as an integer or 'num/den'."""
    if r is ERR:
        return "err"
    r = Fraction(r)
    if r.denominator == 1:
        return str(r.numerator)
    return f"{r.numerator}/{r.denominator}"


def format_decimal(r) -> str:
    """Render exactly as a decimal when the expansion terminates, else as a fraction."""
    if r is ERR:
        return "err"
    if isinstance(r, float):
        if math.isinf(r):
            return "+inf"
        r = Fraction(r)
    r = Fraction(r)
    d = r.denominator
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    if d != 1:
        return format_rational(r)
    k = max(twos, fives)
    if k == 0:
        return str(r.numerator)
    scaled = abs(r.numerator * 10 ** k // r.denominator)
    digits = str(scaled).rjust(k + 1, "0")
    text = f"{digits[:-k]}.{digits[-k:]}".rstrip("0").rstrip(".")
    return f"-{text}" if r < 0 else text


def parse_real(text: str) -> RealE:
    """Parse 'err', an integer, a decimal or a fraction into R_e."""
    text = text.strip()
    if text == "err":
        return ERR
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise ValueError(f"{text!r} has a zero denominator") from None
