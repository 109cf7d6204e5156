"""Exact rational arithmetic, dyadic cells, and expansion cylinders.

Every theorem-grade quantity in this package is a ``fractions.Fraction``.
Floating point appears only in the explicitly approximate encoder mode and
in statistical summaries.  This module owns the interval geometry and the
exact power comparisons that the verification harnesses lean on.

Conventions, fixed once here and used everywhere:

* Dyadic cells of order m are half-open ``[k/2^m, (k+1)/2^m)`` except the
  last cell, which closes at 1 so the cells cover [0, 1] exactly.
* "Interval I sits inside cell D" means ``D.lo <= I.lo`` and ``I.hi < D.hi``,
  with ``I.hi <= 1`` accepted for the last cell.
* Expansion cylinders are the closed intervals
  ``[sum b_i beta^-i, sum b_i beta^-i + beta^-k/(beta-1)]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from enum import Enum
from fractions import Fraction
from typing import Sequence, Union

from .errors import DomainError

Rational = Fraction
RationalLike = Union[Fraction, int, str]

ZERO = Fraction(0)
ONE = Fraction(1)
TWO = Fraction(2)


def parse_rational(text: str) -> Fraction:
    """Parse "p/q" or "p" (decimals rejected: exact inputs only)."""
    s = text.strip()
    try:
        if "/" in s:
            num, den = s.split("/")
            return Fraction(int(num), int(den))
        return Fraction(int(s))
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(
            f"expected an exact rational like '3/2', got {text!r}"
        ) from exc


def format_rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


def as_fraction(value: RationalLike) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise DomainError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return parse_rational(value)
    # floats are refused on purpose: they would silently launder precision
    raise DomainError(f"not an exact rational: {value!r}")


def check_beta(beta: Fraction) -> Fraction:
    beta = as_fraction(beta)
    if not (ONE < beta < TWO):
        raise DomainError(f"amplification must lie strictly in (1, 2), got {beta}")
    return beta


def state_bound(beta_max: Fraction) -> Fraction:
    """Upper bound 1/(beta_max - 1) on every encoder state."""
    beta_max = as_fraction(beta_max)
    if beta_max <= ONE:
        raise DomainError("state bound needs beta > 1")
    return 1 / (beta_max - ONE)


@dataclass(frozen=True)
class Interval:
    """Closed interval with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        if not isinstance(self.lo, Fraction) or not isinstance(self.hi, Fraction):
            object.__setattr__(self, "lo", as_fraction(self.lo))
            object.__setattr__(self, "hi", as_fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"empty interval: lo={self.lo} > hi={self.hi}")

    @property
    def length(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x: Fraction) -> bool:
        return self.lo <= x <= self.hi

    def to_json(self) -> dict:
        return {"lo": format_rational(self.lo), "hi": format_rational(self.hi)}


class PrecisionMode(Enum):
    EXACT = "exact"
    FLOAT_FAST = "float-fast"


@dataclass(frozen=True)
class PrecisionPolicy:
    """Arithmetic mode for the encoder orbit.

    FLOAT_FAST is a bit-accurate model of round-to-nearest-even binary
    floating point with ``float_bits`` mantissa bits; it is permitted only
    where an operation's contract explicitly allows approximation.
    """

    mode: PrecisionMode = PrecisionMode.EXACT
    float_bits: int = 53

    def __post_init__(self):
        if self.mode is PrecisionMode.FLOAT_FAST and self.float_bits < 4:
            raise DomainError("float mode needs at least 4 mantissa bits")


EXACT_POLICY = PrecisionPolicy(PrecisionMode.EXACT)


def dyadic_index(x: Fraction, m: int) -> int:
    """Index k of the order-m dyadic cell containing x (last cell closed)."""
    x = as_fraction(x)
    if not (ZERO <= x <= ONE):
        raise DomainError(f"dyadic cells cover [0,1]; got {x}")
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"cell order must be a positive integer, got {m!r}")
    k = (x.numerator << m) // x.denominator
    if k == 1 << m:  # x == 1 belongs to the closed last cell
        k -= 1
    return k


def dyadic_cell(x: Fraction, m: int) -> Interval:
    """The order-m dyadic cell containing x, as its closed hull [k/2^m, (k+1)/2^m]."""
    k = dyadic_index(as_fraction(x), m)
    den = 1 << m
    return Interval(Fraction(k, den), Fraction(k + 1, den))


def cylinder_length(k: int, beta: Fraction) -> Fraction:
    beta = check_beta(beta)
    if k < 0:
        raise DomainError("cylinder depth must be nonnegative")
    return beta ** (-k) / (beta - ONE)


def beta_cylinder(bits: Sequence[int], beta: Fraction) -> Interval:
    """Closed interval of points consistent with the given expansion bits."""
    beta = check_beta(beta)
    if len(bits) < 1:
        raise DomainError("cylinder needs at least one bit")
    inv = 1 / beta
    power = ONE
    lo = ZERO
    for b in bits:
        if b not in (0, 1):
            raise DomainError(f"bits must be 0 or 1, got {b!r}")
        power *= inv
        if b:
            lo += power
    return Interval(lo, lo + power / (beta - ONE))


def interval_in_dyadic_cell(interval: Interval, cell: Interval) -> bool:
    """Containment under the half-open cell convention (last cell closed)."""
    if cell.lo > interval.lo:
        return False
    if cell.hi == ONE:
        return interval.hi <= ONE
    return interval.hi < cell.hi


def cmp_pow2(value: Fraction, exponent: Union[Fraction, int]) -> int:
    """Exact sign of value - 2**exponent for rational value and exponent."""
    value = as_fraction(value)
    if value <= 0:
        return -1
    e = as_fraction(exponent)
    a, b = e.numerator, e.denominator
    powed = value**b
    num, den = powed.numerator, powed.denominator
    if a >= 0:
        lhs, rhs = num, den << a
    else:
        lhs, rhs = num << (-a), den
    return (lhs > rhs) - (lhs < rhs)


def least_power_at_least(
    beta: Fraction,
    exponent2: Union[Fraction, int],
    *,
    coefficient: Fraction = ONE,
    strict: bool = False,
) -> int:
    """Least k >= 0 with coefficient * beta**k >= 2**exponent2 (or > if strict).

    This is the exact evaluation of ceilings like ``ceil(s * log2/log(beta))``
    without touching floating point.
    """
    beta = as_fraction(beta)
    coefficient = as_fraction(coefficient)
    if beta <= ONE or coefficient <= ZERO:
        raise DomainError("need beta > 1 and a positive coefficient")
    k = 0
    value = coefficient
    while True:
        c = cmp_pow2(value, exponent2)
        if c > 0 or (c == 0 and not strict):
            return k
        k += 1
        value *= beta
        if k > 1 << 20:
            raise DomainError("power search ran away; check arguments")


def log2_decimal(value: Fraction, digits: int = 50) -> Decimal:
    """log2 of a positive rational, correct to ~`digits` significant digits."""
    value = as_fraction(value)
    if value <= 0:
        raise DomainError("log of a nonpositive value")
    with localcontext() as ctx:
        ctx.prec = digits + 10
        num = Decimal(value.numerator).ln()
        den = Decimal(value.denominator).ln()
        return (num - den) / Decimal(2).ln()


def log_ratio_decimal(beta: Fraction, digits: int = 50) -> Decimal:
    """log2 / log(beta), the ideal digit-transfer rate, as a Decimal."""
    beta = as_fraction(beta)
    if beta <= 1:
        raise DomainError("rate needs beta > 1")
    with localcontext() as ctx:
        ctx.prec = digits + 10
        lnb = Decimal(beta.numerator).ln() - Decimal(beta.denominator).ln()
        return Decimal(2).ln() / lnb


def fraction_decimal(value: Fraction, places: int = 12) -> str:
    """Deterministic fixed-point decimal rendering of an exact rational."""
    value = as_fraction(value)
    with localcontext() as ctx:
        ctx.prec = places + 30
        d = Decimal(value.numerator) / Decimal(value.denominator)
        q = d.quantize(Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN)
    return format(q, "f")


def decimal_str(value: Decimal, places: int = 12) -> str:
    with localcontext() as ctx:
        ctx.prec = places + 30
        q = Decimal(value).quantize(
            Decimal(1).scaleb(-places), rounding=ROUND_HALF_EVEN
        )
    return format(q, "f")


def float_estimate(value: Fraction) -> float:
    """Lossy float view, for logs and summaries only."""
    return value.numerator / value.denominator


def round_to_bits(x: Fraction, bits: int) -> Fraction:
    """Round-to-nearest-even at `bits` significant binary digits.

    The result is exactly the value an ideal binary float with a
    `bits`-bit mantissa (and unbounded exponent) would store.
    """
    if bits < 1:
        raise DomainError("need a positive mantissa width")
    x = as_fraction(x)
    if x == 0:
        return ZERO
    sign = 1 if x > 0 else -1
    n, d = abs(x).numerator, abs(x).denominator
    e = n.bit_length() - d.bit_length()
    # normalize so 2^e <= n/d < 2^(e+1)
    if e >= 0:
        if n < (d << e):
            e -= 1
    else:
        if (n << (-e)) < d:
            e -= 1
    shift = bits - 1 - e
    if shift >= 0:
        num, den = n << shift, d
    else:
        num, den = n, d << (-shift)
    q, r = divmod(num, den)
    if 2 * r > den or (2 * r == den and q & 1):
        q += 1
    if shift >= 0:
        out = Fraction(q, 1 << shift)
    else:
        out = Fraction(q << (-shift))
    return sign * out


def math_ceil_hint(x: float) -> int:
    """Float ceiling used only to seed exact searches, never as an answer."""
    return math.ceil(x)
