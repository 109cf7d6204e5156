"""Turning expansion bits into ordinary binary digits of the input.

After k bits the input is pinned down to a closed interval of length
beta**(-k) / (beta - 1) (the cylinder).  A binary digit of order j is
certain as soon as the cylinder fits inside a single dyadic cell of order
j, under the half-open cell convention of ``numerics``.  This module
streams that refinement (``push_bit``), answers "how many bits buy m
digits" (``k_of_m``), and exhibits why a drifting gain destroys the
conversion (``uncertainty_interval``): with beta known only up to an
interval, any word containing a 1 leaves a residual uncertainty that never
shrinks, no matter how many bits are spent.

The cost scan is also the Monte-Carlo kernel, so it works on scaled
integers: with beta = p/q and state x = A/D, one step multiplies through
by p and q and compares integers; the cylinder lower end after k bits is
kept as L / p**k.  No Fraction objects are touched inside the loop.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence

from .encoder import ConstantThreshold
from .errors import ConfigurationError, DomainError
from .numerics import (
    ONE,
    ZERO,
    Interval,
    as_fraction,
    check_beta,
    decimal_str,
    dyadic_index,
    format_rational,
    interval_in_dyadic_cell,
    least_power_at_least,
    log_ratio_decimal,
    state_bound,
)
from .prng import SplitMix64


@dataclass(frozen=True)
class ConversionState:
    """Everything the streaming converter knows after k bits."""

    cylinder: Interval
    emitted: tuple
    k: int

    @property
    def m_confirmed(self) -> int:
        return len(self.emitted)


def fresh_state(beta) -> ConversionState:
    beta = check_beta(beta)
    return ConversionState(Interval(ZERO, state_bound(beta)), (), 0)


def push_bit(state: ConversionState, bit: int, beta):
    """Refine by one bit; returns (new state, tuple of newly certain digits).

    Digits are emitted in order and never retracted.  A cylinder whose
    lower end has left [0,1] (possible only for bit streams no actual
    input produces) can never fit a cell again, so nothing is emitted.
    """
    beta = check_beta(beta)
    if bit not in (0, 1):
        raise DomainError(f"bits must be 0 or 1, got {bit!r}")
    k = state.k + 1
    step = beta ** (-k)
    lo = state.cylinder.lo + (step if bit else ZERO)
    hi = lo + step / (beta - ONE)
    cylinder = Interval(lo, hi)

    emitted = list(state.emitted)
    fresh = []
    while lo <= ONE:
        order = len(emitted) + 1
        idx = dyadic_index(lo, order)
        den = 1 << order
        cell = Interval(Fraction(idx, den), Fraction(idx + 1, den))
        if not interval_in_dyadic_cell(cylinder, cell):
            break
        digit = idx & 1
        emitted.append(digit)
        fresh.append(digit)
    return ConversionState(cylinder, tuple(emitted), k), tuple(fresh)


class KResult(NamedTuple):
    """Bit cost of one digit target; ``exceeded`` marks a cap hit."""

    k: int
    exceeded: bool


def default_k_cap(m: int, beta) -> int:
    """Cap ceil(4*m*log2/log(beta)) + 64: far past the almost-sure cost."""
    return least_power_at_least(beta, 4 * m) + 64


def scan_targets(m_values, beta, k_cap: Optional[int] = None) -> list:
    """Input-independent scan metadata: (m, cap, k_min) per target.

    Below k_min the cylinder is still longer than an order-m cell, so no
    containment test is worth running.  Precompute once when scanning many
    inputs against the same targets.
    """
    beta = check_beta(beta)
    pmq = beta.numerator - beta.denominator
    inv_kappa = Fraction(pmq, beta.denominator)
    out = []
    for m in m_values:
        cap = k_cap if k_cap is not None else default_k_cap(m, beta)
        out.append((m, cap, least_power_at_least(beta, m, coefficient=inv_kappa)))
    return out


def _scan(x: Fraction, targets, beta: Fraction, u_iter) -> list:
    """Integer kernel: least k whose cylinder sits in x's order-m cell.

    Targets ascending in m; returns one KResult per target.  Containment
    is monotone in k for fixed m (cylinders are nested) and the per-m
    answers are nondecreasing, so a single left-to-right scan settles
    every target.  ``u_iter`` yields one (numerator, denominator)
    threshold per consumed bit and must cover the largest cap.
    """
    p, q = beta.numerator, beta.denominator
    pmq = p - q
    xn, xd = x.numerator, x.denominator

    cells = []
    for m, cap, k_min in targets:
        a = (xn << m) // xd
        if a == 1 << m:  # x == 1 sits in the closed last cell
            a -= 1
        cells.append((m, a, a == (1 << m) - 1, cap, k_min))

    results = []
    A, Dq = xn, xd  # state = A / Dq, Dq = xd * q**k
    L = 0  # cylinder lo = L / p**k
    P, Qk = 1, 1  # p**k, q**k
    k = 0
    mi = 0
    while mi < len(cells):
        m, a, last_cell, cap, k_min = cells[mi]
        if k >= k_min and k >= 1 and (L << m) >= a * P:
            edge = L * pmq + Qk * q  # hi = edge / (P * pmq)
            fits = edge <= P * pmq if last_cell else (edge << m) < (a + 1) * P * pmq
            if fits:
                results.append(KResult(k, False))
                mi += 1
                continue
        if k >= cap:  # containment at k == cap still counts
            results.append(KResult(cap, True))
            mi += 1
            continue
        try:
            r, s = next(u_iter)
        except StopIteration:
            raise ConfigurationError(
                f"threshold sequence exhausted after {k} values"
            ) from None
        k += 1
        pA = p * A
        Dq *= q
        P *= p
        Qk *= q
        if pA * s >= r * Dq:
            A = pA - Dq
            L = L * p + Qk
        else:
            A = pA
            L = L * p
    return results


def k_profile(
    x,
    m_values: Sequence[int],
    beta,
    thresholds=None,
    k_cap: Optional[int] = None,
    rng: Optional[SplitMix64] = None,
) -> list:
    """KResult for each target digit count, in one pass over the bit stream."""
    x = as_fraction(x)
    beta = check_beta(beta)
    if not (ZERO <= x <= ONE):
        raise DomainError(f"x must lie in [0,1], got {x}")
    ms = list(m_values)
    if not ms or any(not isinstance(m, int) or m < 1 for m in ms):
        raise DomainError("m_values must be positive integers")
    if any(lo >= hi for lo, hi in zip(ms, ms[1:])):
        raise DomainError("m_values must be strictly increasing")
    if thresholds is None:
        thresholds = ConstantThreshold(1)
    if not (thresholds.threshold_range[1] <= state_bound(beta)):
        raise ConfigurationError(
            f"thresholds must stay within [1, {state_bound(beta)}]"
        )
    targets = scan_targets(ms, beta, k_cap)
    seq = thresholds.realize(targets[-1][1], rng.derive("thresholds") if rng else None)
    return _scan(x, targets, beta, iter([(u.numerator, u.denominator) for u in seq]))


def k_of_m(
    x,
    m: int,
    beta,
    thresholds=None,
    k_cap: Optional[int] = None,
    rng: Optional[SplitMix64] = None,
) -> KResult:
    """Least number of stream bits that makes m binary digits certain."""
    return k_profile(x, [m], beta, thresholds, k_cap, rng)[0]


def uncertainty_interval(bits: Sequence[int], beta_min, beta_max) -> Interval:
    """All inputs consistent with the word when the gain is only known to a range.

    Closed interval; its length stays bounded away from 0 in m whenever the
    word contains a 1 and the range is non-degenerate, which is exactly the
    obstruction to binary conversion under drifting gain.
    """
    beta_min, beta_max = check_beta(beta_min), check_beta(beta_max)
    if beta_min > beta_max:
        raise DomainError(f"need beta_min <= beta_max, got {beta_min} > {beta_max}")
    if len(bits) < 1:
        raise DomainError("need at least one bit")
    lo = ZERO
    hi = ZERO
    inv_lo, inv_hi = 1 / beta_max, 1 / beta_min
    p_lo, p_hi = ONE, ONE
    for b in bits:
        p_lo *= inv_lo
        p_hi *= inv_hi
        if b not in (0, 1):
            raise DomainError(f"bits must be 0 or 1, got {b!r}")
        if b:
            lo += p_lo
            hi += p_hi
    hi += state_bound(beta_max) * p_hi
    return Interval(lo, hi)


def transfer_rows(
    x,
    m_values: Sequence[int],
    beta,
    thresholds=None,
    k_cap: Optional[int] = None,
    rng: Optional[SplitMix64] = None,
) -> list:
    """CSV-ready records: (x, m, k, k - m*log2/log(beta), exceeded)."""
    beta = check_beta(beta)
    ratio = log_ratio_decimal(beta)
    rows = []
    for m, res in zip(m_values, k_profile(x, m_values, beta, thresholds, k_cap, rng)):
        deviation = Decimal(res.k) - Decimal(m) * ratio
        rows.append(
            {
                "x": format_rational(as_fraction(x)),
                "m": m,
                "k": res.k,
                "deviation": decimal_str(deviation, 12),
                "exceeded": int(res.exceeded),
            }
        )
    return rows
