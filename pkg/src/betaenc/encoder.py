"""Amplify-and-quantize bit generator with drifting gain and threshold.

One step takes the state x to beta*x - b where the bit b is 1 exactly when
beta*x >= u (a tie quantizes to 1).  The gain beta stays in (1,2) and the
threshold u may move anywhere in [1, 1/(beta_max-1)] from step to step;
under those constraints the state never leaves [0, 1/(beta_max-1)], so the
loop runs forever without saturating.  Gains and thresholds are described
by small process objects that either hold fixed values or draw them through
the named PRNG, which keeps every run replayable from a seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigurationError, DomainError
from .numerics import (
    EXACT_POLICY,
    ONE,
    ZERO,
    PrecisionMode,
    PrecisionPolicy,
    as_fraction,
    check_beta,
    cmp_pow2,
    format_rational,
    round_to_bits,
    state_bound,
)
from .prng import PRNG_ID, SplitMix64


def _coerce_tuple(values, check) -> tuple:
    out = tuple(check(as_fraction(v)) for v in values)
    if not out:
        raise ConfigurationError("explicit sequences must be non-empty")
    return out


def _resolve_rng(seed, rng, label: str) -> SplitMix64:
    if seed is not None:
        return SplitMix64(seed).derive(label)
    if rng is None:
        raise ConfigurationError(
            f"{label} process draws random values; pass rng= or set seed="
        )
    return rng


# ---------------------------------------------------------------------------
# gain processes


@dataclass(frozen=True)
class FixedBeta:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", check_beta(as_fraction(self.value)))

    is_random = False

    @property
    def beta_range(self) -> tuple:
        return (self.value, self.value)

    def realize(self, n_steps: int, rng: Optional[SplitMix64] = None) -> tuple:
        return (self.value,) * n_steps

    def to_json(self) -> dict:
        return {"kind": "fixed", "beta": format_rational(self.value)}


@dataclass(frozen=True)
class ExplicitBetas:
    values: tuple

    def __post_init__(self):
        object.__setattr__(self, "values", _coerce_tuple(self.values, check_beta))

    is_random = False

    @property
    def beta_range(self) -> tuple:
        return (min(self.values), max(self.values))

    def realize(self, n_steps: int, rng: Optional[SplitMix64] = None) -> tuple:
        if n_steps > len(self.values):
            raise ConfigurationError(
                f"need {n_steps} gain values, sequence has {len(self.values)}"
            )
        return self.values[:n_steps]

    def to_json(self) -> dict:
        return {"kind": "explicit", "betas": [format_rational(v) for v in self.values]}


@dataclass(frozen=True)
class IidSupportBetas:
    """I.i.d. gains on a finite support; the exact-enumeration model."""

    values: tuple
    probs: Optional[tuple] = None
    seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "values", _coerce_tuple(self.values, check_beta))
        if self.probs is None:
            n = len(self.values)
            object.__setattr__(self, "probs", (Fraction(1, n),) * n)
        else:
            probs = tuple(as_fraction(p) for p in self.probs)
            if len(probs) != len(self.values):
                raise ConfigurationError("one probability per support value")
            if any(p < 0 for p in probs) or sum(probs) != 1:
                raise ConfigurationError("probabilities must be >= 0 and sum to 1")
            object.__setattr__(self, "probs", probs)

    is_random = True

    @property
    def beta_range(self) -> tuple:
        return (min(self.values), max(self.values))

    def realize(self, n_steps: int, rng: Optional[SplitMix64] = None) -> tuple:
        rng = _resolve_rng(self.seed, rng, "gain")
        return tuple(self.values[rng.choose_weighted(self.probs)] for _ in range(n_steps))

    def to_json(self) -> dict:
        return {
            "kind": "iid-support",
            "values": [format_rational(v) for v in self.values],
            "probs": [format_rational(p) for p in self.probs],
            "seed": self.seed,
        }


@dataclass(frozen=True)
class UniformBetas:
    """Monte-Carlo gain model: dyadic draws from [lo, hi], kept rational."""

    lo: Fraction
    hi: Fraction
    seed: Optional[int] = None
    precision_bits: int = 64

    def __post_init__(self):
        lo, hi = check_beta(as_fraction(self.lo)), check_beta(as_fraction(self.hi))
        if lo > hi:
            raise ConfigurationError("need lo <= hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    is_random = True

    @property
    def beta_range(self) -> tuple:
        return (self.lo, self.hi)

    def realize(self, n_steps: int, rng: Optional[SplitMix64] = None) -> tuple:
        rng = _resolve_rng(self.seed, rng, "gain")
        span = self.hi - self.lo
        return tuple(self.lo + span * rng.odd_dyadic(self.precision_bits) for _ in range(n_steps))

    def to_json(self) -> dict:
        return {
            "kind": "uniform",
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "seed": self.seed,
            "precision_bits": self.precision_bits,
        }


# ---------------------------------------------------------------------------
# threshold processes


@dataclass(frozen=True)
class ConstantThreshold:
    value: Fraction

    def __post_init__(self):
        value = as_fraction(self.value)
        if value < 1:
            raise ConfigurationError(f"thresholds start at 1, got {value}")
        object.__setattr__(self, "value", value)

    is_random = False

    @property
    def threshold_range(self) -> tuple:
        return (self.value, self.value)

    def realize(self, n_steps: int, rng: Optional[SplitMix64] = None) -> tuple:
        return (self.value,) * n_steps

    def to_json(self) -> dict:
        return {"kind": "constant", "u": format_rational(self.value)}


@dataclass(frozen=True)
class ExplicitThresholds:
    values: tuple

    def __post_init__(self):
        def check(u):
            if u < 1:
                raise ConfigurationError(f"thresholds start at 1, got {u}")
            return u

        object.__setattr__(self, "values", _coerce_tuple(self.values, check))

    is_random = False

    @property
    def threshold_range(self) -> tuple:
        return (min(self.values), max(self.values))

    def realize(self, n_steps: int, rng: Optional[SplitMix64] = None) -> tuple:
        if n_steps > len(self.values):
            raise ConfigurationError(
                f"need {n_steps} threshold values, sequence has {len(self.values)}"
            )
        return self.values[:n_steps]

    def to_json(self) -> dict:
        return {"kind": "explicit", "us": [format_rational(v) for v in self.values]}


@dataclass(frozen=True)
class UniformThresholds:
    """Fresh dyadic threshold draw from [lo, hi] at every step."""

    lo: Fraction
    hi: Fraction
    seed: Optional[int] = None
    precision_bits: int = 64

    def __post_init__(self):
        lo, hi = as_fraction(self.lo), as_fraction(self.hi)
        if not (1 <= lo <= hi):
            raise ConfigurationError(f"need 1 <= lo <= hi, got [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    is_random = True

    @property
    def threshold_range(self) -> tuple:
        return (self.lo, self.hi)

    def realize(self, n_steps: int, rng: Optional[SplitMix64] = None) -> tuple:
        rng = _resolve_rng(self.seed, rng, "threshold")
        span = self.hi - self.lo
        return tuple(self.lo + span * rng.odd_dyadic(self.precision_bits) for _ in range(n_steps))

    def to_json(self) -> dict:
        return {
            "kind": "uniform",
            "lo": format_rational(self.lo),
            "hi": format_rational(self.hi),
            "seed": self.seed,
            "precision_bits": self.precision_bits,
        }


# ---------------------------------------------------------------------------
# the loop


@dataclass(frozen=True)
class EncoderTrace:
    """Full record of one run: inputs, realized sequences, bits, states.

    In exact mode states are the true rationals and the telescoping identity
    x0 = sum_i b_i / (beta_1...beta_i) + x_n / (beta_1...beta_n) holds with
    equality.  In float emulation mode states carry rounding error and
    ``near_ties`` marks steps whose comparator margin fell below
    2**(-float_bits/2), where the emulated bit can disagree with the exact
    one.
    """

    x0: Fraction
    bits: tuple
    states: tuple
    betas: tuple
    thresholds: tuple
    policy: PrecisionPolicy = EXACT_POLICY
    near_ties: Optional[tuple] = None
    rng_info: Optional[dict] = field(default=None, compare=False)

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def flagged(self) -> bool:
        return bool(self.near_ties) and any(self.near_ties)

    def to_json(self) -> dict:
        doc = {
            "prng": PRNG_ID,
            "x0": format_rational(self.x0),
            "bits": "".join(str(b) for b in self.bits),
            "states": [format_rational(x) for x in self.states],
            "betas": [format_rational(b) for b in self.betas],
            "thresholds": [format_rational(u) for u in self.thresholds],
            "mode": self.policy.mode.value,
        }
        if self.policy.mode is PrecisionMode.FLOAT_FAST:
            doc["float_bits"] = self.policy.float_bits
            doc["near_ties"] = list(map(int, self.near_ties or ()))
        if self.rng_info is not None:
            doc["rng"] = self.rng_info
        return doc


def apply_Tu(y: Fraction, beta: Fraction, u: Fraction):
    """One quantize-and-update step; returns (bit, next state)."""
    beta = check_beta(beta)
    y, u = as_fraction(y), as_fraction(u)
    bound = state_bound(beta)
    if not (ZERO <= y <= bound):
        raise DomainError(f"state {y} outside [0, {bound}]")
    if not (ONE <= u <= bound):
        raise DomainError(f"threshold {u} outside [1, {bound}]")
    if y < u / beta:
        return 0, beta * y
    return 1, beta * y - 1


def _check_thresholds(thresholds: Sequence[Fraction], kappa: Fraction) -> None:
    for u in thresholds:
        if not (ONE <= u <= kappa):
            raise ConfigurationError(
                f"threshold {u} outside admissible range [1, {kappa}]"
            )


def encode(
    x0,
    betas,
    thresholds,
    n_steps: int,
    precision: PrecisionPolicy = EXACT_POLICY,
    rng: Optional[SplitMix64] = None,
) -> EncoderTrace:
    """Run the loop for n_steps from x0 in [0,1] and record everything.

    Random processes draw from ``rng`` (split per role) unless they carry
    their own seed.  The trace is a pure function of x0 and the realized
    sequences.
    """
    x0 = as_fraction(x0)
    if not (ZERO <= x0 <= ONE):
        raise DomainError(f"x0 must lie in [0,1], got {x0}")
    if not isinstance(n_steps, int) or n_steps < 1:
        raise DomainError(f"n_steps must be a positive integer, got {n_steps!r}")

    beta_seq = betas.realize(n_steps, rng.derive("betas") if rng else None)
    u_seq = thresholds.realize(n_steps, rng.derive("thresholds") if rng else None)
    kappa = state_bound(betas.beta_range[1])
    _check_thresholds(u_seq, kappa)

    rng_info = None
    if betas.is_random or thresholds.is_random:
        rng_info = {
            "prng": PRNG_ID,
            "ambient": rng.describe() if rng is not None else None,
            "beta_seed": getattr(betas, "seed", None),
            "threshold_seed": getattr(thresholds, "seed", None),
        }

    if precision.mode is PrecisionMode.EXACT:
        bits, states = _run_exact(x0, beta_seq, u_seq)
        near = None
    else:
        bits, states, near = _run_float_emulated(x0, beta_seq, u_seq, precision.float_bits)
    return EncoderTrace(
        x0=x0,
        bits=bits,
        states=states,
        betas=beta_seq,
        thresholds=u_seq,
        policy=precision,
        near_ties=near,
        rng_info=rng_info,
    )


def _run_exact(x0, beta_seq, u_seq):
    bits = []
    states = []
    x = x0
    for beta, u in zip(beta_seq, u_seq):
        y = beta * x
        b = 1 if y >= u else 0
        x = y - b
        bits.append(b)
        states.append(x)
    return tuple(bits), tuple(states)


def _run_float_emulated(x0, beta_seq, u_seq, float_bits: int):
    # Software model of round-to-nearest-even floats with float_bits of
    # mantissa; every arithmetic result is rounded, comparisons are not.
    half_margin = Fraction(-float_bits, 2)
    bits = []
    states = []
    near = []
    x = round_to_bits(x0, float_bits)
    for beta, u in zip(beta_seq, u_seq):
        rb = round_to_bits(beta, float_bits)
        ru = round_to_bits(u, float_bits)
        y = round_to_bits(rb * x, float_bits)
        near.append(cmp_pow2(abs(y - ru), half_margin) < 0)
        b = 1 if y >= ru else 0
        x = round_to_bits(y - b, float_bits) if b else y
        bits.append(b)
        states.append(x)
    return tuple(bits), tuple(states), tuple(near)


def reconstruct_partial(trace: EncoderTrace, n: int) -> Fraction:
    """Partial value sum_{i<=n} b_i / (beta_1...beta_i) of a trace.

    Exact mode only: the residual x0 - result equals x_n / (beta_1...beta_n)
    and sits in [0, kappa / beta_min**n].
    """
    if trace.policy.mode is not PrecisionMode.EXACT:
        raise ConfigurationError("reconstruction is an exact-mode contract")
    if not (0 <= n <= len(trace)):
        raise DomainError(f"n must be in [0, {len(trace)}], got {n}")
    total = ZERO
    prod = ONE
    for i in range(n):
        prod *= trace.betas[i]
        if trace.bits[i]:
            total += 1 / prod
    return total


def encode_bits(x0, beta, u, n_bits: int) -> np.ndarray:
    """Fast exact bit stream for fixed gain and constant threshold.

    Runs the loop on scaled integers (state = A/D) so no Fraction objects
    are built; intended for the long streams the statistical tests and the
    extraction pipeline consume.
    """
    x0, beta, u = as_fraction(x0), check_beta(beta), as_fraction(u)
    if not (ZERO <= x0 <= ONE):
        raise DomainError(f"x0 must lie in [0,1], got {x0}")
    if not (ONE <= u <= state_bound(beta)):
        raise DomainError(f"threshold {u} outside [1, {state_bound(beta)}]")
    if n_bits < 0:
        raise DomainError("n_bits must be nonnegative")
    p, q = beta.numerator, beta.denominator
    r, s = u.numerator, u.denominator
    A, D = x0.numerator, x0.denominator
    out = np.empty(n_bits, dtype=np.uint8)
    for i in range(n_bits):
        A *= p
        D *= q
        if A * s >= r * D:
            out[i] = 1
            A -= D
        else:
            out[i] = 0
    return out
