"""Exact output-word laws and their worst-case predictability.

For a fixed or finitely supported random gain, the set of inputs that
produce a given bit word is a finite union over gain realizations of
intervals, and each interval is computable exactly: the state after j
steps is an increasing affine function of the input, so every threshold
comparison splits the consistency interval at one rational point.  Walking
that forward tree gives the exact probability of every word of length m
under Lebesgue-uniform input, from which the min-entropy and the
kappa / beta_min**m ceiling on word probabilities are checked as pure
rational inequalities.  Logarithms only ever appear in reports.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .bitio import word_to_str
from .encoder import (
    ConstantThreshold,
    ExplicitBetas,
    ExplicitThresholds,
    FixedBeta,
    IidSupportBetas,
)
from .errors import ConfigurationError, ResourceBudgetError
from .numerics import (
    ONE,
    ZERO,
    as_fraction,
    cmp_pow2,
    decimal_str,
    format_rational,
    log2_decimal,
    state_bound,
)

ENUMERATION_BUDGET = 1 << 24


@dataclass(frozen=True)
class WordDistribution:
    """Exact law of the first m output bits; only attained words are stored."""

    m: int
    entries: dict

    def __post_init__(self):
        if self.m < 1:
            raise ConfigurationError("word length must be positive")
        total = ZERO
        for word, p in self.entries.items():
            if not (0 <= word < (1 << self.m)):
                raise ConfigurationError(f"word {word} does not fit in {self.m} bits")
            if p <= 0:
                raise ConfigurationError("stored probabilities must be positive")
            total += p
        if total != 1:
            raise ConfigurationError(f"probabilities sum to {total}, not 1")

    def prob(self, word: int) -> Fraction:
        return self.entries.get(word, ZERO)

    def max_probability(self):
        """(word, probability) of the likeliest word; smallest word on ties."""
        best = min(
            self.entries.items(), key=lambda item: (-item[1], item[0])
        )
        return best

    def min_entropy_decimal(self, digits: int = 50) -> Decimal:
        _, p = self.max_probability()
        return -log2_decimal(p, digits)

    def to_csv_rows(self) -> list:
        rows = []
        for word in sorted(self.entries):
            p = self.entries[word]
            rows.append(
                {
                    "word": word_to_str(word, self.m),
                    "p": format_rational(p),
                    "decimal": decimal_str(Decimal(p.numerator) / Decimal(p.denominator), 12),
                }
            )
        return rows


def _gain_choices(betas, m: int) -> list:
    """Per-depth list of (gain, weight) branch options."""
    if isinstance(betas, FixedBeta):
        return [[(betas.value, ONE)]] * m
    if isinstance(betas, ExplicitBetas):
        return [[(g, ONE)] for g in betas.realize(m)]
    if isinstance(betas, IidSupportBetas):
        return [list(zip(betas.values, betas.probs))] * m
    raise ConfigurationError(
        "exact enumeration needs a fixed, explicit, or finite-support gain model"
    )


def word_distribution(betas, thresholds=None, m: int = 1) -> WordDistribution:
    """Exact P(word) for every attainable m-bit word under uniform input.

    Thresholds must be deterministic (constant by default, explicit
    sequences behind the same interface); a random threshold law has no
    single exact distribution to enumerate.
    """
    if not isinstance(m, int) or m < 1:
        raise ConfigurationError(f"m must be a positive integer, got {m!r}")
    if thresholds is None:
        thresholds = ConstantThreshold(1)
    if not isinstance(thresholds, (ConstantThreshold, ExplicitThresholds)):
        raise ConfigurationError("exact enumeration needs deterministic thresholds")

    choices = _gain_choices(betas, m)
    width = max(len(c) for c in choices)
    if (2 * width) ** m > ENUMERATION_BUDGET:
        raise ResourceBudgetError(
            f"(2*{width})**{m} enumeration nodes exceed the budget of 2**24"
        )
    kappa = state_bound(betas.beta_range[1])
    u_seq = thresholds.realize(m)
    for u in u_seq:
        if u > kappa:
            raise ConfigurationError(f"threshold {u} above the state bound {kappa}")

    entries: dict = {}
    # node: (depth, word, consistency lo, hi, weight, slope, shift)
    # state_depth(x) = slope*x - shift on [lo, hi)
    stack = [(0, 0, ZERO, ONE, ONE, ONE, ZERO)]
    while stack:
        depth, word, lo, hi, weight, slope, shift = stack.pop()
        if depth == m:
            entries[word] = entries.get(word, ZERO) + weight * (hi - lo)
            continue
        u = u_seq[depth]
        for gain, gweight in choices[depth]:
            split = (u / gain + shift) / slope
            w = weight * gweight
            zero_hi = min(hi, split)
            if zero_hi > lo:
                stack.append(
                    (depth + 1, word << 1, lo, zero_hi, w, slope * gain, shift * gain)
                )
            one_lo = max(lo, split)
            if hi > one_lo:
                stack.append(
                    (
                        depth + 1,
                        (word << 1) | 1,
                        one_lo,
                        hi,
                        w,
                        slope * gain,
                        shift * gain + 1,
                    )
                )
    return WordDistribution(m, entries)


@dataclass(frozen=True)
class BoundCheck:
    """Exact comparison of the peak word probability against kappa/beta_min**m."""

    m: int
    beta_min: Fraction
    kappa: Fraction
    bound: Fraction
    max_word: int
    max_probability: Fraction
    slack: Fraction
    ok: bool

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "beta_min": format_rational(self.beta_min),
            "kappa": format_rational(self.kappa),
            "bound": format_rational(self.bound),
            "max_word": word_to_str(self.max_word, self.m),
            "max_probability": format_rational(self.max_probability),
            "slack": format_rational(self.slack),
            "ok": self.ok,
            "min_entropy_bits": str(-log2_decimal(self.max_probability)),
            "bound_bits": str(-log2_decimal(self.bound)),
        }


def min_entropy_bound_check(dist: WordDistribution, beta_min, kappa) -> BoundCheck:
    """Verify max_word P(word) <= kappa / beta_min**m, exactly."""
    beta_min, kappa = as_fraction(beta_min), as_fraction(kappa)
    bound = kappa / beta_min**dist.m
    word, p = dist.max_probability()
    return BoundCheck(
        m=dist.m,
        beta_min=beta_min,
        kappa=kappa,
        bound=bound,
        max_word=word,
        max_probability=p,
        slack=bound - p,
        ok=p <= bound,
    )


def is_mk_source(dist: WordDistribution, k) -> bool:
    """True iff the min-entropy is at least k bits: max prob <= 2**(-k)."""
    k = as_fraction(k)
    if k < 0:
        raise ConfigurationError(f"entropy target must be nonnegative, got {k}")
    _, p = dist.max_probability()
    return cmp_pow2(p, -k) <= 0
