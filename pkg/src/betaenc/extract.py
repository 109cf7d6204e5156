"""Post-processing of weakly random words into nearly uniform bits.

Three layers, each checked exactly rather than cited:

* the impossibility construction: for any single-function extractor there
  is a source losing only one bit of min-entropy on which its output is
  constant (``adversarial_source``);
* a seeded Toeplitz-hash extractor whose average-seed distance from
  uniform is computed exhaustively as a rational and compared against the
  universal-hash guarantee (1/2)*sqrt(2**(n-k));
* the inner-product two-source extractor with the same exhaustive
  treatment over pairs of flat sources.

The pipeline at the bottom slices a long encoder stream into blocks and
feeds them to either extractor, enforcing the entropy budget
n <= m*log2(beta_min) - log2(kappa) as an exact power inequality.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .bitio import word_to_bits
from .errors import ConfigurationError, DomainError, ResourceBudgetError
from .numerics import (
    ONE,
    ZERO,
    as_fraction,
    check_beta,
    cmp_pow2,
    decimal_str,
    format_rational,
    least_power_at_least,
    log2_decimal,
    state_bound,
)
from .prng import PRNG_ID, SplitMix64

TWO_SOURCE_WARNING = "two-source extraction requires beta_min > sqrt(2)"

_PARITY16 = None


def _parity16() -> np.ndarray:
    """Parity lookup for 16-bit words, built once."""
    global _PARITY16
    if _PARITY16 is None:
        t = np.arange(1 << 16, dtype=np.uint16)
        t ^= t >> 8
        t ^= t >> 4
        t ^= t >> 2
        t ^= t >> 1
        _PARITY16 = (t & 1).astype(np.uint8)
    return _PARITY16


@dataclass(frozen=True)
class FiniteDistribution:
    """Exact law on n-bit words; only positive-probability words stored."""

    n: int
    entries: dict

    def __post_init__(self):
        if self.n < 1:
            raise ConfigurationError("word length must be positive")
        total = ZERO
        for word, p in self.entries.items():
            if not (0 <= word < (1 << self.n)):
                raise ConfigurationError(f"word {word} does not fit in {self.n} bits")
            if p <= 0:
                raise ConfigurationError("stored probabilities must be positive")
            total += p
        if total != 1:
            raise ConfigurationError(f"probabilities sum to {total}, not 1")

    @classmethod
    def uniform(cls, n: int) -> "FiniteDistribution":
        p = Fraction(1, 1 << n)
        return cls(n, {w: p for w in range(1 << n)})

    @classmethod
    def point_mass(cls, word: int, n: int) -> "FiniteDistribution":
        return cls(n, {word: ONE})

    @classmethod
    def flat(cls, support: Sequence[int], n: int) -> "FiniteDistribution":
        words = sorted(set(int(w) for w in support))
        if not words:
            raise ConfigurationError("flat source needs a non-empty support")
        p = Fraction(1, len(words))
        return cls(n, {w: p for w in words})

    def prob(self, word: int) -> Fraction:
        return self.entries.get(word, ZERO)

    def max_probability(self):
        return min(self.entries.items(), key=lambda item: (-item[1], item[0]))

    def min_entropy_at_least(self, k) -> bool:
        _, p = self.max_probability()
        return cmp_pow2(p, -as_fraction(k)) <= 0


def tv_distance(p: FiniteDistribution, q: FiniteDistribution) -> Fraction:
    """Exact (1/2) * sum over words of |p - q|."""
    if p.n != q.n:
        raise DomainError(f"length mismatch: {p.n} vs {q.n}")
    words = set(p.entries) | set(q.entries)
    return sum((abs(p.prob(w) - q.prob(w)) for w in words), ZERO) / 2


def tv_from_uniform(dist: FiniteDistribution) -> Fraction:
    n = dist.n
    u = Fraction(1, 1 << n)
    onsupport = sum((abs(p - u) for p in dist.entries.values()), ZERO)
    return (onsupport + ((1 << n) - len(dist.entries)) * u) / 2


def adversarial_source(ext: Callable, m: int) -> FiniteDistribution:
    """Flat source with min-entropy >= m-1 on which ``ext`` is constant.

    Splits {0,1}**m by the output of ext (a callable on m-bit tuples) and
    returns the uniform law on the larger class, so any one-function
    post-processor fails maximally on an almost-full-entropy source.
    """
    if m < 1 or m > 24:
        raise ResourceBudgetError(f"need 1 <= m <= 24 to enumerate, got {m}")
    classes = ([], [])
    for word in range(1 << m):
        value = ext(word_to_bits(word, m))
        if value not in (0, 1):
            raise DomainError(f"extractor returned {value!r}, not a bit")
        classes[value].append(word)
    chosen = classes[0] if len(classes[0]) >= len(classes[1]) else classes[1]
    return FiniteDistribution.flat(chosen, m)


# ---------------------------------------------------------------------------
# seeded extraction


@dataclass(frozen=True)
class SeededExtractor:
    """Toeplitz hash {0,1}**m x {0,1}**d -> {0,1}**n with d = m + n - 1.

    Row i of the matrix is the window (z >> i) & (2**m - 1) of the seed,
    which realizes the Toeplitz structure with first row z_n..z_(n+m-1)
    and first column z_n, z_(n-1), .., z_1 (seed bits numbered MSB-first).
    """

    m: int
    n: int
    kind: str = "toeplitz"

    def __post_init__(self):
        if not (1 <= self.n <= self.m):
            raise ConfigurationError(f"need 1 <= n <= m, got n={self.n}, m={self.m}")
        if self.kind != "toeplitz":
            raise ConfigurationError(f"unknown extractor kind {self.kind!r}")

    @property
    def d(self) -> int:
        return self.m + self.n - 1

    def apply(self, x: int, z: int) -> int:
        if not (0 <= x < (1 << self.m)):
            raise DomainError(f"input {x} does not fit in {self.m} bits")
        if not (0 <= z < (1 << self.d)):
            raise DomainError(f"seed {z} does not fit in {self.d} bits")
        mask = (1 << self.m) - 1
        y = 0
        for i in range(self.n):
            y = (y << 1) | (((z >> i) & mask & x).bit_count() & 1)
        return y

    def to_json(self) -> dict:
        return {"kind": self.kind, "m": self.m, "n": self.n, "d": self.d}


def seeded_extract(x_bits: Sequence[int], z_bits: Sequence[int], n: int):
    """Bit-sequence front end for the Toeplitz hash."""
    m = len(x_bits)
    ext = SeededExtractor(m, n)
    if len(z_bits) != ext.d:
        raise DomainError(f"seed must have m+n-1 = {ext.d} bits, got {len(z_bits)}")
    x = 0
    for b in x_bits:
        if b not in (0, 1):
            raise DomainError(f"bits must be 0 or 1, got {b!r}")
        x = (x << 1) | b
    z = 0
    for b in z_bits:
        if b not in (0, 1):
            raise DomainError(f"bits must be 0 or 1, got {b!r}")
        z = (z << 1) | b
    return word_to_bits(ext.apply(x, z), n)


def avg_seed_tv(source: FiniteDistribution, n: int) -> Fraction:
    """Exact seed-averaged TV of the hash output from uniform.

    Equals the TV between the joint (seed, output) law and seed x uniform.
    Enumerates every seed; meant for small m (the flat-source harness
    below is the fast path).
    """
    ext = SeededExtractor(source.n, n)
    if ext.d > 20:
        raise ResourceBudgetError(f"2**{ext.d} seeds is past the exhaustive budget")
    u = Fraction(1, 1 << n)
    items = sorted(source.entries.items())
    total = ZERO
    for z in range(1 << ext.d):
        cond: dict = {}
        for x, p in items:
            y = ext.apply(x, z)
            cond[y] = cond.get(y, ZERO) + p
        tv = sum((abs(p - u) for p in cond.values()), ZERO)
        tv += ((1 << n) - len(cond)) * u
        total += tv / 2
    return total / (1 << ext.d)


def _output_table(m: int, n: int) -> np.ndarray:
    """Y[z, x] for every seed and input word, as a (2**d, 2**m) uint8 array."""
    d = m + n - 1
    if m > 14 or d > 16:
        raise ResourceBudgetError(f"output table for m={m}, n={n} is past the budget")
    par = _parity16()
    mask = (1 << m) - 1
    zs = np.arange(1 << d, dtype=np.uint16)[:, None]
    xs = np.arange(1 << m, dtype=np.uint16)[None, :]
    table = np.zeros((1 << d, 1 << m), dtype=np.uint8)
    for i in range(n):
        rows = (zs >> i) & mask
        table = (table << 1) | par[rows & xs]
    return table


def flat_avg_seed_tv(m: int, n: int, supports: Sequence) -> list:
    """avg_seed_tv for many flat sources at once; exact Fractions out.

    For each support S the conditional output law given seed z is
    count/|S|, so the seed-averaged TV is an integer sum divided by
    2**(d+1) * |S| * 2**n; everything stays in integers until the end.
    """
    table = _output_table(m, n)
    d = m + n - 1
    seed_ids = np.arange(1 << d, dtype=np.int64)[:, None] << n
    out = []
    for support in supports:
        sup = np.asarray(sorted(support), dtype=np.int64)
        size = len(sup)
        if size == 0:
            raise ConfigurationError("flat source needs a non-empty support")
        cols = table[:, sup].astype(np.int64)
        counts = np.bincount((seed_ids | cols).ravel(), minlength=(1 << (d + n)))
        deviation = np.abs(counts * (1 << n) - size).sum()
        # the zero-count rows of each seed block contribute |0 - size/2**n|
        # per missing word; bincount already yields zeros there, and
        # |0*2**n - size| = size covers exactly that term
        out.append(Fraction(int(deviation), (1 << (d + 1)) * size * (1 << n)))
    return out


def leftover_hash_bound_ok(avg_tv: Fraction, n: int, k) -> bool:
    """avg_tv <= (1/2) * sqrt(2**(n-k)), decided exactly."""
    k = as_fraction(k)
    return cmp_pow2(avg_tv, (Fraction(n) - k - 2) / 2) <= 0


def all_flat_sources(m: int, k: int):
    """Every flat (m, k)-source; only sane for tiny 2**m."""
    size = 1 << k
    if (1 << m) > 64:
        raise ResourceBudgetError("full flat-source enumeration needs 2**m <= 64")
    for support in itertools.combinations(range(1 << m), size):
        yield support


def subcube_supports(m: int, k: int) -> list:
    """All axis-aligned subcubes of dimension k: fix m-k bits, free the rest."""
    out = []
    for free in itertools.combinations(range(m), k):
        fixed = [i for i in range(m) if i not in free]
        for assignment in range(1 << (m - k)):
            base = 0
            for j, pos in enumerate(fixed):
                if (assignment >> j) & 1:
                    base |= 1 << pos
            words = []
            for choice in range(1 << k):
                w = base
                for j, pos in enumerate(free):
                    if (choice >> j) & 1:
                        w |= 1 << pos
                words.append(w)
            out.append(tuple(sorted(words)))
    return out


def flat_source_family(m: int, k: int, seed: int = 0, random_count: int = 16) -> list:
    """The flat (m,k)-sources the exhaustive harness runs against.

    Prefix, suffix, and evenly strided supports, every axis-aligned
    subcube, and ``random_count`` seeded random supports.  Any flat source
    obeys the leftover-hash bound, so the family is a coverage choice, not
    a hypothesis; the unit suite additionally enumerates literally all
    flat sources at tiny sizes.
    """
    size = 1 << k
    total = 1 << m
    if size > total:
        raise ConfigurationError(f"2**{k} supports do not fit in {m} bits")
    family = {
        tuple(range(size)),
        tuple(range(total - size, total)),
        tuple(range(0, total, total // size)),
    }
    family.update(subcube_supports(m, k))
    rng = SplitMix64(seed).derive("flat-family", m, k)
    for _ in range(random_count):
        family.add(tuple(sorted(rng.sample_distinct(total, size))))
    return sorted(family)


# ---------------------------------------------------------------------------
# two-source extraction


def inner_product_bit(x: int, y: int) -> int:
    return (x & y).bit_count() & 1


def two_source_extract(x_bits: Sequence[int], y_bits: Sequence[int]) -> int:
    """GF(2) inner product of two equal-length words: one output bit."""
    if len(x_bits) != len(y_bits):
        raise DomainError(f"length mismatch: {len(x_bits)} vs {len(y_bits)}")
    acc = 0
    for a, b in zip(x_bits, y_bits):
        if a not in (0, 1) or b not in (0, 1):
            raise DomainError("bits must be 0 or 1")
        acc ^= a & b
    return acc


def two_source_tv(support_x: Sequence[int], support_y: Sequence[int]) -> Fraction:
    """Exact TV from uniform of the inner-product bit over flat sources."""
    xs = np.asarray(sorted(support_x), dtype=np.uint16)
    ys = np.asarray(sorted(support_y), dtype=np.uint16)
    if xs.size == 0 or ys.size == 0:
        raise ConfigurationError("flat source needs a non-empty support")
    par = _parity16()
    odd = int(par[xs[:, None] & ys[None, :]].sum())
    return abs(Fraction(odd, xs.size * ys.size) - Fraction(1, 2))


def two_source_bound_ok(tv: Fraction, m: int, k1: int, k2: int) -> bool:
    """tv <= 2**((m + 2 - k1 - k2)/2): the Hadamard/inner-product target."""
    return cmp_pow2(tv, Fraction(m + 2 - k1 - k2, 2)) <= 0


# ---------------------------------------------------------------------------
# stream pipeline


@dataclass(frozen=True)
class PipelineConfig:
    """Block slicing and extraction parameters for one stream run."""

    mode: str
    block_bits: int
    beta_min: Fraction
    beta_max: Fraction
    out_bits: int = 1
    gap_bits: int = 0
    seed: Optional[int] = None
    seed_mode: str = "explicit"

    def __post_init__(self):
        if self.mode not in ("seeded", "two-source"):
            raise ConfigurationError(f"mode must be seeded or two-source, got {self.mode!r}")
        if self.block_bits < 1:
            raise ConfigurationError("block_bits must be >= 1")
        if self.gap_bits < 0:
            raise ConfigurationError("gap_bits must be >= 0")
        object.__setattr__(self, "beta_min", check_beta(self.beta_min))
        object.__setattr__(self, "beta_max", check_beta(self.beta_max))
        if self.beta_min > self.beta_max:
            raise ConfigurationError("need beta_min <= beta_max")
        if self.mode == "two-source":
            if self.out_bits != 1:
                raise ConfigurationError("two-source mode emits exactly 1 bit per pair")
        else:
            if not (1 <= self.out_bits <= self.block_bits):
                raise ConfigurationError("need 1 <= out_bits <= block_bits")
            if self.seed_mode not in ("explicit", "stream"):
                raise ConfigurationError("seed_mode must be explicit or stream")
            if self.seed_mode == "explicit" and self.seed is None:
                raise ConfigurationError("explicit seed mode needs seed=")


def entropy_budget_ok(block_bits: int, out_bits: int, beta_min, beta_max) -> bool:
    """out_bits <= block_bits*log2(beta_min) - log2(kappa), exactly."""
    kappa = state_bound(as_fraction(beta_max))
    return (1 << out_bits) * kappa <= as_fraction(beta_min) ** block_bits


def max_extractable_bits(block_bits: int, beta_min, beta_max) -> int:
    """Largest whole out_bits the budget allows (0 when none)."""
    kappa = state_bound(as_fraction(beta_max))
    power = as_fraction(beta_min) ** block_bits
    n = 0
    value = 2 * kappa
    while value <= power:
        n += 1
        value *= 2
    return n


def required_block_length(n: int, alpha, beta_min) -> int:
    """Least block length with block*(1-alpha)*log2(beta_min) >= n bits.

    This is the rate statement "m = (1/(1-alpha)) * n * log2/log(beta_min)"
    rounded up, evaluated without floating point.
    """
    if not isinstance(n, int) or n < 1:
        raise DomainError(f"n must be a positive integer, got {n!r}")
    alpha = as_fraction(alpha)
    if not (0 <= alpha < 1):
        raise DomainError(f"alpha must lie in [0,1), got {alpha}")
    beta_min = check_beta(beta_min)
    a, b = alpha.numerator, alpha.denominator
    least = least_power_at_least(beta_min, n * b)
    return -(-least // (b - a))


def _word_from_bits(chunk: np.ndarray) -> int:
    word = 0
    for b in chunk:
        word = (word << 1) | int(b)
    return word


def pipeline_extract(bits, config: PipelineConfig):
    """Slice a stream into blocks, extract, and report the entropy accounting.

    Returns (extracted bits as a uint8 array, report dict).  Two-source
    mode pairs consecutive blocks; seeded mode hashes every block with one
    Toeplitz seed (explicit from the PRNG, or - experimentally, with no
    uniformity claim - read off the head of the stream itself).
    """
    stream = np.asarray(bits, dtype=np.uint8)
    if stream.size and stream.max() > 1:
        raise DomainError("bit stream contains non-bits")
    m, g, n = config.block_bits, config.gap_bits, config.out_bits

    warnings = []
    if config.mode == "two-source" and config.beta_min**2 <= 2:
        warnings.append(TWO_SOURCE_WARNING)
    if not entropy_budget_ok(m, n, config.beta_min, config.beta_max):
        raise ConfigurationError(
            f"out_bits={n} exceeds the entropy budget of a {m}-bit block "
            f"(max {max_extractable_bits(m, config.beta_min, config.beta_max)})"
        )

    start = 0
    seed_word = None
    seed_origin = None
    if config.mode == "seeded":
        ext = SeededExtractor(m, n)
        if config.seed_mode == "explicit":
            seed_word = SplitMix64(config.seed).derive("toeplitz").bits(ext.d)
            seed_origin = {"mode": "explicit", "prng": PRNG_ID, "seed": config.seed}
        else:
            if stream.size < ext.d:
                raise ConfigurationError(
                    f"stream too short to carve a {ext.d}-bit seed from"
                )
            seed_word = _word_from_bits(stream[: ext.d])
            start = ext.d + g
            seed_origin = {
                "mode": "stream",
                "note": "weak seed carved from the stream head; experimental, "
                "no uniformity claim",
            }

    step = m + g
    blocks = []
    pos = start
    while pos + m <= stream.size:
        blocks.append(stream[pos : pos + m])
        pos += step

    out = []
    pairs = 0
    if config.mode == "seeded":
        for block in blocks:
            out.extend(word_to_bits(ext.apply(_word_from_bits(block), seed_word), n))
    else:
        pairs = len(blocks) // 2
        for j in range(pairs):
            x, y = blocks[2 * j], blocks[2 * j + 1]
            out.append(int(np.bitwise_and(x, y).sum()) & 1)

    kappa = state_bound(config.beta_max)
    with localcontext() as ctx:
        ctx.prec = 60
        budget_dec = Decimal(m) * log2_decimal(config.beta_min) - log2_decimal(kappa)
        rate_unit = Decimal(1) / log2_decimal(config.beta_min)  # log2/log(beta_min)
        ideal = Decimal(n) * rate_unit
        overhead = Decimal(m) / ideal
        implied_alpha = 1 - ideal / Decimal(m)
        report = {
            "mode": config.mode,
            "block_bits": m,
            "gap_bits": g,
            "out_bits": n,
            "blocks": len(blocks),
            "pairs": pairs if config.mode == "two-source" else None,
            "bits_in": int(stream.size),
            "bits_out": len(out),
            "beta_min": format_rational(config.beta_min),
            "beta_max": format_rational(config.beta_max),
            "kappa": format_rational(kappa),
            "entropy_budget_bits": decimal_str(budget_dec, 12),
            "max_whole_out_bits": max_extractable_bits(
                m, config.beta_min, config.beta_max
            ),
            "rate_overhead_factor": decimal_str(overhead, 12),
            "implied_alpha": decimal_str(implied_alpha, 12),
            "seed": seed_origin,
            "warnings": warnings,
        }
    return np.array(out, dtype=np.uint8), report
