from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from betaenc.bitio import word_to_bits
from betaenc.encoder import encode_bits
from betaenc.errors import ConfigurationError, DomainError, ResourceBudgetError
from betaenc.extract import (
    TWO_SOURCE_WARNING,
    FiniteDistribution,
    PipelineConfig,
    SeededExtractor,
    adversarial_source,
    all_flat_sources,
    avg_seed_tv,
    entropy_budget_ok,
    flat_avg_seed_tv,
    flat_source_family,
    inner_product_bit,
    leftover_hash_bound_ok,
    max_extractable_bits,
    pipeline_extract,
    required_block_length,
    seeded_extract,
    subcube_supports,
    tv_distance,
    tv_from_uniform,
    two_source_bound_ok,
    two_source_extract,
    two_source_tv,
)

F = Fraction


def test_distribution_constructors():
    u = FiniteDistribution.uniform(2)
    assert u.prob(3) == F(1, 4)
    point = FiniteDistribution.point_mass(5, 3)
    assert point.prob(5) == 1 and point.prob(0) == 0
    flat = FiniteDistribution.flat([3, 1, 3], 2)
    assert flat.entries == {1: F(1, 2), 3: F(1, 2)}
    with pytest.raises(ConfigurationError):
        FiniteDistribution.flat([], 2)
    with pytest.raises(ConfigurationError):
        FiniteDistribution(2, {0: F(1, 2)})
    with pytest.raises(ConfigurationError):
        FiniteDistribution(1, {2: F(1)})


def test_min_entropy_predicate():
    assert FiniteDistribution.uniform(3).min_entropy_at_least(3)
    assert not FiniteDistribution.uniform(3).min_entropy_at_least(F(31, 10))
    assert FiniteDistribution.flat(range(4), 4).min_entropy_at_least(2)


def test_tv_basics():
    u = FiniteDistribution.uniform(2)
    point = FiniteDistribution.point_mass(0, 2)
    assert tv_distance(u, u) == 0
    assert tv_distance(u, point) == F(3, 4)
    assert tv_from_uniform(point) == F(3, 4)
    assert tv_from_uniform(u) == 0
    with pytest.raises(DomainError):
        tv_distance(u, FiniteDistribution.uniform(3))


@given(st.integers(min_value=1, max_value=5), st.data())
@settings(max_examples=40)
def test_tv_matches_direct_oracle(n, data):
    words = 1 << n
    weights = data.draw(
        st.lists(st.integers(min_value=0, max_value=8), min_size=words, max_size=words)
    )
    total = sum(weights) or 1
    entries = {w: F(c, total) for w, c in enumerate(weights) if c}
    if not entries:
        entries = {0: F(1)}
    dist = FiniteDistribution(n, entries)
    full = {w: dist.prob(w) for w in range(words)}
    uniform = {w: F(1, words) for w in range(words)}
    assert tv_from_uniform(dist) == oracles.tv_direct(full, uniform)
    assert tv_distance(dist, FiniteDistribution.uniform(n)) == tv_from_uniform(dist)


def test_adversarial_source_parity():
    def parity(bits):
        return sum(bits) & 1

    src = adversarial_source(parity, 2)
    # even-parity class: {00, 11}
    assert src.entries == {0: F(1, 2), 3: F(1, 2)}
    assert src.min_entropy_at_least(1)
    # the extractor is constant on the support, so its output is a point mass
    out = {parity(word_to_bits(w, 2)) for w in src.entries}
    assert len(out) == 1
    assert tv_from_uniform(FiniteDistribution.point_mass(out.pop(), 1)) == F(1, 2)


def test_adversarial_source_first_bit():
    src = adversarial_source(lambda bits: bits[0], 2)
    assert src.entries == {0: F(1, 2), 1: F(1, 2)}


def test_adversarial_source_validation():
    with pytest.raises(ResourceBudgetError):
        adversarial_source(lambda bits: 0, 25)
    with pytest.raises(DomainError):
        adversarial_source(lambda bits: 2, 3)


def test_extractor_shape_and_validation():
    ext = SeededExtractor(4, 2)
    assert ext.d == 5
    assert ext.to_json() == {"kind": "toeplitz", "m": 4, "n": 2, "d": 5}
    with pytest.raises(ConfigurationError):
        SeededExtractor(4, 5)
    with pytest.raises(ConfigurationError):
        SeededExtractor(4, 0)
    with pytest.raises(ConfigurationError):
        SeededExtractor(4, 2, kind="vandermonde")
    with pytest.raises(DomainError):
        ext.apply(16, 0)
    with pytest.raises(DomainError):
        ext.apply(0, 32)


def test_two_by_one_hash_is_the_inner_product():
    # m=2, n=1: y = z1*x1 xor z2*x2 with everything written MSB-first
    ext = SeededExtractor(2, 1)
    for x in range(4):
        x1, x2 = (x >> 1) & 1, x & 1
        for z in range(4):
            z1, z2 = (z >> 1) & 1, z & 1
            assert ext.apply(x, z) == ((z1 & x1) ^ (z2 & x2))


@given(
    st.integers(min_value=1, max_value=6),
    st.integers(min_value=1, max_value=6),
    st.data(),
)
@settings(max_examples=60)
def test_hash_matches_matrix_oracle(m, n, data):
    if n > m:
        m, n = n, m
    d = m + n - 1
    x = data.draw(st.integers(min_value=0, max_value=(1 << m) - 1))
    z = data.draw(st.integers(min_value=0, max_value=(1 << d) - 1))
    ext = SeededExtractor(m, n)
    x_bits = word_to_bits(x, m)
    z_bits = word_to_bits(z, d)
    assert word_to_bits(ext.apply(x, z), n) == oracles.toeplitz_apply(x_bits, z_bits, n)
    assert seeded_extract(x_bits, z_bits, n) == oracles.toeplitz_apply(x_bits, z_bits, n)


@given(st.data())
@settings(max_examples=40)
def test_hash_is_linear_in_the_input(data):
    m, n = 6, 3
    ext = SeededExtractor(m, n)
    x = data.draw(st.integers(min_value=0, max_value=63))
    x2 = data.draw(st.integers(min_value=0, max_value=63))
    z = data.draw(st.integers(min_value=0, max_value=(1 << ext.d) - 1))
    assert ext.apply(x ^ x2, z) == ext.apply(x, z) ^ ext.apply(x2, z)
    assert ext.apply(0, z) == 0


def test_seeded_extract_validation():
    with pytest.raises(DomainError):
        seeded_extract([0, 1], [0], 1)
    with pytest.raises(DomainError):
        seeded_extract([0, 2], [0, 0], 1)


def test_average_tv_frozen_prefix_case():
    source = FiniteDistribution.flat(range(4), 4)
    slow = avg_seed_tv(source, 2)
    assert slow == F(9, 32)
    fast = flat_avg_seed_tv(4, 2, [tuple(range(4))])
    assert fast == [F(9, 32)]


def test_fast_harness_agrees_with_slow_path():
    supports = [(0, 1, 2, 3), (0, 3, 5, 6), (1, 2, 4, 8), (0, 5, 10, 15)]
    for n in (1, 2):
        fast = flat_avg_seed_tv(4, n, supports)
        for sup, tv in zip(supports, fast):
            assert tv == avg_seed_tv(FiniteDistribution.flat(sup, 4), n)


def test_every_tiny_flat_source_obeys_the_hash_bound():
    # all C(16,4) = 1820 flat (4,2)-sources, both output widths, exactly
    supports = list(all_flat_sources(4, 2))
    assert len(supports) == 1820
    for n in (1, 2):
        for tv in flat_avg_seed_tv(4, n, supports):
            assert leftover_hash_bound_ok(tv, n, 2)


def test_output_table_budget():
    with pytest.raises(ResourceBudgetError):
        flat_avg_seed_tv(15, 2, [(0, 1)])
    with pytest.raises(ResourceBudgetError):
        avg_seed_tv(FiniteDistribution.flat(range(4), 12), 12)
    with pytest.raises(ConfigurationError):
        flat_avg_seed_tv(4, 2, [()])


def test_subcube_supports_shape():
    cubes = subcube_supports(4, 2)
    assert len(cubes) == 24  # C(4,2) position choices * 2**2 assignments
    assert len(set(cubes)) == 24
    assert all(len(c) == 4 for c in cubes)
    assert (0, 1, 2, 3) in cubes  # free low bits, high bits fixed to 0


def test_flat_source_family_contents():
    family = flat_source_family(6, 3, seed=0)
    assert all(len(s) == 8 for s in family)
    assert family == sorted(family)
    assert tuple(range(8)) in family
    assert tuple(range(56, 64)) in family
    assert tuple(range(0, 64, 8)) in family
    # deterministic under the same seed
    assert family == flat_source_family(6, 3, seed=0)
    with pytest.raises(ConfigurationError):
        flat_source_family(2, 3)


def test_inner_product_matches_oracle():
    for x in range(8):
        for y in range(8):
            expected = oracles.inner_product(word_to_bits(x, 3), word_to_bits(y, 3))
            assert inner_product_bit(x, y) == expected
            assert two_source_extract(word_to_bits(x, 3), word_to_bits(y, 3)) == expected
    with pytest.raises(DomainError):
        two_source_extract([0, 1], [0])


def test_two_source_tv_full_entropy():
    # uniform x uniform on m bits: P(odd) = 1/2 - 2**(-m-1), so TV = 2**(-m-1)
    full = list(range(8))
    assert two_source_tv(full, full) == F(1, 16)
    assert two_source_bound_ok(F(1, 16), 3, 3, 3)


def test_two_source_tv_worst_pair():
    # identical singleton supports: the output is constant
    assert two_source_tv([5], [5]) == F(1, 2)
    with pytest.raises(ConfigurationError):
        two_source_tv([], [1])


def test_two_source_subcube_pairs_meet_bound():
    m, k = 4, 3
    cubes = subcube_supports(m, k)
    for sx in cubes[:6]:
        for sy in cubes[:6]:
            tv = two_source_tv(sx, sy)
            assert two_source_bound_ok(tv, m, k, k)


def test_entropy_budget():
    # a 10-bit block at beta=3/2 holds 10*log2(1.5) - 1 = 4.84 bits
    assert entropy_budget_ok(10, 4, F(3, 2), F(3, 2))
    assert not entropy_budget_ok(10, 5, F(3, 2), F(3, 2))
    assert max_extractable_bits(10, F(3, 2), F(3, 2)) == 4
    assert max_extractable_bits(1, F(3, 2), F(3, 2)) == 0


def test_required_block_length():
    assert required_block_length(8, F(1, 2), F(9, 5)) == 19
    with pytest.raises(DomainError):
        required_block_length(0, F(1, 2), F(9, 5))
    with pytest.raises(DomainError):
        required_block_length(8, 1, F(9, 5))


@given(
    st.integers(min_value=1, max_value=32),
    st.fractions(min_value=0, max_value=F(9, 10), max_denominator=16),
    st.fractions(min_value=F(9, 8), max_value=F(15, 8), max_denominator=16),
)
@settings(max_examples=40)
def test_required_block_length_is_least(n, alpha, beta):
    # m*(1-alpha)*log2(beta) >= n holds, and fails for m-1
    m = required_block_length(n, alpha, beta)
    a, b = alpha.numerator, alpha.denominator
    assert beta ** (m * (b - a)) >= 2 ** (n * b)
    if m > 1:
        assert beta ** ((m - 1) * (b - a)) < 2 ** (n * b)


def test_pipeline_config_validation():
    good = dict(mode="seeded", block_bits=12, beta_min=F(3, 2), beta_max=F(3, 2))
    PipelineConfig(seed=1, **good)
    with pytest.raises(ConfigurationError):
        PipelineConfig(**good)  # explicit mode without a seed
    with pytest.raises(ConfigurationError):
        PipelineConfig(mode="xor", block_bits=12, beta_min=F(3, 2), beta_max=F(3, 2))
    with pytest.raises(ConfigurationError):
        PipelineConfig(
            mode="two-source", block_bits=12, beta_min=F(3, 2), beta_max=F(3, 2), out_bits=2
        )
    with pytest.raises(ConfigurationError):
        PipelineConfig(mode="seeded", block_bits=4, out_bits=5, beta_min=F(3, 2), beta_max=F(3, 2), seed=1)
    with pytest.raises(ConfigurationError):
        PipelineConfig(mode="seeded", block_bits=4, beta_min=F(9, 5), beta_max=F(3, 2), seed=1)


def test_pipeline_seeded_run():
    raw = encode_bits(F(5, 17), F(3, 2), F(1), 400)
    config = PipelineConfig(
        mode="seeded", block_bits=20, out_bits=2, beta_min=F(3, 2), beta_max=F(3, 2), seed=9
    )
    out, report = pipeline_extract(raw, config)
    assert report["blocks"] == 20
    assert report["bits_out"] == 40 == out.size
    assert report["seed"]["mode"] == "explicit"
    assert report["warnings"] == []
    assert report["max_whole_out_bits"] == 10
    # deterministic
    again, _ = pipeline_extract(raw, config)
    assert np.array_equal(out, again)
    # hand-check the first block against the extractor primitive
    ext = SeededExtractor(20, 2)
    from betaenc.prng import SplitMix64

    seed_word = SplitMix64(9).derive("toeplitz").bits(ext.d)
    first = 0
    for b in raw[:20]:
        first = (first << 1) | int(b)
    assert tuple(int(b) for b in out[:2]) == word_to_bits(ext.apply(first, seed_word), 2)


def test_pipeline_budget_enforced():
    raw = encode_bits(F(5, 17), F(3, 2), F(1), 100)
    config = PipelineConfig(
        mode="seeded", block_bits=10, out_bits=5, beta_min=F(3, 2), beta_max=F(3, 2), seed=1
    )
    with pytest.raises(ConfigurationError):
        pipeline_extract(raw, config)


def test_pipeline_stream_seed_mode():
    raw = encode_bits(F(5, 17), F(3, 2), F(1), 200)
    config = PipelineConfig(
        mode="seeded",
        block_bits=20,
        out_bits=2,
        beta_min=F(3, 2),
        beta_max=F(3, 2),
        seed_mode="stream",
        gap_bits=3,
    )
    out, report = pipeline_extract(raw, config)
    assert report["seed"]["mode"] == "stream"
    assert "no uniformity claim" in report["seed"]["note"]
    # d = 21 seed bits, then a gap, then 20+3 strides
    assert report["blocks"] == (200 - 21 - 3) // 23 + (1 if (200 - 24) % 23 >= 20 else 0)
    with pytest.raises(ConfigurationError):
        pipeline_extract(raw[:10], config)


def test_pipeline_two_source_warning_depends_on_beta():
    config = PipelineConfig(mode="two-source", block_bits=16, beta_min=F(7, 5), beta_max=F(7, 5))
    raw = encode_bits(F(5, 17), F(7, 5), F(1), 200)
    out, report = pipeline_extract(raw, config)
    assert TWO_SOURCE_WARNING in report["warnings"]
    assert report["pairs"] == 6
    assert out.size == 6
    quiet = PipelineConfig(mode="two-source", block_bits=16, beta_min=F(3, 2), beta_max=F(3, 2))
    raw = encode_bits(F(5, 17), F(3, 2), F(1), 200)
    _, report = pipeline_extract(raw, quiet)
    assert report["warnings"] == []


def test_pipeline_rejects_non_bits():
    config = PipelineConfig(mode="seeded", block_bits=4, beta_min=F(3, 2), beta_max=F(3, 2), seed=1)
    with pytest.raises(DomainError):
        pipeline_extract([0, 1, 2, 0], config)
