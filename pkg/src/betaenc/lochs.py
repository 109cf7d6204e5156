"""Digit-transfer statistics: how many stream bits buy m binary digits.

The Monte-Carlo side samples uniform inputs as full-precision dyadic
rationals (odd numerators, so no sample ever sits on a probed cell
boundary) and scans each orbit once with the integer kernel from
``converter``, collecting the exact histogram of the transfer count k for
every requested digit order m.  All reported inequalities against the
irrational rate log2/log(beta) are decided by integer power comparisons;
logarithms appear only as 50-digit decimals in the report text.

The exact side (``pm_measure_exact``) enumerates every attainable bit
prefix of a chosen depth together with its interval of consistent inputs
and returns the exact Lebesgue measure of the set of inputs whose prefix
cylinder still straddles a dyadic cell boundary - the quantity the
tail-set bound 2*2**(-eps*m) is about.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, localcontext
from fractions import Fraction
from functools import partial
from typing import Optional

from .converter import _scan, scan_targets
from .encoder import ConstantThreshold
from .errors import ConfigurationError, DomainError, ResourceBudgetError
from .numerics import (
    ONE,
    ZERO,
    Interval,
    as_fraction,
    check_beta,
    cmp_pow2,
    decimal_str,
    dyadic_index,
    format_rational,
    interval_in_dyadic_cell,
    least_power_at_least,
    log2_decimal,
    log_ratio_decimal,
    state_bound,
)
from .prng import PRNG_ID, SplitMix64

SCALINGS = ("linear", "sqrt", "custom")
QUANTILE_LEVELS = (Fraction(1, 2), Fraction(9, 10), Fraction(99, 100))


@dataclass(frozen=True)
class LochsExperiment:
    """Config for one Monte-Carlo run; a pure value, safe to ship to workers."""

    beta: Fraction
    thresholds: object = ConstantThreshold(1)
    m_values: tuple = (8, 16, 32, 64)
    n_samples: int = 1000
    rng_seed: int = 0
    scaling: str = "linear"
    custom_scale: Optional[tuple] = None
    eps_values: tuple = (Fraction(1, 2), Fraction(1, 10), Fraction(1, 100))
    tail_eps: Fraction = Fraction(1, 10)
    precision_bits: Optional[int] = None
    k_cap: Optional[int] = None
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "beta", check_beta(self.beta))
        ms = tuple(self.m_values)
        if not ms or any(not isinstance(m, int) or m < 1 for m in ms):
            raise ConfigurationError("m_values must be positive integers")
        if any(lo >= hi for lo, hi in zip(ms, ms[1:])):
            raise ConfigurationError("m_values must be strictly increasing")
        object.__setattr__(self, "m_values", ms)
        if self.n_samples < 1:
            raise ConfigurationError("n_samples must be >= 1")
        if self.scaling not in SCALINGS:
            raise ConfigurationError(f"scaling must be one of {SCALINGS}")
        if self.scaling == "custom":
            scale = tuple(as_fraction(v) for v in self.custom_scale or ())
            if len(scale) != len(ms) or any(v <= 0 for v in scale):
                raise ConfigurationError(
                    "custom scaling needs one positive rational per m"
                )
            object.__setattr__(self, "custom_scale", scale)
        eps = tuple(as_fraction(e) for e in self.eps_values)
        if any(not (0 < e < 1) for e in eps):
            raise ConfigurationError("eps values must lie in (0,1)")
        object.__setattr__(self, "eps_values", eps)
        object.__setattr__(self, "tail_eps", as_fraction(self.tail_eps))
        if self.tail_eps <= 0:
            raise ConfigurationError("tail_eps must be positive")
        if self.precision_bits is not None and self.precision_bits <= ms[-1]:
            raise ConfigurationError(
                f"{self.precision_bits} sample bits cannot resolve order-{ms[-1]} cells"
            )
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        bound = state_bound(self.beta)
        if self.thresholds.threshold_range[1] > bound:
            raise ConfigurationError(f"thresholds must stay within [1, {bound}]")

    def resolved_precision(self) -> int:
        if self.precision_bits is not None:
            return self.precision_bits
        # enough bits that the sample behaves as a generic real at 4x the
        # deepest probed order
        return least_power_at_least(self.beta, 4 * self.m_values[-1])

    def to_json(self) -> dict:
        return {
            "beta": format_rational(self.beta),
            "thresholds": self.thresholds.to_json(),
            "m_values": list(self.m_values),
            "n_samples": self.n_samples,
            "rng_seed": self.rng_seed,
            "scaling": self.scaling,
            "custom_scale": [format_rational(v) for v in self.custom_scale]
            if self.custom_scale
            else None,
            "eps_values": [format_rational(e) for e in self.eps_values],
            "tail_eps": format_rational(self.tail_eps),
            "precision_bits": self.resolved_precision(),
            "k_cap": self.k_cap,
            # workers deliberately omitted: results do not depend on it
        }


@dataclass(frozen=True)
class LochsReport:
    config: dict
    prng: dict
    precision_bits: int
    boundary_risk: str
    rows: tuple

    def to_json(self) -> dict:
        return {
            "config": self.config,
            "prng": self.prng,
            "precision_bits": self.precision_bits,
            "boundary_risk": self.boundary_risk,
            "rows": list(self.rows),
        }

    def csv_rows(self) -> list:
        out = []
        for row in self.rows:
            out.append(
                {
                    "m": row["m"],
                    "mean_k_over_m": row["mean_k_over_m"],
                    "target": row["target"],
                    "mean_k": row["mean_k"],
                    "min_deviation": row["min_deviation"],
                    "tail_mass": row["tail"]["mass_decimal"],
                    "cap_hits": row["cap_hits"],
                }
            )
        return out


def _lazy_scaled(process, rng, cap: int):
    """Draw thresholds in chunks, scaled to integer pairs, only as consumed."""
    done = 0
    while done < cap:
        n = min(32, cap - done)
        for u in process.realize(n, rng):
            yield (u.numerator, u.denominator)
        done += n


def _chunk(exp: LochsExperiment, bounds) -> tuple:
    start, stop = bounds
    targets = scan_targets(exp.m_values, exp.beta, exp.k_cap)
    cap_max = targets[-1][1]
    per_sample = exp.thresholds.is_random and getattr(exp.thresholds, "seed", None) is None
    shared = None
    if not per_sample:
        seq = exp.thresholds.realize(cap_max)
        shared = [(u.numerator, u.denominator) for u in seq]
    base = SplitMix64(exp.rng_seed).derive("lochs")
    precision = exp.resolved_precision()
    hists = [Counter() for _ in exp.m_values]
    cap_hits = [0] * len(exp.m_values)
    for i in range(start, stop):
        sub = base.derive("sample", i)
        x = sub.derive("x").odd_dyadic(precision)
        if per_sample:
            u_iter = _lazy_scaled(exp.thresholds, sub.derive("thresholds"), cap_max)
        else:
            u_iter = iter(shared)
        for slot, res in enumerate(_scan(x, targets, exp.beta, u_iter)):
            if res.exceeded:
                cap_hits[slot] += 1
            else:
                hists[slot][res.k] += 1
    return hists, cap_hits


def _quantile(hist: Counter, n: int, level: Fraction) -> int:
    target = -(-level.numerator * n // level.denominator)  # ceil(level * n)
    seen = 0
    for k in sorted(hist):
        seen += hist[k]
        if seen >= target:
            return k
    return max(hist)


def _tail_exceeds(beta: Fraction, m: int, k: int, t: Fraction) -> bool:
    """Exact |k - m*log2/log(beta)| > t for rational t."""
    tn, td = t.numerator, t.denominator
    if cmp_pow2(beta ** (k * td - tn), m * td) > 0:  # k - m*r > t
        return True
    return cmp_pow2(beta ** (k * td + tn), m * td) < 0  # m*r - k > t


def _row(exp: LochsExperiment, slot: int, hist: Counter, cap_hits: int) -> dict:
    m = exp.m_values[slot]
    beta = exp.beta
    n = sum(hist.values())
    if n == 0:
        return {"m": m, "samples": 0, "cap_hits": cap_hits}
    with localcontext() as ctx:
        ctx.prec = 60
        ratio = log_ratio_decimal(beta)
        target_k = Decimal(m) * ratio

        mean_k = Fraction(sum(k * c for k, c in hist.items()), n)
        mean_sq = Fraction(sum(k * k * c for k, c in hist.items()), n)
        variance = mean_sq - mean_k * mean_k
        mean_ratio = mean_k / m
        mean_ratio_dec = Decimal(mean_ratio.numerator) / Decimal(mean_ratio.denominator)

        lower_violations = sum(
            c for k, c in hist.items() if cmp_pow2(beta**k, m) <= 0
        )

        quantiles = {
            format_rational(q): _quantile(hist, n, q) for q in QUANTILE_LEVELS
        }

        exceed = []
        for eps in exp.eps_values:
            count = sum(
                c for k, c in hist.items() if cmp_pow2(eps * beta ** (k - 1), m + 1) > 0
            )
            frac = Fraction(count, n)
            eps_f = float(eps)
            se = math.sqrt(eps_f * (1 - eps_f) / n)
            c_eps = (Decimal(1) - log2_decimal(eps)) / log2_decimal(beta) + 1
            exceed.append(
                {
                    "eps": format_rational(eps),
                    "c_eps": decimal_str(c_eps, 12),
                    "fraction": format_rational(frac),
                    "fraction_decimal": decimal_str(
                        Decimal(frac.numerator) / Decimal(frac.denominator), 12
                    ),
                    "bound_ok": frac < eps,
                    "within_2se": abs(float(frac) - eps_f) <= 2 * se,
                }
            )

        if exp.scaling == "sqrt":
            n_m_sq = Fraction(m)
            t_dec = Decimal(exp.tail_eps.numerator) / Decimal(
                exp.tail_eps.denominator
            ) * Decimal(m).sqrt()
            tail_count = sum(
                c
                for k, c in hist.items()
                if abs(Decimal(k) - target_k) > t_dec
            )
            n_m_label = f"sqrt({m})"
        else:
            n_m = Fraction(m) if exp.scaling == "linear" else exp.custom_scale[slot]
            n_m_sq = n_m * n_m
            t = exp.tail_eps * n_m
            tail_count = sum(
                c for k, c in hist.items() if _tail_exceeds(beta, m, k, t)
            )
            n_m_label = format_rational(n_m)
        tail_mass = Fraction(tail_count, n)
        scaled_variance = variance / n_m_sq

        min_k, max_k = min(hist), max(hist)
        return {
            "m": m,
            "samples": n,
            "cap_hits": cap_hits,
            "lower_bound_violations": lower_violations,
            "mean_k": format_rational(mean_k),
            "mean_k_over_m": decimal_str(mean_ratio_dec, 12),
            "target": decimal_str(ratio, 12),
            "rel_error": decimal_str((mean_ratio_dec - ratio) / ratio, 12),
            "min_k": min_k,
            "max_k": max_k,
            "min_deviation": decimal_str(Decimal(min_k) - target_k, 12),
            "quantile_k": quantiles,
            "exceed": exceed,
            "tail": {
                "eps": format_rational(exp.tail_eps),
                "n_m": n_m_label,
                "mass": format_rational(tail_mass),
                "mass_decimal": decimal_str(
                    Decimal(tail_mass.numerator) / Decimal(tail_mass.denominator), 12
                ),
            },
            "scaled_variance": {
                "n_m_squared": format_rational(n_m_sq),
                "value": format_rational(scaled_variance),
                "decimal": decimal_str(
                    Decimal(scaled_variance.numerator)
                    / Decimal(scaled_variance.denominator),
                    12,
                ),
            },
        }


def run_lochs(exp: LochsExperiment) -> LochsReport:
    """Run the experiment; deterministic given the config, whatever the worker count."""
    n = exp.n_samples
    if exp.workers > 1 and n > 1:
        pieces = min(4 * exp.workers, n)
        step = -(-n // pieces)
        bounds = [(i, min(i + step, n)) for i in range(0, n, step)]
        hists = [Counter() for _ in exp.m_values]
        cap_hits = [0] * len(exp.m_values)
        with ProcessPoolExecutor(max_workers=exp.workers) as pool:
            for part_hists, part_caps in pool.map(partial(_chunk, exp), bounds):
                for slot in range(len(exp.m_values)):
                    hists[slot].update(part_hists[slot])
                    cap_hits[slot] += part_caps[slot]
    else:
        hists, cap_hits = _chunk(exp, (0, n))

    precision = exp.resolved_precision()
    rows = tuple(_row(exp, slot, hists[slot], cap_hits[slot]) for slot in range(len(exp.m_values)))
    return LochsReport(
        config=exp.to_json(),
        prng={"id": PRNG_ID, "seed": exp.rng_seed, "path": ["lochs"]},
        precision_bits=precision,
        boundary_risk=(
            f"< 2**-{precision - exp.m_values[-1]} per sample; odd-numerator draws "
            "additionally sit strictly inside every probed cell"
        ),
        rows=rows,
    )


# ---------------------------------------------------------------------------
# exact tail-set measure


def default_kbar(beta, m: int, eps) -> int:
    """Least k with beta**k >= 2**((1+eps)*m): the probe depth for the tail set."""
    eps = as_fraction(eps)
    return least_power_at_least(
        beta, Fraction(m) * (1 + eps)
    )


def pm_measure_exact(
    beta,
    u,
    m: int,
    eps,
    kbar: Optional[int] = None,
    node_budget: int = 1 << 22,
) -> Fraction:
    """Exact measure of inputs whose depth-kbar cylinder straddles a cell edge.

    Enumerates every attainable bit prefix of depth kbar under constant
    threshold u together with its exact interval of consistent inputs in
    [0,1]; an input is in the tail set when its cylinder is not contained
    in its own order-m dyadic cell.  Small m only: the tree has roughly
    beta**kbar live nodes per level.
    """
    beta = check_beta(beta)
    u = as_fraction(u)
    kappa = state_bound(beta)
    if not (ONE <= u <= kappa):
        raise DomainError(f"threshold {u} outside [1, {kappa}]")
    if not isinstance(m, int) or m < 1:
        raise DomainError(f"m must be a positive integer, got {m!r}")
    eps = as_fraction(eps)
    if eps <= 0:
        raise DomainError("eps must be positive")
    if kbar is None:
        kbar = default_kbar(beta, m, eps)
    if kbar < 1:
        raise DomainError("kbar must be at least 1")

    tail_length = kappa * beta**-kbar
    cell_den = 1 << m
    bad = ZERO
    visited = 0
    # node: (depth, consistency lo, hi, cylinder lo)
    stack = [(0, ZERO, ONE, ZERO)]
    while stack:
        visited += 1
        if visited > node_budget:
            raise ResourceBudgetError(
                f"tail-set enumeration passed {node_budget} nodes; shrink m or kbar"
            )
        depth, jlo, jhi, clo = stack.pop()
        if depth == kbar:
            cylinder = Interval(clo, clo + tail_length)
            idx = dyadic_index(clo, m)
            cell = Interval(Fraction(idx, cell_den), Fraction(idx + 1, cell_den))
            if interval_in_dyadic_cell(cylinder, cell):
                good_lo = max(jlo, cell.lo)
                good_hi = min(jhi, cell.hi)
                good = good_hi - good_lo if good_hi > good_lo else ZERO
                bad += (jhi - jlo) - good
            else:
                bad += jhi - jlo
            continue
        step = beta ** -(depth + 1)
        split = clo + u * step
        zero_hi = min(jhi, split)
        if zero_hi > jlo:
            stack.append((depth + 1, jlo, zero_hi, clo))
        one_lo = max(jlo, split)
        if jhi > one_lo:
            stack.append((depth + 1, one_lo, jhi, clo + step))
    return bad


def pm_bound_holds(measure: Fraction, m: int, eps) -> bool:
    """measure <= 2 * 2**(-eps*m), decided exactly."""
    eps = as_fraction(eps)
    return cmp_pow2(as_fraction(measure) / 2, -eps * m) <= 0
