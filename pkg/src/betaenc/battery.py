"""Four-test statistical battery with closed-form p-values.

Monobit, runs, serial (order 2), and approximate entropy (order 2):
chosen so every p-value is an erfc / exponential expression and no
incomplete-gamma tables are needed.  This is supporting evidence for the
extraction pipeline, not a conformance suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction

import numpy as np

from .errors import DomainError, InsufficientLengthError
from .numerics import decimal_str
from .prng import PRNG_ID, SplitMix64

MINIMUM_BITS = {
    "monobit": 100,
    "runs": 100,
    "serial": 64,
    "approximate-entropy": 256,
}


@dataclass(frozen=True)
class TestResult:
    name: str
    statistic: float
    p_value: float
    passed: bool
    alpha: float
    extras: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        stat = self.statistic
        return {
            "name": self.name,
            "statistic": "nan" if math.isnan(stat) else decimal_str(Decimal(repr(float(stat))), 12),
            "p_value": decimal_str(Decimal(repr(float(self.p_value))), 12),
            "pass": self.passed,
            "alpha": self.alpha,
            "extras": {k: repr(v) if isinstance(v, float) else v for k, v in self.extras.items()},
        }


def _as_bits(bits) -> np.ndarray:
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        raise DomainError("bit stream must be one-dimensional")
    if arr.size and arr.max() > 1:
        raise DomainError("bit stream contains non-bits")
    return arr


def _pattern_counts(bits: np.ndarray, order: int) -> np.ndarray:
    """Overlapping order-bit pattern counts with wraparound (n windows)."""
    ext = np.concatenate([bits, bits[: order - 1]]) if order > 1 else bits
    idx = np.zeros(bits.size, dtype=np.int64)
    for j in range(order):
        idx = (idx << 1) | ext[j : j + bits.size]
    return np.bincount(idx, minlength=1 << order)


def _psi_sq(bits: np.ndarray, order: int) -> float:
    counts = _pattern_counts(bits, order)
    n = bits.size
    return float((1 << order) / n * int((counts.astype(object) ** 2).sum()) - n)


def monobit_test(bits, alpha: float = 0.01) -> TestResult:
    arr = _as_bits(bits)
    n = arr.size
    total = 2 * int(arr.sum()) - n
    s_obs = abs(total) / math.sqrt(n)
    p = math.erfc(s_obs / math.sqrt(2))
    return TestResult("monobit", s_obs, p, p >= alpha, alpha, {"bit_sum": total})


def runs_test(bits, alpha: float = 0.01) -> TestResult:
    arr = _as_bits(bits)
    n = arr.size
    pi = int(arr.sum()) / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        # monobit prerequisite failed; the runs statistic is meaningless here
        return TestResult("runs", float("nan"), 0.0, False, alpha,
                          {"ones_fraction": pi, "prerequisite": "failed"})
    v = 1 + int((arr[1:] != arr[:-1]).sum())
    num = abs(v - 2 * n * pi * (1 - pi))
    den = 2 * math.sqrt(2 * n) * pi * (1 - pi)
    p = math.erfc(num / den)
    return TestResult("runs", float(v), p, p >= alpha, alpha, {"ones_fraction": pi})


def serial_test(bits, alpha: float = 0.01) -> TestResult:
    """Order-2 overlapping serial test; p = exp(-delta_psi2 / 2)."""
    arr = _as_bits(bits)
    delta = _psi_sq(arr, 2) - _psi_sq(arr, 1)
    # delta >= 0 up to rounding; clamp so p stays a probability
    p = min(1.0, math.exp(-delta / 2))
    return TestResult("serial", delta, p, p >= alpha, alpha, {})


def approximate_entropy_test(bits, alpha: float = 0.01) -> TestResult:
    """Order-2 approximate entropy; p = exp(-x/2) * (1 + x/2) for x = chi2."""
    arr = _as_bits(bits)
    n = arr.size

    def phi(order: int) -> float:
        acc = 0.0
        for c in _pattern_counts(arr, order).tolist():
            if c:
                acc += (c / n) * math.log(c / n)
        return acc

    ap_en = phi(2) - phi(3)
    chi2 = 2 * n * (math.log(2) - ap_en)
    x = chi2 / 2
    p = min(1.0, math.exp(-x) * (1 + x))
    return TestResult("approximate-entropy", chi2, p, p >= alpha, alpha,
                      {"ap_en": ap_en})


_TESTS = (monobit_test, runs_test, serial_test, approximate_entropy_test)


def run_battery(bits, significance: float = 0.01) -> list:
    """All four tests on one stream; deterministic; pass iff p >= significance."""
    if not (0 < significance < 1):
        raise DomainError(f"significance must lie in (0,1), got {significance}")
    arr = _as_bits(bits)
    needed = max(MINIMUM_BITS.values())
    if arr.size < needed:
        mins = ", ".join(f"{name} {m}" for name, m in MINIMUM_BITS.items())
        raise InsufficientLengthError(
            f"stream of {arr.size} bits is below the battery minimums ({mins})"
        )
    return [test(arr, significance) for test in _TESTS]


def battery_report(results, n_bits: int) -> dict:
    return {
        "n_bits": n_bits,
        "alpha": results[0].alpha if results else None,
        "all_pass": all(r.passed for r in results),
        "tests": [r.to_json() for r in results],
    }


def calibration_tolerance(significance: float, n_runs: int) -> float:
    """3 sigma of a binomial rate estimate at the configured significance."""
    return 3 * math.sqrt(significance * (1 - significance) / n_runs)


def rejection_rates(n_runs: int = 1000, n_bits: int = 1 << 15,
                    significance: float = 0.01, seed: int = 0) -> dict:
    """Per-test rejection rates on ideal PRNG bits (the self-calibration run).

    Under the null each p-value is uniform enough that every rate should
    sit within calibration_tolerance of the significance level.
    """
    rng = SplitMix64(seed).derive("battery-calibration")
    counts = {test.__name__: 0 for test in _TESTS}
    names = {}
    for i in range(n_runs):
        bits = rng.derive("run", i).bit_array(n_bits)
        for test, result in zip(_TESTS, run_battery(bits, significance)):
            names[test.__name__] = result.name
            if not result.passed:
                counts[test.__name__] += 1
    return {
        "prng": PRNG_ID,
        "seed": seed,
        "n_runs": n_runs,
        "n_bits": n_bits,
        "alpha": significance,
        "tolerance": calibration_tolerance(significance, n_runs),
        "rates": {names[k]: Fraction(v, n_runs) for k, v in counts.items()},
    }
