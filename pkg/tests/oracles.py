"""Independent oracle implementations for the test suite.

Everything here is written from the definitions with the dumbest viable
algorithm and imports nothing from the package under test.  Oracle
values frozen into tests were computed by these functions first and only
then compared against the package.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

ONE = Fraction(1)


def doubling_digits(x: Fraction, m: int) -> tuple:
    """First m binary digits of x in [0,1] via the doubling map."""
    if not (0 <= x <= 1):
        raise ValueError("x outside [0,1]")
    y = x
    digits = []
    for _ in range(m):
        y *= 2
        d = 1 if y >= 1 else 0
        digits.append(d)
        y -= d
    return tuple(digits)


def encoder_bits(x: Fraction, beta: Fraction, u_values, n: int) -> tuple:
    """Greedy quantizer run by the definition: emit 1 iff beta*s >= u."""
    s = Fraction(x)
    bits = []
    for i in range(n):
        y = beta * s
        u = Fraction(u_values[i])
        if y >= u:
            bits.append(1)
            s = y - 1
        else:
            bits.append(0)
            s = y
    return tuple(bits)


def cylinder_k(x: Fraction, m: int, beta: Fraction, u_values=None, k_cap: int = 4096):
    """Brute-force least k making m digits of x certain, or None at the cap.

    After k bits the set of inputs with that prefix is the closed interval
    [sum b_j beta^-j, sum + kappa * beta^-k]; the digits are certain once
    it fits inside the dyadic cell of x (half-open except the last cell).
    """
    x, beta = Fraction(x), Fraction(beta)
    kappa = 1 / (beta - 1)
    if u_values is None:
        u_values = [ONE] * k_cap
    a = min(int(x * (1 << m)), (1 << m) - 1)
    cell_lo = Fraction(a, 1 << m)
    cell_hi = Fraction(a + 1, 1 << m)
    last = a == (1 << m) - 1

    s = x
    lo = Fraction(0)
    scale = ONE
    for k in range(1, k_cap + 1):
        y = beta * s
        scale /= beta
        if y >= u_values[k - 1]:
            s = y - 1
            lo += scale
        else:
            s = y
        hi = lo + kappa * scale
        if cell_lo <= lo and (hi <= 1 if last else hi < cell_hi):
            return k
    return None


def word_interval_measure(word_bits, betas, u_values) -> Fraction:
    """Lebesgue measure of {x in [0,1] : encoder emits word_bits}.

    Backward induction with inverse maps: run the constraints from the
    last bit to the first, pulling an interval of admissible states back
    through s -> (s + b)/beta, then intersect with [0,1].
    """
    lo, hi = Fraction(-10**9), Fraction(10**9)
    for b, beta, u in zip(reversed(word_bits), reversed(betas), reversed(u_values)):
        beta, u = Fraction(beta), Fraction(u)
        lo, hi = (lo + b) / beta, (hi + b) / beta
        threshold = u / beta
        if b:
            lo = max(lo, threshold)
        else:
            hi = min(hi, threshold)
        if lo >= hi:
            return Fraction(0)
    lo, hi = max(lo, Fraction(0)), min(hi, ONE)
    return max(hi - lo, Fraction(0))


def word_distribution_oracle(support, probs, u_values, m: int) -> dict:
    """Exact word law by summing word_interval_measure over gain sequences."""
    out = {}
    for seq in itertools.product(range(len(support)), repeat=m):
        weight = ONE
        for i in seq:
            weight *= probs[i]
        if weight == 0:
            continue
        betas = [support[i] for i in seq]
        for word in range(1 << m):
            bits = [(word >> (m - 1 - j)) & 1 for j in range(m)]
            p = word_interval_measure(bits, betas, u_values)
            if p:
                out[word] = out.get(word, Fraction(0)) + weight * p
    return out


def toeplitz_apply(x_bits, z_bits, n: int) -> tuple:
    """Textbook Toeplitz-matrix hash, built entry by entry.

    T has n rows and m columns with T[i][j] = z[n - 1 + j - i] (0-indexed,
    seed bits z_1..z_{m+n-1} listed MSB-first), so the first row is
    z_n..z_{n+m-1} and the first column reads z_n, z_{n-1}, .., z_1.
    """
    m = len(x_bits)
    assert len(z_bits) == m + n - 1
    out = []
    for i in range(n):
        acc = 0
        for j in range(m):
            acc ^= z_bits[n - 1 + j - i] & x_bits[j]
        out.append(acc)
    return tuple(out)


def inner_product(x_bits, y_bits) -> int:
    acc = 0
    for a, b in zip(x_bits, y_bits):
        acc ^= a & b
    return acc


def tv_direct(p: dict, q: dict) -> Fraction:
    keys = set(p) | set(q)
    total = sum(abs(p.get(k, Fraction(0)) - q.get(k, Fraction(0))) for k in keys)
    return total / 2


def min_entropy_float(entries: dict) -> float:
    return -math.log2(float(max(entries.values())))


def lochs_target(beta: Fraction) -> float:
    return math.log(2) / math.log(float(beta))


# -- battery reference implementations (plain loops, no numpy) --------------


def monobit_p(bits) -> float:
    n = len(bits)
    s = sum(2 * b - 1 for b in bits)
    return math.erfc(abs(s) / math.sqrt(n) / math.sqrt(2))


def runs_p(bits) -> float:
    n = len(bits)
    pi = sum(bits) / n
    if abs(pi - 0.5) >= 2 / math.sqrt(n):
        return 0.0
    v = 1 + sum(1 for i in range(n - 1) if bits[i] != bits[i + 1])
    return math.erfc(abs(v - 2 * n * pi * (1 - pi)) / (2 * math.sqrt(2 * n) * pi * (1 - pi)))


def _psi_sq(bits, order: int) -> float:
    n = len(bits)
    ext = list(bits) + list(bits[: order - 1])
    counts = {}
    for i in range(n):
        pat = tuple(ext[i : i + order])
        counts[pat] = counts.get(pat, 0) + 1
    return (1 << order) / n * sum(c * c for c in counts.values()) - n


def serial_p(bits) -> float:
    return min(1.0, math.exp(-(_psi_sq(bits, 2) - _psi_sq(bits, 1)) / 2))


def approximate_entropy_p(bits) -> float:
    n = len(bits)

    def phi(order):
        ext = list(bits) + list(bits[: order - 1])
        counts = {}
        for i in range(n):
            pat = tuple(ext[i : i + order])
            counts[pat] = counts.get(pat, 0) + 1
        return sum((c / n) * math.log(c / n) for c in counts.values())

    x = n * (math.log(2) - (phi(2) - phi(3)))
    return min(1.0, math.exp(-x) * (1 + x))
