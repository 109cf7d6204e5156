"""Exhaustive extractor audits at configurable (small) sizes.

Seeded mode: average-seed TV of the Toeplitz extractor over a family of
flat sources, against the leftover-hash target (1/2)*sqrt(2^(n-k)).
Two-source mode: inner-product TV over all subcube pairs meeting the
entropy precondition k1 + k2 >= m + 2.
Everything is exact; runtimes grow fast with m, keep it small.
"""
import argparse
import time
from fractions import Fraction

from betaenc.extract import (flat_avg_seed_tv, flat_source_family,
                             leftover_hash_bound_ok, subcube_supports,
                             two_source_bound_ok, two_source_tv)


def seeded_audit(m: int, k: int, n_values):
    family = flat_source_family(m, k)
    print(f"seeded: m={m} k={k}, {len(family)} flat sources, "
          f"{1 << (m + max(n_values) - 1)} seeds at the widest output")
    for n in n_values:
        t0 = time.perf_counter()
        tvs = flat_avg_seed_tv(m, n, family)
        bad = [s for s, tv in zip(family, tvs)
               if not leftover_hash_bound_ok(tv, n, k)]
        worst = max(tvs)
        target = 0.5 * 2 ** ((n - k) / 2)
        print(f"  n={n}: worst avg tv {worst} ({float(worst):.5f}) "
              f"target {target:.5f} violations {len(bad)} "
              f"[{time.perf_counter() - t0:.1f}s]")
        if bad:
            raise SystemExit(f"bound violated for {len(bad)} sources at n={n}")


def two_source_audit(m: int):
    cubes = {k: subcube_supports(m, k) for k in range(1, m + 1)}
    pairs = 0
    worst = Fraction(0)
    t0 = time.perf_counter()
    for k1 in range(1, m + 1):
        for k2 in range(1, m + 1):
            if k1 + k2 < m + 2:
                continue
            for sx in cubes[k1]:
                for sy in cubes[k2]:
                    pairs += 1
                    tv = two_source_tv(sx, sy)
                    worst = max(worst, tv)
                    if not two_source_bound_ok(tv, m, k1, k2):
                        raise SystemExit(
                            f"two-source bound violated at k1={k1} k2={k2}")
    print(f"two-source: m={m}, {pairs} subcube pairs, worst tv {worst} "
          f"[{time.perf_counter() - t0:.1f}s]")


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--m", type=int, default=10, help="seeded-audit word size")
    ap.add_argument("--k", type=int, default=6, help="flat-source entropy")
    ap.add_argument("--n-list", default="1,2,4")
    ap.add_argument("--two-source-m", type=int, default=6)
    args = ap.parse_args()

    seeded_audit(args.m, args.k, [int(n) for n in args.n_list.split(",")])
    two_source_audit(args.two_source_m)


if __name__ == "__main__":
    main()
