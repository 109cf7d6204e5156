"""Sweep the digit-transfer cost experiment over gains and threshold models.

Writes one CSV per configuration plus a combined JSON report, mirroring what
the acceptance checks consume but at whatever scale the flags ask for.
"""
import argparse
import csv
import json
import time
from fractions import Fraction
from pathlib import Path

from betaenc.encoder import ConstantThreshold, UniformThresholds
from betaenc.lochs import LochsExperiment, run_lochs
from betaenc.numerics import format_rational, state_bound


def threshold_models(beta: Fraction):
    kappa = state_bound(beta)
    return [
        ("u1", ConstantThreshold(1)),
        ("ukappa", ConstantThreshold(kappa)),
        ("uiid", UniformThresholds(1, kappa)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--betas", default="3/2,9/5",
                    help="comma-separated rational gains")
    ap.add_argument("--m-list", default="8,16,32,64")
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=101)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--out", default="results/lochs")
    args = ap.parse_args()

    betas = [Fraction(b) for b in args.betas.split(",")]
    m_values = tuple(int(m) for m in args.m_list.split(","))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    combined = []
    seed = args.seed
    for beta in betas:
        for label, thr in threshold_models(beta):
            tag = f"beta{beta.numerator}_{beta.denominator}_{label}"
            t0 = time.perf_counter()
            exp = LochsExperiment(beta=beta, thresholds=thr,
                                  m_values=m_values, n_samples=args.samples,
                                  rng_seed=seed, workers=args.workers)
            report = run_lochs(exp)
            dt = time.perf_counter() - t0
            seed += 1

            rows = report.csv_rows()
            path = out / f"{tag}.csv"
            with open(path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.DictWriter(fh, fieldnames=list(rows[0]))
                writer.writeheader()
                writer.writerows(rows)
            combined.append(report.to_json())

            worst = max(float(r["mean_k_over_m"]) for r in rows)
            print(f"{tag}: {args.samples} samples in {dt:.1f}s, "
                  f"worst mean k/m {worst:.4f} -> {path}")

    with open(out / "sweep.json", "w", encoding="utf-8") as fh:
        json.dump({"reports": combined}, fh, indent=2)
    print(f"combined report -> {out / 'sweep.json'}")


if __name__ == "__main__":
    main()
