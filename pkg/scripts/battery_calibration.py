"""Rejection-rate self-test: run the battery on reference PRNG bits.

Under the null every test should reject close to the significance level;
a rate outside 3 standard errors points at a broken p-value.
"""
import argparse
import json

from betaenc.battery import calibration_tolerance, rejection_rates


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--runs", type=int, default=1000)
    ap.add_argument("--bits", type=int, default=1 << 15)
    ap.add_argument("--alpha", type=float, default=0.01)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--json", dest="json_path", default=None,
                    help="also dump the raw report here")
    args = ap.parse_args()

    report = rejection_rates(n_runs=args.runs, n_bits=args.bits,
                             significance=args.alpha, seed=args.seed)
    tol = calibration_tolerance(args.alpha, args.runs)
    print(f"{args.runs} runs x {args.bits} bits, alpha {args.alpha}, "
          f"tolerance {tol:.5f}")
    ok = True
    for name, rate in report["rates"].items():
        dev = abs(float(rate) - args.alpha)
        verdict = "ok" if dev <= tol else "OUT OF BAND"
        ok = ok and dev <= tol
        print(f"  {name:22s} rate {float(rate):.4f}  |dev| {dev:.4f}  {verdict}")
    if args.json_path:
        doc = dict(report, rates={k: str(v) for k, v in report["rates"].items()})
        with open(args.json_path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
        print(f"report -> {args.json_path}")
    raise SystemExit(0 if ok else 1)


if __name__ == "__main__":
    main()
