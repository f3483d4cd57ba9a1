#!/usr/bin/env python3
"""Offline tearing-mode growth rates at full resolution.

Runs the published CurrentSheet2D preset (hours on one core), fits the
growth of the first magnetic Fourier modes over the configured window and,
given a reference table with columns mode,rate, prints the relative
differences.

    scripts/tearing_growth.py --vrmhd build/tools/vrmhd --out runs/tearing
    scripts/tearing_growth.py --skip-run --out runs/tearing --reference ref.csv
"""
import argparse
import csv
import pathlib
import subprocess
import sys


def read_rates(path):
    with open(path, newline="") as f:
        return {int(r["mode"]): r for r in csv.DictReader(f)}


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--vrmhd", default="build/tools/vrmhd", help="path of the vrmhd executable")
    ap.add_argument("--out", default="runs/tearing", help="run output directory")
    ap.add_argument("--config", help="run configuration (default: the published preset)")
    ap.add_argument("--reference", help="CSV with columns mode,rate")
    ap.add_argument("--skip-run", action="store_true", help="only analyse an existing run")
    args = ap.parse_args()

    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if not args.skip_run:
        config = args.config
        if config is None:
            config = out / "config.yaml"
            text = subprocess.run([args.vrmhd, "config", "CurrentSheet2D", "--published"],
                                  check=True, capture_output=True, text=True).stdout
            config.write_text(text)
        subprocess.run([args.vrmhd, "run", str(config), "-o", str(out)], check=True)
    subprocess.run([args.vrmhd, "spectrum", str(out)], check=True)

    rates = read_rates(out / "growth_rates.csv")
    ref = {}
    if args.reference:
        with open(args.reference, newline="") as f:
            ref = {int(r["mode"]): float(r["rate"]) for r in csv.DictReader(f)}

    print(f"{'mode':>4} {'rate':>12} {'r2':>8} {'reference':>12} {'rel.diff':>9}")
    for n in sorted(rates):
        r = rates[n]
        rate = float(r["rate"])
        line = f"{n:>4} {rate:>12.5e} {float(r['r2']):>8.5f}"
        if n in ref:
            line += f" {ref[n]:>12.5e} {abs(rate - ref[n]) / abs(ref[n]):>9.3%}"
        print(line)
    return 0


if __name__ == "__main__":
    sys.exit(main())
