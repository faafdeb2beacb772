"""Mean PSNR per sampling scheme over a range of sampling rates.

Writes one results.csv per measurement kind under --out and prints a table.

    python scripts/psnr_sweep.py --image shepp-logan-64 --pct 5,10,20,30 --trials 5
    python scripts/psnr_sweep.py --image shepp-logan3d-32 --kind fourier --trials 2
"""
import argparse
import os
import sys

from tvci.experiments import ExperimentSpec, run_experiment, summarize


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--image", default="shepp-logan-64")
    ap.add_argument("--kind", default="fourier,walsh")
    ap.add_argument("--schemes", default="uniform,optimal,multilevel,half-half")
    ap.add_argument("--pct", default="5,10,20,30")
    ap.add_argument("--trials", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="psnr_sweep")
    a = ap.parse_args(argv)

    pcts = tuple(float(p) for p in a.pct.split(","))
    schemes = tuple(a.schemes.split(","))
    for kind in a.kind.split(","):
        spec = ExperimentSpec(image=a.image, kind=kind, schemes=schemes, pcts=pcts, trials=a.trials,
                              base_seed=a.seed, out_dir=os.path.join(a.out, kind), frames="first")
        mean = summarize(run_experiment(spec))
        print(f"{kind}: mean PSNR (dB)")
        print("  scheme".ljust(24) + "".join(f"{p:>8g}%" for p in pcts))
        for s in schemes:
            print(f"  {s:22s}" + "".join(f"{mean[(s, p, float('inf'))]:9.2f}" for p in pcts))
    return 0


if __name__ == "__main__":
    sys.exit(main())
