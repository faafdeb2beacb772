"""Table of Gamma(p) normalized by its expected growth, for every built-in density."""
import argparse
import math
import sys

from tvci.densities import build_density, gamma_constant
from tvci.grid import FOURIER, WALSH, Grid

ROWS = [
    ("optimal_fourier", FOURIER, {}, lambda N, d: math.log(N), "ln N"),
    ("hyperbolic_cross", FOURIER, {}, lambda N, d: math.log(N) ** d, "ln^d N"),
    ("radial", FOURIER, {"alpha": 2.0}, lambda N, d: math.log(N) if d == 2 else N, "(ln N if d=2 else N)"),
    ("inverse_square", FOURIER, {}, lambda N, d: math.log(N) if d == 2 else N, "(ln N if d=2 else N)"),
    ("uniform", FOURIER, {}, lambda N, d: N ** d, "N^d"),
    ("optimal_walsh", WALSH, {}, lambda N, d: math.log(N), "ln N"),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--dims", default="1,2,3")
    ap.add_argument("--Ns", default="16,32,64,128,256,512,1024")
    a = ap.parse_args(argv)
    Ns = [int(n) for n in a.Ns.split(",")]
    for d in (int(v) for v in a.dims.split(",")):
        print(f"d = {d}")
        print("  density".ljust(42) + "".join(f"{N:>10d}" for N in Ns) + "   max/min")
        for kind, conv, kw, scale, label in ROWS:
            if kind == "optimal_walsh" and d == 1:
                continue
            vals = [gamma_constant(build_density(kind, Grid(N, d), conv, **kw)) / scale(N, d) for N in Ns]
            name = f"{kind} / {label}"
            print(f"  {name:40s}" + "".join(f"{v:10.4g}" for v in vals) + f"   {max(vals) / min(vals):7.3f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
