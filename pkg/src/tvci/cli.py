"""Command-line entry point ``tvci``.

Exit codes: 0 success, 1 usage or domain error, 2 verification failure, 3 I/O error.
Every option may also come from ``--config FILE`` (``key = value`` lines, keys
named like the long flags); flags given on the command line win.
"""
from __future__ import annotations

import argparse
import math
import sys
from typing import Dict, List, Optional

import numpy as np

from .densities import build_density, export_csv, export_pgm, gamma_constant
from .experiments import SCHEMES, ExperimentSpec, make_pattern, run_experiment, summarize
from .grid import FOURIER, WALSH, Grid, axis_freqs
from .io import load_image, save_image, write_pgm
from .operators import MeasurementOp
from .analysis import noise_at_snr
from .patterns import Pattern, make_rng, sample_multilevel, sample_uniform, sample_vds
from .solver import SolverConfig, solve_tv

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3
MEAS_HEADER = "tvci-measurements v1"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# Built-in defaults; argparse defaults are None so that config files can fill gaps.
DEFAULTS: Dict[str, object] = {
    "kind": FOURIER, "N": 64, "d": 2, "seed": 0, "norm": "linf", "alpha": 2.0,
    "r_levels": None, "r0": None, "a": None, "include_dc": False, "distinct": False,
    "image": "shepp-logan-64", "scheme": "uniform,optimal", "pct": "25", "trials": 20,
    "protocol": "psnr", "snr": "20", "frames": "first",
    "mu": 0.2, "outer": 5, "inner": 5000, "tol": 1e-5, "delta": 1e-5, "eta": 0.0,
    "tv_mode": "isotropic", "no_continuation": False, "quiet": False,
}
# Keys whose meaning differs by subcommand.
COMMAND_DEFAULTS: Dict[tuple, Dict[str, object]] = {
    ("pattern", "gen"): {"scheme": "iid-uniform", "pct": None},
    ("measure", None): {"snr": None},
}


def read_config(path) -> Dict[str, str]:
    out = {}
    with open(path) as fh:
        for num, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{num}: expected 'key = value'")
            k, v = (t.strip() for t in line.split("=", 1))
            out[k.replace("-", "_")] = v
    return out


def _coerce(key, value):
    ref = DEFAULTS.get(key)
    if not isinstance(value, str):
        return value
    if isinstance(ref, bool):
        return value.lower() in ("1", "true", "yes", "on")
    if isinstance(ref, int):
        return int(value)
    if isinstance(ref, float):
        return float(value)
    if key in ("r_levels", "r0", "m"):
        return int(value)
    if key == "a":
        return float(value)
    return value


def _resolve(args) -> argparse.Namespace:
    cfg = read_config(args.config) if getattr(args, "config", None) else {}
    defaults = {**DEFAULTS, **COMMAND_DEFAULTS.get((args.cmd, getattr(args, "action", None)), {})}
    for k, v in vars(args).items():
        if v is None:
            if k in cfg:
                setattr(args, k, _coerce(k, cfg[k]))
            elif k in defaults:
                setattr(args, k, defaults[k])
    return args


def _solver_opts(p):
    p.add_argument("--mu", type=float)
    p.add_argument("--outer", type=int, help="continuation stages")
    p.add_argument("--inner", type=int, help="max iterations per stage")
    p.add_argument("--tol", type=float)
    p.add_argument("--delta", type=float, help="relative step tolerance")
    p.add_argument("--eta", type=float, help="data-fidelity radius")
    p.add_argument("--tv-mode", choices=("isotropic", "anisotropic"))
    p.add_argument("--no-continuation", action="store_true", default=None)


def _grid_opts(p):
    p.add_argument("--N", type=int)
    p.add_argument("--d", type=int)
    p.add_argument("--kind", choices=(FOURIER, WALSH))


def _solver_cfg(a) -> SolverConfig:
    return SolverConfig(mu=a.mu, outer_iters=a.outer, inner_iters=a.inner, tolerance=a.tol, delta=a.delta,
                        eta=a.eta, tv_mode=a.tv_mode, continuation=not a.no_continuation)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="tvci", description="TV-minimization compressed imaging toolkit")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    pat = sub.add_parser("pattern").add_subparsers(dest="action", required=True, parser_class=_Parser)
    gen = pat.add_parser("gen", help="generate a sampling pattern")
    gen.add_argument("--config")
    _grid_opts(gen)
    gen.add_argument("--scheme", help=f"iid-uniform, iid-vds, or one of {', '.join(SCHEMES)}")
    size = gen.add_mutually_exclusive_group()
    size.add_argument("--m", type=int)
    size.add_argument("--pct", type=float)
    gen.add_argument("--seed", type=int)
    gen.add_argument("--density", help="density kind for iid-vds")
    gen.add_argument("--norm")
    gen.add_argument("--alpha", type=float)
    gen.add_argument("--r-levels", type=int)
    gen.add_argument("--r0", type=int)
    gen.add_argument("--a", type=float)
    gen.add_argument("--include-dc", action="store_true", default=None)
    gen.add_argument("--distinct", action="store_true", default=None)
    gen.add_argument("--out")
    show = pat.add_parser("show", help="summarize a pattern file")
    show.add_argument("file")
    show.add_argument("--pgm", help="write the 2D sampling mask (frequency-centered)")

    den = sub.add_parser("density").add_subparsers(dest="action", required=True, parser_class=_Parser)
    for name in ("gen", "gamma"):
        p = den.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--N", type=int)
        p.add_argument("--d", type=int)
        p.add_argument("--kind", dest="density", required=True,
                       help="uniform, optimal-fourier, inverse-square, radial, hyperbolic-cross, optimal-walsh")
        p.add_argument("--convention", choices=(FOURIER, WALSH))
        p.add_argument("--norm")
        p.add_argument("--alpha", type=float)
        if name == "gen":
            p.add_argument("--csv")
            p.add_argument("--pgm")

    mea = sub.add_parser("measure", help="apply a pattern to an image")
    mea.add_argument("--image")
    mea.add_argument("--pattern", required=True)
    mea.add_argument("--snr", help="optional measurement noise level in dB")
    mea.add_argument("--seed", type=int)
    mea.add_argument("--out", required=True)

    rec = sub.add_parser("reconstruct", help="solve the TV problem from a measurement file")
    rec.add_argument("--config")
    rec.add_argument("--pattern", required=True)
    rec.add_argument("--measurements", required=True)
    rec.add_argument("--out", required=True)
    _solver_opts(rec)

    exp = sub.add_parser("experiment").add_subparsers(dest="action", required=True, parser_class=_Parser)
    run = exp.add_parser("run", help="trial sweep writing results.csv and frames")
    run.add_argument("--config")
    run.add_argument("--image")
    run.add_argument("--kind", choices=(FOURIER, WALSH))
    run.add_argument("--scheme", help="comma-separated scheme list")
    run.add_argument("--pct", help="comma-separated sampling percentages")
    run.add_argument("--trials", type=int)
    run.add_argument("--seed", type=int)
    run.add_argument("--protocol", choices=("psnr", "stability", "robustness"))
    run.add_argument("--snr", help="comma-separated SNR values (dB) for stability/robustness")
    run.add_argument("--r-levels", type=int)
    run.add_argument("--r0", type=int)
    run.add_argument("--a", type=float)
    run.add_argument("--frames", choices=("first", "all", "none"))
    run.add_argument("--out", required=False)
    run.add_argument("--quiet", action="store_true", default=None)
    _solver_opts(run)

    ver = sub.add_parser("verify", help="run the acceptance checks")
    ver.add_argument("--only", help="comma-separated subset of check names")
    ver.add_argument("--list", action="store_true")
    return ap


def _floats(text) -> List[float]:
    return [float(t) for t in str(text).split(",") if t.strip()]


def _multilevel(a) -> Optional[tuple]:
    vals = (a.r_levels, a.r0, a.a)
    if all(v is None for v in vals):
        return None
    if any(v is None for v in vals):
        raise UsageError("--r-levels, --r0 and --a must be given together")
    return vals


def cmd_pattern_gen(a) -> int:
    grid = Grid(a.N, a.d)
    if a.m is not None:
        m = a.m
    elif a.pct is not None:
        m = max(1, int(round(float(a.pct) / 100.0 * grid.size)))
    else:
        raise UsageError("give --m or --pct")
    scheme = a.scheme
    if scheme == "iid-uniform":
        pat = sample_uniform(grid, m, a.seed, a.include_dc, a.kind, a.distinct)
    elif scheme == "iid-vds":
        dk = (a.density or ("optimal_fourier" if a.kind == FOURIER else "optimal_walsh")).replace("-", "_")
        pat = sample_vds(build_density(dk, grid, a.kind, norm=a.norm, alpha=a.alpha), m, a.seed, distinct=a.distinct)
    elif scheme == "multilevel" and _multilevel(a):
        pat = sample_multilevel(grid, m, *_multilevel(a), a.seed, a.kind)
    else:
        pat = make_pattern(scheme, grid, a.kind, m, a.seed)
    if a.out:
        pat.save(a.out)
    else:
        sys.stdout.write(pat.to_text())
    return EXIT_OK


def cmd_pattern_show(a) -> int:
    pat = Pattern.load(a.file)
    rho = np.abs(pat.freqs()).max(axis=1)
    print(f"convention {pat.convention}  N {pat.grid.N}  d {pat.grid.d}  scheme {pat.scheme}  seed {pat.seed}")
    print(f"draws m = {pat.m}  distinct = {pat.distinct}  ({100.0 * pat.distinct / pat.grid.size:.2f}% of grid)")
    print(f"DC sampled: {bool(pat.rows[0] == 1)}  max-norm radius: min {rho.min()} median {np.median(rho):g} max {rho.max()}")
    if a.pgm:
        if pat.grid.d != 2:
            raise UsageError("--pgm needs a 2D pattern")
        order = np.argsort(axis_freqs(pat.grid.N, pat.convention))
        write_pgm(a.pgm, pat.mask()[np.ix_(order, order)].astype(float), vmin=0.0, vmax=1.0)
    return EXIT_OK


def _density(a):
    conv = a.convention or (WALSH if a.density.replace("-", "_") == "optimal_walsh" else FOURIER)
    return build_density(a.density, Grid(a.N, a.d), conv, norm=a.norm, alpha=a.alpha)


def cmd_density_gen(a) -> int:
    p = _density(a)
    if not (a.csv or a.pgm):
        raise UsageError("give --csv and/or --pgm")
    if a.csv:
        export_csv(p, a.csv)
    if a.pgm:
        export_pgm(p, a.pgm)
    return EXIT_OK


def cmd_density_gamma(a) -> int:
    p = _density(a)
    g = gamma_constant(p)
    print(f"Gamma(p) = {g:.10g}")
    print(f"Gamma(p)/ln N = {g / math.log(a.N):.10g}")
    return EXIT_OK


def write_measurements(path, op: MeasurementOp, y) -> None:
    with open(path, "w") as fh:
        fh.write(f"{MEAS_HEADER}, {op.kind}, {op.grid.N}, {op.grid.d}, {op.m}\n")
        for r, v in zip(op.pattern.rows.tolist(), np.asarray(y, dtype=complex).tolist()):
            fh.write(f"{r}, {v.real!r}, {v.imag!r}\n")


def read_measurements(path):
    with open(path) as fh:
        lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    head = [t.strip() for t in lines[0].split(",")]
    if len(head) != 5 or head[0] != MEAS_HEADER:
        raise ValueError(f"{path}: bad measurement header")
    body = np.array([[float(t) for t in ln.split(",")] for ln in lines[1:]]).reshape(-1, 3)
    return head[1], Grid(int(head[2]), int(head[3])), int(head[4]), body[:, 0].astype(np.int64), body[:, 1] + 1j * body[:, 2]


def cmd_measure(a) -> int:
    pat = Pattern.load(a.pattern)
    x = load_image(a.image)
    if x.shape != pat.grid.shape:
        raise UsageError(f"image shape {x.shape} does not match pattern grid {pat.grid}")
    op = MeasurementOp(pat)
    y = op.apply(x)
    if a.snr is not None:
        y = y + noise_at_snr(y.astype(complex), float(a.snr), make_rng(a.seed))
    write_measurements(a.out, op, y)
    return EXIT_OK


def cmd_reconstruct(a) -> int:
    pat = Pattern.load(a.pattern)
    kind, grid, m, rows, y = read_measurements(a.measurements)
    if grid != pat.grid or kind != pat.convention or not np.array_equal(rows, pat.rows):
        raise UsageError("measurement file does not match the pattern")
    op = MeasurementOp(pat, m)
    if kind == WALSH:
        y = y.real
    res = solve_tv(op, y, _solver_cfg(a))
    save_image(a.out, np.real(res.x_hat))
    print(f"residual {res.residual:.6g}  iterations {res.iterations}  converged {res.converged}")
    return EXIT_OK


def cmd_experiment_run(a) -> int:
    schemes = tuple(s.strip() for s in str(a.scheme).split(",") if s.strip())
    spec = ExperimentSpec(image=a.image, kind=a.kind, schemes=schemes, pcts=tuple(_floats(a.pct)),
                          trials=a.trials, base_seed=a.seed, solver=_solver_cfg(a), out_dir=a.out,
                          protocol=a.protocol, snrs=tuple(_floats(a.snr)), multilevel=_multilevel(a),
                          frames=a.frames)
    rows = run_experiment(spec)
    if not a.quiet:
        metric = "psnr" if spec.protocol == "psnr" else "rel_l2_image"
        for (s, p, snr), v in sorted(summarize(rows, metric).items()):
            tag = "" if spec.protocol == "psnr" else f" snr {snr:g}dB"
            print(f"{s:22s} {p:6g}%{tag}  mean {metric} {v:.4f}")
        if spec.out_dir:
            print(f"wrote {spec.out_dir}/results.csv ({len(rows)} rows)")
    return EXIT_OK


def cmd_verify(a) -> int:
    from .verify import CHECKS, run_all

    if a.list:
        print("\n".join(CHECKS))
        return EXIT_OK
    keys = [k.strip() for k in a.only.split(",")] if a.only else None
    unknown = [k for k in keys or [] if k not in CHECKS]
    if unknown:
        raise UsageError(f"unknown checks: {', '.join(unknown)}")
    results = run_all(keys)
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


HANDLERS = {
    ("pattern", "gen"): cmd_pattern_gen, ("pattern", "show"): cmd_pattern_show,
    ("density", "gen"): cmd_density_gen, ("density", "gamma"): cmd_density_gamma,
    ("measure", None): cmd_measure, ("reconstruct", None): cmd_reconstruct,
    ("experiment", "run"): cmd_experiment_run, ("verify", None): cmd_verify,
}


def main(argv=None) -> int:
    try:
        args = _resolve(build_parser().parse_args(argv))
        return HANDLERS[(args.cmd, getattr(args, "action", None))](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"tvci: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"tvci: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
