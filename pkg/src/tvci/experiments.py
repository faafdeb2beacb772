"""Experiment orchestration: named sampling schemes and seeded trial sweeps written to CSV."""
from __future__ import annotations

import csv
import io as _io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .analysis import noise_at_snr, psnr, rel_error, rel_grad_error
from .densities import build_density
from .grid import FOURIER, WALSH, Grid
from .io import load_image, save_image
from .operators import MeasurementOp
from .patterns import (Pattern, make_rng, sample_half_half, sample_multilevel, sample_uniform,
                       sample_vds)
from .solver import SolverConfig, solve_tv

SCHEMES = ("uniform", "uniform-dc", "optimal", "inverse-square", "hyperbolic-cross", "half-half",
           "multilevel", "mixed-optimal", "mixed-inverse-square")
# (r_levels, r0, a) defaults per convention
MULTILEVEL_DEFAULTS = {FOURIER: (20, 1, 1.0), WALSH: (30, 2, 2.0)}
_VDS_KIND = {"optimal": None, "inverse-square": "inverse_square", "hyperbolic-cross": "hyperbolic_cross"}


def _vds_density(scheme, grid, kind):
    name = scheme.replace("mixed-", "")
    dk = _VDS_KIND[name] or ("optimal_fourier" if kind == FOURIER else "optimal_walsh")
    return build_density(dk, grid, kind)


def make_pattern(scheme: str, grid: Grid, kind: str, m: int, seed: int,
                 multilevel: Optional[Tuple[int, int, float]] = None) -> Pattern:
    """Draw ``m`` distinct rows with the named scheme.

    Random schemes are drawn as distinct rows so that the sampling percentage
    is the fraction of measured rows. ``mixed-*`` follows the two-part
    construction: half uniform (with DC), the rest from the density, skipping
    rows already taken.
    """
    if scheme == "uniform":
        return sample_uniform(grid, m, seed, False, kind, distinct=True)
    if scheme == "uniform-dc":
        return sample_uniform(grid, m, seed, True, kind, distinct=True)
    if scheme in ("optimal", "inverse-square", "hyperbolic-cross"):
        if kind == WALSH and scheme != "optimal":
            raise ValueError(f"scheme {scheme!r} is defined for Fourier sampling only")
        pat = sample_vds(_vds_density(scheme, grid, kind), m, seed, distinct=True)
        return replace(pat, scheme=scheme)
    if scheme == "half-half":
        return sample_half_half(grid, m, seed, kind)
    if scheme == "multilevel":
        r_levels, r0, a = multilevel or MULTILEVEL_DEFAULTS[kind]
        return sample_multilevel(grid, m, r_levels, r0, a, seed, kind)
    if scheme in ("mixed-optimal", "mixed-inverse-square"):
        if kind == WALSH and scheme != "mixed-optimal":
            raise ValueError(f"scheme {scheme!r} is defined for Fourier sampling only")
        half = sample_uniform(grid, max(1, m // 2), seed, True, kind, distinct=True)
        extra = sample_vds(_vds_density(scheme, grid, kind), m, seed + 1_000_003, distinct=True).draws()
        # draws() is sorted; reorder by a fresh permutation so the fill is not biased to low rows
        order = make_rng(seed + 2_000_003).permutation(extra.size)
        taken = set(half.rows.tolist())
        fill = [r for r in extra[order] if r not in taken][: m - half.distinct]
        rows = np.concatenate([half.rows, np.asarray(fill, dtype=np.int64)])
        return Pattern.from_draws(grid, kind, rows, scheme, seed)
    raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")


@dataclass
class ExperimentSpec:
    image: str = "shepp-logan-64"
    kind: str = FOURIER
    schemes: Tuple[str, ...] = ("uniform", "optimal")
    pcts: Tuple[float, ...] = (25.0,)
    trials: int = 20
    base_seed: int = 0
    solver: SolverConfig = field(default_factory=SolverConfig)
    out_dir: Optional[str] = None
    protocol: str = "psnr"  # psnr | stability | robustness
    snrs: Tuple[float, ...] = (20.0,)
    multilevel: Optional[Tuple[int, int, float]] = None
    frames: str = "first"  # first | all | none

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if any(not 0 < p <= 100 for p in self.pcts):
            raise ValueError("percentages must lie in (0, 100]")
        if self.kind not in (FOURIER, WALSH):
            raise ValueError(f"unknown measurement kind {self.kind!r}")
        if self.protocol not in ("psnr", "stability", "robustness"):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ValueError(f"unknown scheme {s!r}; choose from {', '.join(SCHEMES)}")


def rescale_100(x):
    """Affine map of ``x`` onto [0, 100] (constant images map to 0)."""
    x = np.asarray(x, dtype=float)
    lo, hi = float(x.min()), float(x.max())
    return np.zeros_like(x) if hi == lo else 100.0 * (x - lo) / (hi - lo)


def run_trial(job) -> Dict:
    spec, x, scheme, pct, snr, trial = job
    grid = Grid.from_shape(x.shape)
    m = max(1, int(round(pct / 100.0 * grid.size)))
    seed = spec.base_seed + trial
    pat = make_pattern(scheme, grid, spec.kind, m, seed, spec.multilevel)
    op = MeasurementOp(pat)
    cfg = spec.solver
    target = x
    if spec.protocol == "stability":
        target = x + noise_at_snr(x, snr, make_rng(seed + 7_000_001))
        y = op.apply(target)
    elif spec.protocol == "robustness":
        y0 = op.apply(x)
        h = noise_at_snr(y0, snr, make_rng(seed + 7_000_001))
        y = y0 + h
        cfg = replace(cfg, eta=float(np.linalg.norm(h)))
    else:
        y = op.apply(x)
    res = solve_tv(op, y, cfg)
    z = res.x_hat
    row = {
        "scheme": scheme, "pct": pct, "snr": snr if spec.protocol != "psnr" else math.inf,
        "trial": trial, "seed": seed, "m": pat.m, "m_effective": op.m_effective,
        "psnr": psnr(target, z, peak=100.0), "rel_l2_image": rel_error(target, z),
        "rel_l2_gradient": rel_grad_error(target, z), "residual": res.residual,
        "iterations": res.iterations, "converged": int(res.converged),
    }
    if spec.out_dir and (spec.frames == "all" or (spec.frames == "first" and trial == 0)):
        frames = Path(spec.out_dir) / "frames"
        frames.mkdir(parents=True, exist_ok=True)
        img = np.clip(np.real(z), 0, 100) / 100.0
        tag = f"{scheme}_p{pct:g}" + (f"_snr{snr:g}" if spec.protocol != "psnr" else "") + f"_t{trial}"
        if img.ndim == 2:
            save_image(frames / f"{tag}.pgm", img)
        elif img.ndim == 3:
            save_image(frames / f"{tag}_mid.pgm", img[img.shape[0] // 2])
        else:
            save_image(frames / f"{tag}.raw", img)
    return row


COLUMNS = ["kind", "protocol", "tv_mode", "scheme", "pct", "snr", "trial", "seed", "m", "m_effective",
           "psnr", "rel_l2_image", "rel_l2_gradient", "residual", "iterations", "converged"]


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("TVCI_THREADS", "1")))
    except ValueError:
        return 1


def run_experiment(spec: ExperimentSpec) -> List[Dict]:
    x = rescale_100(load_image(spec.image))
    snrs = spec.snrs if spec.protocol != "psnr" else (math.inf,)
    jobs = [(spec, x, s, float(p), float(snr), t)
            for s in spec.schemes for p in spec.pcts for snr in snrs for t in range(spec.trials)]
    workers = min(worker_count(), len(jobs))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(run_trial, jobs))
    else:
        rows = [run_trial(j) for j in jobs]
    for r in rows:
        r.update(kind=spec.kind, protocol=spec.protocol, tv_mode=spec.solver.tv_mode)
    rows.sort(key=lambda r: (r["scheme"], r["pct"], r["snr"], r["trial"]))
    if spec.out_dir:
        Path(spec.out_dir).mkdir(parents=True, exist_ok=True)
        with open(Path(spec.out_dir) / "results.csv", "w", newline="") as fh:
            fh.write(rows_to_csv(rows))
    return rows


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def rows_to_csv(rows: Sequence[Dict]) -> str:
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r[c]) for c in COLUMNS])
    return buf.getvalue()


def summarize(rows: Sequence[Dict], metric: str = "psnr") -> Dict[Tuple[str, float, float], float]:
    """Trial means of ``metric`` keyed by ``(scheme, pct, snr)``."""
    acc: Dict[Tuple[str, float, float], List[float]] = {}
    for r in rows:
        acc.setdefault((r["scheme"], r["pct"], r["snr"]), []).append(r[metric])
    return {k: float(np.mean(v)) for k, v in acc.items()}


def spec_dict(spec: ExperimentSpec) -> Dict:
    return asdict(spec)
