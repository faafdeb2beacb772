"""Acceptance checks shared by ``tvci verify`` and the test suite.

Each check returns a :class:`CheckResult`; none of them raises on a failed
comparison, so a full run always reports every line.
"""
from __future__ import annotations

import math
import os
import tempfile
import time
from dataclasses import dataclass
from typing import Callable, Dict, List

import numpy as np

from .densities import build_density, gamma_constant
from .experiments import ExperimentSpec, run_experiment, summarize
from .gradient import fourier_multiplier, tv_norm
from .grid import Grid, fourier_freqs_1d
from .operators import FOURIER_HAAR_C, MeasurementOp, fourier_haar_entry, incoherence_theta, walsh_haar_entry
from .patterns import combine, sample_uniform, sample_vds
from .phantoms import piecewise_constant_1d
from .solver import SolverConfig, solve_tv
from .transforms import (_haar_row_labels, dft_forward, haar_forward, haar_vector_1d, oracle_apply,
                         oracle_rows, wht_forward)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _grids(limit=4096, dims=(1, 2, 3)):
    for d in dims:
        N = 2
        while N ** d <= limit:
            yield Grid(N, d)
            N *= 2


def check_transforms() -> CheckResult:
    rng = np.random.default_rng(0)
    worst = 0.0
    for g in _grids():
        X = rng.standard_normal((g.size, 3))
        imgs = X.T.reshape((3,) + g.shape)
        for kind, f in (("dft", dft_forward), ("wht", wht_forward), ("haar", haar_forward)):
            D = oracle_apply(kind, g, X)
            F = f(imgs, g.d).reshape(3, -1).T
            worst = max(worst, float((np.linalg.norm(F - D, axis=0) / np.linalg.norm(D, axis=0)).max()))
    return CheckResult("transforms-vs-oracles", worst <= 1e-10, f"max relative error {worst:.2e}")


def check_commuting() -> CheckResult:
    rng = np.random.default_rng(1)
    worst = 0.0
    for N in (8, 16, 32):
        lam = fourier_multiplier(N)
        for d in (1, 2, 3):
            x = rng.standard_normal((100,) + (N,) * d)
            Fx = dft_forward(x, d)
            for j in range(1, d + 1):
                lhs = dft_forward(_batch_grad(x, j), d)
                shape = [1] * (d + 1)
                shape[1 + d - j] = N
                rhs = lam.reshape(shape) * Fx
                num = np.linalg.norm((lhs - rhs).reshape(100, -1), axis=1)
                den = np.linalg.norm(lhs.reshape(100, -1), axis=1)
                worst = max(worst, float((num / den).max()))
    return CheckResult("commuting-property", worst <= 1e-10, f"max relative residual {worst:.2e}")


def _batch_grad(x, j):
    # grad_j on the trailing d axes of a batch
    ax = x.ndim - j
    return np.roll(x, -1, axis=ax) - x


def check_walsh_haar() -> CheckResult:
    worst = 0.0
    sign_ok = True
    for N in (8, 16, 32, 64):
        g = Grid(N, 1)
        H = oracle_rows("wht", g, 0, N) / math.sqrt(N)
        Wt = oracle_rows("haar", g, 0, N)
        G = H @ Wt.T
        expect = np.zeros((N, N))
        for col, (j, e, n) in enumerate(_haar_row_labels(g)):
            for i in range(N):
                hit = i < 2 ** j if e[0] == 0 else 2 ** j <= i < 2 ** (j + 1)
                expect[i, col] = 2.0 ** (-j / 2) if hit else 0.0
                sign_ok &= abs(walsh_haar_entry(i, j, n[0], e[0], N) - G[i, col]) <= 1e-12
        worst = max(worst, float(np.abs(np.abs(G) - expect).max()))
    ok = worst <= 1e-12 and sign_ok
    return CheckResult("walsh-haar-gram", ok, f"max magnitude deviation {worst:.2e}, signed entries match: {sign_ok}")


def check_fourier_haar() -> CheckResult:
    worst = 0.0
    const = 0.0
    N = 2
    while N <= 64:
        r = N.bit_length() - 1
        omegas = fourier_freqs_1d(N)
        for j in range(r):
            for n in range(2 ** j):
                for e in (0, 1):
                    F = dft_forward(haar_vector_1d(N, j, n, e))
                    for k, w in enumerate(omegas):
                        c = fourier_haar_entry(int(w), j, n, e, N)
                        worst = max(worst, abs(c - F[k]) / max(1.0, abs(F[k])))
                        const = max(const, abs(c) / math.sqrt(N) * max(abs(int(w)), 2 ** j) / 2 ** (j / 2))
        N *= 2
    ok = worst <= 1e-10 and const <= FOURIER_HAAR_C + 1e-12
    return CheckResult("fourier-haar-closed-form", ok,
                       f"max error {worst:.2e}; decay constant {const:.6f} (bound {FOURIER_HAAR_C})")


def check_gamma_scaling() -> CheckResult:
    parts = []
    ok = True

    def spread(vals):
        return max(vals) / min(vals)

    Ns = [16, 32, 64, 128, 256, 512, 1024]
    for d in (1, 2, 3):
        s = spread([gamma_constant(build_density("optimal_fourier", Grid(N, d))) / math.log(N) for N in Ns])
        ok &= s <= 3
        parts.append(f"optimal d={d} {s:.3f}")
    s = spread([gamma_constant(build_density("radial", Grid(N, 3), alpha=2.0)) / N for N in Ns[:5]])
    ok &= s <= 4
    parts.append(f"radial d=3 {s:.3f}")
    for d in (1, 2, 3):
        s = spread([gamma_constant(build_density("hyperbolic_cross", Grid(N, d))) / math.log(N) ** d
                    for N in Ns[:5]])
        ok &= s <= 4
        parts.append(f"hypcross d={d} {s:.3f}")
    for d in (2, 3):
        s = spread([gamma_constant(build_density("optimal_walsh", Grid(N, d))) / math.log(N) for N in Ns])
        ok &= s <= 3
        parts.append(f"walsh d={d} {s:.3f}")
    return CheckResult("gamma-scaling", ok, "max/min ratios: " + ", ".join(parts))


def _poincare_signals(N, d, count, rng):
    half = count // 2
    noise = rng.standard_normal((half,) + (N,) * d)
    walk = rng.standard_normal((count - half,) + (N,) * d)
    for ax in range(1, d + 1):
        walk = np.cumsum(walk, axis=ax)
    x = np.concatenate([noise, walk])
    return x - x.reshape(count, -1).mean(axis=1).reshape((count,) + (1,) * d)


def check_poincare() -> CheckResult:
    rng = np.random.default_rng(6)
    ok = True
    worst = 0.0
    for N in (16, 32, 64, 128, 256, 512, 1024):
        for x in _poincare_signals(N, 1, 1000, rng):
            ratio = np.linalg.norm(x) / (math.sqrt(N) * tv_norm(x, "anisotropic"))
            worst = max(worst, ratio)
    ok &= worst <= 1.0
    recorded = []
    for d in (2, 3):
        vals = []
        for N in ((8, 16, 32, 64) if d == 2 else (4, 8, 16)):
            xs = _poincare_signals(N, d, 100, rng)
            vals.append(max(np.linalg.norm(x) * 2 ** (d / 2 - 1) / tv_norm(x, "anisotropic") for x in xs))
        recorded.append(f"d={d} " + "/".join(f"{v:.3f}" for v in vals))
        ok &= all(np.isfinite(vals))
    return CheckResult("poincare", ok, f"d=1 max ||x||/(sqrt(N) TV) = {worst:.4f}; recorded {'; '.join(recorded)}")


def check_theta() -> CheckResult:
    worst = 0.0
    N = 2
    while N <= 64:
        p = build_density("optimal_walsh", Grid(N, 2))
        worst = max(worst, incoherence_theta(p, "walsh_haar") ** 2 / gamma_constant(p))
        N *= 2
    return CheckResult("theta-vs-gamma", worst <= 4.0, f"max Theta^2/Gamma {worst:.4f} (bound 4)")


def check_exact_recovery() -> CheckResult:
    g = Grid(256, 1)
    p = build_density("optimal_fourier", g)
    errs = []
    for t in range(20):
        x = piecewise_constant_1d(256, 5, t).image
        pat = combine(sample_uniform(g, 60, 1000 + t, include_dc=True), sample_vds(p, 60, 2000 + t))
        op = MeasurementOp(pat)
        res = solve_tv(op, op.apply(x), SolverConfig())
        errs.append(float(np.linalg.norm(res.x_hat - x) / np.linalg.norm(x)))
    hits = sum(e <= 1e-2 for e in errs)
    return CheckResult("exact-recovery-1d", hits >= 18, f"{hits}/20 trials within 1e-2 (worst {max(errs):.2e})")


def check_robustness_trend() -> CheckResult:
    spec = ExperimentSpec(image="shepp-logan-64", schemes=("uniform", "inverse-square"), pcts=(25.0,),
                          trials=10, protocol="robustness", snrs=(20.0,))
    rows = run_experiment(spec)
    img = summarize(rows, "rel_l2_image")
    grd = summarize(rows, "rel_l2_gradient")
    iu, iv = img[("uniform", 25.0, 20.0)], img[("inverse-square", 25.0, 20.0)]
    gu, gv = grd[("uniform", 25.0, 20.0)], grd[("inverse-square", 25.0, 20.0)]
    gr = max(gu, gv) / min(gu, gv)
    ok = iv < iu and gr < 2.0
    return CheckResult("robustness-trend", ok,
                       f"image err uniform {iu:.4f} vs vds {iv:.4f}; gradient err uniform {gu:.4f} vs vds {gv:.4f} "
                       f"(ratio {gr:.3f}, limit 2)")


def check_psnr_ordering() -> CheckResult:
    ok = True
    parts = []
    for kind in ("fourier", "walsh"):
        spec = ExperimentSpec(image="shepp-logan-64", kind=kind, schemes=("uniform", "optimal", "multilevel"),
                              pcts=(10.0, 20.0), trials=10)
        mean = summarize(run_experiment(spec))
        for pct in (10.0, 20.0):
            base = mean[("uniform", pct, math.inf)]
            for s in ("optimal", "multilevel"):
                gain = mean[(s, pct, math.inf)] - base
                ok &= gain >= 3.0
                parts.append(f"{kind} {pct:g}% {s} +{gain:.2f}dB")
    return CheckResult("psnr-ordering", ok, ", ".join(parts))


def check_determinism() -> CheckResult:
    from .cli import main

    outs = []
    with tempfile.TemporaryDirectory() as tmp:
        for k in range(2):
            out = os.path.join(tmp, f"run{k}")
            code = main(["experiment", "run", "--image", "shepp-logan-32", "--scheme", "uniform,multilevel,optimal",
                         "--pct", "15,30", "--trials", "2", "--seed", "5", "--out", out, "--quiet"])
            with open(os.path.join(out, "results.csv"), "rb") as fh:
                outs.append((code, fh.read()))
    same = outs[0][1] == outs[1][1] and outs[0][0] == outs[1][0] == 0
    return CheckResult("determinism", same, f"CSV bytes identical: {same} ({len(outs[0][1])} bytes)")


CHECKS: Dict[str, Callable[[], CheckResult]] = {
    "transforms": check_transforms,
    "commuting": check_commuting,
    "walsh-haar": check_walsh_haar,
    "fourier-haar": check_fourier_haar,
    "gamma": check_gamma_scaling,
    "poincare": check_poincare,
    "theta": check_theta,
    "recovery": check_exact_recovery,
    "robustness": check_robustness_trend,
    "psnr": check_psnr_ordering,
    "determinism": check_determinism,
}


def run_check(key: str) -> CheckResult:
    t = time.perf_counter()
    res = CHECKS[key]()
    res.seconds = time.perf_counter() - t
    return res


def run_all(keys=None, echo=print) -> List[CheckResult]:
    out = []
    for key in keys or CHECKS:
        res = run_check(key)
        if echo:
            echo(res.line())
        out.append(res)
    return out
