"""Constrained TV minimization ``min ||z||_TV s.t. ||Az - y||_2 <= eta``.

Nesterov's smoothing method (the NESTA scheme): the TV term is replaced by a
Huber-smoothed version with parameter ``mu``, minimized by an accelerated
projected-gradient loop, and ``mu`` is lowered over a few continuation
stages with each stage warm-started from the previous one. The feasible set is
handled by a closed-form projection, which relies on ``A A^* = c I``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .gradient import ISOTROPIC, grad, grad_adjoint, group_magnitudes, tv_norm
from .operators import MeasurementOp


@dataclass(frozen=True)
class SolverConfig:
    mu: float = 0.2
    outer_iters: int = 5
    inner_iters: int = 5000
    tolerance: float = 1e-5
    delta: float = 1e-5  # relative step size below which an inner loop stops
    eta: float = 0.0
    tv_mode: str = ISOTROPIC
    continuation: bool = True

    def __post_init__(self):
        if self.mu <= 0 or self.tolerance <= 0 or self.delta < 0:
            raise ValueError("mu and tolerance must be positive, delta nonnegative")
        if self.outer_iters < 1 or self.inner_iters < 1:
            raise ValueError("iteration counts must be >= 1")
        if self.eta < 0:
            raise ValueError("eta must be nonnegative")


@dataclass
class ReconResult:
    x_hat: np.ndarray
    objective_trace: List[float] = field(default_factory=list)  # true TV at each stage end
    smoothed_trace: List[float] = field(default_factory=list)
    residual: float = 0.0
    iterations: int = 0
    stage_iterations: List[int] = field(default_factory=list)
    mu_schedule: List[float] = field(default_factory=list)
    converged: bool = True


def smoothed_tv(x, mu, tv_mode=ISOTROPIC):
    """Huber-smoothed TV value and its gradient ``grad^T (g / max(|g|, mu))``."""
    g = grad(x)
    mag = group_magnitudes(g, tv_mode)
    val = float(np.where(mag >= mu, mag - mu / 2, mag * mag / (2 * mu)).sum())
    return val, grad_adjoint(g / np.maximum(mag, mu))


def smoothed_tv_gradient(x, mu, tv_mode=ISOTROPIC):
    if mu <= 0:
        raise ValueError("mu must be positive")
    return smoothed_tv(x, mu, tv_mode)[1]


def project_l2_ball(z, opr: MeasurementOp, y, eta):
    """Euclidean projection onto ``{w : ||A w - y||_2 <= eta}``."""
    r = opr.apply(z) - y
    nr = float(np.linalg.norm(r))
    if nr <= eta:
        return z
    return z - opr.apply_adjoint(r * (1.0 - eta / nr)) / opr.gram_scale


def _nesta_stage(opr, y, x0, mu, eta, lip, tol, delta, max_iter, tv_mode):
    xk = x0
    acc = np.zeros_like(x0)
    hist = []
    yk = x0
    k = 0
    stopped = False
    for k in range(max_iter):
        fx, g = smoothed_tv(xk, mu, tv_mode)
        y_prev = yk
        yk = project_l2_ball(xk - g / lip, opr, y, eta)
        acc += 0.5 * (k + 1) * g
        zk = project_l2_ball(x0 - acc / lip, opr, y, eta)
        tau = 2.0 / (k + 3)
        xk = tau * zk + (1 - tau) * yk
        if len(hist) >= 10:
            ref = np.mean(hist[-10:])
            if ref > 0 and abs(fx - ref) / ref <= tol:
                stopped = True
                break
        hist.append(fx)
        if k > 0 and delta > 0:
            step = np.linalg.norm(yk - y_prev)
            if step <= delta * max(np.linalg.norm(yk), np.finfo(float).tiny):
                stopped = True
                break
        if fx == 0.0 and k > 0:
            stopped = True
            break
    return yk, k + 1, stopped


def solve_tv(opr: MeasurementOp, y, cfg: SolverConfig = SolverConfig()) -> ReconResult:
    y = np.asarray(y)
    if y.shape != (opr.m_effective,):
        raise ValueError(f"expected {opr.m_effective} measurements, got shape {y.shape}")
    dtype = np.complex128 if opr.kind == "fourier" else np.float64
    # Minimum-norm data-consistent start; its peak sets the scale for mu.
    x0 = (opr.apply_adjoint(y) / opr.gram_scale).astype(dtype)
    peak = float(np.max(np.abs(x0)))
    if peak == 0.0:
        return ReconResult(np.zeros(opr.grid.shape, dtype=dtype), [0.0], [0.0], 0.0, 0, [], [], True)
    x0 = project_l2_ball(x0, opr, y, cfg.eta)
    mu_final = cfg.mu * peak / 100.0
    T = cfg.outer_iters
    # Geometric continuation from just below the largest gradient of the start point.
    mu0 = 0.9 * float(np.max(group_magnitudes(grad(x0), cfg.tv_mode)))
    if cfg.continuation and T > 1 and mu0 > mu_final:
        mus = [mu0 * (mu_final / mu0) ** ((t + 1) / T) for t in range(T)]
        tols = [0.1 * (cfg.tolerance / 0.1) ** ((t + 1) / T) for t in range(T)]
    else:
        mus = [mu_final] * T
        tols = [cfg.tolerance] * T
    d = opr.grid.d
    res = ReconResult(x0, mu_schedule=mus)
    x = x0
    all_stopped = True
    for mu, tol in zip(mus, tols):
        x, its, stopped = _nesta_stage(opr, y, x, mu, cfg.eta, 4.0 * d / mu, tol, cfg.delta,
                                       cfg.inner_iters, cfg.tv_mode)
        all_stopped = all_stopped and stopped
        res.stage_iterations.append(its)
        res.iterations += its
        res.objective_trace.append(tv_norm(x, cfg.tv_mode))
        res.smoothed_trace.append(smoothed_tv(x, mu, cfg.tv_mode)[0])
    res.x_hat = x
    res.residual = float(np.linalg.norm(opr.apply(x) - y))
    res.converged = all_stopped
    return res
