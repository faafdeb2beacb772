"""Reconstruction error metrics and the stability/robustness probes."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Union

import numpy as np

from .gradient import ISOTROPIC, grad
from .operators import MeasurementOp
from .patterns import make_rng
from .solver import SolverConfig, solve_tv

PSNR_CAP = 200.0


def best_s_term(v, s: int, norm: str = "l1") -> float:
    """Sum of all but the ``s`` largest magnitudes.

    ``l1``: entries of ``v`` (any shape). ``l21``: groups are taken along
    axis 0, matching the ``(d, ...)`` layout of :func:`tvci.gradient.grad`,
    so each pixel's gradient vector is one group.
    """
    v = np.asarray(v)
    if norm == "l1":
        mags = np.abs(v).ravel()
    elif norm == "l21":
        mags = np.sqrt(np.sum(np.abs(v) ** 2, axis=0)).ravel()
    else:
        raise ValueError(f"unknown norm {norm!r}")
    if not 0 <= s <= mags.size:
        raise ValueError(f"s must be in 0..{mags.size}, got {s}")
    if s == 0:
        return float(mags.sum())
    return float(np.sort(mags)[: mags.size - s].sum())


def rel_error(ref, rec) -> float:
    return float(np.linalg.norm(np.ravel(rec) - np.ravel(ref)) / np.linalg.norm(np.ravel(ref)))


def rel_grad_error(ref, rec) -> float:
    """``||grad(rec - ref)||_2 / ||grad(ref)||_2`` over all gradient entries."""
    ref = np.asarray(ref)
    return float(np.linalg.norm(grad(np.asarray(rec) - ref)) / np.linalg.norm(grad(ref)))


def psnr(ref, rec, peak: float = None) -> float:
    ref = np.asarray(ref)
    rec = np.asarray(rec)
    if ref.shape != rec.shape:
        raise ValueError(f"shape mismatch {ref.shape} vs {rec.shape}")
    peak = float(np.max(np.abs(ref))) if peak is None else float(peak)
    rmse = math.sqrt(float(np.mean(np.abs(rec - ref) ** 2)))
    if rmse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, 20.0 * math.log10(peak / rmse))


def snr_db(signal, noise) -> float:
    n = float(np.linalg.norm(noise))
    return math.inf if n == 0 else 20.0 * math.log10(float(np.linalg.norm(signal)) / n)


def noise_at_snr(ref, snr: float, rng: np.random.Generator):
    """Gaussian perturbation ``h`` (complex if ``ref`` is) with ``20 log10(|ref|/|h|) = snr``."""
    ref = np.asarray(ref)
    if math.isinf(snr):
        return np.zeros_like(ref)
    h = rng.standard_normal(ref.shape)
    if np.iscomplexobj(ref):
        h = h + 1j * rng.standard_normal(ref.shape)
    return h * (np.linalg.norm(ref) * 10.0 ** (-snr / 20.0) / np.linalg.norm(h))


@dataclass
class ErrorReport:
    rel_l2_image: float
    rel_l2_gradient: float
    psnr: float
    sigma_s: Dict[int, float] = field(default_factory=dict)
    snr_of_perturbation: float = math.inf


def error_report(ref, rec, s_values: Sequence[int] = (), tv_mode: str = ISOTROPIC,
                 snr: float = math.inf, peak: float = None) -> ErrorReport:
    g = grad(np.asarray(ref))
    norm = "l21" if tv_mode == ISOTROPIC else "l1"
    return ErrorReport(rel_error(ref, rec), rel_grad_error(ref, rec), psnr(ref, rec, peak),
                       {int(s): best_s_term(g, int(s), norm) for s in s_values}, snr)


@dataclass
class ProbeCurve:
    kind: str  # "stability" or "robustness"
    snr: List[float]
    image_err: List[float]  # trial means
    grad_err: List[float]
    image_trials: np.ndarray = None  # (len(snr), trials)
    grad_trials: np.ndarray = None


def _ops(opr):
    return [opr] if isinstance(opr, MeasurementOp) else list(opr)


def stability_probe(x, opr: Union[MeasurementOp, Sequence[MeasurementOp]], cfg: SolverConfig,
                    snr_grid: Sequence[float], seed: int) -> ProbeCurve:
    """Perturb the image to ``x + h``, reconstruct from exact data of ``x + h``.

    One trial per operator; errors are relative to ``x + h``.
    """
    return _probe("stability", x, _ops(opr), cfg, snr_grid, seed)


def robustness_probe(x, opr: Union[MeasurementOp, Sequence[MeasurementOp]], cfg: SolverConfig,
                     snr_grid: Sequence[float], seed: int) -> ProbeCurve:
    """Perturb the data to ``y + h`` and solve with ``eta = ||h||``; errors are relative to ``x``."""
    return _probe("robustness", x, _ops(opr), cfg, snr_grid, seed)


def _probe(kind, x, ops, cfg, snr_grid, seed):
    if not len(snr_grid):
        raise ValueError("snr_grid must be nonempty")
    x = np.asarray(x, dtype=float)
    img = np.zeros((len(snr_grid), len(ops)))
    grd = np.zeros_like(img)
    for t, op in enumerate(ops):
        for k, snr in enumerate(snr_grid):
            rng = make_rng(seed + t)
            if kind == "stability":
                target = x + noise_at_snr(x, snr, rng)
                y, eta = op.apply(target), cfg.eta
            else:
                target = x
                y0 = op.apply(x)
                h = noise_at_snr(y0, snr, rng)
                y, eta = y0 + h, float(np.linalg.norm(h))
            run = SolverConfig(**{**cfg.__dict__, "eta": eta})
            z = solve_tv(op, y, run).x_hat
            img[k, t] = rel_error(target, z)
            grd[k, t] = rel_grad_error(target, z)
    return ProbeCurve(kind, [float(s) for s in snr_grid], img.mean(axis=1).tolist(),
                      grd.mean(axis=1).tolist(), img, grd)
