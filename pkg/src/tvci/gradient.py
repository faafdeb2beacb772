"""Periodic discrete gradient with its adjoint; TV semi-norms built on it.

Axis convention: the j-th partial derivative (1-based) is the Kronecker
product with the 1D difference in slot ``d - j + 1`` counted from the left,
so on an image array of shape ``(N,) * d`` it acts along numpy axis
``d - j``. ``j = 1`` is the fastest-varying (last) axis. For a 2D image
``X[row, col]``, ``grad_component(X, 1)[r, c] = X[r, c+1] - X[r, c]`` and
``grad_component(X, 2)[r, c] = X[r+1, c] - X[r, c]`` (indices mod N).
"""
from __future__ import annotations

import numpy as np

from .grid import fourier_freqs_1d

ISOTROPIC = "isotropic"
ANISOTROPIC = "anisotropic"


def _axis(j, d):
    if not 1 <= j <= d:
        raise ValueError(f"axis j must be in 1..{d}, got {j}")
    return d - j


def grad_component(x, j):
    x = np.asarray(x)
    ax = _axis(j, x.ndim)
    return np.roll(x, -1, axis=ax) - x


def grad(x):
    """Stacked gradient field of shape ``(d,) + x.shape``; component k is ``grad_j`` with j = k+1."""
    x = np.asarray(x)
    return np.stack([grad_component(x, j) for j in range(1, x.ndim + 1)])


def grad_adjoint(g):
    """``sum_j grad_j^T g_j`` (negative periodic divergence)."""
    g = np.asarray(g)
    d = g.shape[0]
    if g.ndim != d + 1:
        raise ValueError(f"gradient field must have shape (d, N, ..., N), got {g.shape}")
    out = np.zeros(g.shape[1:], dtype=g.dtype)
    for k in range(d):
        ax = _axis(k + 1, d)
        out += np.roll(g[k], 1, axis=ax) - g[k]
    return out


def group_magnitudes(g, mode=ISOTROPIC):
    """Per-group magnitudes: pixel-wise 2-norms (isotropic) or entry-wise moduli."""
    if mode == ISOTROPIC:
        return np.sqrt(np.sum(np.abs(g) ** 2, axis=0))
    if mode == ANISOTROPIC:
        return np.abs(g)
    raise ValueError(f"unknown TV mode {mode!r}")


def tv_norm(x, mode=ISOTROPIC) -> float:
    return float(group_magnitudes(grad(x), mode).sum())


def grad_sparsity(x, mode=ISOTROPIC, tol=0.0) -> int:
    """Number of nonzero gradient groups (pixels for isotropic, entries for anisotropic)."""
    return int(np.count_nonzero(group_magnitudes(grad(x), mode) > tol))


def fourier_multiplier(N):
    """Diagonal ``lambda_k = exp(2 pi i rho(k)/N) - 1`` in row order."""
    return np.exp(2j * np.pi * fourier_freqs_1d(N) / N) - 1


def dense_grad_1d(N):
    """Dense circulant 1D periodic difference matrix (oracle)."""
    D = -np.eye(N)
    D[np.arange(N), (np.arange(N) + 1) % N] += 1
    return D
