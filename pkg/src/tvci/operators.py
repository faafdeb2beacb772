"""Subsampled Fourier / Walsh measurement operators and Haar incoherence.

``A = m^{-1/2} P_Omega T`` with ``T`` the row-ordered DFT or sequency WHT.
Repeated draws are collapsed (each distinct row appears once) while the scale
keeps the nominal draw count, so ``A A^* = (N^d / m) I``.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

from .densities import Density
from .grid import FOURIER, WALSH, Grid, axis_freqs, freq_mesh
from .patterns import Pattern
from .transforms import (_walsh_sign, dft_adjoint, dft_forward, haar_inverse,
                         wht_adjoint, wht_forward)

# |F psi^{(e)}_{j,n}(omega)| / sqrt(N) <= FOURIER_HAAR_C * 2^{j/2} / max(|omega|, 2^j).
# Proof sketch: the l1 norm of psi bounds it by 2^{-j/2}, and |1 - e^{-2 pi i w/N}| >= 4|w|/N
# bounds the geometric-sum closed form by 2^{j/2}/|w|.
FOURIER_HAAR_C = 1.0
EXACT_COLUMN_CAP = 2 ** 14


class MeasurementOp:
    def __init__(self, pattern: Pattern, m: int = None):
        self.pattern = pattern
        self.grid = pattern.grid
        self.kind = pattern.convention
        self.m = pattern.m if m is None else int(m)
        self.idx = pattern.rows - 1
        self.scale = 1.0 / math.sqrt(self.m)

    @property
    def m_effective(self) -> int:
        return int(self.idx.size)

    @property
    def gram_scale(self) -> float:
        """``c`` with ``A A^* = c I``."""
        return self.grid.size / self.m

    @property
    def dtype(self):
        return np.complex128 if self.kind == FOURIER else np.float64

    def _check(self, x):
        x = np.asarray(x)
        if x.shape != self.grid.shape:
            raise ValueError(f"signal shape {x.shape} does not match grid {self.grid}")
        return x

    def forward_full(self, x):
        return dft_forward(x) if self.kind == FOURIER else wht_forward(x)

    def apply(self, x):
        x = self._check(x)
        return self.forward_full(x).ravel()[self.idx] * self.scale

    def apply_adjoint(self, y):
        y = np.asarray(y)
        if y.shape != (self.m_effective,):
            raise ValueError(f"expected {self.m_effective} measurements, got shape {y.shape}")
        full = np.zeros(self.grid.size, dtype=np.result_type(y.dtype, self.dtype))
        full[self.idx] = y * self.scale
        full = full.reshape(self.grid.shape)
        out = dft_adjoint(full) if self.kind == FOURIER else wht_adjoint(full)
        return out

    def dense(self) -> np.ndarray:
        """Dense matrix (tests / small grids)."""
        eye = np.eye(self.grid.size).reshape((self.grid.size,) + self.grid.shape)
        full = dft_forward(eye, self.grid.d) if self.kind == FOURIER else wht_forward(eye, self.grid.d)
        return full.reshape(self.grid.size, -1)[:, self.idx].T * self.scale

    def gradient_multiplier(self, j: int) -> np.ndarray:
        """Per-measurement diagonal ``D`` with ``A grad_j x = D * (A x)`` (Fourier only)."""
        if self.kind != FOURIER:
            raise ValueError("the commuting identity holds for Fourier measurements only")
        d = self.grid.d
        if not 1 <= j <= d:
            raise ValueError(f"axis j must be in 1..{d}")
        w = self.pattern.freqs()[:, d - j]
        return np.exp(2j * np.pi * w / self.grid.N) - 1


def _check_haar_args(j, n, e, N):
    r = N.bit_length() - 1
    if not 0 <= j <= r - 1 or not 0 <= n < 2 ** j or e not in (0, 1):
        raise ValueError(f"bad Haar index j={j} n={n} e={e} for N={N}")
    return r


def fourier_haar_entry(omega: int, j: int, n: int, e: int, N: int) -> complex:
    """``(F psi^{(e)}_{j,n})`` at frequency ``omega`` (1D, unnormalized DFT).

    ``psi^{(0)}`` is the scale-``j`` box function. Geometric-sum closed form.
    """
    r = _check_haar_args(j, n, e, N)
    if not -N // 2 < omega <= N // 2:
        raise ValueError(f"frequency {omega} out of range for N={N}")
    if omega == 0:
        return complex(2.0 ** ((r - j) / 2)) if e == 0 else 0j
    half = cmath.exp(-2j * math.pi * omega / 2 ** (j + 1))
    num = cmath.exp(-2j * math.pi * omega * n / 2 ** j) * (1 + (-1) ** e * half) * (1 - half)
    return 2.0 ** ((j - r) / 2) * num / (1 - cmath.exp(-2j * math.pi * omega / N))


def walsh_haar_entry(i: int, j: int, n: int, e: int, N: int) -> float:
    """``<N^{-1/2} h_i, psi^{(e)}_{j,n}>`` for the sequency-ordered Walsh row ``h_i``."""
    r = _check_haar_args(j, n, e, N)
    if not 0 <= i < N:
        raise ValueError(f"sequency {i} out of range for N={N}")
    inside = i < 2 ** j if e == 0 else 2 ** j <= i < 2 ** (j + 1)
    if not inside:
        return 0.0
    return 2.0 ** (-j / 2) * _walsh_sign(i, n << (r - j), r)


def _axis_magnitudes(N, basis):
    """``mags[j][e]``: 1D unitary magnitudes per row (row order), any translation."""
    r = N.bit_length() - 1
    out = []
    for j in range(r):
        if basis == "fourier_haar":
            w = axis_freqs(N, FOURIER)
            row = [np.array([abs(fourier_haar_entry(int(o), j, 0, e, N)) for o in w]) / math.sqrt(N)
                   for e in (0, 1)]
        else:
            row = [np.array([abs(walsh_haar_entry(i, j, 0, e, N)) for i in range(N)]) for e in (0, 1)]
        out.append(row)
    return out


def _rowmax_tensor(grid: Grid, basis: str) -> np.ndarray:
    """Max over Haar columns of |u_{i, col}| for every row ``i`` (row layout)."""
    d, N = grid.d, grid.N
    mags = _axis_magnitudes(N, basis)
    best = np.zeros(grid.shape)

    def outer(vecs):
        out = np.ones((1,) * d)
        for k, v in enumerate(vecs):
            shape = [1] * d
            shape[k] = N
            out = out * v.reshape(shape)
        return out

    best = np.maximum(best, outer([mags[0][0]] * d))  # scaling column
    for j in range(grid.r):
        for code in range(1, 2 ** d):
            e = [(code >> (d - 1 - k)) & 1 for k in range(d)]
            best = np.maximum(best, outer([mags[j][ek] for ek in e]))
    return best


def _rowmax_columns(grid: Grid, basis: str, batch: int = 256) -> np.ndarray:
    """Brute-force row maxima from fast transforms of every Haar basis vector."""
    if grid.size > EXACT_COLUMN_CAP:
        raise ValueError(f"column scan limited to N**d <= {EXACT_COLUMN_CAP}")
    T = dft_forward if basis == "fourier_haar" else wht_forward
    best = np.zeros(grid.size)
    norm = float(grid.N) ** (-grid.d / 2)
    for s in range(0, grid.size, batch):
        k = min(batch, grid.size - s)
        coef = np.zeros((k, grid.size))
        coef[np.arange(k), s + np.arange(k)] = 1.0
        cols = haar_inverse(coef, grid)
        vals = np.abs(T(cols, grid.d)).reshape(k, -1) * norm
        best = np.maximum(best, vals.max(axis=0))
    return best.reshape(grid.shape)


def _rowmax_bound(grid: Grid, basis: str) -> np.ndarray:
    d, N = grid.d, grid.N
    if basis == "walsh_haar":
        a = [np.abs(v) for v in freq_mesh(grid, WALSH)]
        t = a[0]
        for v in a[1:]:
            t = np.maximum(t, v)
        jstar = np.floor(np.log2(np.maximum(t, 1))).astype(int)
        return np.broadcast_to(2.0 ** (-jstar * d / 2.0), grid.shape)
    a = [np.abs(v).astype(float) for v in freq_mesh(grid, FOURIER)]
    best = np.zeros(grid.shape)
    for j in range(grid.r):
        prod = FOURIER_HAAR_C ** d
        for v in a:
            prod = prod * 2.0 ** (j / 2) / np.maximum(v, 2.0 ** j)
        best = np.maximum(best, prod)
    return best


def incoherence_theta(p: Density, basis: str, mode: str = "exact") -> float:
    """``max_{i,col} |u_{i,col}| / sqrt(p_i)`` for ``U = N^{-d/2} T W``.

    ``basis`` is ``fourier_haar`` or ``walsh_haar``. ``mode``: ``exact``
    (tensor factorization of U), ``columns`` (brute-force scan, small grids)
    or ``bound`` (per-row upper estimate).
    """
    conv = {"fourier_haar": FOURIER, "walsh_haar": WALSH}.get(basis)
    if conv is None:
        raise ValueError(f"unknown basis {basis!r}")
    if p.convention != conv:
        raise ValueError(f"{basis} needs a {conv} density")
    mass = p.mass
    if np.any(mass <= 0):
        raise ValueError("incoherence is undefined for a density with zero mass somewhere")
    rowmax = {"exact": _rowmax_tensor, "columns": _rowmax_columns, "bound": _rowmax_bound}[mode](p.grid, basis)
    return float(np.max(rowmax / np.sqrt(mass)))


__all__ = ["MeasurementOp", "fourier_haar_entry", "walsh_haar_entry", "incoherence_theta",
           "FOURIER_HAAR_C"]
