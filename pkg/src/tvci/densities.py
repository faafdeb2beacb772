"""Sampling densities over the frequency grid and their Gamma constants.

A density is stored as a mass array in row layout (``mass[k]`` is the
probability of the row ``lex_flatten(k + 1)``), so flattening it gives the
probabilities of flat rows ``1..N**d`` in order. Built-in kinds also keep a
closed form, which lets normalizers and Gamma be computed without
materializing huge grids: every built-in mass depends on ``|omega_k|`` only,
so sums run over ``{0..N/2}^d`` with per-axis multiplicities ``1, 2, ..., 2, 1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .grid import FOURIER, WALSH, FreqIndex, Grid, axis_freqs, freq_mesh, row_freqs
from .io import write_pgm

DENSE_CAP = 2 ** 24
_CHUNK = 2 ** 20

FOURIER_KINDS = ("uniform", "optimal_fourier", "inverse_square", "radial", "hyperbolic_cross")
WALSH_KINDS = ("uniform", "optimal_walsh")
NORMS = ("linf", "l2", "l1")


def _bar(a):
    return np.maximum(1, np.abs(a))


def q_from_bars(bars):
    """q_omega from the per-axis ``max(1, |omega_k|)`` arrays (broadcastable)."""
    d = len(bars)
    b = np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in bars])
    if d == 1:
        return np.sqrt(b[0])
    if d == 2:
        return np.maximum(b[0], b[1])
    if d == 3:
        hi = np.maximum(np.maximum(b[0], b[1]), b[2])
        lo = np.minimum(np.minimum(b[0], b[1]), b[2])
        mid = b[0] + b[1] + b[2] - hi - lo
        return hi * np.sqrt(mid)
    s = -np.sort(-np.stack(b, axis=-1), axis=-1)
    half = d // 2
    q = np.prod(s[..., :half], axis=-1)
    if d % 2:
        q = q * np.sqrt(s[..., half])
    return q


def q_omega(omega, d=None) -> float:
    """``q_omega``: product of the d/2 largest ``max(1, |omega_k|)`` (odd d: times sqrt of the next)."""
    coords = omega.coords if isinstance(omega, FreqIndex) else tuple(np.atleast_1d(omega))
    if d is not None and len(coords) != d:
        raise ValueError(f"expected {d} coordinates, got {coords}")
    return float(q_from_bars([_bar(c) for c in coords]))


def _norm(a, norm):
    a = [np.abs(np.asarray(v, dtype=float)) for v in a]
    if norm == "linf":
        out = a[0]
        for v in a[1:]:
            out = np.maximum(out, v)
        return out
    if norm == "l2":
        return np.sqrt(sum(v * v for v in a))
    if norm == "l1":
        return sum(a)
    raise ValueError(f"unknown norm {norm!r}")


def _unnormalized(kind, params, a, d):
    """Closed-form unnormalized mass at per-axis |coordinates| ``a``."""
    bars = [_bar(v) for v in a]
    if kind == "uniform":
        return np.ones(np.broadcast(*a).shape)
    if kind == "optimal_fourier":
        return 1.0 / q_from_bars(bars) ** 2
    if kind == "inverse_square":
        return 1.0 / (1.0 + sum(np.asarray(v, dtype=float) ** 2 for v in a))
    if kind == "radial":
        return (1.0 + _norm(a, params["norm"])) ** (-float(params["alpha"]))
    if kind == "hyperbolic_cross":
        out = 1.0
        for b in bars:
            out = out / b
        return np.broadcast_to(out, np.broadcast(*a).shape)
    if kind == "optimal_walsh":
        return 1.0 / (1.0 + _norm(a, params["norm"]) ** d)
    raise ValueError(f"unknown density kind {kind!r}")


def _gamma_lhs(convention, a, d):
    if convention == FOURIER:
        return 1.0 / q_from_bars([_bar(v) for v in a]) ** 2
    return 1.0 / (1.0 + _norm(a, "linf") ** d)


def _axis_values(N, convention):
    if convention == FOURIER:
        vals = np.arange(N // 2 + 1)
        w = np.full(vals.shape, 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return vals, w
    return np.arange(N), np.ones(N)


def _reduced_stats(grid, convention, f):
    """Exact ``(sum f, max lhs/f)`` over the grid using the |omega| reduction.

    ``f`` maps a list of d broadcastable |coordinate| arrays to masses.
    """
    d = grid.d
    vals, w = _axis_values(grid.N, convention)
    n = len(vals)
    if d == 1:
        fv = f([vals])
        return float(np.sum(w * fv)), float(np.max(_gamma_lhs(convention, [vals], 1) / fv))
    inner = n ** (d - 1)
    step = max(1, _CHUNK // inner)
    tail = []
    for k in range(1, d):
        shape = [1] * d
        shape[k] = n
        tail.append((vals.reshape(shape), w.reshape(shape)))
    wt = 1.0
    for _, ww in tail:
        wt = wt * ww
    total = 0.0
    ratio = 0.0
    for s in range(0, n, step):
        head = vals[s: s + step].reshape((-1,) + (1,) * (d - 1))
        hw = w[s: s + step].reshape((-1,) + (1,) * (d - 1))
        a = [head] + [v for v, _ in tail]
        fv = f(a)
        total += float(np.sum(fv * (hw * wt)))
        ratio = max(ratio, float(np.max(_gamma_lhs(convention, a, d) / fv)))
    return total, ratio


def _shell_stats(grid, g):
    """Walsh shortcut when the mass depends on ``||i||_inf`` only: ``g(t)`` per shell."""
    t = np.arange(grid.N, dtype=float)
    count = (t + 1) ** grid.d - t ** grid.d
    gv = g(t)
    lhs = 1.0 / (1.0 + t ** grid.d)
    return float(np.sum(count * gv)), float(np.max(lhs / gv))


@dataclass(frozen=True, eq=False)
class Density:
    grid: Grid
    convention: str
    kind: str
    params: Tuple[Tuple[str, object], ...] = ()
    total: float = 1.0  # normalizer: sum of unnormalized mass (1/C)
    stored: Optional[np.ndarray] = field(default=None, repr=False)
    ratio: Optional[float] = None  # max of gamma lhs over unnormalized mass

    @property
    def pdict(self):
        return dict(self.params)

    @property
    def norm_const(self) -> float:
        """C_{N,d}: the constant multiplying the closed-form mass."""
        return 1.0 / self.total

    @property
    def mass(self) -> np.ndarray:
        if self.stored is not None:
            return self.stored
        if self.grid.size > DENSE_CAP:
            raise ValueError(f"N**d = {self.grid.size} exceeds the dense cap; use mass_at")
        a = [np.abs(v) for v in freq_mesh(self.grid, self.convention)]
        out = _unnormalized(self.kind, self.pdict, a, self.grid.d) / self.total
        object.__setattr__(self, "stored", np.ascontiguousarray(np.broadcast_to(out, self.grid.shape)))
        return self.stored

    def mass_at(self, coords) -> np.ndarray:
        """Mass at frequency coordinates ``coords`` of shape ``(..., d)``."""
        coords = np.asarray(coords)
        if self.kind == "custom":
            ax = axis_freqs(self.grid.N, self.convention)
            lookup = np.empty(self.grid.N, dtype=np.int64)
            lookup[ax % self.grid.N] = np.arange(self.grid.N)
            idx = tuple(lookup[coords[..., k] % self.grid.N] for k in range(self.grid.d))
            return self.mass[idx]
        a = [np.abs(coords[..., k]) for k in range(self.grid.d)]
        return _unnormalized(self.kind, self.pdict, a, self.grid.d) / self.total

    def flat(self) -> np.ndarray:
        return self.mass.ravel()

    @classmethod
    def from_mass(cls, grid: Grid, convention: str, mass) -> "Density":
        """Arbitrary density from a (row-layout) nonnegative array; normalized here."""
        mass = np.asarray(mass, dtype=float).reshape(grid.shape)
        if np.any(mass < 0) or not np.isfinite(mass).all():
            raise ValueError("mass must be finite and nonnegative")
        s = mass.sum()
        if s <= 0:
            raise ValueError("mass must have positive total")
        return cls(grid, convention, "custom", (), 1.0, mass / s)


def build_density(kind: str, grid: Grid, convention: Optional[str] = None, *,
                  norm: str = "linf", alpha: float = 2.0) -> Density:
    """Build a normalized built-in density.

    ``kind`` is one of ``uniform``, ``optimal_fourier``, ``inverse_square``,
    ``radial`` (uses ``norm`` and ``alpha``), ``hyperbolic_cross`` (Fourier)
    or ``uniform``, ``optimal_walsh`` (uses ``norm``) (Walsh). The convention
    defaults to Walsh for ``optimal_walsh`` and Fourier otherwise.
    """
    kind = kind.replace("-", "_")
    if convention is None:
        convention = WALSH if kind == "optimal_walsh" else FOURIER
    allowed = FOURIER_KINDS if convention == FOURIER else WALSH_KINDS
    if convention not in (FOURIER, WALSH):
        raise ValueError(f"unknown convention {convention!r}")
    if kind not in allowed:
        raise ValueError(f"density kind {kind!r} is not defined for the {convention} convention")
    params = ()
    if kind == "radial":
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        params = (("norm", norm), ("alpha", float(alpha)))
    elif kind == "optimal_walsh":
        params = (("norm", norm),)
    if norm not in NORMS:
        raise ValueError(f"unknown norm {norm!r}")
    pd = dict(params)
    d = grid.d

    def f(a):
        return _unnormalized(kind, pd, a, d)

    if convention == WALSH and (kind == "uniform" or pd.get("norm") == "linf"):
        total, ratio = _shell_stats(grid, lambda t: f([t] + [0] * (d - 1)))
    else:
        total, ratio = _reduced_stats(grid, convention, f)
    return Density(grid, convention, kind, params, total, None, ratio)


def gamma_constant(p: Density) -> float:
    """Smallest Gamma with ``lhs_omega <= Gamma * p_omega`` on the whole grid.

    ``lhs`` is ``q_omega^{-2}`` (Fourier) or ``(1 + ||i||_inf^d)^{-1}`` (Walsh).
    """
    if p.ratio is not None:
        return p.total * p.ratio
    mass = p.mass
    if np.any(mass <= 0):
        raise ValueError("Gamma is undefined for a density with zero mass somewhere")
    a = [np.abs(v) for v in freq_mesh(p.grid, p.convention)]
    lhs = _gamma_lhs(p.convention, a, p.grid.d)
    return float(np.max(lhs / mass))


def gamma_dense(p: Density) -> float:
    """Gamma by brute force over the materialized grid (oracle for the reduced path)."""
    freqs = row_freqs(p.grid, p.convention)
    mass = p.flat()
    if np.any(mass <= 0):
        raise ValueError("Gamma is undefined for a density with zero mass somewhere")
    if p.convention == FOURIER:
        lhs = np.array([q_omega(tuple(w)) ** -2.0 for w in freqs])
    else:
        lhs = 1.0 / (1.0 + np.abs(freqs).max(axis=1).astype(float) ** p.grid.d)
    return float(np.max(lhs / mass))


def point_mass(grid: Grid, convention: str, row: int) -> Density:
    """Test-only density concentrated on 1-based flat row ``row``."""
    m = np.zeros(grid.size)
    m[row - 1] = 1.0
    return Density.from_mass(grid, convention, m)


def export_csv(p: Density, path) -> None:
    freqs = row_freqs(p.grid, p.convention)
    mass = p.flat()
    cols = [f"w{k + 1}" for k in range(p.grid.d)]
    with open(path, "w") as fh:
        fh.write(",".join(cols + ["mass"]) + "\n")
        for w, v in zip(freqs, mass):
            fh.write(",".join(str(int(c)) for c in w) + f",{v!r}\n")


def centered_slice(p: Density) -> np.ndarray:
    """2D slice through the zero frequency with axes sorted by coordinate value."""
    mass = p.mass
    order = np.argsort(axis_freqs(p.grid.N, p.convention))
    if p.grid.d == 1:
        return mass[order][None, :]
    return mass[np.ix_(order, order) + (0,) * (p.grid.d - 2)]


def export_pgm(p: Density, path, log_scale: bool = True) -> None:
    s = centered_slice(p)
    img = np.log(s) if log_scale else s
    lo, hi = float(img.min()), float(img.max())
    img = (img - lo) / (hi - lo) if hi > lo else np.zeros_like(img)
    write_pgm(path, img, maxval=255, vmin=0.0, vmax=1.0)


def log_ratio(p: Density) -> float:
    return gamma_constant(p) / math.log(p.grid.N)
