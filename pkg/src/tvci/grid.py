"""Resolution descriptor and the three index bijections.

All public index maps are 1-based, mirroring the usual matrix-row convention:
flat index ``i`` lives in ``{1, ..., N**d}`` and multi-indices in ``{1..N}^d``.
Flattening is lexicographic (row-major, last coordinate fastest), which is
exactly numpy's C order, so ``x.reshape((N,) * d)`` is the image view of a
flat signal.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

FOURIER = "fourier"
WALSH = "walsh"
CONVENTIONS = (FOURIER, WALSH)

_MAX_INDEX = np.iinfo(np.int64).max


@dataclass(frozen=True)
class Grid:
    N: int
    d: int = 1

    def __post_init__(self):
        N, d = self.N, self.d
        if not isinstance(N, (int, np.integer)) or N < 2 or (N & (N - 1)) != 0:
            raise ValueError(f"N must be a power of two >= 2, got {N!r}")
        if not isinstance(d, (int, np.integer)) or d < 1:
            raise ValueError(f"d must be a positive integer, got {d!r}")
        if int(N) ** int(d) > _MAX_INDEX:
            raise ValueError(f"N**d = {N}**{d} overflows the int64 index type")
        object.__setattr__(self, "N", int(N))
        object.__setattr__(self, "d", int(d))

    @property
    def r(self) -> int:
        return self.N.bit_length() - 1

    @property
    def size(self) -> int:
        return self.N ** self.d

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.N,) * self.d

    @classmethod
    def from_shape(cls, shape) -> "Grid":
        shape = tuple(shape)
        if not shape or len(set(shape)) != 1:
            raise ValueError(f"expected a cubic array shape, got {shape}")
        return cls(shape[0], len(shape))


@dataclass(frozen=True)
class FreqIndex:
    """A frequency (Fourier) or sequency (Walsh) multi-index."""

    coords: Tuple[int, ...]
    convention: str = FOURIER

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        object.__setattr__(self, "coords", tuple(int(c) for c in self.coords))

    def check(self, grid: Grid) -> "FreqIndex":
        lo, hi = coord_range(grid.N, self.convention)
        if len(self.coords) != grid.d or any(c < lo or c > hi for c in self.coords):
            raise ValueError(f"{self} out of range for {grid}")
        return self


def coord_range(N: int, convention: str) -> Tuple[int, int]:
    if convention == FOURIER:
        return -N // 2 + 1, N // 2
    if convention == WALSH:
        return 0, N - 1
    raise ValueError(f"unknown convention {convention!r}")


def _check_flat(i, grid: Grid) -> np.ndarray:
    i = np.asarray(i, dtype=np.int64)
    if np.any(i < 1) or np.any(i > grid.size):
        raise ValueError(f"flat index out of range 1..{grid.size}")
    return i


def lex_flatten(multi, grid: Grid) -> int:
    """Map a 1-based multi-index ``(i_1, ..., i_d)`` to its 1-based flat index."""
    multi = tuple(int(c) for c in np.atleast_1d(multi))
    if len(multi) != grid.d or any(c < 1 or c > grid.N for c in multi):
        raise ValueError(f"multi-index {multi} out of range for {grid}")
    flat = 0
    for c in multi:
        flat = flat * grid.N + (c - 1)
    return flat + 1


def lex_unflatten(i: int, grid: Grid) -> Tuple[int, ...]:
    i = int(_check_flat(i, grid))
    rest = i - 1
    out = []
    for _ in range(grid.d):
        rest, c = divmod(rest, grid.N)
        out.append(c + 1)
    return tuple(reversed(out))


def fourier_freqs_1d(N: int) -> np.ndarray:
    """Frequencies of rows 1..N in |frequency| order: 0, 1, -1, 2, -2, ..., N/2."""
    i = np.arange(1, N + 1)
    return np.where(i % 2 == 0, 1, -1) * (i // 2)


def fourier_row_index_1d(omega) -> np.ndarray:
    """Inverse of :func:`fourier_freqs_1d` (1-based rows)."""
    omega = np.asarray(omega, dtype=np.int64)
    return np.where(omega > 0, 2 * omega, 2 * np.abs(omega) + 1)


def fourier_row_freq(i: int, grid: Grid) -> FreqIndex:
    multi = lex_unflatten(i, grid)
    table = fourier_freqs_1d(grid.N)
    return FreqIndex(tuple(int(table[c - 1]) for c in multi), FOURIER)


def walsh_row_freq(i: int, grid: Grid) -> FreqIndex:
    return FreqIndex(tuple(c - 1 for c in lex_unflatten(i, grid)), WALSH)


def row_of_freq(freq: FreqIndex, grid: Grid) -> int:
    """Flat 1-based row index holding ``freq`` under its convention."""
    freq.check(grid)
    if freq.convention == FOURIER:
        multi = [int(fourier_row_index_1d(c)) for c in freq.coords]
    else:
        multi = [c + 1 for c in freq.coords]
    return lex_flatten(multi, grid)


def axis_freqs(N: int, convention: str) -> np.ndarray:
    """Per-axis coordinate values in row order (index k <-> row k+1)."""
    if convention == FOURIER:
        return fourier_freqs_1d(N)
    if convention == WALSH:
        return np.arange(N)
    raise ValueError(f"unknown convention {convention!r}")


def row_freqs(grid: Grid, convention: str) -> np.ndarray:
    """All frequencies as an ``(N**d, d)`` integer array, row ``i-1`` <-> flat index ``i``."""
    ax = axis_freqs(grid.N, convention)
    mesh = np.meshgrid(*([ax] * grid.d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def freq_mesh(grid: Grid, convention: str):
    """Sparse broadcastable per-axis coordinate arrays in row layout."""
    ax = axis_freqs(grid.N, convention)
    out = []
    for k in range(grid.d):
        shape = [1] * grid.d
        shape[k] = grid.N
        out.append(ax.reshape(shape))
    return out
