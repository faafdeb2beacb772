"""Fast separable transforms on power-of-two grids, with dense reference matrices.

Every fast transform acts on the trailing ``d`` axes of its input (default: all
axes), so a stack of images can be transformed in one call. Arrays are laid
out lexicographically; for the DFT and WHT the output entry at multi-index
``k`` holds the coefficient for row ``lex_flatten(k + 1)``, i.e. frequency
``fourier_row_freq`` resp. sequency ``walsh_row_freq`` of that row.

DFT and WHT are unnormalized (``F* F = H^T H = N^d I``); the Haar transform is
orthonormal.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np

from .grid import Grid, fourier_freqs_1d

DENSE_LIMIT = 4096
_SQRT2 = np.sqrt(2.0)


def _ndim(x, d):
    d = x.ndim if d is None else d
    N = x.shape[-1]
    if d < 1 or x.ndim < d or any(s != N for s in x.shape[x.ndim - d:]):
        raise ValueError(f"expected trailing {d} axes of equal length, got shape {x.shape}")
    if N < 2 or N & (N - 1):
        raise ValueError(f"axis length must be a power of two, got {N}")
    return d, N


@lru_cache(maxsize=None)
def _dft_perm(N):
    p = fourier_freqs_1d(N) % N
    p.setflags(write=False)
    return p


@lru_cache(maxsize=None)
def _wht_perm(N):
    # Sequency row n is natural-order (Sylvester) row bitrev(gray(n)).
    r = N.bit_length() - 1
    n = np.arange(N)
    g = n ^ (n >> 1)
    rev = np.zeros_like(g)
    for b in range(r):
        rev |= ((g >> b) & 1) << (r - 1 - b)
    rev.setflags(write=False)
    return rev


def _take_axes(x, perm, d):
    for ax in range(x.ndim - d, x.ndim):
        x = np.take(x, perm, axis=ax)
    return x


def _put_axes(y, perm, d):
    inv = np.argsort(perm)
    return _take_axes(y, inv, d)


def dft_forward(x, d=None):
    """Row-ordered DFT: ``F^{(d)} x`` with rows sorted by |frequency|."""
    x = np.asarray(x)
    d, N = _ndim(x, d)
    axes = tuple(range(x.ndim - d, x.ndim))
    return _take_axes(np.fft.fftn(x, axes=axes), _dft_perm(N), d)


def dft_adjoint(y, d=None):
    """``F* y`` for row-ordered ``y``; ``dft_adjoint(dft_forward(x)) == N**d * x``."""
    y = np.asarray(y)
    d, N = _ndim(y, d)
    axes = tuple(range(y.ndim - d, y.ndim))
    z = _put_axes(y, _dft_perm(N), d)
    return np.fft.ifftn(z, axes=axes) * float(N) ** d


def _fwht_axis(x, axis):
    x = np.moveaxis(x, axis, -1)
    shape = x.shape
    N = shape[-1]
    out = np.array(x, dtype=np.result_type(x.dtype, np.float64), order="C", copy=True)
    h = 1
    while h < N:
        v = out.reshape(shape[:-1] + (N // (2 * h), 2, h))
        a = v[..., 0, :].copy()
        b = v[..., 1, :]
        v[..., 0, :] += b
        v[..., 1, :] = a - b
        h *= 2
    return np.moveaxis(out, -1, axis)


def wht_forward(x, d=None):
    """Sequency-ordered Walsh-Hadamard transform ``H^{(d)} x``.

    ``H`` is symmetric, so this is also the adjoint; applying it twice gives
    ``N**d * x``.
    """
    x = np.asarray(x)
    d, N = _ndim(x, d)
    for ax in range(x.ndim - d, x.ndim):
        x = _fwht_axis(x, ax)
    return _take_axes(x, _wht_perm(N), d)


def wht_adjoint(y, d=None):
    y = np.asarray(y)
    d, N = _ndim(y, d)
    z = _put_axes(y, _wht_perm(N), d)
    for ax in range(z.ndim - d, z.ndim):
        z = _fwht_axis(z, ax)
    return z


# --- Haar ---------------------------------------------------------------------

def haar_layout(grid: Grid):
    """Slot table for the flat Haar coefficient vector.

    Returns a list of ``(offset, j, e)`` for every detail band plus the scaling
    slot ``(0, None, None)``. Order: scaling coefficient, then scales
    ``j = 0..r-1``; within a scale the detail labels ``e`` (tuples in
    ``{0,1}^d`` minus zero) in binary order with ``e[0]`` most significant;
    within a band the translations ``n`` lexicographically.
    """
    d = grid.d
    out = [(0, None, None)]
    off = 1
    for j in range(grid.r):
        for code in range(1, 2 ** d):
            e = tuple((code >> (d - 1 - k)) & 1 for k in range(d))
            out.append((off, j, e))
            off += 2 ** (j * d)
    return out


def haar_slot(grid: Grid, e, j, n) -> int:
    """0-based flat slot of coefficient ``c^{(e)}_{j,n}``."""
    d = grid.d
    e = tuple(int(v) for v in np.atleast_1d(e))
    n = tuple(int(v) for v in np.atleast_1d(n))
    if not any(e):
        if j != 0 or any(n):
            raise ValueError("the scaling coefficient is (e=0, j=0, n=0)")
        return 0
    if not 0 <= j < grid.r or len(e) != d or len(n) != d or any(not 0 <= v < 2 ** j for v in n):
        raise ValueError(f"bad Haar index e={e} j={j} n={n}")
    code = int("".join(map(str, e)), 2)
    off = 1 + (2 ** (j * d) - 1) + (code - 1) * 2 ** (j * d)
    flat = 0
    for v in n:
        flat = flat * 2 ** j + v
    return off + flat


def _split(x, axis):
    a = np.take(x, np.arange(0, x.shape[axis], 2), axis=axis)
    b = np.take(x, np.arange(1, x.shape[axis], 2), axis=axis)
    return (a + b) / _SQRT2, (a - b) / _SQRT2


def _merge(lo, hi, axis):
    a = (lo + hi) / _SQRT2
    b = (lo - hi) / _SQRT2
    out = np.stack([a, b], axis=axis + 1)
    shape = list(a.shape)
    shape[axis] *= 2
    return out.reshape(shape)


def haar_forward(x, d=None):
    """Orthonormal d-dimensional Haar transform (same scale on every axis).

    Returns the flat coefficient vector(s) of length ``N**d`` ordered as in
    :func:`haar_layout`.
    """
    x = np.asarray(x)
    d, N = _ndim(x, d)
    batch = x.shape[: x.ndim - d]
    spatial = [x.ndim - d + k for k in range(d)]
    cur = x.astype(np.result_type(x.dtype, np.float64))
    per_scale = []
    while cur.shape[-1] > 1:
        bands = [cur]
        for ax in spatial:
            bands = [part for b in bands for part in _split(b, ax)]
        cur = bands[0]
        per_scale.append([b.reshape(batch + (-1,)) for b in bands[1:]])
    pieces = [cur.reshape(batch + (1,))]
    for details in reversed(per_scale):
        pieces.extend(details)
    return np.concatenate(pieces, axis=-1)


def haar_inverse(c, grid: Grid):
    """Inverse of :func:`haar_forward`; ``c`` has trailing axis of length ``N**d``."""
    c = np.asarray(c)
    d, N, r = grid.d, grid.N, grid.r
    if c.shape[-1] != grid.size:
        raise ValueError(f"expected trailing length {grid.size}, got {c.shape}")
    batch = c.shape[:-1]
    nb = len(batch)
    cur = c[..., :1].reshape(batch + (1,) * d)
    off = 1
    for j in range(r):
        n = 2 ** j
        size = n ** d
        bands = [cur]
        for _ in range(2 ** d - 1):
            bands.append(c[..., off: off + size].reshape(batch + (n,) * d))
            off += size
        for k in reversed(range(d)):
            bands = [_merge(bands[2 * t], bands[2 * t + 1], nb + k) for t in range(len(bands) // 2)]
        cur = bands[0]
    return cur


# --- dense oracles (tests only) ----------------------------------------------

def _walsh_sign(n, k, r):
    """``v_n(k / 2^r)`` straight from the dyadic-expansion definition (arrays allowed)."""
    n = np.asarray(n)
    k = np.asarray(k)
    s = np.zeros(np.broadcast(n, k).shape, dtype=np.int64)
    for i in range(1, r + 1):
        n_i = (n >> (i - 1)) & 1
        n_next = (n >> i) & 1
        x_i = (k >> (r - i)) & 1
        s = s + (n_i + n_next) * x_i
    out = np.where(s % 2 == 1, -1, 1)
    return int(out) if out.ndim == 0 else out


def haar_vector_1d(N, j, n, e):
    """Discretized 1D Haar function ``2^{(j-r)/2} psi^{(e)}(2^j t/N - n)``, t = 0..N-1."""
    r = N.bit_length() - 1
    u = 2 ** j * np.arange(N) - n * N  # (2^j t/N - n) * N
    inside = (u >= 0) & (u < N)
    sign = np.where((e == 0) | (2 * u < N), 1.0, -1.0)
    return np.where(inside, sign, 0.0) * 2.0 ** ((j - r) / 2)


def haar_basis_vector(grid: Grid, e, j, n):
    v = np.ones(())
    for ek, nk in zip(e, n):
        v = np.multiply.outer(v, haar_vector_1d(grid.N, j, nk, ek))
    return v


@lru_cache(maxsize=8)
def _oracle_1d(kind, N):
    r = N.bit_length() - 1
    if kind == "dft":
        rho = fourier_freqs_1d(N)
        out = np.exp(-2j * np.pi * np.outer(rho, np.arange(N)) / N)
    elif kind == "wht":
        out = _walsh_sign(np.arange(N)[:, None], np.arange(N)[None, :], r).astype(float)
    else:
        raise ValueError(f"unknown oracle kind {kind!r}")
    out.setflags(write=False)
    return out


def _haar_row_labels(grid: Grid):
    """Per flat slot: (j, e tuple, n tuple), scaling slot as (0, zeros, zeros)."""
    d = grid.d
    labels = [(0, (0,) * d, (0,) * d)]
    for off, j, e in haar_layout(grid)[1:]:
        for n in np.ndindex(*(2 ** j,) * d):
            labels.append((j, e, n))
    return labels


def oracle_rows(kind: str, grid: Grid, start: int, stop: int) -> np.ndarray:
    """Rows ``start:stop`` (0-based) of the dense matrix, entry by entry from the formulas."""
    N, d = grid.N, grid.d
    cols = np.unravel_index(np.arange(grid.size), grid.shape)
    if kind == "haar":
        labels = _haar_row_labels(grid)[start:stop]
        out = np.ones((len(labels), grid.size))
        for a in range(d):
            table = np.stack([haar_vector_1d(N, j, n[a], e[a]) for j, e, n in labels])
            out *= table[:, cols[a]]
        return out
    one = _oracle_1d(kind, N)
    rows = np.unravel_index(np.arange(start, stop), grid.shape)
    out = np.ones((stop - start, grid.size), dtype=one.dtype)
    for a in range(d):
        out *= one[rows[a][:, None], cols[a][None, :]]
    return out


def dense_oracle(kind: str, grid: Grid) -> np.ndarray:
    """Dense ``N^d x N^d`` matrix built entry-wise from the defining formulas.

    ``dft`` and ``wht`` give the (row-ordered) transform matrices. ``haar``
    gives the analysis matrix ``W^T`` whose rows are the discrete Haar basis
    vectors in :func:`haar_layout` order, so ``W^T x`` are the coefficients.
    """
    if grid.size > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to N**d <= {DENSE_LIMIT}, got {grid.size}")
    return oracle_rows(kind, grid, 0, grid.size)


def oracle_apply(kind: str, grid: Grid, X, block: int = 512) -> np.ndarray:
    """``D @ X`` for flat columns ``X`` (shape ``(N^d, k)``) without holding all of ``D``."""
    if grid.size > DENSE_LIMIT:
        raise ValueError(f"dense oracle limited to N**d <= {DENSE_LIMIT}, got {grid.size}")
    X = np.asarray(X)
    parts = [oracle_rows(kind, grid, s, min(s + block, grid.size)) @ X for s in range(0, grid.size, block)]
    return np.concatenate(parts, axis=0)
