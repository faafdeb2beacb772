"""Test images: Shepp-Logan (2D/3D) and exactly gradient-sparse synthetics.

All images take values in [0, 1]. Pixel ``k`` along an axis sits at
``(2k + 1 - N) / N`` in [-1, 1]; the vertical axis points up, so image row 0
is the top of the head.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .gradient import ISOTROPIC, grad_sparsity
from .patterns import make_rng

# Modified Shepp-Logan (Toft's contrast-enhanced variant, as in Octave/Matlab):
# A, a, b, x0, y0, phi_deg
SHEPP_LOGAN_2D = (
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
)

# Schabel's 3D extension of the table above (the "Toft-Schabel" ellipsoids):
# A, a, b, c, x0, y0, z0, phi, theta, psi (degrees, Z1X2Z3 Euler angles)
SHEPP_LOGAN_3D = (
    (1.0, 0.69, 0.92, 0.81, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.78, 0.0, -0.0184, 0.0, 0.0, 0.0, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.22, 0.0, 0.0, -18.0, 0.0, 10.0),
    (-0.2, 0.16, 0.41, 0.28, -0.22, 0.0, 0.0, 18.0, 0.0, 10.0),
    (0.1, 0.21, 0.25, 0.41, 0.0, 0.35, -0.15, 0.0, 0.0, 0.0),
    (0.1, 0.046, 0.046, 0.05, 0.0, 0.1, 0.25, 0.0, 0.0, 0.0),
    (0.1, 0.046, 0.046, 0.05, 0.0, -0.1, 0.25, 0.0, 0.0, 0.0),
    (0.1, 0.046, 0.023, 0.05, -0.08, -0.605, 0.0, 0.0, 0.0, 0.0),
    (0.1, 0.023, 0.023, 0.2, 0.0, -0.606, 0.0, 0.0, 0.0, 0.0),
    (0.1, 0.023, 0.046, 0.2, 0.06, -0.605, 0.0, 0.0, 0.0, 0.0),
)


@dataclass
class Phantom:
    image: np.ndarray
    sparsity: Optional[int] = None  # isotropic gradient sparsity when known by construction
    descriptor: str = ""


def _centers(N):
    return (2 * np.arange(N) + 1 - N) / N


def render_ellipses(N: int, table=SHEPP_LOGAN_2D) -> np.ndarray:
    u = _centers(N)
    x = u[None, :]
    y = -u[:, None]
    img = np.zeros((N, N))
    for A, a, b, x0, y0, phi in table:
        c, s = np.cos(np.radians(phi)), np.sin(np.radians(phi))
        xr = (x - x0) * c + (y - y0) * s
        yr = -(x - x0) * s + (y - y0) * c
        img[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += A
    return img


def render_ellipsoids(N: int, table=SHEPP_LOGAN_3D) -> np.ndarray:
    """Array indexed ``[z, y, x]`` with y pointing up (index 0 at the top)."""
    u = _centers(N)
    z, y, x = np.meshgrid(u, -u, u, indexing="ij")
    coord = np.stack([x.ravel(), y.ravel(), z.ravel()])
    img = np.zeros(N ** 3)
    for A, a, b, cz, x0, y0, z0, phi, theta, psi in table:
        c1, s1 = np.cos(np.radians(phi)), np.sin(np.radians(phi))
        c2, s2 = np.cos(np.radians(theta)), np.sin(np.radians(theta))
        c3, s3 = np.cos(np.radians(psi)), np.sin(np.radians(psi))
        rot = np.array([[c3 * c1 - c2 * s1 * s3, c3 * s1 + c2 * c1 * s3, s3 * s2],
                        [-s3 * c1 - c2 * s1 * c3, -s3 * s1 + c2 * c1 * c3, c3 * s2],
                        [s2 * s1, -s2 * c1, c2]])
        p = rot @ coord
        q = ((p[0] - x0) / a) ** 2 + ((p[1] - y0) / b) ** 2 + ((p[2] - z0) / cz) ** 2
        img[q <= 1.0] += A
    return img.reshape(N, N, N)


def shepp_logan(N: int, d: int = 2) -> Phantom:
    if N < 2 or N & (N - 1):
        raise ValueError(f"N must be a power of two, got {N}")
    if d == 2:
        img = render_ellipses(N)
    elif d == 3:
        img = render_ellipsoids(N)
    else:
        raise ValueError("Shepp-Logan is defined for d = 2 or 3")
    img = np.clip(img, 0.0, 1.0)
    return Phantom(img, grad_sparsity(img, ISOTROPIC, 1e-12), f"shepp-logan{'3d' if d == 3 else ''}-{N}")


def shepp_logan_3d(N: int) -> Phantom:
    return shepp_logan(N, 3)


def piecewise_constant_1d(N: int, s: int, seed: int) -> Phantom:
    """Periodic 1D signal whose gradient has exactly ``s`` nonzeros (jumps, including the wrap)."""
    if not 0 <= s < N:
        raise ValueError(f"need 0 <= s < N, got s={s}")
    if s == 1:
        raise ValueError("a periodic signal cannot have exactly one jump")
    rng = make_rng(seed)
    if s == 0:
        return Phantom(np.full(N, 0.5), 0, f"pwc1d-{N}-s0")
    jumps = np.sort(rng.choice(N, size=s, replace=False))
    while True:
        vals = rng.uniform(0.0, 1.0, size=s)
        if np.all(np.abs(vals - np.roll(vals, 1)) >= 0.1):
            break
    x = np.empty(N)
    # grad_i = x[i+1] - x[i]; a jump at i means the new value starts at i + 1
    for k in range(s):
        start, stop = jumps[k] + 1, jumps[(k + 1) % s] + 1
        idx = np.arange(start, stop if stop > start else stop + N) % N
        x[idx] = vals[k]
    return Phantom(x, s, f"pwc1d-{N}-s{s}-seed{seed}")


def random_blocks(N: int, d: int, s: int, seed: int, max_tries: int = 20000) -> Phantom:
    """Random overlapping boxes whose isotropic gradient sparsity is exactly ``s``."""
    if not 0 <= s < N ** d:
        raise ValueError(f"need 0 <= s < N**d, got s={s}")
    rng = make_rng(seed)
    img = np.zeros((N,) * d)
    count = 0
    for _ in range(max_tries):
        if count == s:
            return Phantom(img, s, f"blocks-{N}-{d}-s{s}-seed{seed}")
        lo = rng.integers(0, N, size=d)
        size = rng.integers(1, max(2, N // 4) + 1, size=d)
        val = rng.integers(1, 11) / 10.0
        trial = img.copy()
        trial[tuple(slice(a, min(a + w, N)) for a, w in zip(lo, size))] = val
        c = grad_sparsity(trial, ISOTROPIC)
        if count < c <= s:
            img, count = trial, c
    if count == s:
        return Phantom(img, s, f"blocks-{N}-{d}-s{s}-seed{seed}")
    raise ValueError(f"could not reach gradient sparsity {s} (stuck at {count})")
