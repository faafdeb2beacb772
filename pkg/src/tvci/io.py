"""Image files: binary PGM (P5, 8/16 bit) and a raw float64 volume format."""
from __future__ import annotations

import struct

import numpy as np

RAW_MAGIC = b"TVCIRAW1"


def write_pgm(path, img, maxval: int = 255, vmin=None, vmax=None) -> None:
    """Write a 2D array as P5. Values are mapped linearly from [vmin, vmax] and clipped."""
    img = np.asarray(img, dtype=float)
    if img.ndim != 2:
        raise ValueError(f"PGM needs a 2D array, got shape {img.shape}")
    if maxval not in (255, 65535):
        raise ValueError("maxval must be 255 or 65535")
    vmin = float(img.min()) if vmin is None else float(vmin)
    vmax = float(img.max()) if vmax is None else float(vmax)
    scaled = (img - vmin) / (vmax - vmin) if vmax > vmin else np.zeros_like(img)
    q = np.rint(np.clip(scaled, 0.0, 1.0) * maxval)
    data = q.astype(">u2" if maxval > 255 else np.uint8).tobytes()
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n{maxval}\n".encode("ascii"))
        fh.write(data)


def _tokens(buf, count, pos):
    out = []
    while len(out) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if buf[pos:pos + 1] == b"#":
            while pos < len(buf) and buf[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        out.append(buf[start:pos])
    return out, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read a P5 file into floats in [0, 1]."""
    with open(path, "rb") as fh:
        buf = fh.read()
    (magic, w, h, maxval), pos = _tokens(buf, 4, 0)
    if magic != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    w, h, maxval = int(w), int(h), int(maxval)
    dtype = np.uint8 if maxval < 256 else np.dtype(">u2")
    n = w * h * np.dtype(dtype).itemsize
    if len(buf) - pos < n:
        raise ValueError(f"{path}: truncated pixel data")
    arr = np.frombuffer(buf, dtype=dtype, count=w * h, offset=pos).reshape(h, w)
    return arr.astype(float) / maxval


def write_raw(path, x) -> None:
    x = np.asarray(x, dtype="<f8")
    N, d = x.shape[0], x.ndim
    if any(s != N for s in x.shape):
        raise ValueError(f"raw volumes must be cubic, got {x.shape}")
    with open(path, "wb") as fh:
        fh.write(RAW_MAGIC + struct.pack("<II", N, d))
        fh.write(np.ascontiguousarray(x).tobytes())


def read_raw(path) -> np.ndarray:
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:8] != RAW_MAGIC:
        raise ValueError(f"{path}: bad raw magic")
    N, d = struct.unpack("<II", buf[8:16])
    arr = np.frombuffer(buf, dtype="<f8", offset=16)
    if arr.size != N ** d:
        raise ValueError(f"{path}: expected {N ** d} samples, found {arr.size}")
    return arr.reshape((N,) * d).astype(float)


def load_image(source: str) -> np.ndarray:
    """``shepp-logan-N``, ``shepp-logan3d-N``, or a ``.pgm`` / ``.raw`` path."""
    from . import phantoms

    if source.startswith("shepp-logan3d-"):
        return phantoms.shepp_logan_3d(int(source.rsplit("-", 1)[1])).image
    if source.startswith("shepp-logan-"):
        return phantoms.shepp_logan(int(source.rsplit("-", 1)[1])).image
    if source.endswith(".pgm"):
        return read_pgm(source)
    return read_raw(source)


def save_image(path, x) -> None:
    """PGM for 2D data (16 bit, unit range), raw otherwise."""
    x = np.asarray(x)
    if np.iscomplexobj(x):
        x = np.abs(x)
    if str(path).endswith(".pgm"):
        write_pgm(path, x, maxval=65535, vmin=0.0, vmax=1.0)
    else:
        write_raw(path, x)
