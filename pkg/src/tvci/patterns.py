"""Sampling patterns (random and structured row selections) with a plain-text format.

A :class:`Pattern` is a multiset of 1-based flat row indices (see
:mod:`tvci.grid` for how rows map to frequencies). The DC row is row 1 in both
conventions. Randomness comes from a Philox counter-based generator seeded
with the given integer, so patterns are reproducible across platforms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .densities import Density
from .grid import CONVENTIONS, FOURIER, WALSH, Grid, row_freqs

HEADER = "tvci-pattern v1"
DC_ROW = 1


def make_rng(seed: int) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError(f"seed must be a nonnegative integer, got {seed!r}")
    return np.random.Generator(np.random.Philox(int(seed)))


@dataclass(frozen=True, eq=False)
class Pattern:
    grid: Grid
    convention: str
    rows: np.ndarray  # sorted unique 1-based flat indices
    counts: np.ndarray  # multiplicity of each row
    scheme: str = "custom"
    seed: Optional[int] = None

    def __post_init__(self):
        if self.convention not in CONVENTIONS:
            raise ValueError(f"unknown convention {self.convention!r}")
        rows = np.asarray(self.rows, dtype=np.int64)
        counts = np.asarray(self.counts, dtype=np.int64)
        if rows.shape != counts.shape or rows.ndim != 1:
            raise ValueError("rows and counts must be 1D arrays of equal length")
        if rows.size and (rows.min() < 1 or rows.max() > self.grid.size):
            raise ValueError(f"row index out of range 1..{self.grid.size}")
        if np.any(np.diff(rows) <= 0):
            raise ValueError("rows must be strictly increasing")
        if np.any(counts < 1):
            raise ValueError("multiplicities must be positive")
        if "," in self.scheme or "\n" in self.scheme:
            raise ValueError("scheme descriptor may not contain commas or newlines")
        rows.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_draws(cls, grid, convention, draws, scheme="custom", seed=None) -> "Pattern":
        rows, counts = np.unique(np.asarray(draws, dtype=np.int64), return_counts=True)
        return cls(grid, convention, rows, counts, scheme, seed)

    @property
    def m(self) -> int:
        return int(self.counts.sum())

    @property
    def distinct(self) -> int:
        return int(self.rows.size)

    def draws(self) -> np.ndarray:
        return np.repeat(self.rows, self.counts)

    def freqs(self) -> np.ndarray:
        """``(distinct, d)`` frequency / sequency coordinates of the distinct rows."""
        return row_freqs(self.grid, self.convention)[self.rows - 1]

    def mask(self) -> np.ndarray:
        out = np.zeros(self.grid.size, dtype=bool)
        out[self.rows - 1] = True
        return out.reshape(self.grid.shape)

    def __eq__(self, other):
        if not isinstance(other, Pattern):
            return NotImplemented
        return (self.grid == other.grid and self.convention == other.convention
                and self.scheme == other.scheme and self.seed == other.seed
                and np.array_equal(self.rows, other.rows) and np.array_equal(self.counts, other.counts))

    __hash__ = None

    def to_text(self) -> str:
        seed = "none" if self.seed is None else str(self.seed)
        lines = [f"{HEADER}, {self.convention}, {self.grid.N}, {self.grid.d}, {self.m}, {self.scheme}, {seed}"]
        lines += [f"{r}, {c}" for r, c in zip(self.rows.tolist(), self.counts.tolist())]
        return "\n".join(lines) + "\n"

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "Pattern":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise ValueError("empty pattern file")
        head = [h.strip() for h in lines[0].split(",")]
        if len(head) != 7 or head[0] != HEADER:
            raise ValueError(f"bad pattern header {lines[0]!r}")
        _, conv, N, d, m, scheme, seed = head
        body = np.array([[int(v) for v in ln.split(",")] for ln in lines[1:]], dtype=np.int64).reshape(-1, 2)
        pat = cls(Grid(int(N), int(d)), conv, body[:, 0], body[:, 1], scheme,
                  None if seed == "none" else int(seed))
        if pat.m != int(m):
            raise ValueError(f"header says m={m} but multiplicities sum to {pat.m}")
        return pat

    @classmethod
    def load(cls, path) -> "Pattern":
        with open(path) as fh:
            return cls.from_text(fh.read())


def _check_m(m, grid, lo=1):
    if not isinstance(m, (int, np.integer)) or not lo <= m <= grid.size:
        raise ValueError(f"m must be an integer in [{lo}, {grid.size}], got {m!r}")
    return int(m)


def sample_uniform(grid: Grid, m: int, seed: int, include_dc: bool = False,
                   convention: str = FOURIER, distinct: bool = False) -> Pattern:
    """``m`` i.i.d. uniform rows; with ``include_dc`` one of them is the DC row.

    ``distinct=True`` draws without replacement instead (from the non-DC rows
    when the DC row is forced in).
    """
    m = _check_m(m, grid)
    rng = make_rng(seed)
    k = m - 1 if include_dc else m
    if distinct:
        lo = 2 if include_dc else 1
        draws = rng.choice(grid.size - lo + 1, size=k, replace=False).astype(np.int64) + lo
    else:
        draws = rng.integers(1, grid.size + 1, size=k, dtype=np.int64)
    if include_dc:
        draws = np.append(draws, DC_ROW)
    scheme = ("uniform+dc" if include_dc else "uniform") + ("+distinct" if distinct else "")
    return Pattern.from_draws(grid, convention, draws, scheme, seed)


def sample_vds(p: Density, m: int, seed: int, grid: Optional[Grid] = None,
               distinct: bool = False) -> Pattern:
    """i.i.d. draws from ``p`` by inverse CDF over the flattened grid.

    ``distinct=True`` keeps drawing until ``m`` different rows have been seen
    (the first ``m`` distinct rows of the same i.i.d. stream).
    """
    if grid is not None and grid != p.grid:
        raise ValueError(f"density lives on {p.grid}, pattern requested on {grid}")
    m = _check_m(m, p.grid)
    rng = make_rng(seed)
    cdf = np.cumsum(p.flat())
    total = cdf[-1]
    last = p.grid.size - 1

    def draw(k):
        return np.minimum(np.searchsorted(cdf, rng.random(k) * total, side="right"), last) + 1

    kind = "vds:" + p.kind
    if not distinct:
        return Pattern.from_draws(p.grid, p.convention, draw(m), kind, seed)
    if np.count_nonzero(p.flat()) < m:
        raise ValueError("density support is smaller than the requested distinct count")
    seen = np.zeros(0, dtype=np.int64)
    while seen.size < m:
        batch = np.concatenate([seen, draw(2 * (m - seen.size) + 16)])
        _, first = np.unique(batch, return_index=True)
        seen = batch[np.sort(first)]
    return Pattern.from_draws(p.grid, p.convention, seen[:m], kind + "+distinct", seed)


def _radius(grid, convention):
    return np.abs(row_freqs(grid, convention)).max(axis=1)


def sample_half_half(grid: Grid, m: int, seed: int, convention: str = FOURIER) -> Pattern:
    """Lowest ``m//2`` rows by max-coordinate radius (ties: row index), then the
    remaining ``m - m//2`` uniformly without replacement from the rest."""
    m = _check_m(m, grid)
    rho = _radius(grid, convention)
    order = np.lexsort((np.arange(grid.size), rho))
    low = order[: m // 2]
    rest = order[m // 2:]
    rng = make_rng(seed)
    pick = rng.choice(rest, size=m - m // 2, replace=False)
    return Pattern.from_draws(grid, convention, np.concatenate([low, pick]) + 1, "half-half", seed)


def multilevel_shells(grid: Grid, r_levels: int, convention: str = FOURIER) -> np.ndarray:
    """1-based shell label of every row (concentric max-norm shells of equal width)."""
    rho = _radius(grid, convention)
    span = grid.N // 2 if convention == FOURIER else grid.N
    width = max(1, math.ceil(span / r_levels))
    return np.minimum(rho // width + 1, r_levels)


def multilevel_fractions(b: float, r_levels: int, r0: int, a: float) -> np.ndarray:
    k = np.arange(1, r_levels + 1, dtype=float)
    return np.exp(-((b * np.maximum(k - r0, 0) / (r_levels - r0)) ** a))


def multilevel_counts(sizes: np.ndarray, m: int, r0: int, a: float):
    """Per-shell sample counts summing to ``m`` exactly, and the solved ``b``."""
    R = sizes.size
    full = int(sizes[:r0].sum())

    def counts(b):
        return np.minimum(np.floor(multilevel_fractions(b, R, r0, a) * sizes + 0.5), sizes).astype(np.int64)

    if counts(0.0).sum() <= m:
        b = 0.0
    else:
        lo, hi = 0.0, 1.0
        while counts(hi).sum() > m:
            lo, hi = hi, hi * 2
            if hi > 1e12:
                raise ValueError("multilevel bisection failed to bracket b")
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if counts(mid).sum() > m:
                lo = mid
            else:
                hi = mid
        b = hi
    mk = counts(b)
    assert mk[:r0].sum() == full
    residual = m - int(mk.sum())
    for k in range(R - 1, -1, -1):
        if residual <= 0:
            break
        add = min(residual, int(sizes[k] - mk[k]))
        mk[k] += add
        residual -= add
    return mk, b


def sample_multilevel(grid: Grid, m: int, r_levels: int, r0: int, a: float, seed: int,
                      convention: str = FOURIER) -> Pattern:
    """Shell ``k`` sampled without replacement at fraction
    ``exp(-(b (k - r0)/(r_levels - r0))^a)`` (1 for ``k <= r0``), ``b`` fitted so
    that exactly ``m`` rows are taken."""
    if not (isinstance(r_levels, (int, np.integer)) and r_levels >= 1 and 0 <= r0 < r_levels):
        raise ValueError(f"need 0 <= r0 < r_levels, got r0={r0}, r_levels={r_levels}")
    if a <= 0:
        raise ValueError("a must be positive")
    shell = multilevel_shells(grid, r_levels, convention)
    sizes = np.bincount(shell, minlength=r_levels + 1)[1:]
    lo = int(sizes[:r0].sum())
    if not isinstance(m, (int, np.integer)) or not lo <= m <= grid.size or m < 1:
        raise ValueError(f"multilevel m={m} infeasible: feasible range is [{max(lo, 1)}, {grid.size}]")
    mk, _ = multilevel_counts(sizes, int(m), r0, a)
    rng = make_rng(seed)
    picks = []
    for k in range(r_levels):
        members = np.flatnonzero(shell == k + 1)
        if mk[k] == members.size:
            picks.append(members)
        elif mk[k]:
            picks.append(rng.choice(members, size=int(mk[k]), replace=False))
    draws = np.concatenate(picks) + 1 if picks else np.zeros(0, dtype=np.int64)
    scheme = f"multilevel(r={r_levels};r0={r0};a={a:g})"
    return Pattern.from_draws(grid, convention, draws, scheme, seed)


def combine(*pats: Pattern, scheme: Optional[str] = None) -> Pattern:
    """Multiset union (multiplicities add)."""
    if not pats:
        raise ValueError("nothing to combine")
    g, c = pats[0].grid, pats[0].convention
    if any(p.grid != g or p.convention != c for p in pats):
        raise ValueError("patterns must share grid and convention")
    draws = np.concatenate([p.draws() for p in pats])
    return Pattern.from_draws(g, c, draws, scheme or "+".join(p.scheme for p in pats), pats[0].seed)


def dedupe(pat: Pattern) -> Pattern:
    return Pattern(pat.grid, pat.convention, pat.rows, np.ones_like(pat.rows), pat.scheme, pat.seed)


__all__ = ["Pattern", "sample_uniform", "sample_vds", "sample_half_half", "sample_multilevel",
           "multilevel_shells", "multilevel_counts", "combine", "dedupe", "make_rng", "FOURIER", "WALSH"]
