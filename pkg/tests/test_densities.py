import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvci.densities import (Density, build_density, export_csv, export_pgm, gamma_constant, gamma_dense,
                            point_mass, q_omega)
from tvci.grid import FOURIER, WALSH, Grid, row_freqs
from tvci.io import read_pgm


def test_q_examples():
    assert q_omega((3, -1)) == 3
    assert q_omega((0, 0, 0)) == 1
    assert q_omega((0,)) == 1
    assert q_omega((4, -2, 1)) == pytest.approx(4 * math.sqrt(2))
    assert q_omega((-9,)) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        q_omega((1, 2), d=3)


def _q_brute(w):
    bars = sorted((float(max(1, abs(int(c)))) for c in w), reverse=True)
    d = len(bars)
    q = math.prod(bars[: d // 2])
    return q * math.sqrt(bars[d // 2]) if d % 2 else q


@settings(max_examples=200)
@given(st.lists(st.integers(-64, 64), min_size=1, max_size=5))
def test_q_matches_sorted_definition(w):
    assert q_omega(tuple(w)) == pytest.approx(_q_brute(w))


def _brute_mass(kind, grid, conv, **kw):
    out = []
    for w in row_freqs(grid, conv):
        a = [abs(int(c)) for c in w]
        bars = [max(1, c) for c in a]
        if kind == "uniform":
            v = 1.0
        elif kind == "optimal_fourier":
            v = _q_brute(w) ** -2
        elif kind == "inverse_square":
            v = 1 / (1 + sum(c * c for c in a))
        elif kind == "hyperbolic_cross":
            v = 1 / math.prod(bars)
        elif kind == "radial":
            v = (1 + max(a)) ** -kw["alpha"]
        else:
            v = 1 / (1 + max(a) ** grid.d)
        out.append(v)
    out = np.array(out)
    return out / out.sum()


CASES = [("uniform", FOURIER), ("optimal_fourier", FOURIER), ("inverse_square", FOURIER),
         ("hyperbolic_cross", FOURIER), ("radial", FOURIER), ("uniform", WALSH), ("optimal_walsh", WALSH)]


@pytest.mark.parametrize("kind,conv", CASES)
@pytest.mark.parametrize("N,d", [(8, 1), (8, 2), (4, 3)])
def test_mass_and_gamma_match_brute_force(kind, conv, N, d):
    g = Grid(N, d)
    p = build_density(kind, g, conv, alpha=2.0)
    np.testing.assert_allclose(p.flat(), _brute_mass(kind, g, conv, alpha=2.0), rtol=1e-12)
    assert p.flat().sum() == pytest.approx(1.0)
    assert gamma_constant(p) == pytest.approx(gamma_dense(p), rel=1e-12)


def test_uniform_and_hyperbolic_examples():
    g = Grid(8, 2)
    p = build_density("uniform", g)
    assert np.allclose(p.mass, 1 / 64)
    assert gamma_constant(p) == pytest.approx(64.0)
    h = build_density("hyperbolic_cross", g)
    ratio = h.mass_at(np.array([2, 3])) / h.mass_at(np.array([0, 0]))
    assert ratio == pytest.approx(1 / 6)


def test_optimal_gamma_equals_normalizer():
    for g in (Grid(32, 1), Grid(16, 2), Grid(8, 3)):
        p = build_density("optimal_fourier", g)
        brute = sum(_q_brute(w) ** -2 for w in row_freqs(g, FOURIER))
        assert gamma_constant(p) == pytest.approx(brute, rel=1e-12)


def test_gamma_large_grid_without_materializing():
    p = build_density("optimal_fourier", Grid(1024, 3))
    assert p.stored is None
    assert 0 < gamma_constant(p) / math.log(1024) < 100
    assert p.stored is None


def test_kind_convention_errors():
    with pytest.raises(ValueError):
        build_density("optimal_walsh", Grid(8, 2), FOURIER)
    with pytest.raises(ValueError):
        build_density("hyperbolic_cross", Grid(8, 2), WALSH)
    with pytest.raises(ValueError):
        build_density("radial", Grid(8, 2), alpha=-1)
    with pytest.raises(ValueError):
        build_density("gaussian", Grid(8, 2))


def test_zero_mass_gamma_undefined():
    p = point_mass(Grid(4, 2), FOURIER, 3)
    with pytest.raises(ValueError):
        gamma_constant(p)
    with pytest.raises(ValueError):
        Density.from_mass(Grid(4, 1), FOURIER, [0, 0, 0, 0])


def test_custom_density_lookup():
    g = Grid(4, 2)
    mass = np.arange(1, 17, dtype=float)
    p = Density.from_mass(g, FOURIER, mass)
    freqs = row_freqs(g, FOURIER)
    np.testing.assert_allclose(p.mass_at(freqs), mass / mass.sum())


def test_exports(tmp_path):
    p = build_density("optimal_fourier", Grid(16, 2))
    export_csv(p, tmp_path / "p.csv")
    lines = (tmp_path / "p.csv").read_text().splitlines()
    assert lines[0] == "w1,w2,mass" and len(lines) == 257
    assert lines[1].startswith("0,0,")
    export_pgm(p, tmp_path / "p.pgm")
    img = read_pgm(tmp_path / "p.pgm")
    assert img.shape == (16, 16)
    # centered: the largest mass sits at the zero frequency
    assert img[7, 7] == 1.0


@pytest.mark.parametrize("kind", ["optimal_fourier", "hyperbolic_cross", "inverse_square"])
def test_masses_decrease_away_from_origin(kind):
    p = build_density(kind, Grid(32, 2))
    for t in range(16):
        assert p.mass_at(np.array([t, 0])) >= p.mass_at(np.array([t + 1, 0]))
        assert p.mass_at(np.array([t, t])) >= p.mass_at(np.array([t + 1, t + 1]))
