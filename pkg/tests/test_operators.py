import cmath
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvci.densities import build_density
from tvci.grid import FOURIER, WALSH, Grid
from tvci.operators import (FOURIER_HAAR_C, MeasurementOp, fourier_haar_entry, incoherence_theta,
                            walsh_haar_entry)
from tvci.patterns import Pattern, sample_uniform, sample_vds
from tvci.transforms import dense_oracle, dft_forward, haar_vector_1d

from oracles import coarse, haar_rows_1d, sequency_hadamard


def _full(grid, conv):
    return Pattern.from_draws(grid, conv, np.arange(1, grid.size + 1))


def test_full_pattern_on_first_canonical_vector():
    g = Grid(4, 2)
    x = np.zeros((4, 4))
    x[0, 0] = 1
    op = MeasurementOp(_full(g, FOURIER))
    np.testing.assert_allclose(op.apply(x), np.ones(16) / 4)


def test_dc_only():
    g = Grid(8, 2)
    x = np.random.default_rng(0).standard_normal((8, 8))
    op = MeasurementOp(Pattern.from_draws(g, FOURIER, [1]))
    assert op.apply(x)[0] == pytest.approx(x.sum())


@pytest.mark.parametrize("conv", [FOURIER, WALSH])
def test_matches_dense_oracle(conv):
    g = Grid(16, 2)
    rng = np.random.default_rng(1)
    pat = sample_uniform(g, 80, 2, convention=conv)
    op = MeasurementOp(pat)
    x = rng.standard_normal((16, 16))
    T = dense_oracle("dft" if conv == FOURIER else "wht", g)
    ref = T[pat.rows - 1] @ x.ravel() / math.sqrt(pat.m)
    np.testing.assert_allclose(op.apply(x), ref, rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(op.dense(), T[pat.rows - 1] / math.sqrt(pat.m), atol=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from([(8, 1), (16, 1), (8, 2), (16, 2), (8, 3)]), st.sampled_from([FOURIER, WALSH]),
       st.integers(0, 10 ** 6))
def test_adjoint_identity_and_gram(nd, conv, seed):
    N, d = nd
    g = Grid(N, d)
    rng = np.random.default_rng(seed)
    pat = sample_vds(build_density("uniform", g, conv), max(1, g.size // 3), seed)
    op = MeasurementOp(pat)
    x = rng.standard_normal(g.shape)
    y = rng.standard_normal(op.m_effective) + 1j * rng.standard_normal(op.m_effective)
    lhs = np.vdot(y, op.apply(x))
    rhs = np.vdot(op.apply_adjoint(y), x)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))
    np.testing.assert_allclose(op.apply(op.apply_adjoint(y)), op.gram_scale * y, atol=1e-9)
    assert not np.any(op.apply_adjoint(np.zeros(op.m_effective)))


def test_single_row_adjoint_is_scaled_conjugate_row():
    g = Grid(8, 1)
    op = MeasurementOp(Pattern.from_draws(g, FOURIER, [3]))
    row = dense_oracle("dft", g)[2]
    np.testing.assert_allclose(op.apply_adjoint(np.array([1.0])), np.conj(row) / 1.0, atol=1e-12)


def test_shape_mismatch():
    op = MeasurementOp(sample_uniform(Grid(8, 2), 10, 0))
    with pytest.raises(ValueError):
        op.apply(np.zeros((4, 4)))


def test_fourier_haar_examples():
    N, r = 16, 4
    for j in range(r):
        assert fourier_haar_entry(0, j, 0, 0, N) == pytest.approx(2 ** ((r - j) / 2))
        assert fourier_haar_entry(0, j, 0, 1, N) == 0
    # N = 4, j = r - 1 = 1, n = 0, e = 1: psi = (1, -1, 0, 0)/sqrt(2)
    want = (1 - cmath.exp(-2j * math.pi / 4)) / math.sqrt(2)
    assert fourier_haar_entry(1, 1, 0, 1, 4) == pytest.approx(want)
    with pytest.raises(ValueError):
        fourier_haar_entry(3, 0, 0, 0, 4)
    with pytest.raises(ValueError):
        fourier_haar_entry(0, 2, 0, 0, 4)


@pytest.mark.parametrize("N", [2, 4, 8, 16, 32, 64])
def test_fourier_haar_closed_form_and_decay(N):
    r = N.bit_length() - 1
    freqs = [0] + [s * k for k in range(1, N // 2 + 1) for s in (1, -1)][: N - 1]
    for j in range(r):
        for n in range(2 ** j):
            for e in (0, 1):
                F = dft_forward(haar_vector_1d(N, j, n, e))
                for k, w in enumerate(freqs):
                    c = fourier_haar_entry(w, j, n, e, N)
                    assert abs(c - F[k]) <= 1e-10 * max(1.0, abs(F[k]))
                    bound = FOURIER_HAAR_C * 2 ** (j / 2) / max(abs(w), 2 ** j)
                    assert abs(c) / math.sqrt(N) <= bound + 1e-12


def test_walsh_haar_examples():
    assert walsh_haar_entry(3, 1, 0, 0, 8) == 0
    assert abs(walsh_haar_entry(3, 1, 0, 1, 8)) == pytest.approx(2 ** -0.5)
    assert walsh_haar_entry(0, 0, 0, 0, 8) == pytest.approx(1.0)


@pytest.mark.parametrize("N", [8, 16, 32, 64])
def test_walsh_haar_gram_from_independent_matrices(N):
    U = sequency_hadamard(N) @ haar_rows_1d(N).T / math.sqrt(N)
    # haar_rows_1d column 0 is the scaling vector, column 2^j + n is (j, n, e=1)
    for i in range(N):
        assert U[i, 0] == pytest.approx(walsh_haar_entry(i, 0, 0, 0, N), abs=1e-12)
        for j in range(N.bit_length() - 1):
            for n in range(2 ** j):
                assert U[i, 2 ** j + n] == pytest.approx(walsh_haar_entry(i, j, n, 1, N), abs=1e-12)


def _isotropic_haar_rows(N, d):
    """Same-scale tensor Haar basis: scaling row, then every (j, e != 0, n)."""
    rows1 = haar_rows_1d(N)

    out = []
    for j in range(N.bit_length() - 1):
        for e in itertools.product((0, 1), repeat=d):
            if any(e):
                for n in itertools.product(range(2 ** j), repeat=d):
                    v = np.ones(1)
                    for ek, nk in zip(e, n):
                        v = np.kron(v, rows1[2 ** j + nk] if ek else coarse(N, j, nk))
                    out.append(v)
    return np.array([np.full(N ** d, N ** (-d / 2))] + out)


def _theta_dense(p, T):
    g = p.grid
    W = _isotropic_haar_rows(g.N, g.d)
    assert np.allclose(W @ W.T, np.eye(g.size))
    U = T @ W.T / g.N ** (g.d / 2)
    return float((np.abs(U) / np.sqrt(p.flat())[:, None]).max())


def test_theta_uniform_walsh_is_sqrt_n():
    for N in (8, 16, 32):
        p = build_density("uniform", Grid(N, 1), WALSH)
        dense = _theta_dense(p, sequency_hadamard(N))
        assert dense == pytest.approx(math.sqrt(N))
        assert incoherence_theta(p, "walsh_haar") == pytest.approx(dense)


@pytest.mark.parametrize("basis,kind,conv", [("walsh_haar", "optimal_walsh", WALSH),
                                             ("fourier_haar", "optimal_fourier", FOURIER),
                                             ("fourier_haar", "inverse_square", FOURIER)])
@pytest.mark.parametrize("N,d", [(8, 1), (8, 2), (4, 3)])
def test_theta_modes_agree_with_dense(basis, kind, conv, N, d):
    p = build_density(kind, Grid(N, d), conv)
    T = dense_oracle("wht" if conv == WALSH else "dft", p.grid)
    dense = _theta_dense(p, T)
    assert incoherence_theta(p, basis, "exact") == pytest.approx(dense, rel=1e-12)
    assert incoherence_theta(p, basis, "columns") == pytest.approx(dense, rel=1e-12)
    assert incoherence_theta(p, basis, "bound") >= dense * (1 - 1e-12)


def test_theta_errors():
    with pytest.raises(ValueError):
        incoherence_theta(build_density("optimal_fourier", Grid(8, 2)), "walsh_haar")
    with pytest.raises(ValueError):
        incoherence_theta(build_density("optimal_walsh", Grid(8, 2)), "cosine_haar")
