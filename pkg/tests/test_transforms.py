import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvci.grid import Grid
from oracles import coarse, fourier_rows, haar_rows_1d, kron_all, sequency_hadamard
from tvci.transforms import (dense_oracle, dft_adjoint, dft_forward, haar_forward, haar_inverse, haar_layout,
                             haar_slot, wht_adjoint, wht_forward)


def test_sequency_hadamard_is_independent_of_package():
    # the sign-change construction and the package's sign formula agree
    for N in (2, 4, 8, 16, 32):
        assert np.array_equal(sequency_hadamard(N), dense_oracle("wht", Grid(N, 1)))


@pytest.mark.parametrize("N,d", [(2, 1), (8, 1), (4, 2), (8, 2), (4, 3)])
def test_dft_matches_explicit_matrix(N, d):
    rng = np.random.default_rng(N * d)
    x = rng.standard_normal((N,) * d) + 1j * rng.standard_normal((N,) * d)
    F = kron_all([fourier_rows(N)] * d)
    np.testing.assert_allclose(dft_forward(x).ravel(), F @ x.ravel(), rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(dense_oracle("dft", Grid(N, d)), F, atol=1e-12)


@pytest.mark.parametrize("N,d", [(2, 1), (16, 1), (4, 2), (16, 2), (4, 3)])
def test_wht_matches_sequency_hadamard(N, d):
    x = np.random.default_rng(7).standard_normal((N,) * d)
    H = kron_all([sequency_hadamard(N)] * d)
    np.testing.assert_allclose(wht_forward(x).ravel(), H @ x.ravel(), atol=1e-10)


def test_dft_examples():
    e1 = np.zeros((4, 4))
    e1[0, 0] = 1
    assert np.allclose(dft_forward(e1), 1)
    np.testing.assert_allclose(dft_forward(np.ones(4)), [4, 0, 0, 0], atol=1e-12)
    x = np.array([1.0, 0, 0, 0])
    np.testing.assert_allclose(dft_adjoint(dft_forward(x)), 4 * x, atol=1e-12)
    assert np.all(dft_adjoint(np.zeros(8)) == 0)


def test_wht_examples():
    np.testing.assert_array_equal(wht_forward(np.ones(8)), [8, 0, 0, 0, 0, 0, 0, 0])
    np.testing.assert_array_equal(dense_oracle("wht", Grid(4, 1))[1], [1, 1, -1, -1])


def test_two_point_matrices():
    g = Grid(2, 1)
    np.testing.assert_allclose(dense_oracle("dft", g), [[1, 1], [1, -1]], atol=1e-15)
    np.testing.assert_array_equal(dense_oracle("wht", g), [[1, 1], [1, -1]])
    np.testing.assert_allclose(dense_oracle("haar", g), np.array([[1, 1], [1, -1]]) / math.sqrt(2))


def test_dense_oracle_size_guard():
    with pytest.raises(ValueError):
        dense_oracle("dft", Grid(128, 2))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(2, 1), (32, 1), (8, 2), (16, 2), (4, 3), (8, 3)]), st.integers(0, 2 ** 31))
def test_adjoints_invert_up_to_scale(nd, seed):
    N, d = nd
    x = np.random.default_rng(seed).standard_normal((N,) * d)
    np.testing.assert_allclose(dft_adjoint(dft_forward(x)), N ** d * x, atol=1e-9 * N ** d)
    np.testing.assert_allclose(wht_adjoint(wht_forward(x)), N ** d * x, atol=1e-9 * N ** d)


@settings(max_examples=25, deadline=None)
@given(st.sampled_from([(2, 1), (64, 1), (8, 2), (16, 2), (8, 3)]), st.integers(0, 2 ** 31))
def test_haar_parseval_and_inverse(nd, seed):
    N, d = nd
    x = np.random.default_rng(seed).standard_normal((N,) * d)
    c = haar_forward(x)
    assert abs(np.linalg.norm(c) - np.linalg.norm(x)) <= 1e-12 * np.linalg.norm(x)
    np.testing.assert_allclose(haar_inverse(c, Grid(N, d)), x, atol=1e-12)


def test_haar_examples():
    c = haar_forward(np.ones((8, 8)))
    assert c[0] == pytest.approx(8.0)
    assert np.allclose(c[1:], 0)
    np.testing.assert_allclose(haar_forward(np.array([1.0, -1.0])), [0, math.sqrt(2)], atol=1e-15)


@pytest.mark.parametrize("N", [2, 4, 8, 16])
def test_haar_1d_matches_block_construction(N):
    x = np.random.default_rng(N).standard_normal(N)
    np.testing.assert_allclose(haar_forward(x), haar_rows_1d(N) @ x, atol=1e-12)


def test_haar_slots_cover_every_position_once():
    for g in (Grid(8, 1), Grid(4, 2), Grid(4, 3)):
        seen = {0}
        for off, j, e in haar_layout(g)[1:]:
            for n in np.ndindex(*(2 ** j,) * g.d):
                s = haar_slot(g, e, j, n)
                assert s not in seen
                seen.add(s)
        assert seen == set(range(g.size))
    with pytest.raises(ValueError):
        haar_slot(Grid(4, 2), (1, 0), 2, (0, 0))


def test_haar_2d_tensor_product():
    N = 8
    x = np.random.default_rng(3).standard_normal((N, N))
    c = haar_forward(x)
    rows = haar_rows_1d(N)

    def vec(j, e, n):
        return rows[2 ** j + n] if e else coarse(N, j, n)

    for j in range(3):
        for e in ((0, 1), (1, 0), (1, 1)):
            for n in np.ndindex(2 ** j, 2 ** j):
                b = np.outer(vec(j, e[0], n[0]), vec(j, e[1], n[1]))
                assert c[haar_slot(Grid(N, 2), e, j, n)] == pytest.approx(float((b * x).sum()), abs=1e-12)
