import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tvci.analysis import (PSNR_CAP, best_s_term, error_report, noise_at_snr, psnr, rel_error, rel_grad_error,
                           robustness_probe, snr_db, stability_probe)
from tvci.densities import build_density
from tvci.grid import Grid
from tvci.operators import MeasurementOp
from tvci.patterns import make_rng, sample_vds
from tvci.phantoms import random_blocks
from tvci.solver import SolverConfig


def test_best_s_term_examples():
    assert best_s_term([3, 1, -2], 1) == 3
    assert best_s_term([3, 1, -2], 3) == 0
    assert best_s_term([0, 5, 0, -1], 2) == 0
    g = np.array([[3.0, 0, 1], [4.0, 0, 0]])  # group magnitudes 5, 0, 1
    assert best_s_term(g, 1, "l21") == 1
    with pytest.raises(ValueError):
        best_s_term([1, 2], 3)


@settings(max_examples=100)
@given(st.lists(st.floats(-100, 100, allow_nan=False), min_size=1, max_size=7), st.data())
def test_best_s_term_is_min_over_supports(v, data):
    s = data.draw(st.integers(0, len(v)))
    brute = min(sum(abs(v[i]) for i in range(len(v)) if i not in keep)
                for keep in itertools.combinations(range(len(v)), s))
    assert best_s_term(v, s) == pytest.approx(brute, abs=1e-9)


def test_psnr_examples():
    ref = np.random.default_rng(0).uniform(0, 100, (8, 8))
    assert psnr(ref, ref) == PSNR_CAP
    assert psnr(ref, ref + 2.5, peak=100) == pytest.approx(20 * math.log10(100 / 2.5))
    with pytest.raises(ValueError):
        psnr(ref, ref[:4])


def test_relative_errors():
    x = np.arange(16.0).reshape(4, 4)
    assert rel_error(x, x) == 0
    assert rel_error(x, 2 * x) == pytest.approx(1.0)
    # adding a constant leaves the gradient error at zero
    assert rel_grad_error(x, x + 7) == 0


@settings(max_examples=30, deadline=None)
@given(st.floats(-10, 60), st.integers(0, 10 ** 6), st.booleans())
def test_noise_hits_requested_snr(snr, seed, cplx):
    ref = np.random.default_rng(seed).standard_normal(50)
    if cplx:
        ref = ref + 1j
    h = noise_at_snr(ref, snr, make_rng(seed))
    assert np.iscomplexobj(h) == cplx
    assert snr_db(ref, h) == pytest.approx(snr)
    assert not np.any(noise_at_snr(ref, math.inf, make_rng(seed)))


def test_error_report():
    x = random_blocks(16, 2, 20, 0).image
    rep = error_report(x, x, s_values=(0, 20))
    assert rep.rel_l2_image == 0 and rep.psnr == PSNR_CAP
    assert rep.sigma_s[20] == 0 and rep.sigma_s[0] > 0


def _ops(g, k):
    p = build_density("optimal_fourier", g)
    return [MeasurementOp(sample_vds(p, g.size // 3, t, distinct=True)) for t in range(k)]


def test_probes_at_infinite_snr_hit_solver_floor():
    g = Grid(32, 2)
    x = random_blocks(32, 2, 40, 2).image
    for probe in (stability_probe, robustness_probe):
        curve = probe(x, _ops(g, 2), SolverConfig(), [math.inf], 0)
        assert curve.image_err[0] <= 1e-2 and curve.grad_err[0] <= 1e-2
        assert curve.image_trials.shape == (1, 2)


def test_probe_errors_grow_with_noise():
    g = Grid(32, 2)
    x = random_blocks(32, 2, 40, 2).image
    curve = robustness_probe(x, _ops(g, 1)[0], SolverConfig(), [40.0, 10.0], 1)
    assert curve.image_err[0] < curve.image_err[1]
    with pytest.raises(ValueError):
        stability_probe(x, _ops(g, 1), SolverConfig(), [], 0)
