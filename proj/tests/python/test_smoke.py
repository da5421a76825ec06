import math

import numpy as np
import pytest

import _empiproc as ep


CAT = [[2, 1], [1, 1]]


def test_validate_torus():
    info = ep.validate_torus(CAT)
    assert info["ergodic"] and info["hyperbolic"]
    golden = (3 + math.sqrt(5)) / 2
    assert info["expansion_rate"] == pytest.approx(golden)
    assert not ep.validate_torus([[0, -1], [1, 0]])["ergodic"]


def test_simulators_shapes_and_determinism():
    a = ep.simulate_iid(2, 64, seed=5)
    b = ep.simulate_iid(2, 64, seed=5)
    assert a.shape == (64, 2)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, ep.simulate_iid(2, 64, seed=6))

    for arr in (
        ep.simulate_torus(CAT, 64, seed=1),
        ep.simulate_linear(1, 0.5, 64, seed=1),
        ep.simulate_lipschitz(1, 64, seed=1),
        ep.simulate_markov(0.25, 64, seed=1),
    ):
        assert arr.shape[0] == 64
        assert np.isfinite(arr).all()


def test_empirical_cdf_and_sup_gap():
    path = ep.simulate_iid(2, 512, seed=9)
    (val,) = ep.empirical_cdf(path, [[0.5, 0.5]])
    assert abs(val - 0.25) < 0.1

    gaps = [ep.sup_gap(path, m) for m in (4, 16, 64)]
    assert gaps[2] < gaps[0]


def test_chaining():
    assert ep.phi(-2.0) == 1.0
    assert ep.phi(-0.5) == 0.5
    assert ep.phi(0.5) == 0.0

    sch = ep.schedule(256, 0.25, 0.5, 1)
    assert sch["K"] == 7

    path = ep.simulate_iid(1, 128, seed=3)
    ts = [[x] for x in np.linspace(0.05, 0.95, 40)]
    rep = ep.verify_sandwich(path, 4, 1.0, 0.5, ts)
    assert rep["violations"] == 0


def test_mixing_and_gap():
    ens = [ep.simulate_markov(0.25, 128, seed=11, replicate=r) for r in range(150)]
    covs, errs = ep.cosine_covariances(ens, 8)
    assert len(covs) == 8

    fit = ep.fit_mixing_envelope(list(range(1, 9)), [0.5**k for k in range(1, 9)], [1e-6] * 8)
    assert fit["fitted"]
    assert 0.45 < fit["theta"] < 0.55

    gap = ep.spectral_gap_check(0.25)
    assert gap["has_gap"]
    assert gap["lambda2"] == pytest.approx(0.5)


def test_estimate_gamma():
    ens = [ep.simulate_iid(1, 256, seed=21, replicate=r) for r in range(100)]
    out = ep.estimate_gamma(ens, [[0.3, 0.6]], lag=1)
    g = out["gamma"]
    assert g.shape == (4, 4)
    np.testing.assert_allclose(g, g.T)
    assert abs(g[1, 2] - 0.12) < 0.03
