import csv
import json

import numpy as np
import pytest

from tsphenotype import dirichlet as dr
from tsphenotype.errors import InvalidInputError
from tsphenotype.synthgen import (
    gen_ar,
    gen_breathing,
    gen_infinity_cloud,
    gen_periodic,
    gen_regression_cohort,
    gen_white_noise,
    normal,
    write_cohort,
)
from tsphenotype.tsfeatures import acf


def test_box_muller_moments():
    z = normal(np.random.default_rng(0), 200_001)
    assert z.size == 200_001
    assert abs(z.mean()) < 4 / np.sqrt(z.size)
    assert abs(z.var() - 1) < 0.01


def test_periodic():
    x = gen_periodic(12, 0.0, 100).values
    assert x[0] == 1.0 and x[6] == -1.0
    n = 100_000
    noisy = gen_periodic(12, 0.6, n, seed=3).values
    resid = noisy - np.cos(2 * np.pi * np.arange(n) / 12)
    assert abs(resid.var() / 0.36 - 1) < 0.05
    assert np.array_equal(noisy, gen_periodic(12, 0.6, n, seed=3).values)
    with pytest.raises(InvalidInputError):
        gen_periodic(12, 0.1, 1)


def test_white_noise():
    n = 50_000
    x = gen_white_noise(0.8, n, seed=1).values
    assert abs(x.mean()) < 4 * 0.8 / np.sqrt(n)
    assert abs(x.std() - 0.8) < 0.02
    assert np.array_equal(x, gen_white_noise(0.8, n, seed=1).values)
    assert not np.array_equal(x, gen_white_noise(0.8, n, seed=2).values)


def test_infinity_cloud():
    P = gen_infinity_cloud(150, 0.0, seed=0)
    assert P.shape == (150, 2)
    x, y = P.T
    np.testing.assert_allclose((x ** 2 + y ** 2) ** 2, x ** 2 - y ** 2, atol=1e-9)
    Q = gen_infinity_cloud(20_000, 0.05, seed=1)
    assert abs(Q[:, 0].max() + Q[:, 0].min()) < 0.1
    assert abs(Q[:, 1].max() + Q[:, 1].min()) < 0.1


def test_ar():
    x = gen_ar([0.8], 20_000, seed=0)
    assert abs(acf(x, 1).values[0] - 0.8) < 0.03
    w = gen_ar([], 5000, seed=1).values
    assert abs(acf(w, 1).values[0]) < 0.05
    assert np.array_equal(w, gen_ar([], 5000, seed=1).values)
    with pytest.raises(InvalidInputError):
        gen_ar([1.2], 100)
    with pytest.raises(InvalidInputError):
        gen_ar([0.5, 0.6], 100)


def test_regression_cohort():
    X = np.zeros((10_000, 1))
    beta = np.array([[0.4, 0.0], [-0.3, 0.0]])
    Y = gen_regression_cohort(beta, 15.0, X, seed=0)
    np.testing.assert_allclose(Y.sum(axis=1), 1.0, atol=1e-12)
    mu = dr._softmax(np.array([[0.0, 0.4, -0.3]]))[0]
    _, var, _ = dr.moments(dr.DirichletParams.from_mean_precision(mu, 15.0))
    assert np.all(np.abs(Y.mean(axis=0) - mu) < 3 * np.sqrt(var / 10_000))
    sym = gen_regression_cohort(np.zeros((2, 2)), 6.0, X[:5000], seed=1)
    np.testing.assert_allclose(sym.mean(axis=0), 1 / 3, atol=0.01)
    with pytest.raises(InvalidInputError):
        gen_regression_cohort(beta, 0.0, X)
    with pytest.raises(InvalidInputError):
        gen_regression_cohort(np.zeros((2, 3)), 1.0, X)


def test_breathing():
    reg = gen_breathing(60, 32, 0.3, True, seed=0)
    irr = gen_breathing(60, 32, 0.3, False, seed=0)
    assert len(reg) == len(irr) == 1920 and reg.sample_rate_hz == 32
    assert np.array_equal(reg.values, gen_breathing(60, 32, 0.3, True, seed=0).values)


def test_write_cohort(tmp_path):
    cfg_path = write_cohort(tmp_path, duration_s=120, seed=4)
    cfg = json.loads(cfg_path.read_text())
    assert len(cfg["input"]["signals"]) == 6
    rows = list(csv.reader((tmp_path / "covariates.csv").open()))
    assert rows[0] == ["id", "ahi", "age"] and len(rows) == 7
    for sig in cfg["input"]["signals"]:
        assert (tmp_path / sig["path"]).exists()
    # re-running with the same seed reproduces the files byte for byte
    other = tmp_path / "again"
    write_cohort(other, duration_s=120, seed=4)
    assert (other / "covariates.csv").read_bytes() == (tmp_path / "covariates.csv").read_bytes()
    assert (other / "signals" / "S01.csv").read_bytes() == (tmp_path / "signals" / "S01.csv").read_bytes()
