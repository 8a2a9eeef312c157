import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import signal

from oracles import pacf_yule_walker
from tsphenotype.errors import DegenerateInputError, InvalidInputError
from tsphenotype.signal_core import TimeSeries
from tsphenotype.synthgen import gen_ar, gen_white_noise
from tsphenotype.tsfeatures import (
    CorrelationVector,
    acf,
    distance_matrix,
    feature_distance,
    pacf,
    read_feature_csv,
    tukey_window,
    welch_density,
    write_feature_csv,
)


def direct_acf(x, max_lag):
    xc = x - x.mean()
    return np.array([np.dot(xc[:-k], xc[k:]) for k in range(1, max_lag + 1)]) / np.dot(xc, xc)


class TestACF:
    def test_matches_definition(self):
        x = np.random.default_rng(0).normal(size=500)
        np.testing.assert_allclose(acf(x, 40).values, direct_acf(x, 40), atol=1e-12)
        assert acf(x, 40).kind == "ACF"

    def test_mean_shift(self):
        x = np.random.default_rng(1).normal(size=300)
        np.testing.assert_allclose(acf(x + 7.5, 20).values, acf(x, 20).values, atol=1e-12)

    def test_ar1(self):
        x = gen_ar([0.8], 20_000, seed=3)
        r = acf(x, 5).values
        assert np.all(np.abs(r - 0.8 ** np.arange(1, 6)) < 0.03)

    def test_white_noise_band(self):
        n = 10_000
        r = acf(gen_white_noise(1.0, n, seed=4), 20).values
        assert np.mean(np.abs(r) < 2 / np.sqrt(n)) >= 0.9

    def test_errors(self):
        with pytest.raises(DegenerateInputError):
            acf(np.ones(50), 5)
        with pytest.raises(InvalidInputError):
            acf(np.arange(10.0), 10)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10_000), st.integers(20, 300))
    def test_bounded(self, seed, n):
        x = np.random.default_rng(seed).normal(size=n)
        assert np.all(np.abs(acf(x, n - 1).values) <= 1 + 1e-12)


class TestPACF:
    def test_lag_one_is_acf(self):
        x = gen_ar([0.6], 2000, seed=0)
        assert pacf(x, 5).values[0] == acf(x, 5).values[0]

    def test_matches_yule_walker(self):
        x = gen_ar([0.5, 0.3], 3000, seed=1).values
        np.testing.assert_allclose(pacf(x, 15).values, pacf_yule_walker(x, 15), atol=1e-10)

    def test_ar2_cutoff(self):
        n = 20_000
        phi = pacf(gen_ar([0.5, 0.3], n, seed=2), 10).values
        assert abs(phi[1] - 0.3) < 0.03
        assert np.all(np.abs(phi[2:]) < 0.03)
        assert np.mean(np.abs(phi[2:])) < 2 / np.sqrt(n)

    def test_white_noise_band(self):
        n = 10_000
        phi = pacf(gen_white_noise(1.0, n, seed=5), 20).values
        assert np.mean(np.abs(phi) < 2 / np.sqrt(n)) >= 0.9

    def test_degenerate(self):
        with pytest.raises(DegenerateInputError):
            pacf(np.ones(30), 3)


class TestDistance:
    def test_examples(self):
        a = CorrelationVector("PACF", np.array([0.5, 0.1]))
        b = CorrelationVector("PACF", np.array([0.1, 0.4]))
        assert feature_distance(a, b) == pytest.approx(0.5, abs=1e-12)
        assert feature_distance(a, a) == 0.0
        assert feature_distance(a, b, np.diag([4.0, 0.0])) == pytest.approx(0.8)

    def test_errors(self):
        a = CorrelationVector("PACF", np.zeros(2))
        with pytest.raises(InvalidInputError):
            feature_distance(a, CorrelationVector("ACF", np.zeros(2)))
        with pytest.raises(InvalidInputError):
            feature_distance(a, CorrelationVector("PACF", np.zeros(3)))
        with pytest.raises(InvalidInputError):
            feature_distance(a, a, np.array([[1.0, 0.5], [0.0, 1.0]]))
        with pytest.raises(InvalidInputError):
            feature_distance(a, a, np.eye(3))

    @settings(max_examples=100)
    @given(st.integers(0, 2**32 - 1), st.integers(1, 30))
    def test_symmetry_and_triangle(self, seed, r):
        rng = np.random.default_rng(seed)
        a, b, c = (CorrelationVector("ACF", rng.uniform(-1, 1, r)) for _ in range(3))
        assert feature_distance(a, b) == feature_distance(b, a)
        assert feature_distance(a, c) <= feature_distance(a, b) + feature_distance(b, c) + 1e-12

    def test_matrix(self):
        rng = np.random.default_rng(0)
        vecs = [CorrelationVector("ACF", rng.uniform(-1, 1, 7)) for _ in range(5)]
        M = distance_matrix(vecs)
        assert M[1, 3] == pytest.approx(np.linalg.norm(vecs[1].values - vecs[3].values), abs=1e-12)
        assert np.array_equal(M, M.T) and np.all(np.diag(M) == 0)


class TestWelch:
    @pytest.mark.parametrize("taper", [0.0, 0.25, 0.5, 1.0])
    @pytest.mark.parametrize("length", [2, 7, 64, 4096])
    def test_tukey_matches_scipy(self, taper, length):
        np.testing.assert_allclose(tukey_window(length, taper), signal.windows.tukey(length, taper, sym=True),
                                   atol=1e-14)

    def test_tukey_limits(self):
        assert np.all(tukey_window(16, 0.0) == 1.0)
        h = tukey_window(17, 1.0)
        assert h[0] == pytest.approx(0, abs=1e-15) and h[-1] == pytest.approx(0, abs=1e-15) and h[8] == 1.0
        w = tukey_window(100, 0.5)
        assert w[0] == pytest.approx(0, abs=1e-15) and w[-1] == pytest.approx(0, abs=1e-15)
        with pytest.raises(InvalidInputError):
            tukey_window(10, 1.5)

    def test_length_and_normalisation(self):
        ts = TimeSeries(np.random.default_rng(0).normal(size=32 * 600), 32.0)
        d = welch_density(ts)
        assert d.density.size == 2049
        assert abs(d.density.sum() - 1) < 1e-12
        assert d.frequencies_hz[0] == 0 and d.frequencies_hz[-1] == 16.0
        assert np.all(np.diff(d.frequencies_hz) > 0) and np.all(d.density >= 0)

    def test_peak_at_one_hz(self):
        t = np.arange(32 * 600) / 32.0
        d = welch_density(TimeSeries(np.sin(2 * np.pi * t), 32.0))
        assert d.frequencies_hz[np.argmax(d.density)] == 1.0

    def test_matches_scipy_welch(self):
        x = np.random.default_rng(2).normal(size=20_000)
        d = welch_density(TimeSeries(x, 32.0), 1024, 0.5, 0.5)
        # the package uses the symmetric window; scipy's default would be the periodic one
        win = signal.windows.tukey(1024, 0.5, sym=True)
        _, p = signal.welch(x, fs=32.0, window=win, nperseg=1024, noverlap=512,
                            detrend="constant", scaling="density")
        np.testing.assert_allclose(d.density, p / p.sum(), atol=1e-12)

    def test_constant_shift(self):
        x = np.random.default_rng(3).normal(size=9000)
        a = welch_density(TimeSeries(x, 32.0), 2048)
        b = welch_density(TimeSeries(x + 3.0, 32.0), 2048)
        assert np.max(np.abs(a.density - b.density)) < 1e-12

    def test_errors(self):
        ts = TimeSeries(np.random.default_rng(0).normal(size=100), 32.0)
        with pytest.raises(InvalidInputError):
            welch_density(ts, 128)
        with pytest.raises(InvalidInputError):
            welch_density(ts, 63)
        with pytest.raises(InvalidInputError):
            welch_density(ts, 64, overlap_fraction=1.0)


def test_feature_csv_roundtrip(tmp_path):
    rows = np.random.default_rng(0).uniform(-1, 1, (3, 4))
    write_feature_csv(tmp_path / "f.csv", ["a", "b", "c"], rows, "lag")
    header = (tmp_path / "f.csv").read_text().splitlines()[0]
    assert header == "id,lag_1,lag_2,lag_3,lag_4"
    ids, back = read_feature_csv(tmp_path / "f.csv")
    assert ids == ["a", "b", "c"]
    np.testing.assert_array_equal(back, rows)
