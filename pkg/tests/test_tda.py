import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.sparse.csgraph import minimum_spanning_tree
from scipy.spatial.distance import pdist, squareform

from oracles import bottleneck_brute_force, diagram_triples, rips_brute_force, superlevel_pairs_sweep
from tsphenotype.errors import InvalidInputError
from tsphenotype.synthgen import gen_infinity_cloud, gen_periodic, gen_white_noise
from tsphenotype.tda import (
    EmbeddingConfig,
    PersistenceDiagram,
    ScoreConfig,
    bottleneck_distance,
    bottleneck_matrix,
    empty_diagram,
    maxmin_landmarks,
    pca_reduce,
    periodicity_score,
    rips_from_points,
    rips_persistence,
    score_series,
    select_delay,
    sliding_window_embed,
    standardize_cloud,
    superlevel_persistence_0d,
)


def circle(n, radius=1.0):
    th = 2 * np.pi * np.arange(n) / n
    return radius * np.column_stack([np.cos(th), np.sin(th)])


def dgm(pairs, dim=0, kind="superlevel", essential=None):
    pairs = np.asarray(pairs, dtype=float).reshape(-1, 2)
    ess = essential if essential is not None else [False] * len(pairs)
    return PersistenceDiagram(dim, pairs, ess, kind)


# ---------------------------------------------------------------- embedding

class TestEmbedding:
    def test_trajectory_rows(self):
        x = np.arange(20.0)
        C = sliding_window_embed(x, EmbeddingConfig(dimension=3, delay=2, points=5))
        assert C.shape == (5, 4)
        np.testing.assert_array_equal(C[0], [0, 2, 4, 6])
        np.testing.assert_array_equal(C[4], [4, 6, 8, 10])

    def test_constant_series(self):
        C = sliding_window_embed(np.full(50, 2.0), EmbeddingConfig(3, 1, 10))
        assert np.all(C == 2.0)

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            sliding_window_embed(np.arange(10.0), EmbeddingConfig(3, 2, 5))

    def test_config_validation(self):
        with pytest.raises(InvalidInputError):
            EmbeddingConfig(0, 1, 1)

    def test_select_delay_quarter_period(self):
        x = np.cos(2 * np.pi * np.arange(4000) / 12)
        assert select_delay(x, 64) == 3

    def test_select_delay_noise_is_small(self):
        assert select_delay(np.random.default_rng(0).normal(size=2000), 64) <= 3

    def test_standardize(self):
        X = np.random.default_rng(0).normal(size=(30, 6))
        X[3] = 4.0
        S, flags = standardize_cloud(X)
        assert flags.tolist() == [i == 3 for i in range(30)]
        assert np.all(S[3] == 0)
        ok = ~flags
        np.testing.assert_allclose(np.linalg.norm(S[ok], axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(S[ok].mean(axis=1), 0.0, atol=1e-12)

    def test_pca_planar(self):
        rng = np.random.default_rng(1)
        P = np.column_stack([rng.normal(size=(40, 2)), np.zeros(40)])
        R = pca_reduce(P, 2)
        np.testing.assert_allclose(pdist(R), pdist(P), atol=1e-9)

    def test_pca_sign_and_errors(self):
        X = np.random.default_rng(2).normal(size=(20, 4))
        R1, R2 = pca_reduce(X, 3), pca_reduce(-X, 3)
        np.testing.assert_allclose(np.abs(R1), np.abs(R2), atol=1e-10)
        with pytest.raises(InvalidInputError):
            pca_reduce(X, 5)

    def test_landmarks(self):
        P = circle(400)
        idx = maxmin_landmarks(P, 4, seed=0)
        angles = np.sort((idx - idx[0]) % 400)
        np.testing.assert_allclose(angles, [0, 100, 200, 300], atol=1)
        np.testing.assert_array_equal(maxmin_landmarks(P, 10, 5), maxmin_landmarks(P, 10, 5))
        np.testing.assert_array_equal(maxmin_landmarks(P[:5], 9), np.arange(5))
        with pytest.raises(InvalidInputError):
            maxmin_landmarks(P, 0)


# ---------------------------------------------------------------- Rips

class TestRips:
    def test_equilateral_triangle(self):
        s = 1.7
        P = np.array([[0, 0], [s, 0], [s / 2, s * math.sqrt(3) / 2]])
        d = rips_from_points(P, 1, 5.0)
        assert diagram_triples(d[0]) == pytest.approx([(0, s, False), (0, s, False), (0, 5.0, True)])
        assert len(d[1]) == 0

    def test_unit_square(self):
        d = rips_from_points(np.array([[0, 0], [1, 0], [1, 1], [0, 1.0]]), 1, 3.0)[1]
        assert diagram_triples(d) == pytest.approx([(1.0, math.sqrt(2), False)])

    def test_regular_polygon_death_is_shortest_chord_past_a_third(self):
        # the loop of an evenly spaced n-gon dies at the first chord skipping more than n/3 steps
        for n in (6, 12, 20, 21):
            d = rips_from_points(circle(n), 1)[1]
            k = n // 3 if n % 3 == 0 else n // 3 + 1
            assert len(d) == 1
            assert d.pairs[0, 0] == pytest.approx(2 * math.sin(math.pi / n), abs=1e-12)
            assert d.pairs[0, 1] == pytest.approx(2 * math.sin(k * math.pi / n), abs=1e-12)

    def test_twenty_point_circle_against_brute_force(self):
        D = squareform(pdist(circle(20)))
        fast = rips_persistence(D, 1, 2.0)
        slow = rips_brute_force(D, 2.0)
        for dim in (0, 1):
            np.testing.assert_allclose(np.array(diagram_triples(fast[dim]), dtype=float),
                                       np.array(slow[dim], dtype=float), atol=1e-12)
        (b, d), = fast[1].pairs
        assert b == pytest.approx(2 * math.sin(math.pi / 20), abs=1e-9)
        assert d == pytest.approx(2 * math.sin(7 * math.pi / 20), abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(st.integers(2, 8), st.integers(0, 2**32 - 1), st.booleans())
    def test_matches_brute_force(self, n, seed, integer_grid):
        rng = np.random.default_rng(seed)
        P = rng.integers(0, 4, size=(n, 2)).astype(float) if integer_grid else rng.normal(size=(n, 2))
        D = squareform(pdist(P))
        cap = float(np.quantile(D[D > 0], 0.8)) if np.any(D > 0) else 1.0
        for scale in (cap, np.inf):
            fast = rips_persistence(D, 1, scale)
            slow = rips_brute_force(D, scale if np.isfinite(scale) else D.max())
            for dim in (0, 1):
                np.testing.assert_allclose(np.array(diagram_triples(fast[dim]), dtype=float).reshape(-1, 3),
                                           np.array(slow[dim], dtype=float).reshape(-1, 3), atol=1e-12)

    def test_dim0_deaths_are_mst_edges(self):
        P = np.random.default_rng(3).normal(size=(40, 3))
        D = squareform(pdist(P))
        d0 = rips_persistence(D, 0)[0]
        mst = np.sort(minimum_spanning_tree(D).data)
        np.testing.assert_allclose(np.sort(d0.finite()[:, 1]), mst, atol=1e-12)
        assert d0.essential.sum() == 1

    def test_disconnected_at_cap(self):
        P = np.array([[0.0, 0], [0.1, 0], [5, 0], [5.1, 0]])
        d0 = rips_from_points(P, 0, 1.0)[0]
        assert d0.essential.sum() == 2

    def test_permutation_invariance(self):
        P = np.random.default_rng(4).normal(size=(25, 2))
        perm = np.random.default_rng(5).permutation(25)
        a, b = rips_from_points(P, 1), rips_from_points(P[perm], 1)
        for dim in (0, 1):
            np.testing.assert_allclose(np.array(diagram_triples(a[dim]), dtype=float),
                                       np.array(diagram_triples(b[dim]), dtype=float), atol=1e-12)

    def test_errors(self):
        D = np.array([[0, 1.0], [2.0, 0]])
        with pytest.raises(InvalidInputError):
            rips_persistence(D)
        with pytest.raises(InvalidInputError):
            rips_persistence(np.zeros((2, 2)), 2)
        with pytest.raises(InvalidInputError):
            rips_persistence(np.zeros((2, 2)), 1, 0.0)

    def test_infinity_symbol_two_loops(self):
        P = gen_infinity_cloud(150, noise_sd=0.05, seed=0)
        pers = np.sort(rips_from_points(P, 1)[1].persistence)[::-1]
        assert pers[1] >= 3 * pers[2]


# ---------------------------------------------------------------- periodicity score

class TestPeriodicityScore:
    def test_formula(self):
        assert periodicity_score(empty_diagram(1)) == 0.0
        assert periodicity_score(dgm([[0, math.sqrt(3)]], 1, "rips")) == pytest.approx(1.0)
        assert periodicity_score(dgm([[0.5, 0.6], [0.1, 1.0]], 1, "rips")) == pytest.approx(0.9 / math.sqrt(3))
        assert periodicity_score(dgm([[0, 3.0]], 1, "rips")) == 1.0
        with pytest.raises(InvalidInputError):
            periodicity_score(dgm([[0, 1.0]], 0, "rips"))

    def test_dense_circle_and_noise(self):
        x = np.cos(2 * np.pi * np.arange(3000) / 60.0)
        assert score_series(x).score > 0.9
        noise = gen_white_noise(0.8, 1300, seed=0).values
        assert score_series(noise).score < 0.3

    @pytest.mark.parametrize("c", [1e-3, 0.5, 7.0, 1e4])
    def test_scale_invariance(self, c):
        x = gen_periodic(20, 0.3, 700, seed=2).values
        cfg = ScoreConfig(points=400, landmarks=100)
        assert abs(score_series(c * x, cfg).score - score_series(x, cfg).score) < 1e-9

    def test_constant_is_degenerate(self):
        r = score_series(np.full(500, 1.5))
        assert r.degenerate and r.score == 0.0

    def test_config_validation(self):
        with pytest.raises(InvalidInputError):
            ScoreConfig(smooth_window=0)


# ---------------------------------------------------------------- super-level

class TestSuperlevel:
    def test_small_example(self):
        d = superlevel_persistence_0d([0, 3, 1, 2, 0])
        assert diagram_triples(d) == [(2.0, 1.0, False), (3.0, 0.0, True)]
        assert d.kind == "superlevel"

    def test_monotone(self):
        d = superlevel_persistence_0d(np.arange(10.0))
        assert diagram_triples(d) == [(9.0, 0.0, True)]

    def test_bimodal(self):
        d = superlevel_persistence_0d([0, 2, 5, 3, 1, 2, 4, 2, 0.5])
        assert diagram_triples(d) == [(4.0, 1.0, False), (5.0, 0.0, True)]

    def test_plateaus(self):
        assert diagram_triples(superlevel_persistence_0d([1, 3, 3, 3, 1])) == [(3.0, 1.0, True)]
        assert diagram_triples(superlevel_persistence_0d([3, 0, 3])) == [(3.0, 0.0, False), (3.0, 0.0, True)]
        assert diagram_triples(superlevel_persistence_0d([2.0])) == [(2.0, 2.0, True)]

    def test_errors(self):
        with pytest.raises(InvalidInputError):
            superlevel_persistence_0d([])
        with pytest.raises(InvalidInputError):
            superlevel_persistence_0d([1.0, np.inf])

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(0, 6), min_size=1, max_size=50))
    def test_matches_threshold_sweep(self, vals):
        f = np.asarray(vals, dtype=float)
        d = superlevel_persistence_0d(f)
        assert [tuple(p) for p in d.finite()] == [tuple(p) for p in sorted(superlevel_pairs_sweep(f), key=lambda p: (-p[0], -p[1]))]
        assert tuple(d.pairs[-1]) == (f.max(), f.min()) and d.essential[-1]

    def test_stability(self):
        rng = np.random.default_rng(7)
        eps = 0.01
        for _ in range(50):
            f = rng.normal(size=31)
            g = f + rng.uniform(-eps, eps, size=f.size)
            assert bottleneck_distance(superlevel_persistence_0d(f), superlevel_persistence_0d(g)) <= eps + 1e-12


# ---------------------------------------------------------------- bottleneck

point_lists = st.lists(
    st.tuples(st.floats(0, 10, allow_nan=False), st.floats(0, 10, allow_nan=False)).map(
        lambda t: (min(t), max(t))),
    min_size=0, max_size=5)


class TestBottleneck:
    def test_examples(self):
        a = dgm([[0, 2]], 1, "rips")
        assert bottleneck_distance(a, a) == 0.0
        assert bottleneck_distance(a, empty_diagram(1)) == pytest.approx(1.0)
        assert bottleneck_distance(a, dgm([[0, 3]], 1, "rips")) == pytest.approx(1.0)
        assert bottleneck_distance(empty_diagram(1), empty_diagram(1)) == 0.0

    def test_superlevel_pairs_use_absolute_persistence(self):
        a = dgm([[5, 1]])
        assert bottleneck_distance(a, dgm(np.empty((0, 2)))) == pytest.approx(2.0)

    def test_kind_mismatch(self):
        with pytest.raises(InvalidInputError):
            bottleneck_distance(dgm([[0, 1]], 0, "rips"), dgm([[1, 0]], 0, "superlevel"))
        with pytest.raises(InvalidInputError):
            bottleneck_distance(dgm([[0, 1]], 0, "rips"), dgm([[0, 1]], 1, "rips"))

    @settings(max_examples=100, deadline=None)
    @given(point_lists, point_lists)
    def test_matches_enumeration(self, a, b):
        assert bottleneck_distance(np.array(a).reshape(-1, 2), np.array(b).reshape(-1, 2)) == pytest.approx(
            bottleneck_brute_force(a, b), abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(point_lists, point_lists, point_lists)
    def test_metric_properties(self, a, b, c):
        A, B, C = (np.array(v).reshape(-1, 2) for v in (a, b, c))
        ab, ba = bottleneck_distance(A, B), bottleneck_distance(B, A)
        assert ab == pytest.approx(ba, abs=1e-12)
        assert ab <= bottleneck_distance(A, C) + bottleneck_distance(C, B) + 1e-9
        assert bottleneck_distance(A, A) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(point_lists, point_lists, st.integers(0, 2), st.integers(0, 2))
    def test_essential_matches_enumeration(self, a, b, ka, kb):
        ea = [i < ka for i in range(len(a))]
        eb = [i < kb for i in range(len(b))]
        got = bottleneck_distance(dgm(np.array(a).reshape(-1, 2), 1, "rips", ea),
                                  dgm(np.array(b).reshape(-1, 2), 1, "rips", eb))
        want = bottleneck_brute_force(a, b, ea, eb)
        if np.isinf(want):
            assert np.isinf(got)
        else:
            assert got == pytest.approx(want, abs=1e-12)

    def test_essential_not_matched_to_diagonal(self):
        # flat profiles at different heights differ by their essential pairs
        hi = superlevel_persistence_0d([0.97, 0.96, 0.97])
        lo = superlevel_persistence_0d([0.05, 0.04, 0.05])
        assert bottleneck_distance(hi, lo) == pytest.approx(0.92)
        assert bottleneck_distance(np.array(hi.pairs), np.array(lo.pairs)) == pytest.approx(0.005)
        two = dgm([[0, 1], [0, 2]], 1, "rips", [True, True])
        assert np.isinf(bottleneck_distance(two, dgm([[0, 1]], 1, "rips", [True])))

    def test_matrix(self):
        ds = [superlevel_persistence_0d(np.random.default_rng(s).normal(size=20)) for s in range(5)]
        M = bottleneck_matrix(ds)
        assert np.allclose(M, M.T) and np.all(np.diag(M) == 0)
        assert M[1, 3] == bottleneck_distance(ds[1], ds[3])


def test_diagram_json_roundtrip():
    d = superlevel_persistence_0d([0, 3, 1, 2, 0])
    back = PersistenceDiagram.from_json(d.to_json())
    assert back.kind == d.kind and np.array_equal(back.pairs, d.pairs)
    assert back.essential.tolist() == d.essential.tolist()
    with pytest.raises(InvalidInputError):
        PersistenceDiagram(0, np.zeros((2, 2)), [True])
