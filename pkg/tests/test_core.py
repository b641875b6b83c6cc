from __future__ import annotations

import numpy as np
import pytest

from netloop.core import NetworkModel, PlantModel, RngStreams, psd_sqrt, step_plant
from netloop.errors import ConfigurationError

from conftest import make_plant


def _plant_kwargs(n=2, m=2):
    return dict(A=np.eye(n), B=np.eye(n, m), Q1=np.eye(n), Q2=np.eye(n),
                R=np.eye(m), sigma_w=np.eye(n), sigma_x0=np.eye(n),
                mean_x0=np.zeros(n), alpha=1, beta=1)


class TestPlantModel:
    def test_accepts_well_formed(self):
        p = PlantModel(**_plant_kwargs())
        assert p.n == 2 and p.m == 2

    def test_rejects_nonsquare_A(self):
        kw = _plant_kwargs()
        kw["A"] = np.ones((2, 3))
        with pytest.raises(ConfigurationError):
            PlantModel(**kw)

    def test_rejects_B_row_mismatch(self):
        kw = _plant_kwargs()
        kw["B"] = np.ones((3, 2))
        with pytest.raises(ConfigurationError):
            PlantModel(**kw)

    def test_rejects_indefinite_Q1(self):
        kw = _plant_kwargs()
        kw["Q1"] = np.array([[1.0, 0.0], [0.0, -1.0]])
        with pytest.raises(ConfigurationError):
            PlantModel(**kw)

    def test_rejects_semidefinite_R(self):
        # R enters a matrix inverse, so merely PSD is not enough
        kw = _plant_kwargs()
        kw["R"] = np.array([[1.0, 0.0], [0.0, 0.0]])
        with pytest.raises(ConfigurationError):
            PlantModel(**kw)

    def test_rejects_asymmetric_weight(self):
        kw = _plant_kwargs()
        kw["Q1"] = np.array([[1.0, 0.2], [0.0, 1.0]])
        with pytest.raises(ConfigurationError):
            PlantModel(**kw)

    def test_rejects_negative_tolerance(self):
        kw = _plant_kwargs()
        kw["alpha"] = -1
        with pytest.raises(ConfigurationError):
            PlantModel(**kw)

    def test_rejects_mean_length_mismatch(self):
        kw = _plant_kwargs()
        kw["mean_x0"] = np.zeros(3)
        with pytest.raises(ConfigurationError):
            PlantModel(**kw)

    def test_signature_separates_plants(self, rng):
        a = make_plant(rng, index=0)
        b = make_plant(rng, index=1)
        clone = PlantModel(A=a.A, B=a.B, Q1=a.Q1, Q2=a.Q2, R=a.R,
                           sigma_w=a.sigma_w, sigma_x0=a.sigma_x0,
                           mean_x0=a.mean_x0, alpha=a.alpha, beta=a.beta,
                           index=7)
        assert a.signature() == clone.signature()   # index is not dynamics
        assert a.signature() != b.signature()


class TestNetworkModel:
    def test_accepts_decreasing_prices(self):
        net = NetworkModel(max_delay=2, prices=[3.0, 2.0, 0.5], capacities=[1, 1, 2])
        assert net.n_links == 3
        assert np.array_equal(net.delays, [0.0, 1.0, 2.0])

    def test_rejects_nondecreasing_prices(self):
        with pytest.raises(ConfigurationError):
            NetworkModel(max_delay=2, prices=[3.0, 3.0, 1.0], capacities=[1, 1, 1])

    def test_rejects_negative_last_price(self):
        with pytest.raises(ConfigurationError):
            NetworkModel(max_delay=1, prices=[1.0, -0.5], capacities=[1, 1])

    def test_rejects_zero_capacity(self):
        with pytest.raises(ConfigurationError):
            NetworkModel(max_delay=1, prices=[2.0, 1.0], capacities=[1, 0])

    def test_rejects_length_mismatch(self):
        with pytest.raises(ConfigurationError):
            NetworkModel(max_delay=2, prices=[2.0, 1.0], capacities=[1, 1, 1])


class TestPsdSqrt:
    def test_squares_back(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 5))
            root = rng.uniform(-1, 1, (n, n))
            mat = root @ root.T
            s = psd_sqrt(mat)
            assert np.allclose(s @ s, mat, atol=1e-10)
            assert np.allclose(s, s.T, atol=1e-12)

    def test_degenerate_rank(self):
        mat = np.array([[1.0, 1.0], [1.0, 1.0]])
        s = psd_sqrt(mat)
        assert np.allclose(s @ s, mat, atol=1e-12)

    def test_rejects_indefinite(self):
        with pytest.raises(ConfigurationError):
            psd_sqrt(np.array([[1.0, 0.0], [0.0, -1e-6]]))


class TestRngStreams:
    def test_streams_reproducible(self):
        streams = RngStreams(seed=123)
        a = streams.stream(4, 2).standard_normal(8)
        b = streams.stream(4, 2).standard_normal(8)
        assert np.array_equal(a, b)

    def test_streams_independent_of_draw_order(self):
        """Counter-based streams must not care what was drawn before."""
        s1 = RngStreams(seed=9)
        _ = s1.stream(0, 0).standard_normal(100)
        late = s1.stream(3, 1).standard_normal(5)
        fresh = RngStreams(seed=9).stream(3, 1).standard_normal(5)
        assert np.array_equal(late, fresh)

    def test_distinct_keys_differ(self):
        streams = RngStreams(seed=5)
        a = streams.stream(0, 1).standard_normal(6)
        b = streams.stream(1, 0).standard_normal(6)
        c = RngStreams(seed=6).stream(0, 1).standard_normal(6)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_rejects_negative_indices(self):
        with pytest.raises(ConfigurationError):
            RngStreams(seed=1).stream(-1, 0)

    def test_draw_gaussian_moments(self):
        streams = RngStreams(seed=77)
        mean = np.array([1.0, -2.0])
        cov = np.array([[2.0, 0.6], [0.6, 1.0]])
        draws = streams.draw_gaussian(0, 0, mean, cov, 200_000)
        assert np.allclose(draws.mean(axis=0), mean, atol=0.02)
        assert np.allclose(np.cov(draws.T), cov, atol=0.05)

    def test_draw_gaussian_degenerate_cov(self):
        draws = RngStreams(seed=2).draw_gaussian(0, 0, [3.0], [[0.0]], 10)
        assert np.array_equal(draws, np.full((10, 1), 3.0))


class TestStepPlant:
    def test_matches_direct_formula(self, rng):
        model = make_plant(rng)
        x = rng.standard_normal(2)
        u = rng.standard_normal(2)
        w = rng.standard_normal(2)
        assert np.allclose(step_plant(model, x, u, w),
                           model.A @ x + model.B @ u + w)

    def test_batched_rows_agree_with_loop(self, rng):
        model = make_plant(rng)
        X = rng.standard_normal((7, 2))
        U = rng.standard_normal((7, 2))
        W = rng.standard_normal((7, 2))
        batched = step_plant(model, X, U, W)
        for r in range(7):
            assert np.allclose(batched[r], step_plant(model, X[r], U[r], W[r]))

    def test_rejects_dimension_mismatch(self, rng):
        model = make_plant(rng)
        with pytest.raises(ConfigurationError):
            step_plant(model, np.zeros(3), np.zeros(2), np.zeros(3))
