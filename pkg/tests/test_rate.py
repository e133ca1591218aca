import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdris import rate
from bdris.errors import ContractViolation, NumericFailure
from bdris.rate import BdRis, TxCovariance


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def brute_force_water_fill(g, P, noise):
    """Best KKT-feasible allocation over every active subset."""
    best, best_p = -np.inf, None
    n = len(g)
    for k in range(1, n + 1):
        for subset in itertools.combinations(range(n), k):
            idx = list(subset)
            if np.any(g[idx] <= 0):
                continue
            level = (P + np.sum(noise / g[idx])) / k
            p = np.zeros(n)
            p[idx] = level - noise / g[idx]
            if np.any(p < 0):
                continue
            val = np.sum(np.log1p(g * p / noise))
            if val > best:
                best, best_p = val, p
    return best_p


def bisection_water_fill(g, P, noise):
    lo, hi = 0.0, P + np.max(noise / g[g > 0])
    for _ in range(200):
        mu = 0.5 * (lo + hi)
        p = np.where(g > 0, np.clip(mu - noise / np.where(g > 0, g, 1), 0, None), 0)
        lo, hi = (mu, hi) if p.sum() < P else (lo, mu)
    return p


class TestWaterFill:
    def test_equal_gains_split_evenly(self):
        np.testing.assert_allclose(rate.water_fill([2.0, 2.0, 2.0], 3.0, 1.0), 1.0)

    def test_weak_channel_left_dark(self):
        # level (1 + 1 + 1) / 2 = 1.5 < 1 / 0.01, so only the strong one is used
        p = rate.water_fill([1.0, 0.01], 1.0, 1.0)
        np.testing.assert_allclose(p, [1.0, 0.0])

    def test_zero_gain_gets_nothing(self):
        p = rate.water_fill([0.0, 1.0, 0.0], 5.0, 1.0)
        np.testing.assert_allclose(p, [0.0, 5.0, 0.0])

    def test_keeps_input_order(self):
        p = rate.water_fill([0.5, 4.0, 2.0], 2.0, 1.0)
        np.testing.assert_allclose(p, brute_force_water_fill(np.array([0.5, 4.0, 2.0]), 2.0, 1.0))

    def test_rejects_empty_and_nonpositive_power(self):
        with pytest.raises(ContractViolation):
            rate.water_fill([], 1.0, 1.0)
        with pytest.raises(ContractViolation):
            rate.water_fill([1.0], 0.0, 1.0)

    @settings(max_examples=80, deadline=None)
    @given(g=st.lists(st.floats(0.0, 100.0), min_size=1, max_size=6),
           P=st.floats(1e-3, 1e3), noise=st.floats(1e-2, 10.0))
    def test_matches_oracles(self, g, P, noise):
        g = np.array(g)
        if not np.any(g > 1e-9):
            return
        g[g < 1e-9] = 0.0
        p = rate.water_fill(g, P, noise)
        assert p.sum() == pytest.approx(P, rel=1e-12)
        assert np.all(p >= 0)
        np.testing.assert_allclose(p, brute_force_water_fill(g, P, noise), atol=1e-9 * P)
        np.testing.assert_allclose(p, bisection_water_fill(g, P, noise), atol=1e-8 * P)

    def test_beats_random_allocations(self, rng):
        g = rng.exponential(size=4)
        p = rate.water_fill(g, 3.0, 0.5)
        best = np.sum(np.log1p(g * p / 0.5))
        for _ in range(2000):
            q = rng.dirichlet(np.ones(4)) * 3.0
            assert np.sum(np.log1p(g * q / 0.5)) <= best + 1e-12


class TestCapacity:
    def test_identity_channel_two_log_two(self):
        noise = 0.3
        c, cov = rate.water_filling_capacity(np.eye(2), 2 * noise, noise)
        assert c == pytest.approx(2 * np.log(2), abs=1e-12)
        np.testing.assert_allclose(np.sort(cov.p), [noise, noise])

    def test_matches_direct_log_det(self, rng):
        H = crandn(rng, 3, 2)
        cov = TxCovariance(V=np.linalg.qr(crandn(rng, 2, 2))[0], p=np.array([0.7, 0.2]))
        direct = np.linalg.slogdet(np.eye(3) + H @ cov.matrix @ H.conj().T / 0.4)[1]
        assert rate.capacity_nats(H, cov, 0.4) == pytest.approx(direct, abs=1e-12)

    def test_wide_and_tall_agree(self, rng):
        X = crandn(rng, 2, 5)
        assert rate.log_det_capacity(X, 1.3) == pytest.approx(
            np.linalg.slogdet(np.eye(5) + X.conj().T @ X / 1.3)[1], abs=1e-12)

    def test_water_filling_is_optimal_covariance(self, rng):
        H = crandn(rng, 3, 3)
        c, _ = rate.water_filling_capacity(H, 2.0, 0.5)
        for _ in range(300):
            V = np.linalg.qr(crandn(rng, 3, 3))[0]
            cov = TxCovariance(V=V, p=rng.dirichlet(np.ones(3)) * 2.0)
            assert rate.capacity_nats(H, cov, 0.5) <= c + 1e-12

    def test_zero_channel(self):
        c, cov = rate.water_filling_capacity(np.zeros((2, 3)), 1.0, 1.0)
        assert c == 0.0 and cov.total_power == pytest.approx(1.0)

    def test_nonfinite_raises(self):
        with np.errstate(over="ignore"), pytest.raises(NumericFailure):
            rate.log_det_capacity(np.array([[1e200]]), 1e-200)

    def test_active_streams(self):
        assert rate.active_streams(np.array([1.0, 1e-7, 0.0]), 1.0) == 1

    def test_nats_to_bits(self):
        assert rate.nats_to_bps_hz(np.log(2)) == pytest.approx(1.0)


class TestScattering:
    def test_exactly_symmetric(self, rng):
        q = np.linalg.qr(crandn(rng, 6, 6))[0]
        t = rate.scattering(q)
        assert np.array_equal(t, t.T)

    def test_bdris_round_trip(self, rng):
        q = np.linalg.qr(crandn(rng, 4, 4))[0]
        ris = BdRis.from_theta(rate.scattering(q))
        np.testing.assert_allclose(ris.theta, rate.scattering(q), atol=1e-13)

    def test_equivalent_channel_affine_in_theta(self, rng):
        H, F, G = crandn(rng, 2, 3), crandn(rng, 2, 4), crandn(rng, 3, 4)
        A, B = crandn(rng, 4, 4), crandn(rng, 4, 4)
        eq = rate.equivalent_channel
        np.testing.assert_allclose(eq(H, F, G, A + B) - eq(H, F, G, B),
                                   eq(H, F, G, A) - H, atol=1e-12)

    def test_equivalent_channel_shape_check(self, rng):
        with pytest.raises(ContractViolation):
            rate.equivalent_channel(np.ones((2, 2)), np.ones((2, 3)), np.ones((2, 4)), np.eye(3))
