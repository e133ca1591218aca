import numpy as np
import pytest

from bdris import matkit
from bdris.baselines import (
    DiagRis,
    _best_phase,
    fixed_ris_capacity,
    low_complexity_bdris,
    no_ris_capacity,
    optimize_diag_ris,
    random_diag,
    random_diag_capacity,
    symmetric_unitary_projection,
)
from bdris.channel import ChannelSet, Scenario, build_channels
from bdris.rate import log_det_capacity, scattering, water_filling_capacity


@pytest.fixture(scope="module")
def desk():
    sc = Scenario()
    return sc, build_channels(sc, 3)


class TestDiagRis:
    def test_theta_is_phase_diagonal(self):
        phases = np.array([0.1, 3.0, 5.9])
        ris = DiagRis(phases)
        np.testing.assert_allclose(ris.theta, np.diag(np.exp(1j * phases)), atol=1e-15)
        assert np.array_equal(ris.theta, ris.as_bdris().theta)

    def test_best_phase_matches_dense_grid(self, rng):
        rest = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        u = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        w = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        phi, val = _best_phase(rest, u, w, 0.5)
        grid = np.linspace(0, 2 * np.pi, 200001)
        dense = max(log_det_capacity(rest + np.exp(1j * g) * np.outer(u, w), 0.5) for g in grid[::40])
        assert val >= dense - 1e-9
        assert val == pytest.approx(log_det_capacity(rest + np.exp(1j * phi) * np.outer(u, w), 0.5))

    def test_optimize_is_monotone_and_coordinatewise_optimal(self, desk):
        sc, ch = desk
        ris, cov, trace = optimize_diag_ris(ch, sc.noise_mw, sc.tx_power_mw)
        assert np.all(np.diff(trace.capacity) >= -1e-12)
        final = trace.outer_capacity[-1]
        assert final == pytest.approx(fixed_ris_capacity(ch, ris.theta, sc.noise_mw,
                                                         sc.tx_power_mw)[0], abs=1e-12)
        # no single-element phase change on a coarse grid helps noticeably
        for k in range(ch.m):
            for delta in np.linspace(0, 2 * np.pi, 16, endpoint=False)[1:]:
                phases = ris.phases.copy()
                phases[k] += delta
                c, _ = fixed_ris_capacity(ch, DiagRis(phases).theta, sc.noise_mw, sc.tx_power_mw)
                assert c <= final + 1e-3 * final

    def test_beats_random_phases(self, desk):
        sc, ch = desk
        _, _, trace = optimize_diag_ris(ch, sc.noise_mw, sc.tx_power_mw)
        rng = np.random.default_rng(0)
        for _ in range(50):
            c, _ = fixed_ris_capacity(ch, random_diag(rng, ch.m).theta, sc.noise_mw, sc.tx_power_mw)
            assert c <= trace.outer_capacity[-1]

    def test_single_element_siso_closed_form(self):
        sc = Scenario(n_t=1, n_r=1, m=1)
        ch = build_channels(sc, 4)
        _, _, trace = optimize_diag_ris(ch, sc.noise_mw, sc.tx_power_mw)
        gain = (abs(ch.H[0, 0]) + abs(ch.F[0, 0]) * abs(ch.G[0, 0])) ** 2
        assert trace.outer_capacity[-1] == pytest.approx(
            np.log1p(sc.tx_power_mw * gain / sc.noise_mw), abs=1e-9)


class TestLowComplexity:
    def test_output_symmetric_unitary(self, desk):
        sc, ch = desk
        ris, cov = low_complexity_bdris(ch, sc.noise_mw, sc.tx_power_mw)
        assert np.array_equal(ris.theta, ris.theta.T)
        assert matkit.unitarity_residual(ris.theta) < 1e-10
        assert cov.total_power == pytest.approx(sc.tx_power_mw)

    def test_projection_fixes_symmetric_unitary(self, rng):
        theta = scattering(matkit.random_unitary(rng, 6))
        np.testing.assert_allclose(symmetric_unitary_projection(theta).theta, theta, atol=1e-12)

    def test_blocked_direct_link_falls_back(self, desk):
        sc, ch = desk
        blocked = ChannelSet(H=np.zeros_like(ch.H), G=ch.G, F=ch.F, scenario=sc)
        ris, _ = low_complexity_bdris(blocked, sc.noise_mw, sc.tx_power_mw)
        np.testing.assert_allclose(ris.theta, np.eye(ch.m))

    def test_relaxed_maximizer(self, desk):
        # the unitary V U^H attains sum of singular values of T in Re tr(T Theta)
        sc, ch = desk
        T = ch.G.conj().T @ ch.H.conj().T @ ch.F
        u, s, v = matkit.svd(T)
        assert np.trace(T @ v @ u.conj().T).real == pytest.approx(s.sum(), rel=1e-10)


class TestReferenceRates:
    def test_random_diag_uniform_phases(self):
        ph = random_diag(np.random.default_rng(0), 20000).phases
        assert ph.min() >= 0 and ph.max() < 2 * np.pi
        assert np.mean(ph) == pytest.approx(np.pi, abs=0.05)

    def test_random_diag_deterministic(self, desk):
        sc, ch = desk
        a = random_diag_capacity(ch, np.random.default_rng([5, 1]), sc.noise_mw, sc.tx_power_mw, 4)
        b = random_diag_capacity(ch, np.random.default_rng([5, 1]), sc.noise_mw, sc.tx_power_mw, 4)
        assert a == b

    def test_phase_average_not_below_direct_link(self):
        # circle averages of log det(I + Z Z^H) over one RIS phase dominate the centre value
        sc = Scenario(m=1, ris_pos=(90.0, 5.0, 5.0))
        for seed in range(5):
            ch = build_channels(sc, seed)
            avg, _ = random_diag_capacity(ch, np.random.default_rng(seed), sc.noise_mw,
                                          sc.tx_power_mw, draws=1, rotations=256)
            direct = no_ris_capacity(ch, sc.noise_mw, sc.tx_power_mw)
            assert avg >= direct - 1e-12

    def test_no_ris_is_direct_water_filling(self, desk):
        sc, ch = desk
        assert no_ris_capacity(ch, sc.noise_mw, sc.tx_power_mw) == \
            water_filling_capacity(ch.H, sc.tx_power_mw, sc.noise_mw)[0]
        zero = np.zeros((ch.m, ch.m), dtype=complex)
        assert fixed_ris_capacity(ch, zero, sc.noise_mw, sc.tx_power_mw)[0] == pytest.approx(
            no_ris_capacity(ch, sc.noise_mw, sc.tx_power_mw))
