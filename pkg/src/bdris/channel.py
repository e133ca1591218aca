"""
Scenario geometry, large-scale path loss and small-scale fading.

Arrays are half-wavelength uniform linear arrays laid along the x-axis.
The direct link is Rayleigh; the two RIS hops are Rician with a rank-one
geometric line-of-sight component. Path loss multiplies amplitudes by
``10**(PL/20)``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ContractViolation


def dbm_to_mw(dbm):
    return 10.0 ** (np.asarray(dbm, dtype=float) / 10.0)


def mw_to_dbm(mw):
    return 10.0 * np.log10(np.asarray(mw, dtype=float))


@dataclass(frozen=True)
class Scenario:
    """Deployment geometry and link-budget parameters (SI units, dB, mW)."""

    tx_pos: tuple = (0.0, 0.0, 1.5)
    rx_pos: tuple = (50.0, 0.0, 1.5)
    ris_pos: tuple = (50.0, 5.0, 5.0)
    n_t: int = 2
    n_r: int = 2
    m: int = 16
    carrier_hz: float = 2.4e9
    bandwidth_hz: float = 20e6
    pl0_db: float = -28.0
    alpha_direct: float = 3.75
    alpha_ris: float = 2.0
    rice_factor: float = 3.0
    tx_power_mw: float = 100.0
    noise_psd_dbm_per_hz: float = -174.0

    def __post_init__(self):
        for name in ("tx_pos", "rx_pos", "ris_pos"):
            pos = tuple(float(v) for v in getattr(self, name))
            if len(pos) != 3:
                raise ContractViolation(f"{name} must be a 3-vector")
            object.__setattr__(self, name, pos)
        for name in ("n_t", "n_r", "m"):
            if int(getattr(self, name)) < 1:
                raise ContractViolation(f"{name} must be >= 1")
        for name in ("carrier_hz", "bandwidth_hz", "tx_power_mw"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} must be positive")
        if self.rice_factor < 0:
            raise ContractViolation("rice_factor must be nonnegative")
        for a, b in (("tx_pos", "rx_pos"), ("tx_pos", "ris_pos"), ("ris_pos", "rx_pos")):
            if distance(getattr(self, a), getattr(self, b)) <= 0:
                raise ContractViolation(f"{a} and {b} coincide")

    @property
    def noise_mw(self):
        return float(dbm_to_mw(noise_power_dbm(self.bandwidth_hz, self.noise_psd_dbm_per_hz)))

    def with_(self, **changes):
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    """One realization: direct ``H`` (n_r x n_t), ``G`` (n_t x m), ``F`` (n_r x m)."""

    H: np.ndarray
    G: np.ndarray
    F: np.ndarray
    scenario: Scenario = field(default_factory=Scenario)
    seed: int = None

    def __post_init__(self):
        n_r, n_t = self.H.shape
        if self.G.shape[0] != n_t or self.F.shape[0] != n_r or self.G.shape[1] != self.F.shape[1]:
            raise ContractViolation(
                f"inconsistent channel shapes H{self.H.shape} G{self.G.shape} F{self.F.shape}"
            )
        for name in ("H", "G", "F"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ContractViolation(f"{name} has non-finite entries")

    @property
    def n_r(self):
        return self.H.shape[0]

    @property
    def n_t(self):
        return self.H.shape[1]

    @property
    def m(self):
        return self.G.shape[1]

    def __eq__(self, other):
        if not isinstance(other, ChannelSet):
            return NotImplemented
        return (
            self.seed == other.seed
            and self.scenario == other.scenario
            and all(np.array_equal(getattr(self, k), getattr(other, k)) for k in "HGF")
        )


def distance(a, b):
    return float(np.linalg.norm(np.subtract(a, b, dtype=float)))


def path_loss_db(distance_m, alpha, pl0_db=-28.0):
    """Log-distance path loss ``PL0 - 10 alpha log10(d)`` in dB (d0 = 1 m)."""
    if not distance_m > 0:
        raise ContractViolation(f"distance must be positive, got {distance_m}")
    return pl0_db - alpha * 10.0 * np.log10(distance_m)


def noise_power_dbm(bandwidth_hz, psd_dbm=-174.0):
    if not bandwidth_hz > 0:
        raise ContractViolation("bandwidth must be positive")
    return psd_dbm + 10.0 * np.log10(bandwidth_hz)


def steering_vector(n, sin_angle):
    """ULA response ``exp(i pi k sin_angle)``, k = 0..n-1, as an (n, 1) column."""
    if n < 1:
        raise ContractViolation("array size must be >= 1")
    k = np.arange(n)
    return np.exp(1j * np.pi * k * sin_angle)[:, None]


def draw_rayleigh(rng, rows, cols, amplitude_scale=1.0):
    """I.i.d. CN(0, scale^2) entries."""
    if amplitude_scale < 0:
        raise ContractViolation("amplitude_scale must be nonnegative")
    z = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    return amplitude_scale * z / np.sqrt(2.0)


def draw_rician(rng, rows, cols, rice_factor, los, amplitude_scale=1.0):
    """Rician fading with Rice factor ``rice_factor`` around the unit-modulus ``los``."""
    if rice_factor < 0:
        raise ContractViolation("rice_factor must be nonnegative")
    los = np.asarray(los)
    if los.shape != (rows, cols):
        raise ContractViolation(f"LOS shape {los.shape} does not match ({rows}, {cols})")
    if not np.allclose(np.abs(los), 1.0, atol=1e-12):
        raise ContractViolation("LOS entries must be unit modulus")
    nlos = draw_rayleigh(rng, rows, cols)
    k_los = np.sqrt(rice_factor / (1.0 + rice_factor))
    k_nlos = np.sqrt(1.0 / (1.0 + rice_factor))
    return amplitude_scale * (k_los * los + k_nlos * nlos)


def _sin_x(src, dst):
    """Sine of the angle off broadside for an x-oriented array at ``src`` looking at ``dst``."""
    d = np.subtract(dst, src, dtype=float)
    return float(d[0] / np.linalg.norm(d))


def los_matrix(n_a, pos_a, n_b, pos_b):
    """Rank-one LOS ``a(pos_a -> pos_b) a(pos_b -> pos_a)^H`` of shape (n_a, n_b)."""
    a = steering_vector(n_a, _sin_x(pos_a, pos_b))
    b = steering_vector(n_b, _sin_x(pos_b, pos_a))
    return a @ b.conj().T


def build_channels(scenario, seed):
    """Draw ``(H, G, F)`` for ``scenario`` from a PCG64 stream seeded with ``seed``."""
    sc = scenario
    rng = np.random.default_rng(seed)
    d_h = distance(sc.tx_pos, sc.rx_pos)
    d_g = distance(sc.tx_pos, sc.ris_pos)
    d_f = distance(sc.ris_pos, sc.rx_pos)
    amp_h = 10.0 ** (path_loss_db(d_h, sc.alpha_direct, sc.pl0_db) / 20.0)
    amp_g = 10.0 ** (path_loss_db(d_g, sc.alpha_ris, sc.pl0_db) / 20.0)
    amp_f = 10.0 ** (path_loss_db(d_f, sc.alpha_ris, sc.pl0_db) / 20.0)

    H = draw_rayleigh(rng, sc.n_r, sc.n_t, amp_h)
    G = draw_rician(rng, sc.n_t, sc.m, sc.rice_factor,
                    los_matrix(sc.n_t, sc.tx_pos, sc.m, sc.ris_pos), amp_g)
    F = draw_rician(rng, sc.n_r, sc.m, sc.rice_factor,
                    los_matrix(sc.n_r, sc.rx_pos, sc.m, sc.ris_pos), amp_f)
    return ChannelSet(H=H, G=G, F=F, scenario=sc, seed=seed)
