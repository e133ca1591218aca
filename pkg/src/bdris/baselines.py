"""
Reference schemes the BD-RIS optimizer is compared against.

- optimized diagonal (single-connected) RIS via cyclic per-element phase search
- low-complexity BD-RIS: relaxed unitary maximizer projected to symmetric unitary
- diagonal RIS with random phases
- no RIS at all
"""

from dataclasses import dataclass

import numpy as np

from . import matkit
from .optimizer import IterationTrace, OptimizerConfig
from .rate import (
    BdRis,
    active_streams,
    capacity_nats,
    equivalent_channel,
    optimize_covariance,
    scattering,
    water_filling_capacity,
)

GRID_POINTS = 64
GOLDEN_ITERS = 40
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True, eq=False)
class DiagRis:
    """Single-connected RIS with phases ``phases`` (radians)."""

    phases: np.ndarray

    @property
    def m(self):
        return self.phases.shape[0]

    def as_bdris(self):
        """Equivalent BD-RIS with the diagonal Takagi factor ``diag(exp(i phases / 2))``."""
        return BdRis(Q=np.diag(np.exp(0.5j * self.phases)))

    @property
    def theta(self):
        return self.as_bdris().theta


def _batch_capacity(X, noise_mw):
    """``log det(I + X X^H / noise)`` for a stack of (n_r, d) matrices."""
    gram = np.conj(np.swapaxes(X, -1, -2)) @ X
    lam = np.linalg.eigvalsh(gram)
    return np.sum(np.log1p(np.clip(lam, 0.0, None) / noise_mw), axis=-1)


def _best_phase(rest, u, w, noise_mw):
    """Maximize the capacity of ``rest + exp(i phi) u w^T`` over one phase."""
    rank1 = np.outer(u, w)

    def f(phi):
        return _batch_capacity(rest + np.exp(1j * phi) * rank1, noise_mw)

    grid = 2.0 * np.pi * np.arange(GRID_POINTS) / GRID_POINTS
    vals = _batch_capacity(rest[None] + np.exp(1j * grid)[:, None, None] * rank1[None], noise_mw)
    k = int(np.argmax(vals))
    half = 2.0 * np.pi / GRID_POINTS
    a, b = grid[k] - half, grid[k] + half
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(GOLDEN_ITERS):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    phi, val = (c, fc) if fc > fd else (d, fd)
    if vals[k] > val:
        phi, val = grid[k], vals[k]
    return float(np.mod(phi, 2.0 * np.pi)), float(val)


def optimize_diag_ris(channels, noise_mw, total_power, cfg=OptimizerConfig(), phases0=None):
    """
    Capacity-maximizing diagonal RIS by alternating optimization.

    Each outer iteration water-fills the covariance for the current
    phases, then sweeps the elements once; every element's phase is
    picked from a 64-point grid refined by golden-section search, and
    kept only if it does not lower the capacity. The final covariance is
    always the water-filling solution for the final phases.

    Returns
    -------
    ris : DiagRis
    cov : TxCovariance
    trace : IterationTrace
        ``capacity`` holds the capacity after every accepted update.
    """
    H, F, G = channels.H, channels.F, channels.G
    m = channels.m
    phases = np.zeros(m) if phases0 is None else np.mod(np.asarray(phases0, dtype=float), 2 * np.pi)
    trace = IterationTrace(init="zero" if phases0 is None else "explicit")

    H_eq = equivalent_channel(H, F, G, DiagRis(phases).theta)
    cov = optimize_covariance(H_eq, total_power, noise_mw)
    C = capacity_nats(H_eq, cov, noise_mw)
    trace.capacity.append(C)
    trace.outer_capacity.append(C)

    for _ in range(cfg.max_outer):
        C_start = C
        B = cov.precoder()
        Hb = H @ B
        gbh = G.conj().T @ B  # row k couples element k to the streams
        theta = np.exp(1j * phases)
        X = Hb + (F * theta) @ gbh
        for k in range(m):
            contrib = theta[k] * np.outer(F[:, k], gbh[k])
            rest = X - contrib
            phi, val = _best_phase(rest, F[:, k], gbh[k], noise_mw)
            if val > C:
                phases[k] = phi
                theta[k] = np.exp(1j * phi)
                X = rest + theta[k] * np.outer(F[:, k], gbh[k])
                C = val
                trace.capacity.append(C)
        H_eq = equivalent_channel(H, F, G, DiagRis(phases).theta)
        cov = optimize_covariance(H_eq, total_power, noise_mw)
        C = capacity_nats(H_eq, cov, noise_mw)
        trace.capacity.append(C)
        trace.outer_capacity.append(C)
        if C - C_start <= cfg.eps_capacity * C_start:
            break
    return DiagRis(phases=phases.copy()), cov, trace


def symmetric_unitary_projection(theta):
    """Map a square matrix to ``Q Q^T``, ``Q`` the Takagi factor of its symmetric part."""
    theta = np.asarray(theta, dtype=complex)
    q, _ = matkit.takagi(0.5 * (theta + theta.T))
    return BdRis(Q=q)


def low_complexity_bdris(channels, noise_mw, total_power):
    """
    Closed-form BD-RIS: maximize the cross term of ``||H + F Theta G^H||_F^2``
    over unitary ``Theta``, then project to the symmetric unitary set.

    ``T = G^H H^H F = U S V^H`` gives the relaxed maximizer ``V U^H``. A zero
    ``T`` (for instance a blocked direct link) falls back to ``Theta = I``.
    """
    H, F, G = channels.H, channels.F, channels.G
    T = G.conj().T @ H.conj().T @ F
    scale = np.linalg.norm(G) * np.linalg.norm(H) * np.linalg.norm(F)
    if scale == 0 or matkit.fro(T) <= 1e-14 * scale:
        ris = BdRis(Q=np.eye(channels.m, dtype=complex))
    else:
        u, _, v = matkit.svd(T)
        ris = symmetric_unitary_projection(v @ u.conj().T)
    H_eq = equivalent_channel(H, F, G, ris.theta)
    return ris, optimize_covariance(H_eq, total_power, noise_mw)


def random_diag(rng, m):
    """Diagonal RIS with i.i.d. uniform phases on [0, 2 pi)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return DiagRis(phases=rng.uniform(0.0, 2.0 * np.pi, size=m))


def random_diag_capacity(channels, rng, noise_mw, total_power, draws=64, rotations=4):
    """
    Water-filling capacity of a random-phase diagonal RIS, averaged over phases.

    Each of ``draws`` i.i.d. phase vectors is also evaluated under the
    ``rotations`` common phase offsets ``2 pi k / rotations``, which leave
    the uniform phase law invariant and cancel the first-order fluctuation
    of the rate around the no-RIS channel.

    Returns ``(mean capacity in nats, mean active-stream count)``.
    """
    caps, streams = [], []
    for _ in range(draws):
        ris = random_diag(rng, channels.m)
        for k in range(rotations):
            theta = DiagRis(ris.phases + 2.0 * np.pi * k / rotations).theta
            c, cov = fixed_ris_capacity(channels, theta, noise_mw, total_power)
            caps.append(c)
            streams.append(active_streams(cov.p, total_power))
    return float(np.mean(caps)), float(np.mean(streams))


def no_ris_capacity(channels, noise_mw, total_power):
    """Water-filling capacity of the direct link alone, in nats."""
    return water_filling_capacity(channels.H, total_power, noise_mw)[0]


def fixed_ris_capacity(channels, theta, noise_mw, total_power):
    """Water-filling capacity with a given scattering matrix; returns ``(C, cov)``."""
    H_eq = equivalent_channel(channels.H, channels.F, channels.G, theta)
    return water_filling_capacity(H_eq, total_power, noise_mw)

