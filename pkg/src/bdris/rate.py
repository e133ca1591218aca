"""
Equivalent channel, log-det capacity and the water-filling covariance.

Capacities are in nats; use :func:`nats_to_bps_hz` for spectral efficiency.
Powers and noise are linear (mW).
"""

from dataclasses import dataclass

import numpy as np

from . import matkit
from .errors import ContractViolation, NumericFailure

STREAM_THRESHOLD = 1e-6


def nats_to_bps_hz(nats):
    return nats / np.log(2.0)


@dataclass(frozen=True, eq=False)
class TxCovariance:
    """Transmit covariance ``R_xx = V diag(p) V^H`` in factored form."""

    V: np.ndarray
    p: np.ndarray

    @property
    def streams(self):
        return self.p.shape[0]

    @property
    def matrix(self):
        return (self.V * self.p) @ self.V.conj().T

    @property
    def total_power(self):
        return float(np.sum(self.p))

    def precoder(self):
        """``V diag(sqrt(p))``, so that ``R_xx = B B^H``."""
        return self.V * np.sqrt(self.p)

    @classmethod
    def uniform(cls, n_t, streams, total_power):
        V = np.eye(n_t, streams, dtype=complex)
        return cls(V=V, p=np.full(streams, total_power / streams))


def scattering(q):
    """Scattering matrix ``Theta = Q Q^T`` of a Takagi factor; symmetric by construction."""
    t = q @ q.T
    return 0.5 * (t + t.T)


@dataclass(frozen=True, eq=False)
class BdRis:
    """Fully connected BD-RIS parametrized by its unitary Takagi factor ``Q``."""

    Q: np.ndarray

    @property
    def m(self):
        return self.Q.shape[0]

    @property
    def theta(self):
        return scattering(self.Q)

    def unitarity_residual(self):
        return matkit.unitarity_residual(self.Q)

    @classmethod
    def from_theta(cls, theta):
        q, _ = matkit.takagi(theta)
        return cls(Q=q)


def equivalent_channel(H, F, G, theta):
    """``H + F Theta G^H`` for H (n_r x n_t), F (n_r x m), G (n_t x m), Theta (m x m)."""
    H, F, G, theta = (np.asarray(x) for x in (H, F, G, theta))
    n_r, n_t = H.shape
    m = theta.shape[0]
    if F.shape != (n_r, m) or G.shape != (n_t, m) or theta.shape != (m, m):
        raise ContractViolation(
            f"shape mismatch: H{H.shape} F{F.shape} G{G.shape} Theta{theta.shape}"
        )
    return H + F @ theta @ G.conj().T


def log_det_capacity(X, noise_mw):
    """``log det(I + X X^H / noise)`` evaluated on the smaller Gram matrix."""
    X = np.asarray(X)
    gram = X.conj().T @ X if X.shape[1] <= X.shape[0] else X @ X.conj().T
    lam = np.linalg.eigvalsh(0.5 * (gram + gram.conj().T))
    c = float(np.sum(np.log1p(np.clip(lam, 0.0, None) / noise_mw)))
    if not np.isfinite(c):
        raise NumericFailure("capacity is not finite")
    return c


def capacity_nats(H_eq, cov, noise_mw):
    """Capacity ``log det(I + H_eq R_xx H_eq^H / noise)`` in nats."""
    if not noise_mw > 0:
        raise ContractViolation("noise power must be positive")
    return log_det_capacity(np.asarray(H_eq) @ cov.precoder(), noise_mw)


def water_fill(gains, total_power, noise_mw):
    """
    Water-filling power allocation over parallel channels.

    Solves ``max sum log(1 + g_i p_i / noise)`` s.t. ``sum p = P``, ``p >= 0``
    exactly by testing active sets of decreasing size.

    Parameters
    ----------
    gains : array_like
        Channel power gains (squared singular values). Zero gains are
        never allocated power.
    total_power : float
        Power budget ``P`` (mW).
    noise_mw : float
        Noise power.

    Returns
    -------
    p : ndarray
        Per-channel powers in the order of ``gains``.
    """
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or g.size == 0:
        raise ContractViolation("water_fill needs a nonempty gain vector")
    if not total_power > 0:
        raise ContractViolation("total power must be positive")
    order = np.argsort(-g, kind="stable")
    gs = g[order]
    n_pos = int(np.count_nonzero(gs > 0))
    p_sorted = np.zeros_like(gs)
    if n_pos == 0:
        p_sorted[:] = total_power / g.size
    else:
        floors = noise_mw / gs[:n_pos]
        for k in range(n_pos, 0, -1):
            level = (total_power + floors[:k].sum()) / k
            if level - floors[k - 1] > 0:
                p_sorted[:k] = level - floors[:k]
                break
    p = np.empty_like(p_sorted)
    p[order] = p_sorted
    return p


def optimize_covariance(H_eq, total_power, noise_mw):
    """Capacity-achieving covariance for a fixed equivalent channel (SVD + water-filling)."""
    H_eq = np.asarray(H_eq)
    n_r, n_t = H_eq.shape
    d = min(n_t, n_r)
    if not np.any(H_eq):
        return TxCovariance.uniform(n_t, d, total_power)
    _, s, V = matkit.svd(H_eq)
    p = water_fill(s**2, total_power, noise_mw)
    return TxCovariance(V=V, p=p)


def active_streams(p, total_power):
    return int(np.count_nonzero(np.asarray(p) > STREAM_THRESHOLD * total_power))


def water_filling_capacity(H_eq, total_power, noise_mw):
    cov = optimize_covariance(H_eq, total_power, noise_mw)
    return capacity_nats(H_eq, cov, noise_mw), cov
