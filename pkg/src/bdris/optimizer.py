"""
Capacity maximization for a fully connected BD-RIS.

The scattering matrix is parametrized as ``Theta = Q Q^T`` with ``Q``
unitary, which makes it symmetric and unitary by construction. For a
fixed transmit covariance, the capacity is maximized by
minorization-maximization: at the current point a concave quadratic
lower bound ``const + J(Theta)`` touching the capacity is built, and
``J(Q Q^T)`` is maximized by gradient ascent along geodesics of the
unitary group. The covariance is updated by water-filling in between.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import matkit
from .errors import ContractViolation
from .rate import (
    BdRis,
    capacity_nats,
    equivalent_channel,
    log_det_capacity,
    optimize_covariance,
    scattering,
)

INIT_STRATEGIES = ("best", "diag", "low_complexity", "identity", "random")


@dataclass(frozen=True)
class OptimizerConfig:
    """Step-size schedule, stopping thresholds and iteration caps."""

    step_init: float = 1.0
    step_grow: float = 2.0
    step_shrink: float = 0.5
    max_backtracks: int = 30
    eps_capacity: float = 1e-4
    eps_surrogate: float = 1e-6
    max_outer: int = 100
    max_mm: int = 200
    max_inner: int = 500
    reunitarize_every: int = 50
    # ||S|| / ||grad|| required before the inner loop may declare convergence
    stationarity_tol: float = 1e-3
    # Polak-Ribiere directions on the Lie algebra; False gives plain steepest ascent
    conjugate: bool = True

    def __post_init__(self):
        for name in ("step_init", "step_grow", "step_shrink", "eps_capacity", "eps_surrogate",
                     "stationarity_tol"):
            if not getattr(self, name) > 0:
                raise ContractViolation(f"{name} must be positive")
        for name in ("max_backtracks", "max_outer", "max_mm", "max_inner", "reunitarize_every"):
            if getattr(self, name) < 1:
                raise ContractViolation(f"{name} must be >= 1")
        if not self.step_shrink < 1 < self.step_grow:
            raise ContractViolation("need step_shrink < 1 < step_grow")


@dataclass
class IterationTrace:
    """Objective histories at the three loop levels plus bookkeeping."""

    # capacity after every block update (covariance or scattering), nats
    capacity: list = field(default_factory=list)
    # capacity at the end of each outer alternation
    outer_capacity: list = field(default_factory=list)
    # one list of per-round capacities for every scattering update
    mm_capacity: list = field(default_factory=list)
    # one list of surrogate values for every surrogate maximization
    surrogate: list = field(default_factory=list)
    steps: list = field(default_factory=list)
    geodesic_steps: int = 0
    stalled: int = 0
    # largest capacity decrease of a discarded update (rounding only, in theory)
    max_drop: float = 0.0
    init: str = ""
    timings: dict = field(default_factory=lambda: {"covariance": 0.0, "scattering": 0.0})

    @property
    def outer_iterations(self):
        return max(len(self.outer_capacity) - 1, 0)


@dataclass(frozen=True, eq=False)
class MinorizerState:
    """
    Quantities frozen at the expansion point ``Theta_t`` of one minorizer.

    ``const + J(Theta)`` lower-bounds the capacity and equals it at
    ``Theta_t``, where ``J(Theta) = 2 Re tr(Z_t F Theta Gb^H) -
    ||F_t Theta Gb^H||_F^2`` and ``A = Gb^H Z_t F``.
    """

    H_t: np.ndarray
    R_t: np.ndarray
    F_t: np.ndarray
    Z_t: np.ndarray
    A: np.ndarray
    const: float
    capacity: float


def absorb_covariance(H, G, cov):
    """Fold ``R_xx = V P V^H`` into the channels: ``Hb = H V P^1/2``, ``Gb = P^1/2 V^H G``."""
    H, G = np.asarray(H), np.asarray(G)
    if H.shape[1] != cov.V.shape[0] or G.shape[0] != cov.V.shape[0]:
        raise ContractViolation(
            f"covariance of size {cov.V.shape[0]} does not match H{H.shape}, G{G.shape}"
        )
    B = cov.precoder()
    return H @ B, B.conj().T @ G


def _check_feasible(theta, tol=1e-8):
    if matkit.fro(theta - theta.T) > tol or matkit.unitarity_residual(theta) > tol * max(
        1.0, np.sqrt(theta.shape[0])
    ):
        raise ContractViolation("scattering matrix is not symmetric unitary")


def build_minorizer(Hb, F, Gb, theta_t, noise_mw, check=True):
    """
    Tangent concave minorizer of ``C(Theta) = log det(I + Hb_eq Hb_eq^H / noise)``.

    ``R_t = I/noise - (noise I + H_t H_t^H)^{-1}`` is formed from the
    eigendecomposition of ``H_t H_t^H`` as
    ``W diag(lam / (noise (noise + lam))) W^H`` to avoid cancellation.
    The additive constant is ``C(Theta_t) - J(Theta_t)``.
    """
    Hb, F, Gb, theta_t = (np.asarray(x) for x in (Hb, F, Gb, theta_t))
    if check:
        _check_feasible(theta_t)
    s2 = float(noise_mw)
    H_t = Hb + F @ theta_t @ Gb.conj().T
    W, lam = matkit.eigh(H_t @ H_t.conj().T, tol=np.inf)
    lam = np.clip(lam, 0.0, None)
    r = lam / (s2 * (s2 + lam))
    R_t = (W * r) @ W.conj().T
    F_t = (W * np.sqrt(r)) @ (W.conj().T @ F)
    Z_t = H_t.conj().T / s2 - Hb.conj().T @ R_t
    A = Gb.conj().T @ Z_t @ F
    capacity = float(np.sum(np.log1p(lam / s2)))
    state = MinorizerState(H_t=H_t, R_t=R_t, F_t=F_t, Z_t=Z_t, A=A, const=0.0, capacity=capacity)
    j_t = _surrogate(state, Gb, theta_t)
    return MinorizerState(H_t=H_t, R_t=R_t, F_t=F_t, Z_t=Z_t, A=A,
                          const=capacity - j_t, capacity=capacity)


def _surrogate(state, Gb, theta):
    lin = np.sum(state.A.T * theta)  # tr(A Theta)
    quad = state.F_t @ theta @ Gb.conj().T
    return float(2.0 * lin.real - np.vdot(quad, quad).real)


def surrogate_value(state, Gb, Q):
    """``J(Q Q^T)``."""
    return _surrogate(state, Gb, scattering(Q))


def surrogate_gradient(state, Gb, Q):
    """
    Wirtinger gradient of ``J(Q Q^T)`` with respect to ``conj(Q)``.

    With ``K = F_t^H F_t``, ``M = Gb^H Gb`` and ``B = A^H - K Theta M``
    the gradient is ``(B + B^T) conj(Q)``, normalized so that
    ``dJ = 2 Re tr(grad^H dQ)``.
    """
    theta = scattering(Q)
    Gb = np.asarray(Gb)
    k_theta_m = state.F_t.conj().T @ (state.F_t @ theta @ Gb.conj().T) @ Gb
    b = state.A.conj().T - k_theta_m
    return (b + b.T) @ Q.conj()


def tangent_project(Q, euclid_grad):
    """
    Skew-Hermitian ``S = (grad^H Q - Q^H grad) / 2``.

    ``Q S`` is the tangent projection of ``-grad``: moving along
    ``Q expm(-mu S)`` increases the objective for small ``mu > 0``.
    """
    x = Q.conj().T @ euclid_grad
    return 0.5 * (x.conj().T - x)


def geodesic_step(Q, S, mu):
    """``Q expm(mu S)``; stays on the unitary group."""
    if mu == 0:
        return Q
    return Q @ matkit.expm_skew(mu * S)


def _geodesic(Q, S):
    """``mu -> Q expm(mu S)`` sharing one eigendecomposition across step sizes."""
    # S is skew-Hermitian by construction; skip the contract checks in the hot loop
    lam, w = np.linalg.eigh(-1j * S)
    qw, wh = Q @ w, w.conj().T
    return lambda mu: (qw * np.exp(1j * mu * lam)) @ wh


def surrogate_increment(state, Gb, theta, theta_new):
    """
    ``J(theta_new) - J(theta)`` evaluated from the difference.

    ``J`` itself can carry an offset many orders above the capacity, so
    subtracting two values would lose the small gains near convergence.
    """
    return _Problem(state, Gb).increment(theta, theta_new)


class _Problem:
    """Products reused by every inner step of one surrogate maximization."""

    def __init__(self, state, Gb):
        self.A = state.A
        self.Ah = state.A.conj().T
        self.F_t = state.F_t
        self.K = state.F_t.conj().T @ state.F_t
        self.Gh = np.asarray(Gb).conj().T
        self.M = self.Gh @ self.Gh.conj().T

    def gradient(self, Q, theta):
        b = self.Ah - self.K @ theta @ self.M
        return (b + b.T) @ Q.conj()

    def increment(self, theta, theta_new):
        d = theta_new - theta
        base = self.F_t @ theta @ self.Gh
        dq = self.F_t @ d @ self.Gh
        lin = np.sum(self.A.T * d).real
        return float(2.0 * lin - 2.0 * np.vdot(base, dq).real - np.vdot(dq, dq).real)


def maximize_surrogate(state, Gb, Q0, cfg=OptimizerConfig(), trace=None, step=None,
                       gradient=surrogate_gradient):
    """
    Geodesic ascent of ``J(Q Q^T)`` over the unitary group.

    Directions are the projected gradients, combined Polak-Ribiere style
    when ``cfg.conjugate`` (the tangent spaces are all identified with the
    skew-Hermitian matrices, so no transport is needed). A trial step is
    accepted as soon as it increases ``J`` and the step then grows by
    ``cfg.step_grow``; a rejected trial shrinks it by ``cfg.step_shrink``.
    In conjugate mode the accepted step is then refined once by a
    parabolic fit along the geodesic, kept only if it gains more.

    The loop has converged once the last relative increase is below
    ``cfg.eps_surrogate`` and the stationarity ratio at the current point
    is below ``cfg.stationarity_tol``. It also stops when no increase is
    found within ``cfg.max_backtracks`` trials or after ``cfg.max_inner``
    steps.

    Returns
    -------
    Q : ndarray
        Final unitary factor.
    J : float
        Surrogate value at ``Q``.
    info : dict
        ``values`` (surrogate history), ``step`` (last step size),
        ``stalled`` (no ascent found), ``converged``, ``stationarity``
        (``||S|| / ||grad||`` at ``Q``, with the gradient norm floored by
        its value at ``Q0``).
    """
    Q = np.asarray(Q0, dtype=complex)
    theta = scattering(Q)
    J = _surrogate(state, Gb, theta)
    prob = _Problem(state, Gb)
    if gradient is surrogate_gradient:
        grad_at = prob.gradient
    else:
        def grad_at(Q, theta):
            return gradient(state, Gb, Q)
    mu = cfg.step_init if step is None else step
    values = [J]
    stalled = converged = False
    accepted = 0
    gain = np.inf
    g_ref = None
    S_prev = D_prev = None
    while True:
        grad = grad_at(Q, theta)
        S = tangent_project(Q, grad)
        s_norm, g_norm = np.linalg.norm(S), np.linalg.norm(grad)
        if g_ref is None:
            g_ref = g_norm
        # the Euclidean gradient itself can vanish at the optimum
        scale = max(g_norm, g_ref)
        ratio = s_norm / scale if scale > 0 else 0.0
        # J carries an arbitrary offset; measure progress against the bound const + J
        small_gain = gain <= cfg.eps_surrogate * abs(state.const + J)
        if s_norm == 0 or ratio < 1e-14 or (small_gain and ratio <= cfg.stationarity_tol):
            converged = True
            break
        if accepted == cfg.max_inner:
            break
        D = S
        if cfg.conjugate and S_prev is not None:
            beta = max(0.0, np.vdot(S - S_prev, S).real / np.vdot(S_prev, S_prev).real)
            D = S + beta * D_prev
            if np.vdot(D, S).real <= 0:
                D = S
        S_prev, D_prev = S, D
        path = _geodesic(Q, D)
        for _ in range(cfg.max_backtracks):
            Q_new = path(-mu)
            theta_new = scattering(Q_new)
            gain = prob.increment(theta, theta_new)
            if gain > 0:
                break
            mu *= cfg.step_shrink
        else:
            stalled = True
            break
        if cfg.conjugate:
            # refine with the parabola through J(0), J'(0) and the accepted trial
            slope = 2.0 * np.vdot(S, D).real
            denom = slope * mu - gain
            if denom > 0:
                mu_fit = min(slope * mu * mu / (2.0 * denom), mu / cfg.step_shrink ** 4)
                Q_fit = path(-mu_fit)
                theta_fit = scattering(Q_fit)
                gain_fit = prob.increment(theta, theta_fit)
                if gain_fit > gain:
                    Q_new, theta_new, gain, mu = Q_fit, theta_fit, gain_fit, mu_fit
        accepted += 1
        if accepted % cfg.reunitarize_every == 0:
            Q_fix = matkit.nearest_unitary(Q_new)
            theta_fix = scattering(Q_fix)
            extra = prob.increment(theta_new, theta_fix)
            if extra >= 0:
                Q_new, theta_new, gain = Q_fix, theta_fix, gain + extra
        Q, theta, J = Q_new, theta_new, J + gain
        values.append(J)
        if trace is not None:
            trace.steps.append(mu)
            trace.geodesic_steps += 1
        mu *= cfg.step_grow
    if trace is not None:
        trace.surrogate.append(values)
        trace.stalled += int(stalled)
    info = {"values": values, "step": mu, "stalled": stalled,
            "converged": converged, "stationarity": ratio}
    return Q, J, info


def optimize_scattering(Hb, F, Gb, Q0, noise_mw, cfg=OptimizerConfig(), trace=None):
    """
    Minorization-maximization over ``Theta = Q Q^T`` with the covariance absorbed.

    Each round builds a tangent minorizer at the current point and
    maximizes it on the unitary group. Rounds stop when the relative
    capacity gain drops below ``cfg.eps_capacity``. A round that would
    lower the capacity (possible only through rounding) is discarded.
    """
    if trace is None:
        trace = IterationTrace()
    Hb, F, Gb = (np.asarray(x) for x in (Hb, F, Gb))
    Q = np.asarray(Q0, dtype=complex)
    C = log_det_capacity(Hb + F @ scattering(Q) @ Gb.conj().T, noise_mw)
    history = [C]
    step = cfg.step_init
    for _ in range(cfg.max_mm):
        state = build_minorizer(Hb, F, Gb, scattering(Q), noise_mw)
        Q_new, _, info = maximize_surrogate(state, Gb, Q, cfg, trace, step=step)
        step = info["step"]
        C_new = log_det_capacity(Hb + F @ scattering(Q_new) @ Gb.conj().T, noise_mw)
        if C_new < C:
            trace.max_drop = max(trace.max_drop, C - C_new)
            break
        gain = C_new - C
        Q, C = Q_new, C_new
        history.append(C)
        if gain <= cfg.eps_capacity * C:
            break
    trace.mm_capacity.append(history)
    return BdRis(Q=Q), trace


def initial_factor(channels, noise_mw, total_power, init="best", cfg=OptimizerConfig(),
                   rng=None, diag=None, low_complexity=None):
    """
    Starting Takagi factor for :func:`maximize_capacity`.

    ``init`` is one of ``"best"``, ``"diag"``, ``"low_complexity"``,
    ``"identity"``, ``"random"``, or an explicit (m, m) unitary array.
    ``"best"`` keeps whichever of the diagonal-RIS and low-complexity
    solutions has the larger water-filling capacity (diagonal on ties).
    Precomputed baseline solutions may be passed to avoid recomputation.

    Returns ``(Q0, label)``.
    """
    from . import baselines

    m = channels.m
    if not isinstance(init, str):
        Q0 = np.asarray(init, dtype=complex)
        if Q0.shape != (m, m) or matkit.unitarity_residual(Q0) > 1e-8:
            raise ContractViolation("explicit initial factor must be an m x m unitary")
        return Q0, "explicit"
    if init not in INIT_STRATEGIES:
        raise ContractViolation(f"unknown init strategy {init!r}; pick from {INIT_STRATEGIES}")
    if init == "identity":
        return np.eye(m, dtype=complex), init
    if init == "random":
        if rng is None:
            rng = np.random.default_rng(channels.seed)
        return matkit.random_unitary(rng, m), init

    candidates = []
    if init in ("best", "diag"):
        if diag is None:
            diag = baselines.optimize_diag_ris(channels, noise_mw, total_power, cfg)[0]
        candidates.append(("diag", diag.as_bdris()))
    if init in ("best", "low_complexity"):
        if low_complexity is None:
            low_complexity = baselines.low_complexity_bdris(channels, noise_mw, total_power)[0]
        candidates.append(("low_complexity", low_complexity))
    best_label, best_ris, best_c = None, None, -np.inf
    for label, ris in candidates:
        H_eq = equivalent_channel(channels.H, channels.F, channels.G, ris.theta)
        c = capacity_nats(H_eq, optimize_covariance(H_eq, total_power, noise_mw), noise_mw)
        if c > best_c:
            best_label, best_ris, best_c = label, ris, c
    return best_ris.Q, best_label


def maximize_capacity(channels, noise_mw, total_power, init="best", cfg=OptimizerConfig(),
                      rng=None, diag=None, low_complexity=None):
    """
    Alternating maximization of the BD-RIS-assisted MIMO capacity.

    Alternates the water-filling covariance (scattering fixed) with
    :func:`optimize_scattering` (covariance fixed) until the relative
    capacity gain of a full alternation is below ``cfg.eps_capacity``.
    The capacity never decreases: block updates that would lower it
    through rounding are discarded.

    Returns
    -------
    ris : BdRis
    cov : TxCovariance
    trace : IterationTrace
    """
    H, F, G = channels.H, channels.F, channels.G
    Q, label = initial_factor(channels, noise_mw, total_power, init, cfg, rng, diag, low_complexity)
    trace = IterationTrace(init=label)

    t0 = time.perf_counter()
    H_eq = equivalent_channel(H, F, G, scattering(Q))
    cov = optimize_covariance(H_eq, total_power, noise_mw)
    C = capacity_nats(H_eq, cov, noise_mw)
    trace.timings["covariance"] += time.perf_counter() - t0
    trace.capacity.append(C)
    trace.outer_capacity.append(C)

    for _ in range(cfg.max_outer):
        C_start = C

        t0 = time.perf_counter()
        Hb, Gb = absorb_covariance(H, G, cov)
        ris, _ = optimize_scattering(Hb, F, Gb, Q, noise_mw, cfg, trace)
        H_eq_new = equivalent_channel(H, F, G, ris.theta)
        C_new = capacity_nats(H_eq_new, cov, noise_mw)
        trace.timings["scattering"] += time.perf_counter() - t0
        if C_new >= C:
            Q, H_eq, C = ris.Q, H_eq_new, C_new
            trace.capacity.append(C)
        else:
            trace.max_drop = max(trace.max_drop, C - C_new)

        t0 = time.perf_counter()
        cov_new = optimize_covariance(H_eq, total_power, noise_mw)
        C_new = capacity_nats(H_eq, cov_new, noise_mw)
        trace.timings["covariance"] += time.perf_counter() - t0
        if C_new >= C:
            cov, C = cov_new, C_new
            trace.capacity.append(C)
        else:
            trace.max_drop = max(trace.max_drop, C - C_new)

        trace.outer_capacity.append(C)
        if C - C_start <= cfg.eps_capacity * C_start:
            break
    return BdRis(Q=Q), cov, trace


def random_feasible_theta(rng, m):
    """Random symmetric unitary matrix ``U U^T`` with Haar ``U``."""
    return scattering(matkit.random_unitary(rng, m))
