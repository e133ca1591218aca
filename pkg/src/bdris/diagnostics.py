"""
Numerical self-checks of the optimizer building blocks on random instances.

Used by ``bdris gradcheck`` and by the test suite.
"""

from dataclasses import dataclass, field

import numpy as np

from . import matkit
from .optimizer import (
    build_minorizer,
    geodesic_step,
    random_feasible_theta,
    surrogate_gradient,
    surrogate_value,
    tangent_project,
)
from .rate import log_det_capacity, scattering

FD_STEP = 1e-6
TOLERANCES = {
    "gradient": 1e-5,
    "tangency": 1e-8,
    "lower_bound": 1e-8,
    "unitarity": 1e-10,
    "takagi": 1e-8,
}


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def random_instance(rng, m, n_t=2, n_r=2, noise_mw=None):
    """
    Random absorbed-covariance problem ``(Hb, F, Gb, theta_t, noise)``.

    ``d = min(n_t, n_r)`` streams; the noise level is drawn log-uniformly
    in [0.1, 10] unless given.
    """
    d = min(n_t, n_r)
    if noise_mw is None:
        noise_mw = float(10.0 ** rng.uniform(-1.0, 1.0))
    Hb = crandn(rng, n_r, d)
    F = crandn(rng, n_r, m)
    Gb = crandn(rng, d, m) / np.sqrt(m)
    return Hb, F, Gb, random_feasible_theta(rng, m), noise_mw


def random_skew(rng, m):
    k = crandn(rng, m, m)
    return 0.5 * (k - k.conj().T)


def fd_gradient_error(state, Gb, Q, direction, gradient=surrogate_gradient, h=FD_STEP):
    """
    Relative mismatch between a central difference of ``J`` along
    ``direction`` and the directional derivative ``2 Re tr(grad^H dQ)``.
    """
    fd = (surrogate_value(state, Gb, Q + h * direction)
          - surrogate_value(state, Gb, Q - h * direction)) / (2.0 * h)
    analytic = 2.0 * np.real(np.vdot(gradient(state, Gb, Q), direction))
    return abs(fd - analytic) / max(abs(analytic), 1e-300)


@dataclass
class Check:
    name: str
    max_error: float
    tol: float
    count: int

    @property
    def passed(self):
        return bool(self.max_error <= self.tol)


@dataclass
class GradcheckReport:
    seed: int
    sizes: tuple
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def text(self):
        lines = [f"gradcheck seed={self.seed} sizes={','.join(map(str, self.sizes))}"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"{status} {c.name:<12} max_err={c.max_error:.3e} tol={c.tol:.0e} n={c.count}")
        lines.append("ALL PASS" if self.passed else "FAILURES: " + ", ".join(
            c.name for c in self.checks if not c.passed))
        return "\n".join(lines) + "\n"


def gradcheck(seed=0, sizes=(2, 4, 8), instances=10, samples=20, corrupt_gradient=False):
    """
    Finite-difference, minorizer, unitarity and Takagi checks.

    ``corrupt_gradient`` flips the sign of the analytic gradient, which
    must make the gradient check fail.
    """
    rng = np.random.default_rng(seed)
    grad_fn = surrogate_gradient
    if corrupt_gradient:
        def grad_fn(state, Gb, Q):
            return -surrogate_gradient(state, Gb, Q)

    errs = {k: [] for k in TOLERANCES}
    for m in sizes:
        for _ in range(instances):
            Hb, F, Gb, theta_t, noise = random_instance(rng, m)
            state = build_minorizer(Hb, F, Gb, theta_t, noise)

            def cap(theta):
                return log_det_capacity(Hb + F @ theta @ Gb.conj().T, noise)

            errs["tangency"].append(
                abs(state.const + surrogate_value(state, Gb, _takagi_q(theta_t)) - cap(theta_t)))
            for _ in range(samples):
                theta = random_feasible_theta(rng, m)
                gap = state.const + surrogate_value(state, Gb, _takagi_q(theta)) - cap(theta)
                errs["lower_bound"].append(max(gap, 0.0))

            Q = matkit.random_unitary(rng, m)
            for _ in range(3):
                direction = Q @ random_skew(rng, m)
                errs["gradient"].append(fd_gradient_error(state, Gb, Q, direction, grad_fn))

            for _ in range(100):
                S = tangent_project(Q, surrogate_gradient(state, Gb, Q))
                Q = geodesic_step(Q, S / max(matkit.fro(S), 1e-300), -0.1)
            errs["unitarity"].append(matkit.unitarity_residual(Q))
            theta = scattering(Q)
            errs["takagi"].append(matkit.fro(scattering(_takagi_q(theta)) - theta))

    report = GradcheckReport(seed=seed, sizes=tuple(sizes))
    for name, tol in TOLERANCES.items():
        report.checks.append(Check(name, float(max(errs[name])), tol, len(errs[name])))
    return report


def _takagi_q(theta):
    q, _ = matkit.takagi(theta)
    return q
