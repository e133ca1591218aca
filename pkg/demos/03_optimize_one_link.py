"""
Optimizing the scattering matrix of one link.

Runs the alternating maximization on a desk-scale realization, checks that
the result is a symmetric unitary matrix and compares it with the
baselines on the same channels.
"""

import numpy as np

from bdris import matkit
from bdris.baselines import (
    fixed_ris_capacity,
    low_complexity_bdris,
    no_ris_capacity,
    optimize_diag_ris,
    random_diag_capacity,
)
from bdris.channel import Scenario, build_channels
from bdris.optimizer import maximize_capacity
from bdris.rate import nats_to_bps_hz

sc = Scenario()
ch = build_channels(sc, seed=3)
noise, power = sc.noise_mw, sc.tx_power_mw

ris, cov, trace = maximize_capacity(ch, noise, power)
theta = ris.theta
print(f"start from {trace.init!r}: {trace.outer_iterations} alternations, "
      f"{trace.geodesic_steps} geodesic steps")
print(f"unitarity residual {matkit.unitarity_residual(theta):.1e}, "
      f"exactly symmetric: {np.array_equal(theta, theta.T)}")

# the capacity only ever goes up
print("capacity per alternation (b/s/Hz):",
      np.round(nats_to_bps_hz(np.array(trace.outer_capacity)), 4))

rates = {
    "bd-ris": trace.outer_capacity[-1],
    "diagonal ris": optimize_diag_ris(ch, noise, power)[2].outer_capacity[-1],
    "low complexity": fixed_ris_capacity(ch, low_complexity_bdris(ch, noise, power)[0].theta,
                                         noise, power)[0],
    "random phases": random_diag_capacity(ch, np.random.default_rng(0), noise, power)[0],
    "no ris": no_ris_capacity(ch, noise, power),
}
for name, c in rates.items():
    print(f"{name:15s} {nats_to_bps_hz(c):7.3f} b/s/Hz")
