"""
Water-filling over the eigenmodes of a fixed channel.

Power goes to the strongest modes first; weak modes switch on as the
budget grows.
"""

import numpy as np

from bdris.rate import active_streams, nats_to_bps_hz, water_fill, water_filling_capacity

gains = np.array([4.0, 1.0, 0.25])
for P in (0.1, 1.0, 10.0):
    p = water_fill(gains, P, 1.0)
    print(f"P = {P:5.1f}  allocation {np.round(p, 4)}  active {active_streams(p, P)}")

rng = np.random.default_rng(0)
H = (rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))) / np.sqrt(2)
for snr_db in (0, 10, 20):
    c, cov = water_filling_capacity(H, 10 ** (snr_db / 10), 1.0)
    print(f"SNR {snr_db:2d} dB  capacity {nats_to_bps_hz(c):6.3f} b/s/Hz  streams {active_streams(cov.p, cov.total_power)}")
