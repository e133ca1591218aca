"""
Channels of the indoor link.

Builds one realization of the direct, transmitter-to-RIS and RIS-to-receiver
channels and shows how the path loss sets their scale.
"""

import numpy as np

from bdris.channel import Scenario, build_channels, distance, path_loss_db

sc = Scenario()
print("scenario:", sc)
print(f"noise power {10 * np.log10(sc.noise_mw):.2f} dBm")

ch = build_channels(sc, seed=0)
print("shapes  H", ch.H.shape, " G", ch.G.shape, " F", ch.F.shape)

# the same seed gives the same realization
assert build_channels(sc, seed=0) == ch

# average gain per entry against the path-loss model
for name, mat in (("H", ch.H), ("G", ch.G), ("F", ch.F)):
    print(f"{name}: mean |entry|^2 = {10 * np.log10(np.mean(np.abs(mat) ** 2)):7.2f} dB")

print("direct distance", round(distance(sc.tx_pos, sc.rx_pos), 2), "m,",
      "path loss", round(path_loss_db(distance(sc.tx_pos, sc.rx_pos), sc.alpha_direct), 2), "dB")
