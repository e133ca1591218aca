"""
Monte Carlo sweeps.

A reduced position sweep and power sweep. The command line tool runs the
full versions, e.g. ``bdris sweep-pos --profile desk --out pos.csv``.
"""

from bdris import experiments

cfg = experiments.profile_config("desk", "ris_x")
cfg = cfg.with_(trials=3, scenario=cfg.scenario.with_(m=8))
text, _, _ = experiments.sweep_position(cfg)
print(text)

cfg = experiments.for_kind(cfg, "tx_power_dbm").with_(methods=("bdris", "diag_ris", "no_ris"))
text, _, _ = experiments.sweep_power(cfg)
print(text)
