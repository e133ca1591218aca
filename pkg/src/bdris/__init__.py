"""Capacity maximization of MIMO links assisted by a fully connected BD-RIS."""

from .baselines import (
    DiagRis,
    low_complexity_bdris,
    no_ris_capacity,
    optimize_diag_ris,
    random_diag,
)
from .channel import ChannelSet, Scenario, build_channels
from .errors import ConfigError, ContractViolation, DecompositionError, NumericFailure
from .optimizer import (
    IterationTrace,
    MinorizerState,
    OptimizerConfig,
    maximize_capacity,
    optimize_scattering,
)
from .rate import BdRis, TxCovariance, capacity_nats, equivalent_channel, nats_to_bps_hz

__version__ = "0.1.0"
