"""
Monte Carlo experiment harness: RIS-position, element-count and
transmit-power sweeps with per-method averaging and CSV output.

Configuration files are INI style (``configparser``)::

    [scenario]
    n_t = 2
    n_r = 2
    m = 16
    ris_pos = 50, 5, 5

    [sweep]
    kind = ris_x
    values = 10, 30, 50, 70, 90

    [experiment]
    trials = 20
    base_seed = 0
    methods = bdris, diag_ris, low_complexity, random_diag, no_ris
    init = best
    phase_draws = 64

    [optimizer]
    eps_capacity = 1e-4

Every trial draws its channels with ``seed = base_seed + trial`` and all
methods see the same realization. The random-phase baseline reports its
rate averaged over ``phase_draws`` phase vectors (each with four
quarter-turn rotations) on that realization.
"""

import configparser
import csv
import io
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import baselines
from .channel import Scenario, build_channels, dbm_to_mw
from .errors import ConfigError
from .optimizer import INIT_STRATEGIES, OptimizerConfig, maximize_capacity
from .rate import active_streams, nats_to_bps_hz

METHODS = ("bdris", "diag_ris", "low_complexity", "random_diag", "no_ris")
SWEEP_KINDS = ("ris_x", "m_elements", "tx_power_dbm")
SWEEP_COLUMNS = {"ris_x": "ris_x_m", "m_elements": "m_elements", "tx_power_dbm": "tx_power_dbm"}
WORKERS_ENV = "BDRIS_WORKERS"

PROFILES = {
    "desk": {"n_t": 2, "n_r": 2, "m": 16, "trials": 20},
    "full": {"n_t": 4, "n_r": 4, "m": 100, "trials": 100},
}
DEFAULT_SWEEPS = {
    "ris_x": [10.0, 30.0, 50.0, 70.0, 90.0],
    "m_elements": [4, 8, 16],
    "tx_power_dbm": [4.0, 20.0, 30.0],
}
FULL_SWEEPS = {
    "ris_x": [float(x) for x in range(10, 101, 10)],
    "m_elements": list(range(10, 101, 10)),
    "tx_power_dbm": [4.0, 10.0, 15.0, 20.0, 25.0, 30.0],
}


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario = field(default_factory=Scenario)
    sweep_kind: str = "ris_x"
    sweep_values: tuple = tuple(DEFAULT_SWEEPS["ris_x"])
    trials: int = 20
    base_seed: int = 0
    methods: tuple = METHODS
    init: str = "best"
    phase_draws: int = 64
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)

    def __post_init__(self):
        if self.sweep_kind not in SWEEP_KINDS:
            raise ConfigError(f"unknown sweep kind {self.sweep_kind!r}; pick from {SWEEP_KINDS}")
        if len(self.sweep_values) == 0:
            raise ConfigError("sweep value list is empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        unknown = set(self.methods) - set(METHODS)
        if unknown or not self.methods:
            raise ConfigError(f"unknown or empty methods {sorted(unknown)}; pick from {METHODS}")
        if self.phase_draws < 1:
            raise ConfigError("phase_draws must be >= 1")
        if self.init not in INIT_STRATEGIES:
            raise ConfigError(f"unknown init {self.init!r}")

    def with_(self, **changes):
        return replace(self, **changes)

    def scenario_at(self, value):
        """Scenario for one sweep point."""
        sc = self.scenario
        if self.sweep_kind == "ris_x":
            return sc.with_(ris_pos=(float(value), 5.0, 5.0))
        if self.sweep_kind == "m_elements":
            return sc.with_(m=int(value), ris_pos=(50.0, 5.0, 5.0))
        return sc.with_(tx_power_mw=float(dbm_to_mw(value)))


@dataclass(frozen=True)
class ResultRecord:
    method: str
    sweep_value: float
    trial: int
    seed: int
    rate_bps_hz: float
    active_streams: float
    outer_iterations: int
    wall_ms: float = 0.0
    error: str = ""


def _split(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _coerce(value, like, key):
    try:
        if isinstance(like, tuple):
            return tuple(float(v) for v in _split(value))
        if isinstance(like, bool):
            return value.strip().lower() in ("1", "true", "yes", "on")
        if isinstance(like, int):
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key!r}: {value!r}") from exc


def profile_config(profile="desk", sweep_kind="ris_x"):
    """Default configuration of the ``desk`` or ``full`` profile for one sweep kind."""
    if profile not in PROFILES:
        raise ConfigError(f"unknown profile {profile!r}; pick from {sorted(PROFILES)}")
    prof = PROFILES[profile]
    sweeps = DEFAULT_SWEEPS if profile == "desk" else FULL_SWEEPS
    scenario = Scenario(n_t=prof["n_t"], n_r=prof["n_r"], m=prof["m"])
    return ExperimentConfig(scenario=scenario, sweep_kind=sweep_kind,
                            sweep_values=tuple(sweeps[sweep_kind]), trials=prof["trials"])


def parse_config(text, base=None):
    """Parse INI text on top of ``base`` (defaults to the desk profile)."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config: {exc}") from exc
    cfg = base if base is not None else profile_config("desk")

    known = {"scenario", "sweep", "experiment", "optimizer"}
    extra = set(parser.sections()) - known
    if extra:
        raise ConfigError(f"unknown config sections {sorted(extra)}")

    def section(name, obj):
        if not parser.has_section(name):
            return {}
        names = {f.name for f in fields(obj)}
        out = {}
        for key, value in parser.items(name):
            if key not in names:
                raise ConfigError(f"unknown key {key!r} in [{name}]")
            out[key] = _coerce(value, getattr(obj, key), key)
        return out

    try:
        scenario = cfg.scenario.with_(**section("scenario", cfg.scenario))
        optimizer = replace(cfg.optimizer, **section("optimizer", cfg.optimizer))
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc

    changes = {"scenario": scenario, "optimizer": optimizer}
    if parser.has_section("sweep"):
        sw = dict(parser.items("sweep"))
        if set(sw) - {"kind", "values"}:
            raise ConfigError(f"unknown keys in [sweep]: {sorted(set(sw) - {'kind', 'values'})}")
        if "kind" in sw:
            changes["sweep_kind"] = sw["kind"].strip()
            if changes["sweep_kind"] in DEFAULT_SWEEPS and "values" not in sw:
                changes["sweep_values"] = tuple(DEFAULT_SWEEPS[changes["sweep_kind"]])
        if "values" in sw:
            changes["sweep_values"] = _coerce(sw["values"], (), "values")
    if parser.has_section("experiment"):
        for key, value in parser.items("experiment"):
            if key in ("trials", "base_seed", "phase_draws"):
                changes[key] = _coerce(value, 0, key)
            elif key == "methods":
                changes[key] = tuple(_split(value))
            elif key == "init":
                changes[key] = value.strip()
            else:
                raise ConfigError(f"unknown key {key!r} in [experiment]")
    try:
        return cfg.with_(**changes)
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path, base=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text, base)


def run_single(config, sweep_value, trial):
    """
    Run every configured method on one channel realization.

    Returns one :class:`ResultRecord` per method, in ``config.methods``
    order. A method that raises yields a record with ``error`` set and a
    NaN rate; the other methods still run.
    """
    scenario = config.scenario_at(sweep_value)
    seed = int(config.base_seed) + int(trial)
    channels = build_channels(scenario, seed)
    noise, power = scenario.noise_mw, scenario.tx_power_mw
    cfg = config.optimizer
    cache = {}

    def diag():
        if "diag" not in cache:
            cache["diag"] = baselines.optimize_diag_ris(channels, noise, power, cfg)
        return cache["diag"]

    def low():
        if "low" not in cache:
            cache["low"] = baselines.low_complexity_bdris(channels, noise, power)
        return cache["low"]

    def run(method):
        if method == "no_ris":
            c, cov = baselines.fixed_ris_capacity(
                channels, np.zeros((channels.m, channels.m), dtype=complex), noise, power)
            return c, active_streams(cov.p, power), 0
        if method == "random_diag":
            c, streams = baselines.random_diag_capacity(
                channels, np.random.default_rng([seed, 1]), noise, power,
                draws=config.phase_draws)
            return c, streams, 0
        if method == "low_complexity":
            ris, _ = low()
            c, cov = baselines.fixed_ris_capacity(channels, ris.theta, noise, power)
            return c, active_streams(cov.p, power), 0
        if method == "diag_ris":
            ris, cov, trace = diag()
            return trace.outer_capacity[-1], active_streams(cov.p, power), trace.outer_iterations
        kwargs = {}
        if config.init in ("best", "diag"):
            kwargs["diag"] = diag()[0]
        if config.init in ("best", "low_complexity"):
            kwargs["low_complexity"] = low()[0]
        ris, cov, trace = maximize_capacity(
            channels, noise, power, config.init, cfg,
            rng=np.random.default_rng([seed, 2]), **kwargs)
        return trace.outer_capacity[-1], active_streams(cov.p, power), trace.outer_iterations

    records = []
    for method in config.methods:
        t0 = time.perf_counter()
        try:
            c, streams, iters = run(method)
            rec = ResultRecord(method, float(sweep_value), int(trial), seed,
                               float(nats_to_bps_hz(c)), float(streams), int(iters))
        except Exception as exc:  # noqa: BLE001 - recorded, the sweep goes on
            rec = ResultRecord(method, float(sweep_value), int(trial), seed, float("nan"), 0, 0,
                               error=f"{type(exc).__name__}: {exc}")
        records.append(replace(rec, wall_ms=1e3 * (time.perf_counter() - t0)))
    return records


def _run_task(args):
    config, value, trial = args
    return run_single(config, value, trial)


def worker_count():
    raw = os.environ.get(WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ConfigError(f"{WORKERS_ENV} must be an integer, got {raw!r}") from exc


def run_trials(config, workers=None):
    """All records of a sweep, ordered by (sweep value, trial, method)."""
    tasks = [(config, v, t) for v in config.sweep_values for t in range(config.trials)]
    workers = worker_count() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_run_task, tasks))
    else:
        chunks = [_run_task(t) for t in tasks]
    return [rec for chunk in chunks for rec in chunk]


def aggregate(config, records):
    """
    Per (sweep value, method) mean and population standard deviation of
    the rate, plus mean active streams. Error records are excluded and
    reduce the ``trials`` count.
    """
    rows = []
    for value in config.sweep_values:
        for method in config.methods:
            good = [r for r in records
                    if r.method == method and r.sweep_value == float(value) and not r.error]
            rates = np.array([r.rate_bps_hz for r in good], dtype=float)
            streams = np.array([r.active_streams for r in good], dtype=float)
            n = len(good)
            rows.append({
                "method": method,
                "sweep_value": float(value),
                "mean_rate_bps_hz": float(np.mean(rates)) if n else float("nan"),
                "std_rate": float(np.std(rates)) if n else float("nan"),
                "mean_active_streams": float(np.mean(streams)) if n else float("nan"),
                "trials": n,
            })
    return rows


def _fmt(x):
    if isinstance(x, float):
        return repr(x)
    return str(x)


def sweep_csv(config, rows):
    """Aggregated CSV text; the power sweep adds ``mean_active_streams``."""
    header = ["method", SWEEP_COLUMNS[config.sweep_kind], "mean_rate_bps_hz", "std_rate"]
    keys = ["method", "sweep_value", "mean_rate_bps_hz", "std_rate"]
    if config.sweep_kind == "tx_power_dbm":
        header.append("mean_active_streams")
        keys.append("mean_active_streams")
    header.append("trials")
    keys.append("trials")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(row[k]) for k in keys])
    return buf.getvalue()


def records_csv(records, timing=False):
    """Per-trial dump; wall-clock time only when ``timing`` (it breaks byte determinism)."""
    cols = [f.name for f in fields(ResultRecord) if timing or f.name != "wall_ms"]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cols)
    for rec in records:
        writer.writerow([_fmt(getattr(rec, c)) for c in cols])
    return buf.getvalue()


def run_sweep(config, workers=None):
    """Run a sweep; returns ``(csv_text, rows, records)``."""
    records = run_trials(config, workers)
    rows = aggregate(config, records)
    return sweep_csv(config, rows), rows, records


def for_kind(config, kind):
    """``config`` retargeted to sweep ``kind``; a kind change resets the values to its defaults."""
    if config.sweep_kind == kind:
        return config
    return config.with_(sweep_kind=kind, sweep_values=tuple(DEFAULT_SWEEPS[kind]))


def sweep_position(config, workers=None):
    """RIS moved along (x, 5, 5)."""
    return run_sweep(for_kind(config, "ris_x"), workers)


def sweep_elements(config, workers=None):
    """RIS element count varied with the RIS at (50, 5, 5)."""
    return run_sweep(for_kind(config, "m_elements"), workers)


def sweep_power(config, workers=None):
    """Transmit power varied (dBm)."""
    return run_sweep(for_kind(config, "tx_power_dbm"), workers)


def write_text(path, text):
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc}") from exc
