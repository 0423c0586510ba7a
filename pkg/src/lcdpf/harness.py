"""Scenario configuration, experiment execution, metrics and result files."""

import csv
import json
import math
import subprocess
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from lcdpf import __version__, _kernels
from lcdpf.gaussfilter import GaussianBelief, UtParams
from lcdpf.models import AcousticModel, MotionConfig, SensorConfig, propagate_truth, sense
from lcdpf.network import (
    build_topology,
    deploy_jittered_grid,
    is_connected,
    metropolis_weights,
)
from lcdpf.pf import (
    STREAM_DEPLOYMENT,
    STREAM_INIT,
    STREAM_MEASUREMENT,
    STREAM_PROPOSAL,
    STREAM_RESAMPLE,
    STREAM_TEMPORARY,
    STREAM_TRUTH,
    VARIANTS,
    FilterConfig,
    SensorFilterState,
    cpf_step,
    dpf_step,
    initialize,
    stream_rng,
)

STATE_DIM = 2

# communication totals of the two comparison methods, reported as reference
# constants only (those filters are not implemented here)
DPF1_NETWORK_TOTAL = 76875
DPF2_NETWORK_TOTAL = 1875


class ScenarioError(RuntimeError):
    pass


@dataclass
class ScenarioConfig:
    """Every scenario constant; defaults are desk-scale versions of the
    acoustic tracking setup (full scale: runs=1000, steps=200)."""

    k: int = 25
    region: float = 40.0
    comm_range: float = 18.0
    jitter_frac: float = 0.4
    amplitude: float = 10.0
    noise_var: float = 5e-5
    min_dist_sq: float = 1e-4
    filter_driving_var: float = 0.0528
    truth_driving_var: float = 0.0033
    rp: int = 6
    iterations: int = 15
    particles: int = 200
    steps: int = 50
    runs: int = 20
    variant: str = "lcdpf"
    prior_var: float = 1.0
    ut_kappa: float = 1.0
    seed: int = 0
    initial_speed: float = 0.2
    rejitter_per_run: bool = False

    def validate(self):
        if math.isqrt(self.k) ** 2 != self.k:
            raise ScenarioError(f"sensor count {self.k} is not a perfect square")
        if self.variant not in VARIANTS:
            raise ScenarioError(f"unknown variant {self.variant!r}")
        positive = (
            "region", "comm_range", "amplitude", "noise_var", "min_dist_sq",
            "filter_driving_var", "truth_driving_var", "prior_var",
            "iterations", "particles", "steps", "runs",
        )
        for name in positive:
            if getattr(self, name) <= 0:
                raise ScenarioError(f"{name} must be positive")
        if not 0 <= self.jitter_frac < 0.5:
            raise ScenarioError("jitter_frac must lie in [0, 0.5)")
        if self.rp < 0:
            raise ScenarioError("rp must be non-negative")

    def motion(self):
        return MotionConfig(
            truth_driving_cov=self.truth_driving_var * np.eye(2),
            filter_driving_cov=self.filter_driving_var * np.eye(2),
        )

    def sensor(self):
        return SensorConfig(
            amplitude=self.amplitude,
            noise_var=self.noise_var,
            min_dist_sq=self.min_dist_sq,
        )


def basis_size(rp, m=STATE_DIM):
    """Number of monomials of total degree <= rp in m variables."""
    return math.comb(rp + m, m)


def comm_budget(cfg):
    """(per-sensor per-step, network per-step) scalar transmission counts."""
    lc_payload = cfg.iterations * (basis_size(cfg.rp) - 1)
    adaptation = cfg.iterations * (STATE_DIM + STATE_DIM * (STATE_DIM + 1) // 2 + 1)
    if cfg.variant == "lcdpf":
        per_sensor = lc_payload + adaptation
    elif cfg.variant == "lcdpf-na":
        per_sensor = lc_payload
    else:  # cpf: fusion center, no inter-sensor consensus
        per_sensor = 0
    return per_sensor, cfg.k * per_sensor


@dataclass
class RunRecord:
    """Squared estimation errors on the full (run, step, sensor) grid."""

    err_sq: np.ndarray  # (runs, steps, K), meters^2
    degenerate_steps: int
    measured_network_scalars: int  # summed over all runs and steps


@dataclass
class MetricsSummary:
    variant: str
    runs: int
    steps: int
    k: int
    rmse_n: list
    armse: float
    per_sensor_scalars_per_step: int
    network_scalars_per_step: int
    measured_network_scalars_per_step: int
    degenerate_steps: int
    dpf1_network_total: int = DPF1_NETWORK_TOTAL
    dpf2_network_total: int = DPF2_NETWORK_TOTAL

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, doc):
        return cls(**doc)


def rmse_series(record):
    """RMSE_n: root of the squared error averaged over runs and sensors."""
    return np.sqrt(record.err_sq.mean(axis=(0, 2)))


def armse(series):
    """Root of the time-averaged squared RMSE_n."""
    series = np.asarray(series, dtype=float)
    if series.size == 0:
        raise ValueError("empty RMSE series")
    return float(np.sqrt(np.mean(series**2)))


def per_run_armse(record):
    """ARMSE computed separately for each Monte Carlo run."""
    return np.sqrt(record.err_sq.mean(axis=(1, 2)))


def deployment_positions(cfg, run=0):
    """Sensor positions; fixed per master seed unless rejitter_per_run."""
    key = run if cfg.rejitter_per_run else 0
    rng = stream_rng(cfg.seed, key, STREAM_DEPLOYMENT)
    return deploy_jittered_grid(cfg.k, cfg.region, cfg.jitter_frac, rng)


def simulate_truth_and_measurements(cfg, positions, run):
    """Ground-truth trajectory and all sensor measurements for one run.

    The streams are keyed only by (seed, run), so every filter variant
    consumes identical truth and measurement data.
    Returns truth (steps, 4) for n = 1..steps and measurements (steps, K).
    """
    truth_rng = stream_rng(cfg.seed, run, STREAM_TRUTH)
    meas_rng = stream_rng(cfg.seed, run, STREAM_MEASUREMENT)
    motion = cfg.motion()
    sensor = cfg.sensor()
    lo = cfg.region * 0.25
    hi = cfg.region * 0.75
    start = truth_rng.uniform(lo, hi, size=2)
    tau = np.concatenate([start, [cfg.initial_speed, cfg.initial_speed]])
    truth = np.empty((cfg.steps, 4))
    measurements = np.empty((cfg.steps, cfg.k))
    state = tau
    for n in range(cfg.steps):
        state = propagate_truth(state, motion, truth_rng)
        truth[n] = state
        for s in range(cfg.k):
            measurements[n, s] = sense(state[:2], positions[s], sensor, meas_rng)
    return tau, truth, measurements


def _filter_config(cfg, positions):
    return FilterConfig(
        motion=cfg.motion(),
        model=AcousticModel(cfg.sensor()),
        sites=positions,
        variant=cfg.variant,
        basis_degree=cfg.rp,
        iterations=cfg.iterations,
        ut=UtParams(kappa=cfg.ut_kappa),
        region_lo=np.zeros(2),
        region_hi=np.full(2, cfg.region),
    )


def _make_state(index, prior, cfg, run):
    rngs = {
        purpose: stream_rng(cfg.seed, run, purpose)
        for purpose in (STREAM_RESAMPLE, STREAM_TEMPORARY, STREAM_PROPOSAL)
    }
    particles = initialize(
        prior, cfg.particles, stream_rng(cfg.seed, run, STREAM_INIT)
    )
    return SensorFilterState(index=index, particles=particles, rngs=rngs)


def run_scenario(cfg):
    """Execute `runs` independent Monte Carlo runs of the configured filter."""
    cfg.validate()
    err_sq = np.zeros((cfg.runs, cfg.steps, cfg.k))
    degenerate = 0
    measured_scalars = 0
    for run in range(cfg.runs):
        positions = deployment_positions(cfg, run)
        topology = build_topology(positions, cfg.comm_range)
        if not is_connected(topology):
            raise ScenarioError(
                f"disconnected topology for seed {cfg.seed} "
                f"(deployment run {run if cfg.rejitter_per_run else 0})"
            )
        weights = metropolis_weights(topology)
        tau0, truth, measurements = simulate_truth_and_measurements(
            cfg, positions, run
        )
        prior = GaussianBelief(mean=tau0[:2], cov=cfg.prior_var * np.eye(2))
        filter_cfg = _filter_config(cfg, positions)
        if cfg.variant == "cpf":
            state = _make_state(0, prior, cfg, run)
            for n in range(cfg.steps):
                est, report = cpf_step(state, measurements[n], filter_cfg)
                err_sq[run, n, :] = np.sum((est - truth[n, :2]) ** 2)
                degenerate += report.degenerate_sensors
        else:
            states = [_make_state(s, prior, cfg, run) for s in range(cfg.k)]
            for n in range(cfg.steps):
                ests, report = dpf_step(states, measurements[n], weights, filter_cfg)
                err_sq[run, n, :] = np.sum((ests - truth[n, :2]) ** 2, axis=1)
                degenerate += report.degenerate_sensors
                measured_scalars += cfg.k * report.scalars_per_sensor
    record = RunRecord(
        err_sq=err_sq,
        degenerate_steps=degenerate,
        measured_network_scalars=measured_scalars,
    )
    series = rmse_series(record)
    per_sensor, network = comm_budget(cfg)
    summary = MetricsSummary(
        variant=cfg.variant,
        runs=cfg.runs,
        steps=cfg.steps,
        k=cfg.k,
        rmse_n=[float(v) for v in series],
        armse=armse(series),
        per_sensor_scalars_per_step=per_sensor,
        network_scalars_per_step=network,
        measured_network_scalars_per_step=(
            measured_scalars // (cfg.runs * cfg.steps) if cfg.variant != "cpf" else 0
        ),
        degenerate_steps=degenerate,
    )
    return record, summary


def version_string():
    try:
        described = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            check=True,
        ).stdout.strip()
        return f"{__version__}+{described}"
    except (OSError, subprocess.CalledProcessError):
        return __version__


def config_fields():
    return {f.name: f.type for f in fields(ScenarioConfig)}


_COERCERS = {int: int, float: float, str: str}


def _coerce(name, raw, typ):
    if typ is bool or typ == "bool":
        lowered = raw.lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
        raise ScenarioError(f"invalid boolean for {name}: {raw!r}")
    for pytype, conv in _COERCERS.items():
        if typ is pytype or typ == pytype.__name__:
            try:
                return conv(raw)
            except ValueError as exc:
                raise ScenarioError(f"invalid value for {name}: {raw!r}") from exc
    raise ScenarioError(f"unsupported config field type for {name}")


def load_config(path):
    """Parse a flat `key = value` config file into a ScenarioConfig.

    Keys are the ScenarioConfig field names; unknown keys are errors.
    """
    known = config_fields()
    kwargs = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        key, sep, value = stripped.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ScenarioError(f"{path}:{lineno}: expected 'key = value'")
        if key not in known:
            raise ScenarioError(f"{path}:{lineno}: unknown config key {key!r}")
        kwargs[key] = _coerce(key, value.strip(), known[key])
    return ScenarioConfig(**kwargs)


def save_config(cfg, path):
    lines = [f"{name} = {value}" for name, value in asdict(cfg).items()]
    Path(path).write_text("\n".join(lines) + "\n")


def summary_document(cfg, summary):
    return {
        "config": asdict(cfg),
        "metrics": summary.to_dict(),
        "kernel_backend": _kernels.BACKEND,
        "version": version_string(),
    }


def write_results(out_dir, cfg, record, summary, rmse_csv=True):
    """Emit results.csv, summary.json and (optionally) rmse_series.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "results.csv").open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["variant", "run", "n", "sensor", "err_sq"])
        runs, steps, k = record.err_sq.shape
        for run in range(runs):
            for n in range(steps):
                for s in range(k):
                    writer.writerow(
                        [cfg.variant, run, n + 1, s, repr(record.err_sq[run, n, s])]
                    )
    (out / "summary.json").write_text(
        json.dumps(summary_document(cfg, summary), indent=2, sort_keys=True) + "\n"
    )
    if rmse_csv:
        with (out / "rmse_series.csv").open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "rmse"])
            for n, value in enumerate(summary.rmse_n, start=1):
                writer.writerow([n, repr(value)])


def read_summary(path):
    doc = json.loads(Path(path).read_text())
    return MetricsSummary.from_dict(doc["metrics"])
