"""Local particle filters: distributed variants and the centralized baseline.

Variants:
  lcdpf     consensus-fused adapted Gaussian proposal + likelihood consensus
  lcdpf-na  no proposal adaptation: draws from the transition model,
            weights from likelihood consensus alone
  cpf       centralized reference: exact joint likelihood, proposal adapted
            by sequential UT updates over all measurements
"""

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from lcdpf import _kernels
from lcdpf.gaussfilter import UtParams, unscented_update
from lcdpf.lc import clamp_log_jlf, likelihood_consensus
from lcdpf.models import MotionConfig, sample_transition, transition_logpdf
from lcdpf.polybasis import MonomialBasis
from lcdpf.proposal import (
    fuse_pseudoposteriors,
    local_pseudoposterior,
    predicted_moments,
)

VARIANTS = ("lcdpf", "lcdpf-na", "cpf")

WEIGHT_NORM_TOL = 1e-10

# named random streams; every sensor instantiates identical per-purpose
# generators so that symmetric inputs yield identical local filters
STREAM_TRUTH = 0
STREAM_MEASUREMENT = 1
STREAM_DEPLOYMENT = 2
STREAM_INIT = 3
STREAM_RESAMPLE = 4
STREAM_TEMPORARY = 5
STREAM_PROPOSAL = 6


def stream_rng(seed, run, purpose):
    """Deterministic named substream of the master seed."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(run, purpose)))


@dataclass
class ParticleSet:
    """Particles with normalized log-weights (logsumexp == 0)."""

    particles: np.ndarray  # (J, M)
    log_weights: np.ndarray  # (J,)

    def __post_init__(self):
        self.particles = np.asarray(self.particles, dtype=float)
        self.log_weights = np.asarray(self.log_weights, dtype=float)
        if self.log_weights.shape != (self.particles.shape[0],):
            raise ValueError("one log-weight per particle required")
        if abs(logsumexp(self.log_weights)) > WEIGHT_NORM_TOL:
            raise ValueError("log-weights are not normalized")

    @property
    def count(self):
        return self.particles.shape[0]


@dataclass
class FilterConfig:
    """Everything the per-step recursion needs besides particles and rng."""

    motion: MotionConfig
    model: object  # measurement model: predict / loglik / sample / noise_var
    sites: np.ndarray  # (K, 2)
    variant: str
    basis_degree: int
    iterations: int
    ut: UtParams
    region_lo: np.ndarray  # whitening box for the no-adaptation basis
    region_hi: np.ndarray

    def __post_init__(self):
        self.sites = np.asarray(self.sites, dtype=float)
        self.region_lo = np.asarray(self.region_lo, dtype=float)
        self.region_hi = np.asarray(self.region_hi, dtype=float)
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")

    @property
    def n_sensors(self):
        return self.sites.shape[0]


@dataclass
class SensorFilterState:
    """Per-sensor filter state plus its named random streams."""

    index: int
    particles: ParticleSet
    rngs: dict
    degenerate_steps: int = 0


@dataclass
class StepReport:
    """Communication and diagnostics for one time step."""

    lc_scalars_per_sensor: int = 0
    adaptation_scalars_per_sensor: int = 0
    degenerate_sensors: int = 0

    @property
    def scalars_per_sensor(self):
        return self.lc_scalars_per_sensor + self.adaptation_scalars_per_sensor


def initialize(prior, j, rng):
    """J prior draws with uniform weights."""
    if j < 1:
        raise ValueError("need at least one particle")
    return ParticleSet(
        particles=prior.sample(j, rng),
        log_weights=np.full(j, -np.log(j)),
    )


def resample_systematic(ps, rng):
    """Systematic resampling; returns the resampled particle array."""
    offset = rng.uniform(0.0, 1.0)
    idx = _kernels.systematic_resample_indices(np.exp(ps.log_weights), offset)
    return ps.particles[idx]


def estimate(ps):
    """Weighted particle mean (the MMSE estimate approximation)."""
    return np.exp(ps.log_weights) @ ps.particles


def _normalize_log_weights(raw):
    """Log-sum-exp normalization with a degenerate-collapse fallback."""
    raw = np.where(np.isnan(raw), -np.inf, raw)
    total = logsumexp(raw)
    if not np.isfinite(total):
        return np.full(raw.shape, -np.log(raw.shape[0])), True
    return raw - total, False


def dpf_step(states, measurements, consensus_weights, cfg):
    """One synchronous time step of all K local filters.

    Returns (per-sensor estimates (K, M), StepReport).  `states` is
    updated in place.
    """
    if cfg.variant not in ("lcdpf", "lcdpf-na"):
        raise ValueError("dpf_step handles the distributed variants only")
    k = cfg.n_sensors
    report = StepReport()

    resampled = []
    predicted = []
    for state in states:
        bar = resample_systematic(state.particles, state.rngs[STREAM_RESAMPLE])
        temp = sample_transition(bar, cfg.motion, state.rngs[STREAM_TEMPORARY])
        resampled.append(bar)
        predicted.append((temp, predicted_moments(temp)))

    if cfg.variant == "lcdpf":
        pseudo = [
            local_pseudoposterior(
                pred,
                measurements[state.index],
                k,
                lambda pts, s=state.index: cfg.model.predict(pts, cfg.sites[s]),
                cfg.model.noise_var,
                cfg.ut,
            )
            for state, (_, pred) in zip(states, predicted)
        ]
        proposals, fuse_report = fuse_pseudoposteriors(
            consensus_weights, pseudo, cfg.iterations, k
        )
        report.adaptation_scalars_per_sensor = fuse_report.scalars_sent_per_sensor
        draws = [
            q.sample(state.particles.count, state.rngs[STREAM_PROPOSAL])
            for state, q in zip(states, proposals)
        ]
        bases = [MonomialBasis.from_belief(cfg.basis_degree, q) for q in proposals]
    else:
        # no adaptation: the transition draws double as the proposal draws
        proposals = None
        draws = [temp for temp, _ in predicted]
        shared = MonomialBasis.from_region(cfg.basis_degree, cfg.region_lo, cfg.region_hi)
        bases = [shared] * k

    # design matrices are shared between the coefficient fit and the
    # weight evaluation below
    design = [basis.design_matrix(x) for basis, x in zip(bases, draws)]
    alphas = np.stack(
        [
            np.linalg.lstsq(
                phi,
                cfg.model.loglik(measurements[state.index], x, cfg.sites[state.index]),
                rcond=None,
            )[0]
            for state, phi, x in zip(states, design, draws)
        ]
    )
    summed, lc_report = likelihood_consensus(
        consensus_weights, alphas, cfg.iterations, k
    )
    report.lc_scalars_per_sensor = lc_report.scalars_sent_per_sensor

    estimates = np.empty((k, draws[0].shape[1]))
    for state, bar, phi, x, a in zip(states, resampled, design, draws, summed):
        log_jlf_vals = clamp_log_jlf(phi @ a)
        if cfg.variant == "lcdpf":
            raw = (
                log_jlf_vals
                + transition_logpdf(x, bar, cfg.motion)
                - proposals[state.index].logpdf(x)
            )
        else:
            raw = log_jlf_vals
        log_w, degenerate = _normalize_log_weights(raw)
        if degenerate:
            state.degenerate_steps += 1
            report.degenerate_sensors += 1
        state.particles = ParticleSet(particles=x, log_weights=log_w)
        estimates[state.index] = estimate(state.particles)
    return estimates, report


def cpf_step(state, measurements, cfg):
    """One time step of the centralized baseline on a single cloud.

    The proposal is adapted by sequential UT updates over all K
    measurements (no covariance inflation, no consensus); weights use the
    exact joint log-likelihood.
    """
    k = cfg.n_sensors
    bar = resample_systematic(state.particles, state.rngs[STREAM_RESAMPLE])
    temp = sample_transition(bar, cfg.motion, state.rngs[STREAM_TEMPORARY])
    belief = predicted_moments(temp)
    for s in range(k):
        belief = unscented_update(
            belief,
            measurements[s],
            lambda pts, site=s: cfg.model.predict(pts, cfg.sites[site]),
            cfg.model.noise_var,
            cfg.ut,
        )
    draws = belief.sample(state.particles.count, state.rngs[STREAM_PROPOSAL])
    log_jlf_exact = np.zeros(draws.shape[0])
    for s in range(k):
        log_jlf_exact += cfg.model.loglik(measurements[s], draws, cfg.sites[s])
    raw = (
        clamp_log_jlf(log_jlf_exact)
        + transition_logpdf(draws, bar, cfg.motion)
        - belief.logpdf(draws)
    )
    log_w, degenerate = _normalize_log_weights(raw)
    if degenerate:
        state.degenerate_steps += 1
    state.particles = ParticleSet(particles=draws, log_weights=log_w)
    report = StepReport(degenerate_sensors=int(degenerate))
    return estimate(state.particles), report
