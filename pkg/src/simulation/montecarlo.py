import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from typing import Optional, Tuple

import numpy as np

from analysis.errors import ConfigurationError, TraceSizeError
from analysis.fusion import decide_counts, decision_errors
from analysis.models import ChannelSpec
from analysis.signal import quantize, sample_signal
from .models import ChannelTrace, RuleEstimate, SimulationResult, TrialConfig

logger = logging.getLogger(__name__)

DEFAULT_TRACE_LIMIT = 2_000_000


@dataclass(frozen=True)
class _TrialDraws:
    """Everything one trial draws: observations, hop lattice and tie coins"""
    lattice: np.ndarray
    coin: np.ndarray

    @property
    def received(self) -> np.ndarray:
        return self.lattice[:, -1, :]


def _sensor_stream(seed: int, trial: int, sensor: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial, 0, sensor))))


def _coin_stream(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(trial, 1, 0))))


def _draw_trial(config: TrialConfig, values: np.ndarray, trial: int) -> _TrialDraws:
    """Sensing draw and per-hop flips for every sensor, from the trial's own substreams"""
    sensor = config.sensor
    hop_probs = np.asarray(config.channel.hop_probs)[:, None]
    s_label = config.convention.s_label
    eta = len(values)

    lattice = np.empty((sensor.n_sensors, config.channel.hops + 1, eta), dtype=np.int8)
    for i in range(sensor.n_sensors):
        rng = _sensor_stream(config.seed, trial, i)
        observed = values + sensor.mu + sensor.sigma * rng.standard_normal(eta)
        lattice[i, 0] = np.where(observed <= config.x_th, s_label, 1 - s_label)
        flips = rng.random((config.channel.hops, eta)) < hop_probs
        lattice[i, 1:] = lattice[i, 0] ^ (np.cumsum(flips, axis=0) % 2).astype(np.int8)

    coin = _coin_stream(config.seed, trial).integers(0, 2, size=eta, dtype=np.int8)
    return _TrialDraws(lattice=lattice, coin=coin)


def _count_trial_errors(config: TrialConfig, values: np.ndarray, theta: np.ndarray, trial: int) -> np.ndarray:
    """Decision errors of every rule in one pass, split by true state: shape (rules, 2)"""
    draws = _draw_trial(config, values, trial)
    ones = draws.received.sum(axis=0, dtype=np.int64)
    counts = np.zeros((len(config.rules), 2), dtype=np.int64)
    # every rule sees the same received vectors
    for r, rule in enumerate(config.rules):
        errors = decision_errors(rule, ones, theta, config.sensor.n_sensors, draws.coin)
        counts[r, 0] = np.count_nonzero(errors & (theta == 0))
        counts[r, 1] = np.count_nonzero(errors & (theta == 1))
    return counts


def _validate(config: TrialConfig) -> None:
    for rule in config.rules:
        if rule.k is not None and not 1 <= rule.k <= config.sensor.n_sensors:
            raise ConfigurationError(f"K={rule.k} is out of range for N={config.sensor.n_sensors} sensors")


def run_simulation(config: TrialConfig, workers: Optional[int] = None) -> SimulationResult:
    """Empirical error rates over `trials` passes of the sample grid.

    Trials are independent and merged by integer summation, so the result only
    depends on (config, seed) and not on the number of workers.
    """
    _validate(config)
    signal = sample_signal(config.signal)
    states = quantize(signal, config.x_th, config.convention)
    theta = states.theta
    eta = states.eta
    eta_0, eta_1 = states.counts

    workers = workers or 1
    logger.info(
        f"Simulating {config.trials} trials x {eta} samples (N={config.sensor.n_sensors}, "
        f"M={config.channel.hops}, seed={config.seed}, workers={workers})"
    )

    task = partial(_count_trial_errors, config, signal.values, theta)
    totals = np.zeros((len(config.rules), 2), dtype=np.int64)
    if workers == 1:
        for trial in range(config.trials):
            totals += task(trial)
    else:
        chunk = max(1, config.trials // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for counts in pool.map(task, range(config.trials), chunksize=chunk):
                totals += counts

    total_samples = config.trials * eta
    estimates = []
    for r, rule in enumerate(config.rules):
        e0, e1 = int(totals[r, 0]), int(totals[r, 1])
        p_e = (e0 + e1) / total_samples
        estimates.append(RuleEstimate(
            rule=rule,
            p_e=p_e,
            type_I=e0 / (config.trials * eta_0) if eta_0 else 0.0,
            type_II=e1 / (config.trials * eta_1) if eta_1 else 0.0,
            std_err=math.sqrt(p_e * (1.0 - p_e) / total_samples),
            errors_0=e0,
            errors_1=e1,
        ))
        logger.debug(f"{rule.label}: simulated P_e={p_e:.6f}")

    return SimulationResult(
        estimates=tuple(estimates),
        seed=config.seed,
        trials=config.trials,
        eta=eta,
        eta_0=eta_0,
        eta_1=eta_1,
    )


def capture_trace(config: TrialConfig, sample_range: Tuple[int, int],
                  limit: int = DEFAULT_TRACE_LIMIT) -> ChannelTrace:
    """Hop-by-hop states of the first trial over samples [start, stop).

    Besides each rule's decisions the trace carries the error indicators that
    run_simulation counts; for K-OUT-OF-N with K != ceil(N/2) these follow the error
    event rather than decisions != theta.
    """
    _validate(config)
    start, stop = sample_range
    eta = config.signal.eta
    if not 0 <= start < stop <= eta:
        raise ConfigurationError(f"Trace window [{start}, {stop}) is not inside [0, {eta})")

    cells = config.sensor.n_sensors * (config.channel.hops + 1) * (stop - start)
    if cells > limit:
        raise TraceSizeError(f"Trace window needs {cells} cells, above the limit of {limit}")

    signal = sample_signal(config.signal)
    states = quantize(signal, config.x_th, config.convention)
    draws = _draw_trial(config, signal.values, trial=0)

    window = slice(start, stop)
    ones = draws.received[:, window].sum(axis=0, dtype=np.int64)
    theta = states.theta[window]
    coin = draws.coin[window]
    n_sensors = config.sensor.n_sensors
    decisions = {rule.label: decide_counts(rule, ones, n_sensors, coin) for rule in config.rules}
    # same scoring as run_simulation
    errors = {rule.label: decision_errors(rule, ones, theta, n_sensors, coin) for rule in config.rules}
    logger.info(f"Captured trace for samples [{start}, {stop}) ({cells} cells)")
    return ChannelTrace(
        start=start,
        lattice=draws.lattice[:, :, window].copy(),
        theta=theta.copy(),
        decisions=decisions,
        errors=errors,
    )


def empirical_flip_rate(spec: ChannelSpec, n_bits: int, seed: int = 0) -> Tuple[float, float]:
    """Fraction of bits flipped end to end by the cascade, with its standard error"""
    if n_bits < 1:
        raise ConfigurationError(f"n_bits must be at least 1 (got {n_bits})")
    rng = np.random.default_rng(seed)
    parity = np.zeros(n_bits, dtype=np.int8)
    for p in spec.hop_probs:
        parity ^= (rng.random(n_bits) < p).astype(np.int8)
    rate = float(parity.mean())
    return rate, math.sqrt(rate * (1.0 - rate) / n_bits)
