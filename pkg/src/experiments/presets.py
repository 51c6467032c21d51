import logging
from pathlib import Path
from typing import Optional

import pandas as pd

from analysis.errors import ConfigurationError
from analysis.fusion import evaluate_configuration
from analysis.models import ChannelSpec, FusionRule, SensorModel, SignalSpec
from simulation.montecarlo import run_simulation
from simulation.models import TrialConfig
from .config import ExperimentConfig, RunMode, Sweep, SweepAxis
from .report import TABLE_SCHEMA, write_csv_atomic

logger = logging.getLogger(__name__)

SNAPSHOT_ETA = 300
FIGURE_ETA = 10_000
TABLE_SIMULATION_TRIALS = 10

DEFAULT_RULES = (
    FusionRule.parse("or"),
    FusionRule.parse("and"),
    FusionRule.parse("majority"),
)

# x_th of the sensor-count figures; their N grid is not stated, 1..41 is used
SENSOR_SWEEP_THRESHOLDS = {4: 4.5, 5: 5.5, 6: 3.0, 7: 1.5}
SENSOR_SWEEP = tuple(float(n) for n in range(1, 42))
HOP_SWEEP = tuple(float(m) for m in range(1, 11))
FLIP_SWEEP = tuple(round(0.05 * i, 2) for i in range(11))

FIGURES = (4, 5, 6, 7, 8, 9)


def snapshot_config(eta: int = SNAPSHOT_ETA, trials: int = 1, seed: int = 0) -> TrialConfig:
    """Three sensors, one hop with p_1 = 0.1, x_th = 4.5, mu = 0, sigma^2 = 1, S = 0"""
    return TrialConfig(
        signal=SignalSpec(eta=eta),
        x_th=4.5,
        sensor=SensorModel(mu=0.0, sigma2=1.0, n_sensors=3),
        channel=ChannelSpec(hop_probs=(0.1,)),
        rules=DEFAULT_RULES,
        trials=trials,
        seed=seed,
    )


def table2(seed: int = 0, workers: int = 1, out: Optional[Path] = None) -> pd.DataFrame:
    """Analytic P_e on the 300-sample snapshot and on a 10^4 grid, next to a single
    simulated snapshot and a 10^5-sample simulation."""
    analytic_snapshot = evaluate_configuration(**_analytic_args(snapshot_config()))
    analytic_dense = evaluate_configuration(**_analytic_args(snapshot_config(eta=FIGURE_ETA)))
    sim_snapshot = run_simulation(snapshot_config(seed=seed), workers=workers)
    sim_dense = run_simulation(
        snapshot_config(eta=FIGURE_ETA, trials=TABLE_SIMULATION_TRIALS, seed=seed), workers=workers
    )

    rows = []
    for r, rule in enumerate(DEFAULT_RULES):
        rows.append({
            "rule": rule.label,
            "analytic_eta_300": analytic_snapshot[r].p_e,
            "analytic_eta_10000": analytic_dense[r].p_e,
            "simulated_eta_300": sim_snapshot.estimates[r].p_e,
            "std_err_eta_300": sim_snapshot.estimates[r].std_err,
            "simulated_100000_samples": sim_dense.estimates[r].p_e,
            "std_err_100000_samples": sim_dense.estimates[r].std_err,
        })
    df = pd.DataFrame(rows)

    if out is not None:
        write_csv_atomic(df, out, f"{TABLE_SCHEMA} seed={seed}")
    return df


def _analytic_args(config: TrialConfig) -> dict:
    return {
        "signal_spec": config.signal,
        "x_th": config.x_th,
        "sensor": config.sensor,
        "channel": config.channel,
        "rules": config.rules,
        "convention": config.convention,
    }


def figure_config(number: int, mode: RunMode = RunMode.ANALYTIC, trials: int = 100,
                  seed: int = 0, out: Optional[Path] = None) -> ExperimentConfig:
    """Sweep behind one of the figures: 4-7 sweep N, 8 sweeps M, 9 sweeps p_1"""
    if number not in FIGURES:
        raise ConfigurationError(f"Unknown figure {number} (expected one of {FIGURES})")

    x_th = SENSOR_SWEEP_THRESHOLDS.get(number, 4.5)
    base = snapshot_config(eta=FIGURE_ETA, trials=trials, seed=seed)
    base = TrialConfig.model_validate({**base.model_dump(), "x_th": x_th})

    if number in SENSOR_SWEEP_THRESHOLDS:
        sweep = Sweep(axis=SweepAxis.N, values=SENSOR_SWEEP)
    elif number == 8:
        sweep = Sweep(axis=SweepAxis.M, values=HOP_SWEEP)
    else:
        sweep = Sweep(axis=SweepAxis.P, values=FLIP_SWEEP)

    logger.debug(f"Figure {number}: x_th={x_th}, sweep over {sweep.axis.value}")
    return ExperimentConfig(base=base, sweep=sweep, mode=mode, out=out)
