import logging
from typing import Optional, Tuple

import pandas as pd
from pydantic import BaseModel, ConfigDict

from analysis.fusion import evaluate_configuration
from analysis.models import ChannelSpec
from simulation.montecarlo import run_simulation
from simulation.models import TrialConfig
from .config import ExperimentConfig, RunMode, SweepAxis
from .report import SWEEP_SCHEMA, write_csv_atomic

logger = logging.getLogger(__name__)

# simulated points further than this from the analytic value are logged
DISAGREEMENT_STD_ERRS = 4

SWEEP_COLUMNS = [
    "sweep_value", "rule", "analytic_p_e", "simulated_p_e", "std_err",
    "type_I", "type_II", "f_0", "f_1",
]


class SweepRow(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    sweep_value: float
    rule: str
    analytic_p_e: Optional[float] = None
    simulated_p_e: Optional[float] = None
    std_err: Optional[float] = None
    type_I: float
    type_II: float
    f_0: float
    f_1: float


class SweepResult(BaseModel):
    """One row per (sweep value, rule), ordered by sweep value"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: SweepAxis
    rows: Tuple[SweepRow, ...]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.model_dump() for row in self.rows], columns=SWEEP_COLUMNS)


def _revalidated(model, **changes):
    return type(model).model_validate({**model.model_dump(), **changes})


def config_at(base: TrialConfig, axis: SweepAxis, value: float) -> TrialConfig:
    """Base configuration with the swept parameter set to `value`"""
    if axis == SweepAxis.N:
        return _revalidated(base, sensor=_revalidated(base.sensor, n_sensors=int(value)))
    if axis == SweepAxis.M:
        return _revalidated(base, channel=ChannelSpec.uniform(base.channel.hop_probs[0], int(value)))
    if axis == SweepAxis.P:
        return _revalidated(base, channel=ChannelSpec.uniform(value, base.channel.hops))
    return _revalidated(base, x_th=value)


def _evaluate_point(config: TrialConfig, value: float, mode: RunMode, workers: int) -> list:
    reports = {}
    if mode in (RunMode.ANALYTIC, RunMode.BOTH):
        for report in evaluate_configuration(config.signal, config.x_th, config.sensor,
                                             config.channel, config.rules, config.convention):
            reports[report.rule.label] = report

    simulation = None
    if mode in (RunMode.SIMULATE, RunMode.BOTH):
        simulation = run_simulation(config, workers=workers)

    rows = []
    for r, rule in enumerate(config.rules):
        analytic = reports.get(rule.label)
        estimate = simulation.estimates[r] if simulation else None
        if analytic is not None and estimate is not None and estimate.std_err > 0 \
                and abs(estimate.p_e - analytic.p_e) > DISAGREEMENT_STD_ERRS * estimate.std_err:
            logger.warning(
                f"{rule.label} at {value:g}: simulated P_e={estimate.p_e:.6f} is more than "
                f"{DISAGREEMENT_STD_ERRS} standard errors from analytic P_e={analytic.p_e:.6f}"
            )
        if analytic is not None:
            type_i, type_ii, f_0, f_1 = analytic.type_I, analytic.type_II, analytic.f_0, analytic.f_1
        else:
            type_i, type_ii = estimate.type_I, estimate.type_II
            f_0, f_1 = simulation.eta_0 / simulation.eta, simulation.eta_1 / simulation.eta
        rows.append(SweepRow(
            sweep_value=value,
            rule=rule.label,
            analytic_p_e=analytic.p_e if analytic else None,
            simulated_p_e=estimate.p_e if estimate else None,
            std_err=estimate.std_err if estimate else None,
            type_I=type_i,
            type_II=type_ii,
            f_0=f_0,
            f_1=f_1,
        ))
    return rows


def run_experiment(config: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Evaluate every sweep point in the requested mode(s) and write the CSV if asked"""
    axis = config.sweep.axis
    logger.info(
        f"Running {config.mode.value} sweep over {axis.value} "
        f"({len(config.sweep.values)} points, rules={[rule.label for rule in config.base.rules]})"
    )

    rows = []
    for value in sorted(config.sweep.values):
        point = config_at(config.base, axis, value)
        logger.info(f"Sweep point {axis.value}={value:g}")
        rows.extend(_evaluate_point(point, value, config.mode, workers))

    result = SweepResult(axis=axis, rows=tuple(rows))
    if config.out is not None:
        write_csv_atomic(result.to_frame(), config.out, f"{SWEEP_SCHEMA} axis={axis.value}")
    logger.info(f"Sweep over {axis.value} finished with {len(rows)} rows")
    return result
