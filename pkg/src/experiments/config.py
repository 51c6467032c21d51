import logging
from enum import Enum
from pathlib import Path
from typing import Dict, Mapping, Optional, Tuple, Union

from dotenv import dotenv_values
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from analysis.errors import ConfigurationError
from analysis.models import (
    ChannelSpec,
    FusionRule,
    QuantizationConvention,
    RuleKind,
    SensorModel,
    SignalKind,
    SignalSpec,
)
from analysis.signal import load_tabulated_signal
from simulation.models import DEFAULT_TRIALS, TrialConfig

logger = logging.getLogger(__name__)


class RunMode(str, Enum):
    ANALYTIC = "analytic"
    SIMULATE = "simulate"
    BOTH = "both"


class SweepAxis(str, Enum):
    N = "N"
    M = "M"
    P = "p"
    X_TH = "x_th"


class Sweep(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: SweepAxis
    values: Tuple[float, ...] = Field(min_length=1)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    base: TrialConfig
    sweep: Sweep
    mode: RunMode = RunMode.ANALYTIC
    out: Optional[Path] = None


# Documented defaults: the single-hop, three-sensor configuration at x_th = 4.5
DEFAULTS: Dict[str, str] = {
    "signal": "three_harmonic",
    "signal_file": "",
    "eta": "10000",
    "tau": "1",
    "x_th": "4.5",
    "convention": "0",
    "mu": "0",
    "sigma2": "1",
    "n_sensors": "3",
    "hop_probs": "0.1",
    "rules": "or,and,majority",
    "trials": str(DEFAULT_TRIALS),
    "seed": "0",
    "mode": RunMode.ANALYTIC.value,
    "sweep": "",
    "out": "",
}

CONFIG_KEYS = frozenset(DEFAULTS)

_AXIS_ALIASES = {"n": SweepAxis.N, "m": SweepAxis.M, "p": SweepAxis.P, "x_th": SweepAxis.X_TH}


def _split_list(text: str) -> list:
    return [item.strip() for item in text.split(",") if item.strip()]


def _number(key: str, text: str, cast=float):
    try:
        value = cast(text)
    except (TypeError, ValueError):
        raise ConfigurationError(f"Invalid value for '{key}': '{text}'")
    return value


def parse_sweep(text: str) -> Sweep:
    """Parse 'AXIS=start:step:stop' (stop inclusive) or 'AXIS=v1,v2,...'"""
    if "=" not in text:
        raise ConfigurationError(f"Sweep must look like AXIS=values (got '{text}')")
    axis_text, values_text = (part.strip() for part in text.split("=", 1))
    axis = _AXIS_ALIASES.get(axis_text.lower())
    if axis is None:
        raise ConfigurationError(f"Unknown sweep axis '{axis_text}' (expected N, M, p or x_th)")

    if ":" in values_text:
        parts = values_text.split(":")
        if len(parts) != 3:
            raise ConfigurationError(f"Range sweep must be start:step:stop (got '{values_text}')")
        start, step, stop = (_number("sweep", part) for part in parts)
        if step <= 0 or stop < start:
            raise ConfigurationError(f"Empty or descending sweep range '{values_text}'")
        count = int(round((stop - start) / step)) + 1
        values = [round(start + i * step, 12) for i in range(count)]
        values = [v for v in values if v <= stop + 1e-12]
    else:
        values = [_number("sweep", item) for item in _split_list(values_text)]

    if not values:
        raise ConfigurationError(f"Sweep '{text}' has no values")
    if axis in (SweepAxis.N, SweepAxis.M) and any(not float(v).is_integer() or v < 1 for v in values):
        raise ConfigurationError(f"Sweep over {axis.value} needs positive integers (got {values})")
    return Sweep(axis=axis, values=tuple(sorted(set(values))))


def _build(values: Mapping[str, str]) -> ExperimentConfig:
    signal_kind = values["signal"].strip().lower()
    tau = _number("tau", values["tau"])
    if signal_kind in ("three_harmonic", "builtin"):
        signal = SignalSpec(kind=SignalKind.THREE_HARMONIC, eta=_number("eta", values["eta"], int), tau=tau)
    elif signal_kind == "tabulated":
        if not values["signal_file"]:
            raise ConfigurationError("signal = tabulated needs signal_file")
        signal = load_tabulated_signal(values["signal_file"], tau=tau)
    else:
        raise ConfigurationError(f"Unknown signal '{values['signal']}' (expected three_harmonic or tabulated)")

    try:
        rules = tuple(FusionRule.parse(item) for item in _split_list(values["rules"]))
    except ValueError as e:
        raise ConfigurationError(str(e))

    n_sensors = _number("n_sensors", values["n_sensors"], int)
    base = TrialConfig(
        signal=signal,
        x_th=_number("x_th", values["x_th"]),
        convention=QuantizationConvention(s_label=_number("convention", values["convention"], int)),
        sensor=SensorModel(
            mu=_number("mu", values["mu"]),
            sigma2=_number("sigma2", values["sigma2"]),
            n_sensors=n_sensors,
        ),
        channel=ChannelSpec(hop_probs=tuple(_number("hop_probs", p) for p in _split_list(values["hop_probs"]))),
        rules=rules,
        trials=_number("trials", values["trials"], int),
        seed=_number("seed", values["seed"], int),
    )

    sweep = parse_sweep(values["sweep"]) if values["sweep"] else Sweep(axis=SweepAxis.N, values=(n_sensors,))
    smallest_n = int(min(sweep.values)) if sweep.axis == SweepAxis.N else n_sensors
    for rule in rules:
        if rule.kind == RuleKind.K_OUT_OF_N and rule.k > smallest_n:
            raise ConfigurationError(f"Rule {rule.label} needs K <= N, but the run reaches N={smallest_n}")

    try:
        mode = RunMode(values["mode"].strip().lower())
    except ValueError:
        raise ConfigurationError(f"Unknown mode '{values['mode']}' (expected analytic, simulate or both)")

    return ExperimentConfig(
        base=base,
        sweep=sweep,
        mode=mode,
        out=Path(values["out"]) if values["out"] else None,
    )


def _check_keys(source: str, keys) -> None:
    unknown = sorted(set(keys) - CONFIG_KEYS)
    if unknown:
        raise ConfigurationError(f"Unknown configuration key(s) in {source}: {', '.join(unknown)}")


def parse_config(path: Optional[Union[str, Path]] = None,
                 overrides: Optional[Mapping[str, Optional[str]]] = None) -> ExperimentConfig:
    """Build an ExperimentConfig from defaults, a key = value file and flag overrides.

    Precedence is flags > file > defaults. Unknown keys are rejected by name.
    """
    values = dict(DEFAULTS)

    if path is not None:
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        file_values = {key.strip().lower(): value for key, value in dotenv_values(path).items()}
        _check_keys(str(path), file_values)
        missing = [key for key, value in file_values.items() if value is None]
        if missing:
            raise ConfigurationError(f"Keys without a value in {path}: {', '.join(missing)}")
        values.update({key: value.strip() for key, value in file_values.items()})
        logger.info(f"Loaded {len(file_values)} configuration keys from {path}")

    if overrides:
        given = {key: str(value) for key, value in overrides.items() if value is not None}
        _check_keys("flags", given)
        values.update(given)

    try:
        return _build(values)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid configuration: {e}") from e
