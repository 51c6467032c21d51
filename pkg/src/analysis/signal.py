import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
import pandas as pd

from .errors import ConfigurationError
from .models import QuantizationConvention, SignalKind, SignalSpec

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SampledSignal:
    """Samples x(t_0)..x(t_{eta-1}) of a SignalSpec"""
    values: np.ndarray
    grid: SignalSpec

    def __len__(self) -> int:
        return len(self.values)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.grid.eta) * self.grid.tau


@dataclass(frozen=True)
class StateSeries:
    """True system states theta[n] and the partition they induce.

    below/above refer to x(t_n) <= x_th and x(t_n) > x_th; the convention decides
    which of them is labelled 0.
    """
    theta: np.ndarray
    below: np.ndarray
    convention: QuantizationConvention

    @property
    def eta(self) -> int:
        return len(self.theta)

    @property
    def below_indices(self) -> np.ndarray:
        return np.flatnonzero(self.below)

    @property
    def above_indices(self) -> np.ndarray:
        return np.flatnonzero(~self.below)

    def index_set(self, state: int) -> np.ndarray:
        """Indices of the samples whose true state is `state`"""
        return np.flatnonzero(self.theta == state)

    def count(self, state: int) -> int:
        return int(np.count_nonzero(self.theta == state))

    def frequency(self, state: int) -> float:
        return self.count(state) / self.eta

    @property
    def counts(self) -> tuple:
        return self.count(0), self.count(1)

    @property
    def frequencies(self) -> tuple:
        return self.frequency(0), self.frequency(1)

    def for_convention(self, convention: QuantizationConvention) -> "StateSeries":
        """Same partition, relabelled under another convention"""
        return _label(self.below, convention)


def _label(below: np.ndarray, convention: QuantizationConvention) -> StateSeries:
    theta = np.where(below, convention.s_label, convention.complement).astype(np.int8)
    return StateSeries(theta=theta, below=below, convention=convention)


def sample_signal(spec: SignalSpec) -> SampledSignal:
    """Evaluate the signal on t_n = n * tau for n = 0..eta-1"""
    if spec.eta < 1 or spec.tau <= 0:
        raise ConfigurationError(f"Invalid sampling grid eta={spec.eta}, tau={spec.tau}")

    if spec.kind == SignalKind.TABULATED:
        values = np.asarray(spec.samples, dtype=float)
    else:
        # harmonic arguments are normalized by this grid's eta
        t = np.arange(spec.eta) * spec.tau
        eta = spec.eta
        values = (
            np.sin(12 * np.pi * t / eta)
            + np.cos(20 * np.pi * t / eta)
            + np.sin(26 * np.pi * t / eta)
            + 3
        )

    logger.debug(f"Sampled {spec.kind.value} signal: eta={spec.eta}, min={values.min():.4f}, max={values.max():.4f}")
    return SampledSignal(values=values, grid=spec)


def load_tabulated_signal(path: Union[str, Path], tau: float = 1.0) -> SignalSpec:
    """Read a plain-text file of one real per line into a TABULATED SignalSpec"""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Signal file not found: {path}")

    try:
        df = pd.read_csv(path, header=None, index_col=False, comment="#", skip_blank_lines=True)
    except pd.errors.EmptyDataError:
        raise ConfigurationError(f"Signal file {path} is empty")
    except (ValueError, pd.errors.ParserError) as e:
        raise ConfigurationError(f"Signal file {path} must hold one real per line: {e}") from e

    if df.shape[1] != 1:
        raise ConfigurationError(
            f"Signal file {path} must hold one real per line (found {df.shape[1]} fields per line)"
        )
    try:
        values = pd.to_numeric(df.iloc[:, 0], errors="raise")
    except ValueError as e:
        raise ConfigurationError(f"Signal file {path} must hold one real per line: {e}") from e

    if values.empty:
        raise ConfigurationError(f"Signal file {path} is empty")

    logger.info(f"Loaded {len(values)} samples from {path}")
    return SignalSpec(
        kind=SignalKind.TABULATED,
        eta=len(values),
        tau=tau,
        samples=tuple(float(v) for v in values),
    )


def quantize(signal: SampledSignal, x_th: float,
             convention: QuantizationConvention = QuantizationConvention()) -> StateSeries:
    """theta[n] = S iff x(t_n) <= x_th (ties go to S), else the complement"""
    if len(signal) == 0:
        raise ConfigurationError("Cannot quantize an empty signal")

    states = _label(np.asarray(signal.values) <= x_th, convention)
    eta_s = int(np.count_nonzero(states.below))
    logger.debug(f"Quantized at x_th={x_th}: eta_S={eta_s}, eta_S_bar={states.eta - eta_s}")
    return states


def average_over(values: Union[Sequence[float], np.ndarray], index_set: Iterable[int]) -> float:
    """Arithmetic mean of `values` restricted to `index_set`.

    The empty set averages to 0: its state has frequency 0, so the term it feeds
    vanishes from the error probability.
    """
    values = np.asarray(values, dtype=float)
    idx = np.fromiter(index_set, dtype=np.int64) if not isinstance(index_set, np.ndarray) \
        else index_set.astype(np.int64)

    if idx.size == 0:
        logger.debug("Average over an empty index set (degenerate partition) taken as 0")
        return 0.0
    if idx.min() < 0 or idx.max() >= len(values):
        raise ConfigurationError(
            f"Index set out of range for {len(values)} values (min={idx.min()}, max={idx.max()})"
        )
    return float(np.mean(values[idx]))
