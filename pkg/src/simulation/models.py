from dataclasses import dataclass, field
from typing import Dict, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from analysis.models import ChannelSpec, FusionRule, QuantizationConvention, SensorModel, SignalSpec

DEFAULT_TRIALS = 100


class TrialConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    signal: SignalSpec
    x_th: float
    convention: QuantizationConvention = QuantizationConvention()
    sensor: SensorModel = SensorModel()
    channel: ChannelSpec
    rules: Tuple[FusionRule, ...] = Field(min_length=1)
    trials: int = Field(default=DEFAULT_TRIALS, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)


class RuleEstimate(BaseModel):
    """Empirical error rates of one rule; std_err is the binomial standard error of p_e"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    rule: FusionRule
    p_e: float = Field(ge=0.0, le=1.0)
    type_I: float = Field(ge=0.0, le=1.0)
    type_II: float = Field(ge=0.0, le=1.0)
    std_err: float = Field(ge=0.0)
    errors_0: int = Field(ge=0)
    errors_1: int = Field(ge=0)


class SimulationResult(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    estimates: Tuple[RuleEstimate, ...]
    seed: int
    trials: int
    eta: int
    eta_0: int
    eta_1: int

    def for_rule(self, rule: FusionRule) -> RuleEstimate:
        for estimate in self.estimates:
            if estimate.rule == rule:
                return estimate
        raise KeyError(f"Rule {rule.label} was not simulated")


@dataclass(frozen=True)
class ChannelTrace:
    """States S_{i,j}[n] of every sensor along its hops for a window of samples.

    lattice has shape (N, M+1, window); level 0 is y_i[n], level M is s_i[n].
    decisions holds each rule's fused bit; errors holds the indicator the simulator
    counts, which for K-OUT-OF-N with K != ceil(N/2) is the error event (at least K
    bits disagree with theta) and can differ from decisions != theta.
    """
    start: int
    lattice: np.ndarray
    theta: np.ndarray
    decisions: Dict[str, np.ndarray] = field(default_factory=dict)
    errors: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def window(self) -> range:
        return range(self.start, self.start + self.lattice.shape[2])

    @property
    def received(self) -> np.ndarray:
        return self.lattice[:, -1, :]

    def to_frame(self) -> pd.DataFrame:
        """Long table with columns n, i, j, S (sensors numbered from 1)"""
        n_sensors, levels, width = self.lattice.shape
        i, j, n = np.meshgrid(
            np.arange(1, n_sensors + 1), np.arange(levels), np.arange(width), indexing="ij"
        )
        df = pd.DataFrame({
            "n": (n + self.start).ravel(),
            "i": i.ravel(),
            "j": j.ravel(),
            "S": self.lattice.ravel().astype(int),
        })
        return df.sort_values(["n", "i", "j"], kind="stable").reset_index(drop=True)
