import math
from enum import Enum
from typing import Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator


class SignalKind(str, Enum):
    THREE_HARMONIC = "THREE_HARMONIC"
    TABULATED = "TABULATED"


class RuleKind(str, Enum):
    OR = "OR"
    AND = "AND"
    K_OUT_OF_N = "K_OUT_OF_N"
    MAJORITY = "MAJORITY"


class GrowthPolicy(str, Enum):
    """How K evolves with N when taking the N -> infinity limit of K-OUT-OF-N"""
    FIXED = "FIXED"
    PROPORTIONAL = "PROPORTIONAL"


class SignalSpec(BaseModel):
    """Deterministic monitored signal x(t) sampled at t_n = n * tau.

    THREE_HARMONIC is sin(12 pi t/eta) + cos(20 pi t/eta) + sin(26 pi t/eta) + 3,
    TABULATED carries its own sample values.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: SignalKind = SignalKind.THREE_HARMONIC
    eta: int = Field(ge=1)
    tau: float = Field(default=1.0, gt=0)
    samples: Optional[Tuple[float, ...]] = None

    @model_validator(mode="after")
    def _check_samples(self):
        if self.kind == SignalKind.TABULATED:
            if self.samples is None:
                raise ValueError("TABULATED signals need their sample values")
            if len(self.samples) != self.eta:
                raise ValueError(
                    f"TABULATED signal has {len(self.samples)} samples but eta={self.eta}"
                )
        elif self.samples is not None:
            raise ValueError(f"{self.kind.value} signals are generated, samples must not be given")
        return self


class QuantizationConvention(BaseModel):
    """Bit S assigned to the event x(t_n) <= x_th"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    s_label: int = Field(default=0, ge=0, le=1)

    @property
    def complement(self) -> int:
        return 1 - self.s_label


class SensorModel(BaseModel):
    """Additive Gaussian observation noise shared by N i.i.d. sensors"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    mu: float = 0.0
    sigma2: float = Field(default=1.0, gt=0)
    n_sensors: int = Field(default=3, ge=1)

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)


class ChannelSpec(BaseModel):
    """Cascade of M independent binary symmetric channels, hop flip probabilities in order"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    hop_probs: Tuple[float, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_probs(self):
        for j, p in enumerate(self.hop_probs, start=1):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"hop {j} flip probability {p} is outside [0, 1]")
        return self

    @property
    def hops(self) -> int:
        return len(self.hop_probs)

    @classmethod
    def uniform(cls, p: float, hops: int) -> "ChannelSpec":
        return cls(hop_probs=(p,) * hops)


class FusionRule(BaseModel):
    """Memoryless Boolean decision function applied by the fusion center"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: RuleKind
    k: Optional[int] = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _check_k(self):
        if self.kind == RuleKind.K_OUT_OF_N and self.k is None:
            raise ValueError("K_OUT_OF_N needs K")
        if self.kind != RuleKind.K_OUT_OF_N and self.k is not None:
            raise ValueError(f"{self.kind.value} does not take K")
        return self

    @classmethod
    def parse(cls, text: str) -> "FusionRule":
        """Parse 'or', 'and', 'majority' or 'kofn:K'"""
        token = text.strip().lower()
        if token == "or":
            return cls(kind=RuleKind.OR)
        if token == "and":
            return cls(kind=RuleKind.AND)
        if token in ("majority", "maj"):
            return cls(kind=RuleKind.MAJORITY)
        if token.startswith("kofn:"):
            k_text = token.split(":", 1)[1]
            if not k_text.isdigit():
                raise ValueError(f"Invalid K in rule '{text}'")
            return cls(kind=RuleKind.K_OUT_OF_N, k=int(k_text))
        raise ValueError(f"Unknown fusion rule '{text}' (expected or, and, majority or kofn:K)")

    @property
    def label(self) -> str:
        if self.kind == RuleKind.K_OUT_OF_N:
            return f"KOFN:{self.k}"
        return self.kind.value


class ErrorReport(BaseModel):
    """Average decision error probability of one rule and configuration.

    type_I averages the per-sample error over the theta=0 samples (false positive),
    type_II over the theta=1 samples (false negative), so p_e = f_0*type_I + f_1*type_II.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    rule: FusionRule
    p_e: float = Field(ge=0.0, le=1.0)
    type_I: float = Field(ge=0.0, le=1.0)
    type_II: float = Field(ge=0.0, le=1.0)
    f_0: float = Field(ge=0.0, le=1.0)
    f_1: float = Field(ge=0.0, le=1.0)
    convention: QuantizationConvention
    n_sensors: int
