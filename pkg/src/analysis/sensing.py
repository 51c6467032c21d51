import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .errors import ConfigurationError
from .models import SensorModel
from .signal import SampledSignal

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SensingProbabilities:
    """Per-sample probabilities that one sensor observes x_i(t_n) <= x_th or > x_th"""
    p_below: np.ndarray
    p_above: np.ndarray

    def __len__(self) -> int:
        return len(self.p_below)


def observe_probability_below(x, x_th: float, model: SensorModel):
    """P(x + noise <= x_th) for Gaussian noise N(mu, sigma^2).

    Accepts a scalar or an array of signal values; the result is the same for
    every sensor since observation noise is i.i.d.
    """
    z = (x_th - np.asarray(x, dtype=float) - model.mu) / (model.sigma * math.sqrt(2.0))
    p = 0.5 * (1.0 + erf(z))
    if np.ndim(p) == 0:
        return float(p)
    return p


def sensing_profile(signal: SampledSignal, x_th: float, model: SensorModel) -> SensingProbabilities:
    if len(signal) == 0:
        raise ConfigurationError("Cannot compute a sensing profile for an empty signal")

    p_below = observe_probability_below(signal.values, x_th, model)
    p_below = np.clip(p_below, 0.0, 1.0)
    logger.debug(
        f"Sensing profile at x_th={x_th} (mu={model.mu}, sigma2={model.sigma2}): "
        f"mean P(below)={p_below.mean():.4f}"
    )
    return SensingProbabilities(p_below=p_below, p_above=1.0 - p_below)
