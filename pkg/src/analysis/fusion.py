import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Union

import numpy as np
from scipy.special import gammaln, xlog1py, xlogy

from .channel import flip_probability
from .errors import ConfigurationError
from .models import (
    ChannelSpec,
    ErrorReport,
    FusionRule,
    GrowthPolicy,
    QuantizationConvention,
    RuleKind,
    SensorModel,
    SignalSpec,
)
from .sensing import SensingProbabilities, sensing_profile
from .signal import StateSeries, average_over, quantize, sample_signal

logger = logging.getLogger(__name__)

# exact integer binomials up to here, log-gamma accumulation above
LOG_SPACE_THRESHOLD = 60

TieCoin = Union[np.random.Generator, Callable[[], int]]


@dataclass(frozen=True)
class MismatchThresholds:
    """Minimum number of mismatching sensors that makes the decision wrong.

    at_zero applies when theta[n] = 0, at_one when theta[n] = 1. With split_tie the
    exact N/2 split is resolved by a fair coin and counts as half an error.
    """
    at_zero: int
    at_one: int
    split_tie: bool = False

    def for_state(self, state: int) -> int:
        return self.at_zero if state == 0 else self.at_one


@dataclass(frozen=True)
class PerSampleMismatch:
    """Probability that one sensor's bit reaching the fusion center differs from theta[n]"""
    q: np.ndarray
    below: np.ndarray

    @property
    def q_S(self) -> np.ndarray:
        """P_{S,S_bar}[n] over the samples with x(t_n) <= x_th"""
        return self.q[self.below]

    @property
    def q_S_bar(self) -> np.ndarray:
        """P_{S_bar,S}[n] over the samples with x(t_n) > x_th"""
        return self.q[~self.below]


def _check_rule(rule: FusionRule, n_sensors: int) -> None:
    if n_sensors < 1:
        raise ConfigurationError(f"Number of sensors must be at least 1 (got {n_sensors})")
    if rule.kind == RuleKind.K_OUT_OF_N and not 1 <= rule.k <= n_sensors:
        raise ConfigurationError(f"K={rule.k} is out of range for N={n_sensors} sensors")


def mismatch_thresholds(rule: FusionRule, n_sensors: int) -> MismatchThresholds:
    """Error events of each rule expressed as 'at least K of N sensors mismatch'.

    OR errs on theta=0 as soon as one bit is wrong (1-OUT-OF-N) and on theta=1 only
    when all are (N-OUT-OF-N); AND is the mirror image. K-OUT-OF-N and MAJORITY
    use the same K for both states.
    """
    _check_rule(rule, n_sensors)
    n = n_sensors
    if rule.kind == RuleKind.OR:
        return MismatchThresholds(at_zero=1, at_one=n)
    if rule.kind == RuleKind.AND:
        return MismatchThresholds(at_zero=n, at_one=1)
    k = math.ceil(n / 2) if rule.kind == RuleKind.MAJORITY else rule.k
    return MismatchThresholds(at_zero=k, at_one=k, split_tie=(n % 2 == 0 and 2 * k == n))


def decide_counts(rule: FusionRule, ones, n_sensors: int, coin=None) -> np.ndarray:
    """Vectorized decision given the number of received ones in each vector.

    `coin` holds one fair bit per vector and is read only at exact N/2 splits.
    """
    _check_rule(rule, n_sensors)
    ones = np.asarray(ones)
    zeros = n_sensors - ones

    if rule.kind == RuleKind.OR:
        return (ones >= 1).astype(np.int8)
    if rule.kind == RuleKind.AND:
        return (ones == n_sensors).astype(np.int8)

    split = 2 * ones == n_sensors
    if coin is None:
        if np.any(split):
            raise ConfigurationError("A tie needs a coin source to be resolved")
        coin = np.zeros_like(ones)
    majority = np.where(split, np.asarray(coin), (2 * ones > n_sensors)).astype(np.int8)
    if rule.kind == RuleKind.MAJORITY:
        return majority

    # K-OUT-OF-N: the value held by at least K sensors; undecided or doubly supported
    # vectors fall back to the majority
    one_ok = ones >= rule.k
    zero_ok = zeros >= rule.k
    return np.where(one_ok & ~zero_ok, 1, np.where(zero_ok & ~one_ok, 0, majority)).astype(np.int8)


def decide(rule: FusionRule, received: Sequence[int], tie_coin: Optional[TieCoin] = None) -> int:
    """Fusion-center decision for one received vector s_1[n]..s_N[n]"""
    bits = np.asarray(received, dtype=np.int64)
    if bits.ndim != 1 or bits.size == 0 or np.any((bits != 0) & (bits != 1)):
        raise ConfigurationError(f"Received vector must be a non-empty list of bits, got {list(received)}")

    n_sensors = bits.size
    ones = int(bits.sum())
    coin = None
    if rule.kind in (RuleKind.MAJORITY, RuleKind.K_OUT_OF_N) and 2 * ones == n_sensors:
        if tie_coin is None:
            raise ConfigurationError("A tie needs a coin source to be resolved")
        if isinstance(tie_coin, np.random.Generator):
            coin = int(tie_coin.integers(0, 2))
        else:
            coin = int(tie_coin())
    return int(decide_counts(rule, ones, n_sensors, coin))


def decision_errors(rule: FusionRule, ones, theta, n_sensors: int, coin) -> np.ndarray:
    """Boolean decision-error indicator for many received vectors with known theta.

    OR, AND and MAJORITY are scored through decide_counts. K-OUT-OF-N is scored by its
    error event (at least K received bits disagree with theta), which coincides with
    decide_counts for K = ceil(N/2) and keeps the simulation comparable with the
    analytic result for other K.
    """
    theta = np.asarray(theta)
    if rule.kind != RuleKind.K_OUT_OF_N:
        return decide_counts(rule, ones, n_sensors, coin) != theta

    thresholds = mismatch_thresholds(rule, n_sensors)
    ones = np.asarray(ones)
    mismatches = np.where(theta == 1, n_sensors - ones, ones)
    errors = mismatches >= rule.k
    if thresholds.split_tie:
        split = mismatches == rule.k
        errors = np.where(split, np.asarray(coin) != theta, errors)
    return errors


def per_sample_mismatch(sensing: SensingProbabilities, channel_flip: float,
                        states: StateSeries) -> PerSampleMismatch:
    """Two-path law: wrong observation sent intact, or right observation flipped"""
    if not 0.0 <= channel_flip <= 1.0:
        raise ConfigurationError(f"Channel flip probability {channel_flip} is outside [0, 1]")
    if len(sensing) != states.eta:
        raise ConfigurationError(
            f"Sensing profile has {len(sensing)} samples but the state series has {states.eta}"
        )

    c = channel_flip
    q_below = sensing.p_below * c + sensing.p_above * (1.0 - c)
    q_above = sensing.p_above * c + sensing.p_below * (1.0 - c)
    q = np.clip(np.where(states.below, q_below, q_above), 0.0, 1.0)
    return PerSampleMismatch(q=q, below=states.below)


def prob_k_of_n_errors(q, k: int, n: int):
    """Binomial point mass C(N,K) q^K (1-q)^(N-K); log-gamma accumulation for N > 60"""
    if not 0 <= k <= n:
        raise ConfigurationError(f"K={k} is out of range for N={n}")

    q_arr = np.asarray(q, dtype=float)
    if n <= LOG_SPACE_THRESHOLD:
        value = math.comb(n, k) * np.power(q_arr, k) * np.power(1.0 - q_arr, n - k)
    else:
        log_comb = gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)
        value = np.exp(log_comb + xlogy(k, q_arr) + xlog1py(n - k, -q_arr))

    if np.ndim(value) == 0:
        return float(value)
    return value


def binomial_tail(q, k: int, n: int):
    """P(at least K of N mismatches), summed from the smallest terms upward"""
    q_arr = np.asarray(q, dtype=float)
    if k <= 0:
        tail = np.ones_like(q_arr)
    elif k > n:
        tail = np.zeros_like(q_arr)
    else:
        terms = np.stack([np.broadcast_to(prob_k_of_n_errors(q_arr, j, n), q_arr.shape)
                          for j in range(k, n + 1)])
        tail = np.sort(terms, axis=0).sum(axis=0)

    if np.ndim(tail) == 0:
        return float(tail)
    return tail


def per_sample_error(rule: FusionRule, q, n_sensors: int, state: int) -> np.ndarray:
    """Decision error probability at samples whose true state is `state`"""
    thresholds = mismatch_thresholds(rule, n_sensors)
    q = np.asarray(q, dtype=float)
    error = binomial_tail(q, thresholds.for_state(state), n_sensors)
    if thresholds.split_tie:
        error = error - 0.5 * prob_k_of_n_errors(q, n_sensors // 2, n_sensors)
    return np.clip(error, 0.0, 1.0)


def per_sample_decision_error(rule: FusionRule, mismatch: PerSampleMismatch,
                              states: StateSeries, n_sensors: int) -> np.ndarray:
    """Full list of Pr[theta_hat[n] != theta[n]] over n = 0..eta-1"""
    errors = np.zeros(states.eta)
    for state in (0, 1):
        idx = states.index_set(state)
        if idx.size:
            errors[idx] = per_sample_error(rule, mismatch.q[idx], n_sensors, state)
    return errors


def error_probability(rule: FusionRule, mismatch: PerSampleMismatch,
                      states: StateSeries, n_sensors: int) -> ErrorReport:
    """Average decision error probability with its type-I / type-II decomposition.

    Works on the below/above partition so that swapping the convention reproduces the
    OR <-> AND duality bit for bit; K-OUT-OF-N and MAJORITY do not depend on it.
    """
    if len(mismatch.q) != states.eta:
        raise ConfigurationError(
            f"Mismatch list has {len(mismatch.q)} samples but the state series has {states.eta}"
        )

    errors = per_sample_decision_error(rule, mismatch, states, n_sensors)
    below_idx = states.below_indices
    above_idx = states.above_indices
    if below_idx.size == 0 or above_idx.size == 0:
        logger.warning(
            f"Degenerate partition (eta_below={below_idx.size}, eta_above={above_idx.size}); "
            "the empty state contributes nothing"
        )

    f_below = below_idx.size / states.eta
    f_above = above_idx.size / states.eta
    avg_below = average_over(errors, below_idx)
    avg_above = average_over(errors, above_idx)
    p_e = min(max(f_below * avg_below + f_above * avg_above, 0.0), 1.0)

    if states.convention.s_label == 0:
        f_0, f_1, type_i, type_ii = f_below, f_above, avg_below, avg_above
    else:
        f_0, f_1, type_i, type_ii = f_above, f_below, avg_above, avg_below

    logger.debug(f"{rule.label} N={n_sensors} S={states.convention.s_label}: P_e={p_e:.6f}")
    return ErrorReport(
        rule=rule,
        p_e=p_e,
        type_I=type_i,
        type_II=type_ii,
        f_0=f_0,
        f_1=f_1,
        convention=states.convention,
        n_sensors=n_sensors,
    )


def _growth_limit(growth: Optional[GrowthPolicy], alpha: Optional[float]) -> float:
    if growth is None:
        raise ConfigurationError(
            "K-OUT-OF-N limits need a growth policy: FIXED K or PROPORTIONAL K = alpha * N"
        )
    if growth == GrowthPolicy.FIXED:
        # a fixed K eventually sits below ceil(N/2)
        return 1.0
    if alpha is None or not 0.0 < alpha <= 1.0:
        raise ConfigurationError(f"PROPORTIONAL growth needs alpha in (0, 1] (got {alpha})")
    return 0.0 if alpha >= 0.5 else 1.0


def asymptotic_limit(rule: FusionRule, f_0: float, f_1: float,
                     convention: QuantizationConvention = QuantizationConvention(),
                     growth: Optional[GrowthPolicy] = None,
                     alpha: Optional[float] = None) -> float:
    """Limit of P_e as N grows.

    f_0 and f_1 are the frequencies under S=0 (f_0 is the share of samples with
    x(t_n) <= x_th); for S=1, OR and AND swap by De Morgan's law.
    """
    if abs(f_0 + f_1 - 1.0) > 1e-9:
        raise ConfigurationError(f"Frequencies must sum to 1 (got f_0={f_0}, f_1={f_1})")

    kind = rule.kind
    if convention.s_label == 1 and kind in (RuleKind.OR, RuleKind.AND):
        kind = RuleKind.AND if kind == RuleKind.OR else RuleKind.OR

    if kind == RuleKind.OR:
        return f_0
    if kind == RuleKind.AND:
        return f_1
    if kind == RuleKind.MAJORITY:
        return 0.0
    return _growth_limit(growth, alpha)


def asymptotic_error_types(rule: FusionRule, growth: Optional[GrowthPolicy] = None,
                           alpha: Optional[float] = None) -> tuple:
    """(type I, type II) limits: OR always ends up deciding 1, AND deciding 0"""
    if rule.kind == RuleKind.OR:
        return 1.0, 0.0
    if rule.kind == RuleKind.AND:
        return 0.0, 1.0
    if rule.kind == RuleKind.MAJORITY:
        return 0.0, 0.0
    limit = _growth_limit(growth, alpha)
    return limit, limit


def evaluate_configuration(signal_spec: SignalSpec, x_th: float, sensor: SensorModel,
                           channel: ChannelSpec, rules: Iterable[FusionRule],
                           convention: QuantizationConvention = QuantizationConvention()
                           ) -> List[ErrorReport]:
    """Signal -> states -> sensing -> channel -> one ErrorReport per rule"""
    signal = sample_signal(signal_spec)
    states = quantize(signal, x_th, convention)
    sensing = sensing_profile(signal, x_th, sensor)
    mismatch = per_sample_mismatch(sensing, flip_probability(channel), states)
    return [error_probability(rule, mismatch, states, sensor.n_sensors) for rule in rules]
