import itertools
import math

import numpy as np
import pytest

from analysis.errors import ConfigurationError
from analysis.fusion import (
    LOG_SPACE_THRESHOLD,
    asymptotic_error_types,
    asymptotic_limit,
    binomial_tail,
    decide,
    decide_counts,
    error_probability,
    evaluate_configuration,
    mismatch_thresholds,
    per_sample_error,
    per_sample_mismatch,
    prob_k_of_n_errors,
)
from analysis.models import (
    ChannelSpec,
    FusionRule,
    GrowthPolicy,
    QuantizationConvention,
    RuleKind,
    SensorModel,
    SignalSpec,
)
from analysis.sensing import SensingProbabilities
from analysis.signal import StateSeries
from conftest import AND, MAJORITY, OR

S0 = QuantizationConvention(s_label=0)
S1 = QuantizationConvention(s_label=1)


def kofn(k):
    return FusionRule(kind=RuleKind.K_OUT_OF_N, k=k)


def test_rule_parsing():
    assert FusionRule.parse(" OR ") == OR
    assert FusionRule.parse("maj") == MAJORITY
    assert FusionRule.parse("kofn:2") == kofn(2)
    assert kofn(2).label == "KOFN:2"
    for bad in ("xor", "kofn:", "kofn:x"):
        with pytest.raises(ValueError):
            FusionRule.parse(bad)
    with pytest.raises(ValueError):
        FusionRule(kind=RuleKind.K_OUT_OF_N)


def test_mismatch_thresholds():
    assert (mismatch_thresholds(OR, 5).at_zero, mismatch_thresholds(OR, 5).at_one) == (1, 5)
    assert (mismatch_thresholds(AND, 5).at_zero, mismatch_thresholds(AND, 5).at_one) == (5, 1)
    majority = mismatch_thresholds(MAJORITY, 5)
    assert (majority.at_zero, majority.at_one, majority.split_tie) == (3, 3, False)
    assert mismatch_thresholds(MAJORITY, 4).split_tie
    assert mismatch_thresholds(kofn(2), 4).split_tie
    assert not mismatch_thresholds(kofn(3), 4).split_tie
    with pytest.raises(ConfigurationError):
        mismatch_thresholds(kofn(5), 4)


@pytest.mark.parametrize("rule,received,expected", [
    (OR, [0, 0, 1], 1),
    (OR, [0, 0, 0], 0),
    (AND, [1, 1, 0], 0),
    (AND, [1, 1, 1], 1),
    (MAJORITY, [1, 1, 0], 1),
    (MAJORITY, [1, 0, 0], 0),
    (kofn(2), [1, 1, 0], 1),
    (kofn(1), [1, 0, 0], 0),
])
def test_decide(rule, received, expected):
    assert decide(rule, received) == expected


def test_decide_uses_the_coin_only_at_a_split():
    draws = []

    def coin():
        draws.append(1)
        return 1

    assert decide(MAJORITY, [1, 0], coin) == 1
    assert decide(MAJORITY, [1, 0], lambda: 0) == 0
    assert decide(MAJORITY, [1, 1, 0, 0, 1], coin) == 1
    assert len(draws) == 1
    assert decide(kofn(2), [0, 1, 1, 0], np.random.default_rng(0)) in (0, 1)


def test_decide_rejects_bad_input():
    with pytest.raises(ConfigurationError):
        decide(OR, [0, 2])
    with pytest.raises(ConfigurationError):
        decide(OR, [])
    with pytest.raises(ConfigurationError):
        decide(MAJORITY, [0, 1])


def test_decide_counts_is_vectorized():
    decisions = decide_counts(MAJORITY, np.array([0, 1, 2, 3, 4]), 4, coin=np.array([1, 1, 0, 1, 1]))
    np.testing.assert_array_equal(decisions, [0, 0, 0, 1, 1])


def test_per_sample_mismatch_two_paths():
    below = np.array([True, False])
    states = StateSeries(theta=np.array([0, 1], dtype=np.int8), below=below, convention=S0)
    sensing = SensingProbabilities(p_below=np.array([0.7, 0.7]), p_above=np.array([0.3, 0.3]))
    mismatch = per_sample_mismatch(sensing, 0.1, states)
    np.testing.assert_allclose(mismatch.q, [0.34, 0.66])
    np.testing.assert_allclose(mismatch.q_S, [0.34])
    np.testing.assert_allclose(mismatch.q_S_bar, [0.66])


def test_mismatch_with_a_transparent_channel():
    states = StateSeries(theta=np.array([0], dtype=np.int8), below=np.array([True]), convention=S0)
    sensing = SensingProbabilities(p_below=np.array([0.9]), p_above=np.array([0.1]))
    assert per_sample_mismatch(sensing, 0.0, states).q[0] == pytest.approx(0.1)
    assert per_sample_mismatch(sensing, 0.5, states).q[0] == pytest.approx(0.5)


def test_prob_k_of_n_errors():
    assert prob_k_of_n_errors(0.2, 2, 3) == pytest.approx(0.096)
    assert prob_k_of_n_errors(0.3, 0, 4) == pytest.approx(0.7 ** 4)
    assert prob_k_of_n_errors(0.0, 0, 7) == 1.0
    assert prob_k_of_n_errors(1.0, 7, 7) == 1.0
    with pytest.raises(ConfigurationError):
        prob_k_of_n_errors(0.2, 4, 3)


@pytest.mark.parametrize("n", [5, 60, 61, 200])
def test_binomial_masses_sum_to_one(n):
    for q in (0.01, 0.3, 0.5, 0.97):
        total = math.fsum(prob_k_of_n_errors(q, k, n) for k in range(n + 1))
        assert total == pytest.approx(1.0, rel=1e-10)


def test_log_space_agrees_with_exact_binomials():
    n = LOG_SPACE_THRESHOLD + 1
    for k in range(n + 1):
        exact = math.comb(n, k) * 0.3 ** k * 0.7 ** (n - k)
        assert prob_k_of_n_errors(0.3, k, n) == pytest.approx(exact, rel=1e-10)


def test_binomial_tail_edges():
    assert binomial_tail(0.4, 0, 5) == 1.0
    assert binomial_tail(0.4, 6, 5) == 0.0
    assert binomial_tail(0.4, 1, 5) == pytest.approx(1 - 0.6 ** 5)
    np.testing.assert_allclose(binomial_tail(np.array([0.0, 1.0]), 2, 3), [0.0, 1.0])


def _enumerated_error(rule, q, n, state):
    """Brute force over every mismatch pattern and both tie-coin outcomes"""
    use_event = rule.kind == RuleKind.K_OUT_OF_N and rule.k != math.ceil(n / 2)
    total = 0.0
    for pattern in itertools.product((0, 1), repeat=n):
        weight = math.prod(q if m else 1.0 - q for m in pattern)
        if use_event:
            wrong = float(sum(pattern) >= rule.k)
        else:
            received = [state ^ m for m in pattern]
            wrong = 0.5 * sum(decide(rule, received, lambda c=c: c) != state for c in (0, 1))
        total += weight * wrong
    return total


def test_analytic_errors_match_enumeration():
    rng = np.random.default_rng(99)
    cases = 0
    for n in range(1, 5):
        rules = [OR, AND, MAJORITY] + [kofn(k) for k in range(1, n + 1)]
        for rule, state, q in itertools.product(rules, (0, 1), rng.uniform(0, 1, size=30)):
            expected = _enumerated_error(rule, float(q), n, state)
            assert per_sample_error(rule, q, n, state) == pytest.approx(expected, abs=1e-12)
            cases += 1
    assert cases > 1000


def _random_configuration(seed):
    rng = np.random.default_rng(seed)
    hops = int(rng.integers(1, 5))
    return dict(
        signal_spec=SignalSpec(eta=2_000),
        x_th=float(rng.uniform(1.0, 5.0)),
        sensor=SensorModel(
            mu=float(rng.uniform(-0.5, 0.5)),
            sigma2=float(rng.uniform(0.2, 2.0)),
            n_sensors=int(rng.integers(1, 9)),
        ),
        channel=ChannelSpec(hop_probs=tuple(float(p) for p in rng.uniform(0.0, 0.5, size=hops))),
    )


@pytest.mark.parametrize("seed", range(10))
def test_or_and_duality_is_exact(seed):
    args = _random_configuration(seed)
    or_s0, and_s0 = evaluate_configuration(rules=(OR, AND), convention=S0, **args)
    or_s1, and_s1 = evaluate_configuration(rules=(OR, AND), convention=S1, **args)
    assert or_s1.p_e == and_s0.p_e
    assert and_s1.p_e == or_s0.p_e
    assert or_s0.type_I == and_s1.type_II
    assert or_s0.type_II == and_s1.type_I


@pytest.mark.parametrize("seed", range(10))
def test_symmetric_rules_ignore_the_convention(seed):
    args = _random_configuration(seed)
    n = args["sensor"].n_sensors
    rules = (MAJORITY,) + tuple(kofn(k) for k in range(1, n + 1))
    for r0, r1 in zip(evaluate_configuration(rules=rules, convention=S0, **args),
                      evaluate_configuration(rules=rules, convention=S1, **args)):
        assert r0.p_e == r1.p_e


@pytest.mark.parametrize("rule,expected", [(OR, 0.383), (AND, 0.101), (MAJORITY, 0.129)])
def test_snapshot_error_on_the_dense_grid(dense_signal, three_sensors, one_hop, rule, expected):
    report, = evaluate_configuration(dense_signal, 4.5, three_sensors, one_hop, [rule])
    assert report.p_e == pytest.approx(expected, abs=0.002)
    assert report.f_0 == pytest.approx(0.8747)


@pytest.mark.parametrize("rule,expected", [(OR, 0.383), (AND, 0.101), (MAJORITY, 0.129)])
def test_snapshot_error_on_the_300_sample_grid(snapshot_signal, three_sensors, one_hop, rule, expected):
    report, = evaluate_configuration(snapshot_signal, 4.5, three_sensors, one_hop, [rule])
    assert report.p_e == pytest.approx(expected, abs=0.005)


def test_types_recombine_into_the_average(dense_signal, three_sensors, one_hop, rules):
    for report in evaluate_configuration(dense_signal, 4.5, three_sensors, one_hop, rules):
        assert report.p_e == pytest.approx(report.f_0 * report.type_I + report.f_1 * report.type_II, abs=1e-12)
        assert report.n_sensors == 3


def test_single_sensor_rules_coincide(dense_signal, one_hop, rules):
    reports = evaluate_configuration(dense_signal, 4.5, SensorModel(n_sensors=1), one_hop, rules + (kofn(1),))
    p_values = [r.p_e for r in reports]
    assert max(p_values) - min(p_values) < 1e-12


def test_error_free_pipeline(dense_signal, rules):
    reports = evaluate_configuration(
        dense_signal, 4.5, SensorModel(sigma2=1e-18), ChannelSpec(hop_probs=(0.0,)), rules
    )
    for report in reports:
        assert report.p_e == pytest.approx(0.0, abs=1e-9)


def test_degenerate_partition_uses_the_present_state():
    spec = SignalSpec(eta=400)
    report, = evaluate_configuration(spec, 100.0, SensorModel(), ChannelSpec(hop_probs=(0.1,)), [OR])
    assert (report.f_0, report.f_1) == (1.0, 0.0)
    assert report.type_II == 0.0
    assert report.p_e == pytest.approx(report.type_I)


def test_error_probability_checks_lengths():
    states = StateSeries(theta=np.zeros(3, dtype=np.int8), below=np.ones(3, dtype=bool), convention=S0)
    sensing = SensingProbabilities(p_below=np.full(3, 0.8), p_above=np.full(3, 0.2))
    mismatch = per_sample_mismatch(sensing, 0.1, states)
    shorter = StateSeries(theta=np.zeros(2, dtype=np.int8), below=np.ones(2, dtype=bool), convention=S0)
    with pytest.raises(ConfigurationError):
        error_probability(OR, mismatch, shorter, 3)


def _sensor_sweep(x_th, rules, sensor_counts):
    spec = SignalSpec(eta=10_000)
    channel = ChannelSpec(hop_probs=(0.1,))
    return {
        n: evaluate_configuration(spec, x_th, SensorModel(n_sensors=n), channel, rules)
        for n in sensor_counts
    }


def test_large_networks_approach_the_limits():
    sweep = _sensor_sweep(4.5, (OR, AND, MAJORITY), range(1, 42, 2))
    or_41, and_41, majority_41 = sweep[41]
    assert or_41.p_e == pytest.approx(or_41.f_0, abs=0.005)
    assert and_41.p_e == pytest.approx(and_41.f_1, abs=0.005)
    # samples near x_th keep q close to 1/2 whatever the network size
    assert majority_41.p_e == pytest.approx(0.0336, abs=0.0005)
    majority = [sweep[n][2].p_e for n in range(1, 42, 2)]
    assert all(b <= a + 1e-12 for a, b in zip(majority, majority[1:]))


def test_monotone_in_hops_and_flip_probability(dense_signal, three_sensors, rules):
    by_hops = [evaluate_configuration(dense_signal, 4.5, three_sensors, ChannelSpec.uniform(0.1, m), rules)
               for m in range(1, 11)]
    by_flip = [evaluate_configuration(dense_signal, 4.5, three_sensors, ChannelSpec(hop_probs=(0.05 * i,)), rules)
               for i in range(11)]
    for series in (by_hops, by_flip):
        for r in range(len(rules)):
            values = [point[r].p_e for point in series]
            assert all(b >= a - 1e-12 for a, b in zip(values, values[1:]))


def test_asymptotic_limits():
    assert asymptotic_limit(OR, 0.8747, 0.1253) == 0.8747
    assert asymptotic_limit(AND, 0.8747, 0.1253) == 0.1253
    assert asymptotic_limit(MAJORITY, 0.8747, 0.1253) == 0.0
    assert asymptotic_limit(OR, 0.8747, 0.1253, convention=S1) == 0.1253
    assert asymptotic_limit(AND, 0.8747, 0.1253, convention=S1) == 0.8747
    assert asymptotic_limit(kofn(2), 0.5, 0.5, growth=GrowthPolicy.FIXED) == 1.0
    assert asymptotic_limit(kofn(2), 0.5, 0.5, growth=GrowthPolicy.PROPORTIONAL, alpha=0.5) == 0.0
    assert asymptotic_limit(kofn(2), 0.5, 0.5, growth=GrowthPolicy.PROPORTIONAL, alpha=0.3) == 1.0


def test_asymptotic_limit_errors():
    with pytest.raises(ConfigurationError):
        asymptotic_limit(OR, 0.5, 0.4)
    with pytest.raises(ConfigurationError):
        asymptotic_limit(kofn(2), 0.5, 0.5)
    with pytest.raises(ConfigurationError):
        asymptotic_limit(kofn(2), 0.5, 0.5, growth=GrowthPolicy.PROPORTIONAL, alpha=1.5)


def test_asymptotic_error_types():
    assert asymptotic_error_types(OR) == (1.0, 0.0)
    assert asymptotic_error_types(AND) == (0.0, 1.0)
    assert asymptotic_error_types(MAJORITY) == (0.0, 0.0)
    assert asymptotic_error_types(kofn(1), growth=GrowthPolicy.FIXED) == (1.0, 1.0)
