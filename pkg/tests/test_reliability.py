"""Click probabilities, majority-vote error rate, and the repetition
search, cross-checked against enumeration and Monte-Carlo oracles."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covertlink.exceptions import InfeasibleError, ParameterError
from covertlink.reliability import (
    ChannelModel,
    ClickProbabilities,
    bit_error_prob,
    click_probs,
    message_error_prob,
    min_repetitions,
)

import oracles
import reference_scenarios as ref

CQTUSTC = ref.FIBER_BY_NAME["CQTUSTC"]


def model_clicks(point) -> ClickProbabilities:
    ch = ChannelModel(tau=ref.TAU, n_bar_a=point.n_bar_a, n_bar_b=point.n_bar_b)
    return click_probs(point.mu, ch)


def make_cp(p_c: float, p_w: float) -> ClickProbabilities:
    total = p_c + p_w
    p_g = p_c / total if total > 0.0 else math.nan
    return ClickProbabilities(p_c, p_w, p_g)


def test_click_probs_dark_silent_channel():
    cp = click_probs(0.0, ChannelModel(tau=0.5, n_bar_a=0.0, n_bar_b=0.0))
    assert cp.p_correct == 0.0
    assert cp.p_wrong == 0.0
    assert math.isnan(cp.p_good_given_click)


def test_click_probs_pure_loss_limit():
    cp = click_probs(0.3, ChannelModel(tau=1.0, n_bar_a=0.0, n_bar_b=0.0))
    assert cp.p_correct == pytest.approx(-math.expm1(-0.3), rel=1e-15)
    assert cp.p_wrong == 0.0
    assert cp.p_good_given_click == 1.0


def test_click_probs_frozen_reference_values():
    for p in ref.FIBER:
        cp = model_clicks(p)
        p_c, p_w = ref.CLICK_PROBS_MODEL[p.name]
        assert cp.p_correct == pytest.approx(p_c, rel=1e-13)
        assert cp.p_wrong == pytest.approx(p_w, rel=1e-13)
        assert cp.p_good_given_click == pytest.approx(
            p_c / (p_c + p_w), rel=1e-13
        )


def test_click_probs_vs_photon_thinning_mc():
    p = CQTUSTC
    cp = model_clicks(p)
    est, se = oracles.click_probability_mc(
        p.mu, p.n_bar_b, ref.TAU, samples=10**6, seed=20260814
    )
    assert abs(cp.p_correct - est) <= 3.0 * se


@given(
    st.floats(min_value=1e-4, max_value=1.0),
    st.floats(min_value=0.0, max_value=1.0),
    st.floats(min_value=0.0, max_value=2.0),
)
def test_click_probs_ordering(mu, tau, n_bar_b):
    cp = click_probs(mu, ChannelModel(tau=tau, n_bar_a=0.0, n_bar_b=n_bar_b))
    assert 0.0 <= cp.p_wrong <= cp.p_correct <= 1.0


def test_bit_error_single_pulse_reduction():
    for p in ref.FIBER:
        cp = model_clicks(p)
        assert bit_error_prob(1, cp) == pytest.approx(
            1.0 - cp.p_correct, rel=1e-14
        )


def test_bit_error_perfect_channel():
    cp = make_cp(1.0, 0.0)
    for k in (1, 2, 5, 17):
        assert bit_error_prob(k, cp) == 0.0


def test_bit_error_frozen_reference_values():
    for p in ref.FIBER:
        delta = bit_error_prob(p.repetitions, model_clicks(p))
        assert delta == pytest.approx(ref.BIT_ERROR_MODEL[p.name], rel=1e-10)


def test_bit_error_matches_enumeration_small_k():
    rng = np.random.default_rng(7)
    for _ in range(30):
        k = int(rng.integers(1, 13))
        p_c = float(rng.uniform(0.0, 0.6))
        p_w = float(rng.uniform(0.0, min(0.4, 0.99 - p_c)))
        expected = oracles.majority_error_enumeration(k, p_c, p_w)
        assert bit_error_prob(k, make_cp(p_c, p_w)) == pytest.approx(
            expected, abs=1e-12
        )


def test_bit_error_matches_bruteforce_tiny_k():
    for k, p_c, p_w in [(1, 0.3, 0.1), (4, 0.2, 0.15), (7, 0.5, 0.3)]:
        expected = oracles.majority_error_bruteforce(k, p_c, p_w)
        assert bit_error_prob(k, make_cp(p_c, p_w)) == pytest.approx(
            expected, abs=1e-12
        )


def test_bit_error_monotone_in_repetitions_on_reference_grids():
    for p_c, p_w in [(8.42e-3, 1.04e-3), (9.26e-2, 2.23e-2)]:
        cp = make_cp(p_c, p_w)
        vals = [bit_error_prob(k, cp) for k in range(1, 41)]
        assert all(b <= a + 1e-15 for a, b in zip(vals, vals[1:]))


def test_bit_error_monotone_in_click_probs():
    k = 9
    base = bit_error_prob(k, make_cp(0.02, 0.005))
    assert bit_error_prob(k, make_cp(0.03, 0.005)) <= base
    assert bit_error_prob(k, make_cp(0.02, 0.008)) >= base


def test_bit_error_bounds_and_rejects():
    cp = make_cp(0.01, 0.002)
    for k in (1, 2, 33, 1000):
        assert 0.0 <= bit_error_prob(k, cp) <= 1.0
    with pytest.raises(ParameterError):
        bit_error_prob(0, cp)


def test_bit_error_vs_block_mc():
    cp = make_cp(8.42e-3, 1.04e-3)
    closed = bit_error_prob(17, cp)
    est, se = oracles.repetition_block_mc(
        17, 8.42e-3, 1.04e-3, blocks=3 * 10**5, seed=42
    )
    assert abs(closed - est) <= 3.0 * se


def test_message_error_trivial_cases():
    assert message_error_prob(0.0, 35) == 0.0
    assert message_error_prob(1.0, 35) == 1.0
    assert message_error_prob(0.37, 1) == pytest.approx(0.37, rel=1e-15)


def test_message_error_frozen_oracle():
    # 50-digit value of 1 - (1 - 1e-4)^35
    assert message_error_prob(1e-4, 35) == pytest.approx(
        ref.MESSAGE_ERROR_DELTA_1E4_B35, abs=1e-9
    )


@given(
    st.floats(min_value=1e-6, max_value=0.5),
    st.integers(min_value=1, max_value=64),
)
def test_message_error_product_form(delta, b):
    product = 1.0
    for _ in range(b):
        product *= 1.0 - delta
    assert message_error_prob(delta, b) == pytest.approx(
        1.0 - product, abs=1e-12
    )


def test_min_repetitions_perfect_channel():
    assert min_repetitions(0.01, 35, make_cp(1.0, 0.0)) == 1


def test_min_repetitions_monotone_in_target():
    cp = model_clicks(CQTUSTC)
    assert min_repetitions(1e-3, 35, cp) >= min_repetitions(1e-2, 35, cp)


def test_min_repetitions_reference_vicinity():
    k = min_repetitions(ref.TARGET_ERROR, CQTUSTC.bits, model_clicks(CQTUSTC))
    assert abs(k - CQTUSTC.repetitions) / CQTUSTC.repetitions <= 0.30


def test_min_repetitions_is_minimal():
    # includes a near-saturated pair where the error sawtooths with parity
    cases = [
        (0.01, 5, make_cp(0.30, 0.05)),
        (0.05, 3, make_cp(0.70, 0.25)),
        (0.02, 8, make_cp(0.08, 0.02)),
        (0.10, 1, make_cp(0.55, 0.40)),
    ]
    for target, b, cp in cases:
        k = min_repetitions(target, b, cp)
        def err(j):
            return message_error_prob(bit_error_prob(j, cp), b)
        assert err(k) <= target
        scan = next(j for j in range(1, k + 1) if err(j) <= target)
        assert k == scan


def test_min_repetitions_infeasible_majority():
    with pytest.raises(InfeasibleError):
        min_repetitions(0.01, 35, make_cp(0.01, 0.01))
    with pytest.raises(InfeasibleError):
        min_repetitions(0.01, 35, make_cp(0.005, 0.01))


def test_min_repetitions_infeasible_cap():
    # vanishing correct-wrong margin drives the needed k past the cap
    with pytest.raises(InfeasibleError):
        min_repetitions(0.01, 35, make_cp(1.0e-4, 9.9e-5))


def test_channel_model_rejects_bad_inputs():
    with pytest.raises(ParameterError):
        ChannelModel(tau=1.5, n_bar_a=0.0, n_bar_b=0.0)
    with pytest.raises(ParameterError):
        ChannelModel(tau=0.5, n_bar_a=-0.1, n_bar_b=0.0)
