"""Detection-bias bound: spot values, inversion correctness, and the
quadratic pair-count scaling that reflects the square-root law."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from covertlink.exceptions import InfeasibleError, ParameterError
from covertlink.security import (
    BINS_PER_PAIR,
    ModePair,
    bias_for_protocol,
    detection_bias_bound,
    min_pairs_for_budget,
    per_mode_relative_entropy,
)

import reference_scenarios as ref

CQTUSTC = ref.FIBER_BY_NAME["CQTUSTC"]


def test_bound_zero_divergence():
    assert detection_bias_bound(10**12, 0.0) == 0.0


def test_bound_algebraic_identity():
    assert detection_bias_bound(8, 1.0) == 1.0


def test_bound_rejects_bad_inputs():
    with pytest.raises(ParameterError):
        detection_bias_bound(0, 1.0)
    with pytest.raises(ParameterError):
        detection_bias_bound(8, -1e-9)


def test_bound_reproduces_reference_budget():
    # convention slack: factor 2 on pair count means sqrt(2) on the bias
    eps = bias_for_protocol(
        int(CQTUSTC.pairs), CQTUSTC.signals, CQTUSTC.mu, CQTUSTC.n_bar_a
    )
    assert eps == pytest.approx(ref.BIAS_BOUND_AT_INPUTS["CQTUSTC"], rel=5e-7)
    ratio = eps / CQTUSTC.epsilon
    assert 1.0 / math.sqrt(2.0) <= ratio <= math.sqrt(2.0)


def test_bound_matches_frozen_oracle_all_points():
    for p in ref.FIBER:
        eps = bias_for_protocol(int(p.pairs), p.signals, p.mu, p.n_bar_a)
        assert eps == pytest.approx(ref.BIAS_BOUND_AT_INPUTS[p.name], rel=5e-7)


def test_min_pairs_defining_property_small_case():
    # generous budget, one signal, dim pulse: small N, exact threshold
    found = min_pairs_for_budget(0.49, 1, 1e-3, 1e-3)
    n = found.n_pairs
    assert n < 10**6

    def bound_at(m):
        return bias_for_protocol(m, 1, 1e-3, 1e-3)

    assert bound_at(n) <= 0.49
    if n > 1:
        assert bound_at(n - 1) > 0.49


def test_min_pairs_reference_inputs_within_convention_tolerance():
    found = min_pairs_for_budget(
        CQTUSTC.epsilon, CQTUSTC.signals, CQTUSTC.mu, CQTUSTC.n_bar_a
    )
    assert found.bins_total == BINS_PER_PAIR * found.n_pairs
    ratio = found.bins_total / CQTUSTC.bins
    assert 0.5 <= ratio <= 2.0


def test_min_pairs_no_signals():
    assert min_pairs_for_budget(0.01, 0, 0.03, 0.002).n_pairs == 1


def test_min_pairs_monotonicity_both_directions():
    found = min_pairs_for_budget(0.014, 68651, 3.52e-2, 2.30e-3)
    n = found.n_pairs
    assert bias_for_protocol(n, 68651, 3.52e-2, 2.30e-3) <= 0.014
    assert bias_for_protocol(n // 2, 68651, 3.52e-2, 2.30e-3) > 0.014


def test_min_pairs_infeasible_under_ceiling():
    # a bright pulse cannot hide a million signals in a thousand pairs
    with pytest.raises(InfeasibleError):
        min_pairs_for_budget(0.001, 10**6, 0.5, 1e-3, ceiling=10**9)


def test_min_pairs_rejects_bad_budget():
    for eps in (0.0, 0.5, -0.1, 0.7):
        with pytest.raises(ParameterError):
            min_pairs_for_budget(eps, 100, 0.03, 0.002)
    with pytest.raises(ParameterError):
        min_pairs_for_budget(0.01, -1, 0.03, 0.002)


def test_mode_pair_validation():
    with pytest.raises(ParameterError):
        ModePair(0)
    assert ModePair(5).bins_total == 10


def test_pair_count_scales_quadratically_in_signals():
    # square-root law read backwards: N ~ d^2 over an octave-spaced span
    ds = [1000, 2000, 4000, 8000]
    ns = [
        min_pairs_for_budget(0.014, d, 3.52e-2, 2.30e-3).n_pairs for d in ds
    ]
    coeff = np.mean([n / d**2 for n, d in zip(ns, ds)])
    for n, d in zip(ns, ds):
        assert n == pytest.approx(coeff * d**2, rel=0.10)


@given(
    st.integers(min_value=1, max_value=10**14),
    st.floats(min_value=0.0, max_value=1e-10),
)
def test_bound_monotone_in_both_arguments(n_pairs, d):
    base = detection_bias_bound(n_pairs, d)
    assert detection_bias_bound(2 * n_pairs, d) >= base
    assert detection_bias_bound(n_pairs, 2.0 * d) >= base


@given(
    st.floats(min_value=1e-3, max_value=0.3),
    st.floats(min_value=1e-4, max_value=1e-2),
)
def test_divergence_error_bar_small_at_reference_scale(mu, n_bar):
    # the reported truncation bar must not pollute the sixth digit
    d = per_mode_relative_entropy(mu, n_bar, 1e-7)
    if d > 0.0:
        assert d.error_bound < 1e-6 * d
