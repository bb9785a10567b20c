"""Monte-Carlo simulation of the covert link and of the adversary.

The receiver-side simulation works position by position (O(d') for d'
sent signals) and never touches the ~1e12 idle bins; idle bins only
matter to the adversary, whose view is simulated through exact aggregate
binomial and multinomial sampling. All outputs are pure functions of
(inputs, seed) via counter-style derived seeds, so parallel and
sequential evaluation orders agree.

The adversary taps the channel at the sender's output with unit
efficiency (noise mean n_bar_a, no detector penalty), which is strictly
pessimistic for the legitimate parties.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .codec import (
    OUTCOME_BOTH,
    OUTCOME_NONE,
    OUTCOME_ONE,
    OUTCOME_ZERO,
    BitTally,
    PositionPlan,
    majority_decode,
)
from .exceptions import ParameterError
from .planner import ProtocolParams
from .reliability import bit_error_prob, click_probs, message_error_prob
from .security import BINS_PER_PAIR, detection_bias_bound, per_mode_relative_entropy

# spawn-key domains keeping the three simulation families independent
_DOMAIN_TRANSMIT = 0
_DOMAIN_MONITOR = 1
_DOMAIN_DISTINGUISH = 2


def _rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


@dataclass(frozen=True)
class TransmissionStats:
    """Aggregate receiver statistics, all recomputable from the outcomes.

    vote_error_rate is the fraction of single-bin clicks landing in the
    wrong bin; clicks_per_bit averages votes over the message bits.
    """

    signal_bin_click_rate: float
    noise_bin_click_rate: float
    vote_rate_per_pulse: float
    vote_error_rate: float
    total_votes: int
    wrong_votes: int
    clicks_per_bit: float
    message_bit_error_rate: float


@dataclass(frozen=True, eq=False)
class Transcript:
    """Full record of one simulated transmission."""

    protocol: ProtocolParams
    plan: PositionPlan
    outcomes: np.ndarray
    decoded: str
    tallies: tuple[BitTally, ...]
    stats: TransmissionStats


@dataclass(frozen=True, eq=False)
class MonitorTrace:
    """Per-interval click counts as seen by the monitoring adversary."""

    interval_s: float
    counts: np.ndarray
    communicating: bool
    pairs_per_interval: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        object.__setattr__(self, "counts", counts)
        counts.setflags(write=False)
        if np.any(counts < 0):
            raise ParameterError("counts must be non-negative")


@dataclass(frozen=True)
class DistinguisherResult:
    """Empirical performance of the adversary's best tested detectors.

    bound_epsilon is the detection-bias bound claimed by the plan under
    test; the security assertion is empirical_bias <= bound_epsilon up
    to Monte-Carlo error.
    """

    empirical_pe: float
    empirical_bias: float
    std_error: float
    trials: int
    bound_epsilon: float
    pe_count_threshold: float
    pe_likelihood_ratio: float
    count_threshold: float

    def security_check(self, n_sigma: float = 3.0) -> bool:
        return self.empirical_bias <= self.bound_epsilon + n_sigma * self.std_error


def adversary_click_probs(p: ProtocolParams) -> tuple[float, float]:
    """Per-bin click probabilities (idle, signal-bearing) at the tap point."""
    n_bar = p.channel.n_bar_a
    p_idle = n_bar / (1.0 + n_bar)
    p_signal = (n_bar - math.expm1(-p.mu)) / (1.0 + n_bar)
    return p_idle, p_signal


def simulate_transmission(
    p: ProtocolParams, plan: PositionPlan, rng_seed: int
) -> Transcript:
    """Simulate the receiver's clicks at every planned position and decode.

    Each sent signal independently produces a click in its own bin with
    probability p_correct and in the paired bin with probability p_wrong;
    simultaneous clicks are recorded and later discarded by the decoder.
    Work is O(d'), independent of the pair count.
    """
    if plan.n_pairs != p.n_pairs or plan.b != p.b:
        raise ParameterError("plan does not match the protocol parameters")
    cp = click_probs(p.mu, p.channel)
    rng = _rng(rng_seed, _DOMAIN_TRANSMIT)
    d = plan.d_prime
    click_signal = rng.random(d) < cp.p_correct
    click_noise = rng.random(d) < cp.p_wrong
    sent_one = plan.bit_value == 1
    bin_zero = (click_signal & ~sent_one) | (click_noise & sent_one)
    bin_one = (click_signal & sent_one) | (click_noise & ~sent_one)
    outcomes = np.select(
        [bin_zero & bin_one, bin_zero, bin_one],
        [OUTCOME_BOTH, OUTCOME_ZERO, OUTCOME_ONE],
        default=OUTCOME_NONE,
    ).astype(np.uint8)
    decoded, tallies = majority_decode(plan, outcomes)
    return Transcript(
        protocol=p,
        plan=plan,
        outcomes=outcomes,
        decoded=decoded,
        tallies=tallies,
        stats=compute_stats(plan, outcomes),
    )


def compute_stats(plan: PositionPlan, outcomes: np.ndarray) -> TransmissionStats:
    """Recompute every Transcript statistic from the raw outcomes."""
    outcomes = np.asarray(outcomes)
    sent_one = plan.bit_value == 1
    is_zero = outcomes == OUTCOME_ZERO
    is_one = outcomes == OUTCOME_ONE
    is_both = outcomes == OUTCOME_BOTH
    signal_bin = np.where(sent_one, is_one | is_both, is_zero | is_both)
    noise_bin = np.where(sent_one, is_zero | is_both, is_one | is_both)
    vote = is_zero | is_one
    wrong_vote = vote & np.where(sent_one, is_zero, is_one)
    total_votes = int(np.sum(vote))
    wrong_votes = int(np.sum(wrong_vote))

    sent_bits = plan.message_bits()
    bit_errors = 0
    vote_count_message = 0
    for i in range(plan.b):
        sel = plan.bit_index == i
        zeros = int(np.sum(is_zero & sel))
        ones = int(np.sum(is_one & sel))
        vote_count_message += zeros + ones
        if zeros == ones:
            bit_errors += 1
        elif int(ones > zeros) != int(sent_bits[i]):
            bit_errors += 1
    return TransmissionStats(
        signal_bin_click_rate=float(np.mean(signal_bin)),
        noise_bin_click_rate=float(np.mean(noise_bin)),
        vote_rate_per_pulse=float(np.mean(vote)),
        vote_error_rate=(wrong_votes / total_votes) if total_votes else math.nan,
        total_votes=total_votes,
        wrong_votes=wrong_votes,
        clicks_per_bit=vote_count_message / plan.b,
        message_bit_error_rate=bit_errors / plan.b,
    )


def predicted_vote_error_rate(p: ProtocolParams) -> float:
    """Model value the empirical vote_error_rate estimates: p_W/(p_C + p_W)."""
    cp = click_probs(p.mu, p.channel)
    return cp.p_wrong / (cp.p_correct + cp.p_wrong)


def simulate_monitoring(
    p: ProtocolParams,
    communicating: bool,
    duration_s: float,
    interval_s: float,
    rng_seed: int,
) -> MonitorTrace:
    """Adversary's click counts per aggregation interval.

    Every interval is sampled from the aggregate statistics of its
    ~rep_rate * interval_s bins with exact binomial draws (never per-bin
    loops): the number of signal-bearing pairs is Binomial(pairs, q) and
    clicks follow with the idle/signal per-bin probabilities. With
    communicating=False (or q = 0) the signal count is forced to zero
    through the same code path, so equal seeds give equal traces.
    """
    if interval_s <= 0.0:
        raise ParameterError("interval_s must be > 0")
    n_intervals = int(duration_s / interval_s)
    if n_intervals < 10:
        raise ParameterError("duration must cover at least 10 intervals")
    pairs = int(round(p.rep_rate_hz * interval_s / BINS_PER_PAIR))
    if pairs < 1:
        raise ParameterError("interval too short for even one time-bin pair")
    p_idle, p_signal = adversary_click_probs(p)
    q_eff = p.q if communicating else 0.0
    counts = np.empty(n_intervals, dtype=np.int64)
    for i in range(n_intervals):
        rng = _rng(rng_seed, _DOMAIN_MONITOR, i)
        m = int(rng.binomial(pairs, q_eff))
        counts[i] = rng.binomial(m, p_signal) + rng.binomial(
            BINS_PER_PAIR * pairs - m, p_idle
        )
    return MonitorTrace(
        interval_s=interval_s,
        counts=counts,
        communicating=communicating,
        pairs_per_interval=pairs,
    )


def _pair_click_distribution(p_a: float, p_b: float) -> np.ndarray:
    """Distribution of the click count (0, 1 or 2) of one time-bin pair."""
    none = (1.0 - p_a) * (1.0 - p_b)
    one = p_a * (1.0 - p_b) + p_b * (1.0 - p_a)
    return np.array([none, one, max(0.0, 1.0 - none - one)])


def _multinomial3(rng: np.random.Generator, n: int, dist: np.ndarray) -> np.ndarray:
    """Multinomial draw over three categories via conditional binomials.

    Written out explicitly because n reaches ~1e11 pairs per trial.
    """
    if n == 0:
        return np.zeros(3, dtype=np.int64)
    x0 = int(rng.binomial(n, dist[0]))
    rest = n - x0
    remaining = 1.0 - dist[0]
    if rest == 0 or remaining <= 0.0:
        return np.array([x0, 0, n - x0], dtype=np.int64)
    x1 = int(rng.binomial(rest, min(1.0, dist[1] / remaining)))
    return np.array([x0, x1, rest - x1], dtype=np.int64)


def run_distinguisher(p: ProtocolParams, trials: int, rng_seed: int) -> DistinguisherResult:
    """Estimate the adversary's best error probability over two detectors.

    Each trial draws one whole protocol record (all n_pairs pairs) under
    an alternating hypothesis, reduced without loss to the per-pair
    click-count tallies (n1 pairs with one click, n2 with two). Detector
    (a) thresholds the total click count, with the threshold chosen on
    the first half of the trials and scored on the second; detector (b)
    is the exact per-pair likelihood-ratio test for this product model,
    scored on all trials. The reported error probability is the smaller
    of the two, which is the adversary-friendly choice.
    """
    if trials < 100:
        raise ParameterError("trials must be >= 100")
    p_idle, p_signal = adversary_click_probs(p)
    noise_dist = _pair_click_distribution(p_idle, p_idle)
    signal_dist = _pair_click_distribution(p_signal, p_idle)
    n_pairs, q = p.n_pairs, p.q

    # per-pair log likelihood ratios by click count, kept accurate for
    # q ~ 1e-8 via log1p of the relative excess
    ratio_excess = (signal_dist - noise_dist) / noise_dist
    llr_weight = np.log1p(q * ratio_excess)

    labels = np.arange(trials) % 2 == 1
    total_clicks = np.empty(trials)
    llr = np.empty(trials)
    for t in range(trials):
        rng = _rng(rng_seed, _DOMAIN_DISTINGUISH, t)
        m = int(rng.binomial(n_pairs, q)) if labels[t] else 0
        from_signal = _multinomial3(rng, m, signal_dist)
        from_noise = _multinomial3(rng, n_pairs - m, noise_dist)
        tallies = from_signal + from_noise
        total_clicks[t] = tallies[1] + 2.0 * tallies[2]
        llr[t] = float(tallies @ llr_weight)

    half = trials // 2
    threshold = _best_count_threshold(total_clicks[:half], labels[:half])
    pe_count = _balanced_error(total_clicks[half:] > threshold, labels[half:])
    pe_llr = _balanced_error(llr > 0.0, labels)
    if pe_count <= pe_llr:
        empirical_pe, se = pe_count, _balanced_error_se(
            total_clicks[half:] > threshold, labels[half:]
        )
    else:
        empirical_pe, se = pe_llr, _balanced_error_se(llr > 0.0, labels)
    return DistinguisherResult(
        empirical_pe=empirical_pe,
        empirical_bias=0.5 - empirical_pe,
        std_error=se,
        trials=trials,
        bound_epsilon=p.predicted_epsilon,
        pe_count_threshold=pe_count,
        pe_likelihood_ratio=pe_llr,
        count_threshold=threshold,
    )


def _best_count_threshold(counts: np.ndarray, labels: np.ndarray) -> float:
    """Threshold minimizing balanced error of the rule 'present if count > t'.

    Candidate thresholds are -inf and each observed count value, i.e.
    every achievable decision rule on the training sample.
    """
    order = np.argsort(counts, kind="stable")
    sorted_counts = counts[order]
    sorted_labels = labels[order]
    n1 = max(int(np.sum(labels)), 1)
    n0 = max(int(np.sum(~labels)), 1)
    miss_prefix = np.concatenate(([0], np.cumsum(sorted_labels)))
    reject_prefix = np.concatenate(([0], np.cumsum(~sorted_labels)))
    unique_counts = np.unique(sorted_counts)
    cuts = np.concatenate(([0], np.searchsorted(sorted_counts, unique_counts, side="right")))
    balanced_error = 0.5 * (miss_prefix[cuts] / n1 + 1.0 - reject_prefix[cuts] / n0)
    best = int(np.argmin(balanced_error))
    return -np.inf if best == 0 else float(unique_counts[best - 1])


def _balanced_error(declared_present: np.ndarray, labels: np.ndarray) -> float:
    """(false-alarm rate + missed-detection rate) / 2."""
    fa = float(np.mean(declared_present[~labels])) if np.any(~labels) else 0.0
    md = float(np.mean(~declared_present[labels])) if np.any(labels) else 0.0
    return 0.5 * (fa + md)


def _balanced_error_se(declared_present: np.ndarray, labels: np.ndarray) -> float:
    fa_n = max(int(np.sum(~labels)), 1)
    md_n = max(int(np.sum(labels)), 1)
    fa = float(np.mean(declared_present[~labels])) if np.any(~labels) else 0.0
    md = float(np.mean(~declared_present[labels])) if np.any(labels) else 0.0
    var = fa * (1.0 - fa) / fa_n + md * (1.0 - md) / md_n
    return 0.5 * math.sqrt(var)


def rescale_plan(p: ProtocolParams, factor: float) -> ProtocolParams:
    """Shrink a plan by ~factor while preserving q and mu.

    The repetition count is divided by factor (floored at 1), d follows
    as k * b, and the pair count follows from the preserved q up to
    integer rounding. Both predictions are recomputed at the new scale,
    so bound comparisons against desk-scale simulations stay
    apples-to-apples.
    """
    if factor <= 0.0 or not math.isfinite(factor):
        raise ParameterError(f"factor must be finite and > 0, got {factor!r}")
    if p.d == 0:
        raise ParameterError("cannot rescale a plan with no signals")
    k_new = max(1, round(p.k / factor))
    d_new = k_new * p.b
    n_new = max(d_new, round(d_new / p.q))
    q_new = d_new / n_new
    cp = click_probs(p.mu, p.channel)
    return replace(
        p,
        k=k_new,
        d=d_new,
        n_pairs=n_new,
        q=q_new,
        predicted_epsilon=detection_bias_bound(
            n_new, per_mode_relative_entropy(p.mu, p.channel.n_bar_a, q_new)
        ),
        predicted_e=message_error_prob(bit_error_prob(k_new, cp), p.b),
        running_time_s=BINS_PER_PAIR * n_new / p.rep_rate_hz,
    )
