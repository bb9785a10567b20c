"""Detection-bias bound for covert transmission and its inversions.

The adversary's advantage over random guessing is bounded by
sqrt(n_pairs * D / 8), where D is the per-mode relative entropy between
the channel's idle state and its state during covert transmission. This
module assembles those two states from protocol parameters, evaluates
the bound, and inverts it to find the smallest number of time-bin pairs
meeting a covertness budget.

Convention: counts here are time-bin PAIRS; each pair contributes
BINS_PER_PAIR raw time bins when converted to wall-clock duration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .exceptions import InfeasibleError, ParameterError
from .fock_stats import (
    FockDistribution,
    RelativeEntropy,
    convolve,
    mix,
    poisson_pmf,
    relative_entropy,
    thermal_pmf,
)

BINS_PER_PAIR = 2

# States entering the security bound are truncated far below the default
# tolerance: the bound lives at D ~ 1e-16 and a 1e-15 tail would shift
# its sixth significant figure.
SECURITY_TRUNC_TOL = 1e-30

DEFAULT_PAIR_CEILING = 10**16


@dataclass(frozen=True)
class ModePair:
    """Count of time-bin pairs; bins_total is the raw bin count."""

    n_pairs: int

    def __post_init__(self):
        if not isinstance(self.n_pairs, int) or self.n_pairs < 1:
            raise ParameterError(f"n_pairs must be an integer >= 1, got {self.n_pairs!r}")

    @property
    def bins_total(self) -> int:
        return BINS_PER_PAIR * self.n_pairs


def per_mode_states(
    mu: float,
    n_bar_a: float,
    q: float,
    trunc_tol: float = SECURITY_TRUNC_TOL,
) -> tuple[FockDistribution, FockDistribution]:
    """Idle and in-protocol per-mode states seen on the channel.

    Args:
        mu: mean photon number of the covert pulse.
        n_bar_a: mean photon number of the background at the sender's output.
        q: per-pair probability of sending a signal.
        trunc_tol: truncation tolerance for the underlying distributions.

    Returns:
        (rho, sigma): rho is the background state; sigma mixes in the
        signal-plus-background state with weight q.
    """
    rho = thermal_pmf(n_bar_a, trunc_tol)
    rho_s = convolve(poisson_pmf(mu, trunc_tol), thermal_pmf(n_bar_a, trunc_tol))
    return rho, mix(rho, rho_s, q)


def per_mode_relative_entropy(
    mu: float,
    n_bar_a: float,
    q: float,
    trunc_tol: float = SECURITY_TRUNC_TOL,
) -> RelativeEntropy:
    rho, sigma = per_mode_states(mu, n_bar_a, q, trunc_tol)
    return relative_entropy(rho, sigma)


def detection_bias_bound(n_pairs: int, d_per_mode: float) -> float:
    """Upper bound sqrt(n_pairs * d_per_mode / 8) on the adversary's bias.

    Args:
        n_pairs: number of time-bin pairs available, >= 1.
        d_per_mode: per-mode relative entropy in nats, >= 0.
    """
    if n_pairs < 1:
        raise ParameterError(f"n_pairs must be >= 1, got {n_pairs!r}")
    d_per_mode = float(d_per_mode)
    if not d_per_mode >= 0.0:
        raise ParameterError(f"d_per_mode must be >= 0, got {d_per_mode!r}")
    return math.sqrt(n_pairs * d_per_mode / 8.0)


def _check_budget(epsilon: float) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 0.5:
        raise ParameterError(f"detection-bias budget must lie in (0, 0.5), got {epsilon!r}")
    return epsilon


def bias_for_protocol(n_pairs: int, d_signals: int, mu: float, n_bar_a: float) -> float:
    """Detection-bias bound for sending d_signals over n_pairs pairs."""
    q = d_signals / n_pairs
    return detection_bias_bound(n_pairs, per_mode_relative_entropy(mu, n_bar_a, q))


def min_pairs_for_budget(
    epsilon: float,
    d_signals: int,
    mu: float,
    n_bar_a: float,
    ceiling: int = DEFAULT_PAIR_CEILING,
) -> ModePair:
    """Smallest pair count N whose detection-bias bound meets the budget.

    The bound evaluated at q = d/N is non-increasing in N: the per-mode
    divergence is convex in q with D(0) = 0, so N * D(d/N) cannot grow
    with N. Integer bisection on [d, ceiling] is therefore exact; the
    returned N is verified against N - 1.

    Args:
        epsilon: covertness budget, in (0, 0.5).
        d_signals: number of covert signals to hide, >= 0.
        mu: pulse mean photon number.
        n_bar_a: background mean photon number at the sender's output.
        ceiling: largest N considered before declaring infeasibility.

    Raises:
        InfeasibleError: no N <= ceiling satisfies the budget.
    """
    epsilon = _check_budget(epsilon)
    if d_signals < 0:
        raise ParameterError(f"d_signals must be >= 0, got {d_signals!r}")
    if d_signals == 0:
        return ModePair(1)

    rho = thermal_pmf(n_bar_a, SECURITY_TRUNC_TOL)
    rho_s = convolve(
        poisson_pmf(mu, SECURITY_TRUNC_TOL), thermal_pmf(n_bar_a, SECURITY_TRUNC_TOL)
    )

    def bound(n_pairs: int) -> float:
        sigma = mix(rho, rho_s, d_signals / n_pairs)
        return detection_bias_bound(n_pairs, relative_entropy(rho, sigma))

    lo = max(1, d_signals)  # q = d/N is a probability, so N >= d
    if bound(lo) <= epsilon:
        return ModePair(lo)
    hi = lo
    while bound(hi) > epsilon:
        if hi >= ceiling:
            raise InfeasibleError(
                f"no pair count up to {ceiling:.3g} meets detection-bias budget "
                f"{epsilon} for d={d_signals}, mu={mu}"
            )
        hi = min(2 * hi, ceiling)
    # invariant: bound(lo) > epsilon >= bound(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) > epsilon:
            lo = mid
        else:
            hi = mid
    if bound(hi) > epsilon or (hi > max(1, d_signals) and bound(hi - 1) <= epsilon):
        raise InfeasibleError("bisection postcondition failed; bound not monotone here")
    return ModePair(hi)
