"""Covert optical communication over a noisy channel: planning and simulation.

The package is organized around one workflow: model the photon-number
statistics of pulse and background (fock_stats), bound how detectable a
transmission is (security), predict how reliably it decodes
(reliability), search for the cheapest parameters meeting both targets
(planner), lay message bits onto secret time-bin positions (codec), and
exercise the whole thing, including the adversary, with seeded
Monte-Carlo (simulator). The cli module exposes the four workflows as
subcommands.
"""

from .codec import (
    ALPHABET,
    BITS_PER_CHAR,
    PositionPlan,
    SharedRandomness,
    choose_positions,
    decode_bits,
    encode_message,
    majority_decode,
)
from .exceptions import (
    CovertLinkError,
    FormatError,
    InfeasibleError,
    ParameterError,
    SecurityCheckError,
)
from .fock_stats import (
    FockDistribution,
    convolve,
    mix,
    poisson_pmf,
    relative_entropy,
    thermal_pmf,
)
from .planner import (
    PlanRequest,
    ProtocolParams,
    plan,
    plan_with_report,
    validate_plan,
)
from .reliability import (
    ChannelModel,
    ClickProbabilities,
    bit_error_prob,
    click_probs,
    message_error_prob,
    min_repetitions,
)
from .security import (
    BINS_PER_PAIR,
    detection_bias_bound,
    min_pairs_for_budget,
    per_mode_relative_entropy,
    per_mode_states,
)
from .simulator import (
    DistinguisherResult,
    MonitorTrace,
    Transcript,
    rescale_plan,
    run_distinguisher,
    simulate_monitoring,
    simulate_transmission,
)

__version__ = "0.1.0"

__all__ = [
    "ALPHABET",
    "BINS_PER_PAIR",
    "BITS_PER_CHAR",
    "ChannelModel",
    "ClickProbabilities",
    "CovertLinkError",
    "DistinguisherResult",
    "FockDistribution",
    "FormatError",
    "InfeasibleError",
    "MonitorTrace",
    "ParameterError",
    "PlanRequest",
    "PositionPlan",
    "ProtocolParams",
    "SecurityCheckError",
    "SharedRandomness",
    "Transcript",
    "bit_error_prob",
    "choose_positions",
    "click_probs",
    "convolve",
    "decode_bits",
    "detection_bias_bound",
    "encode_message",
    "majority_decode",
    "message_error_prob",
    "min_pairs_for_budget",
    "min_repetitions",
    "mix",
    "per_mode_relative_entropy",
    "per_mode_states",
    "plan",
    "plan_with_report",
    "poisson_pmf",
    "relative_entropy",
    "rescale_plan",
    "run_distinguisher",
    "simulate_monitoring",
    "simulate_transmission",
    "thermal_pmf",
    "validate_plan",
    "__version__",
]
