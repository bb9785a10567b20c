"""Command-line front end: plan, simulate, eavesdrop, validate.

Every command is a pure function of (config, seed) to its output files:
no timestamps, no hidden defaults for physical constants, atomic writes,
and deterministic JSON/CSV layout, so reruns are byte-identical.

Exit codes: 0 ok, 2 config error, 3 infeasible targets, 4 security or
validation check failed.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import yaml

from . import fileio
from .codec import SharedRandomness, choose_positions, encode_message
from .exceptions import FormatError, InfeasibleError, ParameterError
from .planner import PlanRequest, ProtocolParams, plan_with_report, validate_plan
from .reliability import ChannelModel
from .simulator import (
    predicted_vote_error_rate,
    rescale_plan,
    run_distinguisher,
    simulate_monitoring,
    simulate_transmission,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_CHECK_FAILED = 4

DEFAULT_TRIALS = 1000
DEFAULT_MONITOR_INTERVALS = 20

_CHANNEL_KEYS = ("tau", "n_bar_a", "n_bar_b")
_OPTIONAL_KEYS = (
    "seed",
    "rescale",
    "trials",
    "mu_multiplier",
    "no_signals",
    "monitor_duration_s",
    "monitor_interval_s",
)
_REQUIRED_KEYS = ("message", "epsilon", "target_error", "channel", "rep_rate_hz")


def _as_float(value, key: str, lo: float, hi: float, open_hi: bool = True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        # plain YAML parses 5.0e8 as a string; the exponent needs a sign
        raise ParameterError(
            f"config key {key!r} must be a number (scientific notation "
            "needs a signed exponent, e.g. 5.0e+8)"
        )
    value = float(value)
    above = value < hi if open_hi else value <= hi
    if not (lo < value and above):
        raise ParameterError(f"config key {key!r} = {value!r} is out of range")
    return value


def load_config(path: Path) -> dict:
    """Read and schema-check one run configuration.

    Unknown keys are rejected so that a typo cannot silently fall back
    to a default; all channel constants must be given explicitly.
    """
    try:
        raw = yaml.safe_load(Path(path).read_text("utf-8"))
    except OSError as exc:
        raise ParameterError(f"cannot read config: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ParameterError(f"config is not valid YAML: {exc}") from exc
    if not isinstance(raw, dict):
        raise ParameterError("config must be a key/value mapping")
    allowed = set(_REQUIRED_KEYS) | set(_OPTIONAL_KEYS)
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ParameterError(f"unknown config keys: {', '.join(unknown)}")
    missing = sorted(k for k in _REQUIRED_KEYS if k not in raw)
    if missing:
        raise ParameterError(f"missing config keys: {', '.join(missing)}")

    cfg: dict = {}
    message = raw["message"]
    if not isinstance(message, str) or not message:
        raise ParameterError("config key 'message' must be a non-empty string")
    cfg["message"] = message
    cfg["epsilon"] = _as_float(raw["epsilon"], "epsilon", 0.0, 0.5)
    cfg["target_error"] = _as_float(raw["target_error"], "target_error", 0.0, 1.0)
    channel = raw["channel"]
    if not isinstance(channel, dict) or set(channel) != set(_CHANNEL_KEYS):
        raise ParameterError(
            "config key 'channel' must be a mapping with exactly the keys "
            + ", ".join(_CHANNEL_KEYS)
        )
    cfg["channel"] = {
        "tau": _as_float(channel["tau"], "channel.tau", 0.0, 1.0, open_hi=False),
        "n_bar_a": _as_float(channel["n_bar_a"], "channel.n_bar_a", 0.0, float("inf")),
        "n_bar_b": _as_float(channel["n_bar_b"], "channel.n_bar_b", 0.0, float("inf")),
    }
    cfg["rep_rate_hz"] = _as_float(raw["rep_rate_hz"], "rep_rate_hz", 0.0, float("inf"))

    if "seed" in raw:
        seed = raw["seed"]
        if isinstance(seed, bool) or not isinstance(seed, int) or not 0 <= seed < 2**64:
            raise ParameterError("config key 'seed' must be an integer in [0, 2^64)")
        cfg["seed"] = seed
    if "rescale" in raw:
        cfg["rescale"] = _as_float(raw["rescale"], "rescale", 0.0, float("inf"))
    if "trials" in raw:
        trials = raw["trials"]
        if isinstance(trials, bool) or not isinstance(trials, int) or trials < 100:
            raise ParameterError("config key 'trials' must be an integer >= 100")
        cfg["trials"] = trials
    if "mu_multiplier" in raw:
        cfg["mu_multiplier"] = _as_float(
            raw["mu_multiplier"], "mu_multiplier", 0.0, float("inf")
        )
    if "no_signals" in raw:
        if not isinstance(raw["no_signals"], bool):
            raise ParameterError("config key 'no_signals' must be a boolean")
        cfg["no_signals"] = raw["no_signals"]
    for key in ("monitor_duration_s", "monitor_interval_s"):
        if key in raw:
            cfg[key] = _as_float(raw[key], key, 0.0, float("inf"))
    return cfg


def resolve_config(cfg: dict, args: argparse.Namespace) -> dict:
    """Overlay command-line flags onto the file config."""
    resolved = dict(cfg)
    if getattr(args, "seed", None) is not None:
        if not 0 <= args.seed < 2**64:
            raise ParameterError("--seed must lie in [0, 2^64)")
        resolved["seed"] = args.seed
    if getattr(args, "rescale", None) is not None:
        if args.rescale <= 0:
            raise ParameterError("--rescale must be > 0")
        resolved["rescale"] = args.rescale
    if getattr(args, "trials", None) is not None:
        if args.trials < 100:
            raise ParameterError("--trials must be >= 100")
        resolved["trials"] = args.trials
    return resolved


def _require_seed(cfg: dict) -> int:
    if "seed" not in cfg:
        raise ParameterError(
            "a seed is required (config key 'seed' or flag --seed) so the "
            "run is reproducible"
        )
    return cfg["seed"]


def _request_from_config(cfg: dict) -> tuple[PlanRequest, "np.ndarray"]:
    bits = encode_message(cfg["message"])
    channel = ChannelModel(**cfg["channel"])
    req = PlanRequest(
        b=int(bits.size),
        epsilon=cfg["epsilon"],
        target_e=cfg["target_error"],
        channel=channel,
        rep_rate_hz=cfg["rep_rate_hz"],
    )
    return req, bits


def _planned_params(cfg: dict) -> tuple[ProtocolParams, PlanRequest, "np.ndarray"]:
    """Plan from the config, then apply rescale / mu_multiplier / no_signals."""
    req, bits = _request_from_config(cfg)
    params, _ = plan_with_report(req)
    if cfg.get("rescale", 1.0) != 1.0:
        params = rescale_plan(params, cfg["rescale"])
    if cfg.get("mu_multiplier", 1.0) != 1.0:
        # over-bright transmitter: actual mu deviates from the planned
        # value while the plan's claims are kept, as a real attacker or
        # hardware fault would leave them
        params = dataclasses.replace(params, mu=params.mu * cfg["mu_multiplier"])
    if cfg.get("no_signals", False):
        params = dataclasses.replace(
            params, d=0, k=0, q=0.0, predicted_epsilon=0.0, predicted_e=1.0
        )
    return params, req, bits


def format_params_table(p: ProtocolParams) -> str:
    rows = [
        ("message bits b", f"{p.b}"),
        ("detection-bias budget", f"{p.epsilon_target:g}"),
        ("message-error target", f"{p.target_e:g}"),
        ("repetition rate", f"{p.rep_rate_hz:.6g} Hz"),
        ("time bins", f"{p.bins_total:.3e}"),
        ("time-bin pairs N", f"{p.n_pairs}"),
        ("covert signals d", f"{p.d}"),
        ("repetitions per bit k", f"{p.k}"),
        ("signal fraction q", f"{p.q:.6e}"),
        ("mean photon number mu", f"{p.mu:.6e}"),
        ("transmitter noise n_bar_A", f"{p.channel.n_bar_a:.6e}"),
        ("receiver noise n_bar_B", f"{p.channel.n_bar_b:.6e}"),
        ("transmissivity tau", f"{p.channel.tau:g}"),
        ("running time", f"{p.running_time_s:.6g} s"),
        ("predicted detection bias", f"{p.predicted_epsilon:.6g}"),
        ("predicted message error", f"{p.predicted_e:.6g}"),
    ]
    width = max(len(name) for name, _ in rows)
    return "\n".join(f"{name:<{width}}  {value}" for name, value in rows)


def cmd_plan(cfg: dict, out_dir: Path) -> int:
    """Plan protocol parameters and write them as document plus table."""
    req, _ = _request_from_config(cfg)
    params, grid = plan_with_report(req)
    table = format_params_table(params)
    fileio.write_json_document(
        out_dir / "plan.json",
        "protocol_params",
        {
            "params": fileio.params_to_document(params),
            "resolved_config": cfg,
            "grid_points_evaluated": len(grid),
            "grid_points_feasible": sum(1 for g in grid if g.feasible),
        },
    )
    fileio.atomic_write_text(out_dir / "plan.txt", table + "\n")
    print(table)
    return EXIT_OK


def cmd_simulate(cfg: dict, out_dir: Path) -> int:
    """Plan, choose positions, simulate the receiver, decode, summarize."""
    seed = _require_seed(cfg)
    if cfg.get("no_signals", False):
        raise ParameterError("no_signals makes no sense for 'simulate'")
    params, _, bits = _planned_params(cfg)
    shared = SharedRandomness(seed)
    position_plan = choose_positions(shared, params.n_pairs, params.q, bits)
    transcript = simulate_transmission(params, position_plan, seed)
    stats = transcript.stats

    fileio.write_json_document(
        out_dir / "plan.json",
        "protocol_params",
        {"params": fileio.params_to_document(params), "resolved_config": cfg},
    )
    fileio.write_plan(out_dir / "plan.cvpl", position_plan)
    fileio.write_transcript_csv(out_dir / "transcript.csv", transcript)
    fileio.write_tally_csv(out_dir / "tally.csv", transcript)
    summary = {
        "sent_message": cfg["message"],
        "decoded_message": transcript.decoded,
        "exact_recovery": transcript.decoded == cfg["message"],
        "signal_probability": stats.vote_rate_per_pulse,
        "noise_probability": stats.noise_bin_click_rate,
        "error_rate": stats.vote_error_rate,
        "clicks_per_bit": stats.clicks_per_bit,
        "message_bit_error_rate": stats.message_bit_error_rate,
        "signal_bin_click_rate": stats.signal_bin_click_rate,
        "total_votes": stats.total_votes,
        "wrong_votes": stats.wrong_votes,
        "predicted_error_rate": predicted_vote_error_rate(params),
        "predicted_message_error": params.predicted_e,
        "positions_drawn": position_plan.d_prime,
        "repetitions_per_bit": position_plan.k_prime,
        "resolved_config": cfg,
        "params": fileio.params_to_document(params),
    }
    fileio.write_json_document(out_dir / "summary.json", "transmission_summary", summary)
    print(f"sent:    {cfg['message']}")
    print(f"decoded: {transcript.decoded}")
    print(
        f"signal probability {stats.vote_rate_per_pulse:.4e}, "
        f"noise probability {stats.noise_bin_click_rate:.4e}, "
        f"error rate {stats.vote_error_rate:.4%}, "
        f"clicks/bit {stats.clicks_per_bit:.2f}"
    )
    return EXIT_OK


def cmd_eavesdrop(cfg: dict, out_dir: Path) -> int:
    """Simulate the adversary: monitoring traces plus best-detector error."""
    seed = _require_seed(cfg)
    params, _, _ = _planned_params(cfg)
    duration = cfg.get(
        "monitor_duration_s",
        params.running_time_s,
    )
    interval = cfg.get("monitor_interval_s", duration / DEFAULT_MONITOR_INTERVALS)
    trace_on = simulate_monitoring(params, True, duration, interval, seed)
    trace_off = simulate_monitoring(params, False, duration, interval, seed)
    fileio.write_monitor_csv(out_dir / "monitor_on.csv", trace_on)
    fileio.write_monitor_csv(out_dir / "monitor_off.csv", trace_off)

    trials = cfg.get("trials", DEFAULT_TRIALS)
    result = run_distinguisher(params, trials, seed)
    passed = result.security_check()
    ci = 1.96 * result.std_error
    fileio.write_json_document(
        out_dir / "report.json",
        "eavesdrop_report",
        {
            "verdict": "PASS" if passed else "FAIL",
            "empirical_pe": result.empirical_pe,
            "empirical_pe_ci95": [result.empirical_pe - ci, result.empirical_pe + ci],
            "empirical_bias": result.empirical_bias,
            "std_error": result.std_error,
            "bound_epsilon": result.bound_epsilon,
            "trials": result.trials,
            "pe_count_threshold": result.pe_count_threshold,
            "pe_likelihood_ratio": result.pe_likelihood_ratio,
            "count_threshold": result.count_threshold,
            "resolved_config": cfg,
            "params": fileio.params_to_document(params),
        },
    )
    print(
        f"security check: {'PASS' if passed else 'FAIL'} "
        f"(empirical bias {result.empirical_bias:.4f} vs bound "
        f"{result.bound_epsilon:.4f} + 3 sigma = "
        f"{result.bound_epsilon + 3 * result.std_error:.4f})"
    )
    return EXIT_OK if passed else EXIT_CHECK_FAILED


def cmd_validate(cfg: dict, out_dir: Path) -> int:
    """Re-check a previously written plan document against the config targets."""
    req, _ = _request_from_config(cfg)
    doc = fileio.read_json_document(out_dir / "plan.json", "protocol_params")
    params = fileio.params_from_document(doc["params"])
    if params.b != req.b:
        raise ParameterError(
            f"plan document carries b = {params.b} but the config message "
            f"needs b = {req.b}"
        )
    report = validate_plan(params, req)
    fileio.write_json_document(
        out_dir / "validate.json",
        "validation_report",
        {
            "passed": report.passed,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "value": c.value,
                    "limit": c.limit,
                }
                for c in report.checks
            ],
            "resolved_config": cfg,
        },
    )
    for c in report.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.value:.6g} vs {c.limit:.6g}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


_COMMANDS = {
    "plan": cmd_plan,
    "simulate": cmd_simulate,
    "eavesdrop": cmd_eavesdrop,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covertlink",
        description="Covert optical communication planning and simulation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "plan": "compute protocol parameters for a config",
        "simulate": "run one seeded transmission and decode it",
        "eavesdrop": "simulate the adversary and check the bias bound",
        "validate": "re-check a written plan document against its targets",
    }
    for name, help_text in specs.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, type=Path, help="YAML run config")
        p.add_argument(
            "--out", type=Path, default=Path("out"), help="output directory"
        )
        p.add_argument(
            "--seed",
            type=int,
            default=None,
            help="master seed (overrides the config; required by "
            "simulate/eavesdrop)",
        )
        if name in ("simulate", "eavesdrop"):
            p.add_argument(
                "--rescale",
                type=float,
                default=None,
                help="desk-scale shrink factor applied to the plan",
            )
        if name == "eavesdrop":
            p.add_argument(
                "--trials",
                type=int,
                default=None,
                help="distinguisher Monte-Carlo trials (>= 100)",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(load_config(args.config), args)
        return _COMMANDS[args.command](cfg, args.out)
    except (ParameterError, FormatError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
