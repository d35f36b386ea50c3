"""Command-line front end for reproducible betting-game experiments.

Subcommands: simulate, test, alternative, transform, combine, condition.
Exit codes: 0 ok/retained, 1 rejected (or a failed equality verdict),
2 usage or input error, 3 total conflict.

Reproducibility rules: all inputs come from flags or an explicit config
file (flags win; the environment is never consulted), outputs are built in
memory and written in one step so error paths leave no partial files, and
identical configuration plus seed yields byte-identical output.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .belief import (
    TotalConflictError,
    canonical_mapping,
    dempster_combine_masses,
    condition_mapping,
    independent_combination,
    mass_from_belief,
    mass_to_text,
    parse_mapping_text,
    parse_mass_text,
)
from .conditioning import (
    CELLS,
    evaluate_payoff,
    parse_scenario,
    transform_strategy,
)
from .engine import (
    FORECASTING,
    MARKET,
    ProtocolError,
    play_forecasting_game,
    play_market_game,
    read_transcript,
    transcript_to_text,
)
from .strategies import (
    REGISTRY,
    JointDistribution,
    StrategyDescriptor,
    build_strategy,
)
from .villetest import implied_alternative, ville_test


def _write_text(path: str, text: str) -> None:
    # Single write of fully built content: no partial files on error paths.
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text)


def _read_text(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _bool_text(value: bool) -> str:
    return "true" if value else "false"


# ---------------------------------------------------------------------------
# Experiment configuration: key=value lines, overridden by command flags.


@dataclass
class ExperimentConfig:
    """Resolved inputs for one simulate run."""

    protocol: str = FORECASTING
    rounds: int = 100
    k0: float = 1.0
    seed: Optional[int] = None
    replications: int = 1
    jobs: int = 1
    enforce_safety: bool = True
    out: Optional[str] = None
    descriptors: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.protocol not in (FORECASTING, MARKET):
            raise ValueError(f"unknown protocol {self.protocol!r}")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if not self.k0 > 0:
            raise ValueError("k0 must be positive")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        for descriptor in self.descriptors.values():
            build_strategy(descriptor)  # names and parameter domains checked


_ROLE_FLAGS = {
    FORECASTING: ("forecaster", "skeptic", "reality"),
    MARKET: ("market-open", "speculator", "market-close"),
}

_DEFAULT_PLAYERS = {
    "forecaster": "constant:p=0.5",
    "skeptic": "zero",
    "reality": "iid:theta=0.5",
    "market-open": "constant:price=1",
    "speculator": "zero",
    "market-close": "constant:price=1",
}


def _parse_config_file(path: str) -> dict:
    values: dict = {}
    for raw in _read_text(path).splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ValueError(f"malformed config line {raw!r}")
        values[key.strip()] = value.strip()
    return values


def _resolve_simulate_config(args) -> ExperimentConfig:
    file_values = _parse_config_file(args.config) if args.config else {}

    def pick(flag_value, key, default, convert):
        if flag_value is not None:
            return flag_value
        if key in file_values:
            return convert(file_values[key])
        return default

    config = ExperimentConfig(
        protocol=pick(args.protocol, "protocol", FORECASTING, str),
        rounds=pick(args.rounds, "rounds", 100, int),
        k0=pick(args.k0, "k0", 1.0, float),
        seed=pick(args.seed, "seed", None, int),
        replications=pick(args.replications, "replications", 1, int),
        jobs=pick(args.jobs, "jobs", 1, int),
        enforce_safety=pick(
            args.enforce_safety, "enforce_safety", True,
            lambda v: v.lower() in ("true", "yes", "1"),
        ),
        out=pick(args.out, "out", None, str),
    )
    for role in _ROLE_FLAGS[config.protocol]:
        flag_value = getattr(args, role.replace("-", "_"))
        text = pick(flag_value, role, _DEFAULT_PLAYERS[role], str)
        config.descriptors[role] = StrategyDescriptor.from_string(role, text)
    config.validate()
    return config


def _replication_seed(seed: Optional[int], replication: int) -> Optional[int]:
    """Deterministic per-replication game seed: the first 64-bit word of
    ``SeedSequence([seed, replication])``."""
    if seed is None:
        return None
    state = np.random.SeedSequence([seed, replication]).generate_state(1, np.uint64)
    return int(state[0])


def _play_from_config(config: ExperimentConfig, game_seed: Optional[int]):
    players = {
        role: build_strategy(descriptor)
        for role, descriptor in config.descriptors.items()
    }
    if config.protocol == FORECASTING:
        return play_forecasting_game(
            players["forecaster"], players["skeptic"], players["reality"],
            config.rounds, config.k0,
            enforce_safety=config.enforce_safety, seed=game_seed,
        )
    return play_market_game(
        players["market-open"], players["speculator"], players["market-close"],
        config.rounds, config.k0, seed=game_seed,
    )


def _summary_line(transcript, prefix: str = "") -> str:
    clamped = sum(
        1 for r in transcript.rounds if getattr(r, "clamped", False)
    )
    fields = [
        f"protocol={transcript.protocol}",
        f"rounds={transcript.n_rounds}",
        f"final_capital={float(transcript.final_capital)!r}",
        f"went_negative={_bool_text(transcript.capital_went_negative)}",
        f"safety_enforced={_bool_text(transcript.safety_enforced)}",
        f"clamped_rounds={clamped}",
    ]
    return prefix + " ".join(fields)


def _run_replication(payload) -> str:
    config_fields, replication = payload
    config = ExperimentConfig(**config_fields)
    transcript = _play_from_config(config, _replication_seed(config.seed, replication))
    return _summary_line(transcript, prefix=f"replication={replication} ")


def cmd_simulate(args) -> int:
    config = _resolve_simulate_config(args)
    if config.replications == 1:
        transcript = _play_from_config(config, config.seed)
        if config.out:
            _write_text(config.out, transcript_to_text(transcript))
        else:
            sys.stdout.write(transcript_to_text(transcript))
        print(_summary_line(transcript))
        return 0
    config_fields = {
        "protocol": config.protocol,
        "rounds": config.rounds,
        "k0": config.k0,
        "seed": config.seed,
        "enforce_safety": config.enforce_safety,
        "descriptors": config.descriptors,
    }
    payloads = [(config_fields, rep) for rep in range(config.replications)]
    if config.jobs > 1:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            lines = list(pool.map(_run_replication, payloads))
    else:
        lines = [_run_replication(p) for p in payloads]
    lines.sort(key=lambda line: int(line.split()[0].split("=")[1]))
    text = "\n".join(lines) + "\n"
    if config.out:
        _write_text(config.out, text)
    else:
        sys.stdout.write(text)
    print(f"replications={config.replications} done=true")
    return 0


def cmd_test(args) -> int:
    transcript = read_transcript(args.transcript)
    result = ville_test(transcript, args.alpha)
    for line in result.to_kv_lines():
        print(line)
    return 1 if result.rejected else 0


def cmd_alternative(args) -> int:
    if (args.dist is None) == (args.theta is None):
        raise ValueError("provide exactly one of --dist or --theta")
    exact = args.mode == "rational"
    if args.dist is not None:
        dist = JointDistribution.from_table_lines(
            _read_text(args.dist).splitlines(), exact=exact
        )
    else:
        if args.rounds is None:
            raise ValueError("--theta requires --rounds")
        dist = JointDistribution.iid(args.theta, args.rounds).to_dense()
    descriptor = StrategyDescriptor.from_string("skeptic", args.skeptic)
    skeptic = build_strategy(descriptor, exact=exact)
    alternative = implied_alternative(skeptic, dist, mode=args.mode)
    text = "\n".join(alternative.to_table_lines()) + "\n"
    if args.out:
        _write_text(args.out, text)
    else:
        sys.stdout.write(text)
    print(f"rounds={alternative.n} sequences={1 << alternative.n} total={float(sum(alternative.weights))!r}")
    return 0


def cmd_transform(args) -> int:
    scenario = parse_scenario(_read_text(args.scenario))
    prices = scenario.prices
    original = scenario.strategy
    transformed = transform_strategy(original, prices)
    rows = []
    all_equal = True
    for cell in CELLS:
        before = evaluate_payoff(original, cell, prices)
        after = evaluate_payoff(transformed, cell, prices)
        equal = before == after
        all_equal = all_equal and equal
        rows.append((cell.value, before, after, equal))
    block_cost = transformed.initial_cost() - original.initial_cost()
    lines = []
    if args.pretty:
        lines.append(f"{'outcome':<12} {'initial+later':>16} {'initial-only':>16}")
        for name, before, after, _ in rows:
            lines.append(f"{name:<12} {str(before):>16} {str(after):>16}")
    else:
        for name, before, after, equal in rows:
            lines.append(f"cell={name} original={before} transformed={after} equal={_bool_text(equal)}")
    lines.append(f"added_block_cost={block_cost}")
    lines.append(f"learned_A_only={_bool_text(scenario.learned_a_only)}")
    lines.append(f"verdict={'PASS' if all_equal and block_cost == 0 else 'FAIL'}")
    text = "\n".join(lines) + "\n"
    if args.out:
        _write_text(args.out, text)
    sys.stdout.write(text)
    return 0 if all_equal and block_cost == 0 else 1


def _combined_result(args):
    exact = args.mode == "rational"
    if args.rule == "condition":
        if len(args.inputs) != 1:
            raise ValueError("--rule condition takes exactly one mapping file")
        mapping = parse_mapping_text(_read_text(args.inputs[0]), exact=exact)
        return mass_from_belief(condition_mapping(mapping))
    if len(args.inputs) != 2:
        raise ValueError(f"--rule {args.rule} takes exactly two mass files")
    m1 = parse_mass_text(_read_text(args.inputs[0]), exact=exact)
    m2 = parse_mass_text(_read_text(args.inputs[1]), exact=exact)
    if args.rule == "dempster":
        return dempster_combine_masses(m1, m2)
    if args.rule == "independent":
        belief = independent_combination(canonical_mapping(m1), canonical_mapping(m2))
        return mass_from_belief(belief)
    raise ValueError(f"unknown rule {args.rule!r}")


def cmd_combine(args) -> int:
    result = _combined_result(args)
    text = mass_to_text(result)
    if args.out:
        _write_text(args.out, text)
    sys.stdout.write(text)
    conflict = result.conflict if result.conflict is not None else 0
    print(f"conflict={conflict}")
    return 0


def cmd_condition(args) -> int:
    exact = args.mode == "rational"
    mapping = parse_mapping_text(_read_text(args.mapping), exact=exact)
    result = mass_from_belief(condition_mapping(mapping))
    text = mass_to_text(result)
    if args.out:
        _write_text(args.out, text)
    sys.stdout.write(text)
    print(f"conflict={result.conflict}")
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gameprob",
        description="Betting-game probability experiments",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    registry_help = "; ".join(
        f"{role}: {', '.join(names)}" for role, names in REGISTRY.items()
    )
    sim = sub.add_parser("simulate", help="play a game and write its transcript")
    sim.add_argument("--protocol", choices=(FORECASTING, MARKET))
    sim.add_argument("--config", help="key=value config file; flags override it")
    sim.add_argument("--rounds", type=int)
    sim.add_argument("--k0", type=float)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--replications", type=int)
    sim.add_argument("--jobs", type=int)
    sim.add_argument("--enforce-safety", dest="enforce_safety",
                     action=argparse.BooleanOptionalAction, default=None)
    sim.add_argument("--out")
    for role in ("forecaster", "skeptic", "reality",
                 "market-open", "speculator", "market-close"):
        sim.add_argument(f"--{role}", dest=role.replace("-", "_"), metavar="NAME[:k=v,...]",
                         help=f"strategy descriptor ({registry_help})")
    sim.set_defaults(func=cmd_simulate)

    test = sub.add_parser("test", help="run the capital test on a transcript")
    test.add_argument("transcript")
    test.add_argument("--alpha", type=float, required=True)
    test.set_defaults(func=cmd_test)

    alt = sub.add_parser("alternative", help="enumerate the implied alternative")
    alt.add_argument("--skeptic", required=True, metavar="NAME[:k=v,...]")
    alt.add_argument("--theta", type=float)
    alt.add_argument("--rounds", type=int)
    alt.add_argument("--dist", help="distribution table file (bits weight per line)")
    alt.add_argument("--mode", choices=("float", "rational"), default="float")
    alt.add_argument("--out")
    alt.set_defaults(func=cmd_alternative)

    trans = sub.add_parser("transform", help="verify a two-stage strategy substitution")
    trans.add_argument("scenario")
    trans.add_argument("--out")
    trans.add_argument("--pretty", action="store_true",
                       help="aligned human-readable table instead of key=value rows")
    trans.set_defaults(func=cmd_transform)

    comb = sub.add_parser("combine", help="combine two evidence files")
    comb.add_argument("inputs", nargs="+")
    comb.add_argument("--rule", choices=("dempster", "independent", "condition"),
                      default="dempster")
    comb.add_argument("--mode", choices=("float", "rational"), default="float")
    comb.add_argument("--out")
    comb.set_defaults(func=cmd_combine)

    cond = sub.add_parser("condition", help="condition a mapping with empty images")
    cond.add_argument("mapping")
    cond.add_argument("--mode", choices=("float", "rational"), default="float")
    cond.add_argument("--out")
    cond.set_defaults(func=cmd_condition)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except TotalConflictError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"conflict={exc.kappa}", file=sys.stderr)
        return 3
    except (ValueError, ProtocolError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
