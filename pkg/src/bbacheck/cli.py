"""Command-line interface: explore, compare, bsnni, query, simulate.

Exit codes are a stable contract: 0 success/PASS, 1 property FAIL,
2 usage or internal error.
"""
from __future__ import annotations

import argparse
import os
import sys

from .aut import AutFormatError, read_aut_file, write_aut
from .calculus import UnresolvedCallError, as_prob
from .equivalence import EquivalenceKind, compare
from .lts import (
    ExploreLimits,
    LimitExceededError,
    explore,
    states_after,
    states_that_reach_gate,
)
from .model import build_network, load_params_file, make_params
from .montecarlo import StepCapExceededError, estimate, format_stats
from .noninterference import bsnni
from .pipeline import network_bsnni, reduced_network

CONFIG_ENV_VAR = "BBACHECK_CONFIG"

_PARAM_FLAGS = (
    ("honest", "n_honest", int),
    ("malicious", "n_malicious", int),
    ("committee", "committee_size", int),
    ("threshold", "vote_threshold", int),
    ("p_in", "p_in", as_prob),
    ("h_fraction", "h_fraction", as_prob),
    ("p_zero", "p_zero", as_prob),
)


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--honest", type=int, help="number of honest nodes (default 4)")
    p.add_argument("--malicious", type=int, help="number of malicious nodes (default 0)")
    p.add_argument("--committee", type=int, help="expected committee size (default 3)")
    p.add_argument("--threshold", type=int,
                   help="votes needed to commit (default ceil(2/3 * committee))")
    p.add_argument("--p-in", dest="p_in",
                   help="committee-membership probability (default committee/population)")
    p.add_argument("--h", dest="h_fraction",
                   help="honest stake fraction used to derive --p-zero (default 0.8)")
    p.add_argument("--p-zero", dest="p_zero",
                   help="probability of initial bit 0 (default h^2*(1+h-h^2))")
    p.add_argument("--config", help="key = value parameter file "
                                    f"(default from ${CONFIG_ENV_VAR})")


def _add_limit_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--max-states", type=int, default=5_000_000)
    p.add_argument("--max-transitions", type=int, default=20_000_000)


def _resolve_params(args):
    """Precedence: CLI flag > config file > built-in defaults."""
    overrides = {}
    config_path = args.config or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        overrides.update(load_params_file(config_path))
    for attr, kwarg, conv in _PARAM_FLAGS:
        value = getattr(args, attr, None)
        if value is not None:
            overrides[kwarg] = conv(value)
    return make_params(**overrides)


def _explored(args):
    params = _resolve_params(args)
    limits = ExploreLimits(args.max_states, args.max_transitions)
    term, env = build_network(params)
    return explore(term, env, limits)


def cmd_explore(args) -> int:
    lts = _explored(args)
    counts = f"states={lts.num_states} transitions={len(lts.transitions)}"
    if args.output:
        with open(args.output, "w", encoding="ascii") as fh:
            fh.write(write_aut(lts))
        print(counts)
    else:
        sys.stdout.write(write_aut(lts))
        print(counts, file=sys.stderr)
    return 0


def cmd_compare(args) -> int:
    l1 = read_aut_file(args.file1)
    l2 = read_aut_file(args.file2)
    verdict = compare(l1, l2, args.kind)
    if verdict.equivalent:
        print("PASS")
        return 0
    print("FAIL")
    if verdict.witness:
        print("witness: " + "; ".join(repr(lab) for lab in verdict.witness))
    return 1


def cmd_bsnni(args) -> int:
    high = frozenset(g.strip().lower() for g in args.high.split(",") if g.strip())
    kinds = ([EquivalenceKind(args.kind)] if args.kind
             else [EquivalenceKind.WEAK, EquivalenceKind.BRANCHING])
    limits = ExploreLimits(args.max_states, args.max_transitions)
    if args.strategy == "direct":
        lts = _explored(args)
        print(f"model: states={lts.num_states} "
              f"transitions={len(lts.transitions)} (direct)", file=sys.stderr)
        verdicts = [bsnni(lts, high, kind) for kind in kinds]
    else:
        params = _resolve_params(args)
        verdicts = [network_bsnni(params, kind, high, limits) for kind in kinds]
    all_pass = True
    for verdict in verdicts:
        print(f"operands ({verdict.kind.value}): cut={verdict.cut_size} "
              f"hide={verdict.hide_size}", file=sys.stderr)
        print(f"{verdict.kind.value.upper()}_BSNNI: "
              f"{'PASS' if verdict.passed else 'FAIL'}")
        all_pass = all_pass and verdict.passed
    return 0 if all_pass else 1


def cmd_query(args) -> int:
    lts = read_aut_file(args.file)
    gate = args.gate.lower()
    if gate not in lts.gates():
        print(f"warning: gate {args.gate!r} does not occur in the system",
              file=sys.stderr)
    can_reach = states_that_reach_gate(lts, gate)
    if args.after is None:
        if lts.initial in can_reach:
            print("reachable")
            return 0
        print("unreachable")
        return 1
    after = args.after.lower()
    starts = states_after(lts, after)
    if not starts:
        print(f"warning: no {args.after!r} transitions in the system",
              file=sys.stderr)
        print("unreachable")
        return 1
    hits = sum(1 for s in starts if s in can_reach)
    if hits == len(starts):
        print("reachable")
        return 0
    if hits == 0:
        print("unreachable")
    else:
        print(f"partially reachable ({hits}/{len(starts)})")
    return 1


def cmd_simulate(args) -> int:
    if args.trials < 1:
        print("error: --trials must be at least 1", file=sys.stderr)
        return 2
    params = _resolve_params(args)
    stats = estimate(params, adversary=args.adversary, trials=args.trials,
                     seed=args.seed, scheduler=args.scheduler)
    print(format_stats(stats))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bbacheck",
        description="Explore, check, and simulate the committee-consensus model.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("explore", help="generate the state space as .aut text")
    _add_model_args(p)
    _add_limit_args(p)
    p.add_argument("-o", "--output", help="output .aut path (default: stdout)")
    p.set_defaults(func=cmd_explore)

    p = sub.add_parser("compare", help="compare two .aut files for bisimilarity")
    p.add_argument("file1")
    p.add_argument("file2")
    p.add_argument("--kind", choices=["strong", "weak", "branching"],
                   default="strong")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bsnni",
                       help="noninterference check: cut vs hide of the high gates")
    _add_model_args(p)
    _add_limit_args(p)
    p.add_argument("--high", default="boycott",
                   help="comma-separated high-level gates (default: boycott)")
    p.add_argument("--kind", choices=["strong", "weak", "branching"],
                   help="check a single kind (default: weak and branching)")
    p.add_argument("--strategy", choices=["compositional", "direct"],
                   default="compositional",
                   help="compositional: per-node exploration with "
                        "bisimulation reduction at every composition step "
                        "(verdict-preserving, fits the four-node networks in "
                        "memory); direct: one flat exploration")
    p.set_defaults(func=cmd_bsnni)

    p = sub.add_parser("query", help="gate reachability in a .aut file")
    p.add_argument("file")
    p.add_argument("gate")
    p.add_argument("--after", help="check reachability from every state entered "
                                   "by a transition with this gate")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("simulate", help="Monte Carlo round-outcome statistics")
    _add_model_args(p)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--adversary", default="never-boycott",
                   help="never-boycott | always-boycott | probabilistic:<q>")
    p.add_argument("--scheduler", choices=["uniform", "first"], default="uniform")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (AutFormatError, LimitExceededError, UnresolvedCallError,
            StepCapExceededError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
