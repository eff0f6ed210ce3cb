"""Explicit-state workbench for a probabilistic process-calculus model of
committee-based binary consensus."""

from .calculus import (
    TAU,
    ActionLabel,
    Environment,
    ProcessTerm,
    UnresolvedCallError,
    act,
    alphabet,
    as_prob,
    call,
    choice,
    choice_of,
    hide,
    nil,
    parallel,
    prefix,
    prob_act,
    prob_choice,
    restrict,
    successors,
)
from .lts import (
    ExploreLimits,
    LimitExceededError,
    Lts,
    commit_discipline_ok,
    cut_labels,
    explore,
    hide_labels,
    reachable_gates,
)
from .aut import AutFormatError, read_aut, write_aut
from .equivalence import (
    EquivalenceKind,
    Partition,
    Verdict,
    brute_force_bisim,
    compare,
    compute_partition,
    minimize,
)
from .model import (
    ModelParams,
    StepClass,
    build_counter,
    build_honest_node,
    build_malicious_node,
    build_network,
    committee_prob,
    gc_success_prob,
    make_params,
)
from .montecarlo import (
    RoundOutcome,
    SimStats,
    StepCapExceededError,
    estimate,
    run_round,
)
from .noninterference import NiVerdict, bsnni

__all__ = [
    "ActionLabel", "AutFormatError", "Environment", "EquivalenceKind",
    "ExploreLimits", "LimitExceededError", "Lts", "ModelParams", "NiVerdict",
    "Partition", "ProcessTerm", "RoundOutcome", "SimStats",
    "StepCapExceededError", "StepClass", "TAU", "UnresolvedCallError",
    "Verdict", "act", "alphabet", "as_prob", "brute_force_bisim", "bsnni",
    "build_counter", "build_honest_node", "build_malicious_node",
    "build_network", "call", "choice", "choice_of", "commit_discipline_ok",
    "committee_prob", "compare", "compute_partition", "cut_labels", "estimate",
    "explore", "gc_success_prob", "hide", "hide_labels", "make_params",
    "minimize", "nil", "parallel", "prefix", "prob_act", "prob_choice",
    "read_aut", "reachable_gates", "restrict", "run_round", "successors",
    "write_aut",
]
