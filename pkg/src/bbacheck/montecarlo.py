"""Stochastic execution of the consensus model.

The simulator resolves probabilistic branches by sampling their exact
weights and resolves the remaining nondeterminism with a declared scheduler:

* probabilistic branches take priority over interleaving choices whenever
  both are enabled; when several probabilistic choices are pending, one
  branch is drawn with probability proportional to its weight (equivalent
  to picking a pending choice uniformly and then sampling it);
* other transitions are picked uniformly at random ("uniform") or by
  canonical first-successor order ("first", which makes a run a Markov
  chain and comparable against an exact solve);
* the malicious group's stance is drawn once per round at the block
  proposal: with the configured probability it joins the boycott whenever
  that is enabled, otherwise it refuses it for the whole round.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .calculus import PROB_GATE, Environment, ProcessTerm, as_prob, successors
from .lts import Lts
from .model import (
    BOYCOTT,
    COMMIT_EMPTY_BLOCK,
    COMMIT_PROPOSED_BLOCK,
    RECEIVE_BLOCK_PROPOSAL,
    SYNC,
    ModelParams,
    build_network,
)

DEFAULT_STEP_CAP = 10_000

_SCHEDULERS = ("uniform", "first")


class StepCapExceededError(Exception):
    """A round failed to commit within the sync-step cap."""

    def __init__(self, cap: int):
        self.cap = cap
        super().__init__(f"no commit within {cap} sync steps")


@dataclass(frozen=True)
class RoundOutcome:
    committed: str      # "proposed" or "empty"
    steps_taken: int    # sync actions before the commit
    boycotted: bool


@dataclass(frozen=True)
class SimStats:
    trials: int             # completed trials (capped ones are excluded)
    frac_proposed: float
    frac_empty: float
    mean_steps: float
    seed: int
    step_cap_errors: int = 0


def boycott_prob(adversary) -> Fraction:
    """Adversary policy as a per-round boycott probability.

    Accepts "never-boycott", "always-boycott", "probabilistic:<q>", or a
    number/fraction directly.
    """
    if isinstance(adversary, str):
        if adversary == "never-boycott":
            return Fraction(0)
        if adversary == "always-boycott":
            return Fraction(1)
        if adversary.startswith("probabilistic:"):
            q = as_prob(adversary.partition(":")[2])
        else:
            raise ValueError(f"unknown adversary policy {adversary!r}")
    else:
        q = as_prob(adversary)
    if not (0 <= q <= 1):
        raise ValueError(f"boycott probability must lie in [0, 1], got {q}")
    return q


def run_round(params: ModelParams, adversary="never-boycott", seed: int = 0, *,
              scheduler: str = "uniform", step_cap: int = DEFAULT_STEP_CAP,
              network=None) -> RoundOutcome:
    """Simulate until the first commit action and report how it went."""
    if scheduler not in _SCHEDULERS:
        raise ValueError(f"scheduler must be one of {_SCHEDULERS}")
    q = boycott_prob(adversary)
    if network is None:
        network = build_network(params)
    term, env = network
    rng = random.Random(seed)
    state = term
    syncs = 0
    boycotted = False
    round_stance = False
    while True:
        options = successors(state, env)
        if not options:
            raise RuntimeError("model deadlocked; this should be unreachable")
        enabled_boycott = [pair for pair in options if pair[0].gate == BOYCOTT]
        if enabled_boycott:
            if round_stance:
                label, state = enabled_boycott[0]
                boycotted = True
                continue
            options = tuple(p for p in options if p[0].gate != BOYCOTT)
        probs = [pair for pair in options if pair[0].gate == PROB_GATE]
        if probs:
            total = float(sum(lab.args[0] for lab, _ in probs))
            x = rng.random() * total
            acc = 0.0
            label, state = probs[-1]
            for lab, target in probs:
                acc += float(lab.args[0])
                if x < acc:
                    label, state = lab, target
                    break
        elif scheduler == "first":
            label, state = options[0]
        else:
            label, state = options[rng.randrange(len(options))]
        gate = label.gate
        if gate == SYNC:
            syncs += 1
            if syncs > step_cap:
                raise StepCapExceededError(step_cap)
        elif gate == RECEIVE_BLOCK_PROPOSAL:
            round_stance = q == 1 or (q > 0 and rng.random() < float(q))
        elif gate == COMMIT_PROPOSED_BLOCK:
            return RoundOutcome("proposed", syncs, boycotted)
        elif gate == COMMIT_EMPTY_BLOCK:
            return RoundOutcome("empty", syncs, boycotted)


def estimate(params: ModelParams, adversary="never-boycott", trials: int = 1000,
             seed: int = 0, *, scheduler: str = "uniform",
             step_cap: int = DEFAULT_STEP_CAP) -> SimStats:
    """Aggregate `run_round` over independently seeded trials.

    Trials that exceed the step cap are counted and excluded from the
    fractions.  Fixed arguments give bit-identical results.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    network = build_network(params)
    proposed = empty = errors = 0
    steps_total = 0
    for i in range(trials):
        trial_seed = seed * 1_000_003 + i
        try:
            outcome = run_round(params, adversary, trial_seed,
                                scheduler=scheduler, step_cap=step_cap,
                                network=network)
        except StepCapExceededError:
            errors += 1
            continue
        if outcome.committed == "proposed":
            proposed += 1
        else:
            empty += 1
        steps_total += outcome.steps_taken
    completed = proposed + empty
    if completed == 0:
        raise StepCapExceededError(step_cap)
    return SimStats(trials=completed,
                    frac_proposed=proposed / completed,
                    frac_empty=empty / completed,
                    mean_steps=steps_total / completed,
                    seed=seed,
                    step_cap_errors=errors)


def format_stats(stats: SimStats) -> str:
    """One structured text record; field order is part of the contract."""
    return ("trials=%d frac_proposed=%.6f frac_empty=%.6f mean_steps=%.4f "
            "step_cap_errors=%d seed=%d"
            % (stats.trials, stats.frac_proposed, stats.frac_empty,
               stats.mean_steps, stats.step_cap_errors, stats.seed))
