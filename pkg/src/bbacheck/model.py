"""Process-calculus model of committee-based binary consensus.

Each stake unit is one node process: a behavioral component composed with a
vote counter, synchronizing on `ask`/`reply`/`self_verify`.  The network
composes all nodes over the global gates (block proposal, vote propagation,
step synchronization, and the two commit actions), so those are lockstep
across the whole population.  Malicious nodes additionally synchronize on
`boycott` among themselves: boycotting is a joint decision, after which each
boycotter propagates bit 1 regardless of its computed bit.

Every step a node: resets its counter (`self_verify`), resolves committee
membership probabilistically, propagates its bit if selected, and joins the
global `sync` barrier; it then queries its counter and either commits (vote
threshold reached) or updates its bit per the step class and moves on.  The
step classes cycle init -> zero-biased -> one-biased -> coin, where the coin
step falls back to a fresh probabilistic bit when neither bit reached the
threshold.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from fractions import Fraction

from .calculus import (
    TAU,
    Environment,
    ProcessTerm,
    act,
    as_prob,
    call,
    choice,
    choice_of,
    parallel,
    prefix,
    prob_choice,
    restrict,
)

RECEIVE_BLOCK_PROPOSAL = "receive_block_proposal"
COMPUTE_BIT = "compute_bit"
ADJUST_BIT = "adjust_bit"
SELF_VERIFY = "self_verify"
PROPAGATE = "propagate"
ASK = "ask"
REPLY = "reply"
SYNC = "sync"
COMMIT_PROPOSED_BLOCK = "commit_proposed_block"
COMMIT_EMPTY_BLOCK = "commit_empty_block"
BOYCOTT = "boycott"

#: Gates on which the whole population moves in lockstep.
NETWORK_SYNC_GATES = frozenset({
    RECEIVE_BLOCK_PROPOSAL, SYNC, PROPAGATE,
    COMMIT_PROPOSED_BLOCK, COMMIT_EMPTY_BLOCK,
})

#: Gates a node's behavioral component shares with its own counter.
NODE_SYNC_GATES = frozenset({ASK, REPLY, SELF_VERIFY})


class StepClass(enum.Enum):
    """Step classes of the agreement cycle."""

    INIT = "S_INIT"
    ZERO = "S_ZERO"
    ONE = "S_ONE"
    TWO = "S_TWO"


def gc_success_prob(h) -> Fraction:
    """Probability that the preliminary block-grading phase succeeds, as a
    function of the honest stake fraction: h^2 * (1 + h - h^2).

    Used as the default probability that a node's initial bit is 0.
    """
    h = as_prob(h)
    if not (0 <= h <= 1):
        raise ValueError(f"stake fraction must lie in [0, 1], got {h}")
    return h * h * (1 + h - h * h)


def committee_prob(c: int, n: int) -> Fraction:
    """Probability c/n that one stake unit is drawn into a committee of
    expected size c out of n units."""
    if not (1 <= c <= n):
        raise ValueError(f"need 1 <= committee <= population, got c={c}, n={n}")
    return Fraction(c, n)


@dataclass(frozen=True)
class ModelParams:
    n_honest: int
    n_malicious: int
    committee_size: int
    vote_threshold: int
    p_in: Fraction
    p_zero: Fraction
    h_fraction: Fraction

    @property
    def total(self) -> int:
        return self.n_honest + self.n_malicious

    def __post_init__(self):
        if self.n_honest < 0 or self.n_malicious < 0 or self.total < 1:
            raise ValueError("population must contain at least one node")
        if not (1 <= self.committee_size <= self.total):
            raise ValueError(
                f"committee size {self.committee_size} not in 1..{self.total}")
        if not (1 <= self.vote_threshold <= self.total):
            raise ValueError(
                f"vote threshold {self.vote_threshold} not in 1..{self.total}")
        for name in ("p_in", "p_zero"):
            p = getattr(self, name)
            if not (0 < p <= 1):
                raise ValueError(f"{name} must lie in (0, 1], got {p}")


def make_params(n_honest: int = 4, n_malicious: int = 0,
                committee_size: int | None = None,
                vote_threshold: int | None = None,
                p_in=None, p_zero=None, h_fraction=None) -> ModelParams:
    """Build parameters, deriving anything not given explicitly.

    Defaults: committee of 3; vote threshold ceil(2c/3); honest stake
    fraction 0.8; bit-0 probability derived from it; committee-membership
    probability c/n.  The all-default instance is the 4-node network with
    threshold 2, p_in 0.75 and p_zero 0.7424.
    """
    total = n_honest + n_malicious
    c = 3 if committee_size is None else committee_size
    v = -(-2 * c // 3) if vote_threshold is None else vote_threshold
    h = Fraction(4, 5) if h_fraction is None else as_prob(h_fraction)
    pz = gc_success_prob(h) if p_zero is None else as_prob(p_zero)
    pi = committee_prob(c, total) if p_in is None else as_prob(p_in)
    return ModelParams(n_honest=n_honest, n_malicious=n_malicious,
                       committee_size=c, vote_threshold=v,
                       p_in=pi, p_zero=pz, h_fraction=h)


#: Mapping of configuration-file keys to `make_params` keyword arguments.
_CONFIG_KEYS = {
    "nHonest": ("n_honest", int),
    "nMalicious": ("n_malicious", int),
    "committeeSize": ("committee_size", int),
    "voteThreshold": ("vote_threshold", int),
    "pIn": ("p_in", as_prob),
    "hFraction": ("h_fraction", as_prob),
    "pZero": ("p_zero", as_prob),
}


def parse_params_text(text: str) -> dict:
    """Parse `key = value` parameter lines into `make_params` keyword args.

    Blank lines and lines starting with '#' are ignored.
    """
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key = value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ValueError(f"line {lineno}: unknown parameter {key!r}")
        kwarg, conv = _CONFIG_KEYS[key]
        out[kwarg] = conv(value)
    return out


def load_params_file(path) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_params_text(fh.read())


# --------------------------------------------------------------------------
# Term builders
# --------------------------------------------------------------------------

def _counter_name(node_id: int) -> str:
    return f"counter_{node_id}"


def build_counter(env: Environment, node_id: int, params: ModelParams) -> ProcessTerm:
    """Vote counter of one node: counts bit-0 and bit-1 propagations by the
    other nodes, answers `ask(b)` with `reply(count)`, and resets to (0, 0)
    on `self_verify`.  Counts saturate at the population size (unreachable
    in practice since counters reset every step)."""
    total = params.total
    if not (1 <= node_id <= total):
        raise ValueError(f"node id {node_id} not in 1..{total}")
    name = _counter_name(node_id)
    others = [j for j in range(1, total + 1) if j != node_id]
    for k0 in range(total + 1):
        for k1 in range(total + 1):
            summands = []
            for j in others:
                summands.append(prefix(act(PROPAGATE, j, 0),
                                       call(name, min(k0 + 1, total), k1)))
            for j in others:
                summands.append(prefix(act(PROPAGATE, j, 1),
                                       call(name, k0, min(k1 + 1, total))))
            summands.append(prefix(act(ASK, 0),
                                   prefix(act(REPLY, k0), call(name, k0, k1))))
            summands.append(prefix(act(ASK, 1),
                                   prefix(act(REPLY, k1), call(name, k0, k1))))
            summands.append(prefix(act(SELF_VERIFY), call(name, 0, 0)))
            env.define(name, (k0, k1), choice_of(summands))
    return call(name, 0, 0)


def _define_behavior(env: Environment, node_id: int, params: ModelParams,
                     fam: str, restart: ProcessTerm, pinned_bit: bool) -> ProcessTerm:
    """Register one behavior family (honest, covert, or boycott variant) for
    a node and return its bit-picking entry term.

    `restart` is what the node becomes after committing a block (the next
    round's entry).  With `pinned_bit`, every propagation carries bit 1
    regardless of the tracked bit, and the sortition states drop the dead
    bit argument.
    """
    total = params.total
    v = params.vote_threshold
    pick_name = f"{fam}pick_bit_{node_id}"
    sort_name = f"{fam}sortition_{node_id}"
    check_name = f"{fam}commit_check_{node_id}"
    update_name = f"{fam}bit_update_{node_id}"

    def sortition(step: StepClass, bit: int) -> ProcessTerm:
        if pinned_bit:
            return call(sort_name, step.value)
        return call(sort_name, step.value, bit)

    def replies(branch) -> ProcessTerm:
        """reply(k) alternatives for k = 0..population, each continuing
        with branch(k)."""
        return choice_of(
            prefix(act(REPLY, k), branch(k)) for k in range(total + 1)
        )

    pick = prefix(act(COMPUTE_BIT),
                  prob_choice(params.p_zero,
                              sortition(StepClass.INIT, 0),
                              sortition(StepClass.INIT, 1)))
    env.define(pick_name, (), pick)

    after_sortition = {
        StepClass.INIT: call(check_name, StepClass.ZERO.value),
        StepClass.ZERO: call(check_name, StepClass.ONE.value),
        StepClass.ONE: call(update_name, StepClass.TWO.value),
    }
    for step, cont in after_sortition.items():
        for bit in (1,) if pinned_bit else (0, 1):
            body = prefix(act(SELF_VERIFY),
                          prob_choice(params.p_in,
                                      prefix(act(PROPAGATE, node_id, bit),
                                             prefix(act(SYNC), cont)),
                                      prefix(act(SYNC), cont)))
            args = (step.value,) if pinned_bit else (step.value, bit)
            env.define(sort_name, args, body)

    for step, ask_bit, commit_gate in (
        (StepClass.ZERO, 0, COMMIT_PROPOSED_BLOCK),
        (StepClass.ONE, 1, COMMIT_EMPTY_BLOCK),
    ):
        def decide(k, commit_gate=commit_gate, step=step):
            if k >= v:
                return prefix(act(commit_gate), restart)
            return call(update_name, step.value)
        env.define(check_name, (step.value,),
                   prefix(act(ASK, ask_bit), replies(decide)))

    for step, ask_bit, bit_if_met, bit_otherwise in (
        (StepClass.ZERO, 1, 1, 0),
        (StepClass.ONE, 0, 0, 1),
    ):
        def adjust(k, step=step, met=bit_if_met, other=bit_otherwise):
            return sortition(step, met if k >= v else other)
        env.define(update_name, (step.value,),
                   prefix(act(ADJUST_BIT), prefix(act(ASK, ask_bit), replies(adjust))))

    # coin step: try threshold on bit 0, then bit 1, else flip a fresh bit
    def coin_second(k):
        if k >= v:
            return sortition(StepClass.INIT, 1)
        return call(pick_name)

    def coin_first(k):
        if k >= v:
            return sortition(StepClass.INIT, 0)
        return prefix(act(ASK, 1), replies(coin_second))

    env.define(update_name, (StepClass.TWO.value,),
               prefix(act(ADJUST_BIT), prefix(act(ASK, 0), replies(coin_first))))

    return call(pick_name)


def build_honest_node(env: Environment, node_id: int, params: ModelParams) -> ProcessTerm:
    """One honest node: behavioral component composed with its counter."""
    if not (1 <= node_id <= params.n_honest):
        raise ValueError(f"honest node id {node_id} not in 1..{params.n_honest}")
    entry_name = f"round_start_{node_id}"
    entry = call(entry_name)
    pick = _define_behavior(env, node_id, params, "", entry, pinned_bit=False)
    env.define(entry_name, (), prefix(act(RECEIVE_BLOCK_PROPOSAL), pick))
    return parallel(NODE_SYNC_GATES, entry, build_counter(env, node_id, params))


def build_malicious_node(env: Environment, node_id: int, params: ModelParams) -> ProcessTerm:
    """One malicious node.

    Each round it receives the proposal and then either joins the (visible,
    jointly synchronized) boycott -- after which it behaves like an honest
    node whose propagated bit is pinned to 1 -- or silently stays covert and
    behaves honestly for the round.  Both modes restart at this choice."""
    lo, hi = params.n_honest + 1, params.total
    if not (lo <= node_id <= hi):
        raise ValueError(f"malicious node id {node_id} not in {lo}..{hi}")
    entry_name = f"adv_round_start_{node_id}"
    entry = call(entry_name)
    boycott_pick = _define_behavior(env, node_id, params, "boycott_", entry,
                                    pinned_bit=True)
    covert_pick = _define_behavior(env, node_id, params, "covert_", entry,
                                   pinned_bit=False)
    env.define(entry_name, (),
               prefix(act(RECEIVE_BLOCK_PROPOSAL),
                      choice(prefix(act(BOYCOTT), boycott_pick),
                             prefix(TAU, covert_pick))))
    return parallel(NODE_SYNC_GATES, entry, build_counter(env, node_id, params))


def build_network(params: ModelParams, env: Environment | None = None):
    """The full population as one closed term.

    Honest nodes synchronize over the network gates; malicious nodes
    additionally synchronize on `boycott` among themselves, making the
    boycott a joint decision of the whole malicious group.  Boycotting is
    coordination, so a lone malicious node -- with nobody to coordinate
    with -- cannot perform it: a singleton malicious group has `boycott`
    restricted away and can only play its covert (honest-behaving) rounds.
    Returns (term, environment).
    """
    if env is None:
        env = Environment()

    def compose(terms, sync):
        out = terms[0]
        for t in terms[1:]:
            out = parallel(sync, out, t)
        return out

    honest = [build_honest_node(env, i, params)
              for i in range(1, params.n_honest + 1)]
    malicious = [build_malicious_node(env, i, params)
                 for i in range(params.n_honest + 1, params.total + 1)]
    groups = []
    if honest:
        groups.append(compose(honest, NETWORK_SYNC_GATES))
    if malicious:
        if len(malicious) == 1:
            groups.append(restrict({BOYCOTT}, malicious[0]))
        else:
            groups.append(compose(malicious, NETWORK_SYNC_GATES | {BOYCOTT}))
    term = compose(groups, NETWORK_SYNC_GATES)
    env.validate()
    return term, env
