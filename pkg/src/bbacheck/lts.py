"""Explicit labeled transition systems: exploration, hiding/cutting, queries.

Transitions are stored column-wise (`TransitionTable`): integer arrays for
sources and targets plus a small table of interned labels.  The table
behaves like a list of (src, label, dst) triples, but a ten-million-state
model costs tens of bytes per transition instead of hundreds.
"""
from __future__ import annotations

from array import array
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field

from .calculus import TAU, ActionLabel, Environment, ProcessTerm, successors


class LimitExceededError(Exception):
    """Exploration hit a state or transition budget."""

    def __init__(self, which: str, limit: int):
        self.which = which
        self.limit = limit
        super().__init__(f"exploration exceeded {which} limit of {limit}")


@dataclass(frozen=True)
class ExploreLimits:
    max_states: int = 40_000_000
    max_transitions: int = 160_000_000

    def __post_init__(self):
        if self.max_states <= 0 or self.max_transitions <= 0:
            raise ValueError("exploration limits must be positive")


class TransitionTable(Sequence):
    """Sequence of (src, label, dst) triples in column storage.

    Treated as immutable once it is handed to an `Lts`; transforms build new
    tables (possibly sharing columns).
    """

    __slots__ = ("srcs", "labs", "dsts", "labels", "_label_ids")

    def __init__(self, triples=()):
        self.srcs = array("i")      # state counts stay below 2**31
        self.labs = array("i")
        self.dsts = array("i")
        self.labels: list = []      # label id -> ActionLabel
        self._label_ids: dict = {}  # ActionLabel -> label id
        for src, lab, dst in triples:
            self.append(src, lab, dst)

    def label_id(self, label: ActionLabel) -> int:
        lid = self._label_ids.get(label)
        if lid is None:
            lid = len(self.labels)
            self._label_ids[label] = lid
            self.labels.append(label)
        return lid

    def append(self, src: int, label: ActionLabel, dst: int) -> None:
        self.srcs.append(src)
        self.labs.append(self.label_id(label))
        self.dsts.append(dst)

    def append_encoded(self, src: int, lid: int, dst: int) -> None:
        self.srcs.append(src)
        self.labs.append(lid)
        self.dsts.append(dst)

    def __len__(self):
        return len(self.srcs)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [(self.srcs[j], self.labels[self.labs[j]], self.dsts[j])
                    for j in range(*i.indices(len(self.srcs)))]
        return (self.srcs[i], self.labels[self.labs[i]], self.dsts[i])

    def __iter__(self):
        labels = self.labels
        for src, lid, dst in zip(self.srcs, self.labs, self.dsts):
            yield (src, labels[lid], dst)

    def __eq__(self, other):
        if self is other:
            return True
        if isinstance(other, TransitionTable):
            if len(self) != len(other):
                return False
            if self.srcs != other.srcs or self.dsts != other.dsts:
                return False
            if self.labels == other.labels and self.labs == other.labs:
                return True
            # label id numbering may differ; verify each id pairing once
            mine, theirs = self.labels, other.labels
            width = len(theirs) + 1
            verified = set()
            for a, b in zip(self.labs, other.labs):
                code = a * width + b
                if code not in verified:
                    if mine[a] != theirs[b]:
                        return False
                    verified.add(code)
            return True
        if isinstance(other, (list, tuple)):
            return len(self) == len(other) and all(
                mine == theirs for mine, theirs in zip(self, other))
        return NotImplemented

    def __repr__(self):
        return f"<TransitionTable of {len(self)} transitions>"


def _as_table(transitions) -> TransitionTable:
    if isinstance(transitions, TransitionTable):
        return transitions
    return TransitionTable(transitions)


@dataclass
class Lts:
    """States 0..num_states-1 with labeled transitions.

    Exploration and `cut_labels` only ever produce systems whose states are
    all reachable from `initial`; `validate` checks the cheap structural
    part of that contract.
    """

    num_states: int
    initial: int
    transitions: TransitionTable

    def __post_init__(self):
        self.transitions = _as_table(self.transitions)

    def validate(self) -> None:
        if not (0 <= self.initial < self.num_states):
            raise ValueError("initial state out of range")
        seen = set()
        for src, lab, dst in self.transitions:
            if not (0 <= src < self.num_states and 0 <= dst < self.num_states):
                raise ValueError(f"transition endpoint out of range: {(src, lab, dst)}")
            key = (src, lab, dst)
            if key in seen:
                raise ValueError(f"duplicate transition {key}")
            seen.add(key)

    def by_source(self) -> list:
        """Adjacency view: for each state, its (label, dst) pairs in order.

        Materializes per-transition tuples; meant for small systems.
        """
        out = [[] for _ in range(self.num_states)]
        labels = self.transitions.labels
        for src, lid, dst in zip(self.transitions.srcs, self.transitions.labs,
                                 self.transitions.dsts):
            out[src].append((labels[lid], dst))
        return out

    def gates(self) -> frozenset:
        used = set(self.transitions.labs)
        labels = self.transitions.labels
        return frozenset(labels[lid].gate for lid in used
                         if labels[lid].gate is not None)

    def size(self) -> tuple:
        return (self.num_states, len(self.transitions))


def _explore_terms(term: ProcessTerm, env: Environment,
                   limits: ExploreLimits) -> Lts:
    index: dict = {term: 0}
    queue = deque(((term, 0),))
    table = TransitionTable()
    max_states = limits.max_states
    max_transitions = limits.max_transitions
    while queue:
        src_term, src = queue.popleft()
        for lab, dst_term in successors(src_term, env):
            dst = index.get(dst_term)
            if dst is None:
                dst = len(index)
                if dst >= max_states:
                    raise LimitExceededError("max_states", max_states)
                index[dst_term] = dst
                queue.append((dst_term, dst))
            if len(table) >= max_transitions:
                raise LimitExceededError("max_transitions", max_transitions)
            table.append(src, lab, dst)
    return Lts(num_states=len(index), initial=0, transitions=table)


def explore(term: ProcessTerm, env: Environment,
            limits: ExploreLimits | None = None) -> Lts:
    """Breadth-first exploration of `term` into an LTS.

    States are terms deduplicated by structural equality and numbered in
    discovery order, so two runs on equal terms yield identical systems.
    Parallel compositions take a compiled-product fast path (identical
    output, far less memory per state); everything else walks terms.
    """
    if limits is None:
        limits = ExploreLimits()
    from .product import explore_product  # late import; product builds on this module
    result = explore_product(term, env, limits)
    if result is not None:
        return result
    return _explore_terms(term, env, limits)


def hide_labels(lts: Lts, gates) -> Lts:
    """Same states; transitions whose gate is in `gates` become silent.

    Shares the source/target columns with the input."""
    gates = frozenset(gates)
    old = lts.transitions
    new = TransitionTable()
    new.srcs = old.srcs
    new.labs = old.labs
    new.dsts = old.dsts
    new.labels = [TAU if lab.gate is not None and lab.gate in gates else lab
                  for lab in old.labels]
    new._label_ids = {}  # table is frozen from here on
    return Lts(lts.num_states, lts.initial, new)


def cut_labels(lts: Lts, gates) -> Lts:
    """Delete transitions whose gate is in `gates`, then prune unreachable
    states and compact indices (preserving relative order)."""
    gates = frozenset(gates)
    old = lts.transitions
    labels = old.labels
    cut_ids = frozenset(lid for lid, lab in enumerate(labels)
                        if lab.gate is not None and lab.gate in gates)
    n = lts.num_states
    # forward adjacency over kept transitions (CSR)
    degree = array("q", bytes(8 * (n + 1)))
    for src, lid in zip(old.srcs, old.labs):
        if lid not in cut_ids:
            degree[src + 1] += 1
    offsets = degree
    for i in range(1, n + 1):
        offsets[i] += offsets[i - 1]
    m = offsets[n]
    adj_dst = array("q", bytes(8 * m))
    adj_lab = array("i", bytes(4 * m))
    fill = array("q", offsets[:-1])
    for src, lid, dst in zip(old.srcs, old.labs, old.dsts):
        if lid not in cut_ids:
            at = fill[src]
            adj_dst[at] = dst
            adj_lab[at] = lid
            fill[src] = at + 1
    reachable = bytearray(n)
    reachable[lts.initial] = 1
    queue = deque((lts.initial,))
    while queue:
        s = queue.popleft()
        for i in range(offsets[s], offsets[s + 1]):
            t = adj_dst[i]
            if not reachable[t]:
                reachable[t] = 1
                queue.append(t)
    remap = array("q", bytes(8 * n))
    count = 0
    for s in range(n):
        if reachable[s]:
            remap[s] = count
            count += 1
    table = TransitionTable()
    table.labels = list(labels)
    table._label_ids = {}
    for s in range(n):
        if not reachable[s]:
            continue
        ns = remap[s]
        for i in range(offsets[s], offsets[s + 1]):
            if reachable[adj_dst[i]]:
                table.append_encoded(ns, adj_lab[i], remap[adj_dst[i]])
    return Lts(count, remap[lts.initial], table)


def compose_sync(l1: Lts, l2: Lts, sync_gates,
                 limits: ExploreLimits | None = None) -> Lts:
    """Synchronized parallel product of two LTSs.

    Labels whose gate is in `sync_gates` require identical labels on both
    sides (a joint step); everything else, including silent steps,
    interleaves.  This is the LTS-level counterpart of the calculus'
    parallel operator, used for compositional reduction.
    """
    if limits is None:
        limits = ExploreLimits()
    sync_gates = frozenset(sync_gates)
    table = TransitionTable()
    lid = table.label_id
    adj1 = [[] for _ in range(l1.num_states)]
    for src, lab, dst in l1.transitions:
        adj1[src].append((lid(lab), dst))
    adj2 = [[] for _ in range(l2.num_states)]
    sync_map2 = [None] * l2.num_states
    for src, lab, dst in l2.transitions:
        adj2[src].append((lid(lab), dst))
    is_sync = bytes(1 if lab.gate is not None and lab.gate in sync_gates else 0
                    for lab in table.labels)
    for s2 in range(l2.num_states):
        m = {}
        for a, t2 in adj2[s2]:
            if is_sync[a]:
                m.setdefault(a, []).append(t2)
        sync_map2[s2] = m
    n2 = l2.num_states
    init = l1.initial * n2 + l2.initial
    index = {init: 0}
    states = [init]
    max_states = limits.max_states
    max_transitions = limits.max_transitions
    src = 0
    while src < len(states):
        s1, s2 = divmod(states[src], n2)
        emitted = set()
        moves = []
        for a, t1 in adj1[s1]:
            if not is_sync[a]:
                moves.append((a, t1 * n2 + s2))
        for a, t2 in adj2[s2]:
            if not is_sync[a]:
                moves.append((a, s1 * n2 + t2))
        m2 = sync_map2[s2]
        if m2:
            for a, t1 in adj1[s1]:
                if is_sync[a]:
                    for t2 in m2.get(a, ()):
                        moves.append((a, t1 * n2 + t2))
        for a, ncode in moves:
            key = (a, ncode)
            if key in emitted:
                continue
            emitted.add(key)
            dst = index.get(ncode)
            if dst is None:
                dst = len(states)
                if dst >= max_states:
                    raise LimitExceededError("max_states", max_states)
                index[ncode] = dst
                states.append(ncode)
            if len(table) >= max_transitions:
                raise LimitExceededError("max_transitions", max_transitions)
            table.append_encoded(src, a, dst)
        src += 1
    return Lts(len(states), 0, table)


def _forward_csr(lts: Lts):
    """(offsets, labs, dsts) adjacency arrays sorted by source state."""
    n = lts.num_states
    old = lts.transitions
    offsets = array("q", bytes(8 * (n + 1)))
    for src in old.srcs:
        offsets[src + 1] += 1
    for i in range(1, n + 1):
        offsets[i] += offsets[i - 1]
    m = len(old)
    labs = array("i", bytes(4 * m))
    dsts = array("q", bytes(8 * m))
    fill = array("q", offsets[:-1])
    for src, lid, dst in zip(old.srcs, old.labs, old.dsts):
        at = fill[src]
        labs[at] = lid
        dsts[at] = dst
        fill[src] = at + 1
    return offsets, labs, dsts


def reachable_gates(lts: Lts, start: int) -> frozenset:
    """Gate names of all visible labels on transitions reachable from `start`."""
    if not (0 <= start < lts.num_states):
        raise IndexError(f"state {start} out of range")
    offsets, labs, dsts = _forward_csr(lts)
    labels = lts.transitions.labels
    seen = bytearray(lts.num_states)
    seen[start] = 1
    queue = deque((start,))
    used_ids = set()
    while queue:
        s = queue.popleft()
        for i in range(offsets[s], offsets[s + 1]):
            used_ids.add(labs[i])
            t = dsts[i]
            if not seen[t]:
                seen[t] = 1
                queue.append(t)
    return frozenset(labels[lid].gate for lid in used_ids
                     if labels[lid].gate is not None)


def states_after(lts: Lts, gate: str) -> frozenset:
    """States entered by some transition labeled with `gate`."""
    old = lts.transitions
    gate_ids = frozenset(lid for lid, lab in enumerate(old.labels)
                         if lab.gate == gate)
    return frozenset(dst for lid, dst in zip(old.labs, old.dsts)
                     if lid in gate_ids)


def states_that_reach_gate(lts: Lts, gate: str) -> frozenset:
    """States from which some `gate`-labeled transition is reachable.

    One backward traversal from the sources of matching transitions, so
    many per-state reachability questions about the same gate cost a single
    pass.
    """
    n = lts.num_states
    old = lts.transitions
    gate_ids = frozenset(lid for lid, lab in enumerate(old.labels)
                         if lab.gate == gate)
    # reverse CSR
    offsets = array("q", bytes(8 * (n + 1)))
    for dst in old.dsts:
        offsets[dst + 1] += 1
    for i in range(1, n + 1):
        offsets[i] += offsets[i - 1]
    m = len(old)
    preds = array("q", bytes(8 * m))
    fill = array("q", offsets[:-1])
    for src, dst in zip(old.srcs, old.dsts):
        at = fill[dst]
        preds[at] = src
        fill[dst] = at + 1
    seen = bytearray(n)
    frontier = deque()
    for src, lid in zip(old.srcs, old.labs):
        if lid in gate_ids and not seen[src]:
            seen[src] = 1
            frontier.append(src)
    while frontier:
        s = frontier.popleft()
        for i in range(offsets[s], offsets[s + 1]):
            p = preds[i]
            if not seen[p]:
                seen[p] = 1
                frontier.append(p)
    return frozenset(s for s in range(n) if seen[s])


def commit_discipline_ok(lts: Lts,
                         proposal_gate: str = "receive_block_proposal",
                         commit_gates=("commit_proposed_block", "commit_empty_block")) -> bool:
    """Check that on every path, between two consecutive `proposal_gate`
    occurrences there is exactly one commit action (and none before the
    first proposal or doubled within a round).

    Implemented as a product with a three-state observer (awaiting proposal
    / in round, uncommitted / in round, committed); returns False iff the
    observer's error state is reachable.
    """
    commit_gates = frozenset(commit_gates)
    labels = lts.transitions.labels
    AWAIT, OPEN, DONE = 0, 1, 2
    # observer step per label id: 0..2 target, -1 error, -2 stay
    effect = []
    for lab in labels:
        if lab.gate == proposal_gate:
            effect.append("proposal")
        elif lab.gate in commit_gates:
            effect.append("commit")
        else:
            effect.append(None)
    offsets, labs, dsts = _forward_csr(lts)
    n = lts.num_states
    seen = bytearray(3 * n)
    start = 3 * lts.initial + AWAIT
    seen[start] = 1
    queue = deque((start,))
    while queue:
        code = queue.popleft()
        s, obs = divmod(code, 3)
        for i in range(offsets[s], offsets[s + 1]):
            eff = effect[labs[i]]
            if eff == "proposal":
                if obs == OPEN:
                    return False
                nxt = OPEN
            elif eff == "commit":
                if obs != OPEN:
                    return False
                nxt = DONE
            else:
                nxt = obs
            ncode = 3 * dsts[i] + nxt
            if not seen[ncode]:
                seen[ncode] = 1
                queue.append(ncode)
    return True
