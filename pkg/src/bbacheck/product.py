"""Compiled synchronized-product exploration of parallel compositions.

`explore_product` decomposes the top-level tree of parallel operators,
explores every non-parallel leaf standalone with the term engine, and then
runs the breadth-first product over packed integer state vectors (16 bits
per leaf).  Successor lists mirror the term semantics' derivation order
exactly, so the resulting LTS is identical (numbering, transition order,
and labels) to what term-by-term exploration produces, at a fraction of the
per-state memory.

Subtrees spanning at most two leaves memoize their successor lists per
local state pair; in the consensus models that covers each node's
behavior/counter composition, where locality is high.
"""
from __future__ import annotations

from .calculus import Environment, Parallel, ProcessTerm
from .lts import ExploreLimits, LimitExceededError, Lts, TransitionTable

_LEAF_STATE_LIMIT = 200_000
_MEMO_MAX_LEAVES = 2
_MEMO_ENTRY_CAP = 500_000


class _Compiled:
    __slots__ = ("tables", "shift", "left", "right", "sync_flags",
                 "memo", "lo", "selmask")

    def __init__(self):
        self.tables = None
        self.memo = None


def _flatten(term, leaves):
    if type(term) is Parallel:
        left = _flatten(term.left, leaves)
        right = _flatten(term.right, leaves)
        return (term.sync, left, right)
    idx = len(leaves)
    leaves.append(term)
    return idx


def _leaf_span(tree):
    if isinstance(tree, int):
        return (tree, tree)
    _, left, right = tree
    l1, _ = _leaf_span(left)
    _, r2 = _leaf_span(right)
    return (l1, r2)


def explore_product(term: ProcessTerm, env: Environment,
                    limits: ExploreLimits) -> Lts | None:
    """Product exploration of a parallel composition, or None when the term
    shape does not qualify (caller then falls back to term exploration)."""
    if type(term) is not Parallel:
        return None
    from .lts import _explore_terms

    leaves: list = []
    tree = _flatten(term, leaves)

    label_ids: dict = {}
    labels: list = []
    locals_: list = []
    leaf_limits = ExploreLimits(_LEAF_STATE_LIMIT, 4 * _LEAF_STATE_LIMIT)
    for leaf in leaves:
        try:
            locals_.append(_explore_terms(leaf, env, leaf_limits))
        except LimitExceededError:
            return None
    # slot widths sized to the leaves keep packed states small
    shifts = []
    at = 0
    for local in locals_:
        shifts.append(at)
        at += max(1, (local.num_states - 1).bit_length())
    total_bits = at
    leaf_succ = []
    for local, shift in zip(locals_, shifts):
        succ = [[] for _ in range(local.num_states)]
        tt = local.transitions
        local_labels = tt.labels
        clear = ((1 << max(1, (local.num_states - 1).bit_length())) - 1) << shift
        for src, lid, dst in zip(tt.srcs, tt.labs, tt.dsts):
            lab = local_labels[lid]
            gid = label_ids.get(lab)
            if gid is None:
                gid = len(labels)
                label_ids[lab] = gid
                labels.append(lab)
            succ[src].append((gid, clear, dst << shift))
        leaf_succ.append(succ)

    def node_bits(node):
        lo_leaf, hi_leaf = _leaf_span(node)
        lo = shifts[lo_leaf]
        hi = shifts[hi_leaf] + max(1, (locals_[hi_leaf].num_states - 1).bit_length())
        return lo, hi

    def compile_node(node):
        c = _Compiled()
        if isinstance(node, int):
            c.tables = leaf_succ[node]
            c.shift = shifts[node]
            c.selmask = (1 << max(1, (locals_[node].num_states - 1).bit_length())) - 1
            return c
        sync, left, right = node
        c.left = compile_node(left)
        c.right = compile_node(right)
        c.sync_flags = bytes(
            1 if lab.gate is not None and lab.gate in sync else 0
            for lab in labels
        )
        lo_leaf, hi_leaf = _leaf_span(node)
        if hi_leaf - lo_leaf + 1 <= _MEMO_MAX_LEAVES:
            lo, hi = node_bits(node)
            c.memo = {}
            c.lo = lo
            c.selmask = (1 << (hi - lo)) - 1
        return c

    root = compile_node(tree)

    def node_succ(c, state):
        if c.tables is not None:
            return c.tables[(state >> c.shift) & c.selmask]
        memo = c.memo
        if memo is not None:
            key = (state >> c.lo) & c.selmask
            got = memo.get(key)
            if got is not None:
                return got
        ls = node_succ(c.left, state)
        rs = node_succ(c.right, state)
        flags = c.sync_flags
        out = []
        for e in ls:
            if not flags[e[0]]:
                out.append(e)
        for e in rs:
            if not flags[e[0]]:
                out.append(e)
        rmatch = None
        for e in rs:
            if flags[e[0]]:
                if rmatch is None:
                    rmatch = {}
                bucket = rmatch.get(e[0])
                if bucket is None:
                    rmatch[e[0]] = [e]
                else:
                    bucket.append(e)
        if rmatch is not None:
            for a, cl, st in ls:
                if flags[a]:
                    bucket = rmatch.get(a)
                    if bucket:
                        for _, cl2, st2 in bucket:
                            out.append((a, cl | cl2, st | st2))
        if memo is not None:
            # order-preserving dedup keeps memoized lists small and matches
            # the per-level dedup of the term semantics
            seen = set()
            unique = []
            for e in out:
                k = (e[0], e[1], e[2])
                if k not in seen:
                    seen.add(k)
                    unique.append(e)
            out = unique
            if len(memo) < _MEMO_ENTRY_CAP:
                memo[key] = out
        return out

    max_states = limits.max_states
    max_transitions = limits.max_transitions
    # breadth-first discovery order equals state numbering, so the list of
    # packed states doubles as the work queue
    index = {0: 0}
    states = [0]
    table = TransitionTable()
    for lab in labels:
        table.label_id(lab)
    append = table.append_encoded
    index_get = index.get
    src = 0
    while src < len(states):
        state = states[src]
        emitted = set()
        for a, cl, st in node_succ(root, state):
            ns = (state & ~cl) | st
            key = (a, ns)
            if key in emitted:
                continue
            emitted.add(key)
            dst = index_get(ns)
            if dst is None:
                dst = len(states)
                if dst >= max_states:
                    raise LimitExceededError("max_states", max_states)
                index[ns] = dst
                states.append(ns)
            if len(table) >= max_transitions:
                raise LimitExceededError("max_transitions", max_transitions)
            append(src, a, dst)
        src += 1
    return Lts(num_states=len(states), initial=0, transitions=table)
