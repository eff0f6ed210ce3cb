"""Probabilistic process calculus: action labels, terms, and one-step semantics.

Terms are immutable and hash-consed through the factory functions (`prefix`,
`choice`, `prob_choice`, `parallel`, `restrict`, `hide`, `call`), so shared
subterms compare by identity and hashing is O(1).  Equality is structural
either way; interning is only a speed/memory optimization.

Probabilities are exact `fractions.Fraction` values throughout.  Strings and
floats are read as decimal literals (``as_prob(0.8) == Fraction(4, 5)``), so
probability labels compare and serialize bit-exactly.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Callable, Iterable, Optional, Union

DataValue = Union[int, Fraction]

#: Gate name used for the visible labels of resolved probabilistic branches.
PROB_GATE = "prob"

# Arity/shape conventions for the gates with structured payloads.  Anything
# not listed is unconstrained.
_GATE_ARITIES = {
    "propagate": 2,   # (node id, bit)
    "ask": 1,         # (bit)
    "reply": 1,       # (count)
    PROB_GATE: 1,     # (probability)
}

_BITS = (0, 1)


class UnresolvedCallError(Exception):
    """A `Call` names a process that the environment does not define."""

    def __init__(self, name: str, args: tuple):
        self.name = name
        self.args = args
        super().__init__(f"no definition for {name}{args!r}")


def as_prob(value) -> Fraction:
    """Coerce a probability given as Fraction, int, decimal string, or float.

    Floats go through their shortest decimal repr, so 0.8 means 4/5 rather
    than the nearest binary double.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        value = repr(value)
    return Fraction(str(value))


class ActionLabel:
    """A visible gate with data arguments, or the silent action (`TAU`).

    Labels are value objects: two labels are equal iff kind, gate, and all
    arguments are equal.
    """

    __slots__ = ("gate", "args", "_hash")

    def __init__(self, gate: Optional[str], args: tuple = ()):
        if gate is None and args:
            raise ValueError("the silent action carries no arguments")
        if gate is not None:
            arity = _GATE_ARITIES.get(gate)
            if arity is not None and len(args) != arity:
                raise ValueError(f"gate {gate!r} takes {arity} argument(s), got {args!r}")
            if gate == "propagate" and args[1] not in _BITS:
                raise ValueError(f"propagate bit must be 0 or 1, got {args[1]!r}")
            if gate == "ask" and args[0] not in _BITS:
                raise ValueError(f"ask bit must be 0 or 1, got {args[0]!r}")
            if gate == PROB_GATE and not (0 < args[0] <= 1):
                raise ValueError(f"probability must lie in (0, 1], got {args[0]!r}")
        self.gate = gate
        self.args = args
        self._hash = hash((gate, args))

    @property
    def silent(self) -> bool:
        return self.gate is None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ActionLabel):
            return NotImplemented
        return self._hash == other._hash and self.gate == other.gate and self.args == other.args

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if self.gate is None:
            return "tau"
        if not self.args:
            return self.gate
        return "%s(%s)" % (self.gate, ",".join(str(a) for a in self.args))

    def sort_key(self):
        return ("" if self.gate is None else self.gate,
                tuple(str(a) for a in self.args))


#: The silent (unobservable) action.
TAU = ActionLabel(None)

_LABELS: dict = {}


def act(gate: str, *args) -> ActionLabel:
    """Interned visible action label."""
    key = (gate, args)
    lab = _LABELS.get(key)
    if lab is None:
        lab = ActionLabel(gate, args)
        _LABELS[key] = lab
    return lab


def prob_act(p) -> ActionLabel:
    """Label carried by one branch of a resolved probabilistic choice."""
    return act(PROB_GATE, as_prob(p))


# --------------------------------------------------------------------------
# Terms
# --------------------------------------------------------------------------

class ProcessTerm:
    """Abstract base; use the factory functions to build terms."""

    __slots__ = ("_hash",)

    def __hash__(self):
        return self._hash


class Nil(ProcessTerm):
    """The terminated process."""

    __slots__ = ()

    def __init__(self):
        self._hash = hash("nil")

    def __eq__(self, other):
        return self is other or type(other) is Nil


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        return "nil"


class Prefix(ProcessTerm):
    __slots__ = ("label", "cont")

    def __init__(self, label: ActionLabel, cont: ProcessTerm):
        self.label = label
        self.cont = cont
        self._hash = hash((1, label, cont))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Prefix and self._hash == other._hash
                and self.label == other.label and self.cont == other.cont)


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        return f"{self.label!r}.{self.cont!r}"


class Choice(ProcessTerm):
    __slots__ = ("left", "right")

    def __init__(self, left: ProcessTerm, right: ProcessTerm):
        self.left = left
        self.right = right
        self._hash = hash((2, left, right))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Choice and self._hash == other._hash
                and self.left == other.left and self.right == other.right)


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        return f"({self.left!r} + {self.right!r})"


class ProbChoice(ProcessTerm):
    """Binary probabilistic choice; the right branch has weight 1 - p."""

    __slots__ = ("p", "left", "right")

    def __init__(self, p: Fraction, left: ProcessTerm, right: ProcessTerm):
        if not (0 < p <= 1):
            raise ValueError(f"branch probability must lie in (0, 1], got {p!r}")
        self.p = p
        self.left = left
        self.right = right
        self._hash = hash((3, p, left, right))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is ProbChoice and self._hash == other._hash
                and self.p == other.p and self.left == other.left
                and self.right == other.right)


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        return f"([{self.p}]{self.left!r} (+) [{1 - self.p}]{self.right!r})"


class Parallel(ProcessTerm):
    """CSP-style parallel composition synchronizing on a set of gate names."""

    __slots__ = ("sync", "left", "right")

    def __init__(self, sync: frozenset, left: ProcessTerm, right: ProcessTerm):
        self.sync = sync
        self.left = left
        self.right = right
        self._hash = hash((4, sync, left, right))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Parallel and self._hash == other._hash
                and self.sync == other.sync and self.left == other.left
                and self.right == other.right)


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        return f"({self.left!r} |[{','.join(sorted(self.sync))}]| {self.right!r})"


class Restrict(ProcessTerm):
    """Forbids every action whose gate is in the set."""

    __slots__ = ("gates", "body")

    def __init__(self, gates: frozenset, body: ProcessTerm):
        self.gates = gates
        self.body = body
        self._hash = hash((5, gates, body))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Restrict and self._hash == other._hash
                and self.gates == other.gates and self.body == other.body)


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        return f"({self.body!r} \\ {{{','.join(sorted(self.gates))}}})"


class Hide(ProcessTerm):
    """Turns every action whose gate is in the set into the silent action."""

    __slots__ = ("gates", "body")

    def __init__(self, gates: frozenset, body: ProcessTerm):
        self.gates = gates
        self.body = body
        self._hash = hash((6, gates, body))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Hide and self._hash == other._hash
                and self.gates == other.gates and self.body == other.body)


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        return f"({self.body!r} / {{{','.join(sorted(self.gates))}}})"


class Call(ProcessTerm):
    """Reference to a named recursive definition at concrete argument values."""

    __slots__ = ("name", "args")

    def __init__(self, name: str, args: tuple = ()):
        self.name = name
        self.args = args
        self._hash = hash((7, name, args))

    def __eq__(self, other):
        if self is other:
            return True
        return (type(other) is Call and self._hash == other._hash
                and self.name == other.name and self.args == other.args)


    __hash__ = ProcessTerm.__hash__
    def __repr__(self):
        if not self.args:
            return self.name
        return "%s(%s)" % (self.name, ",".join(str(a) for a in self.args))


_TERMS: dict = {}

NIL = Nil()
_TERMS[("nil",)] = NIL


def _intern(key, ctor):
    term = _TERMS.get(key)
    if term is None:
        term = ctor()
        _TERMS[key] = term
    return term


def nil() -> ProcessTerm:
    return NIL


def prefix(label: ActionLabel, cont: ProcessTerm) -> ProcessTerm:
    return _intern((1, label, cont), lambda: Prefix(label, cont))


def choice(left: ProcessTerm, right: ProcessTerm) -> ProcessTerm:
    return _intern((2, left, right), lambda: Choice(left, right))


def choice_of(terms: Iterable[ProcessTerm]) -> ProcessTerm:
    """Right-fold a nonempty sequence of terms into nested binary choices."""
    terms = list(terms)
    if not terms:
        raise ValueError("choice_of needs at least one alternative")
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = choice(t, out)
    return out


def prob_choice(p, left: ProcessTerm, right: ProcessTerm) -> ProcessTerm:
    p = as_prob(p)
    return _intern((3, p, left, right), lambda: ProbChoice(p, left, right))


def parallel(sync: Iterable[str], left: ProcessTerm, right: ProcessTerm) -> ProcessTerm:
    sync = frozenset(sync)
    return _intern((4, sync, left, right), lambda: Parallel(sync, left, right))


def restrict(gates: Iterable[str], body: ProcessTerm) -> ProcessTerm:
    gates = frozenset(gates)
    return _intern((5, gates, body), lambda: Restrict(gates, body))


def hide(gates: Iterable[str], body: ProcessTerm) -> ProcessTerm:
    gates = frozenset(gates)
    return _intern((6, gates, body), lambda: Hide(gates, body))


def call(name: str, *args) -> ProcessTerm:
    return _intern((7, name, args), lambda: Call(name, args))


def reset_term_cache() -> None:
    """Drop interning and label caches.

    Safe at any time: terms built earlier stay valid because equality is
    structural; only sharing with newly built terms is lost.  Useful between
    explorations of large models to release memory.
    """
    _TERMS.clear()
    _TERMS[("nil",)] = NIL
    _LABELS.clear()


# --------------------------------------------------------------------------
# Environment of recursive definitions
# --------------------------------------------------------------------------

class Environment:
    """Table of named recursive process definitions.

    A definition is registered per concrete argument tuple and its body is a
    ground term; data-dependent branching (vote-threshold guards and the
    like) is resolved by whoever builds the bodies.  `Call(name, args)`
    unfolds to the registered body.
    """

    def __init__(self):
        self._defs: dict = {}
        self._succ_cache: dict = {}

    def define(self, name: str, args: Iterable, body: ProcessTerm) -> ProcessTerm:
        key = (name, tuple(args))
        if key in self._defs:
            raise ValueError(f"duplicate definition {key[0]}{key[1]!r}")
        self._defs[key] = body
        return call(name, *key[1])

    def defines(self, name: str, args: tuple) -> bool:
        return (name, args) in self._defs

    def resolve(self, name: str, args: tuple) -> ProcessTerm:
        try:
            return self._defs[(name, args)]
        except KeyError:
            raise UnresolvedCallError(name, args) from None

    def __len__(self):
        return len(self._defs)

    def validate(self) -> None:
        """Check closure under Call and guardedness of recursion.

        Guardedness: no cycle of definitions reachable from one another
        without passing under an action prefix.  Together with finite data
        domains this guarantees image-finite semantics.
        """
        unguarded: dict = {}
        for key, body in self._defs.items():
            refs = set()
            stack = [(body, False)]
            seen = set()
            while stack:
                term, guarded = stack.pop()
                if (id(term), guarded) in seen:
                    continue
                seen.add((id(term), guarded))
                t = type(term)
                if t is Prefix:
                    stack.append((term.cont, True))
                elif t is Choice:
                    stack.append((term.left, guarded))
                    stack.append((term.right, guarded))
                elif t is ProbChoice:
                    stack.append((term.left, guarded))
                    stack.append((term.right, guarded))
                elif t is Parallel:
                    stack.append((term.left, guarded))
                    stack.append((term.right, guarded))
                elif t in (Restrict, Hide):
                    stack.append((term.body, guarded))
                elif t is Call:
                    ref = (term.name, term.args)
                    if ref not in self._defs:
                        raise UnresolvedCallError(term.name, term.args)
                    if not guarded:
                        refs.add(ref)
            unguarded[key] = refs
        # cycle detection over the unguarded-reference graph
        WHITE, GRAY, BLACK = 0, 1, 2
        color = {k: WHITE for k in unguarded}
        for root in unguarded:
            if color[root] != WHITE:
                continue
            stack = [(root, iter(unguarded[root]))]
            color[root] = GRAY
            while stack:
                node, it = stack[-1]
                advanced = False
                for ref in it:
                    if color[ref] == GRAY:
                        raise ValueError(f"unguarded recursion through {node[0]}{node[1]!r}")
                    if color[ref] == WHITE:
                        color[ref] = GRAY
                        stack.append((ref, iter(unguarded[ref])))
                        advanced = True
                        break
                if not advanced:
                    color[node] = BLACK
                    stack.pop()


# --------------------------------------------------------------------------
# Structural operational semantics
# --------------------------------------------------------------------------

def successors(term: ProcessTerm, env: Environment) -> tuple:
    """All one-step derivatives of `term` as (label, next_term) pairs.

    The result is duplicate-free and listed in a deterministic derivation
    order (left operands first), which exploration relies on for
    reproducible state numbering.  Results are memoized per environment.
    """
    cache = env._succ_cache
    got = cache.get(term)
    if got is None:
        got = _derive(term, env)
        cache[term] = got
    return got


def _derive(term: ProcessTerm, env: Environment) -> tuple:
    t = type(term)
    if t is Nil:
        return ()
    if t is Prefix:
        return ((term.label, term.cont),)
    if t is Choice:
        out = dict.fromkeys(successors(term.left, env))
        for pair in successors(term.right, env):
            out[pair] = None
        return tuple(out)
    if t is ProbChoice:
        p = term.p
        if p == 1:
            return ((prob_act(p), term.left),)
        out = {(prob_act(p), term.left): None, (prob_act(1 - p), term.right): None}
        return tuple(out)
    if t is Parallel:
        sync = term.sync
        left, right = term.left, term.right
        ls = successors(left, env)
        rs = successors(right, env)
        out = {}
        for lab, lt in ls:
            if lab.gate is None or lab.gate not in sync:
                out[(lab, parallel(sync, lt, right))] = None
        for lab, rt in rs:
            if lab.gate is None or lab.gate not in sync:
                out[(lab, parallel(sync, left, rt))] = None
        rmatch: dict = {}
        for lab, rt in rs:
            if lab.gate is not None and lab.gate in sync:
                rmatch.setdefault(lab, []).append(rt)
        if rmatch:
            for lab, lt in ls:
                if lab.gate is not None and lab.gate in sync:
                    for rt in rmatch.get(lab, ()):
                        out[(lab, parallel(sync, lt, rt))] = None
        return tuple(out)
    if t is Restrict:
        gates = term.gates
        out = {}
        for lab, body in successors(term.body, env):
            if lab.gate is None or lab.gate not in gates:
                out[(lab, restrict(gates, body))] = None
        return tuple(out)
    if t is Hide:
        gates = term.gates
        out = {}
        for lab, body in successors(term.body, env):
            if lab.gate is not None and lab.gate in gates:
                out[(TAU, hide(gates, body))] = None
            else:
                out[(lab, hide(gates, body))] = None
        return tuple(out)
    if t is Call:
        return successors(env.resolve(term.name, term.args), env)
    raise TypeError(f"not a process term: {term!r}")


def alphabet(term: ProcessTerm, env: Environment) -> frozenset:
    """Gate names syntactically occurring in prefixes reachable through
    definitions (probabilistic choices contribute the `prob` gate).

    Hiding and restriction do not remove gates from the syntactic alphabet.
    """
    gates = set()
    seen_calls = set()
    stack = [term]
    seen_terms = set()
    while stack:
        t = stack.pop()
        if id(t) in seen_terms:
            continue
        seen_terms.add(id(t))
        ty = type(t)
        if ty is Prefix:
            if t.label.gate is not None:
                gates.add(t.label.gate)
            stack.append(t.cont)
        elif ty is Choice:
            stack.append(t.left)
            stack.append(t.right)
        elif ty is ProbChoice:
            gates.add(PROB_GATE)
            stack.append(t.left)
            stack.append(t.right)
        elif ty is Parallel:
            stack.append(t.left)
            stack.append(t.right)
        elif ty in (Restrict, Hide):
            stack.append(t.body)
        elif ty is Call:
            key = (t.name, t.args)
            if key not in seen_calls:
                seen_calls.add(key)
                stack.append(env.resolve(t.name, t.args))
    return frozenset(gates)
