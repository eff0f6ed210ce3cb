"""Shared test utilities: random LTS/term generators with fixed seeds."""
import random

from bbacheck import Lts, TAU, act, choice, hide, nil, parallel, prefix, prob_choice, restrict

GATES = ("a", "b", "c")
LABELS = tuple(act(g) for g in GATES) + (TAU,)


def random_lts(rng: random.Random, max_states: int = 6, max_transitions: int = 12) -> Lts:
    """Random reachable LTS over a three-gate alphabet plus the silent action."""
    n = rng.randint(1, max_states)
    triples = []
    for k in range(1, n):  # spanning edges keep every state reachable
        triples.append((rng.randrange(k), rng.choice(LABELS), k))
    for _ in range(rng.randint(0, max(0, max_transitions - (n - 1)))):
        triples.append((rng.randrange(n), rng.choice(LABELS), rng.randrange(n)))
    seen = set()
    unique = []
    for t in triples:
        if t not in seen:
            seen.add(t)
            unique.append(t)
    return Lts(n, 0, unique)


def random_term(rng: random.Random, depth: int = 4):
    """Random closed term (no recursion) over the three-gate alphabet."""
    if depth == 0 or rng.random() < 0.2:
        return nil()
    pick = rng.randrange(6)
    if pick == 0:
        return prefix(rng.choice(LABELS), random_term(rng, depth - 1))
    if pick == 1:
        return choice(random_term(rng, depth - 1), random_term(rng, depth - 1))
    if pick == 2:
        p = rng.choice(("0.25", "0.5", "0.75"))
        return prob_choice(p, random_term(rng, depth - 1), random_term(rng, depth - 1))
    if pick == 3:
        sync = rng.sample(GATES, rng.randint(0, 2))
        return parallel(sync, random_term(rng, depth - 1), random_term(rng, depth - 1))
    if pick == 4:
        return hide(rng.sample(GATES, rng.randint(1, 2)), random_term(rng, depth - 1))
    return restrict(rng.sample(GATES, rng.randint(1, 2)), random_term(rng, depth - 1))
