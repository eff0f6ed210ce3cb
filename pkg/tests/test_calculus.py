import random
from fractions import Fraction

import pytest

from bbacheck import (
    TAU,
    ActionLabel,
    Environment,
    UnresolvedCallError,
    act,
    alphabet,
    as_prob,
    call,
    choice,
    choice_of,
    explore,
    hide,
    nil,
    parallel,
    prefix,
    prob_act,
    prob_choice,
    restrict,
    successors,
)
from helpers import random_term


def test_as_prob_reads_decimals_exactly():
    assert as_prob("0.8") == Fraction(4, 5)
    assert as_prob(0.8) == Fraction(4, 5)          # via shortest repr, not binary
    assert as_prob(Fraction(3, 4)) == Fraction(3, 4)
    assert as_prob(1) == 1
    assert as_prob("0.7424") == Fraction(464, 625)


class TestActionLabel:
    def test_value_equality(self):
        assert act("propagate", 3, 1) == act("propagate", 3, 1)
        assert act("ask", 0) != act("ask", 1)
        assert act("a") != act("b")
        assert TAU == ActionLabel(None)
        assert TAU != act("a")

    def test_silent_carries_nothing(self):
        assert TAU.silent and TAU.gate is None and TAU.args == ()
        with pytest.raises(ValueError):
            ActionLabel(None, (1,))

    @pytest.mark.parametrize("gate,args", [
        ("propagate", (1,)),        # arity
        ("propagate", (1, 2)),      # bit out of range
        ("ask", (2,)),
        ("reply", ()),
        ("prob", (Fraction(0),)),   # probability must be in (0, 1]
        ("prob", (Fraction(3, 2),)),
    ])
    def test_malformed_labels_rejected(self, gate, args):
        with pytest.raises(ValueError):
            ActionLabel(gate, args)

    def test_prob_act(self):
        assert prob_act("0.7424").args == (Fraction(464, 625),)
        assert prob_act(1).args == (Fraction(1),)


class TestTerms:
    def test_interning_shares_structure(self):
        a = act("a")
        t1 = prefix(a, nil())
        t2 = prefix(a, nil())
        assert t1 is t2
        assert choice(t1, t2) == choice(t2, t1)

    def test_structural_equality(self):
        a, b = act("a"), act("b")
        assert prefix(a, nil()) != prefix(b, nil())
        assert parallel({"a"}, nil(), nil()) == parallel(["a"], nil(), nil())
        assert hide({"a"}, nil()) != restrict({"a"}, nil())
        assert call("x", 1) == call("x", 1)
        assert call("x", 1) != call("x", 2)

    def test_prob_choice_validates_probability(self):
        with pytest.raises(ValueError):
            prob_choice(0, nil(), nil())
        with pytest.raises(ValueError):
            prob_choice("1.5", nil(), nil())
        prob_choice(1, nil(), nil())  # closed upper bound is fine

    def test_choice_of(self):
        a, b, c = (prefix(act(g), nil()) for g in "abc")
        t = choice_of([a, b, c])
        assert t == choice(a, choice(b, c))
        with pytest.raises(ValueError):
            choice_of([])


class TestSuccessors:
    def setup_method(self):
        self.env = Environment()

    def test_nil_is_terminal(self):
        assert successors(nil(), self.env) == ()

    def test_prefix_rule(self):
        a = act("a")
        assert set(successors(prefix(a, nil()), self.env)) == {(a, nil())}

    def test_choice_is_union(self):
        a, b = act("a"), act("b")
        t = choice(prefix(a, nil()), prefix(b, nil()))
        assert set(successors(t, self.env)) == {(a, nil()), (b, nil())}

    def test_prob_choice_weights(self):
        left = prefix(act("a"), nil())
        right = prefix(act("b"), nil())
        t = prob_choice("0.7424", left, right)
        assert set(successors(t, self.env)) == {
            (prob_act("0.7424"), left),
            (prob_act("0.2576"), right),
        }

    def test_prob_choice_weights_sum_to_one(self):
        t = prob_choice("0.3", nil(), nil())
        weights = [lab.args[0] for lab, _ in successors(t, self.env)]
        assert sum(weights) == 1

    def test_prob_one_drops_empty_branch(self):
        t = prob_choice(1, prefix(act("a"), nil()), prefix(act("b"), nil()))
        (lab, cont), = successors(t, self.env)
        assert lab == prob_act(1)

    def test_hiding_rewrites_to_silent(self):
        t = hide({"boycott"}, prefix(act("boycott"), nil()))
        (lab, cont), = successors(t, self.env)
        assert lab is TAU
        assert cont == hide({"boycott"}, nil())

    def test_forced_synchronization(self):
        s = prefix(act("sync"), nil())
        t = parallel({"sync"}, s, s)
        assert set(successors(t, self.env)) == {
            (act("sync"), parallel({"sync"}, nil(), nil()))
        }

    def test_synchronization_matches_arguments(self):
        # same gate, different data: no handshake
        t = parallel({"propagate"},
                     prefix(act("propagate", 1, 0), nil()),
                     prefix(act("propagate", 2, 0), nil()))
        assert successors(t, self.env) == ()

    def test_interleaving_outside_sync_set(self):
        a, b = act("a"), act("b")
        t = parallel({"c"}, prefix(a, nil()), prefix(b, nil()))
        got = set(successors(t, self.env))
        assert got == {
            (a, parallel({"c"}, nil(), prefix(b, nil()))),
            (b, parallel({"c"}, prefix(a, nil()), nil())),
        }

    def test_silent_never_synchronizes(self):
        t = parallel({"a"}, prefix(TAU, nil()), prefix(TAU, nil()))
        assert len(successors(t, self.env)) == 2

    def test_restriction_forbids(self):
        t = restrict({"a"}, choice(prefix(act("a"), nil()), prefix(act("b"), nil())))
        (lab, _), = successors(t, self.env)
        assert lab == act("b")

    def test_call_unfolds(self):
        a = act("a")
        self.env.define("loop", (), prefix(a, call("loop")))
        (lab, cont), = successors(call("loop"), self.env)
        assert lab == a and cont == call("loop")

    def test_unresolved_call(self):
        with pytest.raises(UnresolvedCallError):
            successors(call("ghost", 1), self.env)

    def test_deterministic_and_pure(self):
        rng = random.Random(7)
        for _ in range(50):
            t = random_term(rng)
            assert successors(t, self.env) == successors(t, self.env)


class TestEnvironment:
    def test_duplicate_definition_rejected(self):
        env = Environment()
        env.define("p", (), nil())
        with pytest.raises(ValueError):
            env.define("p", (), nil())

    def test_validate_closure(self):
        env = Environment()
        env.define("p", (), prefix(act("a"), call("q")))
        with pytest.raises(UnresolvedCallError):
            env.validate()
        env.define("q", (), nil())
        env.validate()

    def test_validate_rejects_unguarded_recursion(self):
        env = Environment()
        env.define("p", (), choice(call("p"), prefix(act("a"), nil())))
        with pytest.raises(ValueError):
            env.validate()

    def test_guarded_recursion_accepted(self):
        env = Environment()
        env.define("p", (), prefix(act("a"), choice(call("p"), call("p"))))
        env.validate()

    def test_unguarded_through_parallel_rejected(self):
        env = Environment()
        env.define("p", (), parallel({"a"}, call("q"), nil()))
        env.define("q", (), prefix(act("a"), call("p")))
        with pytest.raises(ValueError):
            env.validate()


class TestAlphabet:
    def test_nil(self):
        assert alphabet(nil(), Environment()) == frozenset()

    def test_prefixes(self):
        t = prefix(act("a"), prefix(act("b"), nil()))
        assert alphabet(t, Environment()) == {"a", "b"}

    def test_hiding_does_not_remove(self):
        t = hide({"a"}, restrict({"a"}, prefix(act("a"), nil())))
        assert alphabet(t, Environment()) == {"a"}

    def test_prob_choice_contributes_prob_gate(self):
        t = prob_choice("0.5", prefix(act("a"), nil()), nil())
        assert alphabet(t, Environment()) == {"a", "prob"}

    def test_follows_recursive_definitions(self):
        env = Environment()
        env.define("p", (), prefix(act("a"), call("q")))
        env.define("q", (), prefix(act("b"), call("p")))
        assert alphabet(call("p"), env) == {"a", "b"}


class TestHideRestrictLaws:
    """Operator laws, checked by exploring to canonical LTSs."""

    def test_laws_on_random_terms(self):
        env = Environment()
        rng = random.Random(42)
        for _ in range(60):
            t = random_term(rng)
            gates = {"a", "b"}
            hidden = explore(hide(gates, t), env)
            assert explore(hide(gates, hide(gates, t)), env) == hidden
            cut = explore(restrict(gates, t), env)
            assert explore(restrict(gates, restrict(gates, t)), env) == cut
            # no visible hidden gate survives; restricted gates vanish entirely
            assert not (hidden.gates() & gates)
            assert not (cut.gates() & gates)
