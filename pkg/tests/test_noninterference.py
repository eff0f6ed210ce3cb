import random

import pytest

from bbacheck import ExploreLimits, TAU, act, bsnni, build_network, explore, make_params
from bbacheck.equivalence import EquivalenceKind
from bbacheck.pipeline import reduced_network
from helpers import random_lts

KINDS = ("strong", "weak", "branching")


class TestBsnniBasics:
    def test_empty_high_set_always_passes(self):
        rng = random.Random(61)
        for _ in range(30):
            lts = random_lts(rng)
            for kind in KINDS:
                assert bsnni(lts, set(), kind).passed

    def test_non_occurring_gates_pass(self):
        rng = random.Random(62)
        for _ in range(30):
            lts = random_lts(rng)
            assert bsnni(lts, {"nothere"}, "weak").passed

    def test_verdict_independent_of_minimization(self):
        rng = random.Random(63)
        for _ in range(40):
            lts = random_lts(rng)
            for kind in KINDS:
                with_min = bsnni(lts, {"a"}, kind, minimize_operands=True)
                without = bsnni(lts, {"a"}, kind, minimize_operands=False)
                assert with_min.passed == without.passed

    def test_records_operand_sizes(self):
        lts = random_lts(random.Random(64))
        verdict = bsnni(lts, {"a"}, "weak")
        assert verdict.hide_size == lts.size()
        assert verdict.cut_size[0] <= lts.num_states

    def test_witness_only_on_failure(self):
        rng = random.Random(65)
        for _ in range(40):
            verdict = bsnni(random_lts(rng), {"a"}, "weak")
            if verdict.passed:
                assert verdict.witness is None

    def test_kind_recorded(self):
        lts = random_lts(random.Random(66))
        assert bsnni(lts, {"a"}, "branching").kind is EquivalenceKind.BRANCHING


class TestInterferenceDetected:
    def test_visible_choice_leaks(self):
        # high action enables an otherwise impossible outcome
        from bbacheck import Lts
        lts = Lts(4, 0, [
            (0, act("high"), 1),
            (0, act("a"), 2),
            (1, act("b"), 3),
        ])
        for kind in KINDS:
            verdict = bsnni(lts, {"high"}, kind)
            assert not verdict.passed

    def test_invisible_high_action_passes(self):
        from bbacheck import Lts
        # the high action changes nothing observable
        lts = Lts(3, 0, [
            (0, act("high"), 1),
            (0, act("a"), 2),
            (1, act("a"), 2),
        ])
        assert bsnni(lts, {"high"}, "weak").passed
        assert bsnni(lts, {"high"}, "branching").passed


class TestSmallNetworks:
    """Direct explorations at sizes where the full pipeline is cheap."""

    def test_honest_network_trivially_passes(self):
        params = make_params(n_honest=2, n_malicious=0, committee_size=1)
        term, env = build_network(params)
        lts = explore(term, env)
        for kind in ("weak", "branching"):
            assert bsnni(lts, {"boycott"}, kind).passed

    def test_lone_malicious_passes(self):
        # a single malicious node cannot coordinate a boycott, so the cut
        # and hide variants coincide
        params = make_params(n_honest=2, n_malicious=1, committee_size=1)
        term, env = build_network(params)
        lts = explore(term, env)
        for kind in ("weak", "branching"):
            assert bsnni(lts, {"boycott"}, kind).passed

    def test_joint_boycott_fails(self):
        params = make_params(n_honest=1, n_malicious=2, committee_size=1)
        term, env = build_network(params)
        lts = explore(term, env)
        for kind in ("weak", "branching"):
            assert not bsnni(lts, {"boycott"}, kind).passed

    def test_direct_and_reduced_agree(self):
        for kwargs in (dict(n_honest=1, n_malicious=1, committee_size=1),
                       dict(n_honest=2, n_malicious=1, committee_size=1),
                       dict(n_honest=1, n_malicious=2, committee_size=1)):
            params = make_params(**kwargs)
            term, env = build_network(params)
            direct = explore(term, env)
            red = reduced_network(params)
            for kind in ("weak", "branching"):
                assert (bsnni(direct, {"boycott"}, kind).passed
                        == bsnni(red, {"boycott"}, kind).passed), kwargs

    def test_network_bsnni_agrees_with_direct(self):
        from bbacheck.pipeline import network_bsnni
        for kwargs in (dict(n_honest=2, n_malicious=1, committee_size=1),
                       dict(n_honest=1, n_malicious=2, committee_size=1)):
            params = make_params(**kwargs)
            term, env = build_network(params)
            direct = explore(term, env)
            for kind in ("weak", "branching"):
                assert (network_bsnni(params, kind).passed
                        == bsnni(direct, {"boycott"}, kind).passed), kwargs
