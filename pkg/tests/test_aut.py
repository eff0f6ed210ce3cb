import random
from fractions import Fraction

import pytest

from bbacheck import Environment, Lts, TAU, act, explore, nil, prefix, prob_act, prob_choice
from bbacheck.aut import (
    AutFormatError,
    format_decimal,
    parse_label,
    read_aut,
    read_aut_file,
    render_label,
    write_aut,
    write_aut_file,
)
from helpers import random_lts


class TestDecimalRendering:
    @pytest.mark.parametrize("frac,text", [
        (Fraction(3, 4), "0.75"),
        (Fraction(464, 625), "0.7424"),
        (Fraction(161, 625), "0.2576"),
        (Fraction(1), "1.0"),
        (Fraction(1, 2), "0.5"),
        (Fraction(1, 8), "0.125"),
        (Fraction(25, 10), "2.5"),
    ])
    def test_terminating_exact(self, frac, text):
        assert format_decimal(frac) == text
        assert Fraction(text) == frac

    def test_nonterminating_truncates(self):
        assert format_decimal(Fraction(1, 3)) == "0.333333333333"


class TestLabelRendering:
    def test_plain_gate_uppercased(self):
        assert render_label(act("sync")) == '"SYNC"'

    def test_args(self):
        assert render_label(act("propagate", 3, 1)) == '"PROPAGATE !3 !1"'
        assert render_label(prob_act("0.7424")) == '"PROB !0.7424"'

    def test_silent_is_reserved_i(self):
        assert render_label(TAU) == "i"

    def test_parse_round_trip(self):
        for lab in (act("sync"), act("propagate", 3, 1), prob_act("0.7424"), TAU):
            assert parse_label(render_label(lab)) == lab

    def test_parse_accepts_quoted_and_bare_i(self):
        assert parse_label("i") is TAU
        assert parse_label('"i"') is TAU

    def test_parse_rejects_garbage(self):
        with pytest.raises(AutFormatError):
            parse_label('"GATE 3"')  # missing ! prefix
        with pytest.raises(AutFormatError):
            parse_label('"PROB !whoops"')


class TestWriteAut:
    def test_golden_single_transition(self):
        lts = Lts(2, 0, [(0, act("a"), 1)])
        assert write_aut(lts) == 'des (0, 1, 2)\n(0, "A", 1)\n'

    def test_golden_prob_label(self):
        lts = Lts(2, 0, [(0, prob_act("0.7424"), 1)])
        assert write_aut(lts) == 'des (0, 1, 2)\n(0, "PROB !0.7424", 1)\n'

    def test_golden_silent(self):
        lts = Lts(2, 0, [(0, TAU, 1)])
        assert write_aut(lts) == "des (0, 1, 2)\n(0, i, 1)\n"


class TestReadAut:
    def test_round_trip_random(self):
        rng = random.Random(17)
        for _ in range(100):
            lts = random_lts(rng)
            assert read_aut(write_aut(lts)) == lts

    def test_round_trip_explored_model(self):
        env = Environment()
        t = prob_choice("0.7424", prefix(act("a"), nil()), prefix(act("b"), nil()))
        lts = explore(t, env)
        assert read_aut(write_aut(lts)) == lts

    def test_file_round_trip(self, tmp_path):
        rng = random.Random(23)
        lts = random_lts(rng)
        path = tmp_path / "x.aut"
        write_aut_file(lts, path)
        assert read_aut_file(path) == lts

    @pytest.mark.parametrize("text", [
        "",
        "dex (0, 1, 2)\n",
        "des (0, 1)\n",
        "des (5, 0, 2)\n",                      # initial out of range
        'des (0, 1, 2)\n(0, "A", 5)\n',          # state index out of range
        'des (0, 2, 2)\n(0, "A", 1)\n',          # transition count mismatch
        'des (0, 1, 2)\n(0 "A" 1)\n',            # missing commas
        'des (0, 1, 2)\n(0, "PROB !x", 1)\n',    # unparsable argument
    ])
    def test_malformed_inputs(self, text):
        with pytest.raises(AutFormatError):
            read_aut(text)

    def test_blank_lines_tolerated(self):
        lts = read_aut('des (0, 1, 2)\n\n(0, "A", 1)\n\n')
        assert list(lts.transitions) == [(0, act("a"), 1)]
