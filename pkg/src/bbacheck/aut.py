"""Aldebaran (`.aut`) text serialization of labeled transition systems.

Header: ``des (<initial>, <transitions>, <states>)``.  Each transition is
``(<src>, "<LABEL>", <dst>)`` with gate names uppercased and data arguments
rendered as ``!ARG``; the silent action is the reserved unquoted label ``i``
(also accepted quoted on input).

Probabilities print as decimal numbers.  Fractions whose denominator has
only factors 2 and 5 (every probability used by the bundled network models)
render exactly and round-trip bit-exactly; anything else is rendered to 12
significant digits and reads back as that decimal.

File I/O streams line by line, so multi-gigabyte systems neither build nor
parse one giant string.
"""
from __future__ import annotations

from fractions import Fraction

from .calculus import TAU, act
from .lts import Lts, TransitionTable

_NONTERMINATING_DIGITS = 12


class AutFormatError(Exception):
    """Malformed `.aut` text."""


def format_decimal(q: Fraction) -> str:
    """Render a Fraction as a decimal string, always with a decimal point."""
    num, den = q.numerator, q.denominator
    d = den
    twos = fives = 0
    while d % 2 == 0:
        d //= 2
        twos += 1
    while d % 5 == 0:
        d //= 5
        fives += 1
    sign = "-" if num < 0 else ""
    num = abs(num)
    if d == 1:
        places = max(twos, fives)
        scaled = num * 10 ** places // den
        digits = str(scaled).rjust(places + 1, "0")
        if places == 0:
            return f"{sign}{digits}.0"
        return f"{sign}{digits[:-places]}.{digits[-places:]}"
    whole = num // den
    rem = num % den
    frac_digits = []
    for _ in range(_NONTERMINATING_DIGITS):
        rem *= 10
        frac_digits.append(str(rem // den))
        rem %= den
    return f"{sign}{whole}.{''.join(frac_digits)}"


def render_label(label) -> str:
    if label.gate is None:
        return "i"
    if not label.args:
        return f'"{label.gate.upper()}"'
    args = " ".join(
        "!" + (format_decimal(a) if isinstance(a, Fraction) else str(a))
        for a in label.args
    )
    return f'"{label.gate.upper()} {args}"'


def _parse_arg(token: str):
    if "." in token:
        return Fraction(token)
    try:
        return int(token)
    except ValueError as exc:
        raise AutFormatError(f"unparsable label argument {token!r}") from exc


def parse_label(text: str):
    text = text.strip()
    if text.startswith('"') and text.endswith('"') and len(text) >= 2:
        text = text[1:-1]
    if text == "i":
        return TAU
    parts = text.split()
    if not parts or not parts[0]:
        raise AutFormatError(f"unparsable label {text!r}")
    gate = parts[0].lower()
    args = []
    for tok in parts[1:]:
        if not tok.startswith("!"):
            raise AutFormatError(f"label argument {tok!r} missing '!' prefix")
        args.append(_parse_arg(tok[1:]))
    try:
        return act(gate, *args)
    except ValueError as exc:
        raise AutFormatError(str(exc)) from exc


def iter_aut_lines(lts: Lts):
    """Header and transition lines, each terminated with a newline."""
    yield f"des ({lts.initial}, {len(lts.transitions)}, {lts.num_states})\n"
    tt = lts.transitions
    rendered = [render_label(lab) for lab in tt.labels]
    for src, lid, dst in zip(tt.srcs, tt.labs, tt.dsts):
        yield f"({src}, {rendered[lid]}, {dst})\n"


def write_aut(lts: Lts) -> str:
    return "".join(iter_aut_lines(lts))


def write_aut_file(lts: Lts, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.writelines(iter_aut_lines(lts))


def _parse_header(line: str):
    if not (line.startswith("des") and "(" in line and line.endswith(")")):
        raise AutFormatError(f"malformed header {line!r}")
    fields = [f.strip() for f in line[line.index("(") + 1:-1].split(",")]
    if len(fields) != 3:
        raise AutFormatError(f"malformed header {line!r}")
    try:
        initial, num_transitions, num_states = (int(f) for f in fields)
    except ValueError as exc:
        raise AutFormatError(f"malformed header {line!r}") from exc
    if num_states <= 0 or not (0 <= initial < num_states):
        raise AutFormatError("header initial state out of range")
    return initial, num_transitions, num_states


def _read_lines(lines) -> Lts:
    header = None
    table = TransitionTable()
    label_cache: dict = {}
    num_states = 0
    count = 0
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if header is None:
            header = _parse_header(line)
            num_states = header[2]
            continue
        if not (line.startswith("(") and line.endswith(")")):
            raise AutFormatError(f"line {lineno}: malformed transition {line!r}")
        inner = line[1:-1]
        first = inner.find(",")
        last = inner.rfind(",")
        if first < 0 or first == last:
            raise AutFormatError(f"line {lineno}: malformed transition {line!r}")
        try:
            src = int(inner[:first].strip())
            dst = int(inner[last + 1:].strip())
        except ValueError as exc:
            raise AutFormatError(f"line {lineno}: bad state index in {line!r}") from exc
        if not (0 <= src < num_states and 0 <= dst < num_states):
            raise AutFormatError(f"line {lineno}: state index out of range in {line!r}")
        text = inner[first + 1:last]
        lid = label_cache.get(text)
        if lid is None:
            try:
                lid = table.label_id(parse_label(text))
            except AutFormatError as exc:
                raise AutFormatError(f"line {lineno}: {exc}") from exc
            label_cache[text] = lid
        table.append_encoded(src, lid, dst)
        count += 1
    if header is None:
        raise AutFormatError("empty input")
    initial, num_transitions, num_states = header
    if count != num_transitions:
        raise AutFormatError(
            f"header declares {num_transitions} transitions, found {count}")
    return Lts(num_states=num_states, initial=initial, transitions=table)


def read_aut(text: str) -> Lts:
    return _read_lines(text.splitlines())


def read_aut_file(path) -> Lts:
    with open(path, "r", encoding="ascii") as fh:
        return _read_lines(fh)
