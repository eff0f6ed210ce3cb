"""Equivalence-based noninterference checking.

A system is noninterfering with respect to a set of high-level gates iff the
system with those gates forbidden (cut) is bisimilar to the system with
those gates silenced (hidden): a low-level observer then cannot tell whether
the high-level actions are happening at all.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .equivalence import EquivalenceKind, as_kind, compare, minimize
from .lts import Lts, cut_labels, hide_labels


@dataclass
class NiVerdict:
    kind: EquivalenceKind
    passed: bool
    witness: Optional[list]
    cut_size: tuple   # (states, transitions) of the high-forbidden operand
    hide_size: tuple  # (states, transitions) of the high-silenced operand


def bsnni(lts: Lts, high_gates, kind, minimize_operands: bool = True) -> NiVerdict:
    """Compare cut(lts, high) against hide(lts, high) under `kind`.

    Operands are minimized (same kind) before the comparison by default;
    that is a sound accelerator since minimization preserves the
    equivalence class.  The recorded sizes are those of the operands as
    constructed, before minimization.
    """
    kind = as_kind(kind)
    high_gates = frozenset(high_gates)
    if not (high_gates & lts.gates()):
        # cutting and hiding nothing leaves the very same system
        return NiVerdict(kind=kind, passed=True, witness=None,
                         cut_size=lts.size(), hide_size=lts.size())
    cut = cut_labels(lts, high_gates)
    hidden = hide_labels(lts, high_gates)
    cut_size, hide_size = cut.size(), hidden.size()
    if minimize_operands:
        cut = minimize(cut, kind)
        hidden = minimize(hidden, kind)
    verdict = compare(cut, hidden, kind)
    return NiVerdict(kind=kind, passed=verdict.equivalent, witness=verdict.witness,
                     cut_size=cut_size, hide_size=hide_size)
