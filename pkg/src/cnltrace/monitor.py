"""Running a specification automaton over a trace."""

from __future__ import annotations

from collections.abc import Collection, Sequence
from dataclasses import dataclass

from . import fst as F
from .specdsl import MonitorAutomaton

VIOLATION = "<viol>"


@dataclass(frozen=True)
class Verdict:
    kind: str  # "ok", "violation" or "stuck"
    index: int | None = None
    state: str | None = None

    @property
    def is_violation(self) -> bool:
        return self.kind == "violation"


def run_monitor(automaton: MonitorAutomaton, trace: Sequence[str]) -> Verdict:
    """Single deterministic pass; stops at the first error entry or missing transition.

    ``state`` is the state reached (for "violation", the error state entered;
    for "stuck", the state that has no move on ``trace[index]``).
    """
    if automaton.nondeterministic_pairs():
        raise ValueError("monitor automaton is not deterministic")
    delta = automaton.delta
    errors = set(automaton.error_states)
    state = automaton.initial
    for k, action in enumerate(trace):
        nxt = delta.get((state, action))
        if nxt is None:
            return Verdict("stuck", k, state)
        if nxt in errors:
            return Verdict("violation", k, nxt)
        state = nxt
    return Verdict("ok", None, state)


def monitor_transducer(automaton: MonitorAutomaton, alphabet: Collection[str],
                       transparent: Collection[str] = ()) -> F.Fst:
    """Copy a trace, inserting :data:`VIOLATION` just before the action that
    enters an error state.

    Symbols in ``transparent`` (paragraph or sentence markers) are copied
    without moving the automaton. After a violation or a missing
    transition the rest of the input is copied unchanged.
    """
    names = {s: k for k, s in enumerate(automaton.states)}
    done = len(names)
    errors = set(automaton.error_states)
    delta = automaton.delta
    trans = []
    n = done + 1
    for (src, action), dst in sorted(delta.items()):
        s = names[src]
        if dst in errors:
            trans.append((s, F.EPS, VIOLATION, n))
            trans.append((n, action, action, done))
            n += 1
        else:
            trans.append((s, action, action, names[dst]))
    for st in list(names.values()):
        for action in alphabet:
            if (automaton.states[st], action) not in delta:
                trans.append((st, action, action, done))
    for st in range(done + 1):
        trans.extend((st, m, m, st) for m in transparent)
    trans.extend((done, a, a, done) for a in alphabet)
    return F.Fst(n, names[automaton.initial], range(done + 1), trans)
