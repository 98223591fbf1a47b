"""Recursion tables: a depth-stratified fixpoint deciding grammar acceptability.

The same scheme runs over two entry domains.  The deciding pipeline uses
the tagged states of the two instance automata; the independent oracle
uses behavioral vectors, the tuple of raw values an expression evaluates
to across the instance's examples.  A table records which values a
grammar first achieves at each parse tree depth, and the acceptability
check reads the start column: accept when some depth reaches a
generalizing value and no strictly earlier depth reaches a
non-generalizing one.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Optional

from .automata import Nta
from .core import MacroGrammar, ResourceLimitError, extend
from .semantics import LearningInstance, evaluate, instance_automata

# Tags keeping the two automata's state sets disjoint inside one entry.
Q1 = "q1"
Q2 = "q2"


class StateDomain:
    """Tagged union of the instance automata's states, with target sets.

    F1 holds the tagged initial states of the all-consistent automaton,
    F2 those of the non-generalizing one; reaching F1 is what a solution
    does, reaching F2 is what must not happen first.
    """

    __slots__ = ("a1", "a2", "f1", "f2")

    def __init__(self, a1: Nta, a2: Nta):
        self.a1 = a1
        self.a2 = a2
        self.f1 = frozenset((Q1, s) for s in a1.initial)
        self.f2 = frozenset((Q2, s) for s in a2.initial)

    @classmethod
    def for_instance(cls, inst: LearningInstance) -> "StateDomain":
        return cls(*instance_automata(inst))

    @property
    def values(self) -> frozenset:
        return frozenset((Q1, s) for s in self.a1.states) | frozenset(
            (Q2, s) for s in self.a2.states
        )

    def __len__(self):
        return len(self.a1.states) + len(self.a2.states)


@dataclass(frozen=True)
class RecursionTable:
    """First-achievement table: rows are parse tree depths, columns nonterminals.

    rows[i][nt] holds the entry-domain values first achieved at depth i
    for that nonterminal; row 0 is empty by definition.  Only rows up to
    stabilization are stored, everything after is empty; n_star is the
    worst-case bound the fixpoint provably respects.
    """

    nonterminals: tuple
    rows: tuple
    n_star: int

    def __post_init__(self):
        if not self.rows or any(self.rows[0][nt] for nt in self.nonterminals):
            raise ValueError("row 0 must be present and empty")
        for nt in self.nonterminals:
            seen = set()
            for row in self.rows:
                if row[nt] & seen:
                    raise ValueError(f"column {nt!r} repeats a value across rows")
                seen |= row[nt]

    @property
    def stabilized_at(self) -> int:
        """Index n with H^n = H^(n+1); rows beyond it are empty."""
        return len(self.rows) - 1

    def column(self, nt: str) -> list:
        return [row[nt] for row in self.rows]

    def achieved(self, nt: str) -> frozenset:
        out = set()
        for row in self.rows:
            out |= row[nt]
        return frozenset(out)

    def first_row(self, nt: str, value) -> Optional[int]:
        for i, row in enumerate(self.rows):
            if value in row[nt]:
                return i
        return None

    def render(self, label=None) -> str:
        """Text grid with sorted cell labels, one row per depth."""
        if label is None:
            label = _default_label
        cells = [
            [", ".join(sorted(label(v) for v in row[nt])) for nt in self.nonterminals]
            for row in self.rows
        ]
        headers = ["d"] + list(self.nonterminals)
        body = [[str(i)] + line for i, line in enumerate(cells)]
        widths = [
            max(len(r[c]) for r in [headers] + body) for c in range(len(headers))
        ]
        lines = [
            " | ".join(text.ljust(w) for text, w in zip(r, widths)).rstrip()
            for r in [headers] + body
        ]
        lines.insert(1, "-+-".join("-" * w for w in widths))
        return "\n".join(lines)


def _default_label(value) -> str:
    if isinstance(value, tuple) and len(value) == 2 and value[0] in (Q1, Q2):
        return f"{value[0]}:{value[1]}"
    if isinstance(value, tuple):
        return "".join(str(b) for b in value)
    return str(value)


def step_H(g: MacroGrammar, a1: Nta, a2: Nta, r: dict) -> dict:
    """One round of reachable-state accumulation per nonterminal.

    r maps each nonterminal to the tagged states already achieved; the
    result maps each nonterminal to the states some rule body reaches
    when its nonterminal leaves stand for anything in r.  Monotone in r.
    """
    if not g.is_regular:
        raise ValueError("step_H needs a regular grammar")
    out = {}
    for nt in g.nonterminals:
        total = set()
        for body in g.rules_for(nt):
            total.update((Q1, s) for s in _reach(body, g, a1, Q1, r))
            total.update((Q2, s) for s in _reach(body, g, a2, Q2, r))
        out[nt] = frozenset(total)
    return out


def _reach(body, g, a, tag, r):
    # nonterminal leaves accept from exactly the already-achieved states
    if body.symbol in g.nonterminals:
        return {s for tg, s in r[body.symbol] if tg == tag}
    child_sets = [_reach(c, g, a, tag, r) for c in body.children]
    out = set()
    for combo in product(*child_sets):
        out |= a.parents(body.symbol, combo)
    return out


def _vector_step(g: MacroGrammar, inst: LearningInstance, r: dict) -> dict:
    out = {}
    for nt in g.nonterminals:
        total = set()
        for body in g.rules_for(nt):
            total |= _vectors(body, g, inst, r)
        out[nt] = frozenset(total)
    return out


def _vectors(body, g, inst, r):
    if body.symbol in g.nonterminals:
        return set(r[body.symbol])
    child_sets = [_vectors(c, g, inst, r) for c in body.children]
    fns = [m.ops[body.symbol] for m in inst.examples]
    out = set()
    for combo in product(*child_sets):
        out.add(tuple(fn(*(vec[i] for vec in combo)) for i, fn in enumerate(fns)))
    return out


def _fixpoint_rows(nonterminals, step):
    prev = {nt: frozenset() for nt in nonterminals}
    rows = [dict(prev)]
    while True:
        cur = step(prev)
        if cur == prev:
            return rows
        rows.append({nt: cur[nt] - prev[nt] for nt in nonterminals})
        prev = cur


def _column_order(g: MacroGrammar) -> tuple:
    return (g.start,) + tuple(n for n in g.nonterminals if n != g.start)


def recursion_table(
    g: MacroGrammar,
    g_base: Optional[MacroGrammar],
    inst: LearningInstance,
    *,
    domain: Optional[StateDomain] = None,
) -> RecursionTable:
    """The instance-automaton recursion table of extend(g, g_base).

    Iterates step_H from all-empty, recording each tagged state at the
    first depth that achieves it, until the fixpoint.  Passing a
    precomputed StateDomain avoids rebuilding the instance automata.
    """
    ext = extend(g, g_base) if g_base is not None else g
    if not ext.is_regular:
        raise ValueError("recursion_table needs a regular grammar")
    if domain is None:
        domain = StateDomain.for_instance(inst)
    order = _column_order(ext)
    n_star = len(order) * len(domain)
    rows = _fixpoint_rows(order, lambda r: step_H(ext, domain.a1, domain.a2, r))
    if len(rows) - 1 > n_star:
        raise RuntimeError("fixpoint exceeded its provable bound")
    return RecursionTable(order, tuple(rows), n_star)


def behavioral_table(
    g: MacroGrammar,
    g_base: Optional[MacroGrammar],
    inst: LearningInstance,
    *,
    max_values: int = 1 << 16,
) -> RecursionTable:
    """The behavioral-vector recursion table, computed by direct evaluation.

    Entries are tuples of raw example values, no automata involved; this
    is the independent oracle the state pipeline is checked against.
    """
    ext = extend(g, g_base) if g_base is not None else g
    if not ext.is_regular:
        raise ValueError("behavioral_table needs a regular grammar")
    universe = 1
    for m in inst.examples:
        universe *= len(m.domain)
        if universe > max_values:
            raise ResourceLimitError(
                "max_values", max_values, "behavioral vector domain too large"
            )
    order = _column_order(ext)
    rows = _fixpoint_rows(order, lambda r: _vector_step(ext, inst, r))
    return RecursionTable(order, tuple(rows), len(order) * universe)


def behavioral_vector(term, inst: LearningInstance) -> tuple:
    """Raw evaluation results across the instance's examples, train then test."""
    return tuple(evaluate(term, m) for m in inst.examples)


def behavioral_targets(inst: LearningInstance, vectors) -> tuple:
    """Split vectors into the generalizing (F1) and non-generalizing (F2) sets."""
    n_train = len(inst.train)
    f1, f2 = set(), set()
    for v in vectors:
        ok = [value in m.accepting for value, m in zip(v, inst.examples)]
        if all(ok):
            f1.add(v)
        elif all(ok[:n_train]):
            f2.add(v)
    return frozenset(f1), frozenset(f2)


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    row: Optional[int] = None
    reason: Optional[str] = None

    def __bool__(self):
        return self.accepted


def acceptable(table: RecursionTable, f1, f2) -> Verdict:
    """The acceptability condition over the table's start column.

    Accept at the first row whose entry meets f1, provided no strictly
    earlier row met f2; a row meeting both still accepts.
    """
    f1 = frozenset(f1)
    f2 = frozenset(f2)
    start = table.nonterminals[0]
    f2_row = None
    for i, row in enumerate(table.rows):
        cell = row[start]
        if cell & f1:
            if f2_row is None:
                return Verdict(True, row=i)
            return Verdict(
                False, reason=f"non-generalizing value first at row {f2_row}"
            )
        if f2_row is None and cell & f2:
            f2_row = i
    return Verdict(False, reason="no generalizing value in any row")


def solves_grammar(
    g: MacroGrammar,
    g_base: Optional[MacroGrammar],
    inst: LearningInstance,
    ordering: str = "depth",
    *,
    domain: Optional[StateDomain] = None,
) -> Verdict:
    """Whether the extended grammar solves the instance under an ordering.

    "depth" applies the full acceptability condition; "adequate" only
    asks for some depth achieving a generalizing value, which matches
    nonemptiness of the grammar's language intersected with the
    all-consistent automaton.
    """
    if ordering not in ("depth", "adequate"):
        raise ValueError(f"ordering must be 'depth' or 'adequate', got {ordering!r}")
    if domain is None:
        domain = StateDomain.for_instance(inst)
    table = recursion_table(g, g_base, inst, domain=domain)
    if ordering == "depth":
        return acceptable(table, domain.f1, domain.f2)
    start = table.nonterminals[0]
    for i, row in enumerate(table.rows):
        if row[start] & domain.f1:
            return Verdict(True, row=i)
    return Verdict(False, reason="no generalizing value in any row")
