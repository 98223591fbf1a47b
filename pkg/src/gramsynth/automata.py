"""Tree automata over ranked alphabets.

Two kinds: top-down nondeterministic automata with explicit transition
tables, and two-way alternating automata whose states are produced
lazily and whose transitions are positive Boolean formulas over
(direction, state) atoms. Acceptance for the two-way automata requires
a finite run, evaluated as a least fixpoint over configurations.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable

from .core import RankedAlphabet, ResourceLimitError, MacroGrammar, Term, term_key

STAY = "stay"
UP = "up"
# child moves are 1-based integers; common aliases
DOWN = 1
LEFT = 1
RIGHT = 2


class Nta:
    """Top-down nondeterministic tree automaton with explicit transitions.

    transitions maps (state, symbol) to a set of child-state tuples whose
    length is the symbol's arity; a run labels the root with an initial
    state and each node's children along some transition tuple.
    """

    __slots__ = ("states", "alphabet", "initial", "transitions", "_by_symbol", "_parents")

    def __init__(self, states, alphabet: RankedAlphabet, initial, transitions: dict):
        self.states = frozenset(states)
        self.alphabet = alphabet
        self.initial = frozenset(initial)
        if not self.initial <= self.states:
            raise ValueError("initial states must be declared states")
        table = {}
        for (state, symbol), tuples in transitions.items():
            if state not in self.states:
                raise ValueError(f"transition from undeclared state {state!r}")
            want = alphabet.arity(symbol)
            tuples = frozenset(tuple(tp) for tp in tuples)
            for tp in tuples:
                if len(tp) != want:
                    raise ValueError(
                        f"transition on {symbol!r} needs {want} children, got {len(tp)}"
                    )
                for child in tp:
                    if child not in self.states:
                        raise ValueError(f"transition into undeclared state {child!r}")
            if tuples:
                table[(state, symbol)] = tuples
        self.transitions = table
        self._by_symbol = None
        self._parents = None

    def moves(self, state, symbol) -> frozenset:
        return self.transitions.get((state, symbol), frozenset())

    def by_symbol(self, symbol) -> list:
        """All (state, child-tuple) transitions on a symbol."""
        if self._by_symbol is None:
            index = {}
            for (state, sym), tuples in self.transitions.items():
                for tp in tuples:
                    index.setdefault(sym, []).append((state, tp))
            self._by_symbol = index
        return self._by_symbol.get(symbol, [])

    def parents(self, symbol, tp) -> frozenset:
        """States with a transition on symbol into exactly this child tuple."""
        if self._parents is None:
            index = {}
            for (state, sym), tuples in self.transitions.items():
                for t in tuples:
                    key = (sym, t)
                    got = index.get(key)
                    if got is None:
                        index[key] = {state}
                    else:
                        got.add(state)
            self._parents = {k: frozenset(v) for k, v in index.items()}
        return self._parents.get((symbol, tuple(tp)), frozenset())

    def __repr__(self):
        return (
            f"Nta({len(self.states)} states, {len(self.initial)} initial, "
            f"{sum(len(v) for v in self.transitions.values())} transitions)"
        )


def nta_from_grammar(g: MacroGrammar) -> Nta:
    """Top-down automaton with the language of a regular tree grammar.

    One state per nonterminal plus one per alphabet-labeled position in a
    rule body; unit rules (bare nonterminal bodies) are closed off so the
    automaton needs no epsilon moves.
    """
    if not g.is_regular:
        raise ValueError("nta_from_grammar needs a regular grammar")

    unit_next = {n: set() for n in g.nonterminals}
    real_rules = []  # (lhs, rhs) with a non-nonterminal head
    for lhs, rhs in g.rules:
        if rhs.symbol in g.nonterminals:
            unit_next[lhs].add(rhs.symbol)
        else:
            real_rules.append((lhs, rhs))

    def unit_closure(n):
        seen = {n}
        frontier = [n]
        while frontier:
            m = frontier.pop()
            for nxt in unit_next[m]:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return seen

    states = {("nt", n) for n in g.nonterminals}
    transitions = {}

    def add(state, symbol, tp):
        transitions.setdefault((state, symbol), set()).add(tp)

    def child_state(ridx, node, path):
        if node.symbol in g.nonterminals:
            return ("nt", node.symbol)
        state = ("pos", ridx, path)
        states.add(state)
        tp = tuple(
            child_state(ridx, c, path + (i,)) for i, c in enumerate(node.children)
        )
        add(state, node.symbol, tp)
        return state

    rule_heads = []
    for ridx, (lhs, rhs) in enumerate(real_rules):
        tp = tuple(child_state(ridx, c, (i,)) for i, c in enumerate(rhs.children))
        rule_heads.append((lhs, rhs.symbol, tp))

    for n in g.nonterminals:
        reachable = unit_closure(n)
        for lhs, symbol, tp in rule_heads:
            if lhs in reachable:
                add(("nt", n), symbol, tp)

    return Nta(states, g.alphabet, {("nt", g.start)}, transitions)


def nta_intersect(a: Nta, b: Nta) -> Nta:
    """Product automaton, restricted to state pairs reachable from the initial pairs."""
    if a.alphabet != b.alphabet:
        raise ValueError("nta_intersect: alphabets differ")
    initial = {(p, q) for p in a.initial for q in b.initial}
    states = set(initial)
    transitions = {}
    frontier = list(initial)
    while frontier:
        p, q = frontier.pop()
        for symbol in a.alphabet:
            tuples = set()
            for ta in a.moves(p, symbol):
                for tb in b.moves(q, symbol):
                    tp = tuple(zip(ta, tb))
                    tuples.add(tp)
                    for child in tp:
                        if child not in states:
                            states.add(child)
                            frontier.append(child)
            if tuples:
                transitions[((p, q), symbol)] = tuples
    return Nta(states, a.alphabet, initial, transitions)


def nta_product(automata) -> Nta:
    """Intersection of any number of automata, with state vectors as states.

    Coordinate i of a state is a state of automata[i], so a run of the
    product is a simultaneous run of every factor.  Only vectors reachable
    from the initial ones are materialized.
    """
    automata = list(automata)
    if not automata:
        raise ValueError("nta_product needs at least one automaton")
    alphabet = automata[0].alphabet
    for a in automata[1:]:
        if a.alphabet != alphabet:
            raise ValueError("nta_product: alphabets differ")
    initial = set(product(*[a.initial for a in automata]))
    states = set(initial)
    transitions = {}
    frontier = list(initial)
    while frontier:
        vec = frontier.pop()
        for symbol in alphabet:
            move_sets = [a.moves(s, symbol) for a, s in zip(automata, vec)]
            if not all(move_sets):
                continue
            tuples = set()
            for combo in product(*move_sets):
                tp = tuple(zip(*combo))
                tuples.add(tp)
                for child in tp:
                    if child not in states:
                        states.add(child)
                        frontier.append(child)
            transitions[(vec, symbol)] = tuples
    return Nta(states, alphabet, initial, transitions)


def nta_union(a: Nta, b: Nta) -> Nta:
    """Disjoint union of the two automata."""
    if a.alphabet != b.alphabet:
        raise ValueError("nta_union: alphabets differ")
    states = {("u1", s) for s in a.states} | {("u2", s) for s in b.states}
    initial = {("u1", s) for s in a.initial} | {("u2", s) for s in b.initial}
    transitions = {}
    for (state, symbol), tuples in a.transitions.items():
        transitions[(("u1", state), symbol)] = {tuple(("u1", c) for c in tp) for tp in tuples}
    for (state, symbol), tuples in b.transitions.items():
        transitions[(("u2", state), symbol)] = {tuple(("u2", c) for c in tp) for tp in tuples}
    return Nta(states, a.alphabet, initial, transitions)


def reachable_states(term: Term, a: Nta, memo: dict = None) -> frozenset:
    """States from which the automaton can accept the given subtree."""
    if memo is None:
        memo = {}
    got = memo.get(term)
    if got is not None:
        return got
    child_sets = [reachable_states(c, a, memo) for c in term.children]
    combos = 1
    for cs in child_sets:
        combos *= len(cs)
    if combos == 0:
        out = frozenset()
    elif combos <= 4096:
        # Few child-state combinations: reverse lookups beat scanning, and
        # on deterministic automata every child set is a singleton.
        out = set()
        for combo in product(*child_sets):
            out |= a.parents(term.symbol, combo)
        out = frozenset(out)
    else:
        out = frozenset(
            state
            for state, tp in a.by_symbol(term.symbol)
            if all(c in cs for c, cs in zip(tp, child_sets))
        )
    memo[term] = out
    return out


def nta_membership(term: Term, a: Nta) -> bool:
    return bool(reachable_states(term, a) & a.initial)


def nta_emptiness(a: Nta):
    """A minimal-height witness term, or None when the language is empty.

    Ties between equal-height witnesses break on term_key so the result
    is deterministic regardless of set iteration order.
    """
    witness = {}
    while True:
        grown = {}
        for (state, symbol), tuples in a.transitions.items():
            if state in witness:
                continue
            for tp in tuples:
                if all(c in witness for c in tp):
                    cand = Term(symbol, [witness[c] for c in tp])
                    best = grown.get(state)
                    if best is None or term_key(cand) < term_key(best):
                        grown[state] = cand
        if not grown:
            break
        witness.update(grown)
    hits = [witness[s] for s in a.initial if s in witness]
    if not hits:
        return None
    return min(hits, key=lambda w: (_height(w), term_key(w)))


def _height(term: Term) -> int:
    return 1 + max((_height(c) for c in term.children), default=0)


class TransitionFormula:
    """Positive Boolean formula over (direction, state) atoms."""

    __slots__ = ()

    def evaluate(self, assign) -> bool:
        """assign maps (direction, state) pairs to booleans."""
        raise NotImplementedError

    def dual(self) -> "TransitionFormula":
        """Swap conjunction with disjunction and true with false."""
        raise NotImplementedError

    def atoms(self):
        raise NotImplementedError


@dataclass(frozen=True)
class FTrue(TransitionFormula):
    def evaluate(self, assign):
        return True

    def dual(self):
        return FALSE

    def atoms(self):
        return ()


@dataclass(frozen=True)
class FFalse(TransitionFormula):
    def evaluate(self, assign):
        return False

    def dual(self):
        return TRUE

    def atoms(self):
        return ()


TRUE = FTrue()
FALSE = FFalse()


@dataclass(frozen=True)
class Move(TransitionFormula):
    """Atom: continue in `state` after moving in `direction` (stay, up, or child index)."""

    direction: object
    state: object

    def evaluate(self, assign):
        return assign((self.direction, self.state))

    def dual(self):
        return self

    def atoms(self):
        yield (self.direction, self.state)


@dataclass(frozen=True)
class And(TransitionFormula):
    parts: tuple

    def evaluate(self, assign):
        return all(p.evaluate(assign) for p in self.parts)

    def dual(self):
        return Or(tuple(p.dual() for p in self.parts))

    def atoms(self):
        for p in self.parts:
            yield from p.atoms()


@dataclass(frozen=True)
class Or(TransitionFormula):
    parts: tuple

    def evaluate(self, assign):
        return any(p.evaluate(assign) for p in self.parts)

    def dual(self):
        return And(tuple(p.dual() for p in self.parts))

    def atoms(self):
        for p in self.parts:
            yield from p.atoms()


def conj(parts: Iterable[TransitionFormula]) -> TransitionFormula:
    parts = tuple(p for p in parts if p is not TRUE)
    if any(p is FALSE for p in parts):
        return FALSE
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Iterable[TransitionFormula]) -> TransitionFormula:
    parts = tuple(p for p in parts if p is not FALSE)
    if any(p is TRUE for p in parts):
        return TRUE
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


class TwoWayAta:
    """Two-way alternating tree automaton with lazily described states.

    delta is a callable (state, symbol) -> TransitionFormula; states are
    any hashable descriptors and the full state space is never listed.
    """

    __slots__ = ("alphabet", "initial", "delta", "_cache")

    def __init__(self, alphabet: RankedAlphabet, initial, delta):
        self.alphabet = alphabet
        self.initial = tuple(initial)
        self.delta = delta
        self._cache = {}

    def formula(self, state, symbol) -> TransitionFormula:
        key = (state, symbol)
        got = self._cache.get(key)
        if got is None:
            got = self.delta(state, symbol)
            self._cache[key] = got
        return got


def _index_nodes(term: Term) -> dict:
    nodes = {(): term}
    stack = [((), term)]
    while stack:
        path, node = stack.pop()
        for i, child in enumerate(node.children):
            cp = path + (i,)
            nodes[cp] = child
            stack.append((cp, child))
    return nodes


def _move(path: tuple, direction, node: Term):
    """Target path for a move, or None when it leaves the tree."""
    if direction == STAY:
        return path
    if direction == UP:
        return path[:-1] if path else None
    if isinstance(direction, int) and 1 <= direction <= len(node.children):
        return path + (direction - 1,)
    return None


def ata_membership(term: Term, ata: TwoWayAta) -> bool:
    """Whether some finite run exists from an initial state at the root.

    Least fixpoint over (node, state) configurations: a configuration is
    winning once its transition formula evaluates true reading winning
    configurations for atoms; moves leaving the tree read as false.
    """
    nodes = _index_nodes(term)
    winning = set()
    waiting = {}  # config -> configs to re-evaluate when it turns winning
    seen = set()
    stack = [((), q) for q in ata.initial]
    seen.update(stack)

    def targets(config):
        path, state = config
        node = nodes[path]
        for direction, nxt in ata.formula(state, node.symbol).atoms():
            tp = _move(path, direction, node)
            if tp is not None:
                yield (tp, nxt)

    def evaluate(config) -> bool:
        path, state = config
        node = nodes[path]

        def assign(atom):
            direction, nxt = atom
            tp = _move(path, direction, node)
            return tp is not None and (tp, nxt) in winning

        return ata.formula(state, node.symbol).evaluate(assign)

    while stack:
        config = stack.pop()
        if config in winning:
            continue
        if evaluate(config):
            winning.add(config)
            stack.extend(waiting.pop(config, ()))
            continue
        for dep in targets(config):
            if dep in winning:
                continue
            waiting.setdefault(dep, []).append(config)
            if dep not in seen:
                seen.add(dep)
                stack.append(dep)

    return any(((), q) in winning for q in ata.initial)


def _min_antichain(sets) -> frozenset:
    """Keep only the inclusion-minimal sets."""
    pool = sorted(set(sets), key=len)
    kept = []
    for s in pool:
        if not any(k <= s for k in kept):
            kept.append(s)
    return frozenset(kept)


def _sem(formula, table, child_tables, limit):
    """Achievable exit-obligation sets for a formula at one node.

    table maps each state to its current exit antichain at this node;
    child_tables do the same for the node's children. An exit set lists
    the states in which some branch of a finite partial run leaves the
    node upward; the empty set means the run can finish inside.
    """
    if formula is TRUE:
        return {frozenset()}
    if formula is FALSE:
        return set()
    if isinstance(formula, Move):
        direction, state = formula.direction, formula.state
        if direction == STAY:
            return set(table.get(state, ()))
        if direction == UP:
            return {frozenset((state,))}
        if isinstance(direction, int) and 1 <= direction <= len(child_tables):
            child = child_tables[direction - 1]
            out = set()
            for exits in child.get(state, ()):
                partial = {frozenset()}
                for u in exits:
                    cont = table.get(u, ())
                    partial = {a | b for a in partial for b in cont}
                    if len(partial) > limit:
                        raise ResourceLimitError("max_antichain", limit)
                    if not partial:
                        break
                out |= partial
            return out
        return set()
    if isinstance(formula, And):
        acc = {frozenset()}
        for part in formula.parts:
            branch = _sem(part, table, child_tables, limit)
            acc = {a | b for a in acc for b in branch}
            if len(acc) > limit:
                raise ResourceLimitError("max_antichain", limit)
            if not acc:
                return acc
        return acc
    if isinstance(formula, Or):
        acc = set()
        for part in formula.parts:
            acc |= _sem(part, table, child_tables, limit)
            if len(acc) > limit:
                raise ResourceLimitError("max_antichain", limit)
        return acc
    raise TypeError(f"not a transition formula: {formula!r}")


def _combine(ata, states, symbol, child_values, limit):
    """Exit annotation of a node from its children's annotations, as a canonical value."""
    child_tables = [dict(v) for v in child_values]
    table = {q: frozenset() for q in states}
    changed = True
    while changed:
        changed = False
        for q in states:
            new = _min_antichain(
                _sem(ata.formula(q, symbol), table, child_tables, limit)
            )
            if new != table[q]:
                table[q] = new
                changed = True
    return frozenset((q, ac) for q, ac in table.items() if ac)


def _reachable_ata_states(ata: TwoWayAta, cap: int) -> list:
    seen = []
    index = set()
    frontier = list(dict.fromkeys(ata.initial))
    for q in frontier:
        index.add(q)
    while frontier:
        q = frontier.pop()
        seen.append(q)
        for symbol in ata.alphabet:
            for _, nxt in ata.formula(q, symbol).atoms():
                if nxt not in index:
                    index.add(nxt)
                    if len(index) > cap:
                        raise ResourceLimitError(
                            "max_ata_states", cap, f"explored {len(index)} state descriptors"
                        )
                    frontier.append(nxt)
    return seen


def ata_to_nta(
    ata: TwoWayAta,
    *,
    max_states: int = 20_000,
    max_ata_states: int = 2_000,
    max_antichain: int = 5_000,
) -> Nta:
    """Equivalent top-down NTA, built by closing node annotations bottom-up.

    A tree's annotation maps each automaton state to the minimal sets of
    upward exit obligations a finite partial run can leave behind; the
    tree is accepted exactly when some initial state can finish with no
    obligations. NTA states are the annotation values discovered over the
    whole alphabet, so the construction is exponential and budget-capped;
    it is meant for small instances and cross-checks.
    """
    states = _reachable_ata_states(ata, max_ata_states)
    values = []
    index = {}
    transitions = {}
    tried = set()

    def note(value):
        if value not in index:
            index[value] = len(values)
            values.append(value)
            if len(values) > max_states:
                raise ResourceLimitError(
                    "max_states", max_states, f"explored {len(values)} annotation values"
                )
            return True
        return False

    grew = True
    while grew:
        grew = False
        snapshot = list(values)
        for symbol, arity in ata.alphabet.symbols.items():
            for combo in product(snapshot, repeat=arity):
                key = (symbol, combo)
                if key in tried:
                    continue
                tried.add(key)
                value = _combine(ata, states, symbol, combo, max_antichain)
                if note(value):
                    grew = True
                transitions.setdefault((value, symbol), set()).add(combo)

    initial = set()
    for value in values:
        table = dict(value)
        if any(frozenset() in table.get(q, ()) for q in ata.initial):
            initial.add(value)
    return Nta(values, ata.alphabet, initial, transitions)
