"""Finite example semantics: interpretations, rectangle problems, example automata.

A labeled example interprets every alphabet symbol over a finite value
domain and marks some values as accepting.  Candidate terms are evaluated
bottom-up; a candidate is good for the example when its value is accepting.
Each example also induces a bottom-up deterministic tree automaton, which is
how the rest of the pipeline consumes examples.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from itertools import product

from .automata import Nta, nta_intersect, nta_product, nta_union
from .core import RankedAlphabet, Term


class FiniteInterpretation:
    """One labeled example: finite domain, operation table, accepting values."""

    __slots__ = ("alphabet", "domain", "ops", "accepting")

    def __init__(self, alphabet: RankedAlphabet, domain, ops, accepting):
        self.alphabet = alphabet
        self.domain = frozenset(domain)
        self.ops = dict(ops)
        self.accepting = frozenset(accepting)
        if not self.domain:
            raise ValueError("domain must be nonempty")
        if not self.accepting <= self.domain:
            raise ValueError("accepting values must come from the domain")
        missing = [s for s in alphabet if s not in self.ops]
        if missing:
            raise ValueError(f"no operation for symbols {missing}")


def evaluate(term: Term, m: FiniteInterpretation):
    """Value of a term under one example's operations."""
    fn = m.ops.get(term.symbol)
    if fn is None:
        raise ValueError(f"symbol {term.symbol!r} has no operation")
    value = fn(*(evaluate(c, m) for c in term.children))
    if value not in m.domain:
        raise ValueError(f"operation for {term.symbol!r} left the domain: {value!r}")
    return value


def consistent(term: Term, m: FiniteInterpretation) -> bool:
    return evaluate(term, m) in m.accepting


class LearningInstance:
    """Ordered training and test examples over one shared alphabet.

    A solution must be consistent with every training example; the test
    examples are the held-out ones a generalizing solution also satisfies.
    """

    __slots__ = ("train", "test")

    def __init__(self, train, test=()):
        self.train = tuple(train)
        self.test = tuple(test)
        if not self.train:
            raise ValueError("need at least one training example")
        alphabet = self.train[0].alphabet
        for m in self.train + self.test:
            if m.alphabet != alphabet:
                raise ValueError("all examples must share one alphabet")

    @property
    def alphabet(self) -> RankedAlphabet:
        return self.train[0].alphabet

    @property
    def examples(self):
        """Train then test, the order everything downstream indexes by."""
        return self.train + self.test


def solves(term: Term, target) -> bool:
    """Whether the term is consistent with every example.

    target is a LearningInstance (train and test together) or any iterable
    of interpretations; an empty iterable is solved vacuously.
    """
    if isinstance(target, LearningInstance):
        target = target.examples
    return all(consistent(term, m) for m in target)


def non_generalizing(term: Term, inst: LearningInstance) -> bool:
    """Consistent with all of train but wrong on at least one test example."""
    return solves(term, inst.train) and not solves(term, inst.test)


_CONNECTIVES = {"and": 2, "or": 2, "not": 1}


class RectangleScenario:
    """Axis-aligned rectangles over the rational plane plus labeled points.

    Rectangle names become nullary symbols meaning "the point lies in this
    rectangle"; candidate terms combine them with and/or/not.  Rectangles
    are closed, so boundary points count as inside.  Coordinates go through
    Fraction, keeping containment exact.
    """

    __slots__ = ("rectangles", "points")

    def __init__(self, rectangles, points):
        self.rectangles = {
            name: tuple(Fraction(v) for v in bounds)
            for name, bounds in dict(rectangles).items()
        }
        self.points = tuple(
            ((Fraction(x), Fraction(y)), label) for (x, y), label in points
        )
        if not self.rectangles:
            raise ValueError("need at least one rectangle")
        for name, bounds in self.rectangles.items():
            if name in _CONNECTIVES:
                raise ValueError(f"rectangle name {name!r} collides with a connective")
            if len(bounds) != 4:
                raise ValueError(f"rectangle {name!r} needs (xmin, xmax, ymin, ymax)")
            xmin, xmax, ymin, ymax = bounds
            if xmin > xmax or ymin > ymax:
                raise ValueError(f"rectangle {name!r} has an empty extent")
        for _, label in self.points:
            if label not in ("+", "-"):
                raise ValueError(f"point label must be '+' or '-', got {label!r}")

    @property
    def alphabet(self) -> RankedAlphabet:
        return RankedAlphabet({**{n: 0 for n in self.rectangles}, **_CONNECTIVES})

    def contains(self, name: str, point) -> bool:
        xmin, xmax, ymin, ymax = self.rectangles[name]
        x, y = point
        return xmin <= x <= xmax and ymin <= y <= ymax


def compile_rectangles(scenario: RectangleScenario) -> LearningInstance:
    """One Boolean example per labeled point; positives train, negatives test.

    Each point becomes an interpretation over {0, 1}: a rectangle symbol is
    the constant "this rectangle contains the point", the connectives are
    the usual Boolean operations, and the accepting set is {1} for a
    positive point and {0} for a negative one.  Relative order within each
    label class follows the scenario's point order.
    """
    alphabet = scenario.alphabet
    train, test = [], []
    for point, label in scenario.points:
        ops = {
            "and": lambda a, b: a & b,
            "or": lambda a, b: a | b,
            "not": lambda a: 1 - a,
        }
        for name in scenario.rectangles:
            inside = int(scenario.contains(name, point))
            ops[name] = lambda v=inside: v
        accepting = {1} if label == "+" else {0}
        bucket = train if label == "+" else test
        bucket.append(FiniteInterpretation(alphabet, (0, 1), ops, accepting))
    return LearningInstance(train, test)


def example_automaton(m: FiniteInterpretation, polarity: str = "positive") -> Nta:
    """Bottom-up deterministic automaton for the terms an example accepts.

    States are domain values and a term reaches exactly its value, so the
    automaton accepts a term iff the term's value is initial.  Polarity
    "negated" flips the initial set to the complement: same table, accepts
    exactly the terms the example rejects.
    """
    if polarity == "positive":
        initial = m.accepting
    elif polarity == "negated":
        initial = m.domain - m.accepting
    else:
        raise ValueError(f"polarity must be 'positive' or 'negated', got {polarity!r}")
    transitions = {}
    for symbol, arity in m.alphabet.symbols.items():
        fn = m.ops[symbol]
        for combo in product(m.domain, repeat=arity):
            value = fn(*combo)
            if value not in m.domain:
                raise ValueError(
                    f"operation for {symbol!r} left the domain: {value!r}"
                )
            transitions.setdefault((value, symbol), set()).add(combo)
    return Nta(m.domain, m.alphabet, initial, transitions)


def instance_automata(inst: LearningInstance):
    """The pair (A1, A2) of automata an instance induces.

    A1 accepts the terms consistent with every example, train and test
    alike.  A2 accepts the non-generalizing terms: consistent with all of
    train yet rejected by at least one test example.  With no test examples
    A2 has the empty language.
    """
    a1 = nta_product([example_automaton(m) for m in inst.examples])
    if not inst.test:
        return a1, Nta((), inst.alphabet, (), {})
    train = nta_product([example_automaton(m) for m in inst.train])
    misses = reduce(nta_union, [example_automaton(m, "negated") for m in inst.test])
    return a1, nta_intersect(train, misses)
