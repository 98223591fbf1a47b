from fractions import Fraction

import pytest

from gramsynth.automata import nta_emptiness, nta_intersect, nta_membership
from gramsynth.core import RankedAlphabet, t
from gramsynth.semantics import (
    FiniteInterpretation,
    LearningInstance,
    RectangleScenario,
    compile_rectangles,
    consistent,
    evaluate,
    example_automaton,
    instance_automata,
    non_generalizing,
    solves,
)
from grammars import RECT_ALPHABET, fig2_scenario
from oracle import all_terms

# Atom truth vectors of the nine-point fixture, in point order (3 positive
# then 6 negative), frozen from direct rational containment checks.
ATOM_VECTORS = {
    "r1": (1, 1, 0, 1, 1, 1, 0, 0, 0),
    "r2": (0, 0, 1, 0, 0, 0, 1, 1, 1),
    "r3": (1, 1, 1, 1, 1, 0, 0, 0, 1),
    "r4": (1, 1, 1, 0, 0, 1, 1, 0, 1),
    "r5": (1, 1, 1, 0, 1, 0, 1, 1, 0),
}

SOLUTION = t("and", t("r3"), t("and", t("r4"), t("r5")))
OVERFIT = t("or", t("r1"), t("r2"))


@pytest.fixture(scope="module")
def fig2():
    return compile_rectangles(fig2_scenario())


@pytest.fixture(scope="module")
def fig2_automata(fig2):
    return instance_automata(fig2)


def parity_example():
    # counts f-nodes mod 2; accepts even counts
    alpha = RankedAlphabet({"f": 2, "g": 1, "a": 0})
    ops = {
        "f": lambda x, y: (x + y + 1) % 2,
        "g": lambda x: x,
        "a": lambda: 0,
    }
    return FiniteInterpretation(alpha, (0, 1), ops, (0,))


def test_evaluate_folds_bottom_up():
    m = parity_example()
    assert evaluate(t("a"), m) == 0
    assert evaluate(t("f", t("a"), t("a")), m) == 1
    assert evaluate(t("g", t("f", t("a"), t("a"))), m) == 1
    assert evaluate(t("f", t("f", t("a"), t("a")), t("a")), m) == 0
    assert consistent(t("a"), m)
    assert not consistent(t("f", t("a"), t("a")), m)


def test_evaluate_unknown_symbol():
    m = parity_example()
    with pytest.raises(ValueError, match="no operation"):
        evaluate(t("zzz"), m)


def test_evaluate_op_leaving_domain():
    alpha = RankedAlphabet({"a": 0})
    m = FiniteInterpretation(alpha, (0, 1), {"a": lambda: 7}, (0,))
    with pytest.raises(ValueError, match="left the domain"):
        evaluate(t("a"), m)


def test_interpretation_validation():
    alpha = RankedAlphabet({"a": 0})
    with pytest.raises(ValueError, match="domain"):
        FiniteInterpretation(alpha, (), {"a": lambda: 0}, ())
    with pytest.raises(ValueError, match="accepting"):
        FiniteInterpretation(alpha, (0,), {"a": lambda: 0}, (1,))
    with pytest.raises(ValueError, match="no operation"):
        FiniteInterpretation(alpha, (0,), {}, (0,))


def test_learning_instance_validation():
    m = parity_example()
    with pytest.raises(ValueError, match="training"):
        LearningInstance(())
    other = FiniteInterpretation(
        RankedAlphabet({"b": 0}), (0,), {"b": lambda: 0}, (0,)
    )
    with pytest.raises(ValueError, match="share"):
        LearningInstance((m,), (other,))
    inst = LearningInstance((m,))
    assert inst.test == ()
    assert inst.examples == (m,)


def test_solves_accepts_instance_or_iterable():
    m = parity_example()
    inst = LearningInstance((m,))
    assert solves(t("a"), inst)
    assert solves(t("a"), [m, m])
    assert solves(t("f", t("a"), t("a")), ())  # vacuous
    assert not solves(t("f", t("a"), t("a")), inst)


def test_fig2_atom_vectors(fig2):
    assert len(fig2.train) == 3 and len(fig2.test) == 6
    for name, want in ATOM_VECTORS.items():
        got = tuple(evaluate(t(name), m) for m in fig2.examples)
        assert got == want, name


def test_fig2_key_candidates(fig2):
    assert solves(SOLUTION, fig2)
    assert tuple(evaluate(SOLUTION, m) for m in fig2.examples) == (
        1, 1, 1, 0, 0, 0, 0, 0, 0,
    )
    # r1|r2 fits the training points but accepts every negative too
    assert solves(OVERFIT, fig2.train)
    assert non_generalizing(OVERFIT, fig2)
    assert not solves(OVERFIT, fig2)
    # r2 alone already misses a training point
    assert not solves(t("r2"), fig2.train)
    assert not non_generalizing(t("r2"), fig2)


def test_rectangles_are_closed():
    scen = RectangleScenario(
        {"r": (0, 2, 0, 2)},
        [((2, 1), "+"), ((Fraction(20001, 10000), 1), "-")],
    )
    assert scen.contains("r", (Fraction(2), Fraction(1)))
    inst = compile_rectangles(scen)
    assert evaluate(t("r"), inst.train[0]) == 1
    assert evaluate(t("r"), inst.test[0]) == 0


def test_degenerate_rectangle_is_a_point():
    scen = RectangleScenario(
        {"r": (1, 1, 1, 1)},
        [((1, 1), "+"), ((1, Fraction(9, 8)), "-")],
    )
    inst = compile_rectangles(scen)
    assert solves(t("r"), inst)


def test_scenario_validation():
    with pytest.raises(ValueError, match="empty extent"):
        RectangleScenario({"r": (2, 1, 0, 1)}, [])
    with pytest.raises(ValueError, match="label"):
        RectangleScenario({"r": (0, 1, 0, 1)}, [((0, 0), "pos")])
    with pytest.raises(ValueError, match="collides"):
        RectangleScenario({"not": (0, 1, 0, 1)}, [])
    with pytest.raises(ValueError, match="rectangle"):
        RectangleScenario({}, [])


def test_compile_keeps_label_class_order():
    scen = RectangleScenario(
        {"r": (0, 4, 0, 4)},
        [((5, 5), "-"), ((1, 1), "+"), ((0, 0), "+"), ((2, 5), "-")],
    )
    inst = compile_rectangles(scen)
    assert len(inst.train) == 2 and len(inst.test) == 2
    # first test example is the point (5,5), outside r
    assert evaluate(t("r"), inst.test[0]) == 0
    assert evaluate(t("r"), inst.test[1]) == 0
    assert [evaluate(t("r"), m) for m in inst.train] == [1, 1]


def test_example_automaton_is_deterministic(fig2):
    for m in fig2.examples:
        a = example_automaton(m)
        for symbol, arity in m.alphabet.symbols.items():
            seen = {}
            for state in a.states:
                for tp in a.moves(state, symbol):
                    assert tp not in seen, "two states share a child tuple"
                    seen[tp] = state
            assert len(seen) == len(a.states) ** arity


def test_example_automaton_tracks_consistency(fig2):
    m = fig2.examples[0]
    pos = example_automaton(m)
    neg = example_automaton(m, "negated")
    for term in all_terms(RECT_ALPHABET, 4):
        ok = consistent(term, m)
        assert nta_membership(term, pos) == ok
        assert nta_membership(term, neg) == (not ok)


def test_positive_and_negated_are_disjoint(fig2):
    m = fig2.examples[3]
    both = nta_intersect(example_automaton(m), example_automaton(m, "negated"))
    assert nta_emptiness(both) is None


def test_polarity_validation(fig2):
    with pytest.raises(ValueError, match="polarity"):
        example_automaton(fig2.examples[0], "flipped")


def test_instance_automata_fig2(fig2, fig2_automata):
    a1, a2 = fig2_automata
    assert nta_membership(SOLUTION, a1)
    assert not nta_membership(SOLUTION, a2)
    assert nta_membership(OVERFIT, a2)
    assert not nta_membership(OVERFIT, a1)
    assert not nta_membership(t("r2"), a1)
    assert not nta_membership(t("r2"), a2)


def test_instance_automata_match_brute_force(fig2, fig2_automata):
    a1, a2 = fig2_automata
    for term in all_terms(RECT_ALPHABET, 5):
        assert nta_membership(term, a1) == solves(term, fig2)
        assert nta_membership(term, a2) == non_generalizing(term, fig2)


def test_instance_automata_without_test_examples():
    m = parity_example()
    a1, a2 = instance_automata(LearningInstance((m,)))
    assert nta_membership(t("a"), a1)
    assert not nta_membership(t("f", t("a"), t("a")), a1)
    assert nta_emptiness(a2) is None
