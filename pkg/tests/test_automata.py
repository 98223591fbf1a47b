import random

import pytest
from hypothesis import given, strategies as st

from gramsynth.automata import (
    FALSE,
    STAY,
    TRUE,
    UP,
    And,
    Move,
    Nta,
    Or,
    TwoWayAta,
    ata_membership,
    ata_to_nta,
    conj,
    disj,
    nta_emptiness,
    nta_from_grammar,
    nta_intersect,
    nta_membership,
    nta_union,
)
from gramsynth.core import (
    MacroGrammar,
    NonterminalSet,
    RankedAlphabet,
    ResourceLimitError,
    derive_outermost,
    parse_depth,
    t,
)
from gramsynth.encoding import enc, permissive_meta

from grammars import RECT_ALPHABET, g1, g3, g_prime, random_grammar
from oracle import all_terms, regular_member

AB = RankedAlphabet({"a": 0, "b": 0})
SMALL = RankedAlphabet({"g": 2, "h": 1, "a": 0, "b": 0})


def singleton(symbol, alphabet=AB):
    g = MacroGrammar(
        "S", NonterminalSet({"S": 0}), alphabet, [("S", t(symbol))]
    )
    return nta_from_grammar(g)


def test_singleton_language():
    a = singleton("a")
    assert nta_membership(t("a"), a)
    assert not nta_membership(t("b"), a)


def test_membership_matches_derivation_on_g1():
    g = g1()
    nta = nta_from_grammar(g)
    lang = derive_outermost(g, 4)
    for term in all_terms(RECT_ALPHABET, 6):
        want = regular_member(term, g)
        assert nta_membership(term, nta) == want
        if term in lang:
            assert want


def test_membership_matches_oracle_on_random_regular_grammars():
    rng = random.Random(7)
    checked = 0
    for _ in range(40):
        g = random_grammar(rng)
        if not g.is_regular:
            continue
        nta = nta_from_grammar(g)
        for term in all_terms(g.alphabet, 5):
            assert nta_membership(term, nta) == regular_member(term, g)
            checked += 1
    assert checked > 1000


def test_nta_from_grammar_rejects_macro_grammars():
    with pytest.raises(ValueError, match="regular"):
        nta_from_grammar(g_prime_macro())


def g_prime_macro():
    alpha = RankedAlphabet({"f": 1, "a": 0})
    nts = NonterminalSet({"S": 0, "F": 1})
    from gramsynth.core import Param

    return MacroGrammar(
        "S", nts, alpha, [("S", t("F", t("a"))), ("F", t("f", Param(1)))]
    )


def test_unit_rule_chains():
    # S -> T -> U -> a, plus a cycle between T and U
    nts = NonterminalSet({"S": 0, "T": 0, "U": 0})
    g = MacroGrammar(
        "S",
        nts,
        AB,
        [("S", t("T")), ("T", t("U")), ("U", t("T")), ("U", t("a"))],
    )
    nta = nta_from_grammar(g)
    assert nta_membership(t("a"), nta)
    assert not nta_membership(t("b"), nta)


def test_permissive_meta_automaton_accepts_encodings():
    rng = random.Random(11)
    for _ in range(20):
        g = random_grammar(rng)
        meta = permissive_meta(g.alphabet, g.nonterminals)
        nta = nta_from_grammar(meta)
        assert nta_membership(enc(g).tree, nta)


def test_intersect_union_small_languages():
    a, b = singleton("a"), singleton("b")
    both = nta_intersect(a, b)
    either = nta_union(a, b)
    assert nta_emptiness(both) is None
    assert nta_membership(t("a"), either)
    assert nta_membership(t("b"), either)
    assert nta_membership(t("a"), nta_intersect(a, a))


def test_intersect_matches_pointwise_conjunction():
    g_all = g3()
    g_and = g1()
    na, nb = nta_from_grammar(g_all), nta_from_grammar(g_and)
    prod = nta_intersect(na, nb)
    uni = nta_union(na, nb)
    for term in all_terms(RECT_ALPHABET, 5):
        x, y = nta_membership(term, na), nta_membership(term, nb)
        assert nta_membership(term, prod) == (x and y)
        assert nta_membership(term, uni) == (x or y)


def test_emptiness_witness():
    g = g3()
    witness = nta_emptiness(nta_from_grammar(g))
    assert witness == t("r1")
    assert parse_depth(g, witness) == 1

    # a grammar with an unproductive start has an empty language
    dead = MacroGrammar(
        "S", NonterminalSet({"S": 0}), SMALL, [("S", t("h", t("S")))]
    )
    assert nta_emptiness(nta_from_grammar(dead)) is None


def test_emptiness_minimal_height():
    # smallest tree needs the unary wrapper: height 3
    g = MacroGrammar(
        "S",
        NonterminalSet({"S": 0, "T": 0}),
        SMALL,
        [("S", t("g", t("T"), t("T"))), ("T", t("h", t("a")))],
    )
    witness = nta_emptiness(nta_from_grammar(g))
    assert witness == t("g", t("h", t("a")), t("h", t("a")))


formula_leaf = st.sampled_from(
    [TRUE, FALSE, Move(STAY, "q1"), Move(STAY, "q2"), Move(UP, "q3")]
)
formulas = st.recursive(
    formula_leaf,
    lambda kids: st.builds(lambda ps: And(tuple(ps)), st.lists(kids, max_size=3))
    | st.builds(lambda ps: Or(tuple(ps)), st.lists(kids, max_size=3)),
    max_leaves=8,
)


@given(formulas, st.integers())
def test_dual_is_truth_table_complement(formula, seed):
    rng = random.Random(seed)
    values = {}

    def assign(atom):
        return values.setdefault(atom, rng.random() < 0.5)

    def flipped(atom):
        return not assign(atom)

    direct = formula.evaluate(assign)
    assert formula.dual().evaluate(flipped) == (not direct)


def leaf_detector(target):
    # accepts trees containing a leaf labeled `target`
    def delta(state, symbol):
        arity = SMALL.arity(symbol)
        if arity == 0:
            return TRUE if symbol == target else FALSE
        return disj(Move(i, "seek") for i in range(1, arity + 1))

    return TwoWayAta(SMALL, ["seek"], delta)


def test_ata_membership_basics():
    ata = TwoWayAta(AB, ["q"], lambda q, s: TRUE if s == "a" else FALSE)
    assert ata_membership(t("a"), ata)
    assert not ata_membership(t("b"), ata)

    looping = TwoWayAta(AB, ["q"], lambda q, s: Move(STAY, "q"))
    assert not ata_membership(t("a"), looping)


def test_ata_membership_leaf_detector():
    ata = leaf_detector("b")
    assert ata_membership(t("g", t("a"), t("b")), ata)
    assert ata_membership(t("h", t("b")), ata)
    assert not ata_membership(t("h", t("a")), ata)
    assert not ata_membership(t("g", t("h", t("a")), t("a")), ata)


def test_ata_membership_up_moves():
    # walk to the first child, then back up, then require the root label g
    def delta(state, symbol):
        if state == "start":
            return Move(1, "below") if SMALL.arity(symbol) else FALSE
        if state == "below":
            return Move(UP, "check")
        if state == "check":
            return TRUE if symbol == "g" else FALSE
        return FALSE

    ata = TwoWayAta(SMALL, ["start"], delta)
    assert ata_membership(t("g", t("a"), t("b")), ata)
    assert not ata_membership(t("h", t("a")), ata)


def test_ata_membership_out_of_tree_moves_are_false():
    needs_up = TwoWayAta(AB, ["q"], lambda q, s: Move(UP, "q"))
    assert not ata_membership(t("a"), needs_up)
    needs_child = TwoWayAta(AB, ["q"], lambda q, s: Move(1, "q"))
    assert not ata_membership(t("a"), needs_child)


def test_ata_membership_requires_all_conjuncts():
    def delta(state, symbol):
        if state == "q":
            return conj([Move(1, "a?"), Move(2, "b?")]) if symbol == "g" else FALSE
        if state == "a?":
            return TRUE if symbol == "a" else FALSE
        if state == "b?":
            return TRUE if symbol == "b" else FALSE
        return FALSE

    ata = TwoWayAta(SMALL, ["q"], delta)
    assert ata_membership(t("g", t("a"), t("b")), ata)
    assert not ata_membership(t("g", t("a"), t("a")), ata)
    assert not ata_membership(t("g", t("b"), t("b")), ata)


def test_ata_monotone_under_weakening():
    strict = leaf_detector("b")

    def weak_delta(state, symbol):
        f = strict.delta(state, symbol)
        return TRUE if f is FALSE and SMALL.arity(symbol) == 0 else f

    weak = TwoWayAta(SMALL, ["seek"], weak_delta)
    for term in all_terms(SMALL, 4):
        if ata_membership(term, strict):
            assert ata_membership(term, weak)


def test_ata_to_nta_agreement():
    for ata in (leaf_detector("b"), leaf_detector("a")):
        nta = ata_to_nta(ata)
        for term in all_terms(SMALL, 5):
            assert nta_membership(term, nta) == ata_membership(term, ata)


def test_ata_to_nta_agreement_with_up_moves():
    def delta(state, symbol):
        if state == "start":
            return Move(1, "below") if SMALL.arity(symbol) else FALSE
        if state == "below":
            return Move(UP, "check")
        if state == "check":
            return TRUE if symbol == "g" else FALSE
        return FALSE

    ata = TwoWayAta(SMALL, ["start"], delta)
    nta = ata_to_nta(ata)
    for term in all_terms(SMALL, 5):
        assert nta_membership(term, nta) == ata_membership(term, ata)


def test_ata_to_nta_rejecting_everything():
    ata = TwoWayAta(AB, ["q"], lambda q, s: FALSE)
    assert nta_emptiness(ata_to_nta(ata)) is None


def test_ata_to_nta_state_budget():
    def delta(state, symbol):
        return Move(STAY, ("count", state[1] + 1))

    ata = TwoWayAta(AB, [("count", 0)], delta)
    with pytest.raises(ResourceLimitError, match="max_ata_states"):
        ata_to_nta(ata, max_ata_states=50)
