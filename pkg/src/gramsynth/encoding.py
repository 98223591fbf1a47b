"""Encoding grammars as trees over a grammar alphabet, and back.

A grammar's rules are laid out along a right-going spine of lhs nodes
terminated by end; occurrences of a nonterminal inside a rule body use
its rhs symbol, and macro parameters become numeric leaf symbols. The
permissive meta-grammar generates every such encoding over a fixed
alphabet and nonterminal set (parameter scoping excepted, which decoding
enforces instead).
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import MacroGrammar, NonterminalSet, Param, RankedAlphabet, Rhs, Term

ROOT = "root"
END = "end"
LHS_PREFIX = "lhs_"
RHS_PREFIX = "rhs_"


class GrammarAlphabet:
    """Ranked alphabet for trees that encode grammars over (base, nonterminals).

    Besides the base symbols there is a unary root, a nullary end, a
    binary lhs symbol and an arity-matching rhs symbol per nonterminal,
    and a nullary symbol per parameter index "1".."k" where k is the
    largest macro arity.
    """

    __slots__ = ("base", "nonterminals", "symbols", "max_param", "_of_lhs", "_of_rhs")

    def __init__(self, base: RankedAlphabet, nonterminals: NonterminalSet):
        self.base = base
        self.nonterminals = nonterminals
        self.max_param = nonterminals.max_arity
        derived = {ROOT: 1, END: 0}
        self._of_lhs = {}
        self._of_rhs = {}
        for name, arity in nonterminals.entries.items():
            derived[LHS_PREFIX + name] = 2
            derived[RHS_PREFIX + name] = arity
            self._of_lhs[LHS_PREFIX + name] = name
            self._of_rhs[RHS_PREFIX + name] = name
        for i in range(1, self.max_param + 1):
            derived[str(i)] = 0
        clash = set(derived) & set(base.symbols)
        if clash:
            raise ValueError(
                f"alphabet symbols collide with grammar-tree symbols: {sorted(clash)}"
            )
        clash = set(nonterminals.entries) & set(base.symbols)
        if clash:
            raise ValueError(f"nonterminal names collide with alphabet symbols: {sorted(clash)}")
        self.symbols = RankedAlphabet({**base.symbols, **derived})

    def lhs_symbol(self, nt: str) -> str:
        if nt not in self.nonterminals:
            raise KeyError(nt)
        return LHS_PREFIX + nt

    def rhs_symbol(self, nt: str) -> str:
        if nt not in self.nonterminals:
            raise KeyError(nt)
        return RHS_PREFIX + nt

    def nt_of_lhs(self, symbol: str):
        return self._of_lhs.get(symbol)

    def nt_of_rhs(self, symbol: str):
        return self._of_rhs.get(symbol)

    def param_index(self, symbol: str):
        """The parameter index a leaf symbol stands for, or None."""
        if symbol.isdigit() and 1 <= int(symbol) <= self.max_param:
            return int(symbol)
        return None

    def arity(self, symbol: str) -> int:
        return self.symbols.arity(symbol)

    def __contains__(self, symbol) -> bool:
        return symbol in self.symbols

    def __eq__(self, other):
        return (
            isinstance(other, GrammarAlphabet)
            and other.base == self.base
            and other.nonterminals == self.nonterminals
        )

    def __hash__(self):
        return hash((self.base, self.nonterminals))

    def __repr__(self):
        return f"GrammarAlphabet({self.base!r}, {self.nonterminals!r})"


def _path_str(path: tuple) -> str:
    return "/" + "/".join(str(i) for i in path)


def _fail(path: tuple, msg: str):
    raise ValueError(f"at node {_path_str(path)}: {msg}")


def _check_body(node: Term, ga: GrammarAlphabet, max_param: int, path: tuple):
    # body of a rule: base symbols, rhs symbols, and parameter leaves only
    sym = node.symbol
    if sym == ROOT or sym == END or ga.nt_of_lhs(sym) is not None:
        _fail(path, f"{sym!r} cannot occur inside a rule body")
    if sym not in ga.symbols:
        _fail(path, f"symbol {sym!r} is not in the grammar alphabet")
    want = ga.symbols.arity(sym)
    if len(node.children) != want:
        _fail(path, f"{sym!r} expects {want} children, got {len(node.children)}")
    idx = ga.param_index(sym)
    if idx is not None and idx > max_param:
        _fail(path, f"parameter {idx} out of range for a left-hand side with {max_param} parameter(s)")
    for i, child in enumerate(node.children):
        if not isinstance(child, Term):
            _fail(path + (i,), "encoded trees cannot contain raw parameter objects")
        _check_body(child, ga, max_param, path + (i,))


def _check_spine(node: Term, ga: GrammarAlphabet, path: tuple):
    while True:
        sym = node.symbol
        if sym == END:
            if node.children:
                _fail(path, "end takes no children")
            return
        nt = ga.nt_of_lhs(sym)
        if nt is None:
            _fail(path, f"expected an lhs symbol or end on the spine, got {sym!r}")
        if len(node.children) != 2:
            _fail(path, f"{sym!r} expects 2 children, got {len(node.children)}")
        body, rest = node.children
        if not isinstance(body, Term) or not isinstance(rest, Term):
            _fail(path, "encoded trees cannot contain raw parameter objects")
        _check_body(body, ga, ga.nonterminals.arity(nt), path + (0,))
        node = rest
        path = path + (1,)


@dataclass(frozen=True)
class GrammarTree:
    """A validated grammar encoding: root, then a spine of productions."""

    tree: Term
    alphabet: GrammarAlphabet

    def __post_init__(self):
        tree = self.tree
        if not isinstance(tree, Term) or tree.symbol != ROOT:
            _fail((), f"expected {ROOT!r} at the top, got {tree!r}")
        if len(tree.children) != 1 or not isinstance(tree.children[0], Term):
            _fail((), f"{ROOT!r} expects exactly 1 child")
        _check_spine(tree.children[0], self.alphabet, (0,))

    def productions(self) -> list:
        """(nonterminal name, encoded body) pairs in spine order."""
        out = []
        node = self.tree.children[0]
        while node.symbol != END:
            out.append((self.alphabet.nt_of_lhs(node.symbol), node.children[0]))
            node = node.children[1]
        return out


def enc(g: MacroGrammar, alphabet: GrammarAlphabet = None) -> GrammarTree:
    """Encode a grammar as a tree: productions along the spine, in rule order."""
    if alphabet is None:
        alphabet = GrammarAlphabet(g.alphabet, g.nonterminals)
    else:
        for name, arity in g.nonterminals.entries.items():
            if name not in alphabet.nonterminals or alphabet.nonterminals.arity(name) != arity:
                raise ValueError(f"grammar nonterminal {name!r} is not in the grammar alphabet")
        for name, arity in g.alphabet.symbols.items():
            if name not in alphabet.base or alphabet.base.arity(name) != arity:
                raise ValueError(f"grammar symbol {name!r} is not in the grammar alphabet")

    def enc_t(x: Rhs) -> Term:
        if isinstance(x, Param):
            return Term(str(x.index))
        if x.symbol in g.nonterminals:
            return Term(alphabet.rhs_symbol(x.symbol), [enc_t(c) for c in x.children])
        return Term(x.symbol, [enc_t(c) for c in x.children])

    spine = Term(END)
    for lhs, rhs in reversed(g.rules):
        spine = Term(alphabet.lhs_symbol(lhs), [enc_t(rhs), spine])
    return GrammarTree(Term(ROOT, [spine]), alphabet)


def dec(tree, alphabet: GrammarAlphabet = None) -> MacroGrammar:
    """Decode a grammar tree; the topmost production's nonterminal becomes the start.

    Accepts a GrammarTree, or a raw Term together with its alphabet. The
    result declares the alphabet's full nonterminal set, so a round trip
    through enc preserves grammars that declare that same set.
    """
    if isinstance(tree, GrammarTree):
        gt = tree
    else:
        if alphabet is None:
            raise ValueError("decoding a raw term requires the grammar alphabet")
        gt = GrammarTree(tree, alphabet)
    ga = gt.alphabet

    def dec_t(node: Term) -> Rhs:
        idx = ga.param_index(node.symbol)
        if idx is not None:
            return Param(idx)
        nt = ga.nt_of_rhs(node.symbol)
        if nt is not None:
            return Term(nt, [dec_t(c) for c in node.children])
        return Term(node.symbol, [dec_t(c) for c in node.children])

    rules = [(nt, dec_t(body)) for nt, body in gt.productions()]
    if not rules:
        raise ValueError("empty grammar tree has no start nonterminal")
    return MacroGrammar(rules[0][0], ga.nonterminals, ga.base, rules)


def _fresh(name: str, taken) -> str:
    while name in taken:
        name += "_"
    return name


def permissive_meta(base: RankedAlphabet, nonterminals: NonterminalSet) -> MacroGrammar:
    """The regular tree grammar generating every production spine over (base, nonterminals).

    Parameter leaves are generated wherever a rule body may occur, so the
    language over-approximates well-scoped encodings; dec rejects trees
    that put a parameter under a left-hand side of smaller arity.
    """
    ga = GrammarAlphabet(base, nonterminals)
    taken = set(ga.symbols.symbols)
    start = _fresh("Start", taken)
    prods = _fresh("Prods", taken | {start})
    body = _fresh("Body", taken | {start, prods})

    rules = [(start, Term(ROOT, [Term(prods)]))]
    for nt in nonterminals:
        rules.append((prods, Term(ga.lhs_symbol(nt), [Term(body), Term(prods)])))
    rules.append((prods, Term(END)))
    for sym, arity in base.symbols.items():
        rules.append((body, Term(sym, [Term(body)] * arity)))
    for nt in nonterminals:
        rules.append((body, Term(ga.rhs_symbol(nt), [Term(body)] * nonterminals.arity(nt))))
    for i in range(1, ga.max_param + 1):
        rules.append((body, Term(str(i))))

    return MacroGrammar(
        start,
        NonterminalSet({start: 0, prods: 0, body: 0}),
        ga.symbols,
        rules,
    )
