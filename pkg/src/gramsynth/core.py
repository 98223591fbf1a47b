"""Ranked trees, macro tree grammars, and outermost derivation semantics."""

from __future__ import annotations

import math
import sys
from typing import Iterable, Iterator, NamedTuple, Union

DEFAULT_MAX_TERMS = 1_000_000
DEFAULT_MAX_SIZE = 10_000

INFINITE = math.inf


class ResourceLimitError(Exception):
    """A configurable resource cap was exceeded; carries the cap name and value."""

    def __init__(self, cap: str, limit, detail: str = ""):
        self.cap = cap
        self.limit = limit
        msg = f"resource limit exceeded: {cap}={limit}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class Param:
    """Parameter leaf in a rule right-hand side; 1-based index.

    Distinct from any alphabet symbol, so a grammar over an alphabet that
    happens to contain symbols named "1", "2", ... stays unambiguous.
    """

    __slots__ = ("index", "_hash")

    def __init__(self, index: int):
        if not isinstance(index, int) or index < 1:
            raise ValueError(f"parameter index must be a positive integer, got {index!r}")
        self.index = index
        self._hash = hash(("param", index))

    def __eq__(self, other):
        return isinstance(other, Param) and other.index == self.index

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Param({self.index})"

    def __str__(self):
        return f"${self.index}"


class Term:
    """Node of a ranked tree: a symbol plus an ordered tuple of children.

    Children may include Param leaves only when the term is a rule
    right-hand side; ground terms are Param-free. Hash is cached since
    terms are used as dict keys throughout.
    """

    __slots__ = ("symbol", "children", "size", "_hash")

    def __init__(self, symbol: str, children: Iterable[Union["Term", Param]] = ()):
        if not isinstance(symbol, str):
            raise ValueError(f"symbol must be a string, got {symbol!r}")
        self.symbol = sys.intern(symbol)
        self.children = tuple(children)
        size = 1
        for c in self.children:
            size += c.size if isinstance(c, Term) else 1
        self.size = size
        self._hash = hash((self.symbol, self.children))

    def __eq__(self, other):
        return (
            self is other
            or isinstance(other, Term)
            and other._hash == self._hash
            and other.symbol == self.symbol
            and other.children == self.children
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        if not self.children:
            return f"Term({self.symbol!r})"
        return f"Term({self.symbol!r}, {list(self.children)!r})"

    def __str__(self):
        if not self.children:
            return self.symbol
        return f"{self.symbol}({', '.join(str(c) for c in self.children)})"


Rhs = Union[Term, Param]


def t(symbol: str, *children: Rhs) -> Term:
    """Shorthand constructor used heavily in tests and fixtures."""
    return Term(symbol, children)


def subterms(term: Rhs) -> Iterator[Rhs]:
    """All subterms of the given term, preorder, including itself and Param leaves."""
    stack = [term]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Term):
            stack.extend(reversed(node.children))


def term_key(term: Rhs):
    """Deterministic sort key: total node count, then preorder symbol sequence."""
    pre = []
    for node in subterms(term):
        if isinstance(node, Param):
            pre.append((1, str(node.index)))
        else:
            pre.append((0, node.symbol))
    size = term.size if isinstance(term, Term) else 1
    return (size, tuple(pre))


class RankedAlphabet:
    """Finite map from symbol names to arities."""

    __slots__ = ("symbols", "_hash")

    def __init__(self, symbols: dict):
        for name, arity in symbols.items():
            if not isinstance(name, str):
                raise ValueError(f"symbol name must be a string, got {name!r}")
            if not isinstance(arity, int) or arity < 0:
                raise ValueError(f"arity of {name!r} must be a non-negative integer")
        self.symbols = {sys.intern(k): v for k, v in sorted(symbols.items())}
        self._hash = hash(tuple(self.symbols.items()))

    def arity(self, name: str) -> int:
        return self.symbols[name]

    def __contains__(self, name) -> bool:
        return name in self.symbols

    def __iter__(self):
        return iter(self.symbols)

    def __len__(self):
        return len(self.symbols)

    def __eq__(self, other):
        return isinstance(other, RankedAlphabet) and other.symbols == self.symbols

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"RankedAlphabet({self.symbols!r})"

    def nullary(self) -> list:
        return [s for s, a in self.symbols.items() if a == 0]


class NonterminalSet:
    """Ranked nonterminals; arity 0 entries are plain, arity > 0 are macro symbols."""

    __slots__ = ("entries", "_hash")

    def __init__(self, entries: dict):
        for name, arity in entries.items():
            if not isinstance(name, str):
                raise ValueError(f"nonterminal name must be a string, got {name!r}")
            if not isinstance(arity, int) or arity < 0:
                raise ValueError(f"arity of nonterminal {name!r} must be non-negative")
        self.entries = {sys.intern(k): v for k, v in sorted(entries.items())}
        self._hash = hash(tuple(self.entries.items()))

    def arity(self, name: str) -> int:
        return self.entries[name]

    def __contains__(self, name) -> bool:
        return name in self.entries

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def __eq__(self, other):
        return isinstance(other, NonterminalSet) and other.entries == self.entries

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"NonterminalSet({self.entries!r})"

    @property
    def max_arity(self) -> int:
        return max(self.entries.values(), default=0)

    def macro_names(self) -> list:
        return [n for n, a in self.entries.items() if a > 0]


def well_formed_term(term: Rhs, alphabet: RankedAlphabet) -> bool:
    """True iff every symbol is declared and every node matches its declared arity.

    Param leaves are never alphabet symbols, so any Param makes this false.
    """
    if isinstance(term, Param):
        return False
    if term.symbol not in alphabet or len(term.children) != alphabet.arity(term.symbol):
        return False
    return all(well_formed_term(c, alphabet) for c in term.children)


def _check_rhs(rhs: Rhs, alphabet: RankedAlphabet, nts: NonterminalSet, max_param: int, where: str):
    if isinstance(rhs, Param):
        if rhs.index > max_param:
            raise ValueError(
                f"{where}: parameter ${rhs.index} exceeds the {max_param} parameter(s) of the left-hand side"
            )
        return
    if rhs.symbol in nts:
        want = nts.arity(rhs.symbol)
    elif rhs.symbol in alphabet:
        want = alphabet.arity(rhs.symbol)
    else:
        raise ValueError(f"{where}: undeclared symbol {rhs.symbol!r}")
    if len(rhs.children) != want:
        raise ValueError(
            f"{where}: {rhs.symbol!r} expects {want} children, got {len(rhs.children)}"
        )
    for c in rhs.children:
        _check_rhs(c, alphabet, nts, max_param, where)


class MacroGrammar:
    """Macro tree grammar (start, nonterminals, alphabet, ordered rule list).

    Rule order is significant: the tree encoding of a grammar lists
    productions in rule order, so two grammars with reordered rules are
    different values here.
    """

    __slots__ = ("start", "nonterminals", "alphabet", "rules", "_hash", "_by_lhs")

    def __init__(self, start: str, nonterminals: NonterminalSet, alphabet: RankedAlphabet, rules):
        if start not in nonterminals:
            raise ValueError(f"start nonterminal {start!r} is not declared")
        if nonterminals.arity(start) != 0:
            raise ValueError(f"start nonterminal {start!r} must have arity 0")
        clash = set(nonterminals.entries) & set(alphabet.symbols)
        if clash:
            raise ValueError(f"nonterminal names collide with alphabet symbols: {sorted(clash)}")
        rules = tuple((lhs, rhs) for lhs, rhs in rules)
        for lhs, rhs in rules:
            if lhs not in nonterminals:
                raise ValueError(f"rule left-hand side {lhs!r} is not a declared nonterminal")
            _check_rhs(rhs, alphabet, nonterminals, nonterminals.arity(lhs), f"rule for {lhs}")
        self.start = sys.intern(start)
        self.nonterminals = nonterminals
        self.alphabet = alphabet
        self.rules = rules
        by_lhs: dict = {}
        for lhs, rhs in rules:
            by_lhs.setdefault(lhs, []).append(rhs)
        self._by_lhs = {k: tuple(v) for k, v in by_lhs.items()}
        self._hash = hash((self.start, self.nonterminals, self.alphabet, self.rules))

    def rules_for(self, nt: str) -> tuple:
        return self._by_lhs.get(nt, ())

    @property
    def is_regular(self) -> bool:
        return self.nonterminals.max_arity == 0

    def __eq__(self, other):
        return (
            isinstance(other, MacroGrammar)
            and other.start == self.start
            and other.nonterminals == self.nonterminals
            and other.alphabet == self.alphabet
            and other.rules == self.rules
        )

    def __hash__(self):
        return self._hash

    def __repr__(self):
        body = "; ".join(f"{lhs} -> {rhs}" for lhs, rhs in self.rules)
        return f"MacroGrammar(start={self.start!r}, rules=[{body}])"


def extend(g: MacroGrammar, base: MacroGrammar) -> MacroGrammar:
    """Combine a DSL grammar with a base grammar: union nonterminals, G's rules then base's."""
    if g.alphabet != base.alphabet:
        raise ValueError("extend: alphabets differ")
    if not base.is_regular:
        raise ValueError("extend: base grammar must be regular")
    merged = dict(g.nonterminals.entries)
    for name, arity in base.nonterminals.entries.items():
        if merged.get(name, arity) != arity:
            raise ValueError(
                f"extend: nonterminal {name!r} declared with arity {merged[name]} and {arity}"
            )
        merged[name] = arity
    return MacroGrammar(g.start, NonterminalSet(merged), g.alphabet, g.rules + base.rules)


class _Counter:
    __slots__ = ("seen", "max_terms")

    def __init__(self, max_terms: int):
        self.seen = set()
        self.max_terms = max_terms

    def note(self, term: Term):
        if term not in self.seen:
            self.seen.add(term)
            if len(self.seen) > self.max_terms:
                raise ResourceLimitError("max_terms", self.max_terms)


def _freeze_lang(lang: dict) -> frozenset:
    return frozenset(lang.items())


def derive_outermost(
    g: MacroGrammar,
    depth_budget: int,
    *,
    max_terms: int = DEFAULT_MAX_TERMS,
    max_size: int = DEFAULT_MAX_SIZE,
) -> dict:
    """Ground terms derivable from g.start in outermost order within the depth budget.

    Returns {term: minimal parse depth}. Parse depth counts nonterminal
    expansions along root-to-leaf paths of the parse tree; the branches
    that merely record a macro's argument term are not counted, so an
    argument's own expansions count only where the parameter is used.
    Arguments are substituted unexpanded (outermost order), hence two
    copies of the same parameter may derive different subtrees.
    """
    if depth_budget < 0:
        raise ValueError("depth_budget must be >= 0")
    counter = _Counter(max_terms)
    memo: dict = {}

    def expand(nt: str, env: tuple, budget: int) -> dict:
        # env: one {term: depth} language per parameter of nt
        if budget <= 0:
            return {}
        key = (nt, tuple(_freeze_lang(e) for e in env), budget)
        hit = memo.get(key)
        if hit is not None:
            return hit
        out: dict = {}
        for rhs in g.rules_for(nt):
            for term, d in eval_rhs(rhs, env, budget - 1).items():
                nd = d + 1
                if nd < out.get(term, nd + 1):
                    out[term] = nd
                    counter.note(term)
        memo[key] = out
        return out

    def eval_rhs(rhs: Rhs, env: tuple, budget: int) -> dict:
        if isinstance(rhs, Param):
            return {s: d for s, d in env[rhs.index - 1].items() if d <= budget}
        if rhs.symbol in g.nonterminals:
            args = tuple(eval_rhs(u, env, budget - 1) for u in rhs.children)
            return expand(rhs.symbol, args, budget)
        if not rhs.children:
            return {rhs: 0}
        langs = [eval_rhs(u, env, budget) for u in rhs.children]
        out: dict = {}
        combos = [((), 0)]
        for lang in langs:
            if not lang:
                return {}
            combos = [
                (kids + (s,), max(d, sd))
                for kids, d in combos
                for s, sd in lang.items()
            ]
            if len(combos) > max_terms:
                raise ResourceLimitError("max_terms", max_terms)
        for kids, d in combos:
            size = 1 + sum(k.size for k in kids)
            if size > max_size:
                raise ResourceLimitError("max_size", max_size)
            term = Term(rhs.symbol, kids)
            if d < out.get(term, d + 1):
                out[term] = d
        return out

    return expand(g.start, (), depth_budget)


class DepthAtLeast(NamedTuple):
    """Result of a bounded depth computation that did not find the term."""

    budget: int


def parse_depth(g: MacroGrammar, term: Term, *, budget: int = 12, **caps):
    """Minimal parse-tree depth of term in g; INFINITE when provably not in L(g).

    Regular grammars get an exact dynamic program over subterms. Macro
    grammars fall back to bounded outermost enumeration and report
    DepthAtLeast(budget) when the term was not reached.
    """
    if not well_formed_term(term, g.alphabet):
        raise ValueError("parse_depth: term is not well formed over the grammar's alphabet")
    if g.is_regular:
        return _parse_depth_regular(g, term)
    lang = derive_outermost(g, budget, **caps)
    return lang.get(term, DepthAtLeast(budget))


def _parse_depth_regular(g: MacroGrammar, term: Term):
    nts = list(g.nonterminals)
    memo: dict = {}

    def table(s: Term) -> dict:
        got = memo.get(s)
        if got is not None:
            return got
        for c in s.children:
            table(c)
        # bare-nonterminal rules (N -> M) relate depths at the same subterm,
        # so solve those equations by value iteration (a least fixpoint)
        cur = {n: INFINITE for n in nts}
        changed = True
        while changed:
            changed = False
            for n in nts:
                for rhs in g.rules_for(n):
                    d = cost(rhs, s, cur)
                    if d + 1 < cur[n]:
                        cur[n] = d + 1
                        changed = True
        memo[s] = cur
        return cur

    def cost(rhs: Term, s: Term, cur):
        if rhs.symbol in g.nonterminals:
            # regular grammars apply nonterminals bare; cur is the running
            # table when rhs sits at the top of the rule, else s's children
            # were finished first and memo has the answer
            return cur[rhs.symbol] if cur is not None else memo[s][rhs.symbol]
        if rhs.symbol != s.symbol or len(rhs.children) != len(s.children):
            return INFINITE
        worst = 0
        for r, c in zip(rhs.children, s.children):
            d = cost(r, c, None)
            if d == INFINITE:
                return INFINITE
            worst = max(worst, d)
        return worst

    return table(term)[g.start]


def _macro_depth(rhs: Rhs, nts: NonterminalSet) -> int:
    if isinstance(rhs, Param):
        return 0
    kid = max((_macro_depth(c, nts) for c in rhs.children), default=0)
    if rhs.symbol in nts and nts.arity(rhs.symbol) > 0:
        return 1 + kid
    return kid


def macro_depth_bound(g: MacroGrammar, *, grammar_alphabet=None):
    """Max macro-symbol nesting over rule right-hand sides.

    With grammar_alphabet given, g is read as a meta-grammar over that
    grammar alphabet and the bound covers every generable rule rhs;
    INFINITE means a cycle through macro-rhs symbols can pump the depth.
    """
    if grammar_alphabet is None:
        return max((_macro_depth(rhs, g.nonterminals) for _, rhs in g.rules), default=0)
    return _meta_macro_bound(g, grammar_alphabet)


def _measure_macro_refs(node: Rhs, meta: MacroGrammar, is_macro_node):
    """Macro depth contributed by a subtree alone, plus the meta-nonterminal
    references in it weighted by the macro-rhs nodes above each."""
    refs = []
    const = 0

    def walk(nd: Rhs, w: int):
        nonlocal const
        if isinstance(nd, Param):
            return
        if nd.symbol in meta.nonterminals:
            refs.append((nd.symbol, w))
            return
        w2 = w + (1 if is_macro_node(nd.symbol) else 0)
        const = max(const, w2)
        for c in nd.children:
            walk(c, w2)

    walk(node, 0)
    return const, refs


def _meta_macro_bound(meta: MacroGrammar, ga):
    if not meta.is_regular:
        raise ValueError("meta-grammars must be regular")

    def is_macro_node(sym: str) -> bool:
        nt = ga.nt_of_rhs(sym)
        return nt is not None and ga.nonterminals.arity(nt) > 0

    productive = _productive_nonterminals(meta)
    edges: dict = {n: [] for n in meta.nonterminals}
    consts: dict = {n: 0 for n in meta.nonterminals}
    for lhs, rhs in meta.rules:
        const, refs = _measure_macro_refs(rhs, meta, is_macro_node)
        consts[lhs] = max(consts[lhs], const)
        edges[lhs].extend(r for r in refs if r[0] in productive)

    # entry points: meta positions generating encoded rule right-hand sides,
    # i.e. first children of lhs_* nodes anywhere in a meta rule
    entry_consts = [0]
    entry_refs: list = []

    def scan_entries(node: Rhs):
        if isinstance(node, Param) or node.symbol in meta.nonterminals:
            return
        if ga.nt_of_lhs(node.symbol) is not None and node.children:
            const, refs = _measure_macro_refs(node.children[0], meta, is_macro_node)
            entry_consts.append(const)
            entry_refs.extend(r for r in refs if r[0] in productive)
        for c in node.children:
            scan_entries(c)

    for _, rhs in meta.rules:
        scan_entries(rhs)

    reach = set()
    frontier = [n for n, _ in entry_refs]
    while frontier:
        n = frontier.pop()
        if n in reach:
            continue
        reach.add(n)
        frontier.extend(m for m, _ in edges.get(n, ()))

    # a macro-weighted edge inside a cycle can pump depth without limit
    for u in reach:
        for v, w in edges.get(u, ()):
            if w >= 1 and _reaches(v, u, edges):
                return INFINITE

    best: dict = {}

    def longest(n: str, active: frozenset):
        if n in best:
            return best[n]
        if n in active:
            return 0  # all remaining cycles have weight zero
        w = consts.get(n, 0)
        for m, ew in edges.get(n, ()):
            w = max(w, ew + longest(m, active | {n}))
        best[n] = w
        return w

    out = max(entry_consts)
    for n, ew in entry_refs:
        out = max(out, ew + longest(n, frozenset()))
    return out


def _reaches(src: str, dst: str, edges: dict) -> bool:
    seen = set()
    frontier = [src]
    while frontier:
        n = frontier.pop()
        if n == dst:
            return True
        if n in seen:
            continue
        seen.add(n)
        frontier.extend(m for m, _ in edges.get(n, ()))
    return False


def _productive_nonterminals(g: MacroGrammar) -> set:
    productive: set = set()
    changed = True
    while changed:
        changed = False
        for lhs, rhs in g.rules:
            if lhs in productive:
                continue
            if _rhs_productive(rhs, g, productive):
                productive.add(lhs)
                changed = True
    return productive


def _rhs_productive(rhs: Rhs, g: MacroGrammar, productive: set) -> bool:
    if isinstance(rhs, Param):
        return True
    if rhs.symbol in g.nonterminals and rhs.symbol not in productive:
        return False
    return all(_rhs_productive(c, g, productive) for c in rhs.children)
