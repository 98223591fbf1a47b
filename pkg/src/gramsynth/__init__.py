"""Grammar synthesis from few-shot learning instances.

Decides whether a candidate DSL grammar solves a learning instance (and
under which expression ordering), and synthesizes such grammars, using
tree automata, recursion tables over automaton states or behavioral
vectors, and brute-force enumeration oracles that cross-validate the
automaton constructions.
"""

from .core import (
    INFINITE,
    DepthAtLeast,
    MacroGrammar,
    NonterminalSet,
    Param,
    RankedAlphabet,
    ResourceLimitError,
    Term,
    derive_outermost,
    extend,
    macro_depth_bound,
    parse_depth,
    t,
    well_formed_term,
)
from .encoding import GrammarAlphabet, GrammarTree, dec, enc, permissive_meta
from .automata import (
    Nta,
    TwoWayAta,
    ata_membership,
    ata_to_nta,
    nta_emptiness,
    nta_from_grammar,
    nta_intersect,
    nta_membership,
    nta_product,
    nta_union,
)
from .semantics import (
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
from .rectable import (
    RecursionTable,
    StateDomain,
    Verdict,
    acceptable,
    behavioral_table,
    behavioral_targets,
    behavioral_vector,
    recursion_table,
    solves_grammar,
    step_H,
)

__version__ = "0.1.0"
