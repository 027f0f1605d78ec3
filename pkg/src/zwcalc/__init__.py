"""Exact tensor semantics, verified rewrite rules, and normal forms for
GHZ/W string diagrams.

The package is organized bottom-up: :mod:`zwcalc.diagram` defines the open
port-graph syntax, :mod:`zwcalc.term` the compositional term language,
:mod:`zwcalc.tensor` the exact integer evaluation, :mod:`zwcalc.rules` the
rewrite-rule catalog with its matcher and soundness checker,
:mod:`zwcalc.normalform` the canonical-form machinery, and
:mod:`zwcalc.fuzz`/:mod:`zwcalc.jsonio`/:mod:`zwcalc.render`/
:mod:`zwcalc.cli` the tooling around them.
"""

from .diagram import (
    BOUNDARY,
    Black,
    Crossing,
    Diagram,
    DiagramBuilder,
    White,
    canonical_form,
    isomorphic,
    permute_boundary,
    plug,
    validate,
    with_boundary_dirs,
)
from .errors import (
    DiagramError,
    InvalidMatchError,
    LegCapError,
    MatchScopeError,
    TermSyntaxError,
    TermTypeError,
    ZWError,
)
from .fuzz import FuzzReport, random_diagram, run_fuzz
from .normalform import (
    NFTerm,
    NormalForm,
    RewriteTrace,
    TraceStep,
    absorb_zero,
    circle_nf,
    deloop,
    eliminate_crossings,
    generator_nf,
    is_normal_form,
    negate_end,
    nf_of_tensor,
    nf_to_diagram,
    normalize,
    permute_legs,
    plug_normal_forms,
    reduce_mod,
    scalar_one_nf,
    trace_ends,
    wire_nf,
)
from .rules import Match, Rule, apply, catalog, find_matches, verify_soundness
from .tensor import (
    INTEGERS,
    IntegersMod,
    Ring,
    Tensor,
    eval_diagram,
    generator_tensor,
    make_tensor,
    tensor_equal,
    tensor_from_text,
    tensor_to_text,
)
from .term import Term, from_term, parse_term, term_to_text, to_term

eval = eval_diagram  # noqa: A001  (mirrors the operation's conventional name)

__all__ = [
    "BOUNDARY",
    "Black",
    "Crossing",
    "Diagram",
    "DiagramBuilder",
    "DiagramError",
    "FuzzReport",
    "INTEGERS",
    "IntegersMod",
    "InvalidMatchError",
    "LegCapError",
    "Match",
    "MatchScopeError",
    "NFTerm",
    "NormalForm",
    "RewriteTrace",
    "Ring",
    "Rule",
    "Tensor",
    "TermSyntaxError",
    "TermTypeError",
    "TraceStep",
    "Term",
    "White",
    "ZWError",
    "absorb_zero",
    "apply",
    "canonical_form",
    "catalog",
    "circle_nf",
    "deloop",
    "eliminate_crossings",
    "eval",
    "eval_diagram",
    "find_matches",
    "from_term",
    "generator_nf",
    "generator_tensor",
    "is_normal_form",
    "isomorphic",
    "make_tensor",
    "negate_end",
    "nf_of_tensor",
    "nf_to_diagram",
    "normalize",
    "parse_term",
    "permute_boundary",
    "permute_legs",
    "plug",
    "plug_normal_forms",
    "random_diagram",
    "reduce_mod",
    "run_fuzz",
    "scalar_one_nf",
    "tensor_equal",
    "tensor_from_text",
    "tensor_to_text",
    "term_to_text",
    "to_term",
    "trace_ends",
    "validate",
    "verify_soundness",
    "wire_nf",
    "with_boundary_dirs",
]
