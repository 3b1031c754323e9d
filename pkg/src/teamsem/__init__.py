"""Workbench for first-order logic under lax team semantics with dependency
atoms: evaluation on finite models, constructive formula rewriters, and
exhaustive equivalence and boundedness verification at desk scale."""

from .analysis import (
    AnalysisError,
    BoundReport,
    EquivReport,
    GammaTable,
    HierarchyReport,
    check_boundedness,
    equivalent,
    hierarchy_witness,
    minimal_satisfying_subteam,
    nu_bound,
)
from .evaluator import (
    EMPTY_REGISTRY,
    DependencySpec,
    EvalError,
    Evaluator,
    Registry,
    UpwardClosedVerdict,
    check_upward_closed,
    evaluate,
    register,
    satisfying_subteams,
)
from .structures import (
    EnumerationLimit,
    Model,
    Team,
    enumerate_models,
    enumerate_teams,
    model_to_text,
    parse_model_text,
    parse_team_text,
    project,
    restrict,
    tarski_eval,
    team_to_text,
    universal_extend,
)
from .syntax import (
    And,
    Atom,
    BOT,
    Bracket,
    ClassicalOr,
    ContraNeg,
    EMPTY_SIGNATURE,
    Equal,
    Exists,
    Forall,
    Formula,
    IntImpl,
    NE,
    NegativeLiteral,
    NotEqual,
    ParseError,
    Possibly,
    PositiveLiteral,
    Signature,
    TOP,
    TensorOr,
    free_variables,
    fresh_variable,
    is_first_order,
    parse,
    pretty,
    tuple_equal,
    tuple_not_equal,
)
from .transforms import (
    CountingTerm,
    TransformError,
    UnaryDepDescription,
    classical_or_via_neg,
    compile_unary_dependency,
    counting_atom_definition,
    counting_formula,
    dep_via_neg_const,
    dual_negate,
    extract_brackets,
    extract_brackets_dnf,
    flatten,
    ne_via_neg,
    ne_via_totality,
    neg_eliminate,
    neg_restrict_commute,
    restrict_formula,
    to_classical_dnf,
    unary_description_sentence,
)

__version__ = "0.1.0"
