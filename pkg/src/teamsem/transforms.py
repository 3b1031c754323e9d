"""Formula rewriters: flattening, dual negation, restriction, pulling the
whole-team disjunction outward, contradictory-negation elimination, the
definitions of functional dependence / nonemptiness / counting atoms in
terms of weaker atoms, the unary-dependency compiler, and bracket
extraction.

All rewriters are pure and deterministic: generated variable names come
from a fixed prefix sequence threaded through an avoid set seeded with the
input's variables.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (
    And,
    Atom,
    Bracket,
    ClassicalOr,
    ContraNeg,
    Equal,
    Exists,
    Forall,
    Formula,
    IntImpl,
    NE,
    NegativeLiteral,
    NotEqual,
    Possibly,
    PositiveLiteral,
    TensorOr,
    BOT,
    TOP,
    and_all,
    fresh_tuple,
    is_first_order,
    or_all,
    tuple_not_equal,
)


class TransformError(ValueError):
    """The input lies outside the fragment a rewriter is defined on."""


def flatten(f: Formula) -> Formula:
    """Replace every dependency atom (and NE) by T; first-order output."""
    match f:
        case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
            return f
        case Atom():
            return TOP
        case And(l, r):
            return And(flatten(l), flatten(r))
        case TensorOr(l, r):
            return TensorOr(flatten(l), flatten(r))
        case Exists(v, body):
            return Exists(v, flatten(body))
        case Forall(v, body):
            return Forall(v, flatten(body))
    raise TransformError(f"cannot flatten through {type(f).__name__}")


def dual_negate(f: Formula) -> Formula:
    """Negation-normal-form negation of a first-order formula; on teams it
    holds exactly when every assignment falsifies the input pointwise."""
    match f:
        case PositiveLiteral(rel, args):
            return NegativeLiteral(rel, args)
        case NegativeLiteral(rel, args):
            return PositiveLiteral(rel, args)
        case Equal(a, b):
            return NotEqual(a, b)
        case NotEqual(a, b):
            return Equal(a, b)
        case And(l, r):
            return TensorOr(dual_negate(l), dual_negate(r))
        case TensorOr(l, r):
            return And(dual_negate(l), dual_negate(r))
        case Exists(v, body):
            return Forall(v, dual_negate(body))
        case Forall(v, body):
            return Exists(v, dual_negate(body))
    raise TransformError(f"dual negation needs first-order input, got {type(f).__name__}")


def restrict_formula(f: Formula, theta: Formula) -> Formula:
    """The restriction of f to theta: (not theta) | (theta & f).

    A team satisfies it exactly when the theta-rows of the team satisfy f.
    """
    if not is_first_order(theta):
        raise TransformError("restriction condition must be first-order")
    return TensorOr(dual_negate(theta), And(theta, f))


def to_classical_dnf(f: Formula) -> list[Formula]:
    """Pull every whole-team disjunction to the top; the returned list is
    read as the ||-join of its entries, each entry ||-free."""
    match f:
        case ClassicalOr(l, r):
            return to_classical_dnf(l) + to_classical_dnf(r)
        case And(l, r):
            return [And(a, b) for a in to_classical_dnf(l) for b in to_classical_dnf(r)]
        case TensorOr(l, r):
            return [TensorOr(a, b) for a in to_classical_dnf(l) for b in to_classical_dnf(r)]
        case Exists(v, body):
            return [Exists(v, b) for b in to_classical_dnf(body)]
        case Forall(v, body):
            return [Forall(v, b) for b in to_classical_dnf(body)]
        case (PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual()
              | Atom() | Bracket()):
            return [f]
    raise TransformError(f"cannot distribute || through {type(f).__name__}")


def classical_or_all(parts: list[Formula]) -> Formula:
    out = None
    for p in parts:
        out = p if out is None else ClassicalOr(out, p)
    if out is None:
        raise ValueError("empty join")
    return out


# ---------------------------------------------------------------------------
# contradictory negation


def _check_neg_fragment(f: Formula):
    match f:
        case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
            return
        case Atom(kind) if kind == "ne":
            return
        case And(l, r) | TensorOr(l, r) | ClassicalOr(l, r):
            _check_neg_fragment(l)
            _check_neg_fragment(r)
            return
        case Exists(_, body) | Forall(_, body) | ContraNeg(body):
            _check_neg_fragment(body)
            return
    raise TransformError(
        f"negation elimination handles first-order parts, NE, || and ~ only; "
        f"found {type(f).__name__}"
    )


def neg_eliminate(f: Formula) -> Formula:
    """Rewrite away every contradictory negation, staying equivalent on all
    models and teams.  Input may combine first-order parts, NE, || and ~;
    the output uses first-order parts, NE and || only."""
    _check_neg_fragment(f)
    return _elim(f)


def _elim(f: Formula) -> Formula:
    match f:
        case ContraNeg(body):
            return _negate(_elim(body))
        case And(l, r):
            return And(_elim(l), _elim(r))
        case TensorOr(l, r):
            return TensorOr(_elim(l), _elim(r))
        case ClassicalOr(l, r):
            return ClassicalOr(_elim(l), _elim(r))
        case Exists(v, body):
            return Exists(v, _elim(body))
        case Forall(v, body):
            return Forall(v, _elim(body))
        case _:
            return f


def _negate(g: Formula) -> Formula:
    """~g for ~-free g, pushing the negation away case by case.  The
    whole-team disjunction distributes out first; a negated join is the
    conjunction of the negated parts."""
    parts = to_classical_dnf(g)
    return and_all(_negate_plain(p) for p in parts)


def _negate_plain(g: Formula) -> Formula:
    if is_first_order(g):
        # some row must falsify g
        return restrict_formula(NE, dual_negate(g))
    match g:
        case Atom(kind) if kind == "ne":
            return BOT
        case TensorOr(l, r):
            lf, rf = flatten(l), flatten(r)
            return ClassicalOr(
                ClassicalOr(
                    restrict_formula(_negate_plain(l), lf),
                    restrict_formula(_negate_plain(r), rf),
                ),
                _negate_plain(TensorOr(lf, rf)),
            )
        case And(l, r):
            return ClassicalOr(_negate_plain(l), _negate_plain(r))
        case Exists(v, body):
            bf = flatten(body)
            return ClassicalOr(
                _negate_plain(Exists(v, bf)),
                Forall(v, restrict_formula(_negate_plain(body), bf)),
            )
        case Forall(v, body):
            return Forall(v, _negate_plain(body))
    raise TransformError(f"cannot negate {type(g).__name__}")


def neg_restrict_commute(psi: Formula, theta: Formula) -> Formula:
    """~(psi restricted-to theta) commutes to (~psi) restricted-to theta."""
    if not is_first_order(theta):
        raise TransformError("restriction condition must be first-order")
    return restrict_formula(ContraNeg(psi), theta)


def classical_or_via_neg(f: Formula, g: Formula) -> Formula:
    """f || g written with contradictory negation and conjunction only."""
    return ContraNeg(And(ContraNeg(f), ContraNeg(g)))


def ne_via_neg() -> Formula:
    """NE written as the contradictory negation of bot."""
    return ContraNeg(BOT)


def dep_via_neg_const(vs: tuple[str, ...], ws: tuple[str, ...]) -> Formula:
    """Functional dependence of ws on vs, written with contradictory
    negation and constancy atoms: no constant tuple p can witness two
    distinct constant values q on the rows where (vs, ws) equals (p, q)."""
    if not vs or not ws:
        raise ValueError("argument tuples must be non-empty")
    avoid = set(vs) | set(ws)
    ps = fresh_tuple("p", len(vs), avoid)
    avoid |= set(ps)
    q1s = fresh_tuple("q", len(ws), avoid)
    avoid |= set(q1s)
    q2s = fresh_tuple("r", len(ws), avoid)
    body = and_all([
        Atom("const", (ps,)),
        Atom("const", (q1s,)),
        Atom("const", (q2s,)),
        tuple_not_equal(q1s, q2s),
        ContraNeg(tuple_not_equal(vs + ws, ps + q1s)),
        ContraNeg(tuple_not_equal(vs + ws, ps + q2s)),
    ])
    for var in reversed(ps + q1s + q2s):
        body = Exists(var, body)
    return ContraNeg(body)


def ne_via_totality() -> Formula:
    """NE written with a single unary totality atom."""
    return Forall("q", Atom("all", (("q",),)))


# ---------------------------------------------------------------------------
# counting


def _distinct(vars_: tuple[str, ...]) -> list[Formula]:
    return [NotEqual(a, b) for i, a in enumerate(vars_) for b in vars_[i + 1:]]


def _at_most_k_elements(k: int) -> Formula:
    """First-order sentence: the domain has at most k elements."""
    xs = tuple(f"x{i}" for i in range(1, k + 2))
    if k == 0:
        return Forall(xs[0], NotEqual(xs[0], xs[0]))
    body = or_all(Equal(a, b) for i, a in enumerate(xs) for b in xs[i + 1:])
    for x in reversed(xs):
        body = Forall(x, body)
    return body


def _at_least_k_elements(k: int) -> Formula:
    """First-order sentence: the domain has at least k elements."""
    if k == 0:
        return TOP
    xs = tuple(f"x{i}" for i in range(1, k + 1))
    body = and_all(_distinct(xs)) if k > 1 else Equal(xs[0], xs[0])
    for x in reversed(xs):
        body = Exists(x, body)
    return body


def counting_formula(kind: str, k: int, v: str) -> Formula:
    """The four cardinality formulas over constancy, NE and unary totality.

    le/ge bound |X(v)|; co_le/co_ge bound |M minus X(v)|.  The stated
    equivalences hold on non-empty teams.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    ps = fresh_tuple("p", k, {v})
    consts = [Atom("const", ((p,),)) for p in ps]
    if kind == "le":
        if k == 0:
            return BOT
        body = and_all(consts + [or_all(Equal(v, p) for p in ps)])
        for p in reversed(ps):
            body = Exists(p, body)
        return body
    if kind == "ge":
        if k == 0:
            return TOP
        witnesses = [restrict_formula(NE, Equal(v, p)) for p in ps]
        body = and_all(consts + _distinct(ps) + witnesses)
        for p in reversed(ps):
            body = Exists(p, body)
        return body
    if kind == "co_le":
        q = fresh_tuple("q", 1, {v, *ps})[0]
        covered = or_all([Equal(q, p) for p in ps] + [Equal(q, v)])
        inner = Exists(q, And(Atom("all", ((q,),)), covered))
        body = and_all(consts + [inner])
        for p in reversed(ps):
            body = Exists(p, body)
        return ClassicalOr(Bracket(_at_most_k_elements(k)), body)
    if kind == "co_ge":
        small = And(BOT, Bracket(_at_least_k_elements(k)))
        avoided = [NotEqual(v, p) for p in ps]
        body = and_all(consts + _distinct(ps) + avoided)
        for p in reversed(ps):
            body = Exists(p, body)
        return ClassicalOr(small, And(NE, body))
    raise ValueError(f"unknown counting kind {kind!r}")


def counting_atom_definition(kind: str, k: int, v: str) -> Formula:
    """The four counting atoms defined from the cardinality formulas; the
    k = 0 inequality branches use bot for the vacuous lower case."""
    if k < 0:
        raise ValueError("k must be >= 0")
    if kind == "eq":
        return And(counting_formula("le", k, v), counting_formula("ge", k, v))
    if kind == "neq":
        low = BOT if k == 0 else counting_formula("le", k - 1, v)
        return ClassicalOr(low, counting_formula("ge", k + 1, v))
    if kind == "co_eq":
        return And(counting_formula("co_le", k, v), counting_formula("co_ge", k, v))
    if kind == "co_neq":
        low = BOT if k == 0 else counting_formula("co_le", k - 1, v)
        return ClassicalOr(low, counting_formula("co_ge", k + 1, v))
    raise ValueError(f"unknown counting kind {kind!r}")


# ---------------------------------------------------------------------------
# unary dependency compilation


_TERM_KINDS = ("eq", "neq", "co_eq", "co_neq")


@dataclass(frozen=True)
class CountingTerm:
    """One counting condition on a unary relation: exactly k members (eq),
    not exactly k (neq), exactly k non-members (co_eq), or not (co_neq)."""

    kind: str
    k: int

    def __post_init__(self):
        if self.kind not in _TERM_KINDS:
            raise ValueError(f"unknown term kind {self.kind!r}")
        if self.k < 0:
            raise ValueError("k must be >= 0")


@dataclass(frozen=True)
class UnaryDepDescription:
    """A unary dependency as a disjunction of conjunctions of counting
    terms on the team's projection."""

    clauses: tuple[tuple[CountingTerm, ...], ...]

    def __post_init__(self):
        if not self.clauses or any(not c for c in self.clauses):
            raise ValueError("need at least one clause, each with a term")

    @classmethod
    def parse(cls, text: str) -> "UnaryDepDescription":
        """Parse 'eq:1 & co_eq:0 | neq:2' style descriptions."""
        clauses = []
        for clause_text in text.split("|"):
            terms = []
            for term_text in clause_text.split("&"):
                m = re.fullmatch(r"\s*(eq|neq|co_eq|co_neq):(\d+)\s*", term_text)
                if not m:
                    raise ValueError(f"bad counting term {term_text.strip()!r}")
                terms.append(CountingTerm(m.group(1), int(m.group(2))))
            clauses.append(tuple(terms))
        return cls(tuple(clauses))


def compile_unary_dependency(d: UnaryDepDescription, v: str) -> Formula:
    """Compile a unary dependency description into constancy, totality and
    whole-team disjunction, one counting-atom definition per term."""
    compiled = [
        and_all(counting_atom_definition(t.kind, t.k, v) for t in clause)
        for clause in d.clauses
    ]
    return classical_or_all(compiled)


def _exactly_k_subjects(k: int, positive: bool, relation: str) -> Formula:
    """FO sentence: exactly k elements are in (or out of) a unary relation."""
    member = (lambda x: PositiveLiteral(relation, (x,))) if positive \
        else (lambda x: NegativeLiteral(relation, (x,)))
    other = (lambda x: NegativeLiteral(relation, (x,))) if positive \
        else (lambda x: PositiveLiteral(relation, (x,)))
    if k == 0:
        return Forall("y", other("y"))
    xs = tuple(f"x{i}" for i in range(1, k + 1))
    closure = Forall("y", TensorOr(other("y"), or_all(Equal("y", x) for x in xs)))
    body = and_all([member(x) for x in xs] + _distinct(xs) + [closure])
    for x in reversed(xs):
        body = Exists(x, body)
    return body


def unary_description_sentence(d: UnaryDepDescription,
                               relation: str = "R") -> Formula:
    """The description as a defining first-order sentence over one unary
    relation symbol, suitable for registering the dependency directly."""
    def term_sentence(t: CountingTerm) -> Formula:
        base = _exactly_k_subjects(t.k, t.kind in ("eq", "neq"), relation)
        return base if t.kind in ("eq", "co_eq") else dual_negate(base)

    return or_all(
        and_all(term_sentence(t) for t in clause) for clause in d.clauses
    )


# ---------------------------------------------------------------------------
# bracket extraction


def _contains_bracket(f: Formula) -> bool:
    match f:
        case Bracket():
            return True
        case (And(l, r) | TensorOr(l, r) | ClassicalOr(l, r) | IntImpl(l, r)):
            return _contains_bracket(l) or _contains_bracket(r)
        case Exists(_, body) | Forall(_, body) | ContraNeg(body) | Possibly(body):
            return _contains_bracket(body)
        case _:
            return False


def extract_brackets(f: Formula) -> tuple[list[Formula], Formula]:
    """Hoist every bracketed sentence out of f, returning (sentences, core)
    with core bracket-free and the conjunction of the bracket atoms with
    core equivalent to f.

    A whole-team disjunction above a bracket has no such single-conjunction
    form (the disjuncts may demand different sentences); use
    :func:`extract_brackets_dnf` for those.
    """
    sentences, core = _extract(f)
    seen: list[Formula] = []
    for s in sentences:
        if s not in seen:
            seen.append(s)
    return seen, core


def _extract(f: Formula) -> tuple[list[Formula], Formula]:
    match f:
        case Bracket(body):
            return [body], TOP
        case And(l, r):
            sl, cl = _extract(l)
            sr, cr = _extract(r)
            return sl + sr, _simplify_and(cl, cr)
        case TensorOr(l, r):
            sl, cl = _extract(l)
            sr, cr = _extract(r)
            return sl + sr, TensorOr(cl, cr)
        case Exists(v, body):
            s, c = _extract(body)
            return s, Exists(v, c)
        case Forall(v, body):
            s, c = _extract(body)
            return s, Forall(v, c)
        case ClassicalOr():
            if _contains_bracket(f):
                raise TransformError(
                    "brackets under || have no single conjunction form; "
                    "use extract_brackets_dnf"
                )
            return [], f
        case ContraNeg() | IntImpl() | Possibly():
            raise TransformError(
                f"bracket extraction does not handle {type(f).__name__}"
            )
        case _:
            return [], f


def _simplify_and(l: Formula, r: Formula) -> Formula:
    if l == TOP:
        return r
    if r == TOP:
        return l
    return And(l, r)


def extract_brackets_dnf(f: Formula) -> list[tuple[list[Formula], Formula]]:
    """Distribute || to the top and hoist brackets within each disjunct;
    the result reads as the ||-join of conjunction-of-brackets forms."""
    return [extract_brackets(part) for part in to_classical_dnf(f)]
