"""Boundedness analysis and the brute-force equivalence oracle.

A formula over upward-closed atoms admits small satisfying subteams: each
atom occurrence contributes its own witness bound, and the occurrence-
weighted sum bounds the whole formula.  This module computes those bounds,
verifies them empirically by exhaustive sweeps, extracts minimal witnesses,
and builds the totality-arity separation witness.  The ``equivalent``
sweep doubles as the correctness oracle for every rewriter.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, product
from typing import Iterable

from .evaluator import EMPTY_REGISTRY, Evaluator, Registry, evaluate
from .structures import (
    Model,
    Team,
    enumerate_models,
    enumerate_teams,
    model_to_text,
    team_to_text,
)
from .syntax import (
    And,
    Atom,
    ClassicalOr,
    Equal,
    Exists,
    Forall,
    Formula,
    NegativeLiteral,
    NotEqual,
    PositiveLiteral,
    Signature,
    TensorOr,
    EMPTY_SIGNATURE,
    free_variables,
    relation_arities,
)


class AnalysisError(ValueError):
    """Input outside the analyzable fragment, or a sweep cap exceeded."""


#: closed-form bounds: ("const", c) -> c, ("lin", c) -> c*n, ("pow", k) -> n**k
Bound = tuple[str, int]


def bound_value(bound: Bound, n: int) -> int:
    form, c = bound
    if form == "const":
        return c
    if form == "lin":
        return c * n
    if form == "pow":
        return n ** c
    raise AnalysisError(f"unknown bound form {form!r}")


_UPWARD_BUILTIN = frozenset({"ne", "ncon", "ndep", "geq", "all"})


class GammaTable:
    """Witness-size bounds per atom.  Defaults: NE needs 1 row, inconstancy
    and dependence-failure need 2, geq(vs, n) needs n, a k-ary totality or
    custom atom needs n**k rows; first-order literals and constancy
    contribute nothing.  ``overrides`` maps atom kinds or custom names to
    replacement bounds."""

    def __init__(self, overrides: dict[str, Bound] | None = None):
        self.overrides = dict(overrides or {})

    def bound_for(self, atom: Atom, registry: Registry) -> Bound:
        key = atom.name if atom.kind == "custom" else atom.kind
        if key in self.overrides:
            return self.overrides[key]
        match atom.kind:
            case "const":
                return ("const", 0)
            case "ne":
                return ("const", 1)
            case "ncon" | "ndep":
                return ("const", 2)
            case "geq":
                return ("const", atom.param)
            case "all":
                return ("pow", len(atom.parts[0]))
            case "custom":
                spec = registry.get(atom.name)
                if spec.claimed_upward_closed != "yes":
                    raise AnalysisError(
                        f"custom atom {atom.name!r} is not claimed upward closed "
                        f"and has no bound override"
                    )
                return ("pow", spec.arity)
        raise AnalysisError(f"atom {atom.kind} is outside the bounded fragment")


def _atom_occurrences(f: Formula) -> list[Atom]:
    match f:
        case Atom():
            return [f]
        case And(l, r) | TensorOr(l, r) | ClassicalOr(l, r):
            return _atom_occurrences(l) + _atom_occurrences(r)
        case Exists(_, body) | Forall(_, body):
            return _atom_occurrences(body)
        case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
            return []
    raise AnalysisError(
        f"{type(f).__name__} is outside the bounded fragment"
    )


def nu_bound(f: Formula, n: int, gamma: GammaTable | None = None,
             registry: Registry | None = None) -> int:
    """Occurrence-weighted witness bound: the sum over all dependency-atom
    occurrences of their individual bounds at domain size n."""
    gamma = gamma or GammaTable()
    registry = registry or EMPTY_REGISTRY
    return sum(
        bound_value(gamma.bound_for(a, registry), n) for a in _atom_occurrences(f)
    )


def minimal_satisfying_subteam(model: Model, team: Team, f: Formula,
                               registry: Registry | None = None,
                               cap: int = 16) -> Team | None:
    """A minimum-cardinality subteam satisfying f, or None when none does
    (ties broken by enumeration order over sorted rows)."""
    if len(team) > cap:
        raise AnalysisError(f"team of size {len(team)} exceeds the cap of {cap}")
    ev = Evaluator(model, registry)
    rows = sorted(team.rows)
    for size in range(len(rows) + 1):
        for combo in combinations(rows, size):
            candidate = team.with_rows(combo)
            if ev.evaluate(candidate, f):
                # witnesses are re-validated with fresh state before return
                if not evaluate(model, candidate, f, registry):
                    raise AnalysisError("unstable evaluation result")
                return candidate
    return None


def _check_bounded_fragment(f: Formula, gamma: GammaTable, registry: Registry):
    for atom in _atom_occurrences(f):
        if atom.kind == "const":
            continue
        key = atom.name if atom.kind == "custom" else atom.kind
        if key in gamma.overrides:
            continue
        if atom.kind == "custom":
            if registry.get(atom.name).claimed_upward_closed != "yes":
                raise AnalysisError(
                    f"custom atom {atom.name!r} is not upward closed; "
                    f"give an explicit bound override to include it"
                )
        elif atom.kind not in _UPWARD_BUILTIN:
            raise AnalysisError(
                f"atom {atom.kind} is not upward closed and has no bound override"
            )


@dataclass(frozen=True)
class BoundReport:
    formula: Formula
    model_size: int
    team_size: int
    nu_value: int
    witness_size: int
    holds: bool

    def __str__(self):
        flag = "ok" if self.holds else "VIOLATION"
        return (f"|M|={self.model_size} |X|={self.team_size}: "
                f"witness {self.witness_size} <= nu {self.nu_value} [{flag}]")


def check_boundedness(f: Formula, max_model: int,
                      gamma: GammaTable | None = None,
                      registry: Registry | None = None,
                      team_limit: int = 16) -> list[BoundReport]:
    """Sweep every empty-signature model up to max_model and every
    satisfying team over the formula's free variables, reporting whether a
    witness subteam within the computed bound exists."""
    gamma = gamma or GammaTable()
    registry = registry or EMPTY_REGISTRY
    if relation_arities(f):
        raise AnalysisError("boundedness sweeps cover empty-signature models only")
    _check_bounded_fragment(f, gamma, registry)
    variables = sorted(free_variables(f))
    reports = []
    for size in range(1, max_model + 1):
        model = Model(size)
        nu = nu_bound(f, size, gamma, registry)
        ev = Evaluator(model, registry)
        for team in enumerate_teams(model, variables, limit=team_limit):
            if not ev.evaluate(team, f):
                continue
            witness = minimal_satisfying_subteam(model, team, f, registry,
                                                 cap=team_limit)
            wsize = len(witness) if witness is not None else len(team)
            reports.append(BoundReport(f, size, len(team), nu, wsize,
                                       witness is not None and wsize <= nu))
    return reports


@dataclass(frozen=True)
class HierarchyReport:
    """Separation witness: on the found domain size, the full team over
    arity-many variables satisfies the wide totality atom but admits no
    witness within the bound available to the narrower arity."""

    wide_arity: int
    narrow_arity: int
    occurrences: int
    domain_size: int
    team_size: int
    narrow_bound: int
    witness_size: int
    exceeds: bool

    def __str__(self):
        cmp = ">" if self.exceeds else "<="
        return (f"n={self.domain_size}: minimal totality witness "
                f"{self.witness_size} {cmp} {self.narrow_bound} "
                f"= {self.occurrences}*n^{self.narrow_arity}")


def hierarchy_witness(wide_arity: int, narrow_arity: int, occurrences: int,
                      max_domain: int = 8, team_cap: int = 16) -> HierarchyReport:
    """Build the totality-arity separation witness: the least domain size n
    with n**wide > occurrences * n**narrow, the full team over wide-arity
    variables, and its exact minimal satisfying subteam."""
    if not wide_arity > narrow_arity >= 1:
        raise AnalysisError("need wide_arity > narrow_arity >= 1")
    if occurrences < 1:
        raise AnalysisError("occurrence count must be >= 1")
    n = None
    for candidate in range(1, max_domain + 1):
        if candidate ** wide_arity > occurrences * candidate ** narrow_arity:
            n = candidate
            break
    if n is None:
        raise AnalysisError(f"no domain size up to {max_domain} separates the bounds")
    team_size = n ** wide_arity
    if team_size > team_cap:
        raise AnalysisError(
            f"witness team of size {team_size} exceeds the cap of {team_cap}"
        )
    model = Model(n)
    variables = tuple(f"w{i}" for i in range(1, wide_arity + 1))
    full = Team(variables, product(range(n), repeat=wide_arity))
    atom = Atom("all", (variables,))
    if not evaluate(model, full, atom):
        raise AnalysisError("full team unexpectedly fails the totality atom")
    witness = minimal_satisfying_subteam(model, full, atom, cap=team_cap)
    narrow_bound = occurrences * n ** narrow_arity
    wsize = len(witness)
    return HierarchyReport(wide_arity, narrow_arity, occurrences, n,
                           team_size, narrow_bound, wsize, wsize > narrow_bound)


@dataclass(frozen=True)
class EquivReport:
    equivalent: bool
    max_model: int
    team_filter: str
    counter_model: Model | None = None
    counter_team: Team | None = None
    left_value: bool | None = None

    def __str__(self):
        if self.equivalent:
            return (f"equivalent (models up to size {self.max_model}, "
                    f"{self.team_filter} teams)")
        return (f"counterexample at |M|={self.counter_model.size}, "
                f"|X|={len(self.counter_team)}: left is {self.left_value}")

    def to_text(self) -> str:
        if self.equivalent:
            return str(self) + "\n"
        return (str(self) + "\n" + model_to_text(self.counter_model)
                + team_to_text(self.counter_team))


def equivalent(f: Formula, g: Formula, variables: Iterable[str],
               signature: Signature = EMPTY_SIGNATURE, max_model: int = 3,
               team_filter: str = "all",
               registry: Registry | None = None,
               team_limit: int = 16) -> EquivReport:
    """Exhaustively compare two formulas over all models of the signature up
    to max_model and all teams over the given variables; the first
    disagreement (re-checked from scratch) becomes the counterexample."""
    if team_filter not in ("all", "nonempty"):
        raise AnalysisError("team_filter must be 'all' or 'nonempty'")
    variables = tuple(sorted(set(variables)))
    for h in (f, g):
        extra = free_variables(h) - set(variables)
        if extra:
            raise AnalysisError(f"free variables {sorted(extra)} not swept")
    for size in range(1, max_model + 1):
        for model in enumerate_models(signature, size):
            ev_f = Evaluator(model, registry)
            ev_g = Evaluator(model, registry)
            for team in enumerate_teams(model, variables, limit=team_limit):
                if team_filter == "nonempty" and team.is_empty():
                    continue
                a = ev_f.evaluate(team, f)
                b = ev_g.evaluate(team, g)
                if a != b:
                    # revalidate with fresh state before reporting
                    a2 = evaluate(model, team, f, registry)
                    b2 = evaluate(model, team, g, registry)
                    if a2 == b2:
                        raise AnalysisError("unstable evaluation result")
                    return EquivReport(False, max_model, team_filter,
                                       model, team, a2)
    return EquivReport(True, max_model, team_filter)
