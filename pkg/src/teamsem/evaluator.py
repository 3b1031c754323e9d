"""Lax team-semantics evaluator with a registry of first-order dependency
notions.

Satisfaction follows the lax rules: the splitting disjunction divides the
team into two covering (possibly overlapping) parts, the existential
quantifier assigns each row a nonempty set of witness values, and atoms
read properties of the team's projections.

The split and witness searches would be hopeless if done literally, so the
evaluator prunes them using three structural facts:

  * a team satisfying a formula satisfies its first-order envelope (the
    formula with every team-level construct weakened to T), so witness rows
    must pass the envelope pointwise;
  * formulas built from upward-closed atoms transfer upward to any
    envelope-satisfying superteam, so the largest candidate decides;
  * formulas built from downward-closed atoms transfer to subteams, so a
    partial witness that already fails can be discarded.

The test suite cross-checks all of this against a literal rule-by-rule
evaluator that enumerates splits and choice functions outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, product
from typing import Iterator, Mapping

from .structures import EnumerationLimit, Model, Team, tarski_eval, universal_extend
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
    NegativeLiteral,
    NotEqual,
    Possibly,
    PositiveLiteral,
    Signature,
    TensorOr,
    TOP,
    free_variables,
    is_first_order,
    relation_arities,
    _ATOM_SHAPES,
)


class EvalError(ValueError):
    """Evaluation hit a malformed input: unknown variables, unregistered
    custom atoms, or a non-first-order formula where one is required."""


_UPWARD_KINDS = frozenset({"ne", "ncon", "ndep", "geq", "all"})
_DOWNWARD_KINDS = frozenset({"const", "dep"})

_RESERVED_ATOM_NAMES = frozenset(_ATOM_SHAPES) | {"custom"}


@dataclass(frozen=True)
class DependencySpec:
    """A dependency notion given by a defining first-order sentence over a
    single relation symbol R of the declared arity.

    ``claimed_upward_closed`` is trusted by the evaluator's search pruning;
    verify claims with :func:`check_upward_closed`.
    """

    name: str
    arity: int
    definition: Formula
    claimed_upward_closed: str = "unknown"

    def __post_init__(self):
        if self.name in _RESERVED_ATOM_NAMES:
            raise ValueError(f"{self.name!r} collides with a built-in atom")
        if self.arity < 0:
            raise ValueError("arity must be >= 0")
        if self.claimed_upward_closed not in ("yes", "no", "unknown"):
            raise ValueError("claimed_upward_closed must be yes/no/unknown")
        if not is_first_order(self.definition):
            raise ValueError("defining sentence must be first-order")
        if free_variables(self.definition):
            raise ValueError("defining sentence must have no free variables")
        for rel, arity in relation_arities(self.definition):
            if rel != "R":
                raise ValueError(f"defining sentence may only use R, found {rel}")
            if arity != self.arity:
                raise ValueError(
                    f"R used with arity {arity}, expected {self.arity}"
                )
        if self.arity == 0 and relation_arities(self.definition):
            raise ValueError("0-ary notions are sentences over the empty signature")


class Registry:
    """Immutable name -> DependencySpec table; register() returns a copy."""

    def __init__(self, specs: Mapping[str, DependencySpec] | None = None):
        self._specs = dict(specs or {})

    def register(self, spec: DependencySpec) -> "Registry":
        if spec.name in self._specs:
            raise ValueError(f"dependency {spec.name!r} already registered")
        out = dict(self._specs)
        out[spec.name] = spec
        return Registry(out)

    def get(self, name: str) -> DependencySpec:
        try:
            return self._specs[name]
        except KeyError:
            raise EvalError(f"unregistered dependency {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._specs

    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._specs))


EMPTY_REGISTRY = Registry()


def register(registry: Registry, spec: DependencySpec) -> Registry:
    return registry.register(spec)


# ---------------------------------------------------------------------------
# structural fragments used by the search pruning


@lru_cache(maxsize=None)
def envelope(f: Formula) -> Formula:
    """First-order upper bound: every row of a satisfying team satisfies it.

    Equals the flattening on formulas without ~, ||, ->, <>, [.]; other
    constructs weaken to T at their (monotone) positions.
    """
    match f:
        case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
            return f
        case And(l, r):
            return _simp_and(envelope(l), envelope(r))
        case TensorOr(l, r) | ClassicalOr(l, r):
            return _simp_or(envelope(l), envelope(r))
        case Exists(v, body):
            e = envelope(body)
            return TOP if e == TOP else Exists(v, e)
        case Forall(v, body):
            e = envelope(body)
            return TOP if e == TOP else Forall(v, e)
        case _:
            return TOP


def _simp_and(l: Formula, r: Formula) -> Formula:
    if l == TOP:
        return r
    if r == TOP:
        return l
    return And(l, r)


def _simp_or(l: Formula, r: Formula) -> Formula:
    if l == TOP or r == TOP:
        return TOP
    return TensorOr(l, r)


@lru_cache(maxsize=None)
def downward_part(f: Formula) -> Formula:
    """Downward-closed weakening: implied by f, inherited by subteams.

    Subtrees that are not downward closed collapse to T; what survives
    (first-order parts, constancy, functional dependence) drives the
    early rejection of partial witnesses.
    """
    if _is_downward(f):
        return f
    match f:
        case And(l, r):
            return _simp_and(downward_part(l), downward_part(r))
        case TensorOr(l, r):
            dl, dr = downward_part(l), downward_part(r)
            return TOP if TOP in (dl, dr) else TensorOr(dl, dr)
        case ClassicalOr(l, r):
            dl, dr = downward_part(l), downward_part(r)
            return TOP if TOP in (dl, dr) else ClassicalOr(dl, dr)
        case Exists(v, body):
            d = downward_part(body)
            return TOP if d == TOP else Exists(v, d)
        case Forall(v, body):
            d = downward_part(body)
            return TOP if d == TOP else Forall(v, d)
        case _:
            return TOP


@lru_cache(maxsize=None)
def _is_downward(f: Formula) -> bool:
    """Satisfaction transfers to every subteam."""
    match f:
        case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
            return True
        case Atom(kind):
            return kind in _DOWNWARD_KINDS
        case And(l, r) | TensorOr(l, r) | ClassicalOr(l, r):
            return _is_downward(l) and _is_downward(r)
        case Exists(_, body) | Forall(_, body):
            return _is_downward(body)
        case Bracket() | IntImpl():
            return True
        case _:
            return False


class Evaluator:
    """One lax-semantics evaluation context: fixed model and registry, with
    memoization keyed on (subformula, team)."""

    def __init__(self, model: Model, registry: Registry | None = None):
        self.model = model
        self.registry = registry or EMPTY_REGISTRY
        self._memo: dict[tuple[Formula, Team], bool] = {}
        self._restrict_memo: dict[tuple[Formula, Team], Team] = {}
        self._up_memo: dict[Formula, bool] = {}
        self._bracket_memo: dict[Formula, bool] = {}

    # -- public entry points

    def evaluate(self, team: Team, f: Formula) -> bool:
        missing = free_variables(f) - set(team.variables)
        if missing:
            raise EvalError(f"free variables outside the team domain: {sorted(missing)}")
        return self._eval(team, f)

    def satisfying_subteams(self, team: Team, f: Formula) -> frozenset[Team]:
        """All subteams of the given team that satisfy f."""
        self.evaluate(team, f)  # validates variables up front
        rows = sorted(team.rows)
        out = []
        for size in range(len(rows) + 1):
            for combo in combinations(rows, size):
                sub = team.with_rows(combo)
                if self._eval(sub, f):
                    out.append(sub)
        return frozenset(out)

    # -- dispatch

    def _eval(self, team: Team, f: Formula) -> bool:
        team = team.restrict_vars(free_variables(f))  # locality
        key = (f, team)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        result = self._eval_raw(team, f)
        self._memo[key] = result
        return result

    def _eval_raw(self, team: Team, f: Formula) -> bool:
        match f:
            case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
                return len(self._restrict(team, f)) == len(team.rows)
            case And(l, r):
                return self._eval(team, l) and self._eval(team, r)
            case TensorOr(l, r):
                return self._tensor_or(team, l, r)
            case ClassicalOr(l, r):
                return self._eval(team, l) or self._eval(team, r)
            case ContraNeg(body):
                return not self._eval(team, body)
            case IntImpl(l, r):
                return all(
                    not self._eval(sub, l) or self._eval(sub, r)
                    for sub in self._all_subteams(team)
                )
            case Possibly(body):
                return self._possibly(team, body)
            case Exists(v, body):
                return self._exists(team, v, body)
            case Forall(v, body):
                return self._eval(universal_extend(self.model, team, v), body)
            case Bracket(body):
                return self._bracket(body)
            case Atom():
                return self._atom(team, f)
        raise EvalError(f"cannot evaluate {type(f).__name__}")

    # -- atoms

    def _atom(self, team: Team, a: Atom) -> bool:
        n = self.model.size
        rows = team.rows
        match a.kind:
            case "ne":
                return bool(rows)
            case "const":
                return len(team.project_rows(a.parts[0])) <= 1
            case "ncon":
                return len(team.project_rows(a.parts[0])) >= 2
            case "all":
                k = len(a.parts[0])
                return len(team.project_rows(a.parts[0])) == n ** k
            case "geq":
                return len(team.project_rows(a.parts[0])) >= a.param
            case "dep" | "ndep":
                vs, ws = a.parts
                seen: dict[tuple[int, ...], tuple[int, ...]] = {}
                functional = True
                vi = [team.column_index(v) for v in vs]
                wi = [team.column_index(w) for w in ws]
                for row in rows:
                    key = tuple(row[i] for i in vi)
                    val = tuple(row[i] for i in wi)
                    if seen.setdefault(key, val) != val:
                        functional = False
                        break
                return functional if a.kind == "dep" else not functional
            case "inc" | "ninc":
                pv = team.project_rows(a.parts[0])
                pw = team.project_rows(a.parts[1])
                return (pv <= pw) if a.kind == "inc" else not (pv <= pw)
            case "ind" | "nind":
                us, vs, ws = a.parts
                ui = [team.column_index(u) for u in us]
                vi = [team.column_index(v) for v in vs]
                wi = [team.column_index(w) for w in ws]
                full = {tuple(row[i] for i in ui + vi + wi) for row in rows}
                ok = True
                for r1 in rows:
                    for r2 in rows:
                        if tuple(r1[i] for i in ui) != tuple(r2[i] for i in ui):
                            continue
                        want = (tuple(r1[i] for i in ui) + tuple(r1[i] for i in vi)
                                + tuple(r2[i] for i in wi))
                        if want not in full:
                            ok = False
                            break
                    if not ok:
                        break
                return ok if a.kind == "ind" else not ok
            case "count_eq":
                return len(team.project_rows(a.parts[0])) == a.param
            case "count_neq":
                return len(team.project_rows(a.parts[0])) != a.param
            case "cocount_eq":
                return n - len(team.project_rows(a.parts[0])) == a.param
            case "cocount_neq":
                return n - len(team.project_rows(a.parts[0])) != a.param
            case "custom":
                return self._custom(team, a)
        raise EvalError(f"unknown atom kind {a.kind!r}")

    def _custom(self, team: Team, a: Atom) -> bool:
        spec = self.registry.get(a.name)
        if len(a.parts[0]) != spec.arity:
            raise EvalError(
                f"{a.name} has arity {spec.arity}, used with {len(a.parts[0])} argument(s)"
            )
        if spec.arity == 0:
            # model-level truth, the team (even the empty one) is ignored
            key = Atom("custom", ((),), name=a.name)
            hit = self._bracket_memo.get(key)
            if hit is None:
                empty = Model(self.model.size)
                hit = tarski_eval(empty, {}, spec.definition)
                self._bracket_memo[key] = hit
            return hit
        relation = team.project_rows(a.parts[0])
        sig = Signature({"R": spec.arity})
        struct = Model(self.model.size, {"R": relation}, sig)
        return tarski_eval(struct, {}, spec.definition)

    def _bracket(self, body: Formula) -> bool:
        hit = self._bracket_memo.get(body)
        if hit is None:
            hit = tarski_eval(self.model, {}, body)
            self._bracket_memo[body] = hit
        return hit

    # -- helpers

    def _restrict(self, team: Team, theta: Formula) -> Team:
        key = (theta, team)
        hit = self._restrict_memo.get(key)
        if hit is not None:
            return hit
        vs = team.variables
        kept = [row for row in team.rows
                if tarski_eval(self.model, dict(zip(vs, row)), theta)]
        out = team.with_rows(kept)
        self._restrict_memo[key] = out
        return out

    def _all_subteams(self, team: Team) -> Iterator[Team]:
        rows = sorted(team.rows)
        for size in range(len(rows) + 1):
            for combo in combinations(rows, size):
                yield team.with_rows(combo)

    def _is_upward(self, f: Formula) -> bool:
        """Satisfaction transfers to envelope-satisfying superteams."""
        hit = self._up_memo.get(f)
        if hit is not None:
            return hit
        match f:
            case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
                result = True
            case Atom(kind):
                if kind == "custom":
                    result = self.registry.get(f.name).claimed_upward_closed == "yes"
                else:
                    result = kind in _UPWARD_KINDS
            case And(l, r) | TensorOr(l, r):
                result = self._is_upward(l) and self._is_upward(r)
            case Exists(_, body) | Forall(_, body):
                result = self._is_upward(body)
            case Bracket() | Possibly():
                result = True
            case _:
                result = False
        self._up_memo[f] = result
        return result

    # -- splitting disjunction

    def _tensor_or(self, team: Team, left: Formula, right: Formula) -> bool:
        ml = self._restrict(team, envelope(left))
        mr = self._restrict(team, envelope(right))
        if not (ml.rows | mr.rows) >= team.rows:
            return False
        fo_l, fo_r = is_first_order(left), is_first_order(right)
        if fo_l and fo_r:
            return True
        if fo_l:
            return self._exists_sat(right, mr, team.rows - ml.rows)
        if fo_r:
            return self._exists_sat(left, ml, team.rows - mr.rows)
        if self._is_upward(right):
            return self._eval(mr, right) and self._exists_sat(
                left, ml, team.rows - mr.rows)
        if self._is_upward(left):
            return self._eval(ml, left) and self._exists_sat(
                right, mr, team.rows - ml.rows)
        if _is_downward(left) and _is_downward(right):
            return self._down_split(team, left, right, ml, mr)
        # generic: the right part must contain every row the left envelope
        # rejects; enumerate its optional extras, then close the left part
        if self._eval(ml, left) and self._eval(mr, right):
            return True
        forced = team.rows - ml.rows
        optional = sorted(ml.rows & mr.rows)
        for size in range(len(optional) + 1):
            for combo in combinations(optional, size):
                z = team.with_rows(forced | set(combo))
                if self._eval(z, right) and self._exists_sat(
                        left, ml, team.rows - z.rows):
                    return True
        return False

    def _down_split(self, team: Team, left: Formula, right: Formula,
                    ml: Team, mr: Team) -> bool:
        """Both sides downward closed: a partition suffices, assign rows one
        at a time and reject as soon as a side fails."""
        rows = sorted(team.rows)

        def assign(i: int, ls: frozenset, rs: frozenset) -> bool:
            if i == len(rows):
                return True
            row = rows[i]
            if row in ml.rows:
                nls = ls | {row}
                if self._eval(team.with_rows(nls), left) and assign(i + 1, nls, rs):
                    return True
            if row in mr.rows:
                nrs = rs | {row}
                if self._eval(team.with_rows(nrs), right) and assign(i + 1, ls, nrs):
                    return True
            return False

        empty = frozenset()
        return (self._eval(team.with_rows(empty), left)
                and self._eval(team.with_rows(empty), right)
                and assign(0, empty, empty))

    def _exists_sat(self, f: Formula, upper: Team, lower: frozenset) -> bool:
        """Is there a team Y with lower <= Y <= upper satisfying f?"""
        upper = self._restrict(upper, envelope(f))
        if not lower <= upper.rows:
            return False
        if is_first_order(f):
            return True
        if self._is_upward(f):
            return self._eval(upper, f)
        if _is_downward(f):
            return self._eval(upper.with_rows(lower), f)
        if self._eval(upper, f):
            return True
        optional = sorted(upper.rows - lower)
        for size in range(len(optional) + 1):
            for combo in combinations(optional, size):
                if self._eval(upper.with_rows(lower | set(combo)), f):
                    return True
        return False

    # -- possibility

    def _possibly(self, team: Team, body: Formula) -> bool:
        u = self._restrict(team, envelope(body))
        if u.is_empty():
            return False
        if self._is_upward(body):
            return self._eval(u, body)
        if _is_downward(body):
            return any(self._eval(team.with_rows((row,)), body) for row in u.rows)
        rows = sorted(u.rows)
        for size in range(1, len(rows) + 1):
            for combo in combinations(rows, size):
                if self._eval(team.with_rows(combo), body):
                    return True
        return False

    # -- lax existential quantification

    def _exists(self, team: Team, v: str, body: Formula) -> bool:
        """Lax witness search: a satisfying Y inside the universal extension
        must hit the extension block of every original row."""
        extended = universal_extend(self.model, team, v)
        allowed = self._restrict(extended, envelope(body))

        # group the extension by the originating row (drop the v column)
        keep = [i for i, name in enumerate(extended.variables) if name != v]
        blocks: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
        for row in team.rows:
            src = dict(zip(team.variables, row))
            key = tuple(src[name] for i, name in enumerate(extended.variables)
                        if name != v)
            blocks.setdefault(key, [])
        for row in allowed.rows:
            key = tuple(row[i] for i in keep)
            if key in blocks:
                blocks[key].append(row)
        if any(not rows for rows in blocks.values()):
            return False
        if is_first_order(body):
            return True
        if self._is_upward(body):
            return self._eval(allowed, body)
        if self._eval(allowed, body):
            return True  # the full allowed extension is itself a witness

        block_list = [sorted(rows) for _, rows in sorted(blocks.items())]
        if _is_downward(body):
            return self._exists_dfs_singletons(extended, body, block_list)
        skeleton = downward_part(body)
        prune = None if skeleton == TOP else skeleton
        return self._exists_dfs(extended, body, block_list, prune)

    def _exists_dfs_singletons(self, extended: Team, body: Formula,
                               blocks: list[list[tuple[int, ...]]]) -> bool:
        """Downward-closed body: one row per block suffices."""

        def walk(i: int, acc: frozenset) -> bool:
            if i == len(blocks):
                return self._eval(extended.with_rows(acc), body)
            for row in blocks[i]:
                nxt = acc | {row}
                if self._eval(extended.with_rows(nxt), body) and walk(i + 1, nxt):
                    return True
            return False

        return walk(0, frozenset())

    def _exists_dfs(self, extended: Team, body: Formula,
                    blocks: list[list[tuple[int, ...]]],
                    prune: Formula | None) -> bool:
        """General body: choose a nonempty subset per block, rejecting any
        prefix whose downward-closed part already fails."""

        def subsets(rows: list) -> Iterator[frozenset]:
            for mask in range(1, 1 << len(rows)):
                yield frozenset(rows[i] for i in range(len(rows)) if mask >> i & 1)

        def walk(i: int, acc: frozenset) -> bool:
            if i == len(blocks):
                return self._eval(extended.with_rows(acc), body)
            for chosen in subsets(blocks[i]):
                nxt = acc | chosen
                if prune is not None and not self._eval(extended.with_rows(nxt), prune):
                    continue
                if walk(i + 1, nxt):
                    return True
            return False

        return walk(0, frozenset())


def evaluate(model: Model, team: Team, f: Formula,
             registry: Registry | None = None) -> bool:
    """Lax team-semantics satisfaction of f by the team in the model."""
    return Evaluator(model, registry).evaluate(team, f)


def satisfying_subteams(model: Model, team: Team, f: Formula,
                        registry: Registry | None = None) -> frozenset[Team]:
    """All subteams Y of the team with the model satisfying f on Y."""
    return Evaluator(model, registry).satisfying_subteams(team, f)


@dataclass(frozen=True)
class UpwardClosedVerdict:
    holds: bool
    max_size: int
    counterexample: tuple[int, frozenset, frozenset] | None = None

    def __str__(self):
        if self.holds:
            return f"upward closed on all domains up to size {self.max_size}"
        n, r, s = self.counterexample
        return (f"not upward closed: domain size {n}, "
                f"R={sorted(r)} satisfies but S={sorted(s)} does not")


def check_upward_closed(spec: DependencySpec, max_size: int,
                        tuple_limit: int = 9) -> UpwardClosedVerdict:
    """Exhaustively test R subset-of S preservation up to a domain size.

    Growing a relation one tuple at a time reaches every superset, so
    closure under single-tuple extensions is checked instead of all pairs.
    """
    if spec.arity < 1:
        raise ValueError("upward closure concerns arities >= 1")
    sig = Signature({"R": spec.arity})
    for n in range(1, max_size + 1):
        space = list(product(range(n), repeat=spec.arity))
        if len(space) > tuple_limit:
            raise EnumerationLimit(
                f"{len(space)} tuples exceed the cap of {tuple_limit}"
            )
        count = len(space)
        sat = {}
        for mask in range(1 << count):
            rel = frozenset(space[i] for i in range(count) if mask >> i & 1)
            sat[rel] = tarski_eval(Model(n, {"R": rel}, sig), {}, spec.definition)
        for rel, ok in sat.items():
            if not ok:
                continue
            for extra in space:
                if extra in rel:
                    continue
                grown = rel | {extra}
                if not sat[grown]:
                    return UpwardClosedVerdict(False, max_size, (n, rel, grown))
    return UpwardClosedVerdict(True, max_size)
