"""Formula language for lax team semantics: AST, parser, pretty-printer.

Operator precedence, tightest first: prefix ``~``, ``<>`` and quantifiers,
then ``&``, ``|`` (splitting disjunction), ``||`` (whole-team disjunction),
``->`` (right associative intuitionistic implication).  ``!`` spells
negative literals only, so every formula is in negation normal form by
construction; ``~`` is the contradictory negation operator.  ``[ ... ]``
encloses a first-order sentence whose truth is read off the model alone.
``T`` and ``bot`` expand on parsing to ``forall v (v = v)`` and
``exists v (v != v)``.

Variables match ``[a-z][a-zA-Z0-9_]*`` and relations ``[A-Z][a-zA-Z0-9_]*``.
Dependency atoms group their arguments with ``;``: ``dep(x y; w)``,
``inc(x y; u w)``, ``ind(u; v; w)`` (read: v independent of w given u),
``geq(x y, 3)``, ``count_eq(v, 2)``, and ``D:name(x, y)`` for atoms
registered at evaluation time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping


class ParseError(ValueError):
    def __init__(self, message: str, position: int | None = None):
        if position is not None:
            message = f"{message} (at position {position})"
        super().__init__(message)
        self.position = position


_RELATION_NAME = re.compile(r"[A-Z][a-zA-Z0-9_]*\Z")
_VARIABLE_NAME = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")

#: relation names that would collide with formula syntax
_RESERVED_RELATIONS = frozenset({"T", "NE"})

_ATOM_KEYWORDS = frozenset({
    "const", "dep", "inc", "ind", "all", "ncon", "ndep", "ninc", "nind",
    "geq", "count_eq", "count_neq", "cocount_eq", "cocount_neq",
})
_KEYWORDS = _ATOM_KEYWORDS | {"exists", "forall", "bot"}

#: atom kind -> (number of ;-separated groups, takes a numeric parameter)
_ATOM_SHAPES = {
    "const": (1, False),
    "dep": (2, False),
    "inc": (2, False),
    "ind": (3, False),
    "all": (1, False),
    "ne": (0, False),
    "ncon": (1, False),
    "ndep": (2, False),
    "geq": (1, True),
    "ninc": (2, False),
    "nind": (3, False),
    "count_eq": (1, True),
    "count_neq": (1, True),
    "cocount_eq": (1, True),
    "cocount_neq": (1, True),
}

#: kinds whose first (only) group must be a single variable
_SINGLE_VAR_KINDS = frozenset({"count_eq", "count_neq", "cocount_eq", "cocount_neq"})


class Signature:
    """Relation name -> arity map describing a relational vocabulary."""

    def __init__(self, relations: Mapping[str, int] | None = None):
        rels = dict(relations or {})
        for name, arity in rels.items():
            if not _RELATION_NAME.match(name):
                raise ValueError(f"bad relation name {name!r}")
            if name in _RESERVED_RELATIONS:
                raise ValueError(f"relation name {name!r} is reserved")
            if not isinstance(arity, int) or arity < 0:
                raise ValueError(f"bad arity for relation {name!r}: {arity!r}")
        self._relations = rels

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self._relations))

    def arity(self, name: str) -> int:
        return self._relations[name]

    def __contains__(self, name: str) -> bool:
        return name in self._relations

    def items(self):
        return sorted(self._relations.items())

    def __eq__(self, other):
        return isinstance(other, Signature) and self._relations == other._relations

    def __hash__(self):
        return hash(tuple(sorted(self._relations.items())))

    def __repr__(self):
        inner = ", ".join(f"{n}:{a}" for n, a in self.items())
        return f"Signature({{{inner}}})"


EMPTY_SIGNATURE = Signature()


@dataclass(frozen=True)
class Formula:
    def __str__(self) -> str:
        return pretty(self)


@dataclass(frozen=True)
class PositiveLiteral(Formula):
    relation: str
    args: tuple[str, ...]

    def __post_init__(self):
        _check_relation(self.relation)
        _check_vars(self.args)


@dataclass(frozen=True)
class NegativeLiteral(Formula):
    relation: str
    args: tuple[str, ...]

    def __post_init__(self):
        _check_relation(self.relation)
        _check_vars(self.args)


@dataclass(frozen=True)
class Equal(Formula):
    left: str
    right: str

    def __post_init__(self):
        _check_vars((self.left, self.right))


@dataclass(frozen=True)
class NotEqual(Formula):
    left: str
    right: str

    def __post_init__(self):
        _check_vars((self.left, self.right))


@dataclass(frozen=True)
class TensorOr(Formula):
    """Splitting disjunction: the team divides into two covering parts."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Exists(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        _check_vars((self.var,))


@dataclass(frozen=True)
class Forall(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        _check_vars((self.var,))


@dataclass(frozen=True)
class ClassicalOr(Formula):
    """Whole-team disjunction: either disjunct holds on the full team."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class ContraNeg(Formula):
    """Contradictory negation: holds exactly when the operand fails."""

    body: Formula


@dataclass(frozen=True)
class IntImpl(Formula):
    """Intuitionistic implication, quantifying over all subteams."""

    left: Formula
    right: Formula


@dataclass(frozen=True)
class Possibly(Formula):
    """Holds when some nonempty subteam satisfies the operand."""

    body: Formula


@dataclass(frozen=True)
class Bracket(Formula):
    """Model-level truth of a first-order sentence, even on the empty team."""

    body: Formula

    def __post_init__(self):
        if not is_first_order(self.body):
            raise ValueError("bracket body must be first-order")
        fv = free_variables(self.body)
        if fv:
            raise ValueError(
                f"bracket body must be a sentence; free variables {sorted(fv)}"
            )


@dataclass(frozen=True)
class Atom(Formula):
    """A dependency atom: built-in kind or a registered custom notion.

    ``parts`` holds the ``;``-separated argument tuples, ``param`` the
    numeric parameter of geq/count kinds, ``name`` the custom atom name.
    """

    kind: str
    parts: tuple[tuple[str, ...], ...] = ()
    param: int | None = None
    name: str | None = None

    def __post_init__(self):
        if self.kind == "custom":
            if not self.name or not _VARIABLE_NAME.match(self.name):
                raise ValueError(f"bad custom atom name {self.name!r}")
            if len(self.parts) != 1:
                raise ValueError("custom atoms take a single argument tuple")
            _check_vars(self.parts[0])
            if self.param is not None:
                raise ValueError("custom atoms take no numeric parameter")
            return
        if self.name is not None:
            raise ValueError("only custom atoms carry a name")
        if self.kind not in _ATOM_SHAPES:
            raise ValueError(f"unknown atom kind {self.kind!r}")
        groups, takes_param = _ATOM_SHAPES[self.kind]
        if len(self.parts) != groups:
            raise ValueError(
                f"{self.kind} expects {groups} argument group(s), got {len(self.parts)}"
            )
        for part in self.parts:
            if not part:
                raise ValueError(f"{self.kind} argument tuples must be non-empty")
            _check_vars(part)
        if takes_param:
            if self.param is None or self.param < 0:
                raise ValueError(f"{self.kind} needs a parameter >= 0")
        elif self.param is not None:
            raise ValueError(f"{self.kind} takes no numeric parameter")
        if self.kind in ("inc", "ninc") and len(self.parts[0]) != len(self.parts[1]):
            raise ValueError(f"{self.kind} sides must have equal length")
        if self.kind in _SINGLE_VAR_KINDS and len(self.parts[0]) != 1:
            raise ValueError(f"{self.kind} takes a single variable")


def _check_relation(name: str):
    if not _RELATION_NAME.match(name) or name in _RESERVED_RELATIONS:
        raise ValueError(f"bad relation name {name!r}")


def _check_vars(names: Iterable[str]):
    for v in names:
        if not _VARIABLE_NAME.match(v) or v in _KEYWORDS:
            raise ValueError(f"bad variable name {v!r}")


#: the standard truth/falsity abbreviations
TOP = Forall("v", Equal("v", "v"))
BOT = Exists("v", NotEqual("v", "v"))

NE = Atom("ne")


def and_all(formulas: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; empty input yields T."""
    out = None
    for f in formulas:
        out = f if out is None else And(out, f)
    return TOP if out is None else out


def or_all(formulas: Iterable[Formula]) -> Formula:
    """Left-nested splitting disjunction; empty input yields bot."""
    out = None
    for f in formulas:
        out = f if out is None else TensorOr(out, f)
    return BOT if out is None else out


def tuple_equal(left: tuple[str, ...], right: tuple[str, ...]) -> Formula:
    """Componentwise tuple equality as a conjunction of equalities."""
    if len(left) != len(right):
        raise ValueError("tuple lengths differ")
    return and_all(Equal(a, b) for a, b in zip(left, right))


def tuple_not_equal(left: tuple[str, ...], right: tuple[str, ...]) -> Formula:
    """Componentwise tuple inequality as a disjunction of inequalities."""
    if len(left) != len(right):
        raise ValueError("tuple lengths differ")
    return or_all(NotEqual(a, b) for a, b in zip(left, right))


@lru_cache(maxsize=None)
def free_variables(f: Formula) -> frozenset[str]:
    match f:
        case PositiveLiteral(_, args) | NegativeLiteral(_, args):
            return frozenset(args)
        case Equal(a, b) | NotEqual(a, b):
            return frozenset((a, b))
        case TensorOr(l, r) | And(l, r) | ClassicalOr(l, r) | IntImpl(l, r):
            return free_variables(l) | free_variables(r)
        case Exists(v, body) | Forall(v, body):
            return free_variables(body) - {v}
        case ContraNeg(body) | Possibly(body):
            return free_variables(body)
        case Bracket():
            return frozenset()
        case Atom(_, parts):
            return frozenset(v for part in parts for v in part)
    raise TypeError(f"not a formula: {f!r}")


@lru_cache(maxsize=None)
def is_first_order(f: Formula) -> bool:
    """True when f uses only literals, &, |, exists, forall."""
    match f:
        case PositiveLiteral() | NegativeLiteral() | Equal() | NotEqual():
            return True
        case TensorOr(l, r) | And(l, r):
            return is_first_order(l) and is_first_order(r)
        case Exists(_, body) | Forall(_, body):
            return is_first_order(body)
        case _:
            return False


@lru_cache(maxsize=None)
def relation_arities(f: Formula) -> frozenset[tuple[str, int]]:
    """All (relation, arity) pairs occurring in literals of f."""
    match f:
        case PositiveLiteral(rel, args) | NegativeLiteral(rel, args):
            return frozenset({(rel, len(args))})
        case TensorOr(l, r) | And(l, r) | ClassicalOr(l, r) | IntImpl(l, r):
            return relation_arities(l) | relation_arities(r)
        case Exists(_, body) | Forall(_, body) | ContraNeg(body) | Possibly(body) | Bracket(body):
            return relation_arities(body)
        case _:
            return frozenset()


def fresh_variable(avoid: Iterable[str]) -> str:
    """Deterministically pick an identifier outside the avoid set."""
    taken = set(avoid)
    i = 1
    while f"v{i}" in taken:
        i += 1
    return f"v{i}"


def fresh_tuple(prefix: str, count: int, avoid: Iterable[str]) -> tuple[str, ...]:
    """Deterministic sequence prefix1, prefix2, ... skipping the avoid set."""
    taken = set(avoid)
    out = []
    i = 1
    while len(out) < count:
        name = f"{prefix}{i}"
        if name not in taken:
            out.append(name)
            taken.add(name)
        i += 1
    return tuple(out)


# ---------------------------------------------------------------------------
# tokenizer


_TOKEN_RE = re.compile(
    r"""(?P<WS>\s+)
      | (?P<CUSTOM>D:[a-z][a-zA-Z0-9_]*)
      | (?P<RELNAME>[A-Z][a-zA-Z0-9_]*)
      | (?P<IDENT>[a-z][a-zA-Z0-9_]*)
      | (?P<NUMBER>\d+)
      | (?P<ARROW>->)
      | (?P<OROR>\|\|)
      | (?P<NEQ>!=)
      | (?P<DIAMOND><>)
      | (?P<SYM>[&|~()\[\];,=!])
    """,
    re.VERBOSE,
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "WS":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("EOF", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, tokens, signature: Signature):
        self.tokens = tokens
        self.signature = signature
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, text: str):
        kind, value, pos = self.peek()
        if value != text:
            raise ParseError(f"expected {text!r}, found {value or 'end of input'!r}", pos)
        return self.take()

    def at(self, text: str) -> bool:
        return self.peek()[1] == text

    def parse(self) -> Formula:
        f = self.formula()
        kind, value, pos = self.peek()
        if kind != "EOF":
            raise ParseError(f"trailing input {value!r}", pos)
        return f

    # precedence climbing, loosest first
    def formula(self) -> Formula:
        left = self.classical_or()
        if self.at("->"):
            self.take()
            return IntImpl(left, self.formula())
        return left

    def classical_or(self) -> Formula:
        left = self.tensor_or()
        while self.at("||"):
            self.take()
            left = ClassicalOr(left, self.tensor_or())
        return left

    def tensor_or(self) -> Formula:
        left = self.conjunction()
        while self.at("|"):
            self.take()
            left = TensorOr(left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.at("&"):
            self.take()
            left = And(left, self.unary())
        return left

    def unary(self) -> Formula:
        kind, value, pos = self.peek()
        if value == "~":
            self.take()
            return ContraNeg(self.unary())
        if value == "<>":
            self.take()
            return Possibly(self.unary())
        if kind == "IDENT" and value in ("exists", "forall"):
            self.take()
            var = self.variable()
            body = self.unary()
            return Exists(var, body) if value == "exists" else Forall(var, body)
        return self.primary()

    def variable(self) -> str:
        kind, value, pos = self.take()
        if kind != "IDENT" or value in _KEYWORDS:
            raise ParseError(f"expected a variable, found {value!r}", pos)
        return value

    def primary(self) -> Formula:
        kind, value, pos = self.peek()
        if value == "(":
            self.take()
            f = self.formula()
            self.expect(")")
            return f
        if value == "[":
            self.take()
            body = self.formula()
            self.expect("]")
            try:
                return Bracket(body)
            except ValueError as exc:
                raise ParseError(str(exc), pos) from None
        if value == "!":
            self.take()
            kind2, value2, pos2 = self.peek()
            if kind2 != "RELNAME":
                raise ParseError("'!' applies only to relation literals", pos2)
            return self.literal(negative=True)
        if kind == "CUSTOM":
            self.take()
            name = value[2:]
            args = self.atom_groups(pos)
            if len(args) != 1:
                raise ParseError("custom atoms take a single argument tuple", pos)
            vars_, nums = args[0]
            if nums:
                raise ParseError("custom atoms take no numeric parameter", pos)
            return Atom("custom", (tuple(vars_),), name=name)
        if kind == "RELNAME":
            if value == "T":
                self.take()
                return TOP
            if value == "NE":
                self.take()
                return NE
            return self.literal(negative=False)
        if kind == "IDENT":
            if value == "bot":
                self.take()
                return BOT
            if value in _ATOM_KEYWORDS:
                self.take()
                return self.dependency_atom(value, pos)
            return self.equality()
        raise ParseError(f"unexpected {value or 'end of input'!r}", pos)

    def literal(self, negative: bool) -> Formula:
        kind, name, pos = self.take()
        if name not in self.signature:
            raise ParseError(f"unknown relation {name!r}", pos)
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.variable())
            while self.at(","):
                self.take()
                args.append(self.variable())
        self.expect(")")
        want = self.signature.arity(name)
        if len(args) != want:
            raise ParseError(
                f"relation {name} has arity {want}, got {len(args)} argument(s)", pos
            )
        cls = NegativeLiteral if negative else PositiveLiteral
        return cls(name, tuple(args))

    def equality(self) -> Formula:
        left = self.variable()
        kind, value, pos = self.take()
        if value == "=":
            return Equal(left, self.variable())
        if value == "!=":
            return NotEqual(left, self.variable())
        raise ParseError(f"expected '=' or '!=' after variable, found {value!r}", pos)

    def atom_groups(self, pos) -> list[tuple[list[str], list[int]]]:
        """Parse '(' groups ')' where groups are ';'-separated variable/number
        lists with ',' or juxtaposition between items."""
        self.expect("(")
        groups: list[tuple[list[str], list[int]]] = []
        vars_: list[str] = []
        nums: list[int] = []
        while True:
            kind, value, p = self.peek()
            if value == ")":
                self.take()
                groups.append((vars_, nums))
                return groups
            if value == ";":
                self.take()
                groups.append((vars_, nums))
                vars_, nums = [], []
                continue
            if value == ",":
                self.take()
                continue
            if kind == "NUMBER":
                self.take()
                nums.append(int(value))
                continue
            if kind == "IDENT" and value not in _KEYWORDS:
                self.take()
                vars_.append(value)
                continue
            raise ParseError(f"unexpected {value!r} in atom arguments", p)

    def dependency_atom(self, kw: str, pos: int) -> Formula:
        groups = self.atom_groups(pos)
        want_groups, takes_param = _ATOM_SHAPES[kw]
        param = None
        if takes_param:
            vars_, nums = groups[-1]
            if len(nums) != 1:
                raise ParseError(f"{kw} needs one numeric parameter", pos)
            param = nums[0]
            groups[-1] = (vars_, [])
        for vars_, nums in groups:
            if nums:
                raise ParseError(f"unexpected number in {kw} arguments", pos)
        if len(groups) != want_groups:
            raise ParseError(
                f"{kw} expects {want_groups} argument group(s), got {len(groups)}", pos
            )
        try:
            return Atom(kw, tuple(tuple(vars_) for vars_, _ in groups), param=param)
        except ValueError as exc:
            raise ParseError(str(exc), pos) from None


def parse(text: str, signature: Signature = EMPTY_SIGNATURE) -> Formula:
    """Parse a formula in the concrete grammar against a signature."""
    return _Parser(_tokenize(text), signature).parse()


# ---------------------------------------------------------------------------
# pretty-printer

_BINARY = {IntImpl: (1, " -> "), ClassicalOr: (2, " || "), TensorOr: (3, " | "),
           And: (4, " & ")}

#: constructs that print without surrounding parentheses after a quantifier
#: or prefix operator (self-delimiting or unary-level)
_BARE_UNDER_PREFIX = (Exists, Forall, ContraNeg, Possibly, Bracket,
                      PositiveLiteral, NegativeLiteral, Atom)


def pretty(f: Formula) -> str:
    """Render a formula; parse(pretty(f)) is structurally equal to f."""
    return _pp(f, 0)


def _pp(f: Formula, ctx: int) -> str:
    cls = type(f)
    if cls in _BINARY:
        level, sep = _BINARY[cls]
        if cls is IntImpl:  # right associative
            s = _pp(f.left, level + 1) + sep + _pp(f.right, level)
        else:
            s = _pp(f.left, level) + sep + _pp(f.right, level + 1)
        return f"({s})" if level < ctx else s
    return _pp_prefix(f)


def _pp_prefix(f: Formula) -> str:
    match f:
        case Exists(v, body) | Forall(v, body):
            q = "exists" if isinstance(f, Exists) else "forall"
            return f"{q} {v} {_pp_operand(body)}"
        case ContraNeg(body):
            return f"~{_pp_operand(body)}"
        case Possibly(body):
            return f"<>{_pp_operand(body)}"
        case Bracket(body):
            return f"[{_pp(body, 0)}]"
        case PositiveLiteral(rel, args):
            return f"{rel}({', '.join(args)})"
        case NegativeLiteral(rel, args):
            return f"!{rel}({', '.join(args)})"
        case Equal(a, b):
            return f"{a} = {b}"
        case NotEqual(a, b):
            return f"{a} != {b}"
        case Atom():
            return _pp_atom(f)
    raise TypeError(f"not a formula: {f!r}")


def _pp_operand(body: Formula) -> str:
    if isinstance(body, _BARE_UNDER_PREFIX):
        return _pp_prefix(body)
    return f"({_pp(body, 0)})"


def _pp_atom(a: Atom) -> str:
    if a.kind == "ne":
        return "NE"
    groups = ["" if not part else " ".join(part) for part in a.parts]
    inner = "; ".join(groups)
    if a.param is not None:
        inner = f"{inner}, {a.param}" if inner else str(a.param)
    head = f"D:{a.name}" if a.kind == "custom" else a.kind
    return f"{head}({inner})"
