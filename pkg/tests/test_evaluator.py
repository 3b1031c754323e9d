"""Lax evaluator semantics: rule-level checks, the naive-evaluator
cross-check, flatness, locality, and the dependency registry."""

import random
from itertools import combinations, product

import pytest

import teamsem as ts
from corpus import FO_CORPUS, all_teams
from naive import naive_eval


def team(vs, *rows):
    return ts.Team(vs, rows)


SENTENCE_TEAM = ts.Team((), [()])


# ---------------------------------------------------------------------------
# direct rule checks


def test_bot_and_top():
    m = ts.Model(2)
    assert ts.evaluate(m, ts.Team(("x",)), ts.BOT)
    assert not ts.evaluate(m, team(("x",), (0,)), ts.BOT)
    assert ts.evaluate(m, ts.Team(("x",)), ts.TOP)
    assert ts.evaluate(m, team(("x",), (0,), (1,)), ts.TOP)


def test_dep_atom():
    m = ts.Model(2)
    f = ts.parse("dep(x; y)")
    assert not ts.evaluate(m, team(("x", "y"), (0, 0), (0, 1)), f)
    assert ts.evaluate(m, team(("x", "y"), (0, 0), (1, 1)), f)
    assert ts.evaluate(m, ts.Team(("x", "y")), f)


def test_all_atom():
    m = ts.Model(3)
    f = ts.parse("all(x)")
    assert ts.evaluate(m, team(("x",), (0,), (1,), (2,)), f)
    assert not ts.evaluate(m, team(("x",), (0,), (1,)), f)


def test_infinity_sentence_false_on_finite_models():
    f = ts.parse("exists x forall y exists z (dep(z; y) & z != x)")
    for n in range(1, 5):
        assert not ts.evaluate(ts.Model(n), SENTENCE_TEAM, f)


def test_custom_matches_builtin_constancy():
    sig = ts.Signature({"R": 1})
    spec = ts.DependencySpec(
        "uconst", 1,
        ts.parse("forall x forall y (!R(x) | !R(y) | x = y)", sig))
    reg = ts.EMPTY_REGISTRY.register(spec)
    f = ts.parse("D:uconst(x)")
    g = ts.parse("const(x)")
    for n in (1, 2, 3):
        m = ts.Model(n)
        for t in ts.enumerate_teams(m, ("x", "y")):
            assert ts.evaluate(m, t, f, reg) == ts.evaluate(m, t, g, reg)


def test_register_binary_functional_notion():
    """A binary notion whose relation pairs each value with at most one
    partner, usable as D:sub(x, y).  Defining sentences are in negation
    normal form, so material implication is spelled with ! and |."""
    sig = ts.Signature({"R": 2})
    spec = ts.DependencySpec(
        "sub", 2,
        ts.parse("forall x forall y (!R(x, y) | x = y)", sig))
    reg = ts.EMPTY_REGISTRY.register(spec)
    f = ts.parse("D:sub(x, y)")
    m = ts.Model(2)
    assert ts.evaluate(m, team(("x", "y"), (0, 0), (1, 1)), f, reg)
    assert not ts.evaluate(m, team(("x", "y"), (0, 1)), f, reg)
    with pytest.raises(ValueError):
        ts.DependencySpec("bad", 2, ts.parse("forall x (R(x, x) -> x = x)", sig))


def test_zeroary_custom_ignores_team():
    spec = ts.DependencySpec("big", 0, ts.parse("exists x exists y (x != y)"))
    reg = ts.EMPTY_REGISTRY.register(spec)
    f = ts.parse("D:big()")
    for n, expected in ((1, False), (2, True), (3, True)):
        m = ts.Model(n)
        assert ts.evaluate(m, ts.Team(("x",)), f, reg) is expected
        assert ts.evaluate(m, team(("x",), (0,)), f, reg) is expected
        assert ts.evaluate(m, SENTENCE_TEAM, f, reg) is expected


def test_bracket_vs_plain_sentence_on_empty_team():
    m = ts.Model(2)
    sentence = ts.parse("exists v1 exists v2 (v1 != v2)")
    empty = ts.Team(("x",))
    # a plain first-order sentence is vacuously satisfied by the empty team,
    # the bracketed form consults the model
    assert ts.evaluate(m, empty, sentence)
    assert ts.evaluate(m, empty, ts.parse("[exists v1 exists v2 (v1 != v2)]"))
    assert not ts.evaluate(ts.Model(1), empty,
                           ts.parse("[exists v1 exists v2 (v1 != v2)]"))


def test_registry_errors():
    with pytest.raises(ts.EvalError):
        ts.evaluate(ts.Model(2), SENTENCE_TEAM, ts.parse("D:nosuch()"))
    spec = ts.DependencySpec("mine", 0, ts.TOP)
    reg = ts.EMPTY_REGISTRY.register(spec)
    with pytest.raises(ValueError):
        reg.register(spec)  # duplicate
    with pytest.raises(ValueError):
        ts.DependencySpec("dep", 1, ts.TOP)  # reserved name
    with pytest.raises(ValueError):
        ts.DependencySpec("bad", 1, ts.NE)  # not first-order
    with pytest.raises(ValueError):
        ts.DependencySpec("bad", 1, ts.parse("x = x"))  # free variable
    sig = ts.Signature({"R": 2})
    with pytest.raises(ValueError):
        ts.DependencySpec("bad", 1, ts.parse("exists x R(x, x)", sig))
    with pytest.raises(ts.EvalError):
        # arity mismatch at use site
        reg2 = ts.EMPTY_REGISTRY.register(ts.DependencySpec(
            "un", 1, ts.parse("exists x R(x)", ts.Signature({"R": 1}))))
        ts.evaluate(ts.Model(2), team(("x", "y"), (0, 0)),
                    ts.parse("D:un(x, y)"), reg2)


def test_variable_outside_domain():
    with pytest.raises(ts.EvalError):
        ts.evaluate(ts.Model(2), ts.Team(("x",)), ts.parse("x = y"))


# ---------------------------------------------------------------------------
# spec'd semantic properties


def test_flatness_on_corpus():
    """First-order satisfaction reduces to pointwise Tarski satisfaction."""
    for sig, text in FO_CORPUS[:12]:
        f = ts.parse(text, sig)
        for size in (1, 2):
            for m in ts.enumerate_models(sig, size):
                for t in ts.enumerate_teams(m, ("x", "y")):
                    got = ts.evaluate(m, t, f)
                    want = all(ts.tarski_eval(m, s, f) for s in t.assignments())
                    assert got == want, (text, size, sorted(t.rows))


def test_dual_negation_pointwise():
    for sig, text in FO_CORPUS[:12]:
        f = ts.parse(text, sig)
        neg = ts.dual_negate(f)
        for size in (1, 2):
            for m in ts.enumerate_models(sig, size):
                for t in ts.enumerate_teams(m, ("x", "y")):
                    got = ts.evaluate(m, t, neg)
                    want = all(not ts.tarski_eval(m, s, f)
                               for s in t.assignments())
                    assert got == want, (text, size, sorted(t.rows))


def test_locality_dummy_column():
    """Adding an unrelated column never changes satisfaction."""
    m = ts.Model(2)
    formulas = [ts.parse(s) for s in (
        "dep(x; y)", "NE", "all(x)", "NE | x = y", "exists z (z != x)",
        "~const(x)", "count_eq(x, 1)", "NE || const(y)")]
    for f in formulas:
        for t in all_teams(m, ("x", "y")):
            padded = ts.Team(
                ("x", "y", "u"),
                [row + (extra,) for row in sorted(t.rows)
                 for extra in range(m.size)])
            assert ts.evaluate(m, t, f) == ts.evaluate(m, padded, f)


EMPTY_TEAM_SATISFIED = [
    "const(x)", "const(x y)", "dep(x; y)", "inc(x; y)", "ind(x; y; y)",
    "geq(x, 0)", "count_eq(x, 0)", "count_neq(x, 1)",
    "x = y", "x != y", "exists z (z = x)", "forall z (z != x)", "T", "bot",
]
EMPTY_TEAM_REJECTED = [
    "NE", "ncon(x)", "ndep(x; y)", "ninc(x; y)", "nind(x; y; y)",
    "all(x)", "geq(x, 1)", "count_eq(x, 1)", "count_neq(x, 0)",
]


def test_empty_team_atom_table():
    m = ts.Model(2)
    empty = ts.Team(("x", "y"))
    for text in EMPTY_TEAM_SATISFIED:
        assert ts.evaluate(m, empty, ts.parse(text)), text
    for text in EMPTY_TEAM_REJECTED:
        assert not ts.evaluate(m, empty, ts.parse(text)), text
    # the complement-counting atoms depend on the model size:
    assert ts.evaluate(m, empty, ts.parse("cocount_eq(x, 2)"))
    assert not ts.evaluate(m, empty, ts.parse("cocount_eq(x, 1)"))
    assert ts.evaluate(m, empty, ts.parse("cocount_neq(x, 0)"))
    assert not ts.evaluate(m, empty, ts.parse("cocount_neq(x, 2)"))


def test_possibly_matches_satisfying_subteams():
    m = ts.Model(2)
    for text in ("x = y", "NE & x = y", "all(x)", "dep(x; y)", "count_eq(x, 2)"):
        f = ts.parse(text)
        g = ts.Possibly(f)
        for t in all_teams(m, ("x", "y")):
            subs = ts.satisfying_subteams(m, t, f)
            assert ts.evaluate(m, t, g) == any(
                not s.is_empty() for s in subs), (text, sorted(t.rows))


def test_satisfying_subteams_examples():
    m = ts.Model(2)
    t = team(("x", "y"), (0, 0), (0, 1), (1, 0))
    # first-order: exactly the subteams of the pointwise restriction
    f = ts.parse("x = y")
    expected = set()
    good = sorted(ts.restrict(m, t, f).rows)
    for k in range(len(good) + 1):
        for combo in combinations(good, k):
            expected.add(t.with_rows(combo))
    assert ts.satisfying_subteams(m, t, f) == expected
    # NE: every non-empty subteam
    subs = ts.satisfying_subteams(m, t, ts.NE)
    assert subs == {s for s in _all_subteams(t) if not s.is_empty()}
    # bot: only the empty team
    assert ts.satisfying_subteams(m, t, ts.BOT) == {t.with_rows(())}


def _all_subteams(t):
    rows = sorted(t.rows)
    return {t.with_rows(c) for k in range(len(rows) + 1)
            for c in combinations(rows, k)}


# ---------------------------------------------------------------------------
# cross-checks against the literal evaluator


CROSS_TEXTS = [
    "x = y", "NE", "const(x)", "dep(x; y)", "inc(x; y)", "ninc(x; y)",
    "ind(x; y; y)", "nind(x; y; y)", "all(x)", "geq(x, 2)", "ncon(x)",
    "ndep(x; y)", "count_eq(x, 1)", "cocount_neq(x, 0)",
    "NE | x = y", "dep(x; y) | x = y", "NE | NE", "all(x) | all(y)",
    "count_eq(x, 1) | count_eq(y, 1)", "inc(x; y) | inc(y; x)",
    "NE || const(x)", "~NE", "~(x = y)", "~dep(x; y)",
    "const(x) -> const(y)", "NE -> ncon(x)", "<>all(x)", "<>(x = y & NE)",
    "exists z (dep(z; y) & z != x)", "exists z (all(z) | const(z))",
    "exists z ((NE & z = x) | z != y)", "forall z ((z = x & NE) | z != x)",
    "exists z (count_eq(z, 2))", "exists z (inc(z; x) & z != y)",
    "forall z <>(z = x)", "~(exists z (NE & z = x))",
    "exists z (dep(z; x) & ~(z = y))", "[exists v1 (v1 = v1)] & NE",
]


def test_cross_check_against_naive_evaluator():
    formulas = [ts.parse(s) for s in CROSS_TEXTS]
    for size in (1, 2):
        m = ts.Model(size)
        for f in formulas:
            vs = tuple(sorted(ts.free_variables(f) | {"x", "y"}))
            for t in all_teams(m, vs, max_rows=3):
                assert ts.evaluate(m, t, f) == naive_eval(m, t, f), \
                    (str(f), size, sorted(t.rows))


def test_existential_choice_function_agreement():
    """The witness-search implementation of the lax existential agrees with
    direct choice-function enumeration."""
    bodies = [
        "dep(z; y) & z != x", "const(z) & z != x", "all(z)", "NE & z = x",
        "(NE & z = x) | z != y", "count_eq(z, 1)", "inc(z; x)",
        "z = x | z = y", "ncon(z) & dep(z; x)",
    ]
    for size in (1, 2):
        m = ts.Model(size)
        for text in bodies:
            f = ts.Exists("z", ts.parse(text))
            for t in all_teams(m, ("x", "y"), max_rows=3):
                assert ts.evaluate(m, t, f) == naive_eval(m, t, f), \
                    (text, size, sorted(t.rows))


def test_random_formula_cross_check():
    from test_syntax import _random_formula

    rng = random.Random(77)
    sig = ts.Signature({"R": 2, "P": 1})
    spec = ts.DependencySpec(
        "mine", 1, ts.parse("exists x R(x)", ts.Signature({"R": 1})),
        claimed_upward_closed="yes")
    reg = ts.EMPTY_REGISTRY.register(spec)
    checked = 0
    while checked < 60:
        f = _random_formula(rng, rng.randrange(3))
        m = next(iter(ts.enumerate_models(sig, rng.choice((1, 2)))))
        interp = {
            "P": {(i,) for i in range(m.size) if rng.random() < 0.5},
            "R": {(i, j) for i in range(m.size) for j in range(m.size)
                  if rng.random() < 0.4},
        }
        m = ts.Model(m.size, interp, sig)
        vs = tuple(sorted(ts.free_variables(f) | {"x"}))
        rows = list(product(range(m.size), repeat=len(vs)))
        chosen = [r for r in rows if rng.random() < 0.6][:3]
        t = ts.Team(vs, chosen)
        assert ts.evaluate(m, t, f, reg) == naive_eval(m, t, f, reg), \
            (str(f), m, sorted(t.rows))
        checked += 1


def _naive_cost(f, rows, n):
    """Upper bound on the literal evaluator's work; used to skip shapes the
    oracle cannot afford at domain size 3."""
    match f:
        case ts.Exists(_, b):
            return (2 ** n - 1) ** max(rows, 1) * _naive_cost(b, min(rows * n, 9), n)
        case ts.Forall(_, b):
            return _naive_cost(b, min(rows * n, 9), n)
        case ts.TensorOr(l, r) | ts.IntImpl(l, r):
            return 4 ** rows * (_naive_cost(l, rows, n) + _naive_cost(r, rows, n))
        case ts.Possibly(b):
            return 2 ** rows * _naive_cost(b, rows, n)
        case ts.And(l, r) | ts.ClassicalOr(l, r):
            return _naive_cost(l, rows, n) + _naive_cost(r, rows, n)
        case ts.ContraNeg(b):
            return _naive_cost(b, rows, n)
        case _:
            return max(rows, 1) ** 2


def test_soak_cross_check_larger_domains():
    """Seeded random soak at domain sizes up to 3 with the full atom zoo,
    including quantifier shadowing and registered custom notions."""
    from test_syntax import _random_formula

    rng = random.Random(424242)
    sig = ts.Signature({"R": 2, "P": 1})
    reg = (ts.EMPTY_REGISTRY
           .register(ts.DependencySpec(
               "mine", 1, ts.parse("exists x R(x)", ts.Signature({"R": 1})),
               claimed_upward_closed="yes")))
    checked = skipped = 0
    while checked < 1500:
        f = _random_formula(rng, rng.choice((1, 1, 2, 2, 3)))
        size = rng.choice((1, 2, 2, 3))
        interp = {
            "P": {(i,) for i in range(size) if rng.random() < 0.5},
            "R": {(i, j) for i in range(size) for j in range(size)
                  if rng.random() < 0.4},
        }
        m = ts.Model(size, interp, sig)
        vs = tuple(sorted(ts.free_variables(f) | {rng.choice(("x", "y", "z"))}))
        rows = list(product(range(size), repeat=len(vs)))
        cap = 3 if size == 3 else 4
        chosen = rng.sample(rows, k=min(len(rows), rng.randrange(0, cap + 1)))
        if _naive_cost(f, len(chosen), size) > 300_000:
            skipped += 1
            continue
        t = ts.Team(vs, chosen)
        assert ts.evaluate(m, t, f, reg) == naive_eval(m, t, f, reg), \
            (str(f), size, sorted(interp["P"]), sorted(interp["R"]),
             sorted(t.rows))
        checked += 1


# ---------------------------------------------------------------------------
# upward-closure checking


def test_check_upward_closed():
    sig = ts.Signature({"R": 1})
    total = ts.DependencySpec("tot", 1, ts.parse("forall x R(x)", sig))
    assert ts.check_upward_closed(total, 3).holds
    ne_like = ts.DependencySpec("some", 1, ts.parse("exists x R(x)", sig))
    assert ts.check_upward_closed(ne_like, 3).holds
    constancy = ts.DependencySpec(
        "uconst", 1, ts.parse("forall x forall y (!R(x) | !R(y) | x = y)", sig))
    verdict = ts.check_upward_closed(constancy, 3)
    assert not verdict.holds
    n, r, s = verdict.counterexample
    assert r < s  # proper growth breaks constancy
    with pytest.raises(ValueError):
        ts.check_upward_closed(ts.DependencySpec("z", 0, ts.TOP), 2)
    binary = ts.DependencySpec(
        "pairs", 2, ts.parse("exists x R(x, x)", ts.Signature({"R": 2})))
    assert ts.check_upward_closed(binary, 3).holds
    with pytest.raises(ts.EnumerationLimit):
        ts.check_upward_closed(binary, 4)
