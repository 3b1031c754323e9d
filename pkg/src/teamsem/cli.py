"""Command-line front end: eval, parse, transform, equiv, bounds.

Exit codes: 0 for true/equivalent/all-hold, 1 for false/counterexample/
violation, 2 for any usage, parse, or evaluation error.  Formulas are
single shell arguments; ``@path`` reads one from a file.
"""

from __future__ import annotations

import argparse
import re
import sys

from . import analysis, transforms
from .evaluator import EMPTY_REGISTRY, DependencySpec, EvalError, Registry, evaluate
from .structures import (
    EnumerationLimit,
    Model,
    Team,
    enumerate_models,
    enumerate_teams,
    model_to_text,
    parse_model_text,
    parse_team_text,
    restrict,
    tarski_eval,
    team_to_text,
)
from .syntax import (
    And,
    Atom,
    Bracket,
    Formula,
    ParseError,
    Signature,
    free_variables,
    parse,
    pretty,
)
from .transforms import TransformError, UnaryDepDescription


class CliError(Exception):
    pass


def _read_formula_arg(arg: str) -> str:
    if arg.startswith("@"):
        with open(arg[1:], "r", encoding="utf-8") as fh:
            return fh.read()
    return arg


def _signature(rel_args: list[str] | None) -> Signature:
    rels = {}
    for item in rel_args or []:
        m = re.fullmatch(r"([A-Z][a-zA-Z0-9_]*):(\d+)", item)
        if not m:
            raise CliError(f"bad --rel {item!r}; expected NAME:ARITY")
        rels[m.group(1)] = int(m.group(2))
    return Signature(rels)


def _registry(dep_args: list[str] | None) -> Registry:
    reg = EMPTY_REGISTRY
    for item in dep_args or []:
        m = re.fullmatch(r"([a-z][a-zA-Z0-9_]*)=(\d+):(.*)", item, re.DOTALL)
        if not m:
            raise CliError(f"bad --dep {item!r}; expected name=ARITY:SENTENCE")
        name, arity, text = m.group(1), int(m.group(2)), m.group(3)
        dsig = Signature({"R": arity}) if arity > 0 else Signature()
        spec = DependencySpec(name, arity, parse(text, dsig))
        reg = reg.register(spec)
    return reg


def _gamma(gamma_args: list[str] | None) -> analysis.GammaTable:
    overrides = {}
    for item in gamma_args or []:
        m = re.fullmatch(r"([a-zA-Z_][a-zA-Z0-9_]*)=(n(\d+)|const:(\d+)|lin:(\d+))",
                         item)
        if not m:
            raise CliError(
                f"bad --gamma {item!r}; expected NAME=nK or NAME=const:C or NAME=lin:C"
            )
        name = m.group(1)
        if m.group(3) is not None:
            overrides[name] = ("pow", int(m.group(3)))
        elif m.group(4) is not None:
            overrides[name] = ("const", int(m.group(4)))
        else:
            overrides[name] = ("lin", int(m.group(5)))
    return analysis.GammaTable(overrides)


def _sentence_team() -> Team:
    return Team((), [()])


def cmd_eval(args) -> int:
    sig = _signature(args.rel)
    reg = _registry(args.dep)
    formula = parse(_read_formula_arg(args.formula), sig)
    with open(args.model, "r", encoding="utf-8") as fh:
        model = parse_model_text(fh.read(), sig)
    if args.team:
        with open(args.team, "r", encoding="utf-8") as fh:
            team = parse_team_text(fh.read())
    else:
        if free_variables(formula):
            raise CliError("formula has free variables; give --team")
        team = _sentence_team()
    result = evaluate(model, team, formula, reg)
    print("true" if result else "false")
    return 0 if result else 1


def cmd_parse(args) -> int:
    sig = _signature(args.rel)
    formula = parse(_read_formula_arg(args.formula), sig)
    rendered = pretty(formula)
    if parse(rendered, sig) != formula:
        print("round-trip failed", file=sys.stderr)
        return 2
    print(rendered)
    return 0


_TRANSFORMS = ("flatten", "dualneg", "restrict", "dnf", "negelim", "depdef",
               "nedef", "countdef", "compile-unary", "brackets")


def _split_tuple(text: str) -> tuple[str, ...]:
    parts = tuple(x for x in re.split(r"[,\s]+", text.strip()) if x)
    if not parts:
        raise CliError("empty variable tuple")
    return parts


def _run_transform(args, sig: Signature) -> tuple[Formula | None, list[str], dict]:
    """Returns (input formula or None, printable output lines, verify info)."""
    name = args.name
    arg = list(args.args)

    def take_formula() -> Formula:
        if not arg:
            raise CliError(f"{name} needs a formula argument")
        return parse(_read_formula_arg(arg.pop(0)), sig)

    if name == "flatten":
        f = take_formula()
        out = transforms.flatten(f)
        return f, [pretty(out)], {"kind": "flatten", "out": out}
    if name == "dualneg":
        f = take_formula()
        out = transforms.dual_negate(f)
        return f, [pretty(out)], {"kind": "dualneg", "out": out}
    if name == "restrict":
        f = take_formula()
        theta = take_formula()
        out = transforms.restrict_formula(f, theta)
        return f, [pretty(out)], {"kind": "restrict", "out": out, "theta": theta}
    if name == "dnf":
        f = take_formula()
        parts = transforms.to_classical_dnf(f)
        joined = transforms.classical_or_all(parts)
        return f, [pretty(p) for p in parts], {"kind": "equiv", "out": joined}
    if name == "negelim":
        f = take_formula()
        out = transforms.neg_eliminate(f)
        return f, [pretty(out)], {"kind": "equiv", "out": out}
    if name == "depdef":
        if len(arg) < 2:
            raise CliError("depdef needs two variable tuples, e.g. depdef x y")
        vs = _split_tuple(arg.pop(0))
        ws = _split_tuple(arg.pop(0))
        out = transforms.dep_via_neg_const(vs, ws)
        target = parse(f"dep({' '.join(vs)}; {' '.join(ws)})", sig)
        return target, [pretty(out)], {"kind": "equiv", "out": out}
    if name == "nedef":
        out = transforms.ne_via_totality()
        target = parse("NE", sig)
        return target, [pretty(out)], {"kind": "equiv", "out": out}
    if name == "countdef":
        if len(arg) < 3:
            raise CliError("countdef needs KIND K VAR, e.g. countdef eq 1 v")
        kind, k, v = arg.pop(0), int(arg.pop(0)), arg.pop(0)
        if kind in ("le", "ge", "co_le", "co_ge"):
            out = transforms.counting_formula(kind, k, v)
            return None, [pretty(out)], {"kind": "count", "out": out,
                                         "count": (kind, k, v)}
        atom_kinds = {"eq": "count_eq", "neq": "count_neq",
                      "co_eq": "cocount_eq", "co_neq": "cocount_neq"}
        if kind not in atom_kinds:
            raise CliError(
                "countdef kinds: le ge co_le co_ge eq neq co_eq co_neq")
        out = transforms.counting_atom_definition(kind, k, v)
        target = parse(f"{atom_kinds[kind]}({v}, {k})", sig)
        return target, [pretty(out)], {"kind": "equiv-nonempty", "out": out}
    if name == "compile-unary":
        if len(arg) < 2:
            raise CliError("compile-unary needs DESCRIPTION VAR")
        desc = UnaryDepDescription.parse(arg.pop(0))
        v = arg.pop(0)
        out = transforms.compile_unary_dependency(desc, v)
        return None, [pretty(out)], {"kind": "unary", "out": out,
                                     "desc": desc, "var": v}
    if name == "brackets":
        f = take_formula()
        sentences, core = transforms.extract_brackets(f)
        lines = [f"[{pretty(s)}]" for s in sentences] + [pretty(core)]
        joined = core
        for s in reversed(sentences):
            joined = And(Bracket(s), joined)
        return f, lines, {"kind": "equiv", "out": joined}
    raise CliError(f"unknown transform {name!r}; choose from {', '.join(_TRANSFORMS)}")


def _verify_transform(source: Formula | None, info: dict, args,
                      sig: Signature, reg: Registry) -> int:
    """Oracle-check a transform output; prints the verdict, returns exit code."""
    max_model = args.verify
    team_filter = "nonempty" if args.nonempty_teams else "all"
    kind = info["kind"]
    out = info["out"]

    if kind == "count":
        ckind, k, v = info["count"]
        report = _verify_counting(ckind, k, v, out, max_model)
    elif kind == "unary":
        report = _verify_unary(info["desc"], info["var"], out, max_model)
    elif kind in ("equiv", "equiv-nonempty", "flatten", "dualneg", "restrict"):
        if kind == "equiv-nonempty":
            team_filter = "nonempty"
        variables = sorted(free_variables(source) | free_variables(out))
        if kind == "flatten":
            report = _verify_implication(source, out, variables, sig, reg, max_model)
        elif kind == "dualneg":
            report = _verify_dualneg(source, out, variables, sig, max_model)
        elif kind == "restrict":
            report = _verify_restrict(source, info["theta"], out, variables,
                                      sig, reg, max_model)
        else:
            report = analysis.equivalent(source, out, variables, sig,
                                         max_model, team_filter, reg)
    else:
        raise CliError(f"no verification defined for {kind}")

    if report.equivalent:
        print(f"verified ({report.team_filter} teams, |M|<={max_model})")
        return 0
    print(report.to_text(), end="")
    return 1


def _verify_counting(kind, k, v, out, max_model) -> analysis.EquivReport:
    for size in range(1, max_model + 1):
        model = Model(size)
        for team in enumerate_teams(model, (v,)):
            if team.is_empty():
                continue
            count = len(team.project_rows((v,)))
            expected = {"le": count <= k, "ge": count >= k,
                        "co_le": size - count <= k, "co_ge": size - count >= k}[kind]
            if evaluate(model, team, out) != expected:
                return analysis.EquivReport(False, max_model, "nonempty",
                                            model, team, expected)
    return analysis.EquivReport(True, max_model, "nonempty")


def _verify_unary(desc, v, out, max_model) -> analysis.EquivReport:
    sentence = transforms.unary_description_sentence(desc)
    reg = EMPTY_REGISTRY.register(DependencySpec("target", 1, sentence))
    atom = Atom("custom", ((v,),), name="target")
    return analysis.equivalent(atom, out, (v,), Signature(), max_model,
                               "nonempty", reg)


def _verify_implication(source, out, variables, sig, reg,
                        max_model) -> analysis.EquivReport:
    for size in range(1, max_model + 1):
        for model in enumerate_models(sig, size):
            for team in enumerate_teams(model, variables):
                if evaluate(model, team, source, reg) and not evaluate(
                        model, team, out, reg):
                    return analysis.EquivReport(False, max_model, "all",
                                                model, team, True)
    return analysis.EquivReport(True, max_model, "all")


def _verify_dualneg(source, out, variables, sig, max_model) -> analysis.EquivReport:
    for size in range(1, max_model + 1):
        for model in enumerate_models(sig, size):
            for team in enumerate_teams(model, variables):
                got = evaluate(model, team, out)
                want = all(not tarski_eval(model, s, source)
                           for s in team.assignments())
                if got != want:
                    return analysis.EquivReport(False, max_model, "all",
                                                model, team, want)
    return analysis.EquivReport(True, max_model, "all")


def _verify_restrict(source, theta, out, variables, sig, reg,
                     max_model) -> analysis.EquivReport:
    for size in range(1, max_model + 1):
        for model in enumerate_models(sig, size):
            for team in enumerate_teams(model, variables):
                got = evaluate(model, team, out, reg)
                want = evaluate(model, restrict(model, team, theta), source, reg)
                if got != want:
                    return analysis.EquivReport(False, max_model, "all",
                                                model, team, want)
    return analysis.EquivReport(True, max_model, "all")


def cmd_transform(args) -> int:
    sig = _signature(args.rel)
    reg = _registry(args.dep)
    source, lines, info = _run_transform(args, sig)
    for line in lines:
        print(line)
    if args.verify:
        return _verify_transform(source, info, args, sig, reg)
    return 0


def cmd_equiv(args) -> int:
    sig = _signature(args.rel)
    reg = _registry(args.dep)
    f = parse(_read_formula_arg(args.left), sig)
    g = parse(_read_formula_arg(args.right), sig)
    variables = _split_tuple(args.vars) if args.vars else sorted(
        free_variables(f) | free_variables(g))
    report = analysis.equivalent(
        f, g, variables, sig, args.max_model,
        "nonempty" if args.nonempty_teams else "all", reg)
    print(report.to_text(), end="")
    if not report.equivalent and args.out:
        with open(args.out + ".model", "w", encoding="utf-8") as fh:
            fh.write(model_to_text(report.counter_model))
        with open(args.out + ".team", "w", encoding="utf-8") as fh:
            fh.write(team_to_text(report.counter_team))
    return 0 if report.equivalent else 1


def cmd_bounds(args) -> int:
    if args.mode == "check":
        sig = _signature(args.rel)
        reg = _registry(args.dep)
        gamma = _gamma(args.gamma)
        f = parse(_read_formula_arg(args.formula), sig)
        reports = analysis.check_boundedness(f, args.max_model, gamma, reg)
        for size in range(1, args.max_model + 1):
            nu = analysis.nu_bound(f, size, gamma, reg)
            print(f"nu(|M|={size}) = {nu}")
        bad = [r for r in reports if not r.holds]
        for r in bad:
            print(r)
        print(f"checked {len(reports)} satisfying team(s): "
              + ("all hold" if not bad else f"{len(bad)} violation(s)"))
        return 0 if not bad else 1
    if args.mode == "hierarchy":
        report = analysis.hierarchy_witness(args.wide, args.narrow, args.q)
        print(report)
        return 0 if report.exceeds else 1
    raise CliError(f"unknown bounds mode {args.mode!r}")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--rel", action="append", metavar="NAME:ARITY",
                   help="declare a relation (repeatable)")
    p.add_argument("--dep", action="append", metavar="name=ARITY:SENTENCE",
                   help="register a custom dependency notion (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="teamsem",
        description="evaluate, transform, and brute-force-compare formulas "
                    "under lax team semantics on finite models",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval", help="evaluate a formula on a model and team")
    p.add_argument("formula")
    p.add_argument("--model", required=True)
    p.add_argument("--team", help="team file; omitted: the one-empty-assignment team")
    _add_common(p)
    p.set_defaults(fn=cmd_eval)

    p = sub.add_parser("parse", help="parse a formula and print it back")
    p.add_argument("formula")
    _add_common(p)
    p.set_defaults(fn=cmd_parse)

    p = sub.add_parser("transform", help="run a formula rewriter")
    p.add_argument("name", choices=_TRANSFORMS)
    p.add_argument("args", nargs="*")
    p.add_argument("--verify", type=int, metavar="N",
                   help="oracle-check the output on models up to size N")
    p.add_argument("--nonempty-teams", action="store_true")
    _add_common(p)
    p.set_defaults(fn=cmd_transform)

    p = sub.add_parser("equiv", help="exhaustively compare two formulas")
    p.add_argument("left")
    p.add_argument("right")
    p.add_argument("--vars", help="comma-separated team variables")
    p.add_argument("--max-model", type=int, default=3)
    p.add_argument("--nonempty-teams", action="store_true")
    p.add_argument("--out", metavar="PREFIX",
                   help="write counterexample PREFIX.model / PREFIX.team")
    _add_common(p)
    p.set_defaults(fn=cmd_equiv)

    p = sub.add_parser("bounds", help="witness-size bounds and the arity hierarchy")
    bsub = p.add_subparsers(dest="mode", required=True)
    pc = bsub.add_parser("check", help="verify the witness bound by sweep")
    pc.add_argument("formula")
    pc.add_argument("--max-model", type=int, default=2)
    pc.add_argument("--gamma", action="append", metavar="NAME=nK|const:C|lin:C")
    _add_common(pc)
    pc.set_defaults(fn=cmd_bounds, mode="check")
    ph = bsub.add_parser("hierarchy", help="build the totality separation witness")
    ph.add_argument("wide", type=int)
    ph.add_argument("narrow", type=int)
    ph.add_argument("q", type=int)
    ph.set_defaults(fn=cmd_bounds, mode="hierarchy")

    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, ParseError, TransformError, analysis.AnalysisError,
            EvalError, EnumerationLimit, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
