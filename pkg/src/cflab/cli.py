"""cf-lab: command-line front end.

Every command loads one system (a catalog name or a DSL file), runs one
analysis and prints an aligned text report; ``--json PATH`` also writes the
machine report (``-`` for stdout).  Exit status: 0 on success, 2 when a
check's verdict fails, 1 on errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys as _sys
from fractions import Fraction
from typing import Callable

from . import catalog
from .bratteli import equivalence_oracle, export
from .certified import CertifiedValue, frac_str
from .dsl import DSLError, build, parse_system, print_system
from .dynamics import (a_n, abelian_window_sums, bound_check_rank_k, bound_check_rank_one, offset_count_identity,
                       per_shift_table, wre_ratio_rank_k, wre_ratio_rank_one)
from .errors import CFError
from .finite_rank import (CylinderK, RankKSystem, balanced_diagnostics, castle_view, check_ae_action_k,
                          check_finiteness_k, cylinder_measure_k, r_matrix, solve_invariant_measure,
                          spacer_data, telescope_k, validate_rank_k)
from .groups import GroupSet, as_element, fmt_element
from .rank_one import (Cylinder, RankOneSystem, check_ae_action, check_full_action, convolution_window_counts,
                       large_holes_check, measure, return_expansions, telescope, thin, total_measure_trend,
                       validate)
from .rigidity import (co_condition, co_relaxed_condition, co_rigidity_times, exactness_check,
                       find_rigidity_time, nondegeneracy_check, partial_rigidity_estimate, quasi_exact_params)

EXIT_OK, EXIT_ERROR, EXIT_FAILED = 0, 1, 2


# -- reports -----------------------------------------------------------------

def jsonable(x):
    """Rationals become "p/q" strings, intervals keep both endpoints."""
    if isinstance(x, CertifiedValue):
        return {"lo": frac_str(x.lo), "hi": frac_str(x.hi), "approx": [float(x.lo), float(x.hi)]}
    if isinstance(x, Fraction):
        return frac_str(x)
    if hasattr(x, "to_json"):
        return jsonable(x.to_json())
    if isinstance(x, dict):
        return {str(k) if not isinstance(k, tuple) else fmt_element(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, GroupSet):
        return [fmt_element(p) for p in x.sorted()]
    return x


class Report:
    def __init__(self, command: str, inputs: dict):
        self.command = command
        self.inputs = inputs
        self.results: dict = {}
        self.verdicts: dict[str, bool] = {}
        self.provenance: dict = {}

    def add(self, key: str, value) -> None:
        self.results[key] = value

    def verdict(self, key: str, ok: bool) -> None:
        self.verdicts[key] = bool(ok)

    @property
    def failed(self) -> bool:
        return not all(self.verdicts.values())

    def to_json(self) -> dict:
        return {"command": self.command, "inputs": jsonable(self.inputs), "results": jsonable(self.results),
                "verdicts": self.verdicts, "provenance": jsonable(self.provenance)}

    def to_text(self) -> str:
        rows = [("command", self.command)]
        rows += [(f"input.{k}", _human(v)) for k, v in self.inputs.items() if v is not None]
        rows += [(k, _human(v)) for k, v in self.results.items()]
        rows += [(f"verdict.{k}", "PASS" if v else "FAIL") for k, v in self.verdicts.items()]
        rows += [(f"provenance.{k}", _human(v)) for k, v in self.provenance.items()]
        width = max(len(k) for k, _ in rows)
        return "\n".join(f"{k.ljust(width)}  {v}" for k, v in rows) + "\n"


def _human(v) -> str:
    if isinstance(v, (CertifiedValue, Fraction)):
        return str(v) if isinstance(v, CertifiedValue) else f"{frac_str(v)} (~{float(v):.6g})"
    if isinstance(v, (str, int, float, bool)) or v is None:
        return str(v)
    return json.dumps(jsonable(v), separators=(",", ":"))


# -- argument helpers ------------------------------------------------------

def parse_element(text: str, dim: int):
    parts = text.split("/")
    if len(parts) != dim:
        raise ValueError(f"element {text!r} needs {dim} coordinate(s) separated by '/'")
    return as_element(tuple(int(p) for p in parts), dim)


def parse_cells(text: str, dim: int, whole: GroupSet | None) -> list:
    """Colon-separated cells; ``a..b`` is the half-open range over Z; ``all`` is the whole shape."""
    if text == "all":
        if whole is None:
            raise ValueError("'all' needs a known shape")
        return whole.sorted()
    out = []
    for chunk in text.split(":"):
        if ".." in chunk:
            if dim != 1:
                raise ValueError("ranges a..b need dim 1")
            a, b = chunk.split("..")
            out.extend((x,) for x in range(int(a), int(b)))
        else:
            out.append(parse_element(chunk, dim))
    return out


def parse_cylinder(text: str, system):
    """``level=L,cells=...`` for rank one; ``level=L,tower=j,cells=...[,tower=i,cells=...]`` for rank k."""
    level, tower, parts = None, 1, {}
    for field_ in text.split(","):
        if "=" not in field_:
            raise ValueError(f"bad cylinder field {field_!r}; use key=value")
        k, v = field_.split("=", 1)
        k = k.strip()
        if k == "level":
            level = int(v)
        elif k == "tower":
            tower = int(v)
        elif k == "cells":
            if level is None:
                raise ValueError("give level= before cells=")
            whole = system.F(level) if isinstance(system, RankOneSystem) else system.F(level, tower)
            parts.setdefault(tower, []).extend(parse_cells(v, system.dim, whole))
        else:
            raise ValueError(f"unknown cylinder field {k!r}")
    if level is None or not parts:
        raise ValueError("cylinder needs level= and cells=")
    if isinstance(system, RankOneSystem):
        if set(parts) != {1}:
            raise ValueError("rank-one cylinders have a single tower")
        return Cylinder.of(level, parts[1], system.dim)
    return CylinderK.of(level, parts, system.dim)


def parse_int_list(text: str) -> list[int]:
    out = []
    for chunk in text.split(":"):
        if ".." in chunk:
            a, b = chunk.split("..")
            out.extend(range(int(a), int(b)))
        else:
            out.append(int(chunk))
    return out


def load_system(args):
    name = args.system
    params = {}
    for p in args.param or []:
        k, v = p.split("=", 1)
        params[k] = int(v)
    if args.horizon is not None:
        params["horizon"] = args.horizon
    if os.path.exists(name):
        with open(name, encoding="utf-8") as fh:
            desc = parse_system(fh.read())
        if desc.catalog:
            base = dict(desc.params)
            base.update(params)
            return catalog.get(desc.catalog, **base)
        if args.horizon is not None:
            from dataclasses import replace
            desc = replace(desc, horizon=args.horizon)
        return build(desc)
    return catalog.get(name, **params)


def _is_k(system) -> bool:
    return isinstance(system, RankKSystem)


# -- commands ------------------------------------------------------------------

COMMANDS: dict[str, tuple[Callable, Callable, str]] = {}


def command(name: str, help_: str):
    def deco(fn):
        COMMANDS[name] = (fn, getattr(fn, "_args", lambda p: None), help_)
        return fn
    return deco


def arguments(setup: Callable):
    def deco(fn):
        fn._args = setup
        return fn
    return deco


@command("catalog", "list built-in systems")
def cmd_catalog(args, rep: Report, system) -> None:
    rep.add("systems", catalog.names())


@command("parse", "parse a DSL file and print its canonical form")
@arguments(lambda p: p.add_argument("file"))
def cmd_parse(args, rep: Report, system) -> None:
    with open(args.file, encoding="utf-8") as fh:
        desc = parse_system(fh.read())
    rep.add("canonical", print_system(desc).strip())
    built = build(desc)
    rep.add("horizon", built.horizon)
    rep.verdict("valid", True)


@command("validate", "check the structural conditions level by level")
def cmd_validate(args, rep: Report, system) -> None:
    report = validate_rank_k(system) if _is_k(system) else validate(system)
    fails = [r for r in report.results if not r.ok]
    rep.add("checked", len(report.results))
    rep.add("failures", [r.to_json() for r in fails])
    if report.notes:
        rep.add("notes", report.notes)
    rep.verdict("conditions", report.ok)


@command("measure", "measure of a cylinder")
@arguments(lambda p: p.add_argument("--A", required=True))
def cmd_measure(args, rep: Report, system) -> None:
    A = parse_cylinder(args.A, system)
    if _is_k(system):
        rep.add("measure", cylinder_measure_k(system, solve_invariant_measure(system), A))
    else:
        rep.add("measure", measure(system, A))


@command("trend", "total-measure trend and finiteness verdict")
def cmd_trend(args, rep: Report, system) -> None:
    if _is_k(system):
        out = check_finiteness_k(system, solve_invariant_measure(system))
    else:
        out = total_measure_trend(system)
    rep.add("values", out.values)
    rep.add("verdict", out.verdict)


@command("action", "full and almost-everywhere action checks for a group element g")
@arguments(lambda p: (p.add_argument("--g", default="1"), p.add_argument("--n", type=int, default=0)))
def cmd_action(args, rep: Report, system) -> None:
    g = parse_element(args.g, system.dim)
    if _is_k(system):
        rep.add("ae", check_ae_action_k(system, solve_invariant_measure(system), g, args.n))
    else:
        rep.add("full", check_full_action(system, g))
        rep.add("ae", check_ae_action(system, g, args.n))


@command("expansions", "return-time expansion of g between cells a and b")
@arguments(lambda p: (p.add_argument("--g", required=True), p.add_argument("--a", default="0"),
                      p.add_argument("--b", default="0"), p.add_argument("--n", type=int, default=0),
                      p.add_argument("--depth", type=int, required=True)))
def cmd_expansions(args, rep: Report, system) -> None:
    d = system.dim
    exps, value = return_expansions(system, parse_element(args.g, d), parse_element(args.a, d),
                                    parse_element(args.b, d), args.n, args.depth)
    rep.add("terms", [{"level": e.level, "c": [fmt_element(x) for x in e.c], "d": [fmt_element(x) for x in e.d]}
                      for e in exps])
    rep.add("value", value)
    rep.provenance["depth"] = args.depth


@command("thin", "thin the offset sets along generators")
@arguments(lambda p: p.add_argument("--generators", required=True, help="colon-separated elements"))
def cmd_thin(args, rep: Report, system) -> None:
    gens = [parse_element(x, system.dim) for x in args.generators.split(":")]
    out = thin(system, gens)
    rep.add("densities", out.densities)
    rep.add("below_threshold", out.below_threshold)
    if out.note:
        rep.add("note", out.note)


@command("large-holes", "large-holes condition for g at each level")
@arguments(lambda p: (p.add_argument("--g", default=None), p.add_argument("--n", type=int, default=None)))
def cmd_large_holes(args, rep: Report, system) -> None:
    d = system.dim
    gens = [parse_element(args.g, d)] if args.g else [tuple(int(i == j) for i in range(d)) for j in range(d)]
    levels = [args.n] if args.n is not None else range(system.horizon)
    table, ok = [], True
    for g in gens:
        for n in levels:
            good, w = large_holes_check(system, g, n)
            ok &= good
            table.append({"g": fmt_element(g), "n": n, "ok": good, "witness": fmt_element(w) if w else None})
    rep.add("table", table)
    rep.verdict("large_holes", ok)


@command("convolution", "pair counts of the summed offsets against F_n - F_n + h")
@arguments(lambda p: (p.add_argument("--l", type=int, required=True), p.add_argument("--n", type=int, required=True),
                      p.add_argument("--L", type=int, required=True), p.add_argument("--shifts", default="-1..2", help="list a:b or half-open range a..b")))
def cmd_convolution(args, rep: Report, system) -> None:
    shifts = [parse_element(x, system.dim) for x in args.shifts.split(":")] if system.dim > 1 \
        else [(h,) for h in parse_int_list(args.shifts)]
    rep.add("counts", convolution_window_counts(system, args.l, args.n, args.L, shifts))


@command("telescope", "merge stages at the given cut points")
@arguments(lambda p: p.add_argument("--cuts", required=True, help="colon-separated, starting at 0"))
def cmd_telescope(args, rep: Report, system) -> None:
    cuts = parse_int_list(args.cuts)
    out = telescope_k(system, cuts) if _is_k(system) else telescope(system, cuts)
    rep.add("horizon", out.horizon)
    if _is_k(out):
        rep.add("r_matrices", [r_matrix(out, n) for n in range(1, out.horizon + 1)])
    else:
        rep.add("offset_counts", [len(out.C(n)) for n in range(1, out.horizon + 1)])


@command("solve", "invariant measure of a finite-rank system with its uniqueness certificate")
@arguments(lambda p: p.add_argument("--tolerance", type=float, default=1e-9))
def cmd_solve(args, rep: Report, system) -> None:
    system = system if _is_k(system) else system.as_rank_k()
    sol = solve_invariant_measure(system, args.tolerance)
    rep.add("lambda_0", [sol.lam(0, i) for i in system.marks])
    rep.add("contraction", sol.contraction)
    rep.add("verdict", sol.verdict)
    rep.verdict("certified", sol.verdict == "certified")
    rep.provenance["tolerance"] = args.tolerance


@command("castle", "tower placements and spacer gaps over Z")
def cmd_castle(args, rep: Report, system) -> None:
    system = system if _is_k(system) else system.as_rank_k()
    rep.add("castle", castle_view(system))


@command("spacers", "base-copy positions and spacer roofs at stage n")
@arguments(lambda p: p.add_argument("--n", type=int, required=True))
def cmd_spacers(args, rep: Report, system) -> None:
    system = system if _is_k(system) else system.as_rank_k()
    rep.add("spacers", spacer_data(system, args.n))


@command("balance", "balanced finite-rank diagnostics")
def cmd_balance(args, rep: Report, system) -> None:
    system = system if _is_k(system) else system.as_rank_k()
    out = balanced_diagnostics(system, solve_invariant_measure(system))
    rep.add("report", out)
    rep.verdict("balanced", out.balanced)


@command("correlate", "per-shift correlations mu(A & T^-k B) as CSV")
@arguments(lambda p: (p.add_argument("--A", required=True), p.add_argument("--B", required=True),
                      p.add_argument("--shifts", default="0..8", help="list a:b or half-open range a..b"), p.add_argument("--depth", type=int, required=True),
                      p.add_argument("--csv", default="-", help="CSV path, '-' for stdout")))
def cmd_correlate(args, rep: Report, system) -> None:
    A, B = parse_cylinder(args.A, system), parse_cylinder(args.B, system)
    rows = per_shift_table(system, A, B, parse_int_list(args.shifts), args.depth)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["k", "lo", "hi", "lo_approx", "hi_approx"])
    for k, v in rows:
        w.writerow([k, frac_str(v.lo), frac_str(v.hi), f"{float(v.lo):.12g}", f"{float(v.hi):.12g}"])
    if args.csv == "-":
        rep.csv_text = buf.getvalue()
    else:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write(buf.getvalue())
    rep.add("per_shift", {k: v for k, v in rows})
    rep.provenance["depth"] = args.depth


def _wre_args(p):
    p.add_argument("--A", required=True)
    p.add_argument("--B", required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--depth", type=int, default=None, help="default 3l + 3")


@command("wre", "normalized correlation sum over F_l - F_l against mu(A) mu(B)")
@arguments(_wre_args)
def cmd_wre(args, rep: Report, system) -> None:
    A, B = parse_cylinder(args.A, system), parse_cylinder(args.B, system)
    depth = args.depth if args.depth is not None else 3 * args.l + 3
    out = wre_ratio_rank_k(system, A, B, args.l, depth) if _is_k(system) \
        else wre_ratio_rank_one(system, A, B, args.l, depth)
    rep.add("ratio", out.ratio)
    rep.add("target", out.target)
    rep.add("relative_error", out.relative_error())
    rep.add("width", out.ratio.width if out.ratio is not None else None)
    if out.notes:
        rep.add("notes", out.notes)
    rep.provenance["depth"] = depth


@command("bound", "certified upper bound check for the normalized correlation sum")
@arguments(_wre_args)
def cmd_bound(args, rep: Report, system) -> None:
    A, B = parse_cylinder(args.A, system), parse_cylinder(args.B, system)
    depth = args.depth if args.depth is not None else 3 * args.l + 3
    out = bound_check_rank_k(system, A, B, args.l, depth) if _is_k(system) \
        else bound_check_rank_one(system, A, B, args.l, depth)
    rep.add("ratio", out.ratio)
    rep.add("bound", out.bound)
    rep.verdict("bound", out.passed)
    rep.provenance["depth"] = depth


@command("an", "normalizing sequence a_n(Y) over a window of shifts")
@arguments(lambda p: (p.add_argument("--Y", required=True), p.add_argument("--window", required=True),
                      p.add_argument("--depth", type=int, required=True)))
def cmd_an(args, rep: Report, system) -> None:
    Y = parse_cylinder(args.Y, system)
    window = GroupSet.of_ints(parse_int_list(args.window))
    rep.add("a_n", a_n(system, Y, window, args.depth))
    rep.provenance["depth"] = args.depth


@command("abelian", "Z^d window sums over F_n - F_n and the offset-count identity")
@arguments(lambda p: (p.add_argument("--A", default=None), p.add_argument("--B", default=None),
                      p.add_argument("--n", type=int, required=True), p.add_argument("--depth", type=int,
                                                                                   required=True)))
def cmd_abelian(args, rep: Report, system) -> None:
    if args.A and args.B:
        out = abelian_window_sums(system, parse_cylinder(args.A, system), parse_cylinder(args.B, system),
                                  args.n, args.depth)
        rep.add("sum", out.numerator)
        if out.notes:
            rep.add("notes", out.notes)
    ok, den, expected = offset_count_identity(system, args.n, args.depth)
    rep.add("denominator", den)
    rep.add("offset_count", expected)
    rep.verdict("identity", ok)
    rep.provenance["depth"] = args.depth


@command("exactness", "exact finite rank check")
def cmd_exactness(args, rep: Report, system) -> None:
    out = exactness_check(system)
    rep.add("report", out)
    rep.verdict("exact", out.exact)


@command("quasi-exact", "spacer-run bound and tower-mass bound")
def cmd_quasi_exact(args, rep: Report, system) -> None:
    out = quasi_exact_params(system)
    rep.add("report", out)
    rep.verdict("quasi_exact", out.quasi_exact)


@command("co", "consecutive-ordering condition and its relaxed form")
def cmd_co(args, rep: Report, system) -> None:
    out = co_condition(system)
    rep.add("first_failure", out.first_failure())
    rep.add("relaxed", co_relaxed_condition(system))
    rep.verdict("co", out.ok)


@command("nondegeneracy", "no tower appears exactly once inside another")
def cmd_nondegeneracy(args, rep: Report, system) -> None:
    out = nondegeneracy_check(system)
    rep.add("first_failure", out.first_failure())
    rep.verdict("nondegenerate", out.ok)


@command("rigidity", "rigidity time m_n with its certified ratio")
@arguments(lambda p: (p.add_argument("--n", type=int, required=True),
                      p.add_argument("--depth", type=int, default=None, help="default n + 2")))
def cmd_rigidity(args, rep: Report, system) -> None:
    out = find_rigidity_time(system, args.n, args.depth)
    rep.add("m_n", out.time)
    rep.add("ratio", out.ratio)
    rep.add("guarantee", out.guarantee)
    rep.add("finding", out)
    rep.verdict("guarantee", out.meets_guarantee)
    rep.provenance["depth"] = out.depth


@command("co-rigidity", "heaviest-tower heights as rigidity times")
@arguments(lambda p: (p.add_argument("--l", type=int, default=0),
                      p.add_argument("--stages", default=None, help="colon-separated")))
def cmd_co_rigidity(args, rep: Report, system) -> None:
    stages = parse_int_list(args.stages) if args.stages else None
    rep.add("stages", co_rigidity_times(system, args.l, stages))


@command("partial-rigidity", "estimate of the partial-rigidity constant along given times")
@arguments(lambda p: (p.add_argument("--times", required=True, help="colon-separated"),
                      p.add_argument("--l", type=int, default=0), p.add_argument("--depth", type=int, required=True)))
def cmd_partial_rigidity(args, rep: Report, system) -> None:
    out = partial_rigidity_estimate(system, parse_int_list(args.times), args.l, args.depth)
    rep.add("eta", out.eta)
    rep.add("table", out.table)
    rep.provenance["depth"] = args.depth


@command("bratteli", "export the ordered Bratteli diagram (JSON or DOT)")
@arguments(lambda p: (p.add_argument("--format", choices=("json", "dot"), default="json"),
                      p.add_argument("--out", default="-")))
def cmd_bratteli(args, rep: Report, system) -> None:
    diag = export(system)
    text = diag.to_dot() if args.format == "dot" else diag.dumps() + "\n"
    if args.out == "-":
        rep.raw_text = text
    else:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
        rep.add("written", args.out)
    rep.add("levels", len(diag.levels))


@command("oracle", "check the Vershik successor against the shift on every castle level")
@arguments(lambda p: p.add_argument("--depth", type=int, default=6))
def cmd_oracle(args, rep: Report, system) -> None:
    out = equivalence_oracle(system, args.depth)
    rep.add("checked", out.checked)
    if out.counterexample:
        rep.add("counterexample", out.counterexample)
    rep.verdict("oracle", out.passed)
    rep.provenance["depth"] = args.depth


NO_SYSTEM = {"catalog", "parse"}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cf-lab", description="Exact experiments with (C,F)-constructions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, setup, help_) in COMMANDS.items():
        p = sub.add_parser(name, help=help_)
        if name not in NO_SYSTEM:
            p.add_argument("--system", required=True, help="catalog name or DSL file")
            p.add_argument("--horizon", type=int, default=None)
            p.add_argument("--param", action="append", help="catalog parameter key=value")
        p.add_argument("--json", default=None, help="write the JSON report here ('-' for stdout)")
        setup(p)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    fn = COMMANDS[args.command][0]
    inputs = {k: v for k, v in vars(args).items() if k not in ("command", "json")}
    rep = Report(args.command, inputs)
    try:
        system = None if args.command in NO_SYSTEM else load_system(args)
        if system is not None:
            rep.provenance["system"] = system.name
            rep.provenance["horizon"] = system.horizon
        fn(args, rep, system)
    except (CFError, DSLError, KeyError, ValueError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"cf-lab {args.command}: error: {msg}", file=_sys.stderr)
        return EXIT_ERROR
    raw = getattr(rep, "raw_text", None) or getattr(rep, "csv_text", None)
    if raw is not None:
        _sys.stdout.write(raw)
    elif args.json != "-":
        _sys.stdout.write(rep.to_text())
    if args.json:
        text = json.dumps(rep.to_json(), indent=1)
        if args.json == "-":
            _sys.stdout.write(text + "\n")
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                fh.write(text + "\n")
    return EXIT_FAILED if rep.failed else EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
