"""``rcmkit`` command line.

Exit codes: 0 for success or "separated", 1 for "connected" or validation
violations, 2 for usage, parse and domain errors. Every verdict line starts
with a fixed keyword (``separated``, ``connected``, ``ok``, ``invalid``,
``intersectable``, ``not-intersectable``, ``co-intersectable``,
``not-co-intersectable``) so scripts can grep it.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path as FsPath
from typing import Sequence

from . import agg as agg_mod
from . import fixtures as fixtures_mod
from .dsep import agg_d_separated, relational_dsep_oracle
from .errors import RcmError
from .io import dump_json, load_model, load_query, skeleton_to_dict
from .rcm import validate_model
from .schema import format_path, intersectable, llrsp, parse_path, reverse

EXIT_OK, EXIT_CONNECTED, EXIT_USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 already; keep the message terse
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _default_workers() -> int:
    raw = os.environ.get("RCMKIT_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="rcmkit", description="Relational causal models and abstract ground graphs.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("validate", help="check a model file")
    v.add_argument("model")

    a = sub.add_parser("agg", help="abstract ground graph commands")
    asub = a.add_subparsers(dest="agg_command", required=True, parser_class=_Parser)
    ab = asub.add_parser("build", help="build and export an AGG")
    ab.add_argument("model")
    ab.add_argument("--perspective", required=True)
    ab.add_argument("--hops", type=_positive, required=True)
    ab.add_argument("--variant", choices=[x.value for x in agg_mod.Variant], default="revised")
    ab.add_argument("--format", choices=["json", "dot"], default=None, help="default: from --out suffix, else json")
    ab.add_argument("--out", help="write here instead of stdout")

    d = sub.add_parser("dsep", help="relational d-separation on the AGG")
    d.add_argument("model")
    d.add_argument("query")
    d.add_argument("--hops", type=_positive, required=True)
    d.add_argument("--variant", choices=[x.value for x in agg_mod.Variant], default="revised")

    o = sub.add_parser("oracle", help="check a query on every skeleton within a size bound")
    o.add_argument("model")
    o.add_argument("query")
    o.add_argument("--max-items", type=_positive, required=True)
    o.add_argument("--workers", type=_positive, default=None)

    i = sub.add_parser("intersect", help="intersectability of two paths")
    i.add_argument("model")
    i.add_argument("--paths", nargs=2, required=True, metavar=("P", "Q"))

    c = sub.add_parser("cointersect", help="co-intersectability of <q, r, p, p'>")
    c.add_argument("model")
    c.add_argument("--tuple", nargs=4, required=True, metavar=("Q", "R", "P", "P2"), dest="paths")

    f = sub.add_parser("fixtures", help="worked examples")
    fsub = f.add_subparsers(dest="fixtures_command", required=True, parser_class=_Parser)
    fr = fsub.add_parser("run", help="replay fixture expectations")
    fr.add_argument("name", choices=sorted(fixtures_mod.REGISTRY) + ["all"])
    fe = fsub.add_parser("export", help="write a fixture's model and query files")
    fe.add_argument("name", choices=sorted(fixtures_mod.REGISTRY))
    fe.add_argument("directory")
    return p


def _path_arg(text: str):
    return parse_path(text.replace(",", " ").split() if "[" not in text else text)


def _cmd_validate(args) -> int:
    model = load_model(args.model)
    problems = validate_model(model)
    if problems:
        print(f"invalid: {len(problems)} violation(s)")
        for msg in problems:
            print(f"  - {msg}")
        return EXIT_CONNECTED
    print(f"ok: {len(model.dependencies)} dependencies")
    return EXIT_OK


def _cmd_agg_build(args) -> int:
    model = load_model(args.model)
    g = agg_mod.build_agg(model, args.perspective, args.hops, args.variant)
    fmt = args.format or ("dot" if args.out and args.out.endswith(".dot") else "json")
    text = agg_mod.to_dot(g) if fmt == "dot" else agg_mod.to_json(g) + "\n"
    if args.out:
        FsPath(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}: {len(g.rvs)} RVs, {len(g.ivs)} IVs, {len(g.rves)} RVEs, {len(g.ives)} IVEs")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_dsep(args) -> int:
    model = load_model(args.model)
    query = load_query(args.query)
    g = agg_mod.build_agg(model, query.perspective, args.hops, args.variant)
    if agg_d_separated(g, query):
        print(f"separated (AGG {query.perspective}, hops {args.hops}, {args.variant})")
        return EXIT_OK
    print(f"connected (AGG {query.perspective}, hops {args.hops}, {args.variant})")
    return EXIT_CONNECTED


def _cmd_oracle(args) -> int:
    model = load_model(args.model)
    query = load_query(args.query)
    workers = args.workers or _default_workers()
    verdict = relational_dsep_oracle(model, query, args.max_items, workers=workers)
    print(verdict.summary())
    if verdict.separated_within_bound:
        print("note: a bounded search; larger skeletons are not covered")
        return EXIT_OK
    w = verdict.witness
    print("trail: " + " -> ".join(f"{i}.{a}" for i, a in w.trail))
    print(dump_json(skeleton_to_dict(w.skeleton)))
    return EXIT_CONNECTED


def _cmd_intersect(args) -> int:
    model = load_model(args.model)
    p, q = (_path_arg(x) for x in args.paths)
    schema = model.schema
    verdict = intersectable(schema, p, q)
    if p[0] == q[0] and p[-1] == q[-1]:
        m, n = llrsp(schema, p, q), llrsp(schema, reverse(p), reverse(q))
        print(f"llrsp: forward {m}, backward {n}, min length {min(len(p), len(q))}")
    print(("intersectable" if verdict else "not-intersectable") + f": {format_path(p)} and {format_path(q)}")
    return EXIT_OK


def _cmd_cointersect(args) -> int:
    model = load_model(args.model)
    q, r, p, p2 = (_path_arg(x) for x in args.paths)
    wit = agg_mod.co_intersectable_witness(model.schema, q, r, p, p2)
    if wit is None:
        print("not-co-intersectable: no witness skeleton")
        return EXIT_OK
    print("co-intersectable: witness skeleton follows")
    print(f"base {wit.item(0, 0)}, q-terminal {wit.item(0, -1)}, shared item {wit.item(2, -1)}")
    print(dump_json(skeleton_to_dict(wit.skeleton)))
    return EXIT_OK


def _cmd_fixtures_run(args) -> int:
    names = sorted(fixtures_mod.REGISTRY) if args.name == "all" else [args.name]
    failed = 0
    for name in names:
        fx = fixtures_mod.get(name)
        print(f"== {name}")
        for outcome in fixtures_mod.replay(fx):
            print(outcome.line())
            failed += not outcome.passed
        if fx.caveat:
            print(f"note: {fx.caveat}")
    return EXIT_CONNECTED if failed else EXIT_OK


def _cmd_fixtures_export(args) -> int:
    for path in fixtures_mod.export_fixture(fixtures_mod.get(args.name), args.directory):
        print(f"wrote {path}")
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "validate": _cmd_validate,
        "dsep": _cmd_dsep,
        "oracle": _cmd_oracle,
        "intersect": _cmd_intersect,
        "cointersect": _cmd_cointersect,
    }
    try:
        if args.command == "agg":
            return _cmd_agg_build(args)
        if args.command == "fixtures":
            return _cmd_fixtures_run(args) if args.fixtures_command == "run" else _cmd_fixtures_export(args)
        return handlers[args.command](args)
    except (RcmError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def run(argv: Sequence[str] | None = None) -> int:
    return main(argv)


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
