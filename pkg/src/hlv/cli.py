"""Command-line front end: ``hlv parse|check|sat|monitor|gen``."""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

from . import formula as fm
from . import modelcheck, monitor, satcheck, speclib
from .errors import FormulaSyntaxError, HlvError, ResourceLimit
from .kripke import parse_kripke

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_ERROR = 0, 1, 2, 3


def _read(source: str) -> str:
    if source == "-":
        return sys.stdin.read()
    if os.path.exists(source):
        with open(source, encoding="utf-8") as fh:
            return fh.read()
    return source


def _formula(source: str) -> fm.QuantifiedFormula:
    return fm.parse_formula(_read(source))


def _emit(args, text_lines: list[str], records: list[str]) -> None:
    out = records if args.format == "lines" else text_lines
    for line in out:
        print(line)


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def cmd_parse(args) -> int:
    f = _formula(args.formula or args.file)
    info = fm.classify(f)
    _emit(args, [fm.pretty_print(f), info.summary()],
          [f"formula={fm.pretty_print(f)}", info.summary().replace(" ", "\n")])
    return EXIT_OK


def cmd_check(args) -> int:
    with open(args.model, encoding="utf-8") as fh:
        k = parse_kripke(fh.read())
    f = _formula(args.formula)
    verdict = modelcheck.check(k, f, args.strategy, max_states=args.max_states)
    result = "holds" if verdict.holds else "violated"
    records = [f"result={result}", f"strategy={verdict.strategy}"]
    if verdict.witness:
        kind = "witness" if verdict.holds else "counterexample"
        records += [f"{kind} {v}={t}" for v, t in verdict.witness.items()]
    _emit(args, [verdict.describe(), f"strategy: {verdict.strategy}"], records)
    return EXIT_OK if verdict.holds else EXIT_NO


def cmd_sat(args) -> int:
    f = _formula(args.formula)
    if args.method == "bounded":
        res = satcheck.sat_bounded(f, args.max_traces, args.max_stem, args.max_loop)
    else:
        res = satcheck.sat_fragment(f)
    records = [f"result={res.status.value}", f"note={res.note}"]
    text = [res.status.value, res.note]
    if res.model:
        records += [f"trace={t}" for t in res.model]
        text += ["model:"] + [f"  {t}" for t in res.model]
    _emit(args, text, records)
    return {satcheck.SatStatus.SAT: EXIT_OK, satcheck.SatStatus.UNSAT: EXIT_NO}.get(res.status, EXIT_UNKNOWN)


def cmd_monitor(args) -> int:
    f = _formula(args.formula)
    found = []

    def emit(v):
        found.append(v)
        print(v, flush=True)

    if args.stream == "-":
        monitor.monitor_stream(f, sys.stdin, emit, reduce=args.reduce)
    else:
        with open(args.stream, encoding="utf-8") as fh:
            monitor.monitor_stream(f, fh, emit, reduce=args.reduce)
    return EXIT_NO if found else EXIT_OK


def cmd_gen(args) -> int:
    match args.name:
        case "obsdet":
            f = speclib.gen_obsdet(args.l, args.o)
        case "noninference":
            f = speclib.gen_noninference(args.h, args.l, args.o)
        case "gni":
            f = speclib.gen_gni(args.h, args.l, args.o)
        case "hamming":
            f = speclib.gen_hamming(args.d, args.i, args.o)
        case "dependence":
            body = speclib.gen_dependence(args.inputs.split(","), args.outputs.split(","))
            print(fm.format_body(body))
            return EXIT_OK
        case "distributed":
            with open(args.arch, encoding="utf-8") as fh:
                arch = speclib.parse_arch(fh.read())
            f = speclib.gen_distributed(arch, fm.parse_body(_read(args.spec)))
        case _:
            raise AssertionError(args.name)
    print(fm.pretty_print(f))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "lines"), default="text",
                        help="human-readable text or one key=value record per line")

    p = argparse.ArgumentParser(prog="hlv", description="HyperLTL model checking, satisfiability and monitoring.")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("parse", parents=[common], help="pretty-print a formula and classify its fragment")
    sp.add_argument("file", nargs="?", help="formula file (or use --formula)")
    sp.add_argument("--formula")
    sp.set_defaults(run=cmd_parse)

    sp = sub.add_parser("check", parents=[common], help="model-check a Kripke structure")
    sp.add_argument("--model", required=True, help=".kr file")
    sp.add_argument("--formula", required=True, help="formula file or text")
    sp.add_argument("--strategy", choices=tuple(modelcheck.STRATEGIES))
    sp.add_argument("--max-states", type=_positive, default=modelcheck.DEFAULT_MAX_STATES)
    sp.set_defaults(run=cmd_check)

    sp = sub.add_parser("sat", parents=[common], help="decide or search satisfiability")
    sp.add_argument("--formula", required=True)
    sp.add_argument("--method", choices=("fragment", "bounded"), default="fragment")
    sp.add_argument("--max-traces", type=_positive, default=2)
    sp.add_argument("--max-stem", type=int, default=2)
    sp.add_argument("--max-loop", type=_positive, default=2)
    sp.set_defaults(run=cmd_sat)

    sp = sub.add_parser("monitor", parents=[common], help="monitor a stream of traces")
    sp.add_argument("--formula", required=True)
    sp.add_argument("stream", nargs="?", default="-", help="session stream file, '-' for stdin")
    sp.add_argument("--reduce", action="store_true", help="skip symmetric and reflexive tuples when sound")
    sp.set_defaults(run=cmd_monitor)

    sp = sub.add_parser("gen", parents=[common], help="print a generated specification")
    gens = sp.add_subparsers(dest="name", required=True)
    g = gens.add_parser("obsdet")
    g.add_argument("l")
    g.add_argument("o")
    for name in ("noninference", "gni"):
        g = gens.add_parser(name)
        g.add_argument("h")
        g.add_argument("l")
        g.add_argument("o")
    g = gens.add_parser("hamming")
    g.add_argument("d", type=int)
    g.add_argument("i")
    g.add_argument("o")
    g = gens.add_parser("dependence")
    g.add_argument("--inputs", required=True, help="comma-separated")
    g.add_argument("--outputs", required=True, help="comma-separated")
    g = gens.add_parser("distributed")
    g.add_argument("arch", help=".arch file")
    g.add_argument("--spec", required=True, help="one-variable LTL body (file or text)")
    sp.set_defaults(run=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "parse" and not (args.formula or args.file):
        print("error: a formula file or --formula is required", file=sys.stderr)
        return EXIT_ERROR
    try:
        return args.run(args)
    except FormulaSyntaxError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    except ResourceLimit as e:
        print(f"unknown: resource limit: {e}", file=sys.stderr)
        return EXIT_UNKNOWN if args.command in ("check", "sat") else EXIT_ERROR
    except (HlvError, ValueError, OSError) as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
