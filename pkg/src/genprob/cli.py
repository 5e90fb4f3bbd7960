"""Command line entry point.

Exit status: 0 on success, 1 when a scenario file has diagnostics (or a
search finds nothing), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import warnings
from fractions import Fraction

from .builtin import BUILTINS, builtin_source
from .calculus import MixedOutcomeWarning, monte_carlo_check, outcome_probabilities
from .enumerator import (
    MAX_DEPTH,
    estimate_probability,
    kraft_report,
    optimal_compression,
    program_batches,
)
from .kernels import HALTED, RUNTIME_ERROR, run_batch
from .mlang import DEFAULT_FUEL, SEP, EvalLimit, evaluate
from .scenario_io import fraction_text, parse_scenario, render_report

FUEL_ENV = "GENPROB_FUEL"
DEFAULT_MAX_BITS = 15
FORMATS = ("table", "machine", "decimal")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _depth(text: str) -> int:
    v = _positive_int(text)
    if not 3 <= v <= MAX_DEPTH:
        raise argparse.ArgumentTypeError(f"max-bits must be in 3..{MAX_DEPTH}")
    return v


def _default_fuel() -> int:
    raw = os.environ.get(FUEL_ENV)
    if raw is None:
        return DEFAULT_FUEL
    try:
        return _positive_int(raw)
    except argparse.ArgumentTypeError as exc:
        raise SystemExit(f"genprob: {FUEL_ENV}: {exc}")


def parse_target(text: str) -> str:
    """Accept ``1|0`` or ``1 SEP 0`` (also ``1·SEP·0``) for an output sequence."""
    t = text.replace("·", " ").replace("SEP", SEP)
    t = "".join(t.split())
    bad = set(t) - {"0", "1", SEP}
    if bad:
        raise argparse.ArgumentTypeError(f"target may only contain 0, 1 and {SEP} (or SEP); got {text!r}")
    return t


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genprob", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    fuel = dict(type=_positive_int, default=None, help=f"step budget per program (default {DEFAULT_FUEL}, env {FUEL_ENV})")
    depth = dict(type=_depth, default=DEFAULT_MAX_BITS, help=f"enumeration depth in bits (default {DEFAULT_MAX_BITS})")
    fmt = dict(choices=FORMATS, default="table", help="report format (default table)")

    p = sub.add_parser("eval", help="evaluate a scenario file")
    p.add_argument("path")
    p.add_argument("--format", **fmt)
    p.add_argument("--fuel", **fuel)

    p = sub.add_parser("examples", help="evaluate a built-in scenario")
    p.add_argument("name", choices=sorted(BUILTINS))
    p.add_argument("--format", **fmt)

    p = sub.add_parser("enumerate", help="list every valid program up to a depth")
    p.add_argument("--max-bits", **depth)
    p.add_argument("--fuel", **fuel)

    for name, help_ in (("prob", "probability mass lower bound for an output"),
                        ("compress", "shortest program printing an output")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("target", type=parse_target, help=f"output symbols, e.g. '1{SEP}0' or '1 SEP 0'")
        p.add_argument("--max-bits", **depth)
        p.add_argument("--fuel", **fuel)
        p.add_argument("--format", choices=("table", "machine"), default="table")

    p = sub.add_parser("kraft", help="total mass of halting programs up to a depth")
    p.add_argument("--max-bits", **depth)
    p.add_argument("--fuel", **fuel)
    p.add_argument("--format", choices=("table", "machine"), default="table")

    p = sub.add_parser("simulate", help="Monte Carlo frequencies next to the exact table")
    p.add_argument("path")
    p.add_argument("--samples", type=_positive_int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", **fmt)
    p.add_argument("--fuel", **fuel)
    return parser


def _load(source: str, path: str, limit: EvalLimit):
    doc = parse_scenario(source, limit)
    for d in doc.diagnostics:
        print(f"{path}:{d}", file=sys.stderr)
    return doc.scenario if doc.ok else None


def _read(path: str) -> str | None:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        print(f"genprob: cannot read {path}: {exc.strerror}", file=sys.stderr)
        return None


def _report(table, fmt: str) -> str:
    if fmt == "decimal":
        return render_report(table, "table", decimals=True)
    return render_report(table, fmt)


def _frac(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator}


def _emit(fmt: str, rows: list[tuple[str, object]], machine: dict) -> None:
    if fmt == "machine":
        sys.stdout.write(json.dumps(machine, indent=2) + "\n")
    else:
        width = max(len(k) for k, _ in rows)
        for k, v in rows:
            print(f"{k.ljust(width)}  {v}")


def cmd_eval(args, limit) -> int:
    source = _read(args.path)
    if source is None:
        return 1
    scenario = _load(source, args.path, limit)
    if scenario is None:
        return 1
    sys.stdout.write(_report(outcome_probabilities(scenario), args.format))
    return 0


def cmd_examples(args, limit) -> int:
    scenario = _load(builtin_source(args.name), f"<{args.name}>", limit)
    sys.stdout.write(_report(outcome_probabilities(scenario), args.format))
    return 0


def cmd_enumerate(args, limit) -> int:
    total = 0
    for batch in program_batches(args.max_bits):
        status, _, steps = run_batch(batch.ops, batch.args, batch.n_instr, limit.max_steps)
        for k in range(len(batch)):
            prog = batch.program(k)
            if status[k] == HALTED:
                out = evaluate(prog, limit).raw_output
                state = f"halt steps={steps[k]} output={out!r}"
            elif status[k] == RUNTIME_ERROR:
                state = "runtime_error"
            else:
                state = "diverged"
            print(f"{batch.bits(k):<{args.max_bits}}  {str(prog):<40}  {state}")
        total += len(batch)
    print(f"# {total} valid programs up to {args.max_bits} bits")
    return 0


def cmd_prob(args, limit) -> int:
    est = estimate_probability(args.target, args.max_bits, limit)
    shortest = str(est.shortest) if est.shortest else "none"
    _emit(
        args.format,
        [
            ("target", repr(est.target)),
            ("depth_bits", est.depth_bits),
            ("mass", f"{fraction_text(est.mass)}  (~{float(est.mass):.6g}, lower bound at this depth)"),
            ("generators", est.generator_count),
            ("shortest", shortest),
        ],
        {
            "target": est.target,
            "depth_bits": est.depth_bits,
            "mass": _frac(est.mass),
            "generator_count": est.generator_count,
            "shortest": None if est.shortest is None else {"program": shortest, "bits": est.shortest.bits},
        },
    )
    return 0


def cmd_compress(args, limit) -> int:
    res = optimal_compression(args.target, args.max_bits, limit)
    if res is None:
        print(f"genprob: no program up to {args.max_bits} bits prints {args.target!r}", file=sys.stderr)
        return 1
    _emit(
        args.format,
        [("target", repr(res.target)), ("program", str(res.program)), ("bits", res.program.bits),
         ("entropy_bits", res.entropy_bits)],
        {"target": res.target, "program": str(res.program), "bits": res.program.bits,
         "entropy_bits": res.entropy_bits},
    )
    return 0


def cmd_kraft(args, limit) -> int:
    rep = kraft_report(args.max_bits, limit)
    _emit(
        args.format,
        [("depth_bits", rep.depth_bits), ("programs", rep.program_count), ("halting", rep.halting_count),
         ("total_mass", f"{fraction_text(rep.total_mass)}  (~{float(rep.total_mass):.6g})")],
        {"depth_bits": rep.depth_bits, "program_count": rep.program_count,
         "halting_count": rep.halting_count, "total_mass": _frac(rep.total_mass)},
    )
    return 0


def cmd_simulate(args, limit) -> int:
    source = _read(args.path)
    if source is None:
        return 1
    scenario = _load(source, args.path, limit)
    if scenario is None:
        return 1
    table = outcome_probabilities(scenario)
    freq = monte_carlo_check(scenario, args.samples, args.seed)
    counts = {rid: round(f * args.samples) for rid, f in freq.items()}
    exact = table.result_given_outcome

    if args.format == "machine":
        doc = {
            "scenario": table.scenario_id,
            "samples": args.samples,
            "seed": args.seed,
            "results": [
                {"id": rid, "exact": _frac(exact[rid]) if rid in exact else None,
                 "empirical": _frac(Fraction(counts[rid], args.samples))}
                for rid in freq
            ],
        }
        sys.stdout.write(json.dumps(doc, indent=2) + "\n")
        return 0

    sys.stdout.write(_report(table, args.format))
    print(f"simulation samples={args.samples} seed={args.seed}")
    rows = [("result", "exact", "empirical", "deviation")]
    worst = 0.0
    for rid, f in freq.items():
        if rid in exact:
            dev = abs(f - float(exact[rid]))
            worst = max(worst, dev)
            rows.append((rid, fraction_text(exact[rid]), f"{f:.6f}", f"{dev:.6f}"))
        else:
            rows.append((rid, "-", f"{f:.6f}", "-"))
    widths = [max(len(r[k]) for r in rows) for k in range(4)]
    for r in rows:
        print("  " + "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
    print(f"max deviation {worst:.6f}")
    return 0


COMMANDS = {
    "eval": cmd_eval,
    "examples": cmd_examples,
    "enumerate": cmd_enumerate,
    "prob": cmd_prob,
    "compress": cmd_compress,
    "kraft": cmd_kraft,
    "simulate": cmd_simulate,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    fuel = getattr(args, "fuel", None) or _default_fuel()
    with warnings.catch_warnings():
        # mixed-situation outcomes are already reported as diagnostics
        warnings.simplefilter("ignore", MixedOutcomeWarning)
        return COMMANDS[args.command](args, EvalLimit(fuel))


if __name__ == "__main__":
    sys.exit(main())
