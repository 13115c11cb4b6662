"""``fractran`` command line: run, digits, verify, compile, export-catalog.

Exit codes: 0 success, 1 verification failure, 2 budget exhausted,
3 input or parse error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from gmpy2 import mpz

from . import catalog, oracles
from .compiler import FlowchartError, compile_flowchart, parse_flowchart
from .numerics import pi_digit_reference, sqrt2_digit_reference
from .verify import DEFAULT_SUITES, SUITES, run_suite
from .vm import ProgramParseError, format_factored, parse_program, parse_start, run

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_BUDGET = 2
EXIT_INPUT = 3

ENGINE_NAMES = {"plain": "monolithic", "factored": "factored", "accelerated": "accelerated"}
DEFAULT_BUDGET = {"plain": 10**8, "factored": 10**8, "accelerated": 10**7}
# registers beyond this many bits print in factored form only
MAX_DECIMAL_BITS = 1 << 20


class InputError(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text.replace("_", ""))
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _natural(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


def _primes(text: str) -> list[int]:
    return [int(p) for p in text.replace(" ", "").split(",") if p]


def _decimal(reg) -> str:
    bits = sum(e * p.bit_length() for p, e in reg.exponents.items()) + reg.cofactor.bit_length()
    if bits > MAX_DECIMAL_BITS:
        return f"<{bits} bits>"
    return str(mpz(reg.value))


def _load_program(args):
    if args.file is not None:
        try:
            text = Path(args.file).read_text(encoding="utf-8")
        except OSError as err:
            raise InputError(f"cannot read {args.file}: {err.strerror}") from err
        return parse_program(text, name=Path(args.file).stem), None
    entry = catalog.get(args.catalog)
    return entry.program, entry


def cmd_run(args) -> int:
    program, entry = _load_program(args)
    if args.start is not None:
        start = parse_start(args.start)
    elif entry is not None:
        start = entry.start(args.n)
    else:
        raise InputError("--start is required with --file")
    budget = args.budget or DEFAULT_BUDGET[args.engine]
    out = run(
        program,
        start,
        budget,
        args.trace or (),
        engine=ENGINE_NAMES[args.engine],
        snapshot_primes=args.snapshot_primes,
        max_steps=args.max_steps,
    )
    print(f"program: {program.name} ({len(program)} fractions)")
    print(f"start: {format_factored(start)}")
    print(f"status: {out.status.name}")
    print(f"steps: {out.steps}")
    if args.engine == "accelerated":
        print(f"accelerated steps: {out.accelerated_steps}")
    print(f"register: {_decimal(out.final)}")
    print(f"factored: {format_factored(out.final)}")
    exp = out.halt_exponent
    if exp is not None:
        print(f"halt: 2^{exp}")
    for at, e in out.emitted[: args.show]:
        print(f"event: step {at} 2^{e}")
    for snap in out.snapshots[: args.show]:
        print(f"snapshot: step {snap.step} node {snap.node} {format_factored(snap.registers)}")
    return EXIT_OK if out.halted else EXIT_BUDGET


def _digit(constant: str, method: str, k: int, args) -> int:
    if method == "catalan":
        return oracles.truncation_digit(oracles.catalan_truncation(oracles.minimal_E("catalan", k)), k)
    if method == "wallis":
        return oracles.truncation_digit(oracles.wallis_truncation(oracles.minimal_E("wallis", k)), k)
    if method == "newton":
        return oracles.newton_digit(k)
    if method == "reference":
        return sqrt2_digit_reference(k) if constant == "sqrt2" else pi_digit_reference(k)
    name = args.program or ("NRSQRT2GAME" if constant == "sqrt2" else "PIGAME")
    budget = args.budget or DEFAULT_BUDGET[args.engine]
    return catalog.digit_via_vm(name, k, budget, engine=ENGINE_NAMES[args.engine])


_METHODS = {"sqrt2": ("catalan", "newton", "vm", "reference"), "pi": ("wallis", "vm", "reference")}


def cmd_digits(args) -> int:
    if args.method not in _METHODS[args.constant]:
        raise InputError(f"method {args.method} does not compute {args.constant}")
    ref = sqrt2_digit_reference if args.constant == "sqrt2" else pi_digit_reference
    got, status = [], EXIT_OK
    for k in range(args.n + 1):
        try:
            d = _digit(args.constant, args.method, k, args)
        except catalog.BudgetExhaustedError as err:
            print(f"digit {k}: {err}", file=sys.stderr)
            status = EXIT_BUDGET
            break
        except catalog.InvalidHaltError as err:
            print(f"digit {k}: {err}", file=sys.stderr)
            status = EXIT_VERIFY
            break
        got.append(d)
        if d != ref(k):
            print(f"digit {k}: {args.method} gives {d}, reference gives {ref(k)}", file=sys.stderr)
            status = EXIT_VERIFY
    print(" ".join(map(str, got)))
    return status


def cmd_verify(args) -> int:
    names = args.suite or ["all"]
    if "all" in names:
        names = [n for n in names if n != "all"] + list(DEFAULT_SUITES)
    names = sorted(set(names))
    params = {
        "max_E": args.max_E,
        "max_n": args.max_n,
        "max_k": args.max_k,
        "E": args.E,
        "n": args.n,
        "budget": args.budget,
        "cases": args.cases,
    }
    failed = budget_out = False
    records = []
    for name in names:
        rep = run_suite(name, **params)
        for line in rep.lines():
            if args.verbose or not line.split("] ", 1)[1].startswith("PASS"):
                print(line)
        passed = sum(r.passed for r in rep.records)
        tag = "PASS" if rep.passed else "FAIL"
        if rep.budget_exhausted:
            tag += " (budget exhausted, attempt class)"
            budget_out = True
        print(f"{name}: {tag} {passed}/{len(rep.records)}")
        failed |= not rep.passed
        records.extend(dict(r.record(), suite=name) for r in rep.records)
    if args.json:
        Path(args.json).write_text("\n".join(json.dumps(r, sort_keys=True) for r in records) + "\n")
    if failed:
        return EXIT_VERIFY
    return EXIT_OK if not budget_out or not args.strict_budget else EXIT_BUDGET


def cmd_compile(args) -> int:
    try:
        text = Path(args.chart).read_text(encoding="utf-8")
    except OSError as err:
        raise InputError(f"cannot read {args.chart}: {err.strerror}") from err
    compiled = compile_flowchart(parse_flowchart(text), name=Path(args.chart).stem)
    body = compiled.program_text()
    if args.output:
        out = Path(args.output)
        out.write_text(body, encoding="utf-8")
        out.with_name(out.name + ".prov.tsv").write_text(compiled.sidecar_text(), encoding="utf-8")
    else:
        sys.stdout.write(body)
    print(f"{len(compiled.program)} fractions", file=sys.stderr)
    return EXIT_OK


def cmd_export(args) -> int:
    names = [catalog.get(n).name for n in args.name] if args.name else sorted(catalog.CATALOG)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    for name in names:
        entry = catalog.get(name)
        (outdir / f"{name.lower()}.frac").write_text(entry.program.to_text(), encoding="utf-8")
        if args.audit:
            (outdir / f"{name.lower()}.audit.txt").write_text("\n".join(catalog.audit(entry).lines()) + "\n")
        print(f"{name}: {len(entry.program)} fractions")
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        # argparse would exit 2, which is reserved for budget exhaustion
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fractran", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a program from a start value")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--catalog", metavar="NAME", help="catalog program name")
    src.add_argument("--file", metavar="PATH", help="program file (one NUM/DEN per line)")
    p.add_argument("--start", help="start value, decimal or factored (2^3*3^4*89)")
    p.add_argument("-n", type=_natural, default=0, help="digit index for the catalog start state")
    p.add_argument("--engine", choices=ENGINE_NAMES, default="factored")
    p.add_argument("--budget", type=_positive, help="step budget (accelerated steps for --engine accelerated)")
    p.add_argument("--max-steps", type=_positive, help="cap on true steps for the accelerated engine")
    p.add_argument("--trace", type=_primes, help="comma-separated node primes to snapshot")
    p.add_argument("--snapshot-primes", type=_primes, help="restrict snapshots to these primes")
    p.add_argument("--show", type=_natural, default=20, help="max events and snapshots to print")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("digits", help="print digits 0..n of a constant")
    p.add_argument("constant", choices=_METHODS)
    p.add_argument("--method", choices=("catalan", "wallis", "newton", "vm", "reference"), required=True)
    p.add_argument("-n", type=_natural, default=10)
    p.add_argument("--engine", choices=ENGINE_NAMES, default="accelerated")
    p.add_argument("--budget", type=_positive)
    p.add_argument("--program", help="catalog program for --method vm")
    p.set_defaults(func=cmd_digits)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES) + ["all"])
    p.add_argument("--max-E", dest="max_E", type=_positive)
    p.add_argument("--max-n", dest="max_n", type=_natural)
    p.add_argument("--max-k", dest="max_k", type=_positive)
    p.add_argument("--E", dest="E", type=_positive)
    p.add_argument("-n", type=_natural)
    p.add_argument("--budget", type=_positive)
    p.add_argument("--cases", type=_positive)
    p.add_argument("--json", metavar="PATH", help="also write one JSON record per check")
    p.add_argument("--strict-budget", action="store_true", help="exit 2 when an attempt runs out of budget")
    p.add_argument("-v", "--verbose", action="store_true", help="print passing checks too")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("compile", help="compile a flowchart file")
    p.add_argument("chart")
    p.add_argument("-o", "--output", help="program file to write (sidecar goes next to it)")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("export-catalog", help="write the catalog programs as program files")
    p.add_argument("-o", "--output", default=".")
    p.add_argument("--name", action="append")
    p.add_argument("--audit", action="store_true", help="also write each structural audit")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ProgramParseError, FlowchartError, catalog.UnknownProgramError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (oracles.AccuracyError, oracles.ParityError, catalog.ParityError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
