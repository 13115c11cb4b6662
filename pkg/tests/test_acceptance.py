"""Acceptance gate: one test per criterion, each printing a single verdict line.

Tolerances are zero throughout; every comparison is exact.  Several criteria
are expected to fail on the published programs and formulas.  Those failures
are real and are left red.
"""

from __future__ import annotations

import random
import time
from collections import defaultdict

import pytest

from fractran import verify
from fractran.compiler import compile_flowchart, parse_flowchart, recover_arrows
from fractran.numerics import pi_digit_reference, sqrt2_digit_reference
from fractran.oracles import Kind, ResourceLimitError, heron_contraction_check, minimal_E, newton_digit, truncation, truncation_digit
from fractran.testing import random_data, random_flowchart_text, simulation_mismatch
from fractran.vm import Program, run

MAX_E = 2000
MAX_N = 40


def _failures(report: verify.SuiteReport) -> list:
    return [r for r in report.records if not r.passed]


def _summary(bad, key=lambda r: r.line()) -> str:
    if not bad:
        return ""
    shown = "; ".join(key(r) for r in bad[:4])
    return f"{len(bad)} failing: {shown}" + (" ..." if len(bad) > 4 else "")


def test_criterion_01_addgame(verdict):
    prog = Program.from_pairs([(2, 3)], name="ADDGAME")
    t0 = time.perf_counter()
    bad = []
    for a in range(13):
        for b in range(13):
            out = run(prog, 2**a * 3**b, 10**4)
            if not (out.halted and out.final == 2 ** (a + b)):
                bad.append((a, b))
    elapsed = time.perf_counter() - t0
    verdict(1, "ADDGAME halts at 2^(a+b) for 0<=a,b<=12", not bad and elapsed < 1.0, f"{elapsed:.3f}s, bad={bad[:4]}")


def _digit_sweep(kind: Kind, reference) -> tuple[list, float]:
    t0 = time.perf_counter()
    bad = []
    for n in range(MAX_N + 1):
        E = minimal_E(kind, n)
        got = truncation_digit(truncation(kind, E), n)
        if got != reference(n):
            bad.append((n, E, got, reference(n)))
    return bad, time.perf_counter() - t0


def test_criterion_02_catalan_digits(verdict):
    bad, elapsed = _digit_sweep(Kind.CATALAN_SQRT2, sqrt2_digit_reference)
    detail = f"{elapsed:.2f}s; mismatches (n,E,got,ref) at n={[b[0] for b in bad]}"
    verdict(2, "Catalan truncation digits n<=40 match isqrt reference", not bad and elapsed < 10, detail)


def test_criterion_03_wallis_digits(verdict):
    bad, elapsed = _digit_sweep(Kind.WALLIS_PI, pi_digit_reference)
    detail = f"{elapsed:.2f}s; mismatches at n={[b[0] for b in bad]}"
    verdict(3, "Wallis truncation digits n<=40 match Machin reference", not bad and elapsed < 30, detail)


def test_criterion_04_bracketing(verdict):
    rep = verify.bracketing(MAX_E)
    bad = _failures(rep)
    verdict(4, f"bracketing inequalities for E<={MAX_E}", not bad, f"{len(rep.records)} checks " + _summary(bad))


def test_criterion_05_non_integrality(verdict):
    rep = verify.non_integrality(MAX_E, MAX_N)
    bad = _failures(rep)
    detail = f"{len(rep.records)} truncations " + _summary(
        bad, lambda r: f"{r.kind} E={r.E} integral at n={r.witnesses['integral_at']}"
    )
    verdict(5, f"10^n*N_E/D_E never integral for n<={MAX_N}", not bad, detail)


@pytest.mark.slow
def test_criterion_06_newton(verdict):
    t0 = time.perf_counter()
    reached, blocked = 0, None
    for k in range(1, 61):
        try:
            result = heron_contraction_check(k)
        except ResourceLimitError as err:
            blocked = f"k={k}: {err}"
            break
        if not result.passed:
            blocked = result.line()
            break
        reached = k
    digit_bad = [n for n in range(201) if newton_digit(n) != sqrt2_digit_reference(n)]
    elapsed = time.perf_counter() - t0
    ok = reached == 60 and not digit_bad and elapsed < 60
    detail = f"{elapsed:.1f}s; contraction exact through k={reached}; stopped at {blocked}; digit mismatches={digit_bad}"
    verdict(6, "Heron contraction k<=60 and Newton digits n<=200", ok, detail)


def test_criterion_07_nrsqrt2game(verdict):
    rep = verify.vm_nrsqrt2game(max_n=2, budget=10**8, accelerated_n=3)
    bad = _failures(rep)
    detail = _summary(bad, lambda r: f"n={r.n} {r.witnesses['status']} at {r.witnesses['final']}")
    verdict(7, "NRSQRT2GAME halts at 2^digit for n=0..3", not bad, detail)


def test_criterion_08_sqrt2game_injection(verdict):
    rep = verify.vm_sqrt2game_injected(E=10, n=0, budget=10**7)
    (r,) = rep.records
    detail = f"{r.witnesses['status']} after {r.witnesses['steps']} steps at {r.witnesses['final']}"
    verdict(8, "SQRT2GAME node-83 injection E=10 halts at 2^1", r.passed, detail)


def test_criterion_09_trace(verdict):
    rep = verify.vm_sqrt2game_trace(E=30, n=0, budget=10**7)
    bad = _failures(rep)
    final = rep.records[0].witnesses["final"]
    detail = f"missing rows {[r.check for r in bad]}; run ended at {final}"
    verdict(9, "SQRT2GAME E=30 loop-table register values", not bad, detail)


def test_criterion_10_full_runs(verdict):
    parts, ok = [], True
    for rep in (verify.vm_sqrt2game_full(n=0, budget=10**9), verify.vm_pigame_full(n=0, budget=10**9)):
        if rep.budget_exhausted:
            parts.append(f"{rep.name}: budget exhausted (reported)")
            continue
        (r,) = rep.records
        ok &= r.passed
        parts.append(f"{rep.name}: {'PASS' if r.passed else 'FAIL'} halt {r.witnesses['final']}")
    verdict(10, "SQRT2GAME and PIGAME n=0 attempt runs", ok, "; ".join(parts))


@pytest.mark.slow
def test_criterion_11_engine_fuzz(verdict):
    t0 = time.perf_counter()
    rep = verify.engine_fuzz(cases=10**5, seed=20240501, steps=1000)
    (r,) = rep.records
    detail = f"{r.witnesses['cases']} cases in {time.perf_counter() - t0:.0f}s, discrepancies={r.witnesses['discrepancies']}"
    verdict(11, "monolithic, factored and accelerated engines agree", r.passed, detail)


def _per_node(arrows) -> dict[int, list[tuple[int, int, int]]]:
    out = defaultdict(list)
    for source, target, num, den in arrows:
        out[source].append((target, num, den))
    return dict(out)


def test_criterion_12_compiler(verdict):
    problems = []
    add = compile_flowchart(parse_flowchart("start 5\nnode 5: -> 5 * 2/3\n"))
    if [str(f) for f in add.program] != ["2/3"]:
        problems.append(f"ADDGAME compiled to {[str(f) for f in add.program]}")

    rng = random.Random(12)
    for i in range(1000):
        text, data = random_flowchart_text(rng), random_data(rng)
        at = simulation_mismatch(text, data, steps=60)
        if at is not None:
            problems.append(f"chart {i} diverges at move {at}")
        chart = parse_flowchart(text)
        if len(chart.nodes) > 1:
            compiled = compile_flowchart(chart)
            recovered = _per_node(recover_arrows(compiled.program, chart.node_primes))
            expected = _per_node((a.source, a.target, a.num, a.den) for a in chart.arrows())
            if recovered != expected:
                problems.append(f"chart {i} arrows do not round-trip")
    verdict(12, "compiler: ADDGAME, 1000 simulations, round-trip", not problems, "; ".join(problems[:4]))
