"""Verification suites over the oracles and the catalog programs.

Each suite returns a :class:`SuiteReport`: a list of exact check records and,
for attempt-class VM runs, whether the budget ran out before an answer.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

from . import catalog, oracles
from .numerics import sqrt2_digit_reference
from .oracles import CheckResult, Kind
from .testing import random_program, random_start
from .vm import decode_power_of_two, format_factored, run, run_accelerated

__all__ = ["SuiteReport", "SUITES", "run_suite", "phase2_table", "PHASE2_TRACE_NODES"]


@dataclass
class SuiteReport:
    name: str
    records: list[CheckResult] = field(default_factory=list)
    budget_exhausted: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    def lines(self) -> list[str]:
        out = [f"[{self.name}] " + r.line() for r in self.records]
        out.extend(f"[{self.name}] note: {n}" for n in self.notes)
        return out


def bracketing(max_E: int = 2000, **_) -> SuiteReport:
    rep = SuiteReport("bracketing")
    for E in range(6, max_E + 1, 4):
        t = oracles.catalan_truncation(E)
        rep.records.append(oracles.bracketing_check(t))
    for E in range(4, max_E + 1, 2):
        rep.records.append(oracles.bracketing_check(oracles.wallis_truncation(E)))
    return rep


def non_integrality(max_E: int = 2000, max_n: int = 40, **_) -> SuiteReport:
    rep = SuiteReport("non-integrality")
    for kind, first, stride in ((Kind.CATALAN_SQRT2, 6, 4), (Kind.WALLIS_PI, 4, 2)):
        for E in range(first, max_E + 1, stride):
            t = oracles.truncation(kind, E)
            # one record per E; the denominator test covers every n at once
            q = t.value.denominator
            bad = [n for n in range(max_n + 1) if (10**n * t.value.numerator) % q == 0]
            rep.records.append(
                CheckResult(
                    "non-integrality",
                    not bad,
                    kind=kind.name,
                    E=E,
                    witnesses={"max_n": str(max_n), "reduced_denominator": oracles._big(q), "integral_at": str(bad)},
                )
            )
    return rep


def contraction(max_k: int = 20, **_) -> SuiteReport:
    rep = SuiteReport("contraction")
    for k in range(1, max_k + 1):
        try:
            rep.records.append(oracles.heron_contraction_check(k))
        except oracles.ResourceLimitError as err:
            rep.records.append(CheckResult("contraction", False, k=k, witnesses={"error": str(err)}))
            break
    for r in oracles.epsilon_chain(6):
        if not r.passed:
            rep.notes.append(f"closed-form bound eps_N < 2^(-3N) fails at N={r.k}: eps={r.witnesses['eps']}")
    return rep


def digits(max_n: int = 40, newton_n: int = 200, **_) -> SuiteReport:
    rep = SuiteReport("digits")
    for kind in Kind:
        for n in range(max_n + 1):
            E = oracles.minimal_E(kind, n)
            got = oracles.truncation_digit(oracles.truncation(kind, E), n)
            ref = oracles.reference_digit(kind, n)
            rep.records.append(
                CheckResult("truncation-digit", got == ref, kind=kind.name, E=E, n=n,
                            witnesses={"digit": str(got), "reference": str(ref)})
            )
    for n in range(newton_n + 1):
        got, ref = oracles.newton_digit(n), sqrt2_digit_reference(n)
        rep.records.append(
            CheckResult("newton-digit", got == ref, n=n, witnesses={"digit": str(got), "reference": str(ref)})
        )
    return rep


def mod4(**_) -> SuiteReport:
    return SuiteReport("mod4", [oracles.mod4_recurrence_check()])


def mahler(max_E: int = 200, **_) -> SuiteReport:
    return SuiteReport("mahler", [oracles.mahler_check(oracles.wallis_truncation(E)) for E in range(4, min(max_E, 200) + 1, 2)])


def audit(**_) -> SuiteReport:
    rep = SuiteReport("audit")
    for name in catalog.DIGIT_PROGRAMS:
        a = catalog.audit(name)
        rep.records.append(
            CheckResult(
                "structural-audit",
                a.clean,
                kind=name,
                witnesses={
                    "dead_end_nodes": str(a.dead_end_nodes),
                    "shadowed": str(len(a.shadowed)),
                    "state_dropping": str(len(a.state_dropping_writes)),
                },
            )
        )
        rep.notes.extend(a.lines()[1:] if not a.clean else [])
    return rep


def _vm_record(check, outcome, expected, *, n=None, E=None) -> CheckResult:
    got = decode_power_of_two(outcome.final) if outcome.halted else None
    return CheckResult(
        check,
        outcome.halted and got == expected,
        n=n,
        E=E,
        witnesses={
            "status": outcome.status.name,
            "steps": str(outcome.steps),
            "final": format_factored(outcome.final),
            "expected": f"2^{expected}",
        },
    )


def vm_nrsqrt2game(max_n: int = 2, budget: int | None = None, accelerated_n: int = 3, **_) -> SuiteReport:
    """Digits from the start state: plain steps for n <= max_n, accelerated for accelerated_n."""
    rep = SuiteReport("vm-nrsqrt2game")
    prog = catalog.get("NRSQRT2GAME").program
    for n in range(max_n + 1):
        out = run(prog, catalog.start_state("NRSQRT2GAME", n), budget or 10**8, engine="factored")
        rep.records.append(_vm_record("vm-digit", out, sqrt2_digit_reference(n), n=n))
    if accelerated_n is not None and accelerated_n > max_n:
        n = accelerated_n
        out = run_accelerated(prog, catalog.start_state("NRSQRT2GAME", n), 10**7)
        rep.records.append(_vm_record("vm-digit-accelerated", out, sqrt2_digit_reference(n), n=n))
        rep.budget_exhausted = not out.halted
    return rep


def vm_sqrt2game_injected(E: int = 10, n: int = 0, budget: int = 10**7, **_) -> SuiteReport:
    rep = SuiteReport("vm-sqrt2game-injected")
    prog = catalog.get("SQRT2GAME").program
    out = run(prog, catalog.sqrt2game_phase2_state(E, n), budget, engine="factored")
    rep.records.append(_vm_record("vm-injected", out, sqrt2_digit_reference(n), n=n, E=E))
    return rep


PHASE2_TRACE_NODES = (107, 61)


def phase2_table(E: int, n: int = 0) -> list[tuple[str, dict[int, int]]]:
    """Register values at the end of loop parts I(i), I(ii), II(i), II(ii).

    These are the documented node-83 loop-table entries.  The r7 entries of
    the (ii) columns are left out: they contradict the update r7 = r3*r5.
    """
    t = 10**n
    return [
        ("I(i)", {11: t * E, 5: E, 23: 1, 7: 0, 59: 0}),
        ("I(ii)", {5: E - 2, 17: E - 1, 3: t * E, 59: E - 1}),
        ("II(i)", {11: (E - 2) ** 2, 5: E - 2, 7: 0, 23: E - 1}),
        ("II(ii)", {5: E - 4, 17: E - 3, 3: (E - 2) ** 2, 59: (E - 1) * (E - 3)}),
    ]


def vm_sqrt2game_trace(E: int = 30, n: int = 0, budget: int = 10**7, **_) -> SuiteReport:
    """Injected run: each table row must appear, in order, at a loop-head snapshot."""
    rep = SuiteReport("vm-sqrt2game-trace")
    prog = catalog.get("SQRT2GAME").program
    out = run(prog, catalog.sqrt2game_phase2_state(E, n), budget, PHASE2_TRACE_NODES, engine="factored")
    states = [s.registers for s in out.snapshots]
    states.append(out.final.exponents)
    pos = 0
    for label, want in phase2_table(E, n):
        found = None
        for i in range(pos, len(states)):
            if all(states[i].get(p, 0) == v for p, v in want.items()):
                found = i
                break
        rep.records.append(
            CheckResult(
                f"trace-{label}",
                found is not None,
                n=n,
                E=E,
                witnesses={
                    "expected": ",".join(f"r{p}={v}" for p, v in want.items()),
                    "snapshots": str(len(out.snapshots)),
                    "final": format_factored(out.final),
                    "steps": str(out.steps),
                },
            )
        )
        if found is not None:
            pos = found + 1
    return rep


def _attempt(name: str, n: int, budget: int) -> SuiteReport:
    prog = catalog.get(name).program
    out = run_accelerated(prog, catalog.start_state(name, n), budget)
    digit = catalog.get(name).constant
    ref = sqrt2_digit_reference(n) if digit == "sqrt2" else oracles.reference_digit(Kind.WALLIS_PI, n)
    rep = SuiteReport(f"vm-{name.lower()}-full")
    if out.halted:
        rep.records.append(_vm_record("vm-full", out, ref, n=n))
    else:
        rep.budget_exhausted = True
        rep.notes.append(f"budget of {budget} accelerated steps exhausted after {out.steps} true steps")
    return rep


def vm_sqrt2game_full(n: int = 0, budget: int = 10**9, **_) -> SuiteReport:
    return _attempt("SQRT2GAME", n, budget)


def vm_pigame_full(n: int = 0, budget: int = 10**9, **_) -> SuiteReport:
    return _attempt("PIGAME", n, budget)


def engine_fuzz(cases: int = 10**5, seed: int = 0, steps: int = 1000, **_) -> SuiteReport:
    """Monolithic, factored and accelerated engines agree on random small programs."""
    rng = random.Random(seed)
    bad = []
    for i in range(cases):
        prog, start = random_program(rng), random_start(rng)
        a = run(prog, start, steps, engine="monolithic")
        b = run(prog, start, steps, engine="factored")
        c = run_accelerated(prog, start, steps, max_steps=steps)
        if not (a.final == b.final == c.final and a.steps == b.steps == c.steps and a.status == b.status == c.status):
            bad.append(i)
    return SuiteReport(
        "engine-fuzz",
        [CheckResult("engine-equivalence", not bad, witnesses={"cases": str(cases), "discrepancies": str(bad[:10])})],
    )


SUITES: dict[str, Callable[..., SuiteReport]] = {
    "audit": audit,
    "bracketing": bracketing,
    "contraction": contraction,
    "digits": digits,
    "engine-fuzz": engine_fuzz,
    "mahler": mahler,
    "mod4": mod4,
    "non-integrality": non_integrality,
    "vm-nrsqrt2game": vm_nrsqrt2game,
    "vm-pigame-full": vm_pigame_full,
    "vm-sqrt2game-full": vm_sqrt2game_full,
    "vm-sqrt2game-injected": vm_sqrt2game_injected,
    "vm-sqrt2game-trace": vm_sqrt2game_trace,
}

# what `verify --suite all` runs; the long fuzz and full attempts are opt-in
DEFAULT_SUITES = ("bracketing", "contraction", "digits", "mod4", "non-integrality")


def run_suite(name: str, **params) -> SuiteReport:
    try:
        fn = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {sorted(SUITES)}") from None
    return fn(**{k: v for k, v in params.items() if v is not None})
