"""Execution engines: monolithic big-int, factored, and loop-accelerated factored.

The factored engines hand their inner loop to a kernel: the compiled
``_ckernel`` when it was built and the register fits in 64-bit exponents,
otherwise the pure-Python ``_pykernel``.  Either way the semantics are the
same, so the backend is an implementation detail visible only in
:attr:`ExecutionOutcome.backend`.
"""

from __future__ import annotations

import enum
import os
from array import array
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import gmpy2
from gmpy2 import mpz

from . import _pykernel
from .program import FactoredRegister, Program

try:  # pragma: no cover - depends on the build
    if os.environ.get("FRACTRAN_PURE_PYTHON"):
        raise ImportError("pure-Python kernel forced")
    from . import _ckernel
except ImportError:  # pragma: no cover
    _ckernel = None

__all__ = [
    "ENGINES",
    "KERNEL_BACKEND",
    "Status",
    "Snapshot",
    "ExecutionOutcome",
    "step",
    "run",
    "run_accelerated",
    "decode_power_of_two",
]

KERNEL_BACKEND = "cython" if _ckernel is not None else "python"
ENGINES = ("monolithic", "factored", "accelerated")

_C_LIMIT = 1 << 62


class Status(enum.Enum):
    HALTED = "HALTED"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"


@dataclass(frozen=True)
class Snapshot:
    step: int
    node: int
    registers: dict[int, int]


@dataclass
class ExecutionOutcome:
    status: Status
    final: FactoredRegister
    steps: int
    accelerated_steps: int
    emitted: list[tuple[int, int]] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    engine: str = "factored"
    backend: str = "python"

    @property
    def halted(self) -> bool:
        return self.status is Status.HALTED

    @property
    def halt_exponent(self) -> int | None:
        """``k`` when the run halted at exactly ``2**k``."""
        if not self.halted:
            return None
        return decode_power_of_two(self.final)


def decode_power_of_two(r: int | FactoredRegister) -> int | None:
    """Return ``k`` when ``r == 2**k`` (``k = 0`` allowed), else ``None``."""
    if isinstance(r, FactoredRegister):
        if r.cofactor != 1:
            return None
        exps = r.exponents
        if any(p != 2 for p in exps):
            return None
        return exps.get(2, 0)
    if r < 1:
        raise ValueError("register values are positive integers")
    if r & (r - 1):
        return None
    return r.bit_length() - 1


def step(program: Program, r: int | FactoredRegister):
    """One FRACTRAN step: ``f_j * r`` for the first integral product, or ``None`` at halt."""
    if isinstance(r, FactoredRegister):
        exps = r.exponents
        for need, delta in program.exponent_rows:
            if all(exps.get(p, 0) >= e for p, e in need.items()):
                for p, d in delta.items():
                    exps[p] = exps.get(p, 0) + d
                return FactoredRegister(exps, r.cofactor)
        return None
    if r < 1:
        raise ValueError("register values are positive integers")
    for num, den in program.reduced_pairs:
        if r % den == 0:
            return r // den * num
    return None


class _Layout:
    """Index-based view of a program over a fixed prime basis."""

    def __init__(self, program: Program, basis: Sequence[int]):
        self.basis = tuple(basis)
        index = {p: i for i, p in enumerate(self.basis)}
        nb = len(self.basis)
        needs, deltas, need_dense, delta_dense = [], [], [], []
        for need, delta in program.exponent_rows:
            needs.append(tuple(sorted((index[p], e) for p, e in need.items())))
            deltas.append(tuple(sorted((index[p], d) for p, d in delta.items())))
            nd = [0] * nb
            for p, e in need.items():
                nd[index[p]] = e
            dd = [0] * nb
            for p, d in delta.items():
                dd[index[p]] = d
            need_dense.append(nd)
            delta_dense.append(dd)
        self.needs = tuple(needs)
        self.deltas = tuple(deltas)
        self.need_dense = need_dense
        self.delta_dense = delta_dense
        self._c = None

    def c_arrays(self):
        if self._c is None:
            need_ptr, need_idx, need_amt = [0], [], []
            for row in self.needs:
                for i, e in row:
                    need_idx.append(i)
                    need_amt.append(e)
                need_ptr.append(len(need_idx))
            delta_ptr, delta_idx, delta_amt = [0], [], []
            for row in self.deltas:
                for i, d in row:
                    delta_idx.append(i)
                    delta_amt.append(d)
                delta_ptr.append(len(delta_idx))
            flat_need = [e for row in self.need_dense for e in row]
            flat_delta = [d for row in self.delta_dense for d in row]
            self.c_need_ptr = array("q", need_ptr)
            self.c_need_idx = array("q", need_idx or [0])
            self.c_need_amt = array("q", need_amt or [0])
            self.c_delta_ptr = array("q", delta_ptr)
            self.c_delta_idx = array("q", delta_idx or [0])
            self.c_delta_amt = array("q", delta_amt or [0])
            self.c_need_dense = array("q", flat_need or [0])
            self.c_delta_dense = array("q", flat_delta or [0])
            self._c = True
        return self


def _as_register(start: int | FactoredRegister, basis: Sequence[int]) -> FactoredRegister:
    if isinstance(start, FactoredRegister):
        return start
    if isinstance(start, bool) or not isinstance(start, int):
        raise TypeError("start must be an int or FactoredRegister")
    return FactoredRegister.from_int(start, basis)


def _basis_for(program: Program, start: FactoredRegister) -> tuple[int, ...]:
    return tuple(sorted(set(program.prime_basis) | set(start.primes())))


def _check_budget(budget: int) -> None:
    if isinstance(budget, bool) or not isinstance(budget, int) or budget <= 0:
        raise ValueError("budget must be a positive integer")


def _record(outcome: ExecutionOutcome, exps, basis, cofactor, steps, trace_idx, snapshot_primes):
    if cofactor == 1:
        if all(e == 0 for p, e in zip(basis, exps) if p != 2):
            two = exps[basis.index(2)] if 2 in basis else 0
            outcome.emitted.append((steps, int(two)))
    for i in trace_idx:
        if exps[i]:
            full = {p: int(e) for p, e in zip(basis, exps) if e}
            if snapshot_primes is not None:
                full = {p: full.get(p, 0) for p in snapshot_primes}
            outcome.snapshots.append(Snapshot(steps, basis[i], full))


def _run_factored(program, start, budget, max_steps, accelerate, trace_nodes, snapshot_primes, engine):
    start = _as_register(start, program.prime_basis)
    basis = _basis_for(program, start)
    layout = _Layout(program, basis)
    exps = [start.exponent(p) for p in basis]
    two_idx = basis.index(2) if 2 in basis else -1
    trace_idx = [basis.index(p) for p in sorted(set(trace_nodes)) if p in basis]
    others = sum(1 for i, e in enumerate(exps) if e and i != two_idx) + (start.cofactor != 1)

    outcome = ExecutionOutcome(Status.BUDGET_EXHAUSTED, start, 0, 0, engine=engine)
    _record(outcome, exps, basis, start.cofactor, 0, trace_idx, snapshot_primes)

    use_c = _ckernel is not None and all(e < _C_LIMIT for e in exps)
    backends = set()
    steps = macro = 0
    # true-step cap: plain engines count every step against the budget
    cap = max_steps if accelerate else budget
    while True:
        remaining_budget = budget - macro
        remaining_cap = -1 if cap is None else cap - steps
        if use_c:
            buf = array("q", exps)
            status, s, mac, others, _ = _ckernel.run_factored(
                buf, layout.c_arrays(), remaining_budget, remaining_cap, accelerate,
                array("q", trace_idx), two_idx, others,
            )
            exps = buf.tolist()
            backends.add("cython")
            if status == _pykernel.OVERFLOW:
                use_c = False
        else:
            status, s, mac, others, _ = _pykernel.run_factored(
                exps, layout, remaining_budget, remaining_cap, accelerate,
                trace_idx, two_idx, others,
            )
            backends.add("python")
        steps += s
        macro += mac
        if status == _pykernel.EVENT:
            _record(outcome, exps, basis, start.cofactor, steps, trace_idx, snapshot_primes)
            continue
        if status == _pykernel.OVERFLOW:
            continue
        break
    outcome.final = FactoredRegister(dict(zip(basis, exps)), start.cofactor)
    halted = status == _pykernel.HALTED or step(program, outcome.final) is None
    outcome.status = Status.HALTED if halted else Status.BUDGET_EXHAUSTED
    outcome.steps = steps
    outcome.accelerated_steps = macro
    outcome.backend = "+".join(sorted(backends))
    return outcome


def _run_monolithic(program, start, budget, trace_nodes, snapshot_primes):
    if isinstance(start, FactoredRegister):
        r = start.value
    else:
        r = start
        if r < 1:
            raise ValueError("register values are positive integers")
    r = mpz(r)
    pairs = [(mpz(num), mpz(den)) for num, den in program.reduced_pairs]
    traces = sorted(set(trace_nodes))
    basis = tuple(sorted(set(program.prime_basis) | set(traces)))
    outcome = ExecutionOutcome(Status.BUDGET_EXHAUSTED, FactoredRegister(), 0, 0, engine="monolithic")

    def record(value, at):
        if gmpy2.bit_scan1(value) == value.bit_length() - 1:
            outcome.emitted.append((at, value.bit_length() - 1))
        for p in traces:
            if is_divisible(value, p):
                reg = FactoredRegister.from_int(value, basis)
                regs = reg.exponents if snapshot_primes is None else reg.restricted(snapshot_primes)
                outcome.snapshots.append(Snapshot(at, p, regs))

    is_divisible = gmpy2.is_divisible
    divexact = gmpy2.divexact
    scan = gmpy2.bit_scan1
    record(r, 0)
    steps = 0
    halted = False
    while steps < budget:
        for num, den in pairs:
            if is_divisible(r, den):
                r = divexact(r, den) * num
                break
        else:
            halted = True
            break
        steps += 1
        if traces or scan(r) == r.bit_length() - 1:
            record(r, steps)
    else:
        # budget spent exactly as the program halts: probe once more
        halted = not any(is_divisible(r, den) for _, den in pairs)
    outcome.status = Status.HALTED if halted else Status.BUDGET_EXHAUSTED
    outcome.final = FactoredRegister.from_int(int(r), basis)
    outcome.steps = outcome.accelerated_steps = steps
    outcome.backend = "gmp"
    return outcome


def run(
    program: Program,
    start: int | FactoredRegister,
    budget: int,
    trace_nodes: Iterable[int] = (),
    *,
    engine: str = "factored",
    snapshot_primes: Sequence[int] | None = None,
    max_steps: int | None = None,
) -> ExecutionOutcome:
    """Run until halt or until the budget is spent.

    ``budget`` counts plain steps for the ``monolithic`` and ``factored``
    engines and accelerated steps for ``accelerated`` (where ``max_steps``
    optionally caps the true step count).  A snapshot is taken at every
    state divisible by a ``trace_nodes`` prime, and every pure power of two
    is logged in ``emitted``.  The accelerated engine only observes states
    at burst boundaries.
    """
    _check_budget(budget)
    if engine == "monolithic":
        return _run_monolithic(program, start, budget, trace_nodes, snapshot_primes)
    if engine == "factored":
        return _run_factored(program, start, budget, None, False, trace_nodes, snapshot_primes, engine)
    if engine == "accelerated":
        return run_accelerated(program, start, budget, max_steps=max_steps,
                               trace_nodes=trace_nodes, snapshot_primes=snapshot_primes)
    raise ValueError(f"unknown engine {engine!r}; choose from {ENGINES}")


def run_accelerated(
    program: Program,
    start: int | FactoredRegister,
    budget: int,
    *,
    max_steps: int | None = None,
    trace_nodes: Iterable[int] = (),
    snapshot_primes: Sequence[int] | None = None,
) -> ExecutionOutcome:
    """Factored run that collapses runs of one repeating fraction into a single power.

    ``budget`` limits accelerated steps; ``outcome.steps`` still reports the
    true number of underlying FRACTRAN steps.
    """
    _check_budget(budget)
    if max_steps is not None and max_steps < 0:
        raise ValueError("max_steps must be >= 0")
    return _run_factored(program, start, budget, max_steps, True, trace_nodes, snapshot_primes, "accelerated")
