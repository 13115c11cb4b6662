"""The published FRACTRAN programs, their start states, and a structural audit.

Fraction lists are shipped exactly as printed (digit grouping is stripped on
parse, nothing else).  Each entry also names the primes its author used as
data registers; every other prime of the list is treated as a flowchart node.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from importlib import resources
from math import isqrt

from .vm import FactoredRegister, Program, parse_program, run, run_accelerated
from .vm.engine import ExecutionOutcome, decode_power_of_two, step

__all__ = [
    "CatalogEntry",
    "CatalogError",
    "UnknownProgramError",
    "ParityError",
    "BudgetExhaustedError",
    "InvalidHaltError",
    "AccuracyWarning",
    "CATALOG",
    "DIGIT_PROGRAMS",
    "get",
    "start_state",
    "sqrt2game_phase2_state",
    "digit_via_vm",
    "AuditReport",
    "audit",
    "one_hot_observations",
]


class CatalogError(Exception):
    pass


class UnknownProgramError(CatalogError, KeyError):
    pass


class ParityError(CatalogError, ValueError):
    """E violates the truncation's parity rule (E_PARITY)."""


class BudgetExhaustedError(CatalogError):
    def __init__(self, outcome: ExecutionOutcome):
        self.outcome = outcome
        super().__init__(f"budget exhausted after {outcome.steps} steps")


class InvalidHaltError(CatalogError):
    def __init__(self, outcome: ExecutionOutcome):
        self.outcome = outcome
        super().__init__(f"halted at {outcome.final}, which is not a power of two")


class AccuracyWarning(UserWarning):
    pass


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    program: Program
    start_node: int | None
    data_primes: frozenset[int]
    constant: str | None = None
    source_file: str = ""

    @property
    def node_primes(self) -> frozenset[int]:
        return frozenset(self.program.prime_basis) - self.data_primes

    def start(self, n: int = 0, *, a: int = 0, b: int = 0) -> FactoredRegister:
        if self.start_node is None:
            if a < 0 or b < 0:
                raise ValueError("a and b must be >= 0")
            return FactoredRegister({2: a, 3: b})
        if n < 0:
            raise ValueError("digit index must be >= 0")
        return FactoredRegister({2: n, self.start_node: 1})


def _load(filename: str, name: str) -> Program:
    text = resources.files("fractran.programs").joinpath(filename).read_text(encoding="utf-8")
    return parse_program(text, name=name)


def _entry(name, filename, start_node, data_primes, constant=None) -> CatalogEntry:
    return CatalogEntry(
        name=name,
        program=_load(filename, name),
        start_node=start_node,
        data_primes=frozenset(data_primes),
        constant=constant,
        source_file=filename,
    )


CATALOG: dict[str, CatalogEntry] = {
    e.name: e
    for e in (
        _entry("ADDGAME", "addgame.frac", None, (2, 3)),
        _entry("PIGAME", "pigame.frac", 89, (2, 3, 5, 7, 11), "pi"),
        _entry(
            "SQRT2GAME", "sqrt2game.frac", 173,
            (2, 3, 5, 7, 11, 13, 17, 19, 23, 43, 47, 59), "sqrt2",
        ),
        _entry(
            "NRSQRT2GAME", "nrsqrt2game.frac", 89,
            (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 41, 43, 47, 67, 97, 101), "sqrt2",
        ),
    )
}

DIGIT_PROGRAMS = ("PIGAME", "SQRT2GAME", "NRSQRT2GAME")


def get(name: str) -> CatalogEntry:
    key = name.upper().replace("-", "").replace("_", "")
    if key not in CATALOG:
        raise UnknownProgramError(f"unknown catalog program {name!r}; have {sorted(CATALOG)}")
    return CATALOG[key]


def start_state(name: str, n: int = 0, *, a: int = 0, b: int = 0) -> FactoredRegister:
    """``2^n*89`` (PIGAME, NRSQRT2GAME), ``2^n*173`` (SQRT2GAME), ``2^a*3^b`` (ADDGAME)."""
    return get(name).start(n, a=a, b=b)


def sqrt2game_phase2_state(E: int, n: int) -> FactoredRegister:
    """Register at node 83 of SQRT2GAME: ``83 * 3 * 5^E * 7^(10^n) * 59``."""
    if E % 4 != 2 or E < 6:
        raise ParityError(f"E must satisfy E = 2 (mod 4) and E >= 6, got {E}")
    if n < 0:
        raise ValueError("digit index must be >= 0")
    # 2*sqrt(2)/E < 10^-n  <=>  E^2 > 8 * 10^(2n)
    if E * E <= 8 * 10 ** (2 * n):
        warnings.warn(
            f"E={E} is too small for digit {n}: need E^2 > 8*10^{2 * n}",
            AccuracyWarning,
            stacklevel=2,
        )
    return FactoredRegister({83: 1, 3: 1, 5: E, 7: 10**n, 59: 1})


def digit_via_vm(name: str, n: int, budget: int, engine: str = "accelerated") -> int:
    """Run a digit program from its start state and decode the halting ``2^d``.

    Raises :class:`BudgetExhaustedError` or :class:`InvalidHaltError`; a
    halt at anything but a power of two is never turned into a digit.
    """
    entry = get(name)
    if entry.name not in DIGIT_PROGRAMS:
        raise CatalogError(f"{entry.name} does not compute digits")
    outcome = run(entry.program, entry.start(n), budget, engine=engine)
    if not outcome.halted:
        raise BudgetExhaustedError(outcome)
    digit = decode_power_of_two(outcome.final)
    if digit is None:
        raise InvalidHaltError(outcome)
    return digit


@dataclass
class AuditReport:
    """Structural findings for a fraction list read as a flowchart."""

    name: str
    fractions: int
    node_primes: list[int]
    data_primes: list[int]
    edges: list[tuple[int, str, list[int], list[int]]] = field(default_factory=list)
    dead_end_nodes: list[int] = field(default_factory=list)
    shadowed: list[tuple[int, int]] = field(default_factory=list)
    state_dropping_writes: list[int] = field(default_factory=list)
    multi_target: list[int] = field(default_factory=list)
    unreachable_nodes: list[int] = field(default_factory=list)
    reducible: list[int] = field(default_factory=list)

    @property
    def clean(self) -> bool:
        return not (self.dead_end_nodes or self.shadowed or self.state_dropping_writes or self.multi_target)

    def lines(self) -> list[str]:
        """Human-readable report; fraction positions are 1-based."""
        out = [f"{self.name}: {self.fractions} fractions, nodes {self.node_primes}"]

        def fr(i):
            return f"#{i + 1} {self.edges[i][1]}"

        for p in self.dead_end_nodes:
            into = [fr(i) for i, _, _, tgt in self.edges if p in tgt]
            out.append(f"  dead-end node {p}: entered by {', '.join(into)}, never left")
        for j, i in self.shadowed:
            out.append(f"  {fr(j)} can never fire: {fr(i)} applies whenever it does")
        for i in self.state_dropping_writes:
            out.append(f"  {fr(i)} leaves node {self.edges[i][2]} without entering any node but writes data")
        for i in self.multi_target:
            out.append(f"  {fr(i)} enters several nodes at once {self.edges[i][3]}")
        for p in self.unreachable_nodes:
            out.append(f"  node {p} is unreachable from the start node")
        for i in self.reducible:
            out.append(f"  {fr(i)} is not in lowest terms")
        if self.clean:
            out.append("  no structural defects")
        return out


def audit(entry: CatalogEntry | str) -> AuditReport:
    """Read the list as a flowchart over the entry's node primes and flag defects."""
    if isinstance(entry, str):
        entry = get(entry)
    prog = entry.program
    nodes = entry.node_primes
    report = AuditReport(
        name=entry.name,
        fractions=len(prog),
        node_primes=sorted(nodes),
        data_primes=sorted(entry.data_primes),
        reducible=prog.reducible(),
    )
    sources: set[int] = set()
    targets: set[int] = set()
    adjacency: dict[int, set[int]] = {}
    for i, (instr, (nf, df)) in enumerate(zip(prog, prog.factorizations)):
        src = sorted(p for p in df if p in nodes)
        tgt = sorted(p for p in nf if p in nodes)
        report.edges.append((i, str(instr), src, tgt))
        sources.update(src)
        targets.update(tgt)
        for s in src:
            adjacency.setdefault(s, set()).update(tgt)
        writes = any(p not in nodes for p in nf)
        if src and not tgt and writes:
            report.state_dropping_writes.append(i)
        if len(tgt) > 1:
            report.multi_target.append(i)
    report.dead_end_nodes = sorted(targets - sources)

    dens = [den for _, den in prog.reduced_pairs]
    for j in range(len(dens)):
        for i in range(j):
            if dens[j] % dens[i] == 0:
                report.shadowed.append((j, i))
                break

    if entry.start_node is not None:
        seen = {entry.start_node}
        frontier = [entry.start_node]
        while frontier:
            s = frontier.pop()
            for t in adjacency.get(s, ()):
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
        report.unreachable_nodes = sorted((sources | targets) - seen)
    return report


def one_hot_observations(
    entry: CatalogEntry | str,
    start: FactoredRegister,
    steps: int,
    node_primes=None,
) -> list[str]:
    """Check the one-node-at-a-time discipline over the first ``steps`` steps.

    Returns one message per violating state (empty when the discipline holds).
    ``node_primes`` defaults to every prime >= 13 in the list.
    """
    if isinstance(entry, str):
        entry = get(entry)
    if node_primes is None:
        node_primes = [p for p in entry.program.prime_basis if p >= 13]
    node_primes = sorted(node_primes)
    notes = []
    reg = start
    for t in range(steps + 1):
        held = {p: reg[p] for p in node_primes if reg[p]}
        if len(held) > 1 or any(e != 1 for e in held.values()):
            notes.append(f"step {t}: node primes {held}")
        if t == steps:
            break
        nxt = step(entry.program, reg)
        if nxt is None:
            break
        reg = nxt
    return notes


def minimal_phase2_E(n: int) -> int:
    """Smallest E = 2 (mod 4) with E^2 > 8*10^(2n); the accuracy floor for digit n."""
    bound = 8 * 10 ** (2 * n)
    E = isqrt(bound) + 1
    while E % 4 != 2:
        E += 1
    return E


def accelerated_digit(name: str, n: int, budget: int) -> ExecutionOutcome:
    entry = get(name)
    return run_accelerated(entry.program, entry.start(n), budget)
