"""Flowchart DSL to FRACTRAN, and the reverse reading of fraction lists.

A flowchart is a set of nodes, each a distinct prime, with an ordered list of
outgoing arrows.  An arrow ``p -> q`` labelled ``a/b`` fires when multiplying
the data by ``a/b`` leaves an integer; the first such arrow in textual order
wins.  Compilation turns the arrow into the fraction ``(a*q)/(b*p)``::

    start 5
    node 5:
        -> 7 * 1/1
    node 7:
        -> 5 * 3/2      # arrows may also follow the colon on the same line
"""

from __future__ import annotations

import heapq
import re
from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Iterable, Iterator

from sympy import isprime

from .vm.program import Program, factorize

__all__ = [
    "Arrow",
    "Node",
    "Flowchart",
    "FlowchartError",
    "Provenance",
    "CompiledProgram",
    "Annotation",
    "parse_flowchart",
    "compile_flowchart",
    "annotate",
    "recover_arrows",
    "interpret",
]


class FlowchartError(ValueError):
    """A DSL or structural error; ``code`` is one of the names below."""

    CODES = (
        "SYNTAX",
        "NON_PRIME_NODE",
        "DUPLICATE_NODE",
        "LABEL_SHARES_NODE_PRIME",
        "UNKNOWN_TARGET",
        "UNKNOWN_START",
        "REDUCIBLE_EMISSION",
    )

    def __init__(self, code: str, message: str, line: int | None = None):
        assert code in self.CODES
        self.code = code
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{code}: {message}")


@dataclass(frozen=True)
class Arrow:
    source: int
    target: int
    num: int
    den: int
    line: int | None = None

    @property
    def label(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class Node:
    prime: int
    arrows: tuple[Arrow, ...]
    line: int | None = None


@dataclass(frozen=True)
class Flowchart:
    nodes: tuple[Node, ...]
    start: int

    @property
    def node_primes(self) -> frozenset[int]:
        return frozenset(n.prime for n in self.nodes)

    def node(self, prime: int) -> Node:
        for n in self.nodes:
            if n.prime == prime:
                return n
        raise KeyError(prime)

    def arrows(self) -> list[Arrow]:
        return [a for n in self.nodes for a in n.arrows]

    def to_text(self) -> str:
        lines = [f"start {self.start}"]
        for n in self.nodes:
            lines.append(f"node {n.prime}:")
            lines.extend(f"    -> {a.target} * {a.num}/{a.den}" for a in n.arrows)
        return "\n".join(lines) + "\n"


_START = re.compile(r"start\s+(\d+)")
_NODE = re.compile(r"node\s+(\d+)\s*:\s*(.*)")
_ARROW = re.compile(r"->\s*(\d+)\s*\*\s*(\d+)\s*/\s*(\d+)")


def parse_flowchart(text: str) -> Flowchart:
    """Parse and validate the DSL; errors carry a code and a line number."""
    start: tuple[int, int] | None = None
    blocks: list[tuple[int, int, list[tuple[int, int, int, int]]]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        if m := _START.fullmatch(body):
            if start is not None:
                raise FlowchartError("SYNTAX", "more than one start line", lineno)
            start = (int(m.group(1)), lineno)
            continue
        if m := _NODE.fullmatch(body):
            blocks.append((int(m.group(1)), lineno, []))
            body = m.group(2).strip()
            if not body:
                continue
        if not body.startswith("->"):
            raise FlowchartError("SYNTAX", f"cannot parse {raw.strip()!r}", lineno)
        if not blocks:
            raise FlowchartError("SYNTAX", "arrow outside a node block", lineno)
        for piece in re.split(r"(?=->)", body):
            piece = piece.strip().rstrip(",;")
            if not piece:
                continue
            m = _ARROW.fullmatch(piece)
            if m is None:
                raise FlowchartError("SYNTAX", f"malformed arrow {piece!r}", lineno)
            target, num, den = (int(g) for g in m.groups())
            if num == 0 or den == 0:
                raise FlowchartError("SYNTAX", "arrow labels must be positive", lineno)
            blocks[-1][2].append((target, num, den, lineno))
    if start is None:
        raise FlowchartError("SYNTAX", "missing 'start <prime>' line")
    if not blocks:
        raise FlowchartError("SYNTAX", "flowchart has no nodes")

    seen: dict[int, int] = {}
    for prime, lineno, _ in blocks:
        if not isprime(prime):
            raise FlowchartError("NON_PRIME_NODE", f"node id {prime} is not prime", lineno)
        if prime in seen:
            raise FlowchartError("DUPLICATE_NODE", f"node {prime} already defined on line {seen[prime]}", lineno)
        seen[prime] = lineno
    primes = set(seen)
    single = len(primes) == 1
    nodes = []
    for prime, lineno, raw_arrows in blocks:
        arrows = []
        for target, num, den, aline in raw_arrows:
            if target not in primes:
                raise FlowchartError("UNKNOWN_TARGET", f"arrow to undefined node {target}", aline)
            # with one node the node prime is elided, so it may double as data
            if not single:
                for p in primes:
                    if num % p == 0 or den % p == 0:
                        raise FlowchartError(
                            "LABEL_SHARES_NODE_PRIME", f"label {num}/{den} is divisible by node prime {p}", aline
                        )
            arrows.append(Arrow(prime, target, num, den, aline))
        nodes.append(Node(prime, tuple(arrows), lineno))
    if start[0] not in primes:
        raise FlowchartError("UNKNOWN_START", f"start node {start[0]} is not defined", start[1])
    return Flowchart(tuple(nodes), start[0])


@dataclass(frozen=True)
class Provenance:
    index: int
    source: int
    target: int
    num: int
    den: int
    line: int | None

    @property
    def label(self) -> str:
        return f"{self.num}/{self.den}"


@dataclass(frozen=True)
class CompiledProgram:
    program: Program
    provenance: tuple[Provenance, ...]
    flowchart: Flowchart
    elided_node: bool = False

    def program_text(self) -> str:
        comments = {p.index: f"{p.source} -> {p.target} * {p.label}" for p in self.provenance}
        return self.program.to_text(comments)

    def sidecar_text(self) -> str:
        """TSV: program-file line, source node, target node, label, DSL line."""
        desc = self.program.description
        header = 1 + (len(desc.splitlines()) if desc else 0)
        rows = ["line\tsource\ttarget\tlabel\tdsl_line"]
        for p in self.provenance:
            rows.append(f"{header + p.index + 1}\t{p.source}\t{p.target}\t{p.label}\t{p.line or ''}")
        return "\n".join(rows) + "\n"

    def start_register(self, data: int = 1) -> int:
        return data if self.elided_node else data * self.flowchart.start


def compile_flowchart(chart: Flowchart, name: str = "compiled") -> CompiledProgram:
    """Emit ``(a*q)/(b*p)`` per arrow, ordered by decreasing denominator.

    The order is a greedy merge of the per-node arrow queues: the head with
    the largest denominator goes next, ties broken by emission order, so each
    node's own priority order is never disturbed.
    """
    elide = len(chart.nodes) == 1
    queues: list[list[tuple[int, int, int, Arrow]]] = []
    order = 0
    for node in chart.nodes:
        queue = []
        for arrow in node.arrows:
            if elide:
                num, den = arrow.num, arrow.den
            else:
                num, den = arrow.num * arrow.target, arrow.den * arrow.source
                g = gcd(num, den)
                shared = [p for p in sorted(chart.node_primes) if g % p == 0]
                if shared:
                    raise FlowchartError(
                        "REDUCIBLE_EMISSION",
                        f"{arrow.source} -> {arrow.target} emits {num}/{den}, reducible by node prime {shared[0]}",
                        arrow.line,
                    )
            queue.append((num, den, order, arrow))
            order += 1
        queues.append(queue)

    # heap of queue heads keyed by (-denominator, emission order)
    heap = [(-q[0][1], q[0][2], qi) for qi, q in enumerate(queues) if q]
    heapq.heapify(heap)
    positions = [0] * len(queues)
    pairs, prov = [], []
    while heap:
        _, _, qi = heapq.heappop(heap)
        num, den, _, arrow = queues[qi][positions[qi]]
        prov.append(Provenance(len(pairs), arrow.source, arrow.target, arrow.num, arrow.den, arrow.line))
        pairs.append((num, den))
        positions[qi] += 1
        if positions[qi] < len(queues[qi]):
            head = queues[qi][positions[qi]]
            heapq.heappush(heap, (-head[1], head[2], qi))
    if not pairs:
        raise FlowchartError("SYNTAX", "flowchart has no arrows")
    program = Program.from_pairs(pairs, name=name, node_primes=frozenset(chart.node_primes))
    return CompiledProgram(program, tuple(prov), chart, elided_node=elide)


@dataclass(frozen=True)
class Annotation:
    fraction: str
    source: int | None
    target: int | None
    source_candidates: tuple[int, ...]
    target_candidates: tuple[int, ...]


def annotate(program: Program, node_primes: Iterable[int]) -> list[Annotation]:
    """Source/target node of each fraction, read off its prime factors.

    A side is ``None`` when no node prime, or more than one, divides it; the
    candidates are listed either way.
    """
    nodes = set(node_primes)
    out = []
    for instr, (nf, df) in zip(program, program.factorizations):
        src = tuple(sorted(p for p in df if p in nodes))
        tgt = tuple(sorted(p for p in nf if p in nodes))
        out.append(
            Annotation(
                str(instr),
                src[0] if len(src) == 1 else None,
                tgt[0] if len(tgt) == 1 else None,
                src,
                tgt,
            )
        )
    return out


def recover_arrows(program: Program, node_primes: Iterable[int]) -> list[tuple[int, int, int, int]]:
    """Invert compilation: ``(source, target, label_num, label_den)`` per fraction."""
    arrows = []
    for ann, instr in zip(annotate(program, node_primes), program):
        if ann.source is None or ann.target is None:
            raise ValueError(f"{instr} has no unique source and target node")
        arrows.append((ann.source, ann.target, instr.num // ann.target, instr.den // ann.source))
    return arrows


def interpret(chart: Flowchart, data: int = 1, max_steps: int = 1000) -> Iterator[tuple[int, int]]:
    """Walk the flowchart directly, yielding ``(node, data)`` after every move.

    The first state yielded is the start.  Stops when no arrow fires or after
    ``max_steps`` moves.
    """
    if data < 1:
        raise ValueError("data register must be positive")
    node = chart.start
    yield node, data
    for _ in range(max_steps):
        for arrow in chart.node(node).arrows:
            v = Fraction(data * arrow.num, arrow.den)
            if v.denominator == 1:
                node, data = arrow.target, v.numerator
                break
        else:
            return
        yield node, data


def data_primes(chart: Flowchart) -> list[int]:
    primes: set[int] = set()
    for a in chart.arrows():
        primes.update(factorize(a.num))
        primes.update(factorize(a.den))
    return sorted(primes - chart.node_primes)
