"""Random program and flowchart generators shared by the fuzz tests and benchmarks."""

from __future__ import annotations

import random

from .vm.program import Program

SMALL_PRIMES = (2, 3, 5, 7, 11, 13)


def _random_product(rng: random.Random, primes, max_exp: int) -> int:
    v = 1
    for p in primes:
        if rng.random() < 0.45:
            v *= p ** rng.randint(1, max_exp)
    return v


def random_program(rng: random.Random, max_fractions: int = 8, primes=SMALL_PRIMES, max_exp: int = 3) -> Program:
    """A program of 1..max_fractions fractions over ``primes``.

    Fractions are kept unreduced roughly a third of the time so the engines'
    reduced view gets exercised too.
    """
    pairs = []
    for _ in range(rng.randint(1, max_fractions)):
        num = _random_product(rng, primes, max_exp)
        den = _random_product(rng, primes, max_exp)
        if den == 1 and rng.random() < 0.8:
            den = rng.choice(primes)
        if rng.random() < 0.3:
            shared = rng.choice(primes)
            num, den = num * shared, den * shared
        pairs.append((num, den))
    return Program.from_pairs(pairs, name="fuzz")


def random_start(rng: random.Random, max_bits: int = 30) -> int:
    """Start value <= 2**max_bits, biased toward smooth numbers over the fuzz primes."""
    if rng.random() < 0.5:
        return rng.randint(1, 1 << max_bits)
    v = 1
    for p in SMALL_PRIMES:
        v *= p ** rng.randint(0, 6)
        if v > 1 << max_bits:
            v //= p ** 6
    return max(v, 1)


NODE_POOL = (17, 19, 23, 29, 31, 37, 41)
DATA_PRIMES = (2, 3, 5, 7, 11, 13)


def random_flowchart_text(rng: random.Random, max_nodes: int = 4, max_arrows: int = 3) -> str:
    """DSL text for a small random flowchart with labels over ``DATA_PRIMES``.

    Multi-node charts avoid self-loops, which would compile to fractions
    reducible by their own node prime.
    """
    nodes = rng.sample(NODE_POOL, rng.randint(1, max_nodes))
    lines = [f"start {rng.choice(nodes)}"]
    for p in nodes:
        lines.append(f"node {p}:")
        targets = [q for q in nodes if q != p] or [p]
        for _ in range(rng.randint(1, max_arrows)):
            num = _random_product(rng, DATA_PRIMES, 2)
            den = _random_product(rng, DATA_PRIMES, 2)
            lines.append(f"    -> {rng.choice(targets)} * {num}/{den}")
    return "\n".join(lines) + "\n"


def random_data(rng: random.Random) -> int:
    v = 1
    for p in DATA_PRIMES:
        if rng.random() < 0.6:
            v *= p ** rng.randint(0, 4)
    return v


def simulation_mismatch(text: str, data: int, steps: int = 60) -> int | None:
    """First move at which the compiled program and the flowchart walk disagree.

    Returns ``None`` when the two agree for ``steps`` moves, or when both stop
    at the same place.
    """
    from .compiler import compile_flowchart, interpret, parse_flowchart
    from .vm import step

    chart = parse_flowchart(text)
    compiled = compile_flowchart(chart)
    r = compiled.start_register(data)
    trace = list(interpret(chart, data, steps))
    for i, (node, d) in enumerate(trace):
        if r != (d if compiled.elided_node else node * d):
            return i
        if i + 1 < len(trace):
            r = step(compiled.program, r)
            if r is None:
                return i + 1
    # the walk stopped early, so the program must halt too
    if len(trace) <= steps and step(compiled.program, r) is not None:
        return len(trace)
    return None
