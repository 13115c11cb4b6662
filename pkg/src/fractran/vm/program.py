"""Program text format, instructions, and the two register representations."""

from __future__ import annotations

import re
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import Iterable, Mapping

import gmpy2
from gmpy2 import mpz
from sympy import factorint

__all__ = [
    "Instruction",
    "Program",
    "FactoredRegister",
    "ProgramParseError",
    "ReducibleFractionWarning",
    "factorize",
    "parse_program",
    "parse_start",
    "format_factored",
]


class ProgramParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message)


class ReducibleFractionWarning(UserWarning):
    pass


def factorize(n: int) -> dict[int, int]:
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    return {int(p): int(e) for p, e in factorint(n).items()}


@dataclass(frozen=True, slots=True)
class Instruction:
    """One FRACTRAN fraction, kept exactly as written (never auto-reduced)."""

    num: int
    den: int

    def __post_init__(self) -> None:
        if self.num < 1 or self.den < 1:
            raise ValueError(f"fractions must be positive: {self.num}/{self.den}")

    @property
    def value(self) -> Fraction:
        return Fraction(self.num, self.den)

    def reduced(self) -> tuple[int, int]:
        g = gcd(self.num, self.den)
        return self.num // g, self.den // g

    @property
    def is_reduced(self) -> bool:
        return gcd(self.num, self.den) == 1

    def __str__(self) -> str:
        return f"{self.num}/{self.den}"


class FactoredRegister:
    """A register as prime exponents plus an inert cofactor.

    The cofactor holds every prime of the start value that no fraction
    mentions; such primes can never change, so they need no bookkeeping.
    """

    __slots__ = ("_exps", "cofactor")

    def __init__(self, exponents: Mapping[int, int] | None = None, cofactor: int = 1):
        exps = {}
        for p, e in (exponents or {}).items():
            if e < 0:
                raise ValueError(f"negative exponent for {p}")
            if e:
                exps[int(p)] = int(e)
        if cofactor < 1:
            raise ValueError("cofactor must be >= 1")
        self._exps = exps
        self.cofactor = int(cofactor)

    @classmethod
    def from_int(cls, value: int, basis: Iterable[int] = ()) -> "FactoredRegister":
        """Split ``value`` over ``basis``; anything left over becomes the cofactor."""
        if value < 1:
            raise ValueError("register values are positive integers")
        exps = {}
        rest = mpz(value)
        for p in basis:
            rest, e = gmpy2.remove(rest, p)
            if e:
                exps[p] = int(e)
        return cls(exps, int(rest))

    @classmethod
    def from_factorization(cls, value: int) -> "FactoredRegister":
        return cls(factorize(value))

    @property
    def exponents(self) -> dict[int, int]:
        return dict(self._exps)

    def exponent(self, p: int) -> int:
        return self._exps.get(p, 0)

    def __getitem__(self, p: int) -> int:
        return self._exps.get(p, 0)

    def primes(self) -> list[int]:
        return sorted(self._exps)

    @property
    def value(self) -> int:
        v = self.cofactor
        for p, e in self._exps.items():
            v *= p**e
        return v

    def restricted(self, primes: Iterable[int]) -> dict[int, int]:
        return {p: self._exps.get(p, 0) for p in primes}

    def __eq__(self, other) -> bool:
        if isinstance(other, FactoredRegister):
            if self.cofactor == other.cofactor:
                return self._exps == other._exps
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other
        return NotImplemented

    def __hash__(self) -> int:
        return hash((frozenset(self._exps.items()), self.cofactor))

    def __repr__(self) -> str:
        return f"FactoredRegister({format_factored(self)!r})"

    def __str__(self) -> str:
        return format_factored(self)


def format_factored(reg: FactoredRegister | Mapping[int, int]) -> str:
    """Render as ``2^3*3^4*89``; the empty product renders as ``1``."""
    if isinstance(reg, FactoredRegister):
        exps, cof = reg.exponents, reg.cofactor
    else:
        exps, cof = dict(reg), 1
    parts = [str(p) if e == 1 else f"{p}^{e}" for p, e in sorted(exps.items()) if e]
    if cof != 1:
        parts.append(str(cof))
    return "*".join(parts) if parts else "1"


_START_FACTOR = re.compile(r"^(\d+)(?:\s*(?:\^|\*\*)\s*(\d+))?$")


def parse_start(text: str) -> FactoredRegister:
    """Parse ``648`` or ``2^3*3^4*89`` (``**`` also accepted) into a register."""
    cleaned = text.strip().replace("_", "").replace(",", "")
    if not cleaned:
        raise ProgramParseError("empty start value")
    exps: dict[int, int] = {}
    cofactor = 1
    for token in re.split(r"\*(?!\*)", cleaned.replace("**", "^")):
        m = _START_FACTOR.match(token.strip())
        if m is None:
            raise ProgramParseError(f"bad start factor {token.strip()!r}")
        base = int(m.group(1))
        power = int(m.group(2)) if m.group(2) is not None else 1
        if base < 1:
            raise ProgramParseError("start value must be positive")
        if base == 1 or power == 0:
            continue
        if power == 1 and base.bit_length() > 64:
            # too large to factor cheaply; keep the untouched part opaque
            cofactor *= base
            continue
        for p, e in factorize(base).items():
            exps[p] = exps.get(p, 0) + e * power
    return FactoredRegister(exps, cofactor)


@dataclass(frozen=True)
class Program:
    """An ordered fraction list plus descriptive metadata."""

    instructions: tuple[Instruction, ...]
    name: str = "program"
    description: str = ""
    node_primes: frozenset[int] | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "instructions", tuple(self.instructions))
        if not self.instructions:
            raise ValueError("a program needs at least one fraction")

    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[int, int]], name: str = "program", **kw) -> "Program":
        return cls(tuple(Instruction(int(a), int(b)) for a, b in pairs), name=name, **kw)

    def __len__(self) -> int:
        return len(self.instructions)

    def __iter__(self):
        return iter(self.instructions)

    @cached_property
    def factorizations(self) -> tuple[tuple[dict[int, int], dict[int, int]], ...]:
        return tuple((factorize(f.num), factorize(f.den)) for f in self.instructions)

    @cached_property
    def prime_basis(self) -> tuple[int, ...]:
        primes: set[int] = set()
        for nf, df in self.factorizations:
            primes.update(nf)
            primes.update(df)
        return tuple(sorted(primes))

    @cached_property
    def reduced_pairs(self) -> tuple[tuple[int, int], ...]:
        return tuple(f.reduced() for f in self.instructions)

    @cached_property
    def exponent_rows(self) -> tuple[tuple[dict[int, int], dict[int, int]], ...]:
        """Per fraction: (required exponents, net exponent change), reduced view."""
        rows = []
        for nf, df in self.factorizations:
            delta = {p: nf.get(p, 0) - df.get(p, 0) for p in set(nf) | set(df)}
            need = {p: -d for p, d in delta.items() if d < 0}
            rows.append((need, {p: d for p, d in delta.items() if d}))
        return tuple(rows)

    def reducible(self) -> list[int]:
        return [i for i, f in enumerate(self.instructions) if not f.is_reduced]

    def lint(self) -> list[str]:
        """Warn (and report) fractions that are not in lowest terms."""
        notes = []
        for i in self.reducible():
            f = self.instructions[i]
            a, b = f.reduced()
            notes.append(f"fraction {i + 1} ({f}) reduces to {a}/{b}")
        for note in notes:
            warnings.warn(note, ReducibleFractionWarning, stacklevel=2)
        return notes

    def to_text(self, comments: Mapping[int, str] | None = None) -> str:
        lines = [f"# {self.name}"]
        if self.description:
            lines.extend(f"# {row}" for row in self.description.splitlines())
        for i, f in enumerate(self.instructions):
            note = comments.get(i) if comments else None
            lines.append(f"{f}  # {note}" if note else str(f))
        return "\n".join(lines) + "\n"


def parse_program(text: str, name: str = "program") -> Program:
    """Parse the line-oriented ``NUM/DEN  # comment`` format."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].strip()
        if not body:
            continue
        body = body.replace(",", "").replace("_", "")
        m = re.fullmatch(r"(\d+)\s*/\s*(\d+)", body)
        if m is None:
            raise ProgramParseError(f"malformed fraction {raw.strip()!r}", lineno)
        a, b = int(m.group(1)), int(m.group(2))
        if a == 0 or b == 0:
            raise ProgramParseError("fractions must be positive", lineno)
        pairs.append((a, b))
    if not pairs:
        raise ProgramParseError("program contains no fractions")
    return Program.from_pairs(pairs, name=name)
