"""Exact-arithmetic oracles for the truncated products and Heron's iteration.

Two truncations are modelled:

* ``CATALAN_SQRT2``: ``sqrt2_E = (2^2/(1*3)) (6^2/(5*7)) ... ((E-4)^2/((E-5)(E-3))) * E/(E-1)``
  for ``E = 2 (mod 4)``.
* ``WALLIS_PI``: ``pi_E = 2*E*(E-2)^2*...*2^2 / ((E-1)^2*(E-3)^2*...*1^2)`` for even ``E >= 4``.

Small ``E`` are evaluated by exact integer products.  When the products get
too large to build (the digit index ``n`` forces ``E`` near ``10^n``), the
digit is read off a certified rational enclosure derived from the tail of the
infinite product instead; see :func:`truncation_enclosure`.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from gmpy2 import mpz

from .numerics import (
    QuadraticRational,
    SQRT2,
    floor_digit,
    pi_digit_reference,
    pi_enclosure,
    sqrt2_digit_reference,
)

__all__ = [
    "Kind",
    "Truncation",
    "OracleError",
    "ParityError",
    "AccuracyError",
    "ResourceLimitError",
    "CertificationError",
    "CheckResult",
    "NewtonIterate",
    "catalan_truncation",
    "wallis_truncation",
    "truncation",
    "truncation_digit",
    "truncation_enclosure",
    "minimal_E",
    "accuracy_ok",
    "bracketing_check",
    "bound_check",
    "non_integrality_check",
    "mod4_recurrence_check",
    "mahler_check",
    "newton_iterate",
    "newton_iterate_exact",
    "heron_contraction_check",
    "newton_digit",
    "newton_digit_materialized",
    "sqrt2_newton_enclosure",
    "epsilon_chain",
    "phase1_E_bound",
    "reference_digit",
]


class Kind(enum.Enum):
    CATALAN_SQRT2 = "catalan"
    WALLIS_PI = "wallis"


class OracleError(Exception):
    pass


class ParityError(OracleError, ValueError):
    pass


class AccuracyError(OracleError, ValueError):
    pass


class ResourceLimitError(OracleError):
    """The exact object asked for is too large to materialize."""


class CertificationError(OracleError):
    """A certified enclosure straddles a digit boundary."""


# Exact products beyond this size are refused; digits fall back to enclosures.
MAX_EXACT_E = 40_000


def _prod(values) -> int:
    """Balanced product tree; linear accumulation is quadratic on big ints."""
    items = [mpz(v) for v in values]
    if not items:
        return 1
    while len(items) > 1:
        paired = [items[i] * items[i + 1] for i in range(0, len(items) - 1, 2)]
        if len(items) % 2:
            paired.append(items[-1])
        items = paired
    return int(items[0])


def _check_parity(kind: Kind, E: int) -> None:
    if kind is Kind.CATALAN_SQRT2:
        if E % 4 != 2 or E < 6:
            raise ParityError(f"catalan truncation needs E = 2 (mod 4) and E >= 6, got {E}")
    elif E % 2 or E < 4:
        raise ParityError(f"wallis truncation needs even E >= 4, got {E}")


@dataclass(frozen=True)
class Truncation:
    """A truncated product; ``N`` and ``D`` are the unreduced structural forms."""

    kind: Kind
    E: int

    def __post_init__(self) -> None:
        _check_parity(self.kind, self.E)

    @property
    def exact_feasible(self) -> bool:
        return self.E <= MAX_EXACT_E

    def _require_exact(self) -> None:
        if not self.exact_feasible:
            raise ResourceLimitError(f"E={self.E} exceeds the exact product limit {MAX_EXACT_E}")

    @cached_property
    def N(self) -> int:
        self._require_exact()
        E = self.E
        if self.kind is Kind.CATALAN_SQRT2:
            return _prod([k * k for k in range(2, E - 3, 4)] + [E])
        return 2 * E * _prod(k * k for k in range(2, E - 1, 2))

    @cached_property
    def D(self) -> int:
        self._require_exact()
        E = self.E
        if self.kind is Kind.CATALAN_SQRT2:
            return _prod([k * (k + 2) for k in range(1, E - 4, 4)] + [E - 1])
        return _prod(k * k for k in range(1, E, 2))

    @property
    def value(self) -> Fraction:
        return Fraction(self.N, self.D)

    def factorwise_value(self) -> Fraction:
        """Product of the individually reduced factors, an independent expansion."""
        self._require_exact()
        E = self.E
        v = Fraction(1)
        if self.kind is Kind.CATALAN_SQRT2:
            for k in range(2, E - 3, 4):
                v *= Fraction(k * k, (k - 1) * (k + 1))
            return v * Fraction(E, E - 1)
        # pi_E = 2 * prod_{k<m} (2k)^2/((2k-1)(2k+1)) * 2m/(2m-1) with E = 2m
        m = E // 2
        for k in range(1, m):
            v *= Fraction(4 * k * k, (2 * k - 1) * (2 * k + 1))
        return 2 * v * Fraction(E, E - 1)

    @property
    def tilde_factor(self) -> Fraction:
        """Scale taking the truncation to its lower bracket."""
        if self.kind is Kind.CATALAN_SQRT2:
            return Fraction(self.E, self.E + 2)
        return Fraction(self.E, self.E + 1)


def catalan_truncation(E: int) -> Truncation:
    return Truncation(Kind.CATALAN_SQRT2, E)


def wallis_truncation(E: int) -> Truncation:
    return Truncation(Kind.WALLIS_PI, E)


def truncation(kind: Kind | str, E: int) -> Truncation:
    return Truncation(_kind(kind), E)


def _kind(kind: Kind | str) -> Kind:
    if isinstance(kind, Kind):
        return kind
    key = kind.lower()
    for k in Kind:
        if key in (k.value, k.name.lower()):
            return k
    raise ValueError(f"unknown truncation kind {kind!r}")


# -- certified constants ----------------------------------------------------


@dataclass(frozen=True)
class NewtonIterate:
    k: int
    p: int
    q: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.p, self.q)


# guard for materializing iterates: x_k has about 0.38 * 2^(k-1) decimal digits
MAX_ITERATE_BITS = 1 << 28


def _iterates(k: int, max_bits: int):
    """Yield (p, q) as mpz for x_1 .. x_k."""
    if k < 1:
        raise ValueError("k must be >= 1")
    p, q = mpz(1), mpz(1)
    yield p, q
    for i in range(1, k):
        if 2 * p.bit_length() > max_bits:
            raise ResourceLimitError(f"x_{k} is too large to materialize (x_{i} already has {p.bit_length()} bits)")
        # gcd(p, q) = 1 with p odd makes p^2 + 2q^2 odd and coprime to 2pq, so
        # the update is already in lowest terms; the parity assert carries that
        # induction and replaces a gcd as expensive as the update itself
        p, q = p * p + 2 * q * q, 2 * p * q
        assert p & 1, "Heron iterate lost its odd numerator"
        yield p, q


def newton_iterate_exact(k: int, *, max_bits: int = MAX_ITERATE_BITS) -> NewtonIterate:
    """x_1 = 1/1, x_{k+1} = (p^2 + 2q^2)/(2pq), reduced after every update."""
    *_, (p, q) = _iterates(k, max_bits)
    return NewtonIterate(k, int(p), int(q))


@lru_cache(maxsize=64)
def newton_iterate(k: int) -> NewtonIterate:
    return newton_iterate_exact(k)


def _newton_bracket(k: int) -> tuple[Fraction, Fraction]:
    """(2/x_k, x_k): for k >= 2 the iterate overshoots, so sqrt 2 lies strictly inside."""
    x = newton_iterate(max(k, 2)).value
    return 2 / x, x


def sqrt2_newton_enclosure(digits: int) -> tuple[Fraction, Fraction]:
    """Rational enclosure of sqrt 2 of width < 10^-digits from Heron brackets.

    Deliberately independent of integer square roots so it can check them.
    """
    k = 2
    while True:
        lo, hi = _newton_bracket(k)
        if (hi - lo) * 10**digits < 1:
            return lo, hi
        k += 1


# -- accuracy precondition and minimal E --------------------------------------


def accuracy_ok(kind: Kind | str, E: int, n: int) -> bool:
    """Error bound below 10^-n: 2 sqrt2/E (catalan) or pi/E (wallis)."""
    kind = _kind(kind)
    if kind is Kind.CATALAN_SQRT2:
        return E * E > 8 * 10 ** (2 * n)
    digits = 10 + len(str(E))
    while True:
        lo, hi = pi_enclosure(digits)
        if E > hi * 10**n:
            return True
        if E <= lo * 10**n:
            return False
        digits *= 2


def minimal_E(kind: Kind | str, n: int) -> int:
    """Smallest valid E whose error bound is below 10^-n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    kind = _kind(kind)
    if kind is Kind.CATALAN_SQRT2:
        from math import isqrt

        E = max(6, isqrt(8 * 10 ** (2 * n)) + 1)
        while E % 4 != 2:
            E += 1
        return E
    # pi * 10^n is irrational, so its floor is pinned down by a tight enclosure
    lo, hi = pi_enclosure(n + 10)
    f = int(lo * 10**n)
    assert f == int(hi * 10**n)
    E = max(4, f + 1)
    return E + (E % 2)


def phase1_E_bound(n: int) -> str:
    """The conservative phase-1 size 4*2^(10^n), described rather than built."""
    return f"4*2^{10**n}"


# -- certified enclosures for large E ------------------------------------------


def _exp_neg_bounds(lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Bounds on exp(-x) for x in [lo, hi], 0 <= lo <= hi <= 1."""
    # 1 - x <= exp(-x) <= 1 - x + x^2/2
    return 1 - hi, 1 - lo + lo * lo / 2


def _log1p_bounds(t: Fraction) -> tuple[Fraction, Fraction]:
    """t - t^2/2 <= log(1+t) <= t - t^2/2 + t^3/3 for 0 <= t <= 1."""
    base = t - t * t / 2
    return base, base + t**3 / 3


def _log_tail_bounds(kind: Kind, E: int) -> tuple[Fraction, Fraction]:
    """Bounds on log of the omitted tail product T with constant = partial * T."""
    if kind is Kind.WALLIS_PI:
        m = E // 2
        # tail = prod_{k>m} (1 + y_k), y_k = 1/(4k^2-1); sum y_k telescopes to 1/(4m+2)
        upper = Fraction(1, 4 * m + 2)
        lower = upper - Fraction(1, 54 * m**3)
        return lower, upper
    K = (E - 2) // 4
    # tail = prod_{k>=K} (1 + g(k)), g(x) = 1/((4x+1)(4x+3)), convex and decreasing:
    # int_K^inf g <= sum_{k>=K} g(k) <= int_{K-1/2}^inf g, with int_a^inf g = log((4a+3)/(4a+1))/8
    s_lo = _log1p_bounds(Fraction(2, 4 * K + 1))[0] / 8
    s_hi = _log1p_bounds(Fraction(2, 4 * K - 1))[1] / 8
    # log(1+g) >= g - g^2/2 and sum_{k>=K} g^2 <= sum 1/(256 k^4) <= 1/(192 K^3) + 1/(256 K^4)
    sq = Fraction(1, 192 * K**3) + Fraction(1, 256 * K**4)
    return s_lo - sq / 2, s_hi


def truncation_enclosure(t: Truncation, digits: int) -> tuple[Fraction, Fraction]:
    """Certified rational bounds on the truncation without building N or D.

    The truncation is rewritten through the omitted tail ``T`` of the infinite
    product as ``constant * c_E / T`` with ``c_E = 1 + 1/E`` (wallis) or
    ``E/(E-1)`` (catalan), and ``log T`` is bracketed in closed form.
    """
    kind, E = t.kind, t.E
    if kind is Kind.WALLIS_PI:
        c_lo, c_hi = pi_enclosure(digits)
        scale = 1 + Fraction(1, E)
    else:
        c_lo, c_hi = sqrt2_newton_enclosure(digits)
        scale = Fraction(E, E - 1)
    l_lo, l_hi = _log_tail_bounds(kind, E)
    inv_lo, inv_hi = _exp_neg_bounds(l_lo, l_hi)
    return c_lo * scale * inv_lo, c_hi * scale * inv_hi


# -- digits -------------------------------------------------------------------


def truncation_digit(t: Truncation, n: int, *, checked: bool = True) -> int:
    """floor(10^n * N_E/D_E) mod 10.

    Exact divmod when the products are buildable, otherwise a certified
    enclosure (raises :class:`CertificationError` if it cannot decide).
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if checked and not accuracy_ok(t.kind, t.E, n):
        raise AccuracyError(f"{t.kind.name} E={t.E} is not accurate to 10^-{n}")
    if t.exact_feasible:
        return (10**n * t.N // t.D) % 10
    digits = n + 2 * len(str(t.E)) + 10
    lo, hi = truncation_enclosure(t, digits)
    scale = 10**n
    if lo.numerator * scale // lo.denominator != hi.numerator * scale // hi.denominator:
        raise CertificationError(f"enclosure of {t.kind.name} E={t.E} straddles a digit boundary at n={n}")
    return floor_digit(lo, n)


def reference_digit(kind: Kind | str, n: int) -> int:
    kind = _kind(kind)
    return sqrt2_digit_reference(n) if kind is Kind.CATALAN_SQRT2 else pi_digit_reference(n)


# -- checks ---------------------------------------------------------------------


@dataclass
class CheckResult:
    """One verification record: ``witnesses`` holds decimal strings."""

    check: str
    passed: bool
    kind: str | None = None
    E: int | None = None
    n: int | None = None
    k: int | None = None
    witnesses: dict[str, str] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed

    def record(self) -> dict:
        out = {"check": self.check, "pass": self.passed}
        for key in ("kind", "E", "n", "k"):
            v = getattr(self, key)
            if v is not None:
                out[key] = v
        out["witnesses"] = dict(self.witnesses)
        return out

    def line(self) -> str:
        where = " ".join(f"{key}={v}" for key, v in self.record().items() if key in ("kind", "E", "n", "k"))
        return f"{'PASS' if self.passed else 'FAIL'} {self.check} {where}".rstrip()

    def json(self) -> str:
        return json.dumps(self.record(), sort_keys=True)


def bracketing_check(t: Truncation) -> CheckResult:
    """Lower bracket < constant < truncation, decided exactly."""
    name = t.kind.name
    if t.kind is Kind.CATALAN_SQRT2:
        N, D, E = t.N, t.D, t.E
        upper = N * N - 2 * D * D
        lower = 2 * (E + 2) ** 2 * D * D - E * E * N * N
        return CheckResult(
            "bracketing",
            upper > 0 and lower > 0,
            kind=name,
            E=E,
            witnesses={"N^2-2D^2": _big(upper), "2(E+2)^2D^2-E^2N^2": _big(lower)},
        )
    lo, hi = pi_enclosure(60)
    v = t.value
    low = v * t.tilde_factor
    ok_hi = v > hi
    ok_lo = low < lo
    return CheckResult(
        "bracketing",
        ok_hi and ok_lo,
        kind=name,
        E=t.E,
        witnesses={
            "pi_E-pi_hi": _dec(v - hi),
            "pi_lo-pi_tilde": _dec(lo - low),
        },
    )


def bound_check(t: Truncation, n: int) -> CheckResult:
    """|constant - truncation| < 10^-n via the exact bracket (cross-multiplied)."""
    if t.kind is Kind.CATALAN_SQRT2:
        ok = bracketing_check(t).passed and t.E * t.E > 8 * 10 ** (2 * n)
    else:
        ok = bracketing_check(t).passed and accuracy_ok(t.kind, t.E, n)
    return CheckResult("error-bound", ok, kind=t.kind.name, E=t.E, n=n)


def non_integrality_check(t: Truncation, n: int) -> CheckResult:
    """10^n * N/D is not an integer: the reduced denominator does not divide 10^n."""
    v = t.value
    q = v.denominator
    rem = (10**n * v.numerator) % q
    return CheckResult(
        "non-integrality",
        rem != 0,
        kind=t.kind.name,
        E=t.E,
        n=n,
        witnesses={"reduced_denominator": _big(q), "remainder": _big(rem)},
    )


def mod4_recurrence_check(j_max: int = 10**6) -> CheckResult:
    """Entering the square loop with r5 = 4j+2 exits with 4(2j+1)+2, again 2 mod 4."""
    bad = None
    for j in range(j_max + 1):
        e_in = 4 * j + 2
        e_out = 4 * (2 * j + 1) + 2
        # the loop doubles r5 and adds 2
        if e_out != 2 * e_in + 2 or e_out % 4 != 2:
            bad = j
            break
    return CheckResult("mod4-recurrence", bad is None, witnesses={"j_max": str(j_max), "first_bad": str(bad)})


def mahler_check(t: Truncation) -> CheckResult:
    """|pi - p/q| > q^-42 for the reduced wallis truncation p/q."""
    if t.kind is not Kind.WALLIS_PI:
        raise ValueError("the irrationality measure check applies to pi")
    v = t.value
    lo, hi = pi_enclosure(60)
    gap = v - hi  # v > pi, so |pi - v| >= v - hi
    ok = gap > 0 and gap * v.denominator**42 > 1
    return CheckResult("mahler", ok, kind=t.kind.name, E=t.E, witnesses={"gap_lower": _dec(gap)})


def _big(x: int) -> str:
    """Decimal string without the interpreter's digit cap for int -> str."""
    return mpz(x).digits(10)


def _dec(x: Fraction, digits: int = 30) -> str:
    """Decimal string of a rational, truncated toward zero."""
    sign = "-" if x < 0 else ""
    x = abs(x)
    whole = int(x)
    frac = int((x - whole) * 10**digits)
    return f"{sign}{whole}.{frac:0{digits}d}"


# -- Heron / Newton -------------------------------------------------------------


def heron_contraction_check(k: int, *, max_bits: int = MAX_ITERATE_BITS) -> CheckResult:
    """(x_{k+1} - sqrt2) * 2x_k == (x_k - sqrt2)^2 exactly, and x_k >= 1.

    Together these give eps_{k+1} = eps_k^2/(2 x_k) <= eps_k^2 / 2.  With
    x_k = p/q and x_{k+1} = P/Q both sides are scaled by Q*q^2 > 0 so the
    comparison runs in Z[sqrt2] on integer coefficients.  Small iterates are
    also compared in :class:`QuadraticRational`.  Raises
    :class:`ResourceLimitError` when x_{k+1} is too large to build.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    *_, (p, q), (P, Q) = _iterates(k + 1, max_bits)
    # (P - Q sqrt2) * 2pq  vs  (p - q sqrt2)^2 * Q
    lhs = (2 * p * q * P, -2 * p * q * Q)
    rhs = ((p * p + 2 * q * q) * Q, -2 * p * q * Q)
    identity = lhs == rhs
    if identity and P.bit_length() < 4096:
        x = QuadraticRational(Fraction(int(p), int(q)))
        y = QuadraticRational(Fraction(int(P), int(Q)))
        identity = (y - SQRT2) * (2 * x) == (x - SQRT2) * (x - SQRT2)
    at_least_one = p >= q
    return CheckResult(
        "contraction",
        identity and at_least_one,
        k=k,
        witnesses={"identity": str(identity), "x_k>=1": str(at_least_one), "bits": str(P.bit_length())},
    )


def newton_digit_materialized(n: int, *, max_bits: int = MAX_ITERATE_BITS) -> int:
    """Digit n of the iterate after 2n updates, built exactly (small n only)."""
    x = newton_iterate_exact(2 * n + 1, max_bits=max_bits)
    return (10**n * x.p // x.q) % 10


def newton_digit(n: int) -> int:
    """Digit n of x_{2n+1} (2n updates from x_1 = 1) without building it.

    For 2 <= K <= 2n+1 the iterates satisfy 2/x_K < sqrt2 < x_{2n+1} <= x_K, so
    when floor(10^n * 2/x_K) == floor(10^n * x_K) that common floor is also
    floor(10^n * x_{2n+1}).  K grows until the two floors agree.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    target = 2 * n + 1
    if target <= 7:
        return newton_digit_materialized(n)
    scale = 10**n
    for K in range(2, target + 1):
        lo, hi = _newton_bracket(K)
        a = lo.numerator * scale // lo.denominator
        b = hi.numerator * scale // hi.denominator
        if a == b or K == target:
            # at K == target the upper end is the iterate itself
            return b % 10
    raise AssertionError("unreachable")


def epsilon_chain(N_max: int) -> list[CheckResult]:
    """Exact test of eps_N < 2^(-3N) for N = 1..N_max, eps_N = |x_N - sqrt2|."""
    out = []
    for N in range(1, N_max + 1):
        x = QuadraticRational(newton_iterate(N).value)
        eps = abs(x - SQRT2)
        bound = Fraction(1, 2 ** (3 * N))
        holds = eps < bound
        out.append(
            CheckResult(
                "epsilon-chain",
                holds,
                k=N,
                witnesses={"eps": _dec_quadratic(eps), "bound": _dec(bound)},
            )
        )
    return out


def _dec_quadratic(x: QuadraticRational, digits: int = 30) -> str:
    lo, hi = sqrt2_newton_enclosure(digits + 5)
    b = Fraction(x.b)
    v = Fraction(x.a) + b * (lo if b >= 0 else hi)
    return _dec(v, digits)
