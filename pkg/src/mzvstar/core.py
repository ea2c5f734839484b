"""Shared domain types: signed index compositions, exact rationals, the
precision-parameterized real-number substrate, and evaluation records.

An index is a composition of signed integer exponents.  A negative entry -p
stands for an alternating ("barred") exponent: the corresponding summation
variable n contributes (-1)^n / n^p to each term.  The ``kind`` flag selects
between strictly decreasing summation (zeta) and weakly decreasing summation
(zeta-star).
"""

from __future__ import annotations

import math
import re
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence, Union

import mpmath
from mpmath import mp

# Exact rational coefficients.  fractions.Fraction already guarantees lowest
# terms and a positive denominator, which is all the invariants require.
Rational = Fraction

# Configurable-precision real.  All numeric routines accept a precision in
# bits and run inside ``working_prec``; mpmath rounds every operation to the
# active precision, so per-operation relative error is <= 2^(1-P).
BigReal = mpmath.mpf

DEFAULT_PREC = 192
MIN_PREC = 64

#: extra bits used internally by evaluators before rounding results back
GUARD_BITS = 32

STRICT = "strict"
STAR = "star"

_LOG10_2 = math.log10(2.0)


class MzvError(Exception):
    """Base class for all library errors."""


class IndexSyntaxError(MzvError, ValueError):
    """Malformed index text."""


class DomainError(MzvError, ValueError):
    """Argument outside the operation's domain."""


class DivergentIndexError(DomainError):
    """Evaluation requested for a non-admissible (divergent) index."""


class ResourceLimitError(MzvError, RuntimeError):
    """Exact-arithmetic request too large to honor."""


class NonConvergenceError(MzvError, RuntimeError):
    """An iterative scheme hit its cap without meeting its target."""


class SelfCheckError(MzvError, RuntimeError):
    """A built-in reduction rule failed its numeric self-check."""


class UnknownSuiteError(MzvError, ValueError):
    """Verification suite selector does not name a registered suite."""


@contextmanager
def working_prec(prec: int) -> Iterator[None]:
    """Run a block at ``prec`` bits of working precision."""
    if prec < MIN_PREC:
        raise DomainError(f"precision must be >= {MIN_PREC} bits, got {prec}")
    with mp.workprec(prec):
        yield


def bigreal(value: Union[int, float, str, Fraction, BigReal], prec: int = DEFAULT_PREC) -> BigReal:
    """Convert to BigReal at ``prec`` bits (exact up to one rounding)."""
    with working_prec(prec):
        if isinstance(value, Fraction):
            return mpmath.mpf(value.numerator) / value.denominator
        return +mpmath.mpf(value)


def to_decimal(x: BigReal, prec: int = DEFAULT_PREC, full: bool = False) -> str:
    """Decimal rendering of ``x``.

    The default drops four guard digits so every printed digit is
    trustworthy; ``full`` keeps enough digits for a bit-exact round trip
    through :func:`bigreal`.
    """
    digits = math.ceil(prec * _LOG10_2) + (5 if full else -4)
    return mpmath.nstr(x, max(digits, 3), strip_zeros=not full)


@dataclass(frozen=True)
class SignedIndex:
    """A composition of signed exponents plus the strict/star flag.

    ``entries`` holds (magnitude, sign) pairs with magnitude >= 1 and sign
    in {+1, -1}.  The empty composition is allowed and denotes the constant 1.
    """

    entries: tuple[tuple[int, int], ...]
    kind: str = STRICT

    def __post_init__(self) -> None:
        if self.kind not in (STRICT, STAR):
            raise DomainError(f"kind must be {STRICT!r} or {STAR!r}, got {self.kind!r}")
        for mag, sign in self.entries:
            if not (isinstance(mag, int) and mag >= 1):
                raise DomainError(f"entry magnitude must be a positive integer, got {mag!r}")
            if sign not in (1, -1):
                raise DomainError(f"entry sign must be +1 or -1, got {sign!r}")

    @classmethod
    def from_signed(cls, values: Sequence[int], kind: str = STRICT) -> "SignedIndex":
        """Build from signed integers; -p encodes a barred entry of weight p."""
        entries = []
        for v in values:
            if v == 0:
                raise DomainError("index entries must be nonzero integers")
            entries.append((abs(v), 1 if v > 0 else -1))
        return cls(tuple(entries), kind)

    @property
    def signed_values(self) -> tuple[int, ...]:
        return tuple(mag * sign for mag, sign in self.entries)

    @property
    def depth(self) -> int:
        return len(self.entries)

    @property
    def weight(self) -> int:
        return sum(mag for mag, _ in self.entries)

    @property
    def admissible(self) -> bool:
        """True iff the nested series converges (empty, barred lead, or lead > 1)."""
        if not self.entries:
            return True
        mag, sign = self.entries[0]
        return sign == -1 or mag > 1

    @property
    def text(self) -> str:
        """Canonical text form, bit-exact for cache keys and reports."""
        head = "zeta" if self.kind == STRICT else "zetastar"
        return f"{head}({','.join(str(v) for v in self.signed_values)})"

    def __str__(self) -> str:
        return self.text


_INDEX_RE = re.compile(r"^(zeta|zetastar)\(((?:-?\d+(?:,-?\d+)*)?)\)$")


def parse_index(text: str) -> SignedIndex:
    """Parse ``zeta(s1,...,sk)`` / ``zetastar(s1,...,sk)``.

    Negative integers denote barred entries; zero entries are rejected.
    """
    m = _INDEX_RE.match(text)
    if m is None:
        raise IndexSyntaxError(f"cannot parse index {text!r}")
    head, body = m.groups()
    values = [int(tok) for tok in body.split(",")] if body else []
    kind = STRICT if head == "zeta" else STAR
    return SignedIndex.from_signed(values, kind)


def format_index(index: SignedIndex) -> str:
    return index.text


def index_stats(index: SignedIndex) -> tuple[int, int, bool]:
    """(depth, weight, admissible) of an index."""
    return index.depth, index.weight, index.admissible


@dataclass(frozen=True)
class EvalResult:
    """Numeric value with an error estimate and method metadata.

    ``err`` is a nonnegative absolute-error estimate.  For geometrically
    convergent series (method ``geometric``) it is a rigorous bound of twice
    the first omitted term; for the other methods it is a conservative
    heuristic estimate.
    """

    value: BigReal
    err: BigReal
    method: str
    terms_used: int

    def __post_init__(self) -> None:
        if self.err < 0:
            raise DomainError("error estimate must be nonnegative")
        if self.terms_used < 0:
            raise DomainError("terms_used must be nonnegative")

    def agrees_with(self, other: "EvalResult", tolerance: BigReal = None) -> bool:
        gap = abs(self.value - other.value)
        allowed = self.err + other.err
        if tolerance is not None:
            allowed = max(allowed, tolerance)
        return gap <= allowed


@dataclass(frozen=True)
class VerdictRecord:
    """Outcome of checking one registered identity.

    ``passed`` holds exactly when |lhs - rhs| <= max(tolerance,
    lhs_err + rhs_err).
    """

    case_id: str
    suite: str
    lhs: BigReal
    lhs_err: BigReal
    rhs: BigReal
    rhs_err: BigReal
    diff: BigReal
    tolerance: BigReal
    passed: bool
    ms: float
    note: str = ""

    @classmethod
    def judge(cls, case_id: str, suite: str, lhs, lhs_err, rhs, rhs_err,
              tolerance, ms: float, note: str = "") -> "VerdictRecord":
        diff = abs(lhs - rhs)
        allowed = max(mpmath.mpf(tolerance), lhs_err + rhs_err)
        return cls(case_id, suite, lhs, lhs_err, rhs, rhs_err, diff,
                   mpmath.mpf(tolerance), bool(diff <= allowed), ms, note)
