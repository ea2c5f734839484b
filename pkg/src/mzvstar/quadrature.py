"""Tanh-sinh (double-exponential) quadrature for the one-dimensional
integrals with logarithmic endpoint singularities, used as an independent
oracle against the finite-sum and symbolic closed forms.

The substitution x = tanh((pi/2) sinh t) makes the transformed integrand
decay doubly exponentially, so endpoint singularities like ln(1-x) or ln(x)
cost nothing.  Integrand callbacks receive, besides the abscissa, its
distances to both interval endpoints computed without cancellation; that is
what keeps ln(1-x) evaluable through the last few decades of nodes.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import mpmath
from mpmath import mp, mpf

from . import series, symbolic
from .core import (
    DEFAULT_PREC,
    GUARD_BITS,
    BigReal,
    DomainError,
    EvalResult,
    NonConvergenceError,
    VerdictRecord,
    working_prec,
)

MAX_LEVEL = 12
MIN_LEVEL = 3

#: integrand ids and their parameter names
INTEGRAND_KINDS = {
    "pow-log1m": ("n", "m", "x"),   # int_0^x t^(n-1) ln^m(1-t) dt
    "pow-log": ("n", "m", "x"),     # int_0^x t^n ln^m(t) dt
    "integral-i": ("m",),           # int_0^1 ln^m(1+t) ln(1-t)/(1+t) dt
    "integral-j": ("m", "x"),       # int_0^x ln^m(1+t)/t dt
    "li-kernel": ("m", "k"),        # int_0^1 ln^k(x) ln^(m+1)(1-x/2)/x dx
}


@dataclass(frozen=True)
class IntegrandSpec:
    """One member of the integral corpus, with validated parameters."""

    kind: str
    n: int = 0
    m: int = 0
    k: int = 0
    x: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        if self.kind not in INTEGRAND_KINDS:
            raise DomainError(f"unknown integrand kind {self.kind!r}")
        if self.kind == "pow-log1m":
            if self.n < 1 or self.m < 0 or not (-1 <= self.x < 1):
                raise DomainError("pow-log1m requires n >= 1, m >= 0, -1 <= x < 1")
        elif self.kind == "pow-log":
            if self.n < 0 or self.m < 0 or not (0 < self.x <= 1):
                raise DomainError("pow-log requires n >= 0, m >= 0, 0 < x <= 1")
        elif self.kind == "integral-i":
            if self.m < 0:
                raise DomainError("integral-i requires m >= 0")
        elif self.kind == "integral-j":
            if self.m < 1 or not (0 <= self.x <= 1):
                raise DomainError("integral-j requires m >= 1, 0 <= x <= 1")
        elif self.kind == "li-kernel":
            if self.m < 0 or self.k < 0:
                raise DomainError("li-kernel requires m >= 0, k >= 0")

    @property
    def label(self) -> str:
        parts = [self.kind]
        for name in INTEGRAND_KINDS[self.kind]:
            parts.append(f"{name}{getattr(self, name)}")
        return "/".join(parts)


# ---------------------------------------------------------------------------
# node tables, shared read-only per (precision, level)
# ---------------------------------------------------------------------------

_node_cache: dict[tuple[int, int], tuple] = {}
_node_lock = threading.Lock()


def _nodes(prec: int, level: int):
    """(u_j, w_j, delta_j) with u = tanh((pi/2) sinh(j h)), delta = 1 - u.

    Only nonnegative j is stored; the rule is symmetric.  The t-range is cut
    where the node weight is far below the working precision.
    """
    key = (prec, level)
    with _node_lock:
        hit = _node_cache.get(key)
    if hit is not None:
        return hit
    with working_prec(prec + GUARD_BITS):
        h = mpf(1) / 2 ** level
        tmax = mpmath.asinh((prec + 16) * mpmath.log(2) / mp.pi) + mpf(1) / 2
        pi2 = mp.pi / 2
        out = []
        j = 0
        while True:
            t = j * h
            if t > tmax:
                break
            sh = pi2 * mpmath.sinh(t)
            u = mpmath.tanh(sh)
            e = mpmath.exp(-2 * sh)
            delta = 2 * e / (1 + e)
            w = pi2 * mpmath.cosh(t) / mpmath.cosh(sh) ** 2
            out.append((u, w, delta))
            j += 1
        table = (tuple(out), h)
    with _node_lock:
        _node_cache.setdefault(key, table)
    return table


Integrand = Callable[[BigReal, BigReal, BigReal], BigReal]


def _tanh_sinh(f: Integrand, a: BigReal, b: BigReal, prec: int,
               record: Optional[list] = None) -> tuple[BigReal, BigReal, int]:
    """Level-doubled tanh-sinh on [a, b]; f(x, x - a, b - x)."""
    half = (b - a) / 2
    mid = (a + b) / 2
    width = b - a
    target = mpf(2) ** (24 - prec)
    prev = None
    evals = 0
    for level in range(MIN_LEVEL, MAX_LEVEL + 1):
        table, h = _nodes(prec, level)
        s = mpf(0)
        for j, (u, w, delta) in enumerate(table):
            dd = half * delta
            s += w * f(mid + half * u, width - dd, dd)
            evals += 1
            if j:
                s += w * f(mid - half * u, dd, width - dd)
                evals += 1
        value = half * h * s
        if prev is not None:
            err = abs(value - prev)
            if record is not None:
                record.append(value)
            if err < target:
                return value, err, evals
        elif record is not None:
            record.append(value)
        prev = value
    if err > mpf(2) ** (-24):
        raise NonConvergenceError(
            f"tanh-sinh level cap {MAX_LEVEL} reached with error {mpmath.nstr(err, 5)}"
        )
    return value, err, evals


def _build_integrand(spec: IntegrandSpec, prec: int):
    """(f, a, b, orientation) for a spec; orientation -1 flips [x,0] to [0,x]."""
    with working_prec(prec + GUARD_BITS):
        xv = mpf(spec.x.numerator) / spec.x.denominator
        n, m, k = spec.n, spec.m, spec.k
        if spec.kind == "pow-log1m":
            def f(t, da, db):
                return t ** (n - 1) * mpmath.log1p(-t) ** m
            if xv < 0:
                return f, xv, mpf(0), -1
            return f, mpf(0), xv, 1
        if spec.kind == "pow-log":
            def f(t, da, db):
                return da ** n * mpmath.log(da) ** m
            return f, mpf(0), xv, 1
        if spec.kind == "integral-i":
            def f(t, da, db):
                return mpmath.log1p(t) ** m * mpmath.log(db) / (1 + t)
            return f, mpf(0), mpf(1), 1
        if spec.kind == "integral-j":
            def f(t, da, db):
                return mpmath.log1p(da) ** m / da
            return f, mpf(0), xv, 1
        # li-kernel
        def f(t, da, db):
            return mpmath.log(da) ** k * mpmath.log1p(-da / 2) ** (m + 1) / da
        return f, mpf(0), mpf(1), 1


def integrate(spec: IntegrandSpec, prec: int = DEFAULT_PREC,
              record: Optional[list] = None) -> EvalResult:
    """Tanh-sinh value of the spec'd integral with level-doubling error."""
    f, a, b, orient = _build_integrand(spec, prec)
    if a == b:
        return EvalResult(mpf(0), mpf(0), "quadrature", 0)
    with working_prec(prec + GUARD_BITS):
        value, err, evals = _tanh_sinh(f, a, b, prec, record)
    with working_prec(prec):
        return EvalResult(+(orient * value), +err, "quadrature", evals)


# ---------------------------------------------------------------------------
# closed-form counterparts
# ---------------------------------------------------------------------------

def b1_closed(n: int, m: int, x, prec: int = DEFAULT_PREC) -> BigReal:
    """Finite-sum value of int_0^x t^n ln^m(t) dt:

    sum_{l=0}^{m} l! C(m,l) (-1)^l / (n+1)^(l+1) * x^(n+1) * ln^(m-l)(x).
    """
    import math as _math

    if n < 0 or m < 0:
        raise DomainError("b1_closed requires n >= 0, m >= 0")
    with working_prec(prec + GUARD_BITS):
        if isinstance(x, Fraction):
            xv = mpf(x.numerator) / x.denominator
        else:
            xv = mpf(x)
        if not (0 < xv <= 1):
            raise DomainError("b1_closed requires 0 < x <= 1")
        lnx = mpmath.log(xv)
        total = mpf(0)
        for l in range(m + 1):
            term = (_math.factorial(l) * _math.comb(m, l) * mpf(-1) ** l
                    / mpf(n + 1) ** (l + 1) * xv ** (n + 1))
            if m - l:
                term *= lnx ** (m - l)
            total += term
        value = total
    with working_prec(prec):
        return +value


def _counterpart(spec: IntegrandSpec, prec: int) -> tuple[BigReal, BigReal, str]:
    """(value, err, method tag) of the non-quadrature side of a lemma check."""
    import math as _math

    if spec.kind == "pow-log1m":
        v = series.J_closed(spec.n, spec.m, spec.x, prec)
        return v, mpf(2) ** (24 - prec) * (1 + abs(v)), "finite-sum"
    if spec.kind == "pow-log":
        v = b1_closed(spec.n, spec.m, spec.x, prec)
        return v, mpf(2) ** (24 - prec) * (1 + abs(v)), "finite-sum"
    if spec.kind == "integral-i":
        r = symbolic.expr_eval(symbolic.closed_form(symbolic.Family.INTEGRAL_I, spec.m), prec)
        return r.value, r.err, "symbolic"
    if spec.kind == "integral-j":
        if spec.x != 1:
            raise DomainError("integral-j has a symbolic counterpart only at x = 1")
        r = symbolic.expr_eval(symbolic.closed_form(symbolic.Family.INTEGRAL_J, spec.m), prec)
        return r.value, r.err, "symbolic"
    # li-kernel: (-1)^(m+k+1) (m+1)! k! Li_{k+2,{1}_m}(1/2)
    r = series.eval_mpl_half([spec.k + 2] + [1] * spec.m, prec)
    scale = mpf(-1) ** (spec.m + spec.k + 1) * _math.factorial(spec.m + 1) * _math.factorial(spec.k)
    return scale * r.value, abs(scale) * r.err, "geometric"


def check_lemma(spec: IntegrandSpec, prec: int = DEFAULT_PREC,
                tolerance: float = 1e-8) -> VerdictRecord:
    """Compare quadrature against the integral's closed-form/series side.

    Passes at max(combined error estimates, ``tolerance``).
    """
    t0 = time.perf_counter()
    quad = integrate(spec, prec)
    with working_prec(prec + GUARD_BITS):
        rhs, rhs_err, tag = _counterpart(spec, prec)
        record = VerdictRecord.judge(
            case_id=f"lemma/{spec.label}",
            suite="lemmas",
            lhs=quad.value,
            lhs_err=quad.err,
            rhs=rhs,
            rhs_err=rhs_err,
            tolerance=mpf(tolerance),
            ms=(time.perf_counter() - t0) * 1000.0,
            note=f"quadrature vs {tag}",
        )
    return record
