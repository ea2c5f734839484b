"""Identity registry and verification harness.

Every identity the library implements is registered as an
:class:`IdentityCase` whose two sides are *evaluation plans*: small trees of
primitive evaluations (index series, multiple polylogarithms, symbolic
closed forms, quadrature, exact finite sums) combined by sums, products and
exact symbolic coefficients.  The two sides of a case never evaluate the
same object by the same method, so each record is a genuine cross-check of
two independent computation paths.

Suites
------
``euler``              2 zeta*(k,1) against the weighted zeta convolution
``star-bar1-ones``     zeta*(-1,{1}_m) = -Li_{m+1}(1/2)
``star-bar1``          zeta*(-1,{1}_m,-1) against its recurrence closed form
``star-2``             zeta*(2,{1}_m,-1) and zeta*(2,{1}_m) closed forms
``lemmas``             quadrature corpus against finite/symbolic forms
``stirling``           first-kind Stirling numbers against exact partial sums
``genfun``             truncated power series of ln-powers against closed sides
``mpl-mzv``            zeta(-1,{1}_m,-1,{1}_k) = +-Li_{k+2,{1}_m}(1/2)
``mzv-logsum``         the same values against the binomial ln(2) expansion
``li2-ones``           Li_{2,{1}_m}(1/2) and zeta(-1,{1}_m,-1) closed forms
``three-bar``          zeta(-1,{1}_m,-1,-1,{1}_k) recurrence plus worked values
``restricted-sum``     the two-sided restricted sums with head p+3
``restricted-sum-p0``  their p = 0 specialization on a wider grid
``double-two``         restricted sums for indices carrying two 2-entries
``bar-runs``           long runs of barred ones against multiple polylogs
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath
from mpmath import mpf

from . import quadrature, series, symbolic
from .core import (
    DEFAULT_PREC,
    GUARD_BITS,
    STAR,
    STRICT,
    BigReal,
    EvalResult,
    SignedIndex,
    UnknownSuiteError,
    VerdictRecord,
    parse_index,
    to_decimal,
    working_prec,
)
from .quadrature import IntegrandSpec
from .series import TruncationOptions, DEFAULT_OPTIONS
from .symbolic import ConstantExpr, Family

__version__ = "0.1.0"


# ---------------------------------------------------------------------------
# evaluation plans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IndexPlan:
    """Evaluate a zeta / zeta-star index by series."""

    text: str
    method: str = "auto"  # auto | direct | accelerated


@dataclass(frozen=True)
class MplPlan:
    """Evaluate Li_{s1,...,sk}(1/2) by geometric summation."""

    exponents: tuple[int, ...]


@dataclass(frozen=True)
class FamilyPlan:
    """Evaluate a closed-form family member symbolically."""

    family: Family
    params: tuple[int, ...]


@dataclass(frozen=True)
class ExprPlan:
    """Evaluate a fixed exact constant expression."""

    expr: ConstantExpr


@dataclass(frozen=True)
class QuadPlan:
    """Evaluate an integral by tanh-sinh quadrature."""

    spec: IntegrandSpec


@dataclass(frozen=True)
class JClosedPlan:
    """Finite nested-sum side of the power/log(1-t) integral."""

    n: int
    m: int
    x: Fraction


@dataclass(frozen=True)
class B1Plan:
    """Finite-sum side of the power/log(t) integral."""

    n: int
    m: int
    x: Fraction


@dataclass(frozen=True)
class ScalePlan:
    """Multiply a plan by an exact symbolic scalar (e.g. ln2^i / i!)."""

    coef: ConstantExpr
    plan: "Plan"


@dataclass(frozen=True)
class SumPlan:
    parts: tuple["Plan", ...]


@dataclass(frozen=True)
class ProdPlan:
    parts: tuple["Plan", ...]


@dataclass(frozen=True)
class StirlingRowPlan:
    """Row n of first-kind Stirling numbers via one of two exact routes."""

    n: int
    route: str  # "recurrence" | "partial-sums"


@dataclass(frozen=True)
class GenfunClosedPlan:
    """Closed side of a generating-function check at a rational point."""

    variant: str  # "ln-pow" | "c3" | "c4"
    k: int
    x: Fraction


@dataclass(frozen=True)
class GenfunSeriesPlan:
    """Truncated series side; its err field is the geometric tail bound."""

    variant: str
    k: int
    x: Fraction
    terms: int = 200


Plan = Union[IndexPlan, MplPlan, FamilyPlan, ExprPlan, QuadPlan, JClosedPlan,
             B1Plan, ScalePlan, SumPlan, ProdPlan, StirlingRowPlan,
             GenfunClosedPlan, GenfunSeriesPlan]


@dataclass(frozen=True)
class IdentityCase:
    """A registered identity: two independent evaluation plans plus metadata."""

    case_id: str
    suite: str
    lhs: Plan
    rhs: Plan
    tolerance: str  # decimal string; "0" means combined-error criterion only
    params: tuple[tuple[str, int], ...] = ()
    note: str = ""


# ---------------------------------------------------------------------------
# plan evaluation
# ---------------------------------------------------------------------------

_eval_cache: dict[tuple, EvalResult] = {}


def _resolved_method(plan: IndexPlan) -> str:
    if plan.method != "auto":
        return plan.method
    idx = parse_index(plan.text)
    if idx.depth == 0:
        return "direct"
    mag1, sign1 = idx.entries[0]
    if sign1 == -1 and not any(s == -1 for _, s in idx.entries[1:]):
        return "accelerated"
    return "direct"


def _eval_index_cached(plan: IndexPlan, opts: TruncationOptions, prec: int) -> EvalResult:
    method = _resolved_method(plan)
    key = (plan.text, method, opts.cutoff, opts.accel_terms,
           opts.richardson_levels, prec)
    hit = _eval_cache.get(key)
    if hit is not None:
        return hit
    idx = parse_index(plan.text)
    if method == "accelerated":
        res = series.eval_accelerated(idx, opts, prec)
    else:
        res = series.eval_direct(idx, opts, prec)
    _eval_cache[key] = res
    return res


def _stirling_row(n: int, route: str) -> list[int]:
    if route == "recurrence":
        return [series.stirling1(n, k) for k in range(n + 1)]
    fact = math.factorial(n - 1)
    row = [0]
    for k in range(1, n + 1):
        idx = SignedIndex.from_signed([1] * (k - 1), STRICT)
        val = fact * series.partial_sum(idx, n - 1, exact=True)
        assert val.denominator == 1
        row.append(int(val))
    return row


def _genfun_partials(variant: str, k: int, upto: int) -> dict[int, BigReal]:
    """Partial sums zeta_n(inner index) for n = 0..upto."""
    if variant == "ln-pow":
        entries = tuple([(1, 1)] * (k - 1))
    else:
        entries = tuple([(1, -1)] + [(1, 1)] * (k - 1))
    snap, _ = series._nested_pass_numeric(entries, False, upto,
                                          checkpoints=range(1, upto + 1))
    empty = mpf(1) if not entries else mpf(0)
    snap[0] = empty
    return snap


def _genfun_series(plan: GenfunSeriesPlan, prec: int) -> tuple[BigReal, BigReal]:
    k, x, n_terms = plan.k, plan.x, plan.terms
    with working_prec(prec + GUARD_BITS):
        xv = mpf(x.numerator) / x.denominator
        snap = _genfun_partials(plan.variant, k, n_terms)
        fact = math.factorial(k)
        sign_k = mpf(-1) ** k
        total = mpf(0)
        if plan.variant == "ln-pow":
            for n in range(1, n_terms + 1):
                total += xv ** n / n * snap[n - 1]
            nxt = abs(xv ** (n_terms + 1) / (n_terms + 1) * snap[n_terms])
        elif plan.variant == "c3":
            for n in range(1, n_terms + 1):
                total += snap[n - 1] * xv ** (n - 1)
            nxt = abs(snap[n_terms] * xv ** n_terms)
        else:  # c4
            for n in range(1, n_terms + 1):
                total += mpf(-1) ** (n - 1) * snap[n - 1] * xv ** (n - 1)
            nxt = abs(snap[n_terms] * xv ** n_terms)
        value = sign_k * fact * total
        bound = 2 * fact * nxt
        return value, bound


def _genfun_closed(plan: GenfunClosedPlan, prec: int) -> BigReal:
    with working_prec(prec + GUARD_BITS):
        xv = mpf(plan.x.numerator) / plan.x.denominator
        if plan.variant == "ln-pow":
            return mpmath.log1p(-xv) ** plan.k
        if plan.variant == "c3":
            return mpmath.log1p(xv) ** plan.k / (1 - xv)
        return mpmath.log1p(-xv) ** plan.k / (1 + xv)


def evaluate_plan(plan: Plan, opts: TruncationOptions, prec: int) -> tuple[BigReal, BigReal]:
    """(value, error estimate) of a plan at the given precision."""
    if isinstance(plan, IndexPlan):
        r = _eval_index_cached(plan, opts, prec)
        return r.value, r.err
    if isinstance(plan, MplPlan):
        r = series.eval_mpl_half(list(plan.exponents), prec)
        return r.value, r.err
    if isinstance(plan, FamilyPlan):
        r = symbolic.expr_eval(symbolic.closed_form(plan.family, *plan.params), prec)
        return r.value, r.err
    if isinstance(plan, ExprPlan):
        r = symbolic.expr_eval(plan.expr, prec)
        return r.value, r.err
    if isinstance(plan, QuadPlan):
        r = quadrature.integrate(plan.spec, prec)
        return r.value, r.err
    if isinstance(plan, JClosedPlan):
        v = series.J_closed(plan.n, plan.m, plan.x, prec)
        return v, mpf(2) ** (24 - prec) * (1 + abs(v))
    if isinstance(plan, B1Plan):
        v = quadrature.b1_closed(plan.n, plan.m, plan.x, prec)
        return v, mpf(2) ** (24 - prec) * (1 + abs(v))
    if isinstance(plan, ScalePlan):
        c = symbolic.expr_eval(plan.coef, prec)
        v, e = evaluate_plan(plan.plan, opts, prec)
        with working_prec(prec + GUARD_BITS):
            return c.value * v, abs(c.value) * e + abs(v) * c.err
    if isinstance(plan, SumPlan):
        with working_prec(prec + GUARD_BITS):
            total = mpf(0)
            err = mpf(0)
            for part in plan.parts:
                v, e = evaluate_plan(part, opts, prec)
                total += v
                err += e
            return total, err
    if isinstance(plan, ProdPlan):
        with working_prec(prec + GUARD_BITS):
            total = mpf(1)
            rel = mpf(0)
            for part in plan.parts:
                v, e = evaluate_plan(part, opts, prec)
                total *= v
                rel += e / abs(v) if v else mpf(1)
            return total, abs(total) * rel
    if isinstance(plan, StirlingRowPlan):
        row = _stirling_row(plan.n, plan.route)
        return mpf(sum(row)), mpf(0)
    if isinstance(plan, GenfunClosedPlan):
        v = _genfun_closed(plan, prec)
        return v, mpf(2) ** (24 - prec) * (1 + abs(v))
    if isinstance(plan, GenfunSeriesPlan):
        return _genfun_series(plan, prec)
    raise TypeError(f"unknown plan {plan!r}")


def plan_objects(plan: Plan) -> set[tuple[str, str]]:
    """(object, method) pairs a plan touches at its top level.

    Symbolic scalar coefficients are dressing, not objects, so ScalePlan
    only reports its wrapped plan.
    """
    if isinstance(plan, IndexPlan):
        return {(plan.text, _resolved_method(plan))}
    if isinstance(plan, MplPlan):
        return {("li(" + ",".join(map(str, plan.exponents)) + ")", "geometric")}
    if isinstance(plan, FamilyPlan):
        return {(f"family:{plan.family.value}{plan.params}", "symbolic")}
    if isinstance(plan, ExprPlan):
        return {(f"expr:{plan.expr.render()}", "symbolic")}
    if isinstance(plan, QuadPlan):
        return {(plan.spec.label, "quadrature")}
    if isinstance(plan, JClosedPlan):
        return {(f"jclosed/n{plan.n}m{plan.m}x{plan.x}", "finite-sum")}
    if isinstance(plan, B1Plan):
        return {(f"b1closed/n{plan.n}m{plan.m}x{plan.x}", "finite-sum")}
    if isinstance(plan, ScalePlan):
        return plan_objects(plan.plan)
    if isinstance(plan, (SumPlan, ProdPlan)):
        out: set[tuple[str, str]] = set()
        for part in plan.parts:
            out |= plan_objects(part)
        return out
    if isinstance(plan, StirlingRowPlan):
        return {(f"stirling-row-{plan.n}", plan.route)}
    if isinstance(plan, GenfunClosedPlan):
        return {(f"genfun/{plan.variant}/k{plan.k}", "closed-log")}
    if isinstance(plan, GenfunSeriesPlan):
        return {(f"genfun/{plan.variant}/k{plan.k}", "series")}
    raise TypeError(f"unknown plan {plan!r}")


def audit_independence(case: IdentityCase) -> bool:
    """True iff no object is evaluated by the same method on both sides."""
    lhs = plan_objects(case.lhs)
    rhs = plan_objects(case.rhs)
    return not (lhs & rhs)


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegistryBounds:
    """Grid bounds; the defaults complete in a few minutes at 192 bits."""

    euler_k_max: int = 8
    star_ones_m_max: int = 6
    star_rec_m_max: int = 4
    lemma_n_max: int = 5
    lemma_m_max: int = 4
    powlog_n_max: int = 4
    powlog_m_max: int = 4
    integral_i_m_max: int = 5
    integral_j_m_max: int = 5
    li_kernel_max: int = 2
    stirling_n_max: int = 30
    mpl_mzv_max: int = 3
    logsum_max: int = 2
    li2_ones_m_max: int = 5
    three_bar_max: int = 2
    restricted_max: int = 2
    restricted_p0_max: int = 3
    double_two_max: int = 1
    bar_run_p: tuple[int, ...] = (1, 2)
    bar_run_k_max: int = 2
    bar_run_m_max: int = 1


DEFAULT_BOUNDS = RegistryBounds()

_LN2E = ConstantExpr.symbol(symbolic.LN2)


def _frac_expr(value) -> ConstantExpr:
    return ConstantExpr.rational(Fraction(value))


def _ln2_coef(i: int, scale=Fraction(1)) -> ConstantExpr:
    return (_LN2E ** i).scale(Fraction(scale)) if i else _frac_expr(scale)


def _index_text(values: Sequence[int], star: bool = False) -> str:
    head = "zetastar" if star else "zeta"
    return f"{head}({','.join(str(v) for v in values)})"


def _sgn(t: int) -> int:
    return -1 if t & 1 else 1


def _euler_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for k in range(2, b.euler_k_max + 1):
        lhs = ScalePlan(_frac_expr(2), IndexPlan(_index_text([k, 1], star=True), "direct"))
        rhs = ExprPlan(symbolic.closed_form(Family.EULER_STAR, k).scale(2))
        cases.append(IdentityCase(
            f"euler/k{k}", "euler", lhs, rhs, "1e-10", (("k", k),),
            note="2*zeta*(k,1) against the weighted zeta convolution"))
    return cases


def _star_ones_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for m in range(b.star_ones_m_max + 1):
        text = _index_text([-1] + [1] * m, star=True)
        lhs = IndexPlan(text, "accelerated")
        rhs = ScalePlan(_frac_expr(-1), MplPlan((m + 1,)))
        cases.append(IdentityCase(
            f"star-bar1-ones/m{m}", "star-bar1-ones", lhs, rhs, "1e-10",
            (("m", m),)))
    return cases


def _star_recurrence_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for m in range(b.star_rec_m_max + 1):
        text = _index_text([-1] + [1] * m + [-1], star=True)
        cases.append(IdentityCase(
            f"star-bar1/m{m}", "star-bar1",
            IndexPlan(text, "direct"),
            FamilyPlan(Family.STAR_BAR1_ONES_BAR1, (m,)),
            "1e-10", (("m", m),)))
    for m in range(b.star_rec_m_max + 1):
        text = _index_text([2] + [1] * m + [-1], star=True)
        cases.append(IdentityCase(
            f"star-2/m{m}", "star-2",
            IndexPlan(text, "direct"),
            FamilyPlan(Family.STAR_2_ONES_BAR1, (m,)),
            "1e-10", (("m", m),)))
    for m in range(b.star_rec_m_max + 1):
        text = _index_text([2] + [1] * m, star=True)
        cases.append(IdentityCase(
            f"star-2/ones-m{m}", "star-2",
            IndexPlan(text, "direct"),
            FamilyPlan(Family.STAR_2_ONES, (m,)),
            "1e-10", (("m", m),)))
    return cases


def _lemma_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    xs = (Fraction(1, 4), Fraction(1, 2), Fraction(-1, 2), Fraction(-1))
    for n in range(1, b.lemma_n_max + 1):
        for m in range(b.lemma_m_max + 1):
            for x in xs:
                spec = IntegrandSpec("pow-log1m", n=n, m=m, x=x)
                cases.append(IdentityCase(
                    f"lemmas/{spec.label}", "lemmas",
                    QuadPlan(spec), JClosedPlan(n, m, x), "1e-8",
                    (("n", n), ("m", m))))
    for n in range(b.powlog_n_max + 1):
        for m in range(b.powlog_m_max + 1):
            for x in (Fraction(1, 3), Fraction(1)):
                spec = IntegrandSpec("pow-log", n=n, m=m, x=x)
                cases.append(IdentityCase(
                    f"lemmas/{spec.label}", "lemmas",
                    QuadPlan(spec), B1Plan(n, m, x), "1e-8",
                    (("n", n), ("m", m))))
    for m in range(b.integral_i_m_max + 1):
        spec = IntegrandSpec("integral-i", m=m)
        cases.append(IdentityCase(
            f"lemmas/{spec.label}", "lemmas",
            QuadPlan(spec), FamilyPlan(Family.INTEGRAL_I, (m,)), "1e-8",
            (("m", m),)))
    for m in range(1, b.integral_j_m_max + 1):
        spec = IntegrandSpec("integral-j", m=m, x=Fraction(1))
        cases.append(IdentityCase(
            f"lemmas/{spec.label}", "lemmas",
            QuadPlan(spec), FamilyPlan(Family.INTEGRAL_J, (m,)), "1e-8",
            (("m", m),)))
    for m in range(b.li_kernel_max + 1):
        for k in range(b.li_kernel_max + 1):
            spec = IntegrandSpec("li-kernel", m=m, k=k)
            scale = Fraction(_sgn(m + k + 1) * math.factorial(m + 1) * math.factorial(k))
            cases.append(IdentityCase(
                f"lemmas/{spec.label}", "lemmas",
                QuadPlan(spec),
                ScalePlan(_frac_expr(scale), MplPlan(tuple([k + 2] + [1] * m))),
                "1e-8", (("m", m), ("k", k))))
    return cases


def _stirling_cases(b: RegistryBounds) -> list[IdentityCase]:
    return [
        IdentityCase(f"stirling/n{n}", "stirling",
                     StirlingRowPlan(n, "recurrence"),
                     StirlingRowPlan(n, "partial-sums"),
                     "0", (("n", n),))
        for n in range(1, b.stirling_n_max + 1)
    ]


def _genfun_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    half = Fraction(1, 2)
    third = Fraction(1, 3)
    for k in range(1, 5):
        cases.append(IdentityCase(
            f"genfun/ln-pow/k{k}", "genfun",
            GenfunClosedPlan("ln-pow", k, half),
            GenfunSeriesPlan("ln-pow", k, half),
            "0", (("k", k),),
            note="pass criterion is the geometric tail bound"))
    for k in range(1, 4):
        cases.append(IdentityCase(
            f"genfun/c3/k{k}", "genfun",
            GenfunClosedPlan("c3", k, third),
            GenfunSeriesPlan("c3", k, third),
            "0", (("k", k),)))
        cases.append(IdentityCase(
            f"genfun/c4/k{k}", "genfun",
            GenfunClosedPlan("c4", k, third),
            GenfunSeriesPlan("c4", k, third),
            "0", (("k", k),)))
    return cases


def _mpl_mzv_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for m in range(b.mpl_mzv_max + 1):
        for k in range(b.mpl_mzv_max + 1):
            text = _index_text([-1] + [1] * m + [-1] + [1] * k)
            rhs = ScalePlan(_frac_expr(_sgn(m + 1)),
                            MplPlan(tuple([k + 2] + [1] * m)))
            cases.append(IdentityCase(
                f"mpl-mzv/m{m}k{k}", "mpl-mzv",
                IndexPlan(text, "direct"), rhs, "1e-9",
                (("m", m), ("k", k))))
    return cases


def _logsum_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for m in range(b.logsum_max + 1):
        for k in range(b.logsum_max + 1):
            text = _index_text([-1] + [1] * m + [-1] + [1] * k)
            outer = []
            for j in range(k + 1):
                coef = _ln2_coef(k - j, Fraction(
                    _sgn(m + k + 1 + j) * math.factorial(j) * math.comb(k, j),
                    math.factorial(k)))
                li_parts = []
                for l in range(m + 2):
                    li_parts.append(ScalePlan(
                        _ln2_coef(m + 1 - l, Fraction(-1, math.factorial(m + 1 - l))),
                        MplPlan(tuple([l + 1] + [1] * j))))
                bracket = SumPlan(tuple(
                    [IndexPlan(_index_text([m + 2] + [1] * j), "direct")] + li_parts))
                outer.append(ScalePlan(coef, bracket))
            cases.append(IdentityCase(
                f"mzv-logsum/m{m}k{k}", "mzv-logsum",
                IndexPlan(text, "direct"), SumPlan(tuple(outer)), "1e-6",
                (("m", m), ("k", k)),
                note="non-alternating heads bound the achievable tolerance"))
    return cases


def _li2_ones_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for m in range(b.li2_ones_m_max + 1):
        cases.append(IdentityCase(
            f"li2-ones/li-m{m}", "li2-ones",
            MplPlan(tuple([2] + [1] * m)),
            FamilyPlan(Family.LI_2_ONES, (m,)),
            "1e-10", (("m", m),)))
        text = _index_text([-1] + [1] * m + [-1])
        cases.append(IdentityCase(
            f"li2-ones/mzv-m{m}", "li2-ones",
            IndexPlan(text, "direct"),
            FamilyPlan(Family.MZV_BAR1_ONES_BAR1, (m,)),
            "1e-10", (("m", m),)))
    return cases


def _three_bar_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for m in range(b.three_bar_max + 1):
        for k in range(b.three_bar_max + 1):
            text = _index_text([-1] + [1] * m + [-1, -1] + [1] * k)
            cases.append(IdentityCase(
                f"three-bar/m{m}k{k}", "three-bar",
                IndexPlan(text, "direct"),
                FamilyPlan(Family.THREE_BAR, (m, k)),
                "1e-9", (("m", m), ("k", k))))
    ln2 = _LN2E
    z2 = ConstantExpr.symbol(symbolic.zeta_sym(2))
    z3 = ConstantExpr.symbol(symbolic.zeta_sym(3))
    z4 = ConstantExpr.symbol(symbolic.zeta_sym(4))
    li4 = ConstantExpr.symbol(symbolic.li_sym(4))
    f = Fraction
    worked: list[tuple[str, str, ConstantExpr, str]] = [
        ("zeta(-1,1,-1)", "example-w3-a",
         z3.scale(f(1, 8)) - (ln2 ** 3).scale(f(1, 6)), ""),
        ("zeta(-1,-1,-1)", "example-w3-b",
         -z3.scale(f(1, 4)) + (z2 * ln2).scale(f(1, 2)) - (ln2 ** 3).scale(f(1, 6)), ""),
        ("zeta(-1,1,1,-1)", "example-w4-a-corrected",
         li4 + (ln2 ** 4).scale(f(1, 12)) + (z3 * ln2).scale(f(7, 8))
         - (z2 * ln2 ** 2).scale(f(1, 4)) - z4,
         "reference constant corrected: the commonly transcribed value "
         "carries -1/2*z2*ln2^2 and misses the series value by ~0.198"),
        ("zeta(-1,-1,-1,1)", "example-w4-b",
         li4.scale(3) + (ln2 ** 4).scale(f(1, 6)) + (z3 * ln2).scale(f(23, 8))
         - z2 * ln2 ** 2 - z4.scale(3), ""),
        ("zeta(-1,1,-1,-1)", "example-w4-c-corrected",
         li4.scale(-3) - (ln2 ** 4).scale(f(1, 12)) - (z3 * ln2).scale(f(11, 4))
         + (z2 * ln2 ** 2).scale(f(3, 4)) + z4.scale(3),
         "reference constant corrected: the commonly transcribed value "
         "carries -3/4*z2*ln2^2 and misses the series value by ~1.186"),
    ]
    for text, tag, expr, note in worked:
        cases.append(IdentityCase(
            f"three-bar/{tag}", "three-bar",
            IndexPlan(text, "direct"), ExprPlan(expr), "1e-10", (), note=note))
    return cases


def _restricted_cases(suite: str, p_values, grid_max: int) -> list[IdentityCase]:
    cases = []
    for p in p_values:
        for m in range(grid_max + 1):
            for k in range(grid_max + 1):
                lhs_parts: list[Plan] = []
                for i in range(m + 1):
                    text = _index_text([-1] + [1] * (m - i) + [p + 3] + [1] * k)
                    lhs_parts.append(ScalePlan(
                        _ln2_coef(i, Fraction(_sgn(m + 1), math.factorial(i))),
                        IndexPlan(text, "accelerated")))
                for i in range(k + 1):
                    text = _index_text([-1] + [1] * (k - i) + [p + 3] + [1] * m)
                    lhs_parts.append(ScalePlan(
                        _ln2_coef(i, Fraction(_sgn(p + k + 1), math.factorial(i))),
                        IndexPlan(text, "accelerated")))
                rhs_parts: list[Plan] = [
                    ScalePlan(
                        _ln2_coef(m + 1, Fraction(_sgn(m), math.factorial(m + 1))),
                        IndexPlan(_index_text([-(p + 3)] + [1] * k), "accelerated")),
                    ScalePlan(
                        _ln2_coef(k + 1, Fraction(_sgn(p + k), math.factorial(k + 1))),
                        IndexPlan(_index_text([-(p + 3)] + [1] * m), "accelerated")),
                ]
                for i in range(p + 1):
                    rhs_parts.append(ScalePlan(
                        _frac_expr(_sgn(i)),
                        ProdPlan((
                            IndexPlan(_index_text([-(2 + i)] + [1] * m), "accelerated"),
                            IndexPlan(_index_text([-(p + 2 - i)] + [1] * k), "accelerated"),
                        ))))
                pid = f"p{p}" if suite == "restricted-sum" else ""
                case_id = f"{suite}/{pid}m{m}k{k}" if pid else f"{suite}/m{m}k{k}"
                cases.append(IdentityCase(
                    case_id, suite, SumPlan(tuple(lhs_parts)),
                    SumPlan(tuple(rhs_parts)), "1e-6",
                    (("p", p), ("m", m), ("k", k))))
    return cases


def _double_two_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    g = b.double_two_max
    for p in range(g + 1):
        for m in range(g + 1):
            for k in range(g + 1):
                fm = math.factorial(m + 1)
                fk = math.factorial(k + 1)
                lhs_parts: list[Plan] = []
                for i in range(m + 1):
                    text = _index_text([-1] + [1] * (m - i) + [2] + [1] * p + [2] + [1] * k)
                    lhs_parts.append(ScalePlan(
                        _ln2_coef(i, Fraction(_sgn(k + p) * fm * fk, math.factorial(i))),
                        IndexPlan(text, "accelerated")))
                for i in range(k + 1):
                    text = _index_text([-1] + [1] * (k - i) + [2] + [1] * p + [2] + [1] * m)
                    lhs_parts.append(ScalePlan(
                        _ln2_coef(i, Fraction(_sgn(m + 1) * fk * fm, math.factorial(i))),
                        IndexPlan(text, "accelerated")))
                lhs_parts.append(ScalePlan(
                    _ln2_coef(m + 1, Fraction(_sgn(k + p) * fk)),
                    IndexPlan(_index_text([-2] + [1] * p + [2] + [1] * k), "accelerated")))
                lhs_parts.append(ScalePlan(
                    _ln2_coef(k + 1, Fraction(_sgn(m + 1) * fm)),
                    IndexPlan(_index_text([-2] + [1] * p + [2] + [1] * m), "accelerated")))
                rhs_parts: list[Plan] = [
                    ScalePlan(
                        _frac_expr(Fraction(_sgn(m + k + p + 1) * fm * fk)),
                        ProdPlan((
                            IndexPlan(_index_text([-2] + [1] * m), "accelerated"),
                            IndexPlan(_index_text([-1] + [1] * p + [2] + [1] * k), "accelerated"),
                        ))),
                    ScalePlan(
                        _frac_expr(Fraction(_sgn(m + k) * fk * fm)),
                        ProdPlan((
                            IndexPlan(_index_text([-2] + [1] * k), "accelerated"),
                            IndexPlan(_index_text([-1] + [1] * p + [2] + [1] * m), "accelerated"),
                        ))),
                ]
                for i in range(1, p + 1):
                    rhs_parts.append(ScalePlan(
                        _frac_expr(Fraction(_sgn(m + k + p + 1) * _sgn(i) * fk * fm)),
                        ProdPlan((
                            IndexPlan(_index_text([-1] + [1] * (i - 1) + [2] + [1] * m), "accelerated"),
                            IndexPlan(_index_text([-1] + [1] * (p - i) + [2] + [1] * k), "accelerated"),
                        ))))
                cases.append(IdentityCase(
                    f"double-two/p{p}m{m}k{k}", "double-two",
                    SumPlan(tuple(lhs_parts)), SumPlan(tuple(rhs_parts)),
                    "1e-6", (("p", p), ("m", m), ("k", k))))
    # worked instance p=1, k=m=0
    lhs = SumPlan((
        IndexPlan("zeta(-1,2,1,2)", "accelerated"),
        ScalePlan(_ln2_coef(1), IndexPlan("zeta(-2,1,2)", "accelerated")),
        ProdPlan((IndexPlan("zeta(-2)", "accelerated"),
                  IndexPlan("zeta(-1,1,2)", "accelerated"))),
    ))
    rhs = ScalePlan(_frac_expr(Fraction(1, 2)),
                    ProdPlan((IndexPlan("zeta(-1,2)", "accelerated"),
                              IndexPlan("zeta(-1,2)", "accelerated"))))
    cases.append(IdentityCase(
        "double-two/worked-p1m0k0", "double-two", lhs, rhs, "1e-6", ()))
    # weight-4 reference constant for zeta(-1,1,2)
    cases.append(IdentityCase(
        "double-two/weight4", "double-two",
        IndexPlan("zeta(-1,1,2)", "direct"),
        FamilyPlan(Family.MZV_BAR1_ONE_2, ()),
        "1e-10", (), note="literature-reported weight-4 constant"))
    return cases


def _bar_run_cases(b: RegistryBounds) -> list[IdentityCase]:
    cases = []
    for p in b.bar_run_p:
        for k in range(b.bar_run_k_max + 1):
            text = _index_text([-1] * (2 * p + 2) + [1] * k)
            rhs = ScalePlan(_frac_expr(_sgn(p + 1)),
                            MplPlan(tuple([k + 2] + [2] * p)))
            cases.append(IdentityCase(
                f"bar-runs/even-p{p}k{k}", "bar-runs",
                IndexPlan(text, "direct"), rhs, "1e-9",
                (("p", p), ("k", k))))
    for p in b.bar_run_p:
        for m in range(b.bar_run_m_max + 1):
            for k in range(b.bar_run_k_max + 1):
                text = _index_text([-1] + [1] * m + [-1] * (2 * p + 1) + [1] * k)
                rhs = ScalePlan(_frac_expr(_sgn(m + p + 1)),
                                MplPlan(tuple([k + 2] + [2] * p + [1] * m)))
                cases.append(IdentityCase(
                    f"bar-runs/odd-p{p}m{m}k{k}", "bar-runs",
                    IndexPlan(text, "direct"), rhs, "1e-9",
                    (("p", p), ("m", m), ("k", k))))
    return cases


SUITES = ("euler", "star-bar1-ones", "star-bar1", "star-2", "lemmas",
          "stirling", "genfun", "mpl-mzv", "mzv-logsum", "li2-ones",
          "three-bar", "restricted-sum", "restricted-sum-p0", "double-two",
          "bar-runs")


def registry(bounds: RegistryBounds = DEFAULT_BOUNDS) -> list[IdentityCase]:
    """The full, deterministically ordered case list."""
    cases: list[IdentityCase] = []
    cases += _euler_cases(bounds)
    cases += _star_ones_cases(bounds)
    cases += _star_recurrence_cases(bounds)
    cases += _lemma_cases(bounds)
    cases += _stirling_cases(bounds)
    cases += _genfun_cases(bounds)
    cases += _mpl_mzv_cases(bounds)
    cases += _logsum_cases(bounds)
    cases += _li2_ones_cases(bounds)
    cases += _three_bar_cases(bounds)
    cases += _restricted_cases("restricted-sum", range(bounds.restricted_max + 1),
                               bounds.restricted_max)
    cases += _restricted_cases("restricted-sum-p0", (0,), bounds.restricted_p0_max)
    cases += _double_two_cases(bounds)
    cases += _bar_run_cases(bounds)
    ids = [c.case_id for c in cases]
    assert len(ids) == len(set(ids)), "duplicate case ids in registry"
    return cases


# ---------------------------------------------------------------------------
# running suites and reports
# ---------------------------------------------------------------------------

def run_case(case: IdentityCase, opts: TruncationOptions = DEFAULT_OPTIONS,
             prec: int = DEFAULT_PREC, tolerance_scale: float = 1.0) -> VerdictRecord:
    """Evaluate both sides of a case and judge the difference."""
    t0 = time.perf_counter()
    if isinstance(case.lhs, StirlingRowPlan) and isinstance(case.rhs, StirlingRowPlan):
        # rows are compared entry by entry in exact integer arithmetic;
        # the recorded values are the (equal) row sums n!
        row_l = _stirling_row(case.lhs.n, case.lhs.route)
        row_r = _stirling_row(case.rhs.n, case.rhs.route)
        dmax = max(abs(a - b) for a, b in zip(row_l, row_r))
        with working_prec(prec):
            zero = mpf(0)
            return VerdictRecord(case.case_id, case.suite, mpf(sum(row_l)), zero,
                                 mpf(sum(row_r)), zero, mpf(dmax), zero,
                                 dmax == 0, (time.perf_counter() - t0) * 1000.0,
                                 note=case.note)
    try:
        lhs, lhs_err = evaluate_plan(case.lhs, opts, prec)
        rhs, rhs_err = evaluate_plan(case.rhs, opts, prec)
        with working_prec(prec + GUARD_BITS):
            tol = mpf(case.tolerance) * mpf(tolerance_scale)
            return VerdictRecord.judge(case.case_id, case.suite, lhs, lhs_err,
                                       rhs, rhs_err, tol,
                                       (time.perf_counter() - t0) * 1000.0,
                                       note=case.note)
    except Exception as exc:  # capture, never abort the run
        zero = mpf(0)
        return VerdictRecord(case.case_id, case.suite, zero, zero, zero, zero,
                             mpf("inf"), mpf(case.tolerance), False,
                             (time.perf_counter() - t0) * 1000.0,
                             note=f"evaluation error: {exc}")


def _record_row(rec: VerdictRecord, prec: int) -> dict:
    return {
        "id": rec.case_id,
        "suite": rec.suite,
        "lhs": to_decimal(rec.lhs, prec, full=True),
        "lhs_err": to_decimal(rec.lhs_err, prec, full=True),
        "rhs": to_decimal(rec.rhs, prec, full=True),
        "rhs_err": to_decimal(rec.rhs_err, prec, full=True),
        "diff": to_decimal(rec.diff, prec, full=True),
        "pass": rec.passed,
        "ms": round(rec.ms, 3),
        "note": rec.note,
    }


def _worker(args) -> dict:
    case, opts, prec, tol_scale = args
    return _record_row(run_case(case, opts, prec, tol_scale), prec)


@dataclass
class Report:
    """Verification outcome: configuration snapshot, rows, tallies."""

    config: dict
    rows: list[dict]

    @property
    def summary(self) -> dict:
        passed = sum(1 for r in self.rows if r["pass"])
        return {"total": len(self.rows), "passed": passed,
                "failed": len(self.rows) - passed}

    @property
    def all_passed(self) -> bool:
        return self.summary["failed"] == 0

    def to_json_obj(self) -> dict:
        return {"config": self.config, "cases": self.rows,
                "summary": self.summary}

    def to_csv(self) -> str:
        import csv as _csv
        import io

        cols = ["id", "suite", "lhs", "lhs_err", "rhs", "rhs_err", "diff",
                "pass", "ms", "note"]
        buf = io.StringIO()
        w = _csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for row in self.rows:
            w.writerow({c: row[c] for c in cols})
        return buf.getvalue()

    def to_text(self) -> str:
        lines = []
        for row in self.rows:
            status = "pass" if row["pass"] else "FAIL"
            lines.append(f"[{status}] {row['id']}  diff={row['diff']}")
        s = self.summary
        lines.append(f"{s['passed']}/{s['total']} passed, {s['failed']} failed")
        return "\n".join(lines)


def select_cases(selector: str, bounds: RegistryBounds = DEFAULT_BOUNDS) -> list[IdentityCase]:
    cases = registry(bounds)
    if selector == "all":
        return cases
    if selector not in SUITES:
        raise UnknownSuiteError(f"unknown suite {selector!r}; "
                                f"choose from {', '.join(SUITES)} or 'all'")
    return [c for c in cases if c.suite == selector]


def run_suite(selector: str = "all",
              opts: TruncationOptions = DEFAULT_OPTIONS,
              prec: int = DEFAULT_PREC,
              jobs: int = 1,
              tolerance_scale: float = 1.0,
              bounds: RegistryBounds = DEFAULT_BOUNDS) -> Report:
    """Run one suite (or all); cases are independent and may run in parallel.

    Row order always matches registry order, and row values are bit-identical
    across ``jobs`` settings (every case is a pure function of the
    configuration).
    """
    cases = select_cases(selector, bounds)
    config = {
        "tool": "mzvstar",
        "version": __version__,
        "suite": selector,
        "prec": prec,
        "cutoff": opts.cutoff,
        "accel_terms": opts.accel_terms,
        "richardson_levels": opts.richardson_levels,
        "tolerance_scale": tolerance_scale,
        "jobs": jobs,
    }
    if jobs > 1 and len(cases) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(
                _worker,
                [(c, opts, prec, tolerance_scale) for c in cases],
                chunksize=max(1, len(cases) // (jobs * 8) or 1)))
    else:
        rows = [_record_row(run_case(c, opts, prec, tolerance_scale), prec)
                for c in cases]
    return Report(config=config, rows=rows)
