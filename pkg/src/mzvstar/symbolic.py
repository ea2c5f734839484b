"""Exact constant algebra over the basis {ln 2, zeta(k), Li_k(1/2),
multiple-Li at 1/2} and the recurrence engines that produce closed forms.

A :class:`ConstantExpr` is a map from monomials (multisets of basis symbols)
to exact rational coefficients.  All closed-form production is exact symbolic
unrolling; numbers only enter through :func:`expr_eval`.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Mapping, NamedTuple, Union

import mpmath
from mpmath import mpf

from . import series
from .core import (
    DEFAULT_PREC,
    GUARD_BITS,
    BigReal,
    DomainError,
    EvalResult,
    SelfCheckError,
    working_prec,
)


class Sym(NamedTuple):
    """A basis symbol: kind plus integer arguments.

    kinds: ``zeta`` (k >= 2), ``li`` (Li_k(1/2), k >= 1), ``mli``
    (Li_{s1,...,sk}(1/2), depth >= 2), ``ln2``.
    """

    kind: str
    args: tuple[int, ...] = ()

    def sort_key(self):
        rank = {"zeta": 0, "li": 1, "mli": 2, "ln2": 3}[self.kind]
        if self.kind in ("zeta", "li"):
            return (rank, -self.args[0])
        return (rank, self.args)

    def render(self) -> str:
        if self.kind == "ln2":
            return "ln2"
        if self.kind == "zeta":
            return f"z{self.args[0]}"
        if self.kind == "li":
            return f"li{self.args[0]}"
        return "mli(" + ",".join(str(a) for a in self.args) + ")"


LN2 = Sym("ln2")


def zeta_sym(k: int) -> Sym:
    if not isinstance(k, int) or k < 2:
        raise DomainError("zeta symbol requires k >= 2")
    return Sym("zeta", (k,))


def li_sym(k: int) -> Sym:
    if not isinstance(k, int) or k < 1:
        raise DomainError("li symbol requires k >= 1")
    return Sym("li", (k,))


def mli_sym(exponents: Iterable[int]) -> Sym:
    exps = tuple(exponents)
    if len(exps) < 2 or any(e < 1 for e in exps):
        raise DomainError("mli symbol requires >= 2 positive exponents")
    return Sym("mli", exps)


# A monomial is a sorted tuple of (symbol, power) pairs.
Monomial = tuple[tuple[Sym, int], ...]

_ONE: Monomial = ()


def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    acc: dict[Sym, int] = {}
    for sym, p in a:
        acc[sym] = acc.get(sym, 0) + p
    for sym, p in b:
        acc[sym] = acc.get(sym, 0) + p
    return tuple(sorted(acc.items(), key=lambda it: it[0].sort_key()))


def _mono_sort_key(mono: Monomial):
    flat = []
    for sym, p in mono:
        flat.extend([sym.sort_key()] * p)
    # constants sort last
    return (len(flat) == 0, flat)


class ConstantExpr:
    """Exact rational linear combination of basis-symbol monomials."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[Monomial, Fraction] = ()):
        clean = {}
        for mono, coef in dict(terms).items():
            coef = Fraction(coef)
            if coef != 0:
                clean[mono] = clean.get(mono, Fraction(0)) + coef
        self._terms = {m: c for m, c in clean.items() if c != 0}

    # -- constructors ------------------------------------------------------
    @classmethod
    def zero(cls) -> "ConstantExpr":
        return cls()

    @classmethod
    def rational(cls, value) -> "ConstantExpr":
        return cls({_ONE: Fraction(value)})

    @classmethod
    def symbol(cls, sym: Sym, power: int = 1) -> "ConstantExpr":
        if power < 1:
            raise DomainError("symbol power must be >= 1")
        return cls({((sym, power),): Fraction(1)})

    # -- accessors ---------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Fraction]:
        return dict(self._terms)

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(tuple(sorted(mono, key=lambda it: it[0].sort_key())),
                               Fraction(0))

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConstantExpr) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other: "ConstantExpr") -> "ConstantExpr":
        acc = dict(self._terms)
        for mono, coef in other._terms.items():
            acc[mono] = acc.get(mono, Fraction(0)) + coef
        return ConstantExpr(acc)

    def __sub__(self, other: "ConstantExpr") -> "ConstantExpr":
        return self + (-other)

    def __neg__(self) -> "ConstantExpr":
        return ConstantExpr({m: -c for m, c in self._terms.items()})

    def scale(self, factor) -> "ConstantExpr":
        f = Fraction(factor)
        return ConstantExpr({m: c * f for m, c in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, ConstantExpr):
            acc: dict[Monomial, Fraction] = {}
            for m1, c1 in self._terms.items():
                for m2, c2 in other._terms.items():
                    mono = _mono_mul(m1, m2)
                    acc[mono] = acc.get(mono, Fraction(0)) + c1 * c2
            return ConstantExpr(acc)
        return self.scale(other)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "ConstantExpr":
        if n < 0:
            raise DomainError("only nonnegative integer powers are supported")
        out = ConstantExpr.rational(1)
        for _ in range(n):
            out = out * self
        return out

    # -- rendering ----------------------------------------------------------
    def render(self) -> str:
        """Stable canonical string, e.g. ``1/8*z3 + 1/2*z2*ln2 - 1/6*ln2^3``."""
        if not self._terms:
            return "0"
        parts = []
        for mono in sorted(self._terms, key=_mono_sort_key):
            coef = self._terms[mono]
            frags = []
            for sym, p in mono:
                frags.append(sym.render() if p == 1 else f"{sym.render()}^{p}")
            body = "*".join(frags)
            mag = abs(coef)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            parts.append((coef < 0, text))
        out = ("-" if parts[0][0] else "") + parts[0][1]
        for neg, text in parts[1:]:
            out += (" - " if neg else " + ") + text
        return out

    def __repr__(self) -> str:
        return f"ConstantExpr({self.render()})"


def expr_arith(a: ConstantExpr, b: ConstantExpr, op: str, r=None) -> ConstantExpr:
    """Functional front end: op in {'add', 'mul', 'scale'}."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "scale":
        return a.scale(r)
    raise DomainError(f"unknown expression operation {op!r}")


# ---------------------------------------------------------------------------
# numeric bridge
# ---------------------------------------------------------------------------

def _eval_symbol(sym: Sym, prec: int) -> EvalResult:
    if sym.kind == "ln2":
        return series.eval_ln2(prec)
    if sym.kind == "zeta":
        return series.eval_zeta(sym.args[0], prec)
    if sym.kind == "li":
        return series.eval_mpl_half([sym.args[0]], prec)
    return series.eval_mpl_half(list(sym.args), prec)


def expr_eval(expr: ConstantExpr, prec: int = DEFAULT_PREC) -> EvalResult:
    """Substitute numeric values for each symbol; first-order error propagation."""
    with working_prec(prec + GUARD_BITS):
        total = mpf(0)
        total_err = mpf(0)
        terms = 0
        for mono, coef in expr.terms.items():
            c = mpf(coef.numerator) / coef.denominator
            mval = mpf(1)
            rel_err = mpf(0)
            for sym, p in mono:
                r = _eval_symbol(sym, prec)
                terms += r.terms_used
                mval *= r.value ** p
                rel_err += p * (r.err / abs(r.value))
            total += c * mval
            total_err += abs(c * mval) * rel_err
        total_err += mpf(2) ** (16 - prec) * (1 + abs(total))
    with working_prec(prec):
        return EvalResult(+total, +total_err, "symbolic", terms)


# ---------------------------------------------------------------------------
# canonicalization
# ---------------------------------------------------------------------------

def _low_li_rules() -> dict[int, ConstantExpr]:
    """Classical reductions of Li_k(1/2) for k <= 3."""
    ln2 = ConstantExpr.symbol(LN2)
    z2 = ConstantExpr.symbol(zeta_sym(2))
    z3 = ConstantExpr.symbol(zeta_sym(3))
    return {
        1: ln2,
        2: z2.scale(Fraction(1, 2)) - (ln2 ** 2).scale(Fraction(1, 2)),
        3: z3.scale(Fraction(7, 8)) - (z2 * ln2).scale(Fraction(1, 2))
           + (ln2 ** 3).scale(Fraction(1, 6)),
    }


_rule_checked: set[tuple[int, int]] = set()
_rule_lock = threading.Lock()


def _self_check_rule(k: int, rule: ConstantExpr, prec: int) -> None:
    key = (k, prec)
    with _rule_lock:
        if key in _rule_checked:
            return
    lhs = series.eval_mpl_half([k], prec)
    rhs = expr_eval(rule, prec)
    with working_prec(prec):
        tol = mpf(2) ** (32 - prec) * (1 + abs(lhs.value))
        if abs(lhs.value - rhs.value) > tol:
            raise SelfCheckError(f"reduction rule for li{k} failed its numeric self-check")
    with _rule_lock:
        _rule_checked.add(key)


def canonicalize(expr: ConstantExpr, reduce_low_li: bool = False,
                 prec: int = DEFAULT_PREC) -> ConstantExpr:
    """Canonical ordering plus symbol rewriting.

    ``li1`` is always rewritten to ``ln2``; with ``reduce_low_li`` the
    classical closed forms of Li_2(1/2) and Li_3(1/2) are substituted as
    well.  Every applied rule is validated numerically once per precision.
    """
    rules = _low_li_rules()
    active = {1: rules[1]}
    if reduce_low_li:
        active = rules
    out = ConstantExpr.zero()
    for mono, coef in expr.terms.items():
        acc = ConstantExpr.rational(coef)
        for sym, p in mono:
            if sym.kind == "li" and sym.args[0] in active:
                rule = active[sym.args[0]]
                if sym.args[0] > 1:
                    _self_check_rule(sym.args[0], rule, prec)
                acc = acc * rule ** p
            else:
                acc = acc * ConstantExpr.symbol(sym, p)
        out = out + acc
    return out


# ---------------------------------------------------------------------------
# closed-form families
# ---------------------------------------------------------------------------

class Family(str, Enum):
    """Families of indices with exact closed forms over the basis."""

    EULER_STAR = "euler-star"              # zeta*(k,1), k >= 2
    STAR_BAR1_ONES_BAR1 = "star-bar1"      # zeta*(-1,{1}_m,-1)
    STAR_2_ONES_BAR1 = "star-2-bar1"       # zeta*(2,{1}_m,-1)
    STAR_BAR1_ONES = "star-bar1-ones"      # zeta*(-1,{1}_m)
    STAR_2_ONES = "star-2-ones"            # zeta*(2,{1}_m)
    LI_2_ONES = "li-2-ones"                # Li_{2,{1}_m}(1/2)
    MZV_BAR1_ONES_BAR1 = "mzv-bar1"        # zeta(-1,{1}_m,-1)
    INTEGRAL_I = "integral-i"              # int_0^1 ln^k(1+t) ln(1-t)/(1+t) dt
    INTEGRAL_J = "integral-j"              # int_0^1 ln^m(1+t)/t dt
    THREE_BAR = "three-bar"                # zeta(-1,{1}_m,-1,-1,{1}_k)
    MZV_BAR1_ONE_2 = "bar1-one-2"          # zeta(-1,1,2) reference constant


_cf_cache: dict[tuple, ConstantExpr] = {}
_cf_lock = threading.Lock()


def _frac(n, d=1) -> Fraction:
    return Fraction(n, d)


def _sgn(p: int) -> int:
    return -1 if p & 1 else 1


def _ln2_pow(i: int) -> ConstantExpr:
    return ConstantExpr.symbol(LN2) ** i if i else ConstantExpr.rational(1)


def _zeta(k: int) -> ConstantExpr:
    return ConstantExpr.symbol(zeta_sym(k))


def _li(k: int) -> ConstantExpr:
    return ConstantExpr.symbol(li_sym(k))


def _euler_star(k: int) -> ConstantExpr:
    # 2 zeta*(k,1) = (k+2) zeta(k+1) - sum_{i=1}^{k-2} zeta(k-i) zeta(i+1)
    acc = _zeta(k + 1).scale(k + 2)
    for i in range(1, k - 1):
        acc = acc - _zeta(k - i) * _zeta(i + 1)
    return acc.scale(_frac(1, 2))


def _star_bar1_ones(m: int) -> ConstantExpr:
    # zeta*(-1,{1}_m) = -Li_{m+1}(1/2)
    return -_li(m + 1)


def _star_2_ones(m: int) -> ConstantExpr:
    # zeta*(2,{1}_m) = (m+1) zeta(m+2)
    return _zeta(m + 2).scale(m + 1)


def _binomial_li_block(m: int) -> ConstantExpr:
    """sum_{k=1}^{m} C(m,k) (-1)^(k+1) { sum_{l=1}^{k} l! C(k,l) ln2^(m-l)
    Li_{l+2}(1/2)  -  k! ln2^(m-k) zeta(k+2) }."""
    acc = ConstantExpr.zero()
    for k in range(1, m + 1):
        inner = ConstantExpr.zero()
        for l in range(1, k + 1):
            inner = inner + (_ln2_pow(m - l) * _li(l + 2)).scale(
                math.factorial(l) * math.comb(k, l))
        inner = inner - (_ln2_pow(m - k) * _zeta(k + 2)).scale(math.factorial(k))
        acc = acc + inner.scale(_sgn(k + 1) * math.comb(m, k))
    return acc


def _star_bar1_ones_bar1(m: int) -> ConstantExpr:
    # recurrence in the number m of unbarred middle ones
    if m == 0:
        return (_zeta(2) + ConstantExpr.symbol(LN2) ** 2).scale(_frac(1, 2))
    sign = _sgn(m)
    acc = (_zeta(2) * _ln2_pow(m)).scale(_frac(sign, math.factorial(m)))
    middle = ConstantExpr.zero()
    for i in range(1, m + 1):
        gap = closed_form(Family.STAR_BAR1_ONES_BAR1, i - 1) - _star_bar1_ones(i)
        middle = middle + (_ln2_pow(m + 1 - i) * gap).scale(
            _sgn(i + 1) * math.factorial(i) * math.comb(m + 1, i))
    acc = acc - middle.scale(_frac(sign, math.factorial(m + 1)))
    acc = acc + _binomial_li_block(m).scale(_frac(sign, math.factorial(m)))
    return acc


def _star_2_ones_bar1(m: int) -> ConstantExpr:
    if m == 0:
        return _zeta(3).scale(_frac(1, 4)) - (_zeta(2) * _ln2_pow(1)).scale(_frac(3, 2))
    sign = _sgn(m)
    acc = _ln2_pow(m + 3).scale(_frac(sign * (m + 2), math.factorial(m + 3)))
    acc = acc + (_zeta(m + 3) - _li(m + 3)).scale(sign * (m + 2))
    tail = ConstantExpr.zero()
    for j in range(1, m + 3):
        tail = tail + (_ln2_pow(m + 3 - j) * _li(j)).scale(
            _frac(1, math.factorial(m + 3 - j)))
    acc = acc - tail.scale(sign * (m + 2))
    acc = acc - (_zeta(2) * _ln2_pow(m + 1)).scale(
        _frac(3 * sign, 2 * math.factorial(m + 1)))
    middle = ConstantExpr.zero()
    for i in range(1, m + 1):
        gap = closed_form(Family.STAR_2_ONES_BAR1, i - 1) - _star_2_ones(i)
        middle = middle + (_ln2_pow(m + 1 - i) * gap).scale(
            _sgn(i - 1) * math.factorial(i) * math.comb(m + 1, i))
    acc = acc - middle.scale(_frac(sign, math.factorial(m + 1)))
    return acc


def _li_2_ones(m: int) -> ConstantExpr:
    # Li_{2,{1}_m}(1/2) = zeta(m+2) - sum_{l=0}^{m+1} ln2^(m+1-l)/(m+1-l)! Li_{l+1}(1/2)
    acc = _zeta(m + 2)
    for l in range(0, m + 2):
        acc = acc - (_ln2_pow(m + 1 - l) * _li(l + 1)).scale(
            _frac(1, math.factorial(m + 1 - l)))
    return acc


def _mzv_bar1_ones_bar1(m: int) -> ConstantExpr:
    # zeta(-1,{1}_m,-1) = (-1)^(m+1) * [same bracket as _li_2_ones]
    return _li_2_ones(m).scale(_sgn(m + 1))


def _integral_i(k: int) -> ConstantExpr:
    if k == 0:
        return (ConstantExpr.symbol(LN2) ** 2 - _zeta(2)).scale(_frac(1, 2))
    acc = _ln2_pow(k + 2).scale(_frac(1, k + 1)) - _zeta(2) * _ln2_pow(k)
    return acc - _binomial_li_block(k)


def _integral_j(m: int) -> ConstantExpr:
    if m < 1:
        raise DomainError("integral-j requires m >= 1")
    acc = _ln2_pow(m + 1).scale(_frac(1, m + 1))
    acc = acc + (_zeta(m + 1) - _li(m + 1)).scale(math.factorial(m))
    for j in range(1, m + 1):
        acc = acc - (_ln2_pow(m - j + 1) * _li(j)).scale(
            _frac(math.factorial(m), math.factorial(m - j + 1)))
    return acc


def _three_bar(m: int, k: int) -> ConstantExpr:
    head = (_ln2_pow(m + 1) * closed_form(Family.INTEGRAL_I, k)).scale(k + 1)
    head = head - closed_form(Family.INTEGRAL_I, m + k + 1).scale(m + k + 2)
    acc = head.scale(_frac(_sgn(k), math.factorial(m + 1) * math.factorial(k + 1)))
    for i in range(1, m + 1):
        acc = acc - (_ln2_pow(i) * closed_form(Family.THREE_BAR, m - i, k)).scale(
            _frac(1, math.factorial(i)))
    return acc


def _mzv_bar1_one_2() -> ConstantExpr:
    # literature-reported weight-4 constant for zeta(-1,1,2); validated
    # numerically against direct series evaluation in the test suite
    return (_li(4).scale(3) + _ln2_pow(4).scale(_frac(1, 8))
            + (_zeta(3) * _ln2_pow(1)).scale(_frac(23, 8))
            - _zeta(2) * _ln2_pow(2) - _zeta(4).scale(3))


def closed_form(family: Family, *params: int) -> ConstantExpr:
    """Exact closed form for a family member; recurrences unroll memoized."""
    family = Family(family)
    key = (family, params)
    with _cf_lock:
        hit = _cf_cache.get(key)
    if hit is not None:
        return hit
    if any(not isinstance(p, int) for p in params):
        raise DomainError("family parameters must be integers")
    if family == Family.EULER_STAR:
        (k,) = params
        if k < 2:
            raise DomainError("euler-star requires k >= 2")
        expr = _euler_star(k)
    elif family == Family.STAR_BAR1_ONES_BAR1:
        (m,) = params
        if m < 0:
            raise DomainError("star-bar1 requires m >= 0")
        expr = _star_bar1_ones_bar1(m)
    elif family == Family.STAR_2_ONES_BAR1:
        (m,) = params
        if m < 0:
            raise DomainError("star-2-bar1 requires m >= 0")
        expr = _star_2_ones_bar1(m)
    elif family == Family.STAR_BAR1_ONES:
        (m,) = params
        if m < 0:
            raise DomainError("star-bar1-ones requires m >= 0")
        expr = _star_bar1_ones(m)
    elif family == Family.STAR_2_ONES:
        (m,) = params
        if m < 0:
            raise DomainError("star-2-ones requires m >= 0")
        expr = _star_2_ones(m)
    elif family == Family.LI_2_ONES:
        (m,) = params
        if m < 0:
            raise DomainError("li-2-ones requires m >= 0")
        expr = _li_2_ones(m)
    elif family == Family.MZV_BAR1_ONES_BAR1:
        (m,) = params
        if m < 0:
            raise DomainError("mzv-bar1 requires m >= 0")
        expr = _mzv_bar1_ones_bar1(m)
    elif family == Family.INTEGRAL_I:
        (k,) = params
        if k < 0:
            raise DomainError("integral-i requires k >= 0")
        expr = _integral_i(k)
    elif family == Family.INTEGRAL_J:
        (m,) = params
        expr = _integral_j(m)
    elif family == Family.THREE_BAR:
        m, k = params
        if m < 0 or k < 0:
            raise DomainError("three-bar requires m, k >= 0")
        expr = _three_bar(m, k)
    elif family == Family.MZV_BAR1_ONE_2:
        if params:
            raise DomainError("bar1-one-2 takes no parameters")
        expr = _mzv_bar1_one_2()
    else:  # pragma: no cover
        raise DomainError(f"unknown family {family!r}")
    with _cf_lock:
        _cf_cache.setdefault(key, expr)
    return expr


def family_index(family: Family, *params: int):
    """The index (or polylog exponents) a family's closed form evaluates.

    Returns ``("index", text)`` or ``("mpl", exponents)`` or ``None`` for the
    integral families, which are checked against quadrature instead.
    """
    family = Family(family)
    if family == Family.EULER_STAR:
        (k,) = params
        return ("index", f"zetastar({k},1)")
    if family == Family.STAR_BAR1_ONES_BAR1:
        (m,) = params
        body = ",".join(["-1"] + ["1"] * m + ["-1"])
        return ("index", f"zetastar({body})")
    if family == Family.STAR_2_ONES_BAR1:
        (m,) = params
        body = ",".join(["2"] + ["1"] * m + ["-1"])
        return ("index", f"zetastar({body})")
    if family == Family.STAR_BAR1_ONES:
        (m,) = params
        body = ",".join(["-1"] + ["1"] * m)
        return ("index", f"zetastar({body})")
    if family == Family.STAR_2_ONES:
        (m,) = params
        body = ",".join(["2"] + ["1"] * m)
        return ("index", f"zetastar({body})")
    if family == Family.LI_2_ONES:
        (m,) = params
        return ("mpl", tuple([2] + [1] * m))
    if family == Family.MZV_BAR1_ONES_BAR1:
        (m,) = params
        body = ",".join(["-1"] + ["1"] * m + ["-1"])
        return ("index", f"zeta({body})")
    if family == Family.THREE_BAR:
        m, k = params
        body = ",".join(["-1"] + ["1"] * m + ["-1", "-1"] + ["1"] * k)
        return ("index", f"zeta({body})")
    if family == Family.MZV_BAR1_ONE_2:
        return ("index", "zeta(-1,1,2)")
    return None
