"""High-precision evaluation, exact closed forms, and identity verification
for multiple zeta (star) values and polylogarithms at 1/2.

Quick start::

    from mzvstar import parse_index, eval_auto, closed_form, Family

    v = eval_auto(parse_index("zetastar(2,1)"))      # ~ 2 zeta(3)
    e = closed_form(Family.EULER_STAR, 2)            # exact: 2*z3
"""

from .core import (
    DEFAULT_PREC,
    BigReal,
    DivergentIndexError,
    DomainError,
    EvalResult,
    IndexSyntaxError,
    MzvError,
    NonConvergenceError,
    Rational,
    ResourceLimitError,
    SignedIndex,
    VerdictRecord,
    format_index,
    index_stats,
    parse_index,
    to_decimal,
    working_prec,
)
from .quadrature import IntegrandSpec, check_lemma, integrate
from .series import (
    TruncationOptions,
    J_closed,
    check_stirling_identity,
    eval_accelerated,
    eval_auto,
    eval_direct,
    eval_ln2,
    eval_mpl_half,
    eval_zeta,
    partial_sum,
    stirling1,
)
from .symbolic import (
    ConstantExpr,
    Family,
    canonicalize,
    closed_form,
    expr_arith,
    expr_eval,
)
from .verify import Report, RegistryBounds, registry, run_suite

__version__ = "0.1.0"

__all__ = [
    "BigReal",
    "ConstantExpr",
    "DEFAULT_PREC",
    "DivergentIndexError",
    "DomainError",
    "EvalResult",
    "Family",
    "IndexSyntaxError",
    "IntegrandSpec",
    "J_closed",
    "MzvError",
    "NonConvergenceError",
    "Rational",
    "Report",
    "RegistryBounds",
    "ResourceLimitError",
    "SignedIndex",
    "TruncationOptions",
    "VerdictRecord",
    "canonicalize",
    "check_lemma",
    "check_stirling_identity",
    "closed_form",
    "eval_accelerated",
    "eval_auto",
    "eval_direct",
    "eval_ln2",
    "eval_mpl_half",
    "eval_zeta",
    "expr_arith",
    "expr_eval",
    "format_index",
    "index_stats",
    "integrate",
    "parse_index",
    "partial_sum",
    "registry",
    "run_suite",
    "stirling1",
    "to_decimal",
    "working_prec",
]
