import mpmath
import pytest

from mzvstar import DEFAULT_PREC, working_prec


@pytest.fixture
def hiprec():
    """Comparison context a little above the default working precision."""
    with working_prec(DEFAULT_PREC + 32):
        yield


def gap(a, b, prec: int = DEFAULT_PREC + 32):
    """|a - b| evaluated at high precision (module-global mp.prec is 53)."""
    with working_prec(prec):
        return abs(a - b)


def within(a, b, tol, prec: int = DEFAULT_PREC + 32) -> bool:
    with working_prec(prec):
        return abs(a - b) <= mpmath.mpf(tol)
