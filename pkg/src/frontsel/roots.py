"""Bracketing scalar solvers shared by the dispersion and wave modules."""
from __future__ import annotations

import math

from .errors import NumericError

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def bisect(fn, lo: float, hi: float, xtol: float = 1e-12, maxiter: int = 200) -> float:
    """Root of ``fn`` in ``[lo, hi]``; the endpoint values must differ in sign."""
    flo, fhi = fn(lo), fn(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise NumericError(
            f"no sign change on [{lo:.6g}, {hi:.6g}]: f(lo)={flo:.3e}, f(hi)={fhi:.3e}"
        )
    for _ in range(maxiter):
        mid = 0.5 * (lo + hi)
        if hi - lo <= xtol or mid in (lo, hi):
            break
        fm = fn(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def golden_min(fn, lo: float, hi: float, xtol: float = 1e-10, maxiter: int = 300) -> float:
    """Minimizer of a unimodal ``fn`` on ``[lo, hi]``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = fn(x1), fn(x2)
    for _ in range(maxiter):
        if hi - lo <= xtol * max(1.0, abs(lo) + abs(hi)):
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = fn(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = fn(x2)
    return 0.5 * (lo + hi)
