"""Bracketed bisection for the scalar fixed-point equations.

Both precise solvers reduce to a single scalar root.  Bisection is used on
purpose: the functions are cheap, a sign change is guaranteed by
construction, and robustness matters more than convergence order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import SolverError


@dataclass(frozen=True)
class BisectionResult:
    root: float
    value: float
    iterations: int
    lo: float
    hi: float


def count_sign_changes(values: Sequence[float]) -> int:
    signs = [v > 0 for v in values if v != 0 and math.isfinite(v)]
    return sum(a != b for a, b in zip(signs, signs[1:]))


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    xtol: float,
    ftol: float,
    maxiter: int = 200,
    geometric: bool = False,
    probes: int = 2,
) -> BisectionResult:
    """Find ``x`` in ``[lo, hi]`` with ``f(lo) > 0 > f(hi)`` or the reverse.

    Stops once the bracket is narrower than ``xtol`` *and* ``|f(root)| <= ftol``.
    With ``geometric=True`` the midpoint is ``sqrt(lo * hi)`` and ``xtol`` is
    relative (``hi / lo - 1``), which suits brackets spanning decades.

    Before iterating, ``probes`` interior points are evaluated; more than one
    sign change across the probes means the root is not unique and is
    reported instead of silently picking one.
    """
    if geometric and not lo > 0:
        raise ValueError("geometric bisection needs lo > 0")

    def interior(t):
        return lo * (hi / lo) ** t if geometric else lo + (hi - lo) * t

    xs = [lo] + [interior(k / (probes + 1)) for k in range(1, probes + 1)] + [hi]
    samples = [(x, f(x)) for x in xs]
    f_lo, f_hi = samples[0][1], samples[-1][1]
    if not (math.isfinite(f_lo) and math.isfinite(f_hi)) or f_lo * f_hi > 0 or f_lo == f_hi == 0:
        raise SolverError(f"no sign change on [{lo:.6g}, {hi:.6g}]", samples)
    if f_lo == 0:
        return BisectionResult(lo, 0.0, 0, lo, lo)
    if f_hi == 0:
        return BisectionResult(hi, 0.0, 0, hi, hi)
    if count_sign_changes([v for _, v in samples]) > 1:
        raise SolverError("multiple sign changes inside the bracket", samples)

    rising = f_hi > 0
    a, b = lo, hi
    fa, fb = f_lo, f_hi
    for it in range(1, maxiter + 1):
        mid = math.sqrt(a * b) if geometric else 0.5 * (a + b)
        fm = f(mid)
        if fm == 0:
            return BisectionResult(mid, 0.0, it, mid, mid)
        if (fm > 0) == rising:
            b, fb = mid, fm
        else:
            a, fa = mid, fm
        width = (b / a - 1.0) if geometric else (b - a)
        best, fbest = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
        if width <= xtol and abs(fbest) <= ftol:
            return BisectionResult(best, fbest, it, a, b)
    best, fbest = (a, fa) if abs(fa) <= abs(fb) else (b, fb)
    raise SolverError(
        f"bisection did not converge in {maxiter} iterations (|f|={abs(fbest):.3g})",
        samples,
        best=best,
    )


def first_feasible(
    feasible: Callable[[float], bool], lo: float, hi: float, rtol: float, maxiter: int = 200
) -> tuple[float, int]:
    """Smallest ``x`` in ``(lo, hi]`` (geometric bisection) with ``feasible(x)`` true.

    Assumes ``feasible(lo)`` is false and ``feasible(hi)`` true; returns the
    upper end of the final bracket, which is always a feasible point.
    """
    a, b = lo, hi
    for it in range(1, maxiter + 1):
        if b / a - 1.0 <= rtol:
            return b, it
        mid = float(np.sqrt(a * b))
        if feasible(mid):
            b = mid
        else:
            a = mid
    return b, maxiter
