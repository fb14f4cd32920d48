"""Closed-form limits for regular graphs of large girth.

Everything here is double precision.  ``x`` denotes the non-occupancy
probability of the root of an infinite tree whose nodes all have ``r - 1``
children, the unique root in ``(0, 1]`` of ``x = 1 / (1 + lam x^(r-1))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import AboveThreshold, InvalidDegree, InvalidParameters, TooFewColors
from .graph import INFINITE

DEFAULT_TOL = 1e-12


@dataclass(frozen=True)
class FixedPointResult:
    r: int
    lam: float
    x: float
    residual: float


def _check_degree(r: int) -> None:
    if not isinstance(r, int) or r < 2:
        raise InvalidDegree(f"degree must be an integer >= 2, got {r!r}")


def lambda_threshold(r: int) -> float:
    """``(r-1)^(r-1) / (r-2)^r``; infinite for ``r = 2``."""
    _check_degree(r)
    if r == 2:
        return INFINITE
    return (r - 1) ** (r - 1) / (r - 2) ** r


def solve_fixed_point(r: int, lam: float = 1.0, tol: float = DEFAULT_TOL) -> FixedPointResult:
    """Bisection on ``h(x) = x + lam x^r - 1``, which is increasing on ``[0, 1]``."""
    _check_degree(r)
    lam = float(lam)
    if lam < 0 or math.isnan(lam):
        raise InvalidParameters("activity must be non-negative")

    def residual(x: float) -> float:
        return abs(x * (1 + lam * x ** (r - 1)) - 1)

    lo, hi = 0.0, 1.0
    x = 1.0
    for _ in range(200):
        if residual(x) <= tol:
            break
        x = 0.5 * (lo + hi)
        if x + lam * x**r - 1 > 0:
            hi = x
        else:
            lo = x
        if hi - lo <= 0:
            break
    return FixedPointResult(r, lam, x, residual(x))


def _below_threshold(r: int, lam: float) -> float:
    if lam < 0:
        raise InvalidParameters("activity must be non-negative")
    if lam >= lambda_threshold(r):
        raise AboveThreshold(f"lambda={lam} is not below the threshold {lambda_threshold(r):.6g} for r={r}")
    return solve_fixed_point(r, lam).x


def ind_limit(r: int, lam: float = 1.0) -> float:
    """Limiting ``ln Z / n`` for independent sets: ``-(r/2) ln x - ((r-2)/2) ln(2-x)``."""
    _check_degree(r)
    x = _below_threshold(r, lam)
    return -(r / 2) * math.log(x) - ((r - 2) / 2) * math.log(2 - x)


def color_limit(q: int, r: int) -> float:
    """Limiting ``ln Z / n`` for proper colorings: ``ln q + (r/2) ln(1 - 1/q)``."""
    _check_degree(r)
    if q <= r:
        raise TooFewColors(f"need q >= r + 1 = {r + 1}, got q={q}")
    return math.log(q) + (r / 2) * math.log(1 - 1 / q)


def kelly_marginals(r: int, lam: float = 1.0) -> tuple[float, float]:
    """Non-occupancy marginals for a root with ``r - 1`` and with ``r`` children."""
    _check_degree(r)
    x = _below_threshold(r, lam)
    return x, 1 / (2 - x)


def energy_shift(r: int, lam: float = 1.0) -> float:
    """Limiting ``Z(G°) / Z(G)`` for one rewiring: ``x^r (2-x)^(r-2)``."""
    _check_degree(r)
    x = _below_threshold(r, lam)
    return x**r * (2 - x) ** (r - 2)


def bezakova_bound(q: int, r: int) -> float:
    """Earlier lower bound ``ln(q - r(1 - 1/e))`` on the coloring rate, for comparison."""
    _check_degree(r)
    slack = q - r * (1 - math.exp(-1))
    if slack <= 0:
        raise InvalidParameters(f"bound undefined: q={q} <= r(1 - 1/e) for r={r}")
    return math.log(slack)
