"""Quadrature on the real line by the tangent substitution x = c + s·tan θ."""

import math
from typing import Callable, Optional

from scipy import integrate

from ..runtime.config import DEFAULT_TOLERANCES, Tolerances


def _angle(x: float, center: float, scale: float) -> float:
    if math.isinf(x):
        return math.copysign(math.pi / 2, x)
    return math.atan((x - center) / scale)


def integrate_line(
    f: Callable[[float], float],
    lower: float,
    upper: float,
    center: float = 0.0,
    scale: float = 1.0,
    tol: Optional[Tolerances] = None,
) -> float:
    """∫_lower^upper f(x) dx, bounds may be infinite.

    The map x = center + scale·tan θ sends the interval to a bounded
    θ-interval; f(x)·scale·sec²θ stays bounded whenever f decays like x⁻².
    """
    tol = tol or DEFAULT_TOLERANCES
    if not scale > 0:
        raise ValueError("scale must be positive")
    if upper <= lower:
        return 0.0

    def integrand(theta: float) -> float:
        cos = math.cos(theta)
        x = center + scale * math.tan(theta)
        return float(f(x)) * scale / (cos * cos)

    value, _ = integrate.quad(
        integrand,
        _angle(lower, center, scale),
        _angle(upper, center, scale),
        epsabs=tol.quadrature_abs,
        epsrel=tol.quadrature_rel,
        limit=400,
    )
    return float(value)

