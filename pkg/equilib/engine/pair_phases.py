"""Phase structure of the attractor/repellent pair.

The circle through z₁ and z₂ centered on the real axis at x₀ meets ℝ at
x₁ < x₀ < x₂. As γ grows the equilibrium support goes from the whole line
(Phase1) to two half-lines (Phase2) to a segment (Phase3), switching at
Γ₁ and Γ₂.
"""

import math
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import structlog
from numpy.polynomial import Polynomial
from pydantic import BaseModel, ConfigDict, model_validator

from ..errors import DomainError
from ..runtime.config import DEFAULT_TOLERANCES, Tolerances
from .charges import PairConfig

logger = structlog.get_logger(__name__)

INF = math.inf


class Phase(str, Enum):
    """Topology of the equilibrium support."""
    PHASE1 = "Phase1"  # ℝ
    TRANSITION1 = "Transition1"
    PHASE2 = "Phase2"  # two half-lines
    TRANSITION2 = "Transition2"
    PHASE3 = "Phase3"  # one segment


class Geometry(BaseModel):
    """Center, real intersections and radius of the circle through z₁, z₂.

    Symmetric pairs carry the limit geometry where the circle has become a
    vertical half-line: two of the points are at infinity.
    """
    model_config = ConfigDict(frozen=True)

    x0: float
    x1: float
    x2: float
    radius: float

    @model_validator(mode="after")
    def _check_order(self) -> "Geometry":
        finite = all(math.isfinite(v) for v in (self.x0, self.x1, self.x2))
        if finite and not self.x1 < self.x0 < self.x2:
            raise ValueError("expected x1 < x0 < x2")
        return self


class PhaseClassification(BaseModel):
    """Phase label with the thresholds and circle it was derived from."""
    model_config = ConfigDict(frozen=True)

    phase: Phase
    gamma1: float
    gamma2: float
    geometry: Geometry


def _require_distinct(pair: PairConfig) -> None:
    if pair.symmetric and pair.beta1 == pair.beta2:
        raise DomainError("symmetric pair needs beta1 != beta2", parameter="beta1")


# Public API ----


def geometry(pair: PairConfig) -> Geometry:
    """Circle geometry; β₂ = 0 gives x₂ = 1, the repellent itself."""
    if pair.symmetric:
        _require_distinct(pair)
        if pair.beta1 > pair.beta2:
            return Geometry(x0=-INF, x1=-INF, x2=0.0, radius=INF)
        return Geometry(x0=INF, x1=0.0, x2=INF, radius=INF)

    b1, b2 = pair.beta1**2, pair.beta2**2
    x0 = (b2 - b1) / 4.0
    half = math.sqrt((b2 - b1) ** 2 + 8.0 * (b1 + b2 + 2.0)) / 4.0
    return Geometry(x0=x0, x1=x0 - half, x2=x0 + half, radius=half)


def gamma1(pair: PairConfig) -> float:
    """Γ₁: the γ at which η' acquires a double real zero."""
    if pair.beta2 == 0:
        raise DomainError("Gamma1 degenerates to 0 for a real repellent", parameter="beta2")
    if pair.symmetric:
        _require_distinct(pair)
        return min(pair.beta1, pair.beta2) / max(pair.beta1, pair.beta2)

    product = pair.beta1 * pair.beta2
    s = pair.beta1**2 + pair.beta2**2 + 4.0
    # smaller root of β₁β₂γ² − sγ + β₁β₂, rationalized
    return 2.0 * product / (s + math.sqrt(s * s - 4.0 * product * product))


def gamma1_geometric(pair: PairConfig) -> float:
    """Γ₁ = (β₁/β₂)·|z₂ − x₂|² / |z₁ − x₂|²."""
    if pair.beta2 == 0 or pair.symmetric:
        raise DomainError("geometric form needs a generic pair with beta2 > 0")
    x2 = geometry(pair).x2
    return pair.beta1 / pair.beta2 * abs(pair.z2 - x2) ** 2 / abs(pair.z1 - x2) ** 2


def gamma2(pair: PairConfig) -> float:
    """Γ₂: the γ at which the right half-line escapes to infinity."""
    if pair.beta2 == 0:
        raise DomainError(
            f"real repellent, use the limit {_gamma2_real_repellent(pair):.15g}",
            parameter="beta2",
        )
    if pair.symmetric:
        _require_distinct(pair)
        return 1.0 if pair.beta1 > pair.beta2 else pair.beta1 / pair.beta2

    x2 = geometry(pair).x2
    return pair.beta1 / pair.beta2 * abs(pair.z2 - x2) / abs(pair.z1 - x2)


def _gamma2_real_repellent(pair: PairConfig) -> float:
    return pair.beta1 / math.sqrt(4.0 + pair.beta1**2)


def thresholds(pair: PairConfig) -> Tuple[float, float]:
    """(Γ₁, Γ₂) including the real-repellent limit (0, β₁/√(4+β₁²))."""
    if pair.beta2 == 0 and not pair.symmetric:
        return 0.0, _gamma2_real_repellent(pair)
    return gamma1(pair), gamma2(pair)


def classify(pair: PairConfig, tol: Optional[Tolerances] = None) -> PhaseClassification:
    """Phase of the pair at its γ."""
    tol = tol or DEFAULT_TOLERANCES
    g1, g2 = thresholds(pair)
    gamma, eps = pair.gamma, tol.transition

    if abs(gamma - g1) <= eps:
        phase = Phase.TRANSITION1
    elif gamma < g1:
        phase = Phase.PHASE1
    elif g2 < 1.0 and abs(gamma - g2) <= eps:
        phase = Phase.TRANSITION2
    elif gamma < g2 or g2 >= 1.0:
        # Γ₂ = 1 leaves no third phase
        phase = Phase.PHASE2
    else:
        phase = Phase.PHASE3

    logger.debug("pair.classify", gamma=gamma, gamma1=g1, gamma2=g2, phase=phase.value)
    return PhaseClassification(phase=phase, gamma1=g1, gamma2=g2, geometry=geometry(pair))


# Minima of the external field ----


def field_derivative_numerator(pair: PairConfig) -> Polynomial:
    """Cubic P with Q'(x) = P(x) / (|x − z₁|²|x − z₂|²)."""
    s1, s2 = pair.z1.real, pair.z2.real
    x = Polynomial([0.0, 1.0])
    attract = (x - s1) * ((x - s2) ** 2 + pair.beta2**2)
    repel = (x - s2) * ((x - s1) ** 2 + pair.beta1**2)
    return attract - pair.gamma * repel


def _cubic_terms(poly: Polynomial) -> Tuple[float, ...]:
    d, c, b, a = np.pad(poly.coef, (0, 4 - len(poly.coef)))
    return (
        18.0 * a * b * c * d,
        -4.0 * b**3 * d,
        b * b * c * c,
        -4.0 * a * c**3,
        -27.0 * a * a * d * d,
    )


def cubic_discriminant(poly: Polynomial) -> float:
    """Discriminant of a cubic: > 0 three real roots, < 0 one."""
    return float(math.fsum(_cubic_terms(poly)))


def field_minima(pair: PairConfig, tol: Optional[Tolerances] = None) -> List[float]:
    """Real local minima of Q, sorted."""
    tol = tol or DEFAULT_TOLERANCES
    poly = field_derivative_numerator(pair)
    slope = poly.deriv()

    terms = _cubic_terms(poly)
    disc = math.fsum(terms)
    scale = math.fsum(abs(t) for t in terms)
    if abs(disc) <= tol.double_root * scale:
        n_real = 3  # a double root plus a simple one
    else:
        n_real = 3 if disc > 0 else 1

    roots = poly.roots()
    candidates = sorted(roots, key=lambda r: abs(r.imag))[:n_real]

    minima: List[float] = []
    for root in sorted(r.real for r in candidates):
        derivative = slope(root)
        if derivative != 0.0:
            root -= poly(root) / derivative  # one Newton polish
        # Q'' at a zero of Q' has the sign of P'
        if slope(root) > tol.comparison * max(1.0, abs(poly.coef).max()):
            minima.append(float(root))
    return minima


def minima_threshold(pair: PairConfig, tol: Optional[Tolerances] = None) -> Optional[float]:
    """Γ₀, where Q goes from one to two real minima; None if it never does."""
    tol = tol or DEFAULT_TOLERANCES

    def count(gamma: float) -> int:
        return len(field_minima(pair.with_gamma(gamma), tol))

    lo, hi = 1e-9, 1.0 - 1e-9
    if count(lo) >= 2 or count(hi) < 2:
        logger.debug("pair.minima_threshold.absent", beta1=pair.beta1, beta2=pair.beta2)
        return None

    while hi - lo > 1e-10:
        mid = 0.5 * (lo + hi)
        if count(mid) >= 2:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
