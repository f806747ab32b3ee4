"""Closed-form equilibrium measure of the attractor/repellent pair.

Off the support the Cauchy transform satisfies

    C_μ(z) + Q'(z) = c·√A(z)·B(z) / D(z),   D(z) = Π (z − zⱼ)(z − z̄ⱼ),

with A vanishing at the finite endpoints and B = z − x₂. Taking residues at
z₁ and z₂ fixes |c| = d; the ratio of the two residue equations is the
endpoint equation solved here.
"""

import cmath
import math
from typing import Callable, List, Literal, Optional, Tuple

import numpy as np
import structlog
from numpy.typing import ArrayLike
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, optimize

from ..errors import ConvergenceError, DomainError
from ..runtime.config import DEFAULT_TOLERANCES, Tolerances
from .charges import ComplexPoint, PairConfig, RealOrArray, _as_result
from .pair_phases import Phase, PhaseClassification, classify, geometry
from .quadrature import integrate_line
from .signed_equilibrium import SupportSet, positive_part_quadratic

logger = structlog.get_logger(__name__)

INF = math.inf


class DensityFn(BaseModel):
    """Equilibrium density of a pair, ready for evaluation.

    a1, a2 follow `solve_endpoints`: the gap of a two-ray support, the hull
    of a segment, (−inf, inf) when the support is ℝ.
    """
    model_config = ConfigDict(frozen=True)

    phase: Phase
    a1: float
    a2: float
    b: Optional[ComplexPoint]
    d: float = Field(gt=0)
    pair: PairConfig
    support: SupportSet

    def __call__(self, x: ArrayLike) -> RealOrArray:
        return density_eval(self, x)


class BisectorPoints(BaseModel):
    """Where the internal (h) and external (k) bisectors of a₁z₂a₂ meet ℝ."""
    model_config = ConfigDict(frozen=True)

    h: float
    k: float


class FlowSample(BaseModel):
    """One sample of the endpoint trajectory."""
    model_config = ConfigDict(frozen=True)

    gamma: float
    a1: float
    a2: float
    b_residual: float


# Branches and factors ----


def _full_line(a1: float, a2: float) -> bool:
    return a1 == -INF and a2 == INF


def _sqrt_a(z: complex, a1: float, a2: float) -> complex:
    """√((z − a₁)(z − a₂)), principal root per factor.

    An endpoint at +inf contributes the direction i (√(z − a) ≈ i√a for
    Im z ≥ 0), one at −inf contributes 1; the moduli go into c.
    """
    if _full_line(a1, a2):
        return 1.0 + 0.0j
    value = 1.0 + 0.0j
    for a in (a1, a2):
        if a == INF:
            value *= 1j
        elif a != -INF:
            value *= cmath.sqrt(z - a)
    return value


def _b_factor(z: complex, a1: float, a2: float, b: Optional[ComplexPoint]) -> complex:
    if b is None:
        return 1.0 + 0.0j
    root = b.as_complex()
    if _full_line(a1, a2):
        return (z - root) * (z - root.conjugate())
    return z - root


def _interior_point(support: SupportSet, pair: PairConfig) -> float:
    """A point strictly inside the support, away from the endpoints."""
    first = support.intervals[0]
    if support.is_full_line:
        return pair.z1.real
    if first.lower == -INF:
        return first.upper - max(1.0, abs(first.upper))
    if first.upper == INF:
        return first.lower + max(1.0, abs(first.lower))
    return 0.5 * (first.lower + first.upper)


def residue_constant(
    pair: PairConfig,
    a1: float,
    a2: float,
    b: Optional[ComplexPoint],
    support: Optional[SupportSet] = None,
) -> complex:
    """c from the residue at z₁: iβ₁(z₁ − z₂)(z₁ − z̄₂) = c·√A(z₁)·B(z₁).

    With a support given, the branch is checked against it: c·√A(x + i0)·B(x)
    must be positive imaginary inside the support, otherwise the opposite
    branch is taken and c changes sign.
    """
    z1, z2 = pair.z1, pair.z2
    numerator = 1j * pair.beta1 * (z1 - z2) * (z1 - z2.conjugate())
    c = numerator / (_sqrt_a(z1, a1, a2) * _b_factor(z1, a1, a2, b))
    if support is None:
        return c

    x = _interior_point(support, pair)
    boundary = _sqrt_a(complex(x, 0.0), a1, a2) * _b_factor(complex(x, 0.0), a1, a2, b)
    alignment = c * boundary / 1j
    if alignment.real < 0:
        logger.debug("pair.branch.flipped", a1=a1, a2=a2)
        c = -c
        alignment = -alignment
    if abs(alignment.imag) > 1e-6 * abs(alignment):
        logger.warning("pair.branch.off_axis", c=str(c), a1=a1, a2=a2)
    return c


def normalization_d(
    pair: PairConfig, a1: float, a2: float, b: Optional[ComplexPoint]
) -> float:
    """d = β₁|z₁ − z₂||z₁ − z̄₂| / (|√A(z₁)||B(z₁)|)."""
    return abs(residue_constant(pair, a1, a2, b))


def normalization_d_repellent(
    pair: PairConfig, a1: float, a2: float, b: Optional[ComplexPoint]
) -> float:
    """d from the residue at z₂: γβ₂|z₂ − z₁||z₂ − z̄₁| / (|√A(z₂)||B(z₂)|)."""
    if pair.gamma == 0 or pair.beta2 == 0:
        raise DomainError("the repellent residue vanishes", parameter="gamma")
    z1, z2 = pair.z1, pair.z2
    numerator = pair.gamma * pair.beta2 * abs(z2 - z1) * abs(z2 - z1.conjugate())
    return numerator / abs(_sqrt_a(z2, a1, a2) * _b_factor(z2, a1, a2, b))


# Endpoints ----


def b_root(pair: PairConfig, tol: Optional[Tolerances] = None) -> Optional[ComplexPoint]:
    """Root b of B: upper-half-plane below Γ₁, x₂ from Γ₁ on.

    None when B is constant (symmetric pair with β₁ < β₂ past its threshold).
    """
    tol = tol or DEFAULT_TOLERANCES
    classification = classify(pair, tol)
    if classification.phase is not Phase.PHASE1:
        x2 = classification.geometry.x2
        return ComplexPoint(re=x2, im=0.0) if math.isfinite(x2) else None

    lead, p, const = positive_part_quadratic(pair)
    disc = p * p - lead * const
    return ComplexPoint(re=p / lead, im=math.sqrt(max(-disc, 0.0)) / lead)


def _endpoint_residual(pair: PairConfig, x2: float) -> Callable[[float], float]:
    """a ↦ (β₁/β₂)|z₂ − a||z₂ − x₂| / (|z₁ − a||z₁ − x₂|) − γ."""
    z1, z2 = pair.z1, pair.z2
    # |z₂ − x₂|/β₂ tends to 1 as the repellent reaches the real axis
    ratio = abs(z2 - x2) / pair.beta2 if pair.beta2 > 0 else 1.0
    scale = pair.beta1 * ratio / abs(z1 - x2)

    def residual(a: float) -> float:
        return scale * abs(z2 - a) / abs(z1 - a) - pair.gamma

    return residual


def _bracketed_root(
    f: Callable[[float], float], lower: float, upper: float, tol: Tolerances
) -> float:
    f_lower, f_upper = f(lower), f(upper)
    if f_lower == 0.0:
        return lower
    if f_upper == 0.0:
        return upper
    if f_lower * f_upper > 0:
        raise ConvergenceError(
            f"no sign change on [{lower:.6g}, {upper:.6g}], phase misclassified",
            residual=min(abs(f_lower), abs(f_upper)),
        )
    result = optimize.root_scalar(
        f, bracket=[lower, upper], method="brentq", xtol=tol.root_xtol
    )
    if not result.converged:
        raise ConvergenceError(result.flag, residual=abs(f(result.root)))
    return float(result.root)


def symmetric_endpoint(pair: PairConfig, gamma: Optional[float] = None) -> float:
    """Closed-form endpoint a of a symmetric pair past its threshold."""
    if not pair.symmetric:
        raise DomainError("closed form applies to symmetric pairs", parameter="symmetric")
    gamma = pair.gamma if gamma is None else gamma
    b1, b2 = pair.beta1, pair.beta2

    if b1 > b2:
        if gamma >= 1.0:
            return INF
        radicand = (gamma**2 * b1**2 - b2**2) / (1.0 - gamma**2)
    elif b1 < b2:
        denominator = gamma**2 * b2**2 - b1**2
        if denominator == 0.0:
            return INF
        radicand = (1.0 - gamma**2) / denominator
        if radicand >= 0:
            return b1 * b2 * math.sqrt(radicand)
    else:
        raise DomainError("symmetric pair needs beta1 != beta2", parameter="beta1")

    if radicand < 0:
        raise DomainError("gamma is below the symmetric threshold", parameter="gamma")
    return math.sqrt(radicand)


def _symmetric_endpoints(pair: PairConfig, phase: Phase) -> Tuple[float, float]:
    if phase is Phase.PHASE1:
        raise DomainError("support is the whole line below Gamma1", parameter="gamma")
    if phase is Phase.TRANSITION1:
        # the gap opens at 0, or the segment closes in from infinity
        return (0.0, 0.0) if pair.beta1 > pair.beta2 else (-INF, INF)
    a = symmetric_endpoint(pair)
    if a == INF and pair.beta1 > pair.beta2:
        raise DomainError("support escapes to infinity at gamma = 1", parameter="gamma")
    if a == INF:
        return (-INF, INF)
    return (-a, a)


def solve_endpoints(
    pair: PairConfig, gamma: Optional[float] = None, tol: Optional[Tolerances] = None
) -> Tuple[float, float]:
    """Endpoints (a₁, a₂) of the support for Γ₁ ≤ γ ≤ 1.

    Phase2 gives the gap of (−∞, a₁] ∪ [a₂, ∞), Transition2 gives (x₀, inf),
    Phase3 gives the segment [a₁, a₂].
    """
    tol = tol or DEFAULT_TOLERANCES
    if gamma is not None:
        pair = pair.with_gamma(gamma)
    classification = classify(pair, tol)
    phase = classification.phase

    if pair.symmetric:
        return _symmetric_endpoints(pair, phase)

    geo = classification.geometry
    x0, x1, x2, r = geo.x0, geo.x1, geo.x2, geo.radius
    if phase is Phase.PHASE1:
        raise DomainError("support is the whole line below Gamma1", parameter="gamma")
    if phase is Phase.TRANSITION1:
        return (x2, x2)
    if phase is Phase.TRANSITION2:
        return (x0, INF)
    if pair.gamma >= 1.0 - tol.comparison:
        return (x1, x1)

    residual = _endpoint_residual(pair, x2)
    if phase is Phase.PHASE2:
        a1 = _bracketed_root(residual, x0, x2, tol)
        # both endpoints right of x₀, inverse to each other in the circle
        a2 = x0 + r * r / (a1 - x0)
    else:
        a2 = _bracketed_root(residual, x1, x0, tol)
        a1 = x0 - r * r / (x0 - a2)

    logger.debug("pair.endpoints.solved", gamma=pair.gamma, phase=phase.value, a1=a1, a2=a2)
    return (a1, a2)


def _support_for(phase: Phase, a1: float, a2: float) -> SupportSet:
    if phase in (Phase.PHASE1, Phase.TRANSITION1) or _full_line(a1, a2):
        return SupportSet.full_line()
    if phase is Phase.TRANSITION2:
        return SupportSet.of((-INF, a1))
    if phase is Phase.PHASE2:
        return SupportSet.of((-INF, a1), (a2, INF))
    return SupportSet.of((a1, a2))


def equilibrium_density(pair: PairConfig, tol: Optional[Tolerances] = None) -> DensityFn:
    """Classify the pair and assemble its closed-form equilibrium density."""
    tol = tol or DEFAULT_TOLERANCES
    classification = classify(pair, tol)
    phase = classification.phase

    if phase is Phase.PHASE1:
        lead, _, _ = positive_part_quadratic(pair)
        support = SupportSet.full_line()
        return DensityFn(
            phase=phase, a1=-INF, a2=INF, b=b_root(pair, tol), d=lead, pair=pair,
            support=support,
        )

    a1, a2 = solve_endpoints(pair, tol=tol)
    support = _support_for(phase, a1, a2)
    b = b_root(pair, tol)
    if _full_line(a1, a2):
        # symmetric pair with β₁ < β₂ exactly at its threshold: η' = C/(πD)
        _, _, const = positive_part_quadratic(pair)
        return DensityFn(phase=phase, a1=a1, a2=a2, b=None, d=const, pair=pair, support=support)

    c = residue_constant(pair, a1, a2, b, support)
    return DensityFn(phase=phase, a1=a1, a2=a2, b=b, d=abs(c), pair=pair, support=support)


# Density ----


def density_eval(df: DensityFn, x: ArrayLike) -> RealOrArray:
    """(d/π)·√|A(x)|·|B(x)| / D(x) on the support, 0 elsewhere."""
    pair = df.pair
    xs = np.asarray(x, dtype=float)
    s1, s2 = pair.z1.real, pair.z2.real
    if pair.gamma == 0:
        # no repellent: the balayage of the attractor
        return _as_result(pair.beta1 / (math.pi * ((xs - s1) ** 2 + pair.beta1**2)), x)
    denominator = ((xs - s1) ** 2 + pair.beta1**2) * ((xs - s2) ** 2 + pair.beta2**2)

    if _full_line(df.a1, df.a2):
        if df.b is None:
            numerator = np.ones_like(xs)
        else:
            numerator = (xs - df.b.re) ** 2 + df.b.im**2
    else:
        numerator = np.ones_like(xs)
        for a in (df.a1, df.a2):
            if math.isfinite(a):
                numerator = numerator * np.sqrt(np.abs(xs - a))
        if df.b is not None:
            numerator = numerator * np.abs(xs - df.b.re)

    inside = df.support.contains_point(xs)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(inside, df.d / math.pi * numerator / denominator, 0.0)
    return _as_result(values, x)


def density_mass(df: DensityFn, tol: Optional[Tolerances] = None) -> float:
    """∫ density over the support, interval by interval."""
    geo = geometry(df.pair)
    if math.isfinite(geo.x0):
        center, scale = geo.x0, geo.radius
    else:
        center, scale = 0.0, max(df.pair.beta1, df.pair.beta2)

    total = 0.0
    for interval in df.support.intervals:
        total += integrate_line(
            lambda x: density_eval(df, x), interval.lower, interval.upper, center, scale, tol
        )
    return total


# Bisectors and endpoint dynamics ----


def bisector_points(pair: PairConfig, a1: float, a2: float) -> BisectorPoints:
    """h = Im(z̄₂√A(z₂))/Im(√A(z₂)), k = Re(z̄₂√A(z₂))/Re(√A(z₂))."""
    z2 = pair.z2
    s = _sqrt_a(z2, a1, a2)
    w = z2.conjugate() * s
    if s.imag == 0.0 or s.real == 0.0:
        raise DomainError("bisectors are undefined for a collapsed support", parameter="a1")
    return BisectorPoints(h=w.imag / s.imag, k=w.real / s.real)


def regularized_split(
    pair: PairConfig, at: Literal["x1", "x2"], tol: Optional[Tolerances] = None
) -> Tuple[float, float]:
    """Endpoints pulled apart by δ₀ = ode_split·r around a collision point."""
    tol = tol or DEFAULT_TOLERANCES
    geo = geometry(pair)
    center = geo.x2 if at == "x2" else geo.x1
    delta = tol.ode_split * geo.radius
    return (center - delta, center + delta)


class _EndpointField:
    """Right-hand side of the endpoint ODE in γ, with b held at x₂."""

    def __init__(self, pair: PairConfig, phase: Phase):
        self.pair = pair
        self.x2 = geometry(pair).x2
        # √A(z̄) = conj √A(z) off a segment cut, −conj √A(z) off two rays
        self.reflection = 1.0 if phase is Phase.PHASE3 else -1.0

    def _coefficients(self, a1: float, a2: float) -> Tuple[complex, complex, complex]:
        pair, b = self.pair, ComplexPoint(re=self.x2, im=0.0)
        z2 = pair.z2
        s = _sqrt_a(z2, a1, a2)
        c = residue_constant(pair, a1, a2, b)
        m = -(s + self.reflection * s.conjugate()) / 2.0
        n = -1j * pair.beta2 * s - m * z2
        return c, m, n

    def __call__(self, gamma: float, y: np.ndarray) -> List[float]:
        a1, a2 = float(y[0]), float(y[1])
        c, m, n = self._coefficients(a1, a2)
        z1 = self.pair.z1

        def velocity(a: float, other: float) -> float:
            rate = -2.0 * (m * a + n) * abs(a - z1) ** 2 / (c * (a - other) * (a - self.x2))
            return rate.real

        return [velocity(a1, a2), velocity(a2, a1)]

    def b_residual(self, a1: float, a2: float) -> float:
        """|ḃ| at b = x₂; zero when x₂ stays on the bisector."""
        c, m, n = self._coefficients(a1, a2)
        x2 = self.x2
        a_at_b = (x2 - a1) * (x2 - a2)
        return abs((m * x2 + n) * abs(x2 - self.pair.z1) ** 2 / (c * a_at_b))


def endpoint_flow(
    pair: PairConfig,
    gamma_from: float,
    gamma_to: float,
    steps: int,
    start: Optional[Tuple[float, float]] = None,
    tol: Optional[Tolerances] = None,
) -> List[FlowSample]:
    """Integrate the endpoint ODE from gamma_from to gamma_to (either direction)."""
    tol = tol or DEFAULT_TOLERANCES
    if pair.symmetric or pair.beta2 == 0:
        raise DomainError("endpoint flow needs a generic pair with beta2 > 0")
    if steps < 2:
        raise DomainError("need at least two samples", parameter="steps")

    phases = {classify(pair.with_gamma(g), tol).phase for g in (gamma_from, gamma_to)}
    if len(phases) != 1 or not phases <= {Phase.PHASE2, Phase.PHASE3}:
        raise DomainError(
            "gamma range must stay inside Phase2 or Phase3", parameter="gamma_from"
        )
    phase = phases.pop()

    if start is None:
        start = solve_endpoints(pair, gamma=gamma_from, tol=tol)

    field = _EndpointField(pair, phase)
    grid = np.linspace(gamma_from, gamma_to, steps)
    logger.debug(
        "pair.flow.start", phase=phase.value, gamma_from=gamma_from, gamma_to=gamma_to
    )
    solution = integrate.solve_ivp(
        field,
        (gamma_from, gamma_to),
        list(start),
        method="DOP853",
        t_eval=grid,
        rtol=tol.ode_rtol,
        atol=tol.ode_atol,
    )
    if not solution.success:
        raise ConvergenceError(f"endpoint flow failed: {solution.message}")

    samples = [
        FlowSample(gamma=float(g), a1=float(a1), a2=float(a2), b_residual=field.b_residual(a1, a2))
        for g, a1, a2 in zip(solution.t, solution.y[0], solution.y[1])
    ]
    logger.debug("pair.flow.done", samples=len(samples), evaluations=solution.nfev)
    return samples


def phase_report(pair: PairConfig, tol: Optional[Tolerances] = None) -> Tuple[PhaseClassification, DensityFn]:
    """Classification together with the density built from it."""
    return classify(pair, tol), equilibrium_density(pair, tol)
