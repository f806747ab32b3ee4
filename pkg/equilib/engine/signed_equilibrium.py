"""Signed equilibrium measures, the compactness criterion, and supports.

The signed equilibrium measure of a charge set is the superposition of the
balayages of its charges, η = Σ γⱼ Bal(δ_{zⱼ}, ℝ). Its positive part carries
the support of the equilibrium measure.
"""

import math
from typing import Optional, Tuple

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, model_validator

from ..errors import DomainError
from ..runtime.config import DEFAULT_TOLERANCES, Tolerances
from .charges import (
    ChargeSet,
    ComplexPoint,
    PairConfig,
    RealOrArray,
    _as_result,
    balayage_point_density,
)
from .quadrature import integrate_line

logger = structlog.get_logger(__name__)

INF = math.inf


class Interval(BaseModel):
    """Closed interval with extended-real endpoints."""
    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float

    @model_validator(mode="after")
    def _check_order(self) -> "Interval":
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise ValueError("interval endpoints must not be NaN")
        if self.lower > self.upper or self.lower == INF or self.upper == -INF:
            raise ValueError(f"invalid interval [{self.lower}, {self.upper}]")
        return self

    @property
    def is_bounded(self) -> bool:
        return math.isfinite(self.lower) and math.isfinite(self.upper)

    def contains(self, other: "Interval", slack: float = 0.0) -> bool:
        return self.lower <= other.lower + slack and other.upper <= self.upper + slack


class SupportSet(BaseModel):
    """Sorted, pairwise disjoint closed intervals."""
    model_config = ConfigDict(frozen=True)

    intervals: Tuple[Interval, ...]

    @model_validator(mode="after")
    def _check_disjoint(self) -> "SupportSet":
        for left, right in zip(self.intervals, self.intervals[1:]):
            if not left.upper < right.lower:
                raise ValueError("intervals must be sorted and disjoint")
        return self

    @classmethod
    def of(cls, *bounds: Tuple[float, float]) -> "SupportSet":
        return cls(intervals=tuple(Interval(lower=lo, upper=hi) for lo, hi in bounds))

    @classmethod
    def full_line(cls) -> "SupportSet":
        return cls.of((-INF, INF))

    @property
    def component_count(self) -> int:
        return len(self.intervals)

    @property
    def is_bounded(self) -> bool:
        return all(interval.is_bounded for interval in self.intervals)

    @property
    def is_full_line(self) -> bool:
        return self.intervals == (Interval(lower=-INF, upper=INF),)

    def contains_point(self, x: ArrayLike) -> NDArray[np.bool_]:
        xs = np.asarray(x, dtype=float)
        mask = np.zeros(xs.shape, dtype=bool)
        for interval in self.intervals:
            mask |= (xs >= interval.lower) & (xs <= interval.upper)
        return mask

    def contains(self, other: "SupportSet", slack: float = 0.0) -> bool:
        """Whether every interval of `other` sits inside one of ours."""
        return all(
            any(mine.contains(theirs, slack) for mine in self.intervals)
            for theirs in other.intervals
        )

    def endpoints(self) -> Tuple[float, float]:
        """Inner endpoints: the gap for unbounded supports, the hull otherwise.

        ℝ → (-inf, inf); (-∞,p] ∪ [q,∞) → (p, q); (-∞,p] → (p, inf);
        [q,∞) → (-inf, q); [p,q] → (p, q).
        """
        if not self.intervals:
            raise DomainError("empty support has no endpoints")
        first, last = self.intervals[0], self.intervals[-1]
        if self.is_full_line:
            return (-INF, INF)
        if first.lower == -INF and last.upper == INF:
            return (first.upper, last.lower)
        if first.lower == -INF:
            return (first.upper, INF)
        if last.upper == INF:
            return (-INF, last.lower)
        return (first.lower, last.upper)


class SignedDensity(BaseModel):
    """η' of a charge set, callable on reals or arrays."""
    model_config = ConfigDict(frozen=True)

    charges: ChargeSet

    def __call__(self, x: ArrayLike) -> RealOrArray:
        return signed_density_eval(self.charges, x)

    def mass(self, tol: Optional[Tolerances] = None) -> float:
        return signed_mass(self.charges, tol)


def _require_off_axis(charges: ChargeSet) -> None:
    if charges.has_real_charge:
        raise DomainError("signed equilibrium needs every charge off the real axis", "charges")


# Public API ----


def signed_density_eval(charges: ChargeSet, x: ArrayLike) -> RealOrArray:
    """η'(x) = (1/π) Σ γⱼ |Im zⱼ| / |x − zⱼ|²."""
    _require_off_axis(charges)
    xs = np.asarray(x, dtype=float)
    total = np.zeros_like(xs)
    for charge in charges.charges:
        total = total + charge.strength * balayage_point_density(charge.location, xs)
    return _as_result(total, x)


def tail_coefficient(charges: ChargeSet) -> float:
    """Σ γⱼ|Im zⱼ|, so that η'(x) ~ tail/(πx²) at infinity."""
    _require_off_axis(charges)
    return math.fsum(c.strength * abs(c.location.im) for c in charges.charges)


def compact_support_criterion(charges: ChargeSet) -> bool:
    """A negative tail coefficient forces a compact equilibrium support."""
    return tail_coefficient(charges) < 0


def signed_mass(charges: ChargeSet, tol: Optional[Tolerances] = None) -> float:
    """∫η' dx, charge by charge with a substitution centered on each charge."""
    _require_off_axis(charges)
    total = 0.0
    for charge in charges.charges:
        location = charge.location
        part = integrate_line(
            lambda x, z=location: balayage_point_density(z, x),
            -INF,
            INF,
            center=location.re,
            scale=abs(location.im),
            tol=tol,
        )
        total += charge.strength * part
    return total


def positive_part_quadratic(pair: PairConfig) -> Tuple[float, float, float]:
    """Coefficients (L, p, C) of the numerator N(x) = Lx² − 2px + C of π·D(x)·η'(x)."""
    beta1, beta2, gamma = pair.beta1, pair.beta2, pair.gamma
    s1, s2 = pair.z1.real, pair.z2.real
    lead = beta1 - gamma * beta2
    half_linear = beta1 * s2 - gamma * beta2 * s1
    const = beta1 * (s2 * s2 + beta2 * beta2) - gamma * beta2 * (s1 * s1 + beta1 * beta1)
    return lead, half_linear, const


def positive_part_roots(
    pair: PairConfig, tol: Optional[Tolerances] = None
) -> Tuple[float, ...]:
    """Real roots of the positive-part numerator, sorted; a double root is repeated."""
    tol = tol or DEFAULT_TOLERANCES
    lead, p, const = positive_part_quadratic(pair)

    if abs(lead) < tol.linear_switch * (pair.beta1 + pair.gamma * pair.beta2):
        if p == 0.0:
            return ()
        return (const / (2.0 * p),)

    disc = p * p - lead * const
    if abs(disc) <= tol.double_root * (p * p + abs(lead * const)):
        root = p / lead
        return (root, root)
    if disc < 0:
        return ()

    # q and const/q avoid cancellation between p and the square root
    q = p + math.copysign(math.sqrt(disc), p) if p != 0.0 else math.sqrt(disc)
    first, second = q / lead, const / q
    return (min(first, second), max(first, second))


def positive_part_support(
    pair: PairConfig, tol: Optional[Tolerances] = None
) -> SupportSet:
    """Support of η⁺ for the attractor/repellent pair."""
    if pair.beta2 == 0:
        raise DomainError("the repellent lies on the real axis", parameter="beta2")
    tol = tol or DEFAULT_TOLERANCES
    lead, p, const = positive_part_quadratic(pair)
    roots = positive_part_roots(pair, tol)

    if len(roots) == 1:
        # N(x) = -2px + C with p > 0 in the generic configuration
        root = roots[0]
        return SupportSet.of((-INF, root)) if p > 0 else SupportSet.of((root, INF))
    if abs(lead) < tol.linear_switch * (pair.beta1 + pair.gamma * pair.beta2):
        if const >= 0:
            return SupportSet.full_line()
        raise DomainError("signed density is nowhere positive", parameter="gamma")

    if lead > 0:
        if not roots or roots[0] == roots[1]:
            return SupportSet.full_line()
        return SupportSet.of((-INF, roots[0]), (roots[1], INF))

    if not roots:
        raise DomainError("signed density is nowhere positive", parameter="gamma")
    logger.debug("signed.support.bounded", lower=roots[0], upper=roots[1])
    return SupportSet.of((roots[0], roots[1]))


def pair_signed_density(pair: PairConfig, x: ArrayLike) -> RealOrArray:
    """η'(x) for the pair, also at γ = 1 where the total mass vanishes."""
    if pair.beta2 == 0 and pair.gamma > 0:
        raise DomainError("the repellent lies on the real axis", parameter="beta2")
    xs = np.asarray(x, dtype=float)
    values = np.asarray(balayage_point_density(ComplexPoint.of(pair.z1), xs))
    if pair.gamma > 0:
        values = values - pair.gamma * np.asarray(balayage_point_density(ComplexPoint.of(pair.z2), xs))
    return _as_result(values, x)
