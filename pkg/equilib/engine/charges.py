"""Point charges, the external field they create, and their balayage onto ℝ.

The field of a charge set is Q(x) = Σ γⱼ log|x − zⱼ|: positive strengths
attract the free charge living on the real line, negative ones repel it.
"""

import math
from typing import Dict, Iterable, List, Tuple, Union

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..errors import DomainError, PoleError

logger = structlog.get_logger(__name__)

RealOrArray = Union[float, NDArray[np.float64]]


def _as_result(values: NDArray[np.float64], x: ArrayLike) -> RealOrArray:
    """Return a Python float for scalar input, the array otherwise."""
    if np.ndim(x) == 0:
        return float(values)
    return values


class ComplexPoint(BaseModel):
    """A point of the complex plane."""
    model_config = ConfigDict(frozen=True)

    re: float
    im: float

    @field_validator("re", "im")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("components must be finite")
        return value

    @classmethod
    def of(cls, z: complex) -> "ComplexPoint":
        return cls(re=z.real, im=z.imag)

    def as_complex(self) -> complex:
        return complex(self.re, self.im)

    @property
    def is_real(self) -> bool:
        return self.im == 0.0


class Charge(BaseModel):
    """A pointwise charge: positive strength attracts, negative repels."""
    model_config = ConfigDict(frozen=True)

    location: ComplexPoint
    strength: float

    @model_validator(mode="after")
    def _check_strength(self) -> "Charge":
        if self.strength == 0.0 or not math.isfinite(self.strength):
            raise ValueError("strength must be finite and non-zero")
        if self.strength > 0 and self.location.is_real:
            raise ValueError("attractors must lie off the real axis")
        return self


class ChargeSet(BaseModel):
    """An ordered set of charges with distinct locations and total mass T > 0."""
    model_config = ConfigDict(frozen=True)

    charges: Tuple[Charge, ...]
    total_mass: float

    @model_validator(mode="after")
    def _check_mass(self) -> "ChargeSet":
        locations = [(c.location.re, c.location.im) for c in self.charges]
        if len(set(locations)) != len(locations):
            raise ValueError("charge locations must be distinct, use from_charges")
        if self.total_mass != math.fsum(c.strength for c in self.charges):
            raise ValueError("total_mass must equal the sum of strengths")
        if not self.total_mass > 0:
            raise ValueError(f"total mass must be positive, got {self.total_mass}")
        return self

    @classmethod
    def from_charges(cls, charges: Iterable[Charge]) -> "ChargeSet":
        """Build a charge set, merging charges placed at the same location."""
        merged: Dict[Tuple[float, float], float] = {}
        for charge in charges:
            key = (charge.location.re, charge.location.im)
            merged[key] = merged.get(key, 0.0) + charge.strength

        kept: List[Charge] = []
        for (re, im), strength in merged.items():
            if strength == 0.0:
                logger.debug("charges.merge.cancelled", re=re, im=im)
                continue
            kept.append(_charge(re, im, strength))

        total = math.fsum(c.strength for c in kept)
        try:
            return cls(charges=tuple(kept), total_mass=total)
        except ValidationError as e:
            raise DomainError(_first_error(e), parameter="charges") from e

    @classmethod
    def from_triples(cls, triples: Iterable[Tuple[float, float, float]]) -> "ChargeSet":
        """Build from `(re, im, strength)` triples."""
        return cls.from_charges(_charge(re, im, s) for re, im, s in triples)

    def scaled(self, factor: float) -> "ChargeSet":
        """Charge set generating the field factor·Q."""
        if not factor > 0:
            raise DomainError("scale factor must be positive", parameter="factor")
        return ChargeSet.from_triples(
            (c.location.re, c.location.im, c.strength * factor) for c in self.charges
        )

    @property
    def locations(self) -> NDArray[np.complex128]:
        return np.array([c.location.as_complex() for c in self.charges])

    @property
    def strengths(self) -> NDArray[np.float64]:
        return np.array([c.strength for c in self.charges])

    @property
    def has_real_charge(self) -> bool:
        return any(c.location.is_real for c in self.charges)

    def scale(self) -> float:
        """Largest distance of a charge from the origin."""
        return max(abs(c.location.as_complex()) for c in self.charges)


class PairConfig(BaseModel):
    """Attractor of charge 1 at z₁ and repellent of charge −γ at z₂.

    In the generic case z₁ = −1 + iβ₁ and z₂ = 1 + iβ₂; with `symmetric`
    both charges sit on the imaginary axis, z₁ = iβ₁ and z₂ = iβ₂.
    """
    model_config = ConfigDict(frozen=True)

    beta1: float = Field(gt=0)
    beta2: float = Field(ge=0)
    gamma: float = Field(ge=0, le=1)
    symmetric: bool = False

    @model_validator(mode="after")
    def _check_symmetric(self) -> "PairConfig":
        if self.symmetric and self.beta2 == 0:
            raise ValueError("the symmetric configuration needs beta2 > 0")
        return self

    @classmethod
    def create(
        cls, beta1: float, beta2: float, gamma: float, symmetric: bool = False
    ) -> "PairConfig":
        """Validated constructor raising DomainError."""
        try:
            return cls(beta1=beta1, beta2=beta2, gamma=gamma, symmetric=symmetric)
        except ValidationError as e:
            raise DomainError(_first_error(e), parameter="pair") from e

    def with_gamma(self, gamma: float) -> "PairConfig":
        return PairConfig.create(self.beta1, self.beta2, gamma, self.symmetric)

    @property
    def z1(self) -> complex:
        return complex(0.0 if self.symmetric else -1.0, self.beta1)

    @property
    def z2(self) -> complex:
        return complex(0.0 if self.symmetric else 1.0, self.beta2)

    @property
    def total_mass(self) -> float:
        return 1.0 - self.gamma

    def charge_set(self) -> ChargeSet:
        """The two charges as a ChargeSet (needs γ < 1)."""
        if self.gamma >= 1.0:
            raise DomainError("total mass 1 - gamma must be positive", parameter="gamma")
        triples = [(self.z1.real, self.z1.imag, 1.0)]
        if self.gamma > 0:
            triples.append((self.z2.real, self.z2.imag, -self.gamma))
        return ChargeSet.from_triples(triples)


def _charge(re: float, im: float, strength: float) -> Charge:
    try:
        return Charge(location=ComplexPoint(re=re, im=im), strength=strength)
    except ValidationError as e:
        raise DomainError(_first_error(e), parameter="charge") from e


def _first_error(error: ValidationError) -> str:
    details = error.errors()
    return str(details[0]["msg"]) if details else str(error)


# Field evaluation ----


def field_eval(charges: ChargeSet, x: ArrayLike) -> RealOrArray:
    """Q(x) = Σ γⱼ log|x − zⱼ|, +inf on top of a real repellent."""
    xs = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(xs)):
        raise DomainError("x must be finite", parameter="x")
    total = np.zeros_like(xs)
    with np.errstate(divide="ignore"):
        for charge in charges.charges:
            distance = np.hypot(xs - charge.location.re, charge.location.im)
            total = total + charge.strength * np.log(distance)
    return _as_result(total, x)


def field_derivative(charges: ChargeSet, x: ArrayLike) -> RealOrArray:
    """Q'(x) = Σ γⱼ (x − Re zⱼ)/|x − zⱼ|²."""
    xs = np.asarray(x, dtype=float)
    total = np.zeros_like(xs)
    for charge in charges.charges:
        dx = xs - charge.location.re
        denominator = dx * dx + charge.location.im**2
        if np.any(denominator == 0.0):
            raise PoleError("field derivative has a pole at a real charge", charge.location.re)
        total = total + charge.strength * dx / denominator
    return _as_result(total, x)


def balayage_point_density(z: ComplexPoint, x: ArrayLike) -> RealOrArray:
    """Density of Bal(δ_z, ℝ): the Cauchy density |Im z| / (π|x − z|²)."""
    if z.is_real:
        raise DomainError("balayage of a real point mass is singular", parameter="z")
    xs = np.asarray(x, dtype=float)
    width = abs(z.im)
    values = width / (math.pi * ((xs - z.re) ** 2 + width * width))
    return _as_result(values, x)


def balayage_interval_mass(z: ComplexPoint, lower: ArrayLike, upper: ArrayLike) -> RealOrArray:
    """Exact mass Bal(δ_z, ℝ) gives to [lower, upper]; infinite bounds allowed."""
    if z.is_real:
        raise DomainError("balayage of a real point mass is singular", parameter="z")
    width = abs(z.im)
    lo = np.arctan((np.asarray(lower, dtype=float) - z.re) / width)
    hi = np.arctan((np.asarray(upper, dtype=float) - z.re) / width)
    return _as_result((hi - lo) / math.pi, upper)
