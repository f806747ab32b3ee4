"""Grid-discretized weighted-energy minimizer and Frostman verifier.

A measure on a uniform grid is a vector of cell masses. The energy of two
uniform cells m cells apart is the Toeplitz kernel k(m); with it

    I_Q(w) = wᵀKw + 2wᵀQ

is a convex quadratic minimized over {w ≥ 0, Σw = t} by accelerated
projected gradient.
"""

import functools
import math
from pathlib import Path
from typing import Callable, Iterable, List, Optional, Sequence, TextIO, Tuple, Union

import numpy as np
import structlog
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import fft, special

from ..errors import ConvergenceError, DomainError
from ..runtime.config import DEFAULT_TOLERANCES, Tolerances
from .charges import ChargeSet, PairConfig, balayage_interval_mass, field_eval
from .pair_phases import geometry
from .signed_equilibrium import SupportSet

logger = structlog.get_logger(__name__)

# beyond this distance the exact second difference loses digits to cancellation
_ASYMPTOTIC_FROM = 64
_CHECK_EVERY = 10


class Grid(BaseModel):
    """Uniform grid of `nodes` points on [lower, upper]."""
    model_config = ConfigDict(frozen=True)

    lower: float
    upper: float
    nodes: int = Field(ge=3)

    @model_validator(mode="after")
    def _check_bounds(self) -> "Grid":
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("grid bounds must be finite")
        if not self.lower < self.upper:
            raise ValueError("grid needs lower < upper")
        return self

    @classmethod
    def create(cls, lower: float, upper: float, nodes: int) -> "Grid":
        try:
            return cls(lower=lower, upper=upper, nodes=nodes)
        except ValueError as e:
            raise DomainError(str(e), parameter="grid") from e

    @property
    def spacing(self) -> float:
        return (self.upper - self.lower) / (self.nodes - 1)

    def points(self) -> NDArray[np.float64]:
        return np.linspace(self.lower, self.upper, self.nodes)


class GridMeasure(BaseModel):
    """Cell masses on a grid, with the solver state that produced them."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    grid: Grid
    weights: np.ndarray
    mass: float
    iterations: int = 0
    residual: float = 0.0
    converged: bool = True

    @model_validator(mode="after")
    def _check_weights(self) -> "GridMeasure":
        if self.weights.shape != (self.grid.nodes,):
            raise ValueError("one weight per grid node")
        if np.any(self.weights < 0):
            raise ValueError("weights must be nonnegative")
        if abs(self.weights.sum() - self.mass) > 1e-12 * max(1.0, abs(self.mass)):
            raise ValueError("weights must sum to mass")
        return self

    @classmethod
    def from_weights(cls, grid: Grid, weights: ArrayLike, **state: object) -> "GridMeasure":
        w = np.asarray(weights, dtype=float)
        return cls(grid=grid, weights=w, mass=float(w.sum()), **state)

    @property
    def density(self) -> NDArray[np.float64]:
        return self.weights / self.grid.spacing


class FrostmanReport(BaseModel):
    """Equilibrium constant estimate and the worst violation on each side."""
    model_config = ConfigDict(frozen=True)

    c_est: float
    max_lower_violation: float
    max_upper_violation: float

    @property
    def worst(self) -> float:
        return max(self.max_lower_violation, self.max_upper_violation)


# Kernel ----


def cell_kernel(count: int, spacing: float) -> NDArray[np.float64]:
    """k(m) = −(1/h²)∫∫ log|x − y| over two cells m apart, m = 0..count−1."""
    m = np.arange(count, dtype=float)
    values = np.empty(count)

    exact = m < _ASYMPTOTIC_FROM

    def g(x: NDArray[np.float64]) -> NDArray[np.float64]:
        return special.xlogy(x * x, np.abs(x))

    me = m[exact]
    values[exact] = 1.5 - 0.5 * (g(me + 1.0) - 2.0 * g(me) + g(me - 1.0))

    ma = m[~exact]
    values[~exact] = -np.log(ma) + 1.0 / (12.0 * ma**2) + 1.0 / (60.0 * ma**4)
    return values - math.log(spacing)


class ToeplitzOperator:
    """w ↦ Kw for the symmetric Toeplitz kernel, by circulant embedding."""

    def __init__(self, column: NDArray[np.float64]):
        self.size = column.size
        embedded = np.concatenate([column, [0.0], column[:0:-1]])
        self._spectrum = fft.rfft(embedded)
        self._length = embedded.size

    def __call__(self, w: NDArray[np.float64]) -> NDArray[np.float64]:
        product = fft.irfft(self._spectrum * fft.rfft(w, self._length), self._length)
        return product[: self.size]


@functools.lru_cache(maxsize=8)
def _operator(grid: Grid) -> ToeplitzOperator:
    return ToeplitzOperator(cell_kernel(grid.nodes, grid.spacing))


def _field_on(grid: Grid, charges: ChargeSet) -> NDArray[np.float64]:
    return np.asarray(field_eval(charges, grid.points()), dtype=float)


def project_simplex(v: NDArray[np.float64], total: float = 1.0) -> NDArray[np.float64]:
    """Euclidean projection onto {w ≥ 0, Σw = total}."""
    u = np.sort(v)[::-1]
    excess = np.cumsum(u) - total
    index = np.arange(1, v.size + 1)
    feasible = u - excess / index > 0
    rho = index[feasible][-1]
    theta = excess[feasible][-1] / rho
    return np.maximum(v - theta, 0.0)


def zero_sum_curvature(
    apply: Callable[[NDArray[np.float64]], NDArray[np.float64]],
    index: NDArray[np.intp],
    nodes: int,
    iterations: int = 30,
) -> float:
    """Starting step constant 2λ, λ the top eigenvalue of K on zero-sum vectors over `index`.

    K itself is indefinite, but every step between two points of the simplex
    has zero sum, and there the log energy is positive.
    """
    if index.size < 2:
        return 1.0

    def centered(v: NDArray[np.float64]) -> NDArray[np.float64]:
        out = np.zeros(nodes)
        out[index] = v[index] - v[index].mean()
        return out

    # the slowest oscillation is the dominant mode
    mode = np.zeros(nodes)
    mode[index] = np.cos(np.linspace(0.0, math.pi, index.size))
    mode = centered(mode)
    mode /= np.linalg.norm(mode)
    for _ in range(iterations):
        image = centered(apply(mode))
        mode = image / np.linalg.norm(image)
    value = 2.0 * float(mode @ apply(mode))
    # backtracking only ever doubles the constant, so it must start positive
    return value if value > 0 else 1.0


# Public API ----


def grid_energy(m: GridMeasure, charges: ChargeSet) -> float:
    """I_Q(w) = Σᵢⱼ wᵢwⱼk(i − j) + 2Σᵢ wᵢQ(xᵢ), with k(0) = 3/2 − log h."""
    q = _field_on(m.grid, charges)
    w = m.weights
    carried = w > 0
    if np.any(np.isinf(q[carried])):
        raise DomainError("measure charges a node on top of a real repellent", "weights")
    return float(w @ _operator(m.grid)(w) + 2.0 * (w[carried] @ q[carried]))


def _residual_parts(
    w: NDArray[np.float64],
    kw: NDArray[np.float64],
    q: NDArray[np.float64],
    active: NDArray[np.bool_],
    tol: Tolerances,
) -> FrostmanReport:
    total = kw + np.where(active, q, 0.0)
    mass = w[active].sum()
    c_est = float(w[active] @ total[active] / mass)
    lower = float(np.max(c_est - total[active], initial=0.0))
    carried = active & (w > tol.weight_support * w.max())
    upper = float(np.max(total[carried] - c_est, initial=0.0))
    return FrostmanReport(
        c_est=c_est, max_lower_violation=max(lower, 0.0), max_upper_violation=max(upper, 0.0)
    )


def frostman_residual(
    m: GridMeasure,
    charges: ChargeSet,
    window: Optional[Tuple[float, float]] = None,
    tol: Optional[Tolerances] = None,
) -> FrostmanReport:
    """Violations of V + Q ≥ c everywhere and V + Q ≤ c on the weighted nodes.

    c_est is the w-weighted mean of V + Q, the discrete equilibrium constant.
    With a window, only nodes inside it take part.
    """
    tol = tol or DEFAULT_TOLERANCES
    if not m.mass > 0:
        raise DomainError("measure must have positive mass", parameter="mass")
    q = _field_on(m.grid, charges)
    active = np.isfinite(q)
    if window is not None:
        x = m.grid.points()
        active &= (x >= window[0]) & (x <= window[1])
        if not np.any(m.weights[active] > 0):
            raise DomainError("no weighted node inside the window", parameter="window")
    return _residual_parts(m.weights, _operator(m.grid)(m.weights), q, active, tol)


def minimize(
    charges: ChargeSet,
    t: float,
    grid: Grid,
    max_iter: int = 20000,
    tol: Optional[Tolerances] = None,
    callback: Optional[Callable[[int, float], None]] = None,
    strict: bool = False,
) -> GridMeasure:
    """Minimize the discrete weighted energy at mass t by monotone FISTA.

    Stops once both Frostman violations fall below tolerances.frostman. The
    callback receives (iteration, energy) after every accepted step.
    """
    tol = tol or DEFAULT_TOLERANCES
    if not 0 < t <= charges.total_mass * (1.0 + 1e-12):
        raise DomainError(f"mass must lie in (0, {charges.total_mass}]", parameter="t")

    apply = _operator(grid)
    q_raw = _field_on(grid, charges)
    active = np.isfinite(q_raw)
    q = np.where(active, q_raw, 0.0)
    index = np.flatnonzero(active)

    def energy(w: NDArray[np.float64], kw: NDArray[np.float64]) -> float:
        return float(w @ kw + 2.0 * (w @ q))

    def project(v: NDArray[np.float64]) -> NDArray[np.float64]:
        out = np.zeros(grid.nodes)
        out[index] = project_simplex(v[index], t)
        return out

    w = np.zeros(grid.nodes)
    w[index] = t / index.size
    kw = apply(w)
    e_w = energy(w, kw)

    lipschitz = zero_sum_curvature(apply, index, grid.nodes)

    y, ky, theta = w.copy(), kw.copy(), 1.0
    report = _residual_parts(w, kw, q, active, tol)
    iteration = 0
    for iteration in range(1, max_iter + 1):
        gradient = 2.0 * (ky + q)
        e_y = energy(y, ky)
        while True:
            z = project(y - gradient / lipschitz)
            kz = apply(z)
            step = z - y
            if energy(z, kz) <= e_y + gradient @ step + 0.5 * lipschitz * (step @ step) + 1e-15 * abs(e_y):
                break
            lipschitz *= 2.0

        e_z = energy(z, kz)
        if e_z <= e_w:
            theta_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * theta * theta))
            momentum = (theta - 1.0) / theta_next
            y = z + momentum * (z - w)
            ky = kz + momentum * (kz - kw)
            w, kw, e_w, theta = z, kz, e_z, theta_next
        else:
            # restart the momentum from the last accepted iterate
            y, ky, theta = w.copy(), kw.copy(), 1.0

        if callback is not None:
            callback(iteration, e_w)
        if iteration % _CHECK_EVERY == 0:
            report = _residual_parts(w, kw, q, active, tol)
            if report.worst < tol.frostman:
                break

    report = _residual_parts(w, kw, q, active, tol)
    converged = report.worst < tol.frostman
    logger.debug(
        "oracle.minimize.done",
        nodes=grid.nodes,
        mass=t,
        iterations=iteration,
        residual=report.worst,
        converged=converged,
    )
    if not converged:
        if strict:
            raise ConvergenceError("grid minimizer hit its iteration cap", residual=report.worst)
        logger.warning("oracle.minimize.not_converged", iterations=iteration, residual=report.worst)

    # projection leaves Σw = t up to rounding; rescale onto the exact mass
    w = w * (t / w.sum())
    return GridMeasure.from_weights(
        grid, w, iterations=iteration, residual=report.worst, converged=converged
    )


def grid_potential(m: GridMeasure, points: Iterable[float]) -> List[float]:
    """V(x) = −Σ wⱼ log|x − xⱼ|; at a node the cell-averaged kernel is used instead."""
    grid = m.grid
    x_nodes = grid.points()
    h = grid.spacing
    at_nodes = _operator(grid)(m.weights)
    carried = m.weights > 0

    values: List[float] = []
    for x in points:
        offset = (x - grid.lower) / h
        nearest = int(round(offset))
        if 0 <= nearest < grid.nodes and abs(offset - nearest) < 1e-9:
            values.append(float(at_nodes[nearest]))
            continue
        distance = np.abs(x - x_nodes[carried])
        values.append(float(-(m.weights[carried] @ np.log(distance))))
    return values


def support_estimate(m: GridMeasure, threshold: float = 1e-4) -> SupportSet:
    """Maximal runs of nodes with w > threshold·max(w), bridging single-node gaps."""
    if not 0 < threshold < 1:
        raise DomainError("threshold must lie in (0, 1)", parameter="threshold")
    x = m.grid.points()
    marked = np.flatnonzero(m.weights > threshold * m.weights.max())
    if marked.size == 0:
        return SupportSet(intervals=())

    runs: List[Tuple[float, float]] = []
    start = previous = int(marked[0])
    for i in marked[1:]:
        if i - previous > 2:
            runs.append((x[start], x[previous]))
            start = int(i)
        previous = int(i)
    runs.append((x[start], x[previous]))

    # a run of one node is a degenerate interval [x, x]
    return SupportSet.of(*runs)


def cumulative_dominates(
    smaller: GridMeasure, larger: GridMeasure, tol: float = 1e-4
) -> bool:
    """Whether W_smaller(x) ≤ W_larger(x) + tol at every node."""
    if smaller.grid != larger.grid:
        raise DomainError("measures live on different grids", parameter="grid")
    gap = np.cumsum(smaller.weights) - np.cumsum(larger.weights)
    return bool(np.all(gap <= tol))


def mass_monotonicity_check(
    charges: ChargeSet,
    masses: Sequence[float],
    grid: Grid,
    tol: float = 1e-4,
    max_iter: int = 20000,
) -> bool:
    """Minimize at each mass and compare consecutive cumulative weight functions."""
    if any(b < a for a, b in zip(masses, masses[1:])):
        raise DomainError("masses must be nondecreasing", parameter="masses")
    measures = [minimize(charges, t, grid, max_iter=max_iter) for t in masses]
    return all(cumulative_dominates(a, b, tol) for a, b in zip(measures, measures[1:]))


# Grids and sampled measures ----


def default_grid(source: Union[PairConfig, ChargeSet], nodes: int = 4001) -> Grid:
    """[−L, L] with L = max(50, 20(1 + r)), r the geometric scale of the problem."""
    if isinstance(source, PairConfig):
        radius = geometry(source).radius
        if not math.isfinite(radius):
            radius = max(source.beta1, source.beta2)
    else:
        radius = source.scale()
    half = max(50.0, 20.0 * (1.0 + radius))
    return Grid.create(-half, half, nodes)


def tail_mass_bound(charges: ChargeSet, half_width: float) -> float:
    """Σ|γⱼ|·Bal(δ_zⱼ)(ℝ \\ [−L, L]), bounding ∫_{|x|>L} |η'| dx."""
    total = 0.0
    for charge in charges.charges:
        z, weight = charge.location, abs(charge.strength)
        if z.is_real:
            total += weight if abs(z.re) > half_width else 0.0
            continue
        inside = balayage_interval_mass(z, -half_width, half_width)
        total += weight * (1.0 - float(inside))
    return total


def _cell_bounds(grid: Grid) -> Tuple[NDArray[np.float64], NDArray[np.float64]]:
    x, h = grid.points(), grid.spacing
    return x - h / 2, x + h / 2


def sample_balayage(charges: ChargeSet, grid: Grid) -> GridMeasure:
    """Exact cell masses of Σ γⱼ Bal(δ_zⱼ, ℝ) on the grid's cells."""
    lo, hi = _cell_bounds(grid)
    weights = np.zeros(grid.nodes)
    for charge in charges.charges:
        weights = weights + charge.strength * np.asarray(
            balayage_interval_mass(charge.location, lo, hi)
        )
    if np.any(weights < 0):
        raise DomainError("signed balayage is not a positive measure", parameter="charges")
    return GridMeasure.from_weights(grid, weights)


def sample_density(
    density: Callable[[NDArray[np.float64]], ArrayLike], grid: Grid, mass: Optional[float] = None
) -> GridMeasure:
    """Weights density(xᵢ)·h, optionally rescaled to a given mass."""
    weights = np.clip(np.asarray(density(grid.points()), dtype=float), 0.0, None) * grid.spacing
    if mass is not None:
        weights = weights * (mass / weights.sum())
    return GridMeasure.from_weights(grid, weights)


def export_csv(m: GridMeasure, target: Union[str, Path, TextIO]) -> None:
    """Write `x,weight,density` rows."""
    table = np.column_stack([m.grid.points(), m.weights, m.density])
    np.savetxt(target, table, delimiter=",", header="x,weight,density", comments="", fmt="%.15g")
