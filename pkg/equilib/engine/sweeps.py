"""Parameter sweeps over γ and (β₁, β₂), one row per sample point.

Rows are computed by module-level functions so a multiprocessing pool can
pickle them; `Pool.map` returns results in input order.
"""

import math
import os
from multiprocessing import Pool
from typing import Callable, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
import structlog
from pydantic import BaseModel

from ..errors import EquilibError
from ..runtime.log import configure_logging
from .charges import PairConfig
from .pair_phases import Phase, classify
from .pair_solver import solve_endpoints
from .signed_equilibrium import positive_part_support

logger = structlog.get_logger(__name__)

T = TypeVar("T")
R = TypeVar("R")

NAN = math.nan


class EvolutionRow(BaseModel):
    """Equilibrium and positive-part endpoints at one γ."""
    gamma: float
    phase: Phase
    a1: float
    a2: float
    a1_plus: float
    a2_plus: float
    error: Optional[str] = None

    def values(self) -> Tuple[object, ...]:
        return (self.gamma, self.phase, self.a1, self.a2, self.a1_plus, self.a2_plus)


class RegionRow(BaseModel):
    """Phase label of one (β₁, β₂) lattice point."""
    beta1: float
    beta2: float
    phase: Optional[Phase] = None
    error: Optional[str] = None

    def values(self) -> Tuple[object, ...]:
        return (self.beta1, self.beta2, self.phase if self.phase is not None else "error")


def default_jobs() -> int:
    return os.cpu_count() or 1


def run_sweep(
    fn: Callable[[T], R], items: Sequence[T], jobs: Optional[int] = None, verbose: bool = False
) -> List[R]:
    """Map fn over items, in a process pool when jobs > 1; order is preserved."""
    jobs = jobs or default_jobs()
    if jobs == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    logger.debug("sweep.pool.start", jobs=jobs, items=len(items))
    with Pool(processes=min(jobs, len(items)), initializer=configure_logging, initargs=(verbose,)) as pool:
        return pool.map(fn, items)


# Row functions ----


def evolution_row(args: Tuple[PairConfig, float]) -> EvolutionRow:
    """Endpoints of S_T and of supp η⁺ at one γ; transitions keep their label."""
    base, gamma = args
    pair = base.with_gamma(gamma)
    phase = classify(pair).phase

    error: Optional[str] = None
    if phase is Phase.PHASE1:
        a1, a2 = -math.inf, math.inf
    else:
        try:
            a1, a2 = solve_endpoints(pair)
        except EquilibError as e:
            a1, a2, error = NAN, NAN, str(e)

    try:
        a1_plus, a2_plus = positive_part_support(pair).endpoints()
    except EquilibError as e:
        a1_plus, a2_plus = NAN, NAN
        error = error or str(e)

    if error:
        logger.debug("sweep.evolution.row_error", gamma=gamma, error=error)
    return EvolutionRow(
        gamma=gamma, phase=phase, a1=a1, a2=a2, a1_plus=a1_plus, a2_plus=a2_plus, error=error
    )


def region_row(args: Tuple[float, float, float, bool]) -> RegionRow:
    beta1, beta2, gamma, symmetric = args
    try:
        pair = PairConfig.create(beta1, beta2, gamma, symmetric)
        return RegionRow(beta1=beta1, beta2=beta2, phase=classify(pair).phase)
    except EquilibError as e:
        return RegionRow(beta1=beta1, beta2=beta2, error=str(e))


def gamma_grid(lower: float, upper: float, steps: int) -> List[float]:
    return [float(g) for g in np.linspace(lower, upper, steps)]


def support_evolution(
    pair: PairConfig, gammas: Sequence[float], jobs: Optional[int] = None, verbose: bool = False
) -> List[EvolutionRow]:
    return run_sweep(evolution_row, [(pair, g) for g in gammas], jobs, verbose)


def phase_region(
    gamma: float,
    beta1_values: Sequence[float],
    beta2_values: Sequence[float],
    symmetric: bool = False,
    jobs: Optional[int] = None,
    verbose: bool = False,
) -> List[RegionRow]:
    items = [(b1, b2, gamma, symmetric) for b1 in beta1_values for b2 in beta2_values]
    return run_sweep(region_row, items, jobs, verbose)
