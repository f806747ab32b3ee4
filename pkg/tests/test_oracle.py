"""Discrete energy minimization on a grid and its checks."""

import io
import math

import numpy as np
import pytest

from equilib.engine.charges import ChargeSet, PairConfig
from equilib.engine.oracle import (
    Grid,
    GridMeasure,
    ToeplitzOperator,
    cell_kernel,
    cumulative_dominates,
    default_grid,
    export_csv,
    frostman_residual,
    grid_energy,
    grid_potential,
    mass_monotonicity_check,
    minimize,
    project_simplex,
    sample_balayage,
    sample_density,
    support_estimate,
    tail_mass_bound,
    zero_sum_curvature,
)
from equilib.engine.pair_solver import equilibrium_density
from equilib.errors import DomainError
from equilib.runtime.config import Tolerances

UNIT = ChargeSet.from_triples([(0.0, 1.0, 1.0)])
LOOSE = Tolerances(frostman=1e-5)


def near(grid: Grid, lo: float, hi: float) -> np.ndarray:
    x = grid.points()
    return (x >= lo) & (x <= hi)


def test_single_node_energy():
    grid = Grid.create(-1.0, 1.0, 3)
    m = GridMeasure.from_weights(grid, [0.0, 1.0, 0.0])
    assert grid_energy(m, UNIT) == pytest.approx(1.5)


def test_cell_kernel_diagonal_and_far_field():
    k = cell_kernel(100, 0.5)
    assert k[0] == pytest.approx(1.5 - math.log(0.5))
    assert k[1] == pytest.approx(1.5 - 2.0 * math.log(2.0) - math.log(0.5))
    # the average of −log over two cells approaches −log of their distance
    assert k[80] == pytest.approx(-math.log(80 * 0.5), abs=1e-4)
    assert k[63] == pytest.approx(-math.log(63 * 0.5) + 1 / (12 * 63**2), abs=1e-8)


def test_energy_rejects_mass_on_a_real_repellent():
    charges = ChargeSet.from_triples([(0.0, 1.0, 1.0), (0.0, 0.0, -0.5)])
    m = GridMeasure.from_weights(Grid.create(-1.0, 1.0, 3), [0.0, 0.5, 0.0])
    with pytest.raises(DomainError):
        grid_energy(m, charges)


def test_potential_off_and_on_grid():
    m = GridMeasure.from_weights(Grid.create(0.0, 2.0, 3), [1.0, 0.0, 0.0])
    off, on = grid_potential(m, [-1.0, 1.0])
    assert off == pytest.approx(0.0, abs=1e-15)
    assert on == pytest.approx(1.5 - 2.0 * math.log(2.0))


def test_project_simplex():
    assert project_simplex(np.array([0.5, 0.5])) == pytest.approx([0.5, 0.5])
    assert project_simplex(np.array([2.0, 0.0])) == pytest.approx([1.0, 0.0])
    projected = project_simplex(np.array([0.3, -1.0, 4.0, 0.2]), total=0.7)
    assert projected.sum() == pytest.approx(0.7)
    assert np.all(projected >= 0)


def test_support_estimate_bridges_single_gaps():
    m = GridMeasure.from_weights(Grid.create(0.0, 5.0, 6), [1.0, 0.0, 1.0, 0.0, 0.0, 1.0])
    support = support_estimate(m)
    assert [(i.lower, i.upper) for i in support.intervals] == [(0.0, 2.0), (5.0, 5.0)]
    with pytest.raises(DomainError):
        support_estimate(m, threshold=1.5)


def test_cumulative_dominance():
    grid = Grid.create(0.0, 1.0, 3)
    small = GridMeasure.from_weights(grid, [0.1, 0.1, 0.1])
    large = GridMeasure.from_weights(grid, [0.2, 0.2, 0.2])
    assert cumulative_dominates(small, large)
    assert not cumulative_dominates(large, small)
    with pytest.raises(DomainError):
        cumulative_dominates(small, GridMeasure.from_weights(Grid.create(0.0, 2.0, 3), [0.1] * 3))


def test_minimize_rejects_excess_mass():
    with pytest.raises(DomainError):
        minimize(UNIT, 1.5, Grid.create(-5.0, 5.0, 11))


def test_minimize_energy_never_increases():
    energies = []
    minimize(
        UNIT, 1.0, Grid.create(-10.0, 10.0, 201), max_iter=300,
        callback=lambda _, e: energies.append(e),
    )
    assert energies
    assert all(b <= a + 1e-12 for a, b in zip(energies, energies[1:]))


def test_minimize_keeps_the_mass():
    m = minimize(UNIT, 0.4, Grid.create(-10.0, 10.0, 201), max_iter=200)
    assert m.mass == pytest.approx(0.4, abs=1e-12)
    assert m.iterations <= 200


def test_zero_sum_curvature_is_positive_although_the_kernel_is_not():
    grid = Grid.create(-10.0, 10.0, 201)
    apply = ToeplitzOperator(cell_kernel(grid.nodes, grid.spacing))
    ones = np.ones(grid.nodes)
    assert ones @ apply(ones) < 0

    index = np.arange(grid.nodes)
    bound = zero_sum_curvature(apply, index, grid.nodes)
    assert bound > 0
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.standard_normal(grid.nodes)
        v -= v.mean()
        assert 0 < 2.0 * (v @ apply(v)) / (v @ v) <= bound * (1 + 1e-9)

    assert zero_sum_curvature(apply, np.array([4]), grid.nodes) == 1.0


def test_minimize_returns_within_its_cap_on_the_default_grid():
    grid = default_grid(UNIT)
    assert grid.nodes == 4001
    energies = []
    m = minimize(UNIT, 1.0, grid, max_iter=100, callback=lambda _, e: energies.append(e))
    assert m.iterations <= 100
    assert len(energies) == m.iterations
    assert energies[-1] < energies[0]
    assert m.mass == pytest.approx(1.0, abs=1e-12)


@pytest.mark.slow
def test_point_charge_minimizer_satisfies_frostman():
    def solve(nodes: int):
        grid = Grid.create(-50.0, 50.0, nodes)
        m = minimize(UNIT, 1.0, grid, tol=LOOSE)
        return grid, m, frostman_residual(m, UNIT)

    grid, m, coarse = solve(4001)
    _, _, fine = solve(8001)
    assert coarse.max_lower_violation < 1e-3 and coarse.max_upper_violation < 1e-3
    assert fine.worst <= max(0.5 * coarse.worst, LOOSE.frostman)

    center = near(grid, -0.5, 0.5)
    assert m.density[center].mean() == pytest.approx(
        np.mean(1.0 / (math.pi * (grid.points()[center] ** 2 + 1.0))), rel=0.02
    )


@pytest.mark.slow
def test_first_phase_pair_matches_closed_form():
    pair = PairConfig(beta1=1.0, beta2=0.3, gamma=0.04)
    grid = Grid.create(-50.0, 50.0, 2001)
    m = minimize(pair.charge_set(), 1.0 - pair.gamma, grid, tol=LOOSE)
    df = equilibrium_density(pair)
    window = near(grid, -3.0, 3.0)
    exact = df(grid.points()[window])
    assert np.max(np.abs(m.density[window] - exact)) < 0.02 * np.max(exact)


@pytest.mark.slow
def test_symmetric_segment_support():
    pair = PairConfig(beta1=1.0, beta2=3.0, gamma=0.5, symmetric=True)
    grid = Grid.create(-50.0, 50.0, 4001)
    m = minimize(pair.charge_set(), 0.5, grid, tol=LOOSE)
    a = 3.0 * math.sqrt(0.6)
    lower, upper = support_estimate(m, threshold=1e-3).endpoints()
    assert lower == pytest.approx(-a, abs=2 * grid.spacing)
    assert upper == pytest.approx(a, abs=2 * grid.spacing)


def test_sampled_balayage_is_nearly_frostman():
    def residual(nodes: int) -> float:
        m = sample_balayage(UNIT, Grid.create(-50.0, 50.0, nodes))
        return frostman_residual(m, UNIT, window=(-2.0, 2.0)).worst

    coarse, fine = residual(4001), residual(8001)
    assert coarse < 1e-3
    assert fine < 0.5 * coarse


def test_perturbation_raises_the_upper_violation():
    charges = PairConfig(beta1=1.0, beta2=0.3, gamma=0.04).charge_set()
    grid = Grid.create(-50.0, 50.0, 4001)
    m = sample_balayage(charges, grid)
    weights = m.weights * 0.99
    weights[np.argmin(np.abs(grid.points() - 1.0))] += 0.01 * m.mass
    bumped = GridMeasure.from_weights(grid, weights)

    before = frostman_residual(m, charges, window=(-2.0, 2.0))
    after = frostman_residual(bumped, charges, window=(-2.0, 2.0))
    assert after.max_upper_violation > before.max_upper_violation + 1e-3


def test_frostman_window_must_hold_weight():
    m = GridMeasure.from_weights(Grid.create(0.0, 2.0, 3), [1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        frostman_residual(m, UNIT, window=(1.5, 3.0))


@pytest.mark.slow
def test_mass_monotonicity():
    pair = PairConfig(beta1=1.0, beta2=1.0, gamma=0.4)
    total = pair.charge_set().total_mass
    grid = Grid.create(-20.0, 20.0, 401)
    masses = [0.25 * total, 0.5 * total, 0.75 * total]
    assert mass_monotonicity_check(pair.charge_set(), masses, grid)
    with pytest.raises(DomainError):
        mass_monotonicity_check(pair.charge_set(), masses[::-1], grid)


def test_default_grid_half_width():
    pair = PairConfig(beta1=3.0, beta2=4.0, gamma=0.5)
    grid = default_grid(pair)
    assert grid.upper == pytest.approx(20.0 * (1.0 + 4.0697051490))
    assert grid.lower == -grid.upper and grid.nodes == 4001
    assert default_grid(PairConfig(beta1=0.1, beta2=0.2, gamma=0.5), nodes=11).upper == 50.0


def test_tail_mass_bound(four_charges):
    assert tail_mass_bound(UNIT, 10.0) == pytest.approx(1.0 - 2.0 / math.pi * math.atan(10.0))
    bounds = [tail_mass_bound(four_charges, half) for half in (10.0, 100.0, 1000.0)]
    assert all(0 < b <= 5.5 for b in bounds)
    assert bounds[0] > bounds[1] > bounds[2]


def test_sample_density_rescales():
    grid = Grid.create(-5.0, 5.0, 101)
    m = sample_density(lambda x: np.exp(-x * x), grid, mass=0.3)
    assert m.mass == pytest.approx(0.3)
    assert np.all(m.weights >= 0)


def test_export_csv():
    m = GridMeasure.from_weights(Grid.create(0.0, 2.0, 3), [0.5, 0.25, 0.25])
    buffer = io.StringIO()
    export_csv(m, buffer)
    lines = buffer.getvalue().splitlines()
    assert lines[0] == "x,weight,density"
    assert lines[1] == "0,0.5,0.5"
    assert len(lines) == 4


def test_grid_validation():
    with pytest.raises(DomainError):
        Grid.create(1.0, 0.0, 11)
    with pytest.raises(DomainError):
        Grid.create(0.0, math.inf, 11)
