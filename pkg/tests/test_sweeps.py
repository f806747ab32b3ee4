"""γ and (β₁, β₂) sweeps, inline and through the worker pool."""

import math

import pytest

from equilib.engine.charges import PairConfig
from equilib.engine.pair_phases import Phase
from equilib.engine.sweeps import (
    evolution_row,
    gamma_grid,
    phase_region,
    region_row,
    run_sweep,
    support_evolution,
)


def test_gamma_grid():
    assert gamma_grid(0.1, 0.5, 5) == pytest.approx([0.1, 0.2, 0.3, 0.4, 0.5])


def test_first_phase_row_spans_the_line():
    row = evolution_row((PairConfig(beta1=3.0, beta2=4.0, gamma=0.0), 0.2))
    assert row.phase is Phase.PHASE1
    assert (row.a1, row.a2) == (-math.inf, math.inf)
    assert row.error is None


def test_real_repellent_row_has_no_positive_part():
    row = evolution_row((PairConfig(beta1=1.0, beta2=0.0, gamma=0.0), 0.6))
    assert row.phase is Phase.PHASE3
    assert math.isnan(row.a1_plus) and math.isnan(row.a2_plus)
    assert row.error
    assert row.a1 < row.a2


def test_region_row_reports_invalid_points():
    row = region_row((0.0, 1.0, 0.5, False))
    assert row.phase is None
    assert row.values() == (0.0, 1.0, "error")


def test_pool_keeps_input_order():
    base = PairConfig(beta1=3.0, beta2=4.0, gamma=0.0)
    gammas = gamma_grid(0.05, 0.95, 10)
    inline = support_evolution(base, gammas, jobs=1)
    pooled = support_evolution(base, gammas, jobs=2)
    assert [row.gamma for row in pooled] == gammas
    # nan != nan, so compare the printed rows
    assert [str(row.values()) for row in pooled] == [str(row.values()) for row in inline]


def test_run_sweep_inline_for_single_item():
    assert run_sweep(abs, [-3], jobs=4) == [3]


def test_phase_region_lattice_order():
    rows = phase_region(0.5, [1.0, 2.0], [0.0, 1.0, 3.0], jobs=1)
    assert [(r.beta1, r.beta2) for r in rows] == [
        (1.0, 0.0), (1.0, 1.0), (1.0, 3.0), (2.0, 0.0), (2.0, 1.0), (2.0, 3.0)
    ]
    assert all(r.phase is not None for r in rows)
    assert rows[0].phase is not Phase.PHASE1
