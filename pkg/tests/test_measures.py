import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tbctl.errors import InvalidInputError, TieError, UndefinedRatioError
from tbctl.measures import (
    CostWeights,
    acer,
    cases_averted,
    effectiveness,
    efficacy,
    icer_table,
    relaxation_time,
    summarize,
    total_cost,
)
from tbctl.ode import TimeGrid, Trajectory

from oracles import refined_reintegration

GRID = TimeGrid(0.0, 5.0, 1000)
# (strategy, A, TC) as printed for beta = 100
TABLE4 = [("c", 24.0, 35640.0), ("b", 37.0, 211.0), ("a", 56.0, 23374.0)]


def const(v, grid=GRID):
    return Trajectory(grid, np.full(grid.n_steps + 1, float(v)))


def test_efficacy_at_baseline_and_limit():
    assert np.all(efficacy(const(24.0), 24.0).values == 0.0)
    assert np.all(efficacy(const(0.0), 24.0).values == 1.0)
    with pytest.raises(InvalidInputError):
        efficacy(const(1.0), 0.0)


def test_efficacy_reverses_prevalence(baseline_solution):
    i = baseline_solution.state_traj.values[:, 2]
    e = efficacy(Trajectory(GRID, i), i[0]).values[:, 0]
    rng = np.random.default_rng(0)
    for a, b in rng.integers(0, len(i), size=(500, 2)):
        assert (e[b] > e[a]) == (i[b] < i[a])
    assert np.all((e >= 0) & (e <= 1))


def test_cases_averted_and_effectiveness_trivial():
    assert cases_averted(const(24.0), 24.0, 5.0) == pytest.approx(0.0, abs=1e-12)
    assert effectiveness(0.0, 24.0, 5.0) == 0.0
    with pytest.raises(InvalidInputError):
        effectiveness(1.0, 0.0, 5.0)


def test_total_cost():
    x = Trajectory(GRID, np.tile([1.0, 10.0, 1.0, 100.0, 1.0], (1001, 1)))
    assert total_cost(Trajectory(GRID, np.zeros((1001, 2))), x) == 0.0
    u = Trajectory(GRID, np.tile([0.5, 0.25], (1001, 1)))
    assert total_cost(u, x, CostWeights(2.0, 1.0)) == pytest.approx(5.0 * (2 * 0.5 * 10 + 0.25 * 100))
    with pytest.raises(InvalidInputError):
        total_cost(Trajectory(TimeGrid(0, 5, 10), np.zeros((11, 2))), x)
    with pytest.raises(InvalidInputError):
        CostWeights(-1.0, 1.0)


def test_acer_examples():
    assert acer(23374.0, 56.0) == pytest.approx(417.4, abs=0.05)
    assert acer(35640.0, 24.0) == pytest.approx(1485.0)
    assert acer(0.0, 5.0) == 0.0
    with pytest.raises(UndefinedRatioError):
        acer(10.0, 0.0)


def test_relaxation_time_trivial():
    assert relaxation_time(const(1.0)) == 5.0
    assert relaxation_time(const(0.4)) == 0.0
    with pytest.raises(InvalidInputError):
        relaxation_time(const(1.0), eps=0.5)


@given(st.lists(st.floats(0.0, 1.0), min_size=11, max_size=11), st.floats(1e-4, 0.05), st.floats(1e-4, 0.05))
def test_relaxation_time_monotone_in_eps(u, e1, e2):
    tr = Trajectory(TimeGrid(0.0, 5.0, 10), np.array(u))
    lo, hi = sorted((e1, e2))
    assert relaxation_time(tr, hi) >= relaxation_time(tr, lo)


def test_icer_table4():
    table = icer_table(TABLE4)
    by = {r.label: r for r in table}
    assert [r.label for r in table] == ["c", "b", "a"]
    assert by["c"].dominated_by == "b" and by["c"].icer is None
    assert by["b"].icer == pytest.approx(5.7, abs=0.01)
    assert by["b"].icer == by["b"].acer
    assert by["a"].icer == pytest.approx((23374 - 211) / (56 - 37))
    assert by["a"].icer == pytest.approx(1207, rel=0.02)


def test_icer_edge_cases():
    (row,) = icer_table([("x", 10.0, 50.0)])
    assert row.icer == row.acer == 5.0
    rows = icer_table([("x", 10.0, 50.0), ("y", 20.0, 50.0)])
    assert rows[1].icer == 0.0
    with pytest.raises(TieError):
        icer_table([("x", 0.0, 1.0), ("y", 0.0, 2.0)])
    with pytest.raises(InvalidInputError):
        icer_table([])
    with pytest.raises(InvalidInputError):
        icer_table([("x", 1.0, 1.0), ("x", 2.0, 2.0)])


@given(st.permutations(TABLE4 + [("d", 45.0, 30000.0), ("e", 60.0, 90000.0)]))
def test_icer_order_independent(rows):
    ref = icer_table(TABLE4 + [("d", 45.0, 30000.0), ("e", 60.0, 90000.0)])
    assert icer_table(rows) == ref


def test_summary_identities(baseline_solution):
    m = summarize(baseline_solution)
    i0 = baseline_solution.state_traj.values[0, 2]
    assert m.effectiveness == m.cases_averted / (5.0 * i0)
    assert m.acer * m.cases_averted == pytest.approx(m.total_cost, rel=1e-15)
    assert 0 <= m.tr2 <= m.tr1 <= 5.0


def test_cases_averted_grid_refinement(baseline_params, baseline_solution):
    m = summarize(baseline_solution)
    x_fine, _ = refined_reintegration(baseline_params, baseline_solution)
    i = x_fine.values[:, 2]
    a_fine = cases_averted(Trajectory(x_fine.grid, i), i[0], 5.0)
    assert m.cases_averted == pytest.approx(a_fine, rel=5e-3)


def test_disease_free_summary_is_guarded():
    from tbctl.optctl import OptimalSolution

    x = Trajectory(GRID, np.tile([30000.0, 0, 0, 0, 0], (1001, 1)))
    zeros2 = Trajectory(GRID, np.zeros((1001, 2)))
    sol = OptimalSolution(x, Trajectory(GRID, np.zeros((1001, 5))), zeros2, 0.0, 1, True)
    m = summarize(sol)
    assert m.cases_averted == 0.0 and m.effectiveness == 0.0
    assert math.isnan(m.acer)
    assert not np.any(m.efficacy_traj.values)
