"""Summary and cost-effectiveness measures of a converged solution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, TieError, UndefinedRatioError
from .ode import Trajectory

__all__ = [
    "CostWeights",
    "SummaryMeasures",
    "IcerRow",
    "efficacy",
    "cases_averted",
    "effectiveness",
    "total_cost",
    "acer",
    "relaxation_time",
    "icer_table",
    "summarize",
    "SUMMARY_COLUMNS",
]

SUMMARY_COLUMNS = ("beta", "sigma_r", "strategy", "A", "TC", "ACER", "Ebar",
                   "tr1", "tr2", "J", "iterations", "converged")


@dataclass(frozen=True)
class CostWeights:
    """Per-person unit costs of treating ``L1`` (c1) and ``L2`` (c2)."""

    c1: float = 1.0
    c2: float = 1.0

    def __post_init__(self):
        if not (self.c1 >= 0 and self.c2 >= 0) or not math.isfinite(self.c1 + self.c2):
            raise InvalidInputError(f"cost weights must be finite and >= 0, got {self}")


@dataclass(frozen=True)
class SummaryMeasures:
    cases_averted: float
    effectiveness: float
    total_cost: float
    acer: float
    tr1: float
    tr2: float
    efficacy_traj: Trajectory

    def to_dict(self):
        return {
            "A": self.cases_averted,
            "TC": self.total_cost,
            "ACER": self.acer,
            "Ebar": self.effectiveness,
            "tr1": self.tr1,
            "tr2": self.tr2,
        }


def _series(traj):
    if not isinstance(traj, Trajectory) or traj.dim != 1:
        raise InvalidInputError("expected a one-component Trajectory")
    return traj.grid, traj.values[:, 0]


def efficacy(i_traj, i0):
    """``E(t) = 1 - I(t)/I(0)`` on the grid of `i_traj` (a 1-D trajectory of I)."""
    if not i0 > 0:
        raise InvalidInputError(f"efficacy needs I(0) > 0, got {i0}")
    grid, i = _series(i_traj)
    return Trajectory(grid, 1.0 - i / i0)


def cases_averted(i_traj, i0, t_f):
    grid, i = _series(i_traj)
    return float(t_f * i0 - np.trapezoid(i, dx=grid.step))


def effectiveness(a, i0, t_f):
    if not (i0 > 0 and t_f > 0):
        raise InvalidInputError(f"effectiveness needs I(0) > 0 and t_f > 0, got {i0}, {t_f}")
    return a / (t_f * i0)


def total_cost(control_traj, state_traj, weights=CostWeights()):
    """``∫ c1*u1*L1 + c2*u2*L2 dt`` by the trapezoid rule."""
    if control_traj.grid != state_traj.grid:
        raise InvalidInputError("control and state trajectories are on different grids")
    u = control_traj.values
    x = state_traj.values
    integrand = weights.c1 * u[:, 0] * x[:, 1] + weights.c2 * u[:, 1] * x[:, 3]
    return float(np.trapezoid(integrand, dx=control_traj.grid.step))


def acer(tc, a):
    if not a > 0:
        raise UndefinedRatioError(f"ACER undefined for cases averted A = {a}")
    return tc / a


def relaxation_time(u_traj, eps=1e-3):
    """Last grid time at which the control sits within `eps` of full intensity.

    Returns 0 when the control never gets there.
    """
    if not 0 < eps < 0.1:
        raise InvalidInputError(f"eps must lie in (0, 0.1), got {eps}")
    grid, u = _series(u_traj)
    hits = np.flatnonzero(u >= 1.0 - eps)
    return float(grid.times[hits[-1]]) if hits.size else 0.0


@dataclass(frozen=True)
class IcerRow:
    label: str
    cases_averted: float
    total_cost: float
    acer: float
    icer: float | None
    dominated_by: str | None = None


def icer_table(results):
    """Rank strategies by effectiveness and compute incremental ratios.

    Parameters
    ----------
    results : iterable of (label, A, TC)

    Returns
    -------
    list of IcerRow
        All strategies in order of increasing ``A``.  A strategy that is
        both costlier and less effective than another is marked with
        ``dominated_by`` and gets ``icer=None``; the rest are chained as
        ``(TC_next - TC_prev) / (A_next - A_prev)``, the first being its
        own ACER.

    Raises
    ------
    TieError
        If two strategies avert exactly the same number of cases.
    """
    rows = list(results)
    if not rows:
        raise InvalidInputError("icer_table needs at least one strategy")
    labels = [r[0] for r in rows]
    if len(set(labels)) != len(labels):
        raise InvalidInputError(f"duplicate strategy labels: {labels}")
    rows.sort(key=lambda r: (r[1], r[0]))
    for lo, hi in zip(rows, rows[1:]):
        if lo[1] == hi[1]:
            raise TieError(f"strategies {lo[0]!r} and {hi[0]!r} avert the same cases ({lo[1]})")

    dominated = {}
    for label, a, tc in rows:
        for other, a2, tc2 in rows:
            if a2 > a and tc2 < tc:
                # report the cheapest dominator for a stable answer
                if label not in dominated or tc2 < dominated[label][1]:
                    dominated[label] = (other, tc2)

    table = []
    prev = None
    for label, a, tc in rows:
        ratio = tc / a if a > 0 else math.nan
        if label in dominated:
            table.append(IcerRow(label, a, tc, ratio, None, dominated[label][0]))
            continue
        if prev is None:
            icer = ratio
        else:
            icer = (tc - prev[2]) / (a - prev[1])
        table.append(IcerRow(label, a, tc, ratio, icer))
        prev = (label, a, tc)
    return table


def summarize(solution, weights=CostWeights(), eps=1e-3):
    """All measures for one solved scenario.

    ``I(0)`` is taken from the solution's first state sample, which is the
    uncontrolled equilibrium.  When ``I(0) == 0`` (disease-free) nothing can
    be averted: ``A = Ebar = 0``, ``E(t) = 0`` and ACER is NaN.
    """
    grid = solution.grid
    x = solution.state_traj.values
    i0 = x[0, 2]
    t_f = grid.t1 - grid.t0
    i_traj = Trajectory(grid, x[:, 2])
    tc = total_cost(solution.control_traj, solution.state_traj, weights)
    if i0 > 0:
        a = cases_averted(i_traj, i0, t_f)
        ebar = effectiveness(a, i0, t_f)
        e_traj = efficacy(i_traj, i0)
    else:
        a = ebar = 0.0
        e_traj = Trajectory(grid, np.zeros(grid.n_steps + 1))
    ratio = tc / a if a > 0 else math.nan
    u = solution.control_traj
    return SummaryMeasures(
        cases_averted=a,
        effectiveness=ebar,
        total_cost=tc,
        acer=ratio,
        tr1=relaxation_time(Trajectory(grid, u.values[:, 0]), eps),
        tr2=relaxation_time(Trajectory(grid, u.values[:, 1]), eps),
        efficacy_traj=e_traj,
    )
