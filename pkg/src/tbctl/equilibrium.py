"""Endemic equilibrium of the uncontrolled model by long-time relaxation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .model import State, basic_reproduction_number, rhs_scalar

__all__ = ["EquilibriumResult", "endemic_equilibrium", "DEFAULT_STEP"]

DEFAULT_STEP = 0.01
_CHECK_EVERY = 100  # steps between residual checks


@dataclass(frozen=True)
class EquilibriumResult:
    state: State
    residual_norm: float
    converged: bool
    horizon: float = 0.0


def residual_norm(state, params):
    return max(abs(v) for v in rhs_scalar(*state, 0.0, 0.0, params))


def _rk4_steps(y, p, h, n):
    # Scalar RK4 with u = 0; avoids small-array overhead over ~1e5 steps.
    s, l1, i, l2, r = y
    h2 = 0.5 * h
    h6 = h / 6.0
    for _ in range(n):
        a0, a1, a2, a3, a4 = rhs_scalar(s, l1, i, l2, r, 0.0, 0.0, p)
        b0, b1, b2, b3, b4 = rhs_scalar(s + h2 * a0, l1 + h2 * a1, i + h2 * a2,
                                        l2 + h2 * a3, r + h2 * a4, 0.0, 0.0, p)
        c0, c1, c2, c3, c4 = rhs_scalar(s + h2 * b0, l1 + h2 * b1, i + h2 * b2,
                                        l2 + h2 * b3, r + h2 * b4, 0.0, 0.0, p)
        d0, d1, d2, d3, d4 = rhs_scalar(s + h * c0, l1 + h * c1, i + h * c2,
                                        l2 + h * c3, r + h * c4, 0.0, 0.0, p)
        s += h6 * (a0 + 2.0 * b0 + 2.0 * c0 + d0)
        l1 += h6 * (a1 + 2.0 * b1 + 2.0 * c1 + d1)
        i += h6 * (a2 + 2.0 * b2 + 2.0 * c2 + d2)
        l2 += h6 * (a3 + 2.0 * b3 + 2.0 * c3 + d3)
        r += h6 * (a4 + 2.0 * b4 + 2.0 * c4 + d4)
    return (s, l1, i, l2, r)


def seed_state(params):
    n = params.n_pop
    return (0.98 * n, 0.01 * n, 0.01 * n, 0.0, 0.0)


def endemic_equilibrium(params, tol=None, max_horizon=5000.0, step=DEFAULT_STEP, seed=None):
    """Relax the uncontrolled dynamics onto the stable endemic state.

    Parameters
    ----------
    params : Parameters
    tol : float, optional
        Target max-norm of the right-hand side (individuals/yr).  Defaults
        to ``1e-8 * n_pop``.
    max_horizon : float
        Longest simulated time (yr) before giving up.
    step : float
        RK4 step (yr).
    seed : sequence of 5 floats, optional
        Starting state; by default 1% of the population in each of ``L1``
        and ``I``, the rest susceptible.

    Returns
    -------
    EquilibriumResult
        When ``R0 <= 1`` this is the disease-free state ``(N, 0, 0, 0, 0)``.

    Raises
    ------
    ConvergenceError
        If the residual is still above `tol` at `max_horizon`; ``best``
        holds the final :class:`EquilibriumResult`.
    """
    if tol is None:
        tol = 1e-8 * params.n_pop
    if not tol > 0 or not max_horizon > 0 or not step > 0:
        raise InvalidInputError("tol, max_horizon and step must all be > 0")

    if basic_reproduction_number(params) <= 1.0:
        return EquilibriumResult(State(params.n_pop, 0.0, 0.0, 0.0, 0.0), 0.0, True, 0.0)

    y = tuple(float(v) for v in (seed if seed is not None else seed_state(params)))
    if len(y) != 5 or not np.all(np.isfinite(y)):
        raise InvalidInputError(f"seed must be 5 finite values, got {seed!r}")

    t = 0.0
    res = residual_norm(y, params)
    while res > tol and t < max_horizon:
        y = _rk4_steps(y, params, step, _CHECK_EVERY)
        t += _CHECK_EVERY * step
        res = residual_norm(y, params)
        if not np.all(np.isfinite(y)):
            raise ConvergenceError(f"relaxation diverged at t = {t:g} yr")

    result = EquilibriumResult(State(*y), res, res <= tol, t)
    if not result.converged:
        raise ConvergenceError(
            f"equilibrium residual {res:.3g} > tol {tol:.3g} after {t:g} yr",
            best=result,
            residuals={"rhs_max_norm": res},
        )
    return result
