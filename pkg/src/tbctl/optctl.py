"""Pontryagin optimality system and the forward-backward sweep.

The problem minimises

    J(u1, u2) = ∫_0^t_f  W0*I + W1/2*u1**2 + W2/2*u2**2  dt

subject to the controlled dynamics of :mod:`tbctl.model` with
``0 <= u1, u2 <= 1``.  The adjoint equations are ``λ' = -∂H/∂x`` with
``λ(t_f) = 0`` and the controls minimise ``H`` pointwise, which gives the
clamped formulas in :func:`project_controls`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .errors import ConvergenceError, InvalidInputError
from .model import rhs_scalar
from .ode import TimeGrid, Trajectory, rk4_backward, rk4_forward

__all__ = [
    "AdjointState",
    "StrategyMask",
    "STRATEGIES",
    "FbsSettings",
    "OptimalSolution",
    "objective",
    "hamiltonian",
    "adjoint_rhs",
    "project_controls",
    "project_trajectory",
    "control_gradient",
    "simulate",
    "solve_adjoint",
    "solve_fbs",
]


class AdjointState(NamedTuple):
    lam1: float
    lam2: float
    lam3: float
    lam4: float
    lam5: float


class StrategyMask(NamedTuple):
    enable_u1: bool = True
    enable_u2: bool = True


# a: both controls, b: early latent only, c: persistent latent only
STRATEGIES = {
    "a": StrategyMask(True, True),
    "b": StrategyMask(True, False),
    "c": StrategyMask(False, True),
}


@dataclass(frozen=True)
class FbsSettings:
    """Knobs of the sweep.

    The grid is derived from the horizon: ``n_steps`` if given, otherwise
    ``round(t_f / step)`` nodes so that sweeps over ``t_f`` keep a constant
    step.  `initial_control` is the starting value of every enabled control
    (scalar or an ``(n_steps + 1, 2)`` array).
    """

    relaxation: float = 0.5
    tol: float = 1e-4
    max_iters: int = 500
    step: float = 0.005
    n_steps: int | None = None
    initial_control: object = 0.5

    def __post_init__(self):
        if not 0.0 < self.relaxation <= 1.0:
            raise InvalidInputError(f"relaxation must lie in (0, 1], got {self.relaxation}")
        if not self.tol > 0:
            raise InvalidInputError(f"tol must be > 0, got {self.tol}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise InvalidInputError(f"max_iters must be a positive integer, got {self.max_iters}")
        if not self.step > 0:
            raise InvalidInputError(f"step must be > 0, got {self.step}")
        if self.n_steps is not None and self.n_steps < 1:
            raise InvalidInputError(f"n_steps must be >= 1, got {self.n_steps}")

    def grid_for(self, t_f):
        if self.n_steps is not None:
            return TimeGrid(0.0, float(t_f), self.n_steps)
        return TimeGrid.for_horizon(t_f, self.step)


@dataclass(frozen=True)
class OptimalSolution:
    state_traj: Trajectory
    adjoint_traj: Trajectory
    control_traj: Trajectory
    objective: float
    iterations: int
    converged: bool
    residuals: dict = field(default_factory=dict)

    @property
    def grid(self):
        return self.state_traj.grid


def _same_grid(*trajs):
    g = trajs[0].grid
    for tr in trajs[1:]:
        if tr.grid != g:
            raise InvalidInputError(f"trajectory grids differ: {g} vs {tr.grid}")
    return g


def objective(state_traj, control_traj, params):
    """Trapezoid-rule value of the cost functional on the shared grid."""
    g = _same_grid(state_traj, control_traj)
    i = state_traj.component(2)
    u = control_traj.values
    integrand = params.w0 * i + 0.5 * params.w1 * u[:, 0] ** 2 + 0.5 * params.w2 * u[:, 1] ** 2
    return float(np.trapezoid(integrand, dx=g.step))


def _adjoint_scalar(lam, x, u1, u2, p):
    l1, l2, l3, l4, l5 = lam
    s, _, i, L2, r = x
    b = p.beta / p.n_pop
    bi = b * i
    return (
        l1 * (bi + p.mu) - l2 * bi,
        l2 * (p.delta + p.tau1 * u1 + p.mu) - l3 * p.phi * p.delta
        - l4 * (1.0 - p.phi) * p.delta - l5 * p.tau1 * u1,
        -p.w0 + l1 * b * s - l2 * b * (s + p.sigma * L2 + p.sigma_r * r)
        + l3 * (p.tau0 + p.mu) + l4 * p.sigma * b * L2 - l5 * (p.tau0 - p.sigma_r * b * r),
        -l2 * bi * p.sigma - l3 * p.omega
        + l4 * (p.sigma * bi + p.omega + p.tau2 * u2 + p.mu) - l5 * p.tau2 * u2,
        -l2 * p.sigma_r * bi - l3 * p.omega_r + l5 * (p.sigma_r * bi + p.omega_r + p.mu),
    )


def _vec(name, v, n):
    a = np.asarray(v, dtype=float)
    if a.shape != (n,):
        raise InvalidInputError(f"{name} must have {n} components, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise InvalidInputError(f"{name} contains non-finite values")
    return a


def adjoint_rhs(adjoint, state, control, params):
    """Costate derivative ``-∂H/∂(S, L1, I, L2, R)``.

    The ``L1`` equation carries ``tau1*u1`` in its diagonal term, which is
    what differentiating the Hamiltonian gives.
    """
    lam = _vec("adjoint", adjoint, 5)
    x = _vec("state", state, 5)
    u = _vec("control", control, 2)
    return np.array(_adjoint_scalar(lam.tolist(), x.tolist(), u[0], u[1], params))


def hamiltonian(state, adjoint, control, params):
    x = _vec("state", state, 5)
    lam = _vec("adjoint", adjoint, 5)
    u = _vec("control", control, 2)
    f = rhs_scalar(*x.tolist(), u[0], u[1], params)
    running = params.w0 * x[2] + 0.5 * params.w1 * u[0] ** 2 + 0.5 * params.w2 * u[1] ** 2
    return float(running + np.dot(lam, f))


def _clamped_ratio(num, weight):
    num = np.asarray(num, dtype=float)
    if weight > 0:
        return np.clip(num / weight, 0.0, 1.0)
    # zero weight: H is linear in u, minimised at a bound
    return np.where(num > 0, 1.0, 0.0)


def project_controls(state, adjoint, params, mask=StrategyMask()):
    """Pointwise minimiser of the Hamiltonian over ``[0, 1]**2``."""
    x = _vec("state", state, 5)
    lam = _vec("adjoint", adjoint, 5)
    u1 = float(_clamped_ratio(params.tau1 * x[1] * (lam[1] - lam[4]), params.w1)) if mask[0] else 0.0
    u2 = float(_clamped_ratio(params.tau2 * x[3] * (lam[3] - lam[4]), params.w2)) if mask[1] else 0.0
    return u1, u2


def project_trajectory(state_traj, adjoint_traj, params, mask=StrategyMask()):
    """Vectorised :func:`project_controls` over every grid node."""
    x = state_traj.values
    lam = adjoint_traj.values
    out = np.zeros((x.shape[0], 2))
    if mask[0]:
        out[:, 0] = _clamped_ratio(params.tau1 * x[:, 1] * (lam[:, 1] - lam[:, 4]), params.w1)
    if mask[1]:
        out[:, 1] = _clamped_ratio(params.tau2 * x[:, 3] * (lam[:, 3] - lam[:, 4]), params.w2)
    return out


def control_gradient(state_traj, adjoint_traj, control_traj, params):
    """``∂H/∂u`` at every node: the L2 gradient of J with respect to the controls."""
    x = state_traj.values
    lam = adjoint_traj.values
    u = control_traj.values
    g = np.empty_like(u)
    g[:, 0] = params.w1 * u[:, 0] - params.tau1 * x[:, 1] * (lam[:, 1] - lam[:, 4])
    g[:, 1] = params.w2 * u[:, 1] - params.tau2 * x[:, 3] * (lam[:, 3] - lam[:, 4])
    return g


def simulate(params, initial_state, control_traj):
    """Forward RK4 pass of the state under a fixed control schedule."""
    u_at = control_traj.sampler()

    def rhs(t, y):
        u = u_at(t)
        return np.array(rhs_scalar(*y.tolist(), u[0], u[1], params))

    return rk4_forward(rhs, initial_state, control_traj.grid)


def solve_adjoint(params, state_traj, control_traj):
    """Backward RK4 pass of the costates from ``λ(t_f) = 0``."""
    grid = _same_grid(state_traj, control_traj)
    x_at = state_traj.sampler()
    u_at = control_traj.sampler()

    def rhs(t, lam):
        u = u_at(t)
        return np.array(_adjoint_scalar(lam.tolist(), x_at(t).tolist(), u[0], u[1], params))

    return rk4_backward(rhs, np.zeros(5), grid)


def _initial_controls(settings, grid, mask):
    init = settings.initial_control
    n = grid.n_steps + 1
    if np.ndim(init) == 0:
        u = np.full((n, 2), float(init))
    else:
        u = np.array(init, dtype=float)
        if u.shape != (n, 2):
            raise InvalidInputError(f"initial_control must be scalar or shape {(n, 2)}, got {u.shape}")
    u = np.clip(u, 0.0, 1.0)
    u[:, 0] *= bool(mask[0])
    u[:, 1] *= bool(mask[1])
    return u


def _rel_change(new, old):
    return float(np.max(np.abs(new - old)) / max(np.max(np.abs(new)), 1.0))


def _conservation_error(state_traj, n_pop):
    return float(np.max(np.abs(state_traj.values.sum(axis=1) - n_pop)) / n_pop)


def solve_fbs(params, initial_state, mask=StrategyMask(), settings=FbsSettings()):
    """Forward-backward sweep for the optimal control pair.

    Each iteration integrates the state forward under the current controls
    ``u_k``, the costates backward, and projects to get ``p_k``.  The sweep
    stops once ``max|p_k - u_k| <= tol * max(1, max|u_k|)`` and the states
    and costates each changed by at most `tol` (relative max-norm) since the
    previous iteration; the returned bundle is ``(x_k, λ_k, u_k)``.
    Otherwise ``u_{k+1} = relaxation * p_k + (1 - relaxation) * u_k``.

    Disabled controls (per `mask`) are held at zero throughout.

    Raises
    ------
    ConvergenceError
        After ``settings.max_iters`` iterations; ``best`` is the last
        :class:`OptimalSolution` (with ``converged=False``).
    """
    x0 = np.asarray(initial_state, dtype=float)
    if x0.shape != (5,) or not np.all(np.isfinite(x0)) or np.any(x0 < 0):
        raise InvalidInputError(f"initial_state must be 5 finite non-negative values, got {initial_state!r}")
    if abs(x0.sum() - params.n_pop) > 1e-6 * params.n_pop:
        raise InvalidInputError(f"initial_state sums to {x0.sum()}, expected n_pop = {params.n_pop}")

    grid = settings.grid_for(params.t_f)
    u = _initial_controls(settings, grid, mask)
    w = settings.relaxation
    tol = settings.tol

    prev_x = prev_lam = None
    worst_conservation = 0.0
    for it in range(1, settings.max_iters + 1):
        u_traj = Trajectory(grid, u)
        x_traj = simulate(params, x0, u_traj)
        worst_conservation = max(worst_conservation, _conservation_error(x_traj, params.n_pop))
        lam_traj = solve_adjoint(params, x_traj, u_traj)
        p = project_trajectory(x_traj, lam_traj, params, mask)

        res_u = float(np.max(np.abs(p - u)) / max(np.max(np.abs(u)), 1.0))
        dx = np.inf if prev_x is None else _rel_change(x_traj.values, prev_x)
        dlam = np.inf if prev_lam is None else _rel_change(lam_traj.values, prev_lam)
        residuals = {
            "control_fixed_point": res_u,
            "state_change": dx,
            "adjoint_change": dlam,
            "conservation": worst_conservation,
        }
        if res_u <= tol and dx <= tol and dlam <= tol:
            return OptimalSolution(x_traj, lam_traj, u_traj, objective(x_traj, u_traj, params),
                                   it, True, residuals)
        prev_x, prev_lam = x_traj.values, lam_traj.values
        u = w * p + (1.0 - w) * u

    last = OptimalSolution(x_traj, lam_traj, u_traj, objective(x_traj, u_traj, params),
                           settings.max_iters, False, residuals)
    raise ConvergenceError(
        f"forward-backward sweep did not converge in {settings.max_iters} iterations "
        f"(control residual {res_u:.3g}, state change {dx:.3g}, adjoint change {dlam:.3g})",
        best=last,
        residuals=residuals,
    )
