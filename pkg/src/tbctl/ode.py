"""Fixed-step classical Runge-Kutta integration on a uniform grid.

The same :class:`TimeGrid` is shared by the forward state pass, the
backward adjoint pass and the control samples, so every quantity in a
forward-backward sweep lives on identical nodes.  RK4 stage evaluations
land on nodes and on half-steps; :meth:`Trajectory.sampler` serves both
exactly (half-steps by linear interpolation between neighbouring nodes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationError, InvalidInputError

__all__ = ["TimeGrid", "Trajectory", "rk4_forward", "rk4_backward"]


@dataclass(frozen=True)
class TimeGrid:
    """Uniform grid ``t0 + k*step`` for ``k = 0..n_steps``."""

    t0: float
    t1: float
    n_steps: int

    def __post_init__(self):
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise InvalidInputError(f"n_steps must be a positive integer, got {self.n_steps!r}")
        if not (math.isfinite(self.t0) and math.isfinite(self.t1)) or self.t1 <= self.t0:
            raise InvalidInputError(f"need finite t0 < t1, got [{self.t0}, {self.t1}]")
        object.__setattr__(self, "n_steps", int(self.n_steps))

    @classmethod
    def for_horizon(cls, t_f, step=0.005):
        """Grid on ``[0, t_f]`` whose step is as close to `step` as possible."""
        return cls(0.0, float(t_f), max(1, int(round(t_f / step))))

    @property
    def step(self):
        return (self.t1 - self.t0) / self.n_steps

    @property
    def times(self):
        return self.t0 + self.step * np.arange(self.n_steps + 1)

    def refined(self, factor):
        return TimeGrid(self.t0, self.t1, self.n_steps * int(factor))


@dataclass(frozen=True)
class Trajectory:
    """Vector samples at every node of a grid.

    ``values`` has shape ``(n_steps + 1, dim)`` and is made read-only on
    construction.
    """

    grid: TimeGrid
    values: np.ndarray
    _mid: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim == 1:
            vals = vals[:, None]
        if vals.shape[0] != self.grid.n_steps + 1:
            raise InvalidInputError(
                f"expected {self.grid.n_steps + 1} samples, got {vals.shape[0]}"
            )
        if not np.all(np.isfinite(vals)):
            raise InvalidInputError("trajectory contains non-finite samples")
        vals.flags.writeable = False
        mid = 0.5 * (vals[:-1] + vals[1:])
        mid.flags.writeable = False
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_mid", mid)

    @property
    def times(self):
        return self.grid.times

    @property
    def dim(self):
        return self.values.shape[1]

    def component(self, j):
        return self.values[:, j]

    def __len__(self):
        return self.values.shape[0]

    def sampler(self):
        """Return ``f(t) -> ndarray`` valid anywhere in ``[t0, t1]``.

        Nodes and half-steps are looked up directly; any other time falls
        back to linear interpolation.
        """
        g = self.grid
        h = g.step
        vals = self.values
        mid = self._mid
        n = g.n_steps

        def sample(t):
            x = 2.0 * (t - g.t0) / h
            j = int(round(x))
            if abs(x - j) < 1e-7:
                j = min(max(j, 0), 2 * n)
                return vals[j // 2] if j % 2 == 0 else mid[j // 2]
            k = min(max(int(math.floor(x / 2.0)), 0), n - 1)
            w = (t - (g.t0 + k * h)) / h
            return (1.0 - w) * vals[k] + w * vals[k + 1]

        return sample


def _check(y, k, direction):
    if not np.all(np.isfinite(y)):
        raise IntegrationError(f"non-finite value in {direction} RK4 at step {k}", k)


def rk4_forward(rhs, y0, grid):
    """Integrate ``y' = rhs(t, y)`` from ``grid.t0`` with classical RK4.

    Parameters
    ----------
    rhs : callable
        ``rhs(t, y) -> ndarray`` with the same shape as `y`.
    y0 : array_like
        Initial vector at ``grid.t0``.
    grid : TimeGrid

    Returns
    -------
    Trajectory
        Samples at all ``grid.n_steps + 1`` nodes.

    Raises
    ------
    IntegrationError
        If any stage or node value becomes non-finite; ``step_index`` is the
        step being taken.
    """
    y = np.array(y0, dtype=float).ravel()
    _check(y, 0, "forward")
    h = grid.step
    out = np.empty((grid.n_steps + 1, y.size))
    out[0] = y
    for k in range(grid.n_steps):
        t = grid.t0 + k * h
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check(y, k, "forward")
        out[k + 1] = y
    return Trajectory(grid, out)


def rk4_backward(rhs, yT, grid):
    """Integrate ``y' = rhs(t, y)`` from ``grid.t1`` down to ``grid.t0``.

    This is RK4 with step ``-h``; the sample at ``t1`` is `yT` verbatim.
    `rhs` may close over a forward :class:`Trajectory` sampler, since stage
    times are always nodes or half-steps.
    """
    y = np.array(yT, dtype=float).ravel()
    _check(y, grid.n_steps, "backward")
    h = grid.step
    n = grid.n_steps
    out = np.empty((n + 1, y.size))
    out[n] = y
    for k in range(n, 0, -1):
        t = grid.t0 + k * h
        k1 = rhs(t, y)
        k2 = rhs(t - 0.5 * h, y - 0.5 * h * k1)
        k3 = rhs(t - 0.5 * h, y - 0.5 * h * k2)
        k4 = rhs(t - h, y - h * k3)
        y = y - (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check(y, k, "backward")
        out[k - 1] = y
    return Trajectory(grid, out)
