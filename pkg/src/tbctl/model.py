"""Five-compartment TB reinfection model with two post-exposure controls.

Compartments: susceptible ``S``, early latent ``L1``, infectious ``I``,
persistent latent ``L2`` and treated/recovered ``R``.  ``u1`` scales
treatment of ``L1`` and ``u2`` treatment of ``L2``.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import InvalidInputError, InvalidParametersError

__all__ = [
    "Parameters",
    "State",
    "ControlPoint",
    "dynamics_rhs",
    "basic_reproduction_number",
    "endemic_threshold_beta",
]


class State(NamedTuple):
    s: float
    l1: float
    i: float
    l2: float
    r: float


class ControlPoint(NamedTuple):
    u1: float
    u2: float


_RATES = ("beta", "mu", "delta", "omega", "omega_r", "sigma", "sigma_r",
          "tau0", "tau1", "tau2", "w0", "w1", "w2")


@dataclass(frozen=True)
class Parameters:
    """Epidemiological, horizon and objective-weight constants.

    Defaults are the reference values (mean life time 70 yr, six months of
    infectiousness under treatment, ``N = 30000``, five-year horizon, unit
    weights of 50).  ``beta`` has no default: every scenario must set it.
    ``sigma_r`` defaults to ``sigma``.
    """

    beta: float
    mu: float = 1.0 / 70.0
    delta: float = 12.0
    phi: float = 0.05
    omega: float = 0.0002
    omega_r: float = 0.00002
    sigma: float = 0.25
    sigma_r: float = 0.25
    tau0: float = 2.0
    tau1: float = 2.0
    tau2: float = 1.0
    n_pop: float = 30000.0
    t_f: float = 5.0
    w0: float = 50.0
    w1: float = 50.0
    w2: float = 50.0

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidParametersError(f"{f.name} must be a number, got {v!r}")
            if not math.isfinite(v):
                raise InvalidParametersError(f"{f.name} must be finite, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        for name in _RATES:
            if getattr(self, name) < 0:
                raise InvalidParametersError(f"{name} must be >= 0, got {getattr(self, name)}")
        if not 0.0 <= self.phi <= 1.0:
            raise InvalidParametersError(f"phi ∈ [0,1] required, got {self.phi}")
        if self.n_pop <= 0:
            raise InvalidParametersError(f"n_pop must be > 0, got {self.n_pop}")
        if self.t_f <= 0:
            raise InvalidParametersError(f"t_f must be > 0, got {self.t_f}")

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_dict(self):
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise InvalidParametersError(f"unknown parameter field(s): {', '.join(unknown)}")
        if "beta" not in data:
            raise InvalidParametersError("missing required parameter: beta")
        return cls(**data)

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        if not isinstance(data, dict):
            raise InvalidParametersError("parameter document must be a JSON object")
        return cls.from_dict(data)


def _finite(name, values):
    arr = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite values: {values!r}")
    return arr


def rhs_scalar(s, l1, i, l2, r, u1, u2, p):
    """Unchecked right-hand side on plain floats, used in the integration loops."""
    b = p.beta / p.n_pop
    bi = b * i
    return (
        p.mu * p.n_pop - bi * s - p.mu * s,
        bi * (s + p.sigma * l2 + p.sigma_r * r) - (p.delta + p.tau1 * u1 + p.mu) * l1,
        p.phi * p.delta * l1 + p.omega * l2 + p.omega_r * r - (p.tau0 + p.mu) * i,
        (1.0 - p.phi) * p.delta * l1 - p.sigma * bi * l2 - (p.omega + p.tau2 * u2 + p.mu) * l2,
        p.tau0 * i + p.tau1 * u1 * l1 + p.tau2 * u2 * l2
        - p.sigma_r * bi * r - (p.omega_r + p.mu) * r,
    )


def dynamics_rhs(state, control, params):
    """Time derivative of ``(S, L1, I, L2, R)`` under controls ``(u1, u2)``.

    Returns an ndarray of shape ``(5,)`` in individuals per year.  Birth
    ``mu*N`` balances deaths, so the components sum to zero whenever the
    state sums to ``N``.
    """
    y = _finite("state", state)
    u = _finite("control", control)
    if y.shape != (5,) or u.shape != (2,):
        raise InvalidInputError("state must have 5 components and control 2")
    return np.array(rhs_scalar(*y.tolist(), *u.tolist(), params))


def basic_reproduction_number(params):
    p = params
    den = p.mu * (p.omega_r + p.tau0 + p.mu) * (p.delta + p.mu) * (p.omega + p.mu)
    if den == 0:
        raise InvalidParametersError("R0 undefined: zero denominator")
    num = p.delta * (p.omega + p.phi * p.mu) * (p.omega_r + p.mu)
    return p.beta * num / den


def endemic_threshold_beta(params):
    """Transmission coefficient at which ``R0 == 1``."""
    per_beta = basic_reproduction_number(params.replace(beta=1.0))
    if per_beta == 0:
        raise InvalidParametersError("R0 does not depend on beta for these parameters")
    return 1.0 / per_beta
