"""Scenario cells and parameter sweeps.

A cell is one ``(parameters, strategy)`` combination: its own endemic
equilibrium is computed, used as the initial state of a forward-backward
sweep, and the converged solution is summarised.  Cells never share state,
so a batch can be spread over a process pool without changing any result.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .equilibrium import EquilibriumResult, endemic_equilibrium
from .errors import ConvergenceError, InvalidInputError, TBControlError
from .measures import CostWeights, SummaryMeasures, icer_table, summarize
from .model import Parameters
from .optctl import STRATEGIES, FbsSettings, OptimalSolution, StrategyMask, solve_fbs

__all__ = [
    "MASKS",
    "SIGMA_R_RULES",
    "ScenarioSpec",
    "ScenarioResult",
    "BatchError",
    "run_scenario",
    "run_batch",
    "sweep_beta",
    "sweep_tf",
    "sweep_weights",
    "strategy_comparison",
]

MASKS = {**STRATEGIES, "none": StrategyMask(False, False)}

SIGMA_R_RULES = {"sigma": 1.0, "2sigma": 2.0, "sigma/2": 0.5}


def sigma_r_from_rule(rule, sigma):
    try:
        return SIGMA_R_RULES[rule] * sigma
    except KeyError:
        raise InvalidInputError(
            f"sigma_r_rule must be one of {sorted(SIGMA_R_RULES)}, got {rule!r}"
        ) from None


@dataclass(frozen=True)
class ScenarioSpec:
    params: Parameters
    strategy: str = "a"
    cost_weights: CostWeights = CostWeights()
    settings: FbsSettings = FbsSettings()
    label: str | None = None

    def __post_init__(self):
        if self.strategy not in MASKS:
            raise InvalidInputError(f"unknown strategy {self.strategy!r}; expected one of {sorted(MASKS)}")
        if self.label is None:
            object.__setattr__(self, "label", default_label(self.params, self.strategy))

    @property
    def mask(self):
        return MASKS[self.strategy]


def default_label(params, strategy):
    return f"beta{params.beta:g}_sr{params.sigma_r:g}_{strategy}"


@dataclass(frozen=True)
class ScenarioResult:
    spec: ScenarioSpec
    equilibrium: EquilibriumResult
    solution: OptimalSolution
    measures: SummaryMeasures
    diagnostics: dict = field(default_factory=dict)

    @property
    def converged(self):
        return self.equilibrium.converged and self.solution.converged

    def summary_row(self):
        """Values in the fixed summary column order."""
        m = self.measures
        p = self.spec.params
        return (p.beta, p.sigma_r, self.spec.strategy, m.cases_averted, m.total_cost,
                m.acer, m.effectiveness, m.tr1, m.tr2, self.solution.objective,
                self.solution.iterations, self.converged)


class BatchError(TBControlError):
    """Some cells of a batch raised; the others still ran.

    ``results`` holds the successful cells and ``failures`` maps each failed
    label to its error message.
    """

    def __init__(self, failures, results):
        names = ", ".join(sorted(failures))
        super().__init__(f"{len(failures)} scenario cell(s) failed: {names}")
        self.failures = failures
        self.results = results


def run_scenario(spec):
    """Equilibrium, then optimal control, then measures for one cell.

    Numerical non-convergence does not raise: the best available iterate is
    used, ``converged`` ends up False and the reason is kept under
    ``diagnostics["errors"]``.
    """
    diag = {"errors": []}
    t0 = time.perf_counter()
    try:
        eq = endemic_equilibrium(spec.params)
    except ConvergenceError as exc:
        eq = exc.best
        diag["errors"].append(f"equilibrium: {exc}")
    t1 = time.perf_counter()
    try:
        sol = solve_fbs(spec.params, eq.state, spec.mask, spec.settings)
    except ConvergenceError as exc:
        sol = exc.best
        diag["errors"].append(f"fbs: {exc}")
    t2 = time.perf_counter()
    measures = summarize(sol, spec.cost_weights)
    diag["equilibrium_residual"] = eq.residual_norm
    diag["residuals"] = dict(sol.residuals)
    diag["timings"] = {"equilibrium": t1 - t0, "fbs": t2 - t1}
    return ScenarioResult(spec, eq, sol, measures, diag)


def _guarded(spec):
    try:
        return spec.label, run_scenario(spec), None
    except Exception as exc:  # collected per cell; the batch carries on
        return spec.label, None, f"{type(exc).__name__}: {exc}"


def resolve_workers(workers):
    if workers is None:
        return 1
    if int(workers) != workers or workers < 1:
        raise InvalidInputError(f"worker count must be a positive integer, got {workers!r}")
    return int(workers)


def run_batch(specs, workers=1, sort_key=None):
    """Run independent cells, serially or on a process pool.

    Results come back sorted by `sort_key` (default: input order), so the
    output does not depend on the worker count or on completion order.

    Raises
    ------
    BatchError
        After every cell has run, if any of them raised.
    """
    specs = list(specs)
    labels = [s.label for s in specs]
    if len(set(labels)) != len(labels):
        raise InvalidInputError(f"scenario labels must be unique within a batch: {labels}")
    workers = min(resolve_workers(workers), max(len(specs), 1))
    if workers == 1:
        outcomes = [_guarded(s) for s in specs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_guarded, specs))

    order = {label: k for k, label in enumerate(labels)}
    results = [r for _, r, err in outcomes if err is None]
    failures = {label: err for label, _, err in outcomes if err is not None}
    key = sort_key or (lambda r: order[r.spec.label])
    results.sort(key=key)
    if failures:
        raise BatchError(failures, results)
    return results


def sweep_beta(betas, sigma_r_rule="sigma", strategy="a", base=None, workers=1):
    """One cell per transmission coefficient, ordered by beta.

    `sigma_r_rule` is ``"sigma"``, ``"2sigma"`` or ``"sigma/2"``; None keeps
    the ``sigma_r`` of `base`.
    """
    betas = list(betas)
    if not betas or any(not b > 0 for b in betas):
        raise InvalidInputError(f"betas must be a non-empty list of positive values, got {betas}")
    base = base or ScenarioSpec(Parameters(beta=betas[0]))
    if sigma_r_rule is None:
        sigma_r = base.params.sigma_r
    else:
        sigma_r = sigma_r_from_rule(sigma_r_rule, base.params.sigma)
    specs = []
    for b in betas:
        params = base.params.replace(beta=b, sigma_r=sigma_r)
        specs.append(replace(base, params=params, strategy=strategy,
                             label=default_label(params, strategy)))
    return run_batch(specs, workers, sort_key=lambda r: r.spec.params.beta)


def sweep_tf(tfs, base, workers=1):
    """One cell per horizon at a constant step size."""
    tfs = list(tfs)
    if not tfs or any(not t > 0 for t in tfs):
        raise InvalidInputError(f"horizons must be positive, got {tfs}")
    specs = []
    for t_f in tfs:
        settings = base.settings
        if settings.n_steps is not None:
            n = max(1, round(settings.n_steps * t_f / base.params.t_f))
            settings = replace(settings, n_steps=n)
        params = base.params.replace(t_f=t_f)
        specs.append(replace(base, params=params, settings=settings,
                             label=f"{default_label(params, base.strategy)}_tf{t_f:g}"))
    return run_batch(specs, workers, sort_key=lambda r: r.spec.params.t_f)


def sweep_weights(w_sets, base, workers=1):
    """One cell per ``(w0, w1, w2)`` triple, in input order."""
    w_sets = [tuple(float(v) for v in w) for w in w_sets]
    if not w_sets:
        raise InvalidInputError("w_sets must not be empty")
    specs = []
    for w0, w1, w2 in w_sets:
        if not (w0 > 0 and w1 > 0 and w2 > 0):
            raise InvalidInputError(f"weights must be > 0, got {(w0, w1, w2)}")
        params = base.params.replace(w0=w0, w1=w1, w2=w2)
        specs.append(replace(base, params=params,
                             label=f"{default_label(params, base.strategy)}_w{w0:g}-{w1:g}-{w2:g}"))
    return run_batch(specs, workers)


def strategy_comparison(beta, sigma_r, base=None, workers=1):
    """Solve strategies a, b and c for one scenario and rank them.

    Returns
    -------
    results : list of ScenarioResult
        In strategy order a, b, c.
    table : list of IcerRow
        From :func:`tbctl.measures.icer_table`.
    """
    base = base or ScenarioSpec(Parameters(beta=beta))
    params = base.params.replace(beta=beta, sigma_r=sigma_r)
    specs = [replace(base, params=params, strategy=s, label=s) for s in ("a", "b", "c")]
    results = run_batch(specs, workers)
    table = icer_table([(r.spec.strategy, r.measures.cases_averted, r.measures.total_cost)
                        for r in results])
    return results, table


def env_workers(default=1, var="TB_OPTCTL_WORKERS"):
    value = os.environ.get(var)
    if value is None or value == "":
        return default
    try:
        return resolve_workers(int(value))
    except (ValueError, InvalidInputError):
        raise InvalidInputError(f"{var} must be a positive integer, got {value!r}") from None
