"""``tb-optctl``: batch front end writing CSV/JSON result tables.

Usage::

    tb-optctl run --config run.json [--mode single] [--beta 100] [--out results] [--workers 4]

The configuration is a flat JSON object.  Parameter fields (``beta``,
``mu``, ..., ``w2``) sit next to run keys such as ``mode``, ``strategy``,
``sigma_r_rule``, ``betas``, ``tfs``, ``w_sets``, solver knobs
(``relaxation``, ``tol``, ``max_iters``, ``step``, ``n_steps``) and unit
costs ``c1``/``c2``.  Command-line flags override the file; the
``TB_OPTCTL_WORKERS`` environment variable overrides the worker count.

Exit status: 0 on success, 1 for usage or configuration errors, 2 if any
cell failed to converge.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .errors import TBControlError
from .measures import SUMMARY_COLUMNS, CostWeights
from .model import Parameters
from .optctl import FbsSettings
from .scenarios import (
    MASKS,
    SIGMA_R_RULES,
    BatchError,
    ScenarioSpec,
    env_workers,
    run_scenario,
    strategy_comparison,
    sweep_beta,
    sweep_tf,
    sweep_weights,
)

__all__ = ["ConfigError", "RunConfig", "parse_config", "emit_results", "run", "main"]

MODES = ("single", "sweep-beta", "sweep-tf", "sweep-weights", "strategy-compare")
PARAM_FIELDS = tuple(f.name for f in dataclasses.fields(Parameters))
_PARAM_DEFAULTS = {f.name: f.default for f in dataclasses.fields(Parameters) if f.name != "beta"}
_SETTINGS_FIELDS = ("relaxation", "tol", "max_iters", "step", "n_steps")
_RUN_FIELDS = ("mode", "strategy", "sigma_r_rule", "c1", "c2", "betas", "tfs", "w_sets",
               "out", "workers") + _SETTINGS_FIELDS
_REQUIRED = {
    "single": ("beta",),
    "sweep-beta": ("betas",),
    "sweep-tf": ("beta", "tfs"),
    "sweep-weights": ("beta", "w_sets"),
    "strategy-compare": ("beta",),
}

TRAJECTORY_COLUMNS = ("t", "S", "L1", "I", "L2", "R", "u1", "u2", "E",
                      "lam1", "lam2", "lam3", "lam4", "lam5")


class ConfigError(TBControlError, ValueError):
    """Configuration problem; the message names the offending key."""


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: dict
    strategy: str = "a"
    c1: float = 1.0
    c2: float = 1.0
    relaxation: float = 0.5
    tol: float = 1e-4
    max_iters: int = 500
    step: float = 0.005
    n_steps: int | None = None
    betas: tuple | None = None
    tfs: tuple | None = None
    w_sets: tuple | None = None
    out: str = "results"
    workers: int = 1

    def to_dict(self):
        """Flat document that :func:`parse_config` turns back into this config."""
        d = {"mode": self.mode, **self.params}
        for name in ("strategy", "c1", "c2", *_SETTINGS_FIELDS, "out", "workers"):
            d[name] = getattr(self, name)
        d["betas"] = list(self.betas) if self.betas is not None else None
        d["tfs"] = list(self.tfs) if self.tfs is not None else None
        d["w_sets"] = [list(w) for w in self.w_sets] if self.w_sets is not None else None
        return {k: v for k, v in d.items() if v is not None}

    def parameters(self, **changes):
        return Parameters(**{**self.params, **changes})

    def settings(self):
        return FbsSettings(relaxation=self.relaxation, tol=self.tol, max_iters=self.max_iters,
                           step=self.step, n_steps=self.n_steps)

    def base_spec(self, beta=None):
        params = self.parameters(**({} if beta is None else {"beta": beta}))
        return ScenarioSpec(params, self.strategy, CostWeights(self.c1, self.c2), self.settings())


def _number(key, value, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{key}: must be finite, got {value!r}")
    if integer:
        if int(value) != value:
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _number_list(key, value):
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{key}: expected a non-empty list of numbers")
    return tuple(_number(f"{key}[{k}]", v) for k, v in enumerate(value))


def parse_config(path=None, overrides=None):
    """Build a validated :class:`RunConfig` from a JSON file and/or overrides.

    `overrides` (a mapping in the same flat format) takes precedence over
    the file.  Keys whose value is None in `overrides` are ignored.
    """
    doc = {}
    if path is not None:
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: malformed JSON ({exc})") from None
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
    doc = {**doc, **{k: v for k, v in (overrides or {}).items() if v is not None}}

    unknown = sorted(set(doc) - set(PARAM_FIELDS) - set(_RUN_FIELDS))
    if unknown:
        raise ConfigError(f"unknown key(s): {', '.join(unknown)}")

    mode = doc.get("mode", "single")
    if mode not in MODES:
        raise ConfigError(f"mode: expected one of {', '.join(MODES)}, got {mode!r}")
    for key in _REQUIRED[mode]:
        if key not in doc:
            raise ConfigError(f"{key}: required for mode {mode!r}")

    params = dict(_PARAM_DEFAULTS)
    for key in PARAM_FIELDS:
        if key in doc:
            params[key] = _number(key, doc[key])
    if "sigma_r_rule" in doc:
        if "sigma_r" in doc:
            raise ConfigError("sigma_r_rule: conflicts with an explicit sigma_r")
        rule = doc["sigma_r_rule"]
        if rule not in SIGMA_R_RULES:
            raise ConfigError(f"sigma_r_rule: expected one of {sorted(SIGMA_R_RULES)}, got {rule!r}")
        params["sigma_r"] = SIGMA_R_RULES[rule] * params["sigma"]
    elif "sigma_r" not in doc:
        params["sigma_r"] = params["sigma"]
    try:
        Parameters(**{"beta": 1.0, **params})
    except TBControlError as exc:
        raise ConfigError(f"parameters: {exc}") from None

    kw = {"mode": mode, "params": params}
    if "strategy" in doc:
        if doc["strategy"] not in MASKS:
            raise ConfigError(f"strategy: expected one of {sorted(MASKS)}, got {doc['strategy']!r}")
        kw["strategy"] = doc["strategy"]
    for key in ("c1", "c2", "relaxation", "tol", "step"):
        if key in doc:
            kw[key] = _number(key, doc[key])
    for key in ("max_iters", "n_steps", "workers"):
        if key in doc:
            kw[key] = _number(key, doc[key], integer=True)
    if "out" in doc:
        if not isinstance(doc["out"], str) or not doc["out"]:
            raise ConfigError("out: expected a non-empty path string")
        kw["out"] = doc["out"]
    for key in ("betas", "tfs"):
        if key in doc:
            kw[key] = _number_list(key, doc[key])
            if any(v <= 0 for v in kw[key]):
                raise ConfigError(f"{key}: all values must be > 0")
    if "w_sets" in doc:
        sets = doc["w_sets"]
        if not isinstance(sets, (list, tuple)) or not sets:
            raise ConfigError("w_sets: expected a non-empty list of [w0, w1, w2] triples")
        triples = []
        for k, w in enumerate(sets):
            t = _number_list(f"w_sets[{k}]", w)
            if len(t) != 3 or any(v <= 0 for v in t):
                raise ConfigError(f"w_sets[{k}]: expected three positive weights, got {w!r}")
            triples.append(t)
        kw["w_sets"] = tuple(triples)

    try:
        config = RunConfig(**kw)
        CostWeights(config.c1, config.c2)
        config.settings()
    except TBControlError as exc:
        raise ConfigError(str(exc)) from None
    if config.workers < 1:
        raise ConfigError(f"workers: must be >= 1, got {config.workers}")
    return config


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def emit_results(results, out_dir, config=None, icer=None):
    """Write ``summary.csv``, one ``trajectory_<label>.csv`` per cell and
    ``batch.json`` (plus ``icer.csv`` when an ICER table is given).

    Returns the list of written paths.
    """
    if not results:
        raise ConfigError("emit_results: no results to write")
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    written = []

    path = out / "summary.csv"
    _write_csv(path, SUMMARY_COLUMNS, [r.summary_row() for r in results])
    written.append(path)

    for r in results:
        sol = r.solution
        x = sol.state_traj.values
        u = sol.control_traj.values
        lam = sol.adjoint_traj.values
        e = r.measures.efficacy_traj.values[:, 0]
        rows = (
            (t, *x[k].tolist(), *u[k].tolist(), float(e[k]), *lam[k].tolist())
            for k, t in enumerate(sol.grid.times.tolist())
        )
        path = out / f"trajectory_{r.spec.label}.csv"
        _write_csv(path, TRAJECTORY_COLUMNS, rows)
        written.append(path)

    if icer is not None:
        path = out / "icer.csv"
        _write_csv(path, ("strategy", "A", "TC", "ACER", "ICER", "dominated_by"),
                   [(row.label, row.cases_averted, row.total_cost, row.acer,
                     "" if row.icer is None else row.icer, row.dominated_by or "")
                    for row in icer])
        written.append(path)

    cells = []
    for r in results:
        cells.append({
            "label": r.spec.label,
            "strategy": r.spec.strategy,
            "params": r.spec.params.to_dict(),
            "converged": r.converged,
            "iterations": r.solution.iterations,
            "objective": r.solution.objective,
            "equilibrium": {"state": list(r.equilibrium.state),
                            "residual_norm": r.equilibrium.residual_norm,
                            "converged": r.equilibrium.converged},
            "residuals": r.diagnostics.get("residuals", {}),
            "errors": r.diagnostics.get("errors", []),
            "measures": r.measures.to_dict(),
        })
    doc = {
        "tool": "tbctl",
        "version": __version__,
        "config": config.to_dict() if config is not None else None,
        "non_converged": sum(not r.converged for r in results),
        "cells": cells,
    }
    path = out / "batch.json"
    path.write_text(json.dumps(_json_safe(doc), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    written.append(path)
    return written


def run(config):
    """Execute a parsed config; returns ``(results, icer_table_or_None)``."""
    workers = config.workers
    if config.mode == "single":
        return [run_scenario(config.base_spec())], None
    if config.mode == "sweep-beta":
        base = config.base_spec(beta=config.betas[0])
        return sweep_beta(config.betas, None, config.strategy, base, workers), None
    if config.mode == "sweep-tf":
        return sweep_tf(config.tfs, config.base_spec(), workers), None
    if config.mode == "sweep-weights":
        return sweep_weights(config.w_sets, config.base_spec(), workers), None
    p = config.parameters()
    return strategy_comparison(p.beta, p.sigma_r, config.base_spec(), workers)


def _build_parser():
    parser = argparse.ArgumentParser(prog="tb-optctl", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a single scenario or a sweep")
    r.add_argument("--config", help="JSON configuration file")
    r.add_argument("--mode", choices=MODES)
    r.add_argument("--beta", type=float)
    r.add_argument("--sigma-r-rule", dest="sigma_r_rule", choices=sorted(SIGMA_R_RULES))
    r.add_argument("--strategy", choices=sorted(MASKS))
    r.add_argument("--out")
    r.add_argument("--workers", type=int)
    return parser


def main(argv=None):
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1

    overrides = {k: getattr(args, k) for k in ("mode", "beta", "sigma_r_rule", "strategy", "out", "workers")}
    try:
        if overrides["workers"] is None and os.environ.get("TB_OPTCTL_WORKERS"):
            overrides["workers"] = env_workers()
        config = parse_config(args.config, overrides)
    except TBControlError as exc:
        print(f"tb-optctl: config error: {exc}", file=sys.stderr)
        return 1

    try:
        results, icer = run(config)
    except BatchError as exc:
        print(f"tb-optctl: {exc}", file=sys.stderr)
        for label, msg in sorted(exc.failures.items()):
            print(f"  {label}: {msg}", file=sys.stderr)
        if exc.results:
            emit_results(exc.results, config.out, config)
        return 2
    except TBControlError as exc:
        print(f"tb-optctl: {exc}", file=sys.stderr)
        return 2

    try:
        emit_results(results, config.out, config, icer)
    except OSError as exc:
        print(f"tb-optctl: {exc}", file=sys.stderr)
        return 1
    bad = [r.spec.label for r in results if not r.converged]
    for label in bad:
        print(f"tb-optctl: cell {label} did not converge", file=sys.stderr)
    print(f"wrote {len(results)} scenario(s) to {config.out}")
    return 2 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
