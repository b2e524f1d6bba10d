"""Experiment harness: budget sweeps, rate fits, and report serialisation.

A convergence report holds, per requested budget, the measured budget (read
off the ledger category that matches the method's cost notion) and the
absolute error of every trial.  The fitted rate is the least-squares slope
of log median error against log measured budget; its confidence interval
comes from a nonparametric bootstrap over trials, because rows are
deterministic given the budget and the trials carry all the randomness.
"""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .holder import HolderClassSpec, HolderFunction
from .integrators import (
    IntegrationResult,
    integrate_coin,
    integrate_deterministic,
    integrate_mc,
    integrate_quantum,
)

METHODS = ("det", "mc", "mcvr", "coin", "quantum")

_BOOTSTRAP_RESAMPLES = 1000
_BOOTSTRAP_KEY = 10007


class ConfigurationError(Exception):
    """Raised for invalid experiment configurations; maps to exit code 2."""


@dataclass
class TrialRecord:
    error: float
    classical_evals: int
    quantum_queries: int
    random_bits: int
    gates: int


@dataclass
class BudgetRow:
    requested: int
    budget: int
    trials: list[TrialRecord]

    def errors(self) -> np.ndarray:
        return np.array([t.error for t in self.trials])


@dataclass
class ConvergenceReport:
    method: str
    d: int
    k: int
    alpha: float
    mode: str
    rows: list[BudgetRow] = field(default_factory=list)
    fitted_slope: float | None = None
    slope_ci: tuple[float, float] | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def gamma(self) -> float:
        return (self.k + self.alpha) / self.d


def _trial_rng(seed: int, budget_index: int, trial_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(budget_index, trial_index))
    return np.random.Generator(np.random.PCG64(ss))


def _measured_budget(method: str, result: IntegrationResult) -> int:
    led = result.ledger
    if method in ("det", "mc", "mcvr"):
        return led.classical_evals
    if method == "coin":
        return led.classical_evals + led.random_bits
    return led.quantum_queries


def _run_one(
    method: str,
    fn: HolderFunction,
    budget: int,
    mode: str,
    rng: np.random.Generator,
) -> IntegrationResult:
    d = fn.spec.d
    if method == "det":
        ell = max(1, round(budget ** (1.0 / d)))
        return integrate_deterministic(fn, ell)
    if method == "mc":
        return integrate_mc(fn, budget, rng)
    if method == "mcvr":
        return integrate_mc(fn, max(1, budget // 2), rng, variance_reduced=True)
    if method == "coin":
        eps1 = min(0.49, budget**-0.5)
        return integrate_coin(fn, eps1, rng)
    if method == "quantum":
        if budget < 16 or budget & (budget - 1):
            raise ConfigurationError(
                f"quantum budgets must be powers of two >= 16, got {budget}"
            )
        eps1 = math.pi / budget + math.pi**2 / budget**2
        return integrate_quantum(fn, eps1, rng, mode=mode)
    raise ConfigurationError(f"unknown method {method!r}")


def run_convergence(
    method: str,
    spec: HolderClassSpec,
    budgets,
    trials: int,
    seed: int,
    fn: HolderFunction,
    mode: str = "query",
) -> ConvergenceReport:
    """Sweep the budgets, recording per-trial errors against the exact integral.

    Deterministic given the seed: trial streams are split from
    (seed, budget index, trial index), so trial counts do not perturb each
    other and rows can run in parallel (capped by QINTLAB_THREADS).
    Deterministic methods run once per budget and replicate the row.
    """
    if method not in METHODS:
        raise ConfigurationError(f"method must be one of {METHODS}, got {method!r}")
    budgets = [int(b) for b in budgets]
    if any(b2 <= b1 for b1, b2 in zip(budgets, budgets[1:])):
        raise ConfigurationError("budgets must be strictly increasing")
    if trials < 1:
        raise ConfigurationError("need at least one trial")
    if fn.exact_integral is None:
        raise ConfigurationError(f"function {fn.name!r} has no exact integral to score against")
    if fn.spec != spec:
        raise ConfigurationError("function was built for a different class spec")
    exact = fn.exact_integral

    def record(result: IntegrationResult) -> TrialRecord:
        led = result.ledger
        return TrialRecord(
            error=abs(result.estimate - exact),
            classical_evals=led.classical_evals,
            quantum_queries=led.quantum_queries,
            random_bits=led.random_bits,
            gates=led.gates,
        )

    threads = max(1, int(os.environ.get("QINTLAB_THREADS", "1")))
    rows = []
    for bi, budget in enumerate(budgets):
        if method == "det":
            result = _run_one(method, fn, budget, mode, _trial_rng(seed, bi, 0))
            rows.append(
                BudgetRow(budget, _measured_budget(method, result), [record(result)] * trials)
            )
            continue

        def one_trial(ti: int) -> IntegrationResult:
            return _run_one(method, fn, budget, mode, _trial_rng(seed, bi, ti))

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                results = list(pool.map(one_trial, range(trials)))
        else:
            results = [one_trial(ti) for ti in range(trials)]
        measured = _measured_budget(method, results[0])
        rows.append(BudgetRow(budget, measured, [record(r) for r in results]))
    return ConvergenceReport(
        method=method,
        d=spec.d,
        k=spec.k,
        alpha=spec.alpha,
        mode=mode,
        rows=rows,
        metadata={"seed": seed, "trials": trials, "fn": fn.name},
    )


def fit_rate(report: ConvergenceReport) -> tuple[float, tuple[float, float]]:
    """Least-squares slope of log median error vs log budget, with 95% CI.

    Rows whose median error is exactly zero (exact-integration fast paths)
    are excluded with a warning.  The CI is a percentile bootstrap over
    trials, seeded from the report seed so refits are bit-identical.
    """
    if len(report.rows) < 4:
        raise ConfigurationError(f"need at least 4 budget rows, got {len(report.rows)}")
    kept = []
    for row in report.rows:
        if float(np.median(row.errors())) == 0.0:
            warnings.warn(f"budget row {row.budget} has zero median error; excluded from fit")
        else:
            kept.append(row)
    if len(kept) < 2:
        raise ConfigurationError("fewer than 2 nonzero rows left to fit")
    logb = np.log([row.budget for row in kept])
    errs = np.stack([row.errors() for row in kept])
    slope = float(np.polyfit(logb, np.log(np.median(errs, axis=1)), 1)[0])

    seed = report.metadata.get("seed", 0)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(_BOOTSTRAP_KEY,))))
    n_trials = errs.shape[1]
    slopes = np.empty(_BOOTSTRAP_RESAMPLES)
    for b in range(_BOOTSTRAP_RESAMPLES):
        pick = rng.integers(0, n_trials, size=(len(kept), n_trials))
        medians = np.median(np.take_along_axis(errs, pick, axis=1), axis=1)
        medians = np.maximum(medians, 1e-300)
        slopes[b] = np.polyfit(logb, np.log(medians), 1)[0]
    ci = (float(np.percentile(slopes, 2.5)), float(np.percentile(slopes, 97.5)))
    report.fitted_slope = slope
    report.slope_ci = ci
    return slope, ci


# ---------------------------------------------------------------------------
# Serialisation
# ---------------------------------------------------------------------------

CSV_HEADER = (
    "method,d,k,alpha,gamma,mode,budget,trial,error,"
    "classical_evals,quantum_queries,random_bits,gates,seed"
)


def export(report: ConvergenceReport, fmt: str, path: str) -> None:
    """Write the report as CSV (one row per budget and trial) or JSON."""
    if fmt == "csv":
        _export_csv(report, path)
    elif fmt == "json":
        _export_json(report, path)
    else:
        raise ConfigurationError(f"format must be 'csv' or 'json', got {fmt!r}")


def _export_csv(report: ConvergenceReport, path: str) -> None:
    try:
        out = open(path, "w", newline="")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    with out:
        out.write(CSV_HEADER + "\n")
        seed = report.metadata.get("seed", 0)
        for row in report.rows:
            for ti, trial in enumerate(row.trials):
                out.write(
                    f"{report.method},{report.d},{report.k},{report.alpha!r},"
                    f"{report.gamma!r},{report.mode},{row.budget},{ti},{trial.error!r},"
                    f"{trial.classical_evals},{trial.quantum_queries},"
                    f"{trial.random_bits},{trial.gates},{seed}\n"
                )


def _export_json(report: ConvergenceReport, path: str) -> None:
    payload = {
        "method": report.method,
        "d": report.d,
        "k": report.k,
        "alpha": report.alpha,
        "gamma": report.gamma,
        "mode": report.mode,
        "fitted_slope": report.fitted_slope,
        "slope_ci": list(report.slope_ci) if report.slope_ci else None,
        "metadata": report.metadata,
        "rows": [
            {
                "requested": row.requested,
                "budget": row.budget,
                "trials": [vars(t) for t in row.trials],
            }
            for row in report.rows
        ],
    }
    try:
        out = open(path, "w")
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
    with out:
        json.dump(payload, out, indent=1)
        out.write("\n")


def load_report(path: str, fmt: str) -> ConvergenceReport:
    """Re-import an exported report; refitting reproduces the slope exactly."""
    if fmt == "json":
        with open(path) as handle:
            payload = json.load(handle)
        report = ConvergenceReport(
            method=payload["method"],
            d=payload["d"],
            k=payload["k"],
            alpha=payload["alpha"],
            mode=payload["mode"],
            metadata=payload["metadata"],
        )
        report.fitted_slope = payload["fitted_slope"]
        if payload["slope_ci"]:
            report.slope_ci = tuple(payload["slope_ci"])
        for row in payload["rows"]:
            report.rows.append(
                BudgetRow(
                    requested=row["requested"],
                    budget=row["budget"],
                    trials=[TrialRecord(**t) for t in row["trials"]],
                )
            )
        return report
    if fmt != "csv":
        raise ConfigurationError(f"format must be 'csv' or 'json', got {fmt!r}")
    report = None
    with open(path, newline="") as handle:
        for record in csv.DictReader(handle):
            if report is None:
                report = ConvergenceReport(
                    method=record["method"],
                    d=int(record["d"]),
                    k=int(record["k"]),
                    alpha=float(record["alpha"]),
                    mode=record["mode"],
                    metadata={"seed": int(record["seed"])},
                )
            budget = int(record["budget"])
            if not report.rows or report.rows[-1].budget != budget:
                report.rows.append(BudgetRow(requested=budget, budget=budget, trials=[]))
            report.rows[-1].trials.append(
                TrialRecord(
                    error=float(record["error"]),
                    classical_evals=int(record["classical_evals"]),
                    quantum_queries=int(record["quantum_queries"]),
                    random_bits=int(record["random_bits"]),
                    gates=int(record["gates"]),
                )
            )
    if report is None:
        raise ConfigurationError(f"no data rows in {path}")
    return report
