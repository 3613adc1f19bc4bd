"""Approximate leave-one-out predictions from a single batch fit.

For game ``t`` with weight ``w``, loss derivatives ``g``, ``h`` at the full
fit and ``a = x_t' H^-1 x_t``::

    z_loo = z_full + w * g * a * s / (s**2 - w * h * a)

``a`` depends only on the unordered team pair, so it is computed once per
pair from a single Cholesky factor of the Hessian.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular

from . import models
from .batch import BatchProblem, BatchSolution, solve
from .evaluation import (
    EvaluationReport,
    accuracy,
    count_ties,
    log_score,
    zero_probability_games,
)


class AloSingularityError(ArithmeticError):
    def __init__(self, match_index: int, denominator: float):
        super().__init__(f"ALO singularity at game {match_index}: denominator {denominator:.3e} <= 0")
        self.match_index = match_index
        self.denominator = denominator


@dataclass(frozen=True)
class AloPrediction:
    match_index: int
    z_full: float
    z_loo: float
    a_t: float
    correction: float
    denominator: float


@dataclass
class AloArrays:
    """Columnar form of the per-game ALO quantities."""

    match_index: np.ndarray
    z_full: np.ndarray
    z_loo: np.ndarray
    a_t: np.ndarray
    correction: np.ndarray
    denominator: np.ndarray

    def predictions(self) -> list[AloPrediction]:
        return [
            AloPrediction(int(t), float(zf), float(zl), float(a), float(c), float(d))
            for t, zf, zl, a, c, d in zip(
                self.match_index, self.z_full, self.z_loo, self.a_t, self.correction, self.denominator
            )
        ]


def leverages(hessian: np.ndarray, home: np.ndarray, away: np.ndarray) -> np.ndarray:
    """``x_t' H^-1 x_t`` for every game, one triangular solve per distinct pair."""
    if len(home) == 0:
        return np.zeros(0)
    L = cholesky(hessian, lower=True)
    lo = np.minimum(home, away)
    hi = np.maximum(home, away)
    pairs, inverse = np.unique(np.stack([lo, hi], axis=1), axis=0, return_inverse=True)
    X = np.zeros((hessian.shape[0], len(pairs)))
    cols = np.arange(len(pairs))
    X[pairs[:, 0], cols] = 1.0
    X[pairs[:, 1], cols] = -1.0
    Y = solve_triangular(L, X, lower=True, check_finite=False)
    return np.einsum("ij,ij->j", Y, Y)[np.asarray(inverse).reshape(-1)]


def alo_arrays(solution: BatchSolution, problem: BatchProblem) -> AloArrays:
    theta = solution.theta_hat
    s = problem.scale
    z_full = problem.z(theta)
    _, g, h = problem.terms(theta)
    w = problem.w
    a = leverages(solution.hessian, problem.arrays.home, problem.arrays.away)
    denom = s * s - w * h * a
    bad = np.flatnonzero(denom <= 0)
    if bad.size:
        k = int(bad[0])
        raise AloSingularityError(int(problem.match_index[k]), float(denom[k]))
    correction = w * g * a * s / denom
    return AloArrays(problem.match_index.copy(), z_full, z_full + correction, a, correction, denom)


def alo_predictions(solution: BatchSolution, problem: BatchProblem) -> list[AloPrediction]:
    return alo_arrays(solution, problem).predictions()


def exact_loo(problem: BatchProblem, t: int, tol: float = 1e-10, init=None) -> float:
    """``x_t . theta`` refitted without game ``t`` (by match_index)."""
    reduced = problem.without(t)
    sol = solve(reduced, init=init, tol=tol)
    k = problem.position(t)
    return float(sol.theta_hat[problem.arrays.home[k]] - sol.theta_hat[problem.arrays.away[k]])


def loo_log_probs(problem: BatchProblem, z_loo: np.ndarray) -> np.ndarray:
    return models.outcome_log_probs(problem.params, z_loo / problem.scale, problem.arrays.venue_b)


def alo_scores(
    problem: BatchProblem,
    solution: BatchSolution,
    metric: str = "both",
    alo: AloArrays | None = None,
) -> EvaluationReport:
    """Log-score and/or accuracy of the leave-one-out predictions, all games."""
    if metric not in ("log_score", "accuracy", "both"):
        raise ValueError(f"unknown metric {metric!r}")
    if alo is None:
        alo = alo_arrays(solution, problem)
    lp = loo_log_probs(problem, alo.z_loo)
    outcome = problem.arrays.outcome
    T = problem.T
    window = (1, T)
    report = EvaluationReport(window=window, games_counted=T, params_echo=describe_problem(problem))
    if metric in ("log_score", "both"):
        report.log_score = log_score(lp, outcome, window, log=True)
        report.zero_probability_games = zero_probability_games(lp, outcome, window, log=True)
    if metric in ("accuracy", "both"):
        report.accuracy = accuracy(lp, outcome, window)
        report.ties = count_ties(lp, window)
    return report


def describe_problem(problem: BatchProblem) -> dict:
    p = problem.params
    d = {"model": type(p).__name__.replace("Params", "").lower(), "alpha": problem.alpha, "scale": p.scale}
    for name in ("eta", "kappa", "c", "truncation_D", "curvature"):
        if hasattr(p, name):
            d[name] = getattr(p, name)
    d["xi"] = list(problem.weights.xi)
    d["zeta"] = list(problem.weights.zeta)
    return d


ALO_CSV_FIELDS = ("t", "z_full", "z_loo", "a_t", "correction", "metric_contribution")


def write_alo_csv(fh, problem: BatchProblem, alo: AloArrays) -> None:
    """Per-game rows; the metric contribution is the game's negated log-probability."""
    lp = loo_log_probs(problem, alo.z_loo)
    contrib = -lp[np.arange(problem.T), problem.arrays.outcome]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(ALO_CSV_FIELDS)
    for k in range(problem.T):
        writer.writerow(
            [int(alo.match_index[k]), repr(float(alo.z_full[k])), repr(float(alo.z_loo[k])),
             repr(float(alo.a_t[k])), repr(float(alo.correction[k])), repr(float(contrib[k]))]
        )
