"""Regularized weighted maximum-likelihood skills over a fixed match window.

Minimizes::

    J(theta) = sum_t w_t * loss(x_t . theta / s; y_t) + alpha / (2 s^2) * |theta|^2

with ``w_t = xi[c_t] * zeta[v_t]`` by damped Newton iterations.
"""

from __future__ import annotations

import json
from collections.abc import Sequence
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from . import models
from .match_data import MatchArrays, MatchRecord, TeamRegistry, to_arrays
from .online import WeightScheme


class DegenerateProblemError(ValueError):
    pass


class NoConvergenceError(RuntimeError):
    def __init__(self, message: str, log: list[dict]):
        super().__init__(message)
        self.log = log


@dataclass
class BatchProblem:
    registry: TeamRegistry
    arrays: MatchArrays
    params: models.DavidsonParams | models.SkellamParams | models.QuadraticParams
    weights: WeightScheme = field(default_factory=WeightScheme)
    alpha: float = 1.0
    match_index: np.ndarray | None = None
    w: np.ndarray | None = None

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError("alpha must be >= 0")
        if self.w is None:
            self.w = self.weights.game_weights(self.arrays)
        if self.match_index is None:
            self.match_index = np.arange(1, len(self.arrays) + 1)

    @classmethod
    def from_matches(
        cls,
        registry: TeamRegistry,
        matches: Sequence[MatchRecord],
        params,
        weights: WeightScheme | None = None,
        alpha: float = 1.0,
    ) -> BatchProblem:
        return cls(
            registry,
            to_arrays(registry, matches),
            params,
            weights or WeightScheme(),
            alpha,
            match_index=np.array([m.match_index for m in matches], dtype=np.int64),
        )

    @property
    def scale(self) -> float:
        return self.params.scale

    @property
    def M(self) -> int:
        return len(self.registry)

    @property
    def T(self) -> int:
        return len(self.arrays)

    def position(self, match_index: int) -> int:
        hits = np.flatnonzero(self.match_index == match_index)
        if not hits.size:
            raise KeyError(f"no game with match_index {match_index}")
        return int(hits[0])

    def without(self, match_index: int) -> BatchProblem:
        """The same problem with one game's weight set to zero."""
        w = self.w.copy()
        w[self.position(match_index)] = 0.0
        return replace(self, w=w)

    def z(self, theta: np.ndarray) -> np.ndarray:
        """Raw skill differences ``x_t . theta``."""
        return theta[self.arrays.home] - theta[self.arrays.away]

    def terms(self, theta):
        a = self.arrays
        return models.loss_terms(self.params, self.z(theta) / self.scale, a.venue_b, a.outcome, a.goal_diff, a.score)


def streak_teams(problem: BatchProblem) -> list[str]:
    """Teams whose weighted results are all wins or all losses (no draws)."""
    a = problem.arrays
    live = problem.w > 0
    out = []
    for m in range(problem.M):
        home = live & (a.home == m)
        away = live & (a.away == m)
        if not (home.any() or away.any()):
            continue
        won = np.concatenate([a.outcome[home] == 0, a.outcome[away] == 2])
        lost = np.concatenate([a.outcome[home] == 2, a.outcome[away] == 0])
        if won.all() or lost.all():
            out.append(problem.registry.names[m])
    return out


def objective(theta, problem: BatchProblem) -> float:
    theta = np.asarray(theta, dtype=float)
    loss, _, _ = problem.terms(theta)
    ridge = 0.5 * problem.alpha / problem.scale**2 * float(theta @ theta)
    return float(np.dot(problem.w, loss)) + ridge


def gradient(theta, problem: BatchProblem) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    _, g, _ = problem.terms(theta)
    wg = problem.w * g / problem.scale
    M = problem.M
    a = problem.arrays
    grad = np.bincount(a.home, wg, M) - np.bincount(a.away, wg, M)
    return grad + problem.alpha / problem.scale**2 * theta


def hessian(theta, problem: BatchProblem) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    _, _, h = problem.terms(theta)
    c = problem.w * h / problem.scale**2
    M = problem.M
    a = problem.arrays
    H = np.zeros((M, M))
    flat = H.reshape(-1)
    np.add.at(flat, a.home * (M + 1), c)
    np.add.at(flat, a.away * (M + 1), c)
    np.add.at(flat, a.home * M + a.away, -c)
    np.add.at(flat, a.away * M + a.home, -c)
    H[np.diag_indices(M)] += problem.alpha / problem.scale**2
    return H


@dataclass
class BatchSolution:
    registry: TeamRegistry
    theta_hat: np.ndarray
    objective_value: float
    gradient_norm: float
    hessian: np.ndarray
    iterations: int
    log: list[dict] = field(default_factory=list)

    @property
    def skills(self) -> dict[str, float]:
        return dict(zip(self.registry.names, self.theta_hat.tolist()))

    def write_log(self, fh) -> None:
        for rec in self.log:
            fh.write(json.dumps(rec) + "\n")


_ARMIJO = 1e-4
_MAX_HALVINGS = 60
_EPS = np.finfo(float).eps


def _line_search(problem, theta, J, grad, direction):
    """Halving backtracking.

    A step is accepted on sufficient decrease of J.  When the change in J is
    below its floating-point resolution, the step is accepted only if it
    lowers the gradient max-norm instead.
    """
    slope = float(grad @ direction)
    if slope >= 0:
        return None
    gnorm = float(np.max(np.abs(grad)))
    resolution = 8 * _EPS * max(1.0, abs(J))
    step = 1.0
    for _ in range(_MAX_HALVINGS):
        cand = theta + step * direction
        J_new = objective(cand, problem)
        if J_new < J and J_new <= J + _ARMIJO * step * slope:
            return step, cand, J_new
        if abs(J_new - J) <= resolution and np.max(np.abs(gradient(cand, problem))) < gnorm:
            return step, cand, J_new
        step *= 0.5
    return None


def solve(
    problem: BatchProblem,
    init: np.ndarray | None = None,
    tol: float = 1e-8,
    max_iter: int = 200,
) -> BatchSolution:
    """Damped Newton with halving backtracking; gradient steps as fallback.

    ``tol`` bounds the max-norm of the gradient at the returned point.
    """
    if problem.alpha <= 0:
        streaks = streak_teams(problem)
        if streaks:
            raise DegenerateProblemError(
                f"unregularized degenerate problem: single-signed results for {', '.join(streaks)}"
            )
        raise DegenerateProblemError("alpha must be > 0: the unregularized problem is translation-invariant")

    theta = np.zeros(problem.M) if init is None else np.asarray(init, dtype=float).copy()
    J = objective(theta, problem)
    log: list[dict] = []
    for it in range(max_iter + 1):
        grad = gradient(theta, problem)
        gnorm = float(np.max(np.abs(grad))) if grad.size else 0.0
        if gnorm <= tol:
            log.append({"iter": it, "objective": J, "grad_norm": gnorm, "step": 0.0})
            return BatchSolution(problem.registry, theta, J, gnorm, hessian(theta, problem), it, log)
        if it == max_iter:
            break
        H = hessian(theta, problem)
        try:
            direction = -cho_solve(cho_factor(H), grad)
            found = _line_search(problem, theta, J, grad, direction)
        except LinAlgError:
            found = None
        if found is None:
            direction = -grad
            found = _line_search(problem, theta, J, grad, direction)
        if found is None:
            # no representable decrease left: the iterate is optimal to
            # machine precision even if the gradient is slightly above tol
            newton_decrement = float(-grad @ direction)
            if newton_decrement <= 1e-14 * (1.0 + abs(J)):
                log.append({"iter": it, "objective": J, "grad_norm": gnorm, "step": 0.0})
                return BatchSolution(problem.registry, theta, J, gnorm, H, it, log)
            raise NoConvergenceError(f"line search failed at iteration {it}, grad_norm={gnorm:.3e}", log)
        step, theta, J = found
        log.append({"iter": it, "objective": J, "grad_norm": gnorm, "step": step})
    raise NoConvergenceError(
        f"no convergence after {max_iter} iterations, grad_norm={gnorm:.3e}, objective={J:.12g}", log
    )
