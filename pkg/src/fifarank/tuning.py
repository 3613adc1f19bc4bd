"""Hyperparameter search, one coordinate at a time, plus frequency estimates.

Each coordinate is scanned over its grid, the best grid point is refined once
at half the grid step on either side, and the move is kept only if it lowers
the objective.  Sweeps repeat until a full sweep gains less than
``convergence_tol``.
"""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import params as P
from .alo import AloSingularityError, alo_arrays, loo_log_probs
from .batch import DegenerateProblemError, NoConvergenceError, solve
from .evaluation import log_score, mse, window_second_half
from .match_data import MatchRecord, TeamRegistry, to_arrays
from .models import IntensityOverflowError
from .online import RatingState, replay

DEFAULT_GRIDS = {
    "K": (1.0, 100.0, 1.0),
    "alpha": (0.05, 5.0, 0.05),
    "eta": (0.0, 1.0, 0.05),
    "kappa": (0.1, 3.0, 0.05),
    "c": (-1.0, 1.0, 0.05),
    "xi": (0.1, 10.0, 0.1),
    "zeta": (0.1, 10.0, 0.1),
}

# failures that mean "this parameter value is unusable", not a bug
_INFEASIBLE = (
    IntensityOverflowError,
    NoConvergenceError,
    AloSingularityError,
    DegenerateProblemError,
    FloatingPointError,
)


class TuningError(ValueError):
    pass


@dataclass(frozen=True)
class ParamSpec:
    """A fixed value, or a free coordinate with a start point and a grid."""

    name: str
    value: float
    lower: float | None = None
    upper: float | None = None
    step: float | None = None

    def __post_init__(self):
        P.check_name(self.name)
        if not self.free:
            if any(x is not None for x in (self.lower, self.upper, self.step)):
                raise ValueError(f"{self.name}: give all of lower, upper, step or none")
            return
        if self.name in P.PINNED:
            raise ValueError(f"{self.name} is pinned to 1 and cannot be tuned")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper) and self.lower <= self.upper):
            raise ValueError(f"{self.name}: bounds must be finite with lower <= upper")
        if not self.step > 0:
            raise ValueError(f"{self.name}: grid step must be > 0")

    @property
    def free(self) -> bool:
        return self.step is not None

    @classmethod
    def fixed(cls, name: str, value: float) -> ParamSpec:
        return cls(name, float(value))

    @classmethod
    def default_free(cls, name: str, start: float) -> ParamSpec:
        key = name.split("_")[0] if name.startswith(("xi_", "zeta_")) else name
        if key not in DEFAULT_GRIDS:
            raise ValueError(f"no default grid for {name}")
        lo, hi, step = DEFAULT_GRIDS[key]
        return cls(name, float(min(max(start, lo), hi)), lo, hi, step)

    def grid(self) -> np.ndarray:
        n = math.floor((self.upper - self.lower) / self.step + 1e-9)
        return np.round(self.lower + self.step * np.arange(n + 1), 12)


@dataclass
class TuneResult:
    best: dict[str, float]
    objective: float
    initial_objective: float
    trace: list[tuple[int, str, float, float]] = field(default_factory=list)
    sweeps: int = 0
    evaluations: int = 0

    def to_dict(self) -> dict:
        return {
            "best": self.best,
            "objective": self.objective,
            "initial_objective": self.initial_objective,
            "sweeps": self.sweeps,
            "evaluations": self.evaluations,
            "trace": [list(row) for row in self.trace],
        }


def coordinate_search(
    objective: Callable[[dict], float],
    specs: Sequence[ParamSpec],
    convergence_tol: float = 1e-5,
    max_sweeps: int = 50,
) -> TuneResult:
    names = [s.name for s in specs]
    if len(set(names)) != len(names):
        raise ValueError("duplicate parameter specs")
    current = {s.name: float(s.value) for s in specs}
    evaluations = 0

    def evaluate(point: dict) -> float:
        nonlocal evaluations
        evaluations += 1
        return float(objective(point))

    J = evaluate(current)
    if not math.isfinite(J):
        raise TuningError("objective is not finite at the initial point")
    J0 = J
    free = [s for s in specs if s.free]
    trace: list[tuple[int, str, float, float]] = []
    sweeps = 0
    while free and sweeps < max_sweeps:
        sweeps += 1
        J_start = J
        for spec in free:
            grid = spec.grid()
            values = np.array([evaluate({**current, spec.name: float(v)}) for v in grid])
            finite = np.isfinite(values)
            if not finite.any():
                raise TuningError(f"objective non-finite at every grid point of {spec.name}")
            k = int(np.argmin(np.where(finite, values, np.inf)))
            best_v, best_J = float(grid[k]), float(values[k])
            for v in (round(best_v - spec.step / 2, 12), round(best_v + spec.step / 2, 12)):
                if spec.lower <= v <= spec.upper:
                    Jv = evaluate({**current, spec.name: v})
                    if Jv < best_J:
                        best_v, best_J = v, Jv
            if best_J < J:
                current[spec.name] = best_v
                J = best_J
                trace.append((sweeps, spec.name, best_v, J))
        if J_start - J < convergence_tol:
            break
    return TuneResult(dict(current), J, J0, trace, sweeps, evaluations)


def empirical_eta_kappa(frequencies: Sequence[float]) -> tuple[float, float]:
    """``eta = log10(fH/fA)``, ``kappa = fD / sqrt(fH fA)`` from (fH, fD, fA)."""
    f_h, f_d, f_a = (float(f) for f in frequencies)
    if min(f_h, f_d, f_a) <= 0:
        raise ValueError("all outcome frequencies must be > 0")
    return math.log10(f_h / f_a), f_d / math.sqrt(f_h * f_a)


# -- objectives -------------------------------------------------------------

def online_objective(
    model: str,
    matches: Sequence[MatchRecord],
    initial: RatingState,
    metric: str | None = None,
    window=None,
    backend: str | None = None,
) -> Callable[[dict], float]:
    """Replay-and-score objective; MSE for the FIFA replica, log-score otherwise."""
    metric = metric or ("mse" if model == "fifa" else "log_score")
    if metric not in ("mse", "log_score"):
        raise ValueError(f"unknown metric {metric!r}")
    arrays = to_arrays(initial.registry, matches)
    if window is None:
        window = window_second_half(len(matches))

    def objective(point: dict) -> float:
        try:
            res = replay(matches, initial, P.engine_from_params(model, point), backend=backend, arrays=arrays)
        except _INFEASIBLE:
            return math.inf
        if metric == "mse":
            return mse(res.score, res.expected_score, window)
        return log_score(res.log_probs, res.outcome, window, log=True)

    return objective


def alo_objective(model: str, registry: TeamRegistry, matches: Sequence[MatchRecord]) -> Callable[[dict], float]:
    """Mean ALO log-score of a batch fit over all games."""
    arrays = to_arrays(registry, matches)
    index = np.array([m.match_index for m in matches], dtype=np.int64)

    def objective(point: dict) -> float:
        try:
            problem = P.problem_from_params(model, point, registry, arrays, match_index=index)
            sol = solve(problem)
            alo = alo_arrays(sol, problem)
        except _INFEASIBLE:
            return math.inf
        return log_score(loo_log_probs(problem, alo.z_loo), arrays.outcome, log=True)

    return objective


# -- config and trace files -------------------------------------------------

def specs_from_config(config: dict, defaults: dict) -> list[ParamSpec]:
    """Config maps a name to a number (fixed), ``"free"`` (default grid),
    ``[lower, upper, step]`` or ``[lower, upper, step, start]``.

    Parameters absent from the config stay fixed at ``defaults``.
    """
    out = {name: ParamSpec.fixed(name, v) for name, v in defaults.items()}
    for name, raw in config.items():
        start = defaults.get(name, 1.0)
        if isinstance(raw, (int, float)) and not isinstance(raw, bool):
            out[name] = ParamSpec.fixed(name, raw)
        elif raw == "free":
            out[name] = ParamSpec.default_free(name, start)
        elif isinstance(raw, list) and len(raw) in (3, 4):
            lo, hi, step = (float(x) for x in raw[:3])
            s0 = float(raw[3]) if len(raw) == 4 else min(max(float(start), lo), hi)
            out[name] = ParamSpec(name, s0, lo, hi, step)
        else:
            raise ValueError(f"bad tuning config entry for {name}: {raw!r}")
    return [out[k] for k in sorted(out)]


def load_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise ValueError("tuning config must be a JSON object")
    return cfg


TRACE_FIELDS = ("sweep", "param", "value", "objective")


def write_trace_csv(fh, result: TuneResult) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(TRACE_FIELDS)
    for sweep, name, value, obj in result.trace:
        writer.writerow([sweep, name, repr(value), repr(obj)])
