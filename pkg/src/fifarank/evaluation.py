"""Prediction metrics over declared game windows.

Windows are 1-based inclusive ``(first, last)`` positions in the match
sequence; ``None`` means every game.  Probability arrays have shape (T, 3)
with columns in (H, D, A) order, and outcomes use the codes 0=H, 1=D, 2=A.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .online import ReplayResult


class EmptyWindowError(ValueError):
    pass


def window_second_half(T: int) -> tuple[int, int]:
    """Games ``floor(T/2)+1 .. T``."""
    if T < 2:
        raise ValueError("need T >= 2")
    return T // 2 + 1, T


def _slice(T: int, window) -> slice:
    if window is None:
        first, last = 1, T
    else:
        first, last = window
    if not (1 <= first <= last <= T):
        raise EmptyWindowError(f"empty or invalid window {window!r} for T={T}")
    return slice(first - 1, last)


def mse(score, expected, window=None) -> float:
    """Mean of ``(score - expected)**2`` over the window."""
    score = np.asarray(score, dtype=float)
    sl = _slice(len(score), window)
    r = score[sl] - np.asarray(expected, dtype=float)[sl]
    return float(np.mean(r * r))


def _log_probs(probs, log: bool) -> np.ndarray:
    probs = np.asarray(probs, dtype=float)
    if log:
        return probs
    with np.errstate(divide="ignore"):
        return np.log(probs)


def log_score(probs, outcome, window=None, log: bool = False) -> float:
    """Mean of ``-log p(observed)``; ``inf`` if an observed outcome had p = 0.

    Pass ``log=True`` when ``probs`` already holds log-probabilities.
    """
    lp = _log_probs(probs, log)
    outcome = np.asarray(outcome)
    sl = _slice(len(outcome), window)
    realized = lp[sl][np.arange(sl.stop - sl.start), outcome[sl]]
    return float(-np.mean(realized))


def zero_probability_games(probs, outcome, window=None, log: bool = False) -> list[int]:
    """1-based positions where the observed outcome was given probability 0."""
    lp = _log_probs(probs, log)
    outcome = np.asarray(outcome)
    sl = _slice(len(outcome), window)
    realized = lp[sl][np.arange(sl.stop - sl.start), outcome[sl]]
    return [int(k) + sl.start + 1 for k in np.flatnonzero(np.isneginf(realized))]


def accuracy(probs, outcome, window=None) -> float:
    """Fraction of games whose observed outcome has the largest probability.

    Exact ties resolve in the order H, D, A.
    """
    probs = np.asarray(probs, dtype=float)
    outcome = np.asarray(outcome)
    sl = _slice(len(outcome), window)
    return float(np.mean(np.argmax(probs[sl], axis=1) == outcome[sl]))


def count_ties(probs, window=None) -> int:
    probs = np.asarray(probs, dtype=float)
    sl = _slice(len(probs), window)
    p = probs[sl]
    return int(np.count_nonzero((p == p.max(axis=1, keepdims=True)).sum(axis=1) > 1))


@dataclass
class EvaluationReport:
    window: tuple[int, int]
    games_counted: int
    mse: float | None = None
    log_score: float | None = None
    accuracy: float | None = None
    ties: int = 0
    zero_probability_games: list[int] = field(default_factory=list)
    shootout_substituted_games: int = 0
    params_echo: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    CSV_FIELDS = ("window_first", "window_last", "games_counted", "mse", "log_score", "accuracy", "ties")

    def csv_row(self) -> str:
        buf = io.StringIO()
        csv.writer(buf, lineterminator="\n").writerow(
            [self.window[0], self.window[1], self.games_counted, self.mse, self.log_score, self.accuracy, self.ties]
        )
        return buf.getvalue()


def evaluate_replay(result: ReplayResult, window=None) -> EvaluationReport:
    """All three metrics for a replay; default window is the second half."""
    T = result.T
    if window is None:
        window = window_second_half(T)
    sl = _slice(T, window)
    affected = 0
    if result.engine.name == "fifa":
        affected = int(np.count_nonzero(result.score[sl] != np.choose(result.outcome[sl], (1.0, 0.5, 0.0))))
    return EvaluationReport(
        window=tuple(window),
        games_counted=sl.stop - sl.start,
        mse=mse(result.score, result.expected_score, window),
        log_score=log_score(result.log_probs, result.outcome, window, log=True),
        accuracy=accuracy(result.log_probs, result.outcome, window),
        ties=count_ties(result.log_probs, window),
        zero_probability_games=zero_probability_games(result.log_probs, result.outcome, window, log=True),
        shootout_substituted_games=affected,
        params_echo=result.engine.describe(),
    )
