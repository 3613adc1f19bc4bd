"""Sequential (game-by-game) rating: the FIFA replica and SG engines.

Single-game updates (``fifa_update``, ``sg_update_davidson``,
``sg_update_skellam``) are written for clarity.  ``replay`` runs whole
sequences through the kernels in :mod:`fifarank.kernels` and is what the
evaluation and tuning code uses.
"""

from __future__ import annotations

import json
from collections.abc import Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels, models
from .match_data import (
    MatchArrays,
    MatchRecord,
    TeamRegistry,
    mov_category,
    outcome_of,
    subjective_score,
    to_arrays,
)
from .models import DavidsonParams, SkellamParams

FIFA_K = 5.0
FIFA_XI = (1.0, 2.0, 3.0, 5.0, 5.0, 7.0, 8.0, 10.0, 12.0)
FIFA_SCALE = 600.0


class UnknownTeamError(KeyError):
    pass


@dataclass(frozen=True)
class ImportanceTable:
    """Update steps ``I_c = K * xi_c`` for the nine game categories."""

    K: float = FIFA_K
    xi: tuple[float, ...] = FIFA_XI

    def __post_init__(self):
        if len(self.xi) != 9:
            raise ValueError("need nine category weights")
        if self.K <= 0 or any(x <= 0 for x in self.xi):
            raise ValueError("importance entries must be positive")

    @property
    def steps(self) -> np.ndarray:
        return self.K * np.asarray(self.xi, dtype=float)


@dataclass(frozen=True)
class WeightScheme:
    """Category weights ``xi_0..xi_8`` and MOV weights ``zeta_0..zeta_V``."""

    xi: tuple[float, ...] = (1.0,) * 9
    zeta: tuple[float, ...] = (1.0, 1.0)

    def __post_init__(self):
        if len(self.xi) != 9:
            raise ValueError("need nine category weights")
        if len(self.zeta) < 2:
            raise ValueError("need zeta_0..zeta_V with V >= 1")
        if self.xi[0] != 1.0 or self.zeta[0] != 1.0:
            raise ValueError("xi_0 and zeta_0 are pinned to 1")
        if any(w < 0 for w in self.xi + self.zeta):
            raise ValueError("weights must be non-negative")

    @property
    def V(self) -> int:
        return len(self.zeta) - 1

    @classmethod
    def uniform(cls, V: int = 1) -> WeightScheme:
        return cls(zeta=(1.0,) * (V + 1))

    def weight(self, match: MatchRecord) -> float:
        return self.xi[match.category] * self.zeta[mov_category(match.goal_diff, self.V)]

    def game_weights(self, arrays: MatchArrays) -> np.ndarray:
        v = np.minimum(np.abs(arrays.goal_diff), self.V)
        return np.asarray(self.xi)[arrays.category] * np.asarray(self.zeta)[v]


@dataclass
class RatingState:
    registry: TeamRegistry
    theta: np.ndarray
    as_of: int = 0

    @classmethod
    def from_ratings(
        cls,
        registry: TeamRegistry,
        ratings: Mapping[str, float],
        seed_newcomers: bool = False,
    ) -> RatingState:
        """Initial state over ``registry``.

        Teams missing from ``ratings`` are an error unless ``seed_newcomers``
        is set, in which case they start at the mean of the given ratings.
        """
        missing = [n for n in registry.names if n not in ratings]
        if missing and not seed_newcomers:
            raise UnknownTeamError(
                f"{len(missing)} team(s) without an initial rating, e.g. {missing[0]!r}"
            )
        fill = float(np.mean(list(ratings.values()))) if ratings else 0.0
        theta = np.array([ratings.get(n, fill) for n in registry.names], dtype=float)
        return cls(registry, theta)

    @classmethod
    def constant(cls, registry: TeamRegistry, value: float = 0.0) -> RatingState:
        return cls(registry, np.full(len(registry), float(value)))

    @property
    def skills(self) -> dict[str, float]:
        return dict(zip(self.registry.names, self.theta.tolist()))

    @property
    def total_points(self) -> float:
        return float(self.theta.sum())

    def copy(self) -> RatingState:
        return RatingState(self.registry, self.theta.copy(), self.as_of)

    def _pair(self, match: MatchRecord) -> tuple[int, int]:
        try:
            return self.registry.index(match.home_id), self.registry.index(match.away_id)
        except KeyError as exc:
            raise UnknownTeamError(str(exc)) from None


def skill_stddev(state: RatingState | np.ndarray) -> float:
    theta = state.theta if isinstance(state, RatingState) else np.asarray(state, dtype=float)
    return float(np.sqrt(np.mean((theta - theta.mean()) ** 2)))


# --------------------------------------------------------------------------
# Single-game updates


def fifa_update(
    state: RatingState,
    match: MatchRecord,
    table: ImportanceTable = ImportanceTable(),
    scale: float = FIFA_SCALE,
    shootout_rule: bool = True,
    knockout_rule: bool = True,
) -> tuple[RatingState, tuple[float, float]]:
    """One FIFA update; returns the new state and (home, away) rating changes.

    The shootout score substitution is applied first, then the knockout
    clamp, each team separately.
    """
    i, j = state._pair(match)
    z = state.theta[i] - state.theta[j]
    f = models.fifa_expected_score(z / scale)
    delta_h = subjective_score(match, "home", shootout_rule) - f
    delta_a = subjective_score(match, "away", shootout_rule) - (1.0 - f)
    if knockout_rule and match.knockout_stage:
        delta_h, delta_a = max(0.0, delta_h), max(0.0, delta_a)
    step = table.steps[match.category]
    new = state.copy()
    new.theta[i] += step * delta_h
    new.theta[j] += step * delta_a
    new.as_of = match.match_index
    return new, (step * delta_h, step * delta_a)


def sg_update_davidson(
    state: RatingState,
    match: MatchRecord,
    K: float,
    weights: WeightScheme,
    p: DavidsonParams,
) -> RatingState:
    # shootouts count as regulation draws here
    i, j = state._pair(match)
    z = (state.theta[i] - state.theta[j]) / p.scale
    y = outcome_of(match).numeric_score
    delta = K * weights.weight(match) * (y - models.davidson_expected_score(z, match.venue_b, p))
    new = state.copy()
    new.theta[i] += delta
    new.theta[j] -= delta
    new.as_of = match.match_index
    return new


def sg_update_skellam(
    state: RatingState, match: MatchRecord, K: float, p: SkellamParams
) -> RatingState:
    i, j = state._pair(match)
    z = (state.theta[i] - state.theta[j]) / p.scale
    delta = K * (match.goal_diff - models.skellam_expected_diff(z, match.venue_b, p))
    new = state.copy()
    new.theta[i] += delta
    new.theta[j] -= delta
    new.as_of = match.match_index
    return new


# --------------------------------------------------------------------------
# Engines used by replay


@dataclass(frozen=True)
class FifaEngine:
    """FIFA-2018 replica.

    ``wrapper`` is the Davidson model used only to turn the replica's
    expected score into outcome probabilities for log-score and accuracy.
    With kappa=2, eta=0 and half the FIFA scale its expected score equals
    the FIFA logistic exactly.
    """

    table: ImportanceTable = ImportanceTable()
    scale: float = FIFA_SCALE
    shootout_rule: bool = True
    knockout_rule: bool = True
    wrapper_kappa: float = 2.0
    wrapper_eta: float = 0.0

    name = "fifa"

    @property
    def wrapper(self) -> DavidsonParams:
        return DavidsonParams(eta=self.wrapper_eta, kappa=self.wrapper_kappa, scale=self.scale / 2)

    def scaled(self, gamma: float) -> FifaEngine:
        return replace(self, table=replace(self.table, K=self.table.K * gamma), scale=self.scale * gamma)

    def with_scale(self, scale: float) -> FifaEngine:
        return replace(self, scale=scale)

    def describe(self) -> dict:
        return {
            "engine": self.name,
            "K": self.table.K,
            "xi": list(self.table.xi),
            "scale": self.scale,
            "shootout_rule": self.shootout_rule,
            "knockout_rule": self.knockout_rule,
            "log_score_wrapper": {"kappa": self.wrapper_kappa, "eta": self.wrapper_eta, "scale": self.scale / 2},
        }


@dataclass(frozen=True)
class DavidsonEngine:
    K: float = 35.0
    params: DavidsonParams = DavidsonParams(eta=0.3, kappa=0.9, scale=200.0)
    weights: WeightScheme = WeightScheme()

    name = "davidson"

    @property
    def scale(self) -> float:
        return self.params.scale

    def scaled(self, gamma: float) -> DavidsonEngine:
        return replace(self, K=self.K * gamma, params=replace(self.params, scale=self.params.scale * gamma))

    def with_scale(self, scale: float) -> DavidsonEngine:
        return replace(self, params=replace(self.params, scale=scale))

    def describe(self) -> dict:
        return {
            "engine": self.name,
            "K": self.K,
            "eta": self.params.eta,
            "kappa": self.params.kappa,
            "scale": self.params.scale,
            "xi": list(self.weights.xi),
            "zeta": list(self.weights.zeta),
        }


@dataclass(frozen=True)
class SkellamEngine:
    K: float = 7.5
    params: SkellamParams = SkellamParams(c=-0.1, eta=0.2, scale=300.0)

    name = "skellam"

    @property
    def scale(self) -> float:
        return self.params.scale

    def scaled(self, gamma: float) -> SkellamEngine:
        return replace(self, K=self.K * gamma, params=replace(self.params, scale=self.params.scale * gamma))

    def with_scale(self, scale: float) -> SkellamEngine:
        return replace(self, params=replace(self.params, scale=scale))

    def describe(self) -> dict:
        return {
            "engine": self.name,
            "K": self.K,
            "c": self.params.c,
            "eta": self.params.eta,
            "scale": self.params.scale,
            "truncation_D": self.params.truncation_D,
        }


Engine = FifaEngine | DavidsonEngine | SkellamEngine


@dataclass
class ReplayResult:
    """Per-game predictions made before each update, plus the final state.

    ``probs`` holds (H, D, A) probabilities; ``score`` the realized home
    score actually fed to the engine (shootout substitution included for
    the FIFA replica).
    """

    registry: TeamRegistry
    engine: Engine
    initial: np.ndarray
    final: np.ndarray
    match_index: np.ndarray
    home: np.ndarray
    away: np.ndarray
    z: np.ndarray
    expected_score: np.ndarray
    log_probs: np.ndarray
    outcome: np.ndarray
    score: np.ndarray
    delta_home: np.ndarray
    delta_away: np.ndarray
    rule_affected: int = 0

    @property
    def T(self) -> int:
        return len(self.z)

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)

    @property
    def inflation(self) -> float:
        return float(self.final.sum() - self.initial.sum())

    @property
    def final_state(self) -> RatingState:
        last = int(self.match_index[-1]) if self.T else 0
        return RatingState(self.registry, self.final.copy(), last)

    def state_after(self, t: int) -> RatingState:
        """State after the first ``t`` games (``t = 0`` is the initial state)."""
        theta = self.initial.copy()
        np.add.at(theta, self.home[:t], self.delta_home[:t])
        np.add.at(theta, self.away[:t], self.delta_away[:t])
        return RatingState(self.registry, theta, int(self.match_index[t - 1]) if t else 0)

    def trajectory(self) -> Iterator[RatingState]:
        """Yields the initial state and the state after each game."""
        theta = self.initial.copy()
        yield RatingState(self.registry, theta.copy(), 0)
        for t in range(self.T):
            theta[self.home[t]] += self.delta_home[t]
            theta[self.away[t]] += self.delta_away[t]
            yield RatingState(self.registry, theta.copy(), int(self.match_index[t]))

    def trajectory_records(self) -> Iterator[dict]:
        theta = self.initial.copy()
        names = self.registry.names
        for t in range(self.T):
            for team, d in ((self.home[t], self.delta_home[t]), (self.away[t], self.delta_away[t])):
                before = theta[team]
                theta[team] = before + d
                yield {
                    "match_index": int(self.match_index[t]),
                    "team": names[team],
                    "before": float(before),
                    "after": float(theta[team]),
                }

    def write_trajectory(self, fh) -> None:
        for rec in self.trajectory_records():
            fh.write(json.dumps(rec) + "\n")


def _fifa_scores(arrays: MatchArrays, shootout_rule: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    y_home = arrays.score.copy()
    y_away = 1.0 - y_home
    applies = (arrays.shootout > 0) & ~arrays.two_legged if shootout_rule else np.zeros(len(arrays), bool)
    y_home[applies] = np.where(arrays.shootout[applies] == 1, 0.75, 0.5)
    y_away[applies] = np.where(arrays.shootout[applies] == 2, 0.75, 0.5)
    return y_home, y_away, applies


def replay(
    matches: Sequence[MatchRecord],
    initial: RatingState,
    engine: Engine,
    shootout_rule: bool | None = None,
    knockout_rule: bool | None = None,
    backend: str | None = None,
    arrays: MatchArrays | None = None,
) -> ReplayResult:
    """Run ``engine`` over ``matches`` in order, recording pre-game predictions.

    The rule toggles override the FIFA engine's own settings; they do not
    affect the likelihood-based engines.
    """
    registry = initial.registry
    for m in matches:
        if m.home_id not in registry or m.away_id not in registry:
            raise UnknownTeamError(f"game {m.match_index}: team without a rating")
    if arrays is None:
        arrays = to_arrays(registry, matches)
    theta = initial.theta.astype(float).copy()
    outcome = arrays.outcome
    rule_affected = 0

    if isinstance(engine, FifaEngine):
        if shootout_rule is not None or knockout_rule is not None:
            engine = replace(
                engine,
                shootout_rule=engine.shootout_rule if shootout_rule is None else shootout_rule,
                knockout_rule=engine.knockout_rule if knockout_rule is None else knockout_rule,
            )
        y_home, y_away, shootout_applied = _fifa_scores(arrays, engine.shootout_rule)
        knock = arrays.knockout if engine.knockout_rule else np.zeros(len(arrays), bool)
        step = engine.table.steps[arrays.category]
        z, dh, da = kernels.fifa_replay(theta, arrays.home, arrays.away, y_home, y_away, step, knock, engine.scale, backend)
        expected = models.fifa_expected_score(z / engine.scale)
        log_probs = models.outcome_log_probs(engine.wrapper, z / engine.wrapper.scale, arrays.venue_b)
        score = y_home
        # a knockout game counts as affected only when the clamp actually bit
        clamped = knock & ((y_home - expected < 0) | (y_away - (1 - expected) < 0))
        rule_affected = int(np.count_nonzero(shootout_applied | clamped))
    elif isinstance(engine, DavidsonEngine):
        w = engine.weights.game_weights(arrays)
        p = engine.params
        z, dh = kernels.davidson_replay(theta, arrays.home, arrays.away, arrays.venue_b, arrays.score, w, engine.K, p.eta, p.kappa, p.scale, backend)
        da = -dh
        expected = models.davidson_expected_score(z / p.scale, arrays.venue_b, p)
        log_probs = models.outcome_log_probs(p, z / p.scale, arrays.venue_b)
        score = arrays.score
    elif isinstance(engine, SkellamEngine):
        p = engine.params
        w = np.ones(len(arrays))
        z, dh, bad = kernels.skellam_replay(theta, arrays.home, arrays.away, arrays.venue_b, arrays.goal_diff, w, engine.K, p.c, p.eta, p.scale, backend)
        if bad >= 0:
            raise models.IntensityOverflowError(f"intensity overflow at game {matches[bad].match_index}")
        da = -dh
        log_probs = models.outcome_log_probs(p, z / p.scale, arrays.venue_b)
        pr = np.exp(log_probs)
        expected = pr[:, 0] + 0.5 * pr[:, 1]
        score = arrays.score
    else:
        raise TypeError(f"unknown engine {engine!r}")

    return ReplayResult(
        registry=registry,
        engine=engine,
        initial=initial.theta.astype(float).copy(),
        final=theta,
        match_index=np.array([m.match_index for m in matches], dtype=np.int64),
        home=np.asarray(arrays.home),
        away=np.asarray(arrays.away),
        z=np.asarray(z),
        expected_score=np.atleast_1d(expected),
        log_probs=log_probs.reshape(len(z), 3),
        outcome=np.asarray(outcome),
        score=np.asarray(score),
        delta_home=np.asarray(dh),
        delta_away=np.asarray(da),
        rule_affected=rule_affected,
    )


@dataclass
class ScaleSelection:
    chosen: float
    sigma_0: float
    table: list[tuple[float, float]] = field(default_factory=list)


def scale_selection(
    matches: Sequence[MatchRecord],
    initial: RatingState,
    engine: Engine,
    candidates: Sequence[float],
    backend: str | None = None,
) -> ScaleSelection:
    """Pick the scale whose final skill spread best matches the initial one.

    Ties go to the smallest scale.
    """
    if not candidates:
        raise ValueError("no candidate scales")
    sigma_0 = skill_stddev(initial)
    arrays = to_arrays(initial.registry, matches)
    table = []
    for s in sorted(float(c) for c in candidates):
        res = replay(matches, initial, engine.with_scale(s), backend=backend, arrays=arrays)
        table.append((s, skill_stddev(res.final)))
    best = min(table, key=lambda row: abs(row[1] - sigma_0))
    return ScaleSelection(chosen=best[0], sigma_0=sigma_0, table=table)
