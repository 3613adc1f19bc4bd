"""Seeded synthetic match data drawn from the Davidson or Skellam model.

Used to exercise the whole pipeline when the real match file is not at hand.
Categories follow the 2018-2021 category mix; games in categories 3, 6 and 8
are knockout games, and drawn knockout games go to a shootout.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from datetime import date, timedelta

import numpy as np

from . import models
from .match_data import MatchRecord, Shootout, TeamRegistry

# games per category observed June 2018 - October 2021
CATEGORY_MIX = np.array([436, 583, 347, 84, 1189, 209, 52, 56, 8], dtype=float)
KNOCKOUT_CATEGORIES = (3, 6, 8)
START_DATE = date(2018, 6, 4)


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 1
    M: int = 8
    T: int = 200
    model: str = "davidson"
    kappa: float = 0.8
    eta: float = 0.3
    c: float = 0.0
    scale: float = 200.0
    skill_sd: float = 1.0
    home_venue_prob: float = 0.7
    games_per_day: int = 3

    def to_dict(self) -> dict:
        return asdict(self)


def team_names(M: int) -> list[str]:
    width = max(2, len(str(M)))
    return [f"T{k:0{width}d}" for k in range(1, M + 1)]


def generate(cfg: SynthConfig) -> tuple[TeamRegistry, list[MatchRecord], dict[str, float]]:
    """Returns the registry, the games and the ground-truth skills (rating units)."""
    if cfg.M < 2:
        raise ValueError("need at least two teams")
    if cfg.model not in ("davidson", "skellam"):
        raise ValueError(f"unknown model {cfg.model!r}")
    rng = np.random.default_rng(cfg.seed)
    names = team_names(cfg.M)
    registry = TeamRegistry.from_names(names)
    truth = rng.normal(0.0, cfg.skill_sd, cfg.M) * cfg.scale
    cat_p = CATEGORY_MIX / CATEGORY_MIX.sum()

    records = []
    for t in range(cfg.T):
        i, j = rng.choice(cfg.M, size=2, replace=False)
        b = int(rng.random() < cfg.home_venue_prob)
        category = int(rng.choice(9, p=cat_p))
        z = (truth[i] - truth[j]) / cfg.scale
        if cfg.model == "davidson":
            probs = models.davidson_probs(z, b, models.DavidsonParams(cfg.eta, cfg.kappa, cfg.scale))
            outcome = int(rng.choice(3, p=probs / probs.sum()))
            if outcome == 1:
                hg = ag = int(rng.poisson(1.1))
            else:
                loser = int(rng.poisson(0.7))
                winner = loser + 1 + int(rng.poisson(0.8))
                hg, ag = (winner, loser) if outcome == 0 else (loser, winner)
        else:
            x = z + cfg.eta * b
            hg = int(rng.poisson(np.exp(cfg.c + x)))
            ag = int(rng.poisson(np.exp(cfg.c - x)))
        knockout = category in KNOCKOUT_CATEGORIES
        shootout = Shootout.NONE
        if knockout and hg == ag:
            shootout = Shootout.HOME if rng.random() < 0.5 else Shootout.AWAY
        records.append(
            MatchRecord(
                match_index=t + 1,
                date=START_DATE + timedelta(days=t // cfg.games_per_day),
                home_id=names[i],
                away_id=names[j],
                home_goals=min(hg, 99),
                away_goals=min(ag, 99),
                category=category,
                neutral_venue=not b,
                shootout_winner=shootout,
                knockout_stage=knockout,
                two_legged_tie=False,
            )
        )
    return registry, records, dict(zip(names, truth.tolist()))
