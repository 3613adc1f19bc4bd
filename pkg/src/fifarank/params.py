"""Flat ``name -> value`` parameter sets and their translation into engines.

Names: ``K``, ``alpha``, ``eta``, ``kappa``, ``c``, ``s`` (scale), ``D``
(Skellam truncation), ``V`` (MOV cap), ``xi_0`` .. ``xi_8`` and
``zeta_0`` .. ``zeta_V``.  ``xi_0`` and ``zeta_0`` are pinned to 1.
"""

from __future__ import annotations

import re

from .batch import BatchProblem
from .match_data import MatchArrays, TeamRegistry
from .models import DavidsonParams, SkellamParams
from .online import (
    FIFA_XI,
    DavidsonEngine,
    FifaEngine,
    ImportanceTable,
    SkellamEngine,
    WeightScheme,
)

MODELS = ("fifa", "davidson", "skellam")

ONLINE_DEFAULTS = {
    "fifa": {"K": 5.0, "s": 600.0, **{f"xi_{c}": FIFA_XI[c] for c in range(1, 9)}},
    "davidson": {"K": 35.0, "eta": 0.3, "kappa": 0.9, "s": 200.0, "V": 1},
    "skellam": {"K": 7.5, "eta": 0.2, "c": -0.1, "s": 300.0, "D": 50},
}
BATCH_DEFAULTS = {
    "davidson": {"alpha": 0.4, "eta": 0.3, "kappa": 0.8, "s": 200.0, "V": 1},
    "skellam": {"alpha": 0.21, "eta": 0.2, "c": 0.0, "s": 300.0, "D": 50},
}

_NAME = re.compile(r"^(K|alpha|eta|kappa|c|s|D|V|xi_[0-8]|zeta_\d+)$")
PINNED = ("xi_0", "zeta_0")


class ParamError(ValueError):
    pass


def check_name(name: str) -> None:
    if not _NAME.match(name):
        raise ParamError(f"unknown parameter {name!r}")


def parse_assignments(items) -> dict[str, float]:
    """``["K=35", "eta=0.3"]`` -> ``{"K": 35.0, "eta": 0.3}``."""
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep:
            raise ParamError(f"expected key=value, got {item!r}")
        check_name(key)
        try:
            out[key] = float(value)
        except ValueError:
            raise ParamError(f"parameter {key} needs a number, got {value!r}") from None
    for name in PINNED:
        if name in out and out[name] != 1.0:
            raise ParamError(f"{name} is pinned to 1")
    return out


def resolve(model: str, overrides: dict, batch: bool = False) -> dict:
    if model not in MODELS:
        raise ParamError(f"unknown model {model!r}")
    if batch and model == "fifa":
        raise ParamError("the FIFA replica has no batch form; use davidson or skellam")
    base = dict((BATCH_DEFAULTS if batch else ONLINE_DEFAULTS)[model])
    base.update(overrides)
    for name in base:
        check_name(name)
    return base


def weight_scheme(params: dict) -> WeightScheme:
    V = int(params.get("V", 1))
    zeta_names = [k for k in params if k.startswith("zeta_")]
    if zeta_names:
        V = max(V, max(int(k[5:]) for k in zeta_names))
    xi = tuple([1.0] + [float(params.get(f"xi_{c}", 1.0)) for c in range(1, 9)])
    zeta = tuple([1.0] + [float(params.get(f"zeta_{v}", 1.0)) for v in range(1, V + 1)])
    return WeightScheme(xi=xi, zeta=zeta)


def engine_from_params(model: str, params: dict):
    p = resolve(model, params)
    if model == "fifa":
        xi = tuple([1.0] + [float(p[f"xi_{c}"]) for c in range(1, 9)])
        return FifaEngine(table=ImportanceTable(K=float(p["K"]), xi=xi), scale=float(p["s"]))
    if model == "davidson":
        return DavidsonEngine(
            K=float(p["K"]),
            params=DavidsonParams(eta=float(p["eta"]), kappa=float(p["kappa"]), scale=float(p["s"])),
            weights=weight_scheme(p),
        )
    return SkellamEngine(
        K=float(p["K"]),
        params=SkellamParams(c=float(p["c"]), eta=float(p["eta"]), scale=float(p["s"]), truncation_D=int(p["D"])),
    )


def model_params(model: str, p: dict):
    if model == "davidson":
        return DavidsonParams(eta=float(p["eta"]), kappa=float(p["kappa"]), scale=float(p["s"]))
    return SkellamParams(c=float(p["c"]), eta=float(p["eta"]), scale=float(p["s"]), truncation_D=int(p["D"]))


def problem_from_params(
    model: str,
    params: dict,
    registry: TeamRegistry,
    arrays: MatchArrays,
    match_index=None,
) -> BatchProblem:
    p = resolve(model, params, batch=True)
    return BatchProblem(
        registry,
        arrays,
        model_params(model, p),
        weight_scheme(p),
        float(p["alpha"]),
        match_index=match_index,
    )
