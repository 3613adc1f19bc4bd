"""Online and batch rating algorithms for international football results."""

__version__ = "0.1.0"

from .alo import alo_arrays, alo_scores, exact_loo
from .batch import BatchProblem, solve
from .evaluation import evaluate_replay
from .kernels import BACKEND
from .match_data import (
    MatchDataError,
    MatchRecord,
    TeamRegistry,
    parse_matches,
    read_matches,
    read_ratings,
)
from .models import DavidsonParams, SkellamParams
from .online import (
    DavidsonEngine,
    FifaEngine,
    RatingState,
    SkellamEngine,
    replay,
    scale_selection,
)
from .tuning import ParamSpec, coordinate_search, empirical_eta_kappa

__all__ = [
    "BACKEND",
    "BatchProblem",
    "DavidsonEngine",
    "DavidsonParams",
    "FifaEngine",
    "MatchDataError",
    "MatchRecord",
    "ParamSpec",
    "RatingState",
    "SkellamEngine",
    "SkellamParams",
    "TeamRegistry",
    "alo_arrays",
    "alo_scores",
    "coordinate_search",
    "empirical_eta_kappa",
    "evaluate_replay",
    "exact_loo",
    "parse_matches",
    "read_matches",
    "read_ratings",
    "replay",
    "scale_selection",
    "solve",
]
