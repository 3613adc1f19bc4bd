"""Match-result ingestion: parsing, validation and derived per-game quantities.

The CSV schema is::

    date,home,away,home_goals,away_goals,category,home_venue,shootout_winner,knockout,two_legged

``home_venue`` is 1 when the game is played in the home team's country and 0
on a neutral ground.  All rule flags are explicit; nothing is inferred from
tournament names.
"""

from __future__ import annotations

import csv
import io
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from typing import TextIO

import numpy as np

MATCH_COLUMNS = (
    "date",
    "home",
    "away",
    "home_goals",
    "away_goals",
    "category",
    "home_venue",
    "shootout_winner",
    "knockout",
    "two_legged",
)
N_CATEGORIES = 9
MAX_GOALS = 99
# |d| buckets reported by mov_histogram: 0..5 and ">=6"
HISTOGRAM_BUCKETS = 7


class MatchDataError(ValueError):
    """Raised for malformed or inconsistent match data."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class Outcome(Enum):
    H = "H"
    D = "D"
    A = "A"

    @property
    def numeric_score(self) -> float:
        return _SCORES[self]

    @property
    def code(self) -> int:
        """Column index used in (H, D, A) probability arrays."""
        return _CODES[self]


_SCORES = {Outcome.H: 1.0, Outcome.D: 0.5, Outcome.A: 0.0}
_CODES = {Outcome.H: 0, Outcome.D: 1, Outcome.A: 2}
OUTCOME_ORDER = (Outcome.H, Outcome.D, Outcome.A)


class Shootout(Enum):
    NONE = "none"
    HOME = "home"
    AWAY = "away"


@dataclass(frozen=True)
class MatchRecord:
    match_index: int
    date: date
    home_id: str
    away_id: str
    home_goals: int
    away_goals: int
    category: int
    neutral_venue: bool
    shootout_winner: Shootout = Shootout.NONE
    knockout_stage: bool = False
    two_legged_tie: bool = False

    @property
    def venue_b(self) -> int:
        """Venue indicator: 1 when played in the home team's country."""
        return 0 if self.neutral_venue else 1

    @property
    def goal_diff(self) -> int:
        return self.home_goals - self.away_goals

    def mirrored(self) -> MatchRecord:
        """The same game seen from the other side (teams and goals swapped)."""
        winner = {
            Shootout.NONE: Shootout.NONE,
            Shootout.HOME: Shootout.AWAY,
            Shootout.AWAY: Shootout.HOME,
        }[self.shootout_winner]
        return MatchRecord(
            match_index=self.match_index,
            date=self.date,
            home_id=self.away_id,
            away_id=self.home_id,
            home_goals=self.away_goals,
            away_goals=self.home_goals,
            category=self.category,
            neutral_venue=self.neutral_venue,
            shootout_winner=winner,
            knockout_stage=self.knockout_stage,
            two_legged_tie=self.two_legged_tie,
        )


@dataclass
class TeamRegistry:
    """Bijection between team names and contiguous integer indices."""

    names: list[str] = field(default_factory=list)
    _index: dict[str, int] = field(default_factory=dict, repr=False)
    _squashed: dict[str, str] = field(default_factory=dict, repr=False)

    @classmethod
    def from_names(cls, names: Iterable[str]) -> TeamRegistry:
        reg = cls()
        for name in names:
            reg.add(name)
        return reg

    def add(self, name: str) -> int:
        if name in self._index:
            return self._index[name]
        key = "".join(name.split())
        if not key:
            raise MatchDataError("empty team name")
        other = self._squashed.get(key)
        if other is not None:
            raise MatchDataError(
                f"team names {other!r} and {name!r} differ only by whitespace"
            )
        self._squashed[key] = name
        self._index[name] = len(self.names)
        self.names.append(name)
        return self._index[name]

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise KeyError(f"unknown team {name!r}") from None

    def __contains__(self, name: object) -> bool:
        return name in self._index

    def __len__(self) -> int:
        return len(self.names)

    @property
    def M(self) -> int:
        return len(self.names)


@dataclass
class MatchArrays:
    """Column view of a match sequence, as consumed by the numeric kernels."""

    home: np.ndarray  # int64 team indices
    away: np.ndarray
    venue_b: np.ndarray  # float64, 0 or 1
    outcome: np.ndarray  # int64 code: 0=H, 1=D, 2=A
    score: np.ndarray  # float64 home numeric score, no shootout substitution
    goal_diff: np.ndarray  # int64
    category: np.ndarray  # int64
    knockout: np.ndarray  # bool
    shootout: np.ndarray  # int64: 0 none, 1 home, 2 away
    two_legged: np.ndarray  # bool

    def __len__(self) -> int:
        return len(self.home)


def _parse_bool(value: str, column: str, row: int) -> bool:
    value = value.strip()
    if value in ("0", "1"):
        return value == "1"
    raise MatchDataError(f"{column} must be 0 or 1, got {value!r}", row)


def _parse_int(value: str, column: str, row: int) -> int:
    try:
        return int(value.strip())
    except ValueError:
        raise MatchDataError(f"{column} is not an integer: {value!r}", row) from None


def _parse_row(fields: dict[str, str], row: int) -> dict:
    try:
        when = date.fromisoformat(fields["date"].strip())
    except ValueError:
        raise MatchDataError(f"bad date {fields['date']!r}", row) from None
    home, away = fields["home"], fields["away"]
    if home.strip() == away.strip():
        raise MatchDataError(f"team {home!r} plays itself", row)
    hg = _parse_int(fields["home_goals"], "home_goals", row)
    ag = _parse_int(fields["away_goals"], "away_goals", row)
    if hg < 0 or ag < 0:
        raise MatchDataError("negative goals", row)
    if hg > MAX_GOALS or ag > MAX_GOALS:
        raise MatchDataError(f"goals exceed {MAX_GOALS} (column swap?)", row)
    category = _parse_int(fields["category"], "category", row)
    if not 0 <= category < N_CATEGORIES:
        raise MatchDataError(f"category out of range: {category}", row)
    home_venue = _parse_bool(fields["home_venue"], "home_venue", row)
    try:
        shootout = Shootout(fields["shootout_winner"].strip())
    except ValueError:
        raise MatchDataError(
            f"shootout_winner must be none/home/away, got {fields['shootout_winner']!r}",
            row,
        ) from None
    if shootout is not Shootout.NONE and hg != ag:
        raise MatchDataError("shootout flag on a non-drawn game", row)
    return dict(
        date=when,
        home_id=home,
        away_id=away,
        home_goals=hg,
        away_goals=ag,
        category=category,
        neutral_venue=not home_venue,
        shootout_winner=shootout,
        knockout_stage=_parse_bool(fields["knockout"], "knockout", row),
        two_legged_tie=_parse_bool(fields["two_legged"], "two_legged", row),
    )


def parse_matches(source: TextIO | str) -> tuple[TeamRegistry, list[MatchRecord]]:
    """Parse a match CSV into a registry and chronologically ordered records.

    Rows are sorted by date; ties keep file order.  Row numbers in errors are
    1-based data rows (the header is row 0).
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    reader = csv.reader(source)
    try:
        header = next(reader)
    except StopIteration:
        raise MatchDataError("missing header") from None
    header = [h.strip() for h in header]
    if tuple(header) != MATCH_COLUMNS:
        raise MatchDataError(f"header must be {','.join(MATCH_COLUMNS)}", 0)

    parsed = []
    registry = TeamRegistry()
    for row_no, values in enumerate(reader, start=1):
        if not values or all(not v.strip() for v in values):
            continue
        if len(values) != len(MATCH_COLUMNS):
            raise MatchDataError(
                f"expected {len(MATCH_COLUMNS)} fields, got {len(values)}", row_no
            )
        fields = _parse_row(dict(zip(MATCH_COLUMNS, values)), row_no)
        try:
            registry.add(fields["home_id"])
            registry.add(fields["away_id"])
        except MatchDataError as exc:
            raise MatchDataError(str(exc), row_no) from None
        parsed.append(fields)

    # stable sort: date ties broken by file order
    parsed.sort(key=lambda r: r["date"])
    records = []
    for t, fields in enumerate(parsed, start=1):
        records.append(MatchRecord(match_index=t, **fields))
    return registry, records


def read_matches(path) -> tuple[TeamRegistry, list[MatchRecord]]:
    with open(path, newline="", encoding="utf-8") as fh:
        return parse_matches(fh)


def serialize_matches(records: Sequence[MatchRecord], out: TextIO | None = None) -> str:
    """Write records in the canonical CSV schema; returns the text."""
    buf = io.StringIO() if out is None else out
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(MATCH_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.date.isoformat(),
                r.home_id,
                r.away_id,
                r.home_goals,
                r.away_goals,
                r.category,
                0 if r.neutral_venue else 1,
                r.shootout_winner.value,
                int(r.knockout_stage),
                int(r.two_legged_tie),
            ]
        )
    return buf.getvalue() if out is None else ""


def read_ratings(path_or_stream) -> dict[str, float]:
    """Read an initial-ratings CSV with header ``team,rating``."""
    if isinstance(path_or_stream, (str, bytes)) or hasattr(path_or_stream, "__fspath__"):
        with open(path_or_stream, newline="", encoding="utf-8") as fh:
            return read_ratings(fh)
    reader = csv.DictReader(path_or_stream)
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["team", "rating"]:
        raise MatchDataError("ratings header must be team,rating")
    ratings = {}
    for row_no, row in enumerate(reader, start=1):
        team = row["team"]
        if team in ratings:
            raise MatchDataError(f"duplicate team {team!r}", row_no)
        try:
            ratings[team] = float(row["rating"])
        except (TypeError, ValueError):
            raise MatchDataError(f"bad rating {row['rating']!r}", row_no) from None
    return ratings


def outcome_of(match: MatchRecord) -> Outcome:
    if match.home_goals > match.away_goals:
        return Outcome.H
    if match.home_goals == match.away_goals:
        return Outcome.D
    return Outcome.A


def subjective_score(match: MatchRecord, side: str, shootout_rule: bool = True) -> float:
    """Per-team score used by the FIFA update, with the shootout substitution."""
    if side not in ("home", "away"):
        raise ValueError(f"side must be 'home' or 'away', got {side!r}")
    if (
        shootout_rule
        and match.shootout_winner is not Shootout.NONE
        and not match.two_legged_tie
    ):
        return 0.75 if match.shootout_winner.value == side else 0.5
    y = outcome_of(match).numeric_score
    return y if side == "home" else 1.0 - y


def mov_category(goal_diff: int, V: int) -> int:
    if V < 1:
        raise ValueError("V must be >= 1")
    return min(abs(goal_diff), V)


def outcome_frequencies(
    matches: Sequence[MatchRecord], venue_filter: str = "all"
) -> tuple[float, float, float]:
    """Empirical (f_H, f_D, f_A) over the games passing ``venue_filter``."""
    if venue_filter == "all":
        chosen = matches
    elif venue_filter == "neutral_only":
        chosen = [m for m in matches if m.neutral_venue]
    elif venue_filter == "home_venue_only":
        chosen = [m for m in matches if not m.neutral_venue]
    else:
        raise ValueError(f"unknown venue filter {venue_filter!r}")
    if not chosen:
        raise MatchDataError(f"no games for venue filter {venue_filter!r}")
    counts = {o: 0 for o in OUTCOME_ORDER}
    for m in chosen:
        counts[outcome_of(m)] += 1
    n = len(chosen)
    return counts[Outcome.H] / n, counts[Outcome.D] / n, counts[Outcome.A] / n


def mov_histogram(matches: Sequence[MatchRecord]) -> list[int]:
    """Counts of |d| = 0, 1, ..., 5 and |d| >= 6."""
    counts = [0] * HISTOGRAM_BUCKETS
    for m in matches:
        counts[min(abs(m.goal_diff), HISTOGRAM_BUCKETS - 1)] += 1
    return counts


def to_arrays(registry: TeamRegistry, matches: Sequence[MatchRecord]) -> MatchArrays:
    n = len(matches)
    shootout_code = {Shootout.NONE: 0, Shootout.HOME: 1, Shootout.AWAY: 2}
    arr = MatchArrays(
        home=np.empty(n, dtype=np.int64),
        away=np.empty(n, dtype=np.int64),
        venue_b=np.empty(n, dtype=np.float64),
        outcome=np.empty(n, dtype=np.int64),
        score=np.empty(n, dtype=np.float64),
        goal_diff=np.empty(n, dtype=np.int64),
        category=np.empty(n, dtype=np.int64),
        knockout=np.empty(n, dtype=bool),
        shootout=np.empty(n, dtype=np.int64),
        two_legged=np.empty(n, dtype=bool),
    )
    for k, m in enumerate(matches):
        o = outcome_of(m)
        arr.home[k] = registry.index(m.home_id)
        arr.away[k] = registry.index(m.away_id)
        arr.venue_b[k] = m.venue_b
        arr.outcome[k] = o.code
        arr.score[k] = o.numeric_score
        arr.goal_diff[k] = m.goal_diff
        arr.category[k] = m.category
        arr.knockout[k] = m.knockout_stage
        arr.shootout[k] = shootout_code[m.shootout_winner]
        arr.two_legged[k] = m.two_legged_tie
    return arr
