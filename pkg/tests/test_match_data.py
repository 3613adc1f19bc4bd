import io

import pytest
from conftest import csv_text, game
from hypothesis import given
from hypothesis import strategies as st

from fifarank.match_data import (
    MatchDataError,
    Outcome,
    Shootout,
    TeamRegistry,
    mov_category,
    mov_histogram,
    outcome_frequencies,
    outcome_of,
    parse_matches,
    read_ratings,
    serialize_matches,
    subjective_score,
    to_arrays,
)

ROW = "2020-01-01,BEL,FRA,2,1,4,1,none,0,0"


def test_parse_valid_file():
    reg, recs = parse_matches(csv_text(ROW, "2019-12-31,FRA,ITA,0,0,2,0,none,0,0"))
    assert reg.names == ["BEL", "FRA", "ITA"]
    assert [r.match_index for r in recs] == [1, 2]
    # sorted by date
    assert recs[0].home_id == "FRA"
    assert recs[1].venue_b == 1 and recs[0].venue_b == 0


def test_same_day_games_keep_file_order():
    rows = [f"2020-01-01,A{k},B{k},1,0,0,0,none,0,0" for k in range(5)]
    _, recs = parse_matches(csv_text(*rows))
    assert [r.home_id for r in recs] == [f"A{k}" for k in range(5)]


def test_header_only_gives_empty_sequence():
    reg, recs = parse_matches(csv_text())
    assert recs == [] and len(reg) == 0


@pytest.mark.parametrize(
    "row, needle",
    [
        ("2020-01-01,BEL,FRA,2,1,9,1,none,0,0", "category"),
        ("2020-01-01,BEL,FRA,-1,1,4,1,none,0,0", "negative"),
        ("2020-01-01,BEL,FRA,100,1,4,1,none,0,0", "exceed"),
        ("2020-01-01,BEL,BEL,1,1,4,1,none,0,0", "itself"),
        ("2020-01-01,BEL,FRA,2,1,4,1,home,1,0", "non-drawn"),
        ("2020-13-01,BEL,FRA,2,1,4,1,none,0,0", "date"),
        ("2020-01-01,BEL,FRA,2,1,4,2,none,0,0", "home_venue"),
        ("2020-01-01,BEL,FRA,2,1,4,1,maybe,0,0", "shootout_winner"),
        ("2020-01-01,BEL,FRA,2,1", "fields"),
    ],
)
def test_bad_row_reports_row_number(row, needle):
    with pytest.raises(MatchDataError) as exc:
        parse_matches(csv_text(ROW, row))
    assert exc.value.row == 2
    assert str(exc.value).startswith("row 2:")
    assert needle in str(exc.value)


def test_wrong_header():
    with pytest.raises(MatchDataError):
        parse_matches("date,home,away\n")


def test_whitespace_variant_names_rejected():
    with pytest.raises(MatchDataError, match="whitespace"):
        parse_matches(csv_text("2020-01-01,Costa Rica,FRA,1,0,0,0,none,0,0", "2020-01-02,CostaRica,FRA,1,0,0,0,none,0,0"))


def test_registry_is_bijective():
    reg = TeamRegistry.from_names(["a", "b", "c"])
    assert [reg.index(n) for n in reg.names] == [0, 1, 2]
    assert reg.add("b") == 1
    with pytest.raises(KeyError):
        reg.index("z")


def test_outcome_and_scores():
    g = game(1, "A", "B", 1, 1, shootout=Shootout.AWAY, knockout=True)
    assert outcome_of(g) is Outcome.D
    assert subjective_score(g, "home") == 0.5
    assert subjective_score(g, "away") == 0.75
    assert subjective_score(g, "away", shootout_rule=False) == 0.5
    two = game(1, "A", "B", 1, 1, shootout=Shootout.HOME, two_legged=True)
    assert subjective_score(two, "home") == 0.5
    with pytest.raises(ValueError):
        subjective_score(g, "left")


goals = st.integers(0, 99)


@given(goals, goals, st.booleans())
def test_mirror_flips_outcome_and_difference(hg, ag, neutral):
    g = game(1, "A", "B", hg, ag, neutral=neutral)
    m = g.mirrored()
    assert m.goal_diff == -g.goal_diff
    assert outcome_of(m).numeric_score == 1.0 - outcome_of(g).numeric_score
    assert subjective_score(g, "home") + subjective_score(g, "away") == 1.0


@given(st.lists(st.tuples(goals, goals, st.integers(0, 8), st.booleans()), min_size=1, max_size=30))
def test_serialize_parse_round_trip(rows):
    recs = [game(t + 1, "A", "B" if t % 2 else "C", hg, ag, cat, neutral) for t, (hg, ag, cat, neutral) in enumerate(rows)]
    _, back = parse_matches(serialize_matches(recs))
    assert back == recs


def test_frequencies():
    recs = [game(1, "A", "B", 2, 0, neutral=False), game(2, "A", "B", 1, 1), game(3, "A", "B", 0, 3), game(4, "B", "A", 0, 0)]
    f = outcome_frequencies(recs)
    assert f == (0.25, 0.5, 0.25)
    assert outcome_frequencies(recs, "home_venue_only") == (1.0, 0.0, 0.0)
    assert outcome_frequencies(recs, "neutral_only") == pytest.approx((0, 2 / 3, 1 / 3))
    with pytest.raises(ValueError):
        outcome_frequencies(recs, "moon")
    with pytest.raises(MatchDataError):
        outcome_frequencies([], "all")


def test_mov_helpers():
    assert [mov_category(d, 2) for d in (0, 1, -1, 5, -7)] == [0, 1, 1, 2, 2]
    with pytest.raises(ValueError):
        mov_category(1, 0)
    recs = [game(k + 1, "A", "B", k, 0) for k in range(9)]
    assert mov_histogram(recs) == [1, 1, 1, 1, 1, 1, 3]


def test_arrays_columns():
    recs = [
        game(1, "A", "B", 2, 0, category=3, neutral=False),
        game(2, "B", "A", 1, 1, shootout=Shootout.AWAY, knockout=True),
    ]
    reg = TeamRegistry.from_names(["A", "B"])
    arr = to_arrays(reg, recs)
    assert arr.home.tolist() == [0, 1] and arr.away.tolist() == [1, 0]
    assert arr.outcome.tolist() == [0, 1]
    assert arr.score.tolist() == [1.0, 0.5]
    assert arr.shootout.tolist() == [0, 2]
    assert arr.venue_b.tolist() == [1.0, 0.0]
    assert arr.knockout.tolist() == [False, True]


def test_read_ratings():
    assert read_ratings(io.StringIO("team,rating\nA,1500\nB,1400.5\n")) == {"A": 1500.0, "B": 1400.5}
    with pytest.raises(MatchDataError, match="duplicate"):
        read_ratings(io.StringIO("team,rating\nA,1\nA,2\n"))
    with pytest.raises(MatchDataError, match="row 1"):
        read_ratings(io.StringIO("team,rating\nA,abc\n"))
    with pytest.raises(MatchDataError):
        read_ratings(io.StringIO("name,value\n"))
