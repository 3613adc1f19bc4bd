import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fifarank.evaluation import (
    EmptyWindowError,
    EvaluationReport,
    accuracy,
    count_ties,
    evaluate_replay,
    log_score,
    mse,
    window_second_half,
    zero_probability_games,
)
from fifarank.online import DavidsonEngine, FifaEngine, RatingState, replay
from fifarank.synth import SynthConfig, generate


def test_second_half_window():
    assert window_second_half(10) == (6, 10)
    assert window_second_half(11) == (6, 11)
    with pytest.raises(ValueError):
        window_second_half(1)


def test_metrics_by_hand():
    probs = np.array([[0.5, 0.3, 0.2], [0.2, 0.2, 0.6], [0.4, 0.4, 0.2], [1.0, 0.0, 0.0]])
    outcome = np.array([0, 1, 1, 0])
    assert log_score(probs, outcome) == pytest.approx(-(np.log(0.5) + np.log(0.2) + np.log(0.4) + 0) / 4)
    assert log_score(probs, outcome, window=(2, 2)) == pytest.approx(-np.log(0.2))
    # ties resolve H before D: game 3 is predicted H
    assert accuracy(probs, outcome) == 0.5
    assert count_ties(probs) == 1
    assert mse([1, 0.5, 0], [0.5, 0.5, 0.5]) == pytest.approx(1 / 6)
    assert mse([1, 0.5, 0], [0.5, 0.5, 0.5], window=(3, 3)) == 0.25


def test_zero_probability_outcome_gives_infinite_score():
    probs = np.array([[0.5, 0.0, 0.5], [0.5, 0.3, 0.2]])
    outcome = np.array([1, 0])
    assert log_score(probs, outcome) == np.inf
    assert zero_probability_games(probs, outcome) == [1]


@pytest.mark.parametrize("window", [(0, 3), (3, 2), (1, 9)])
def test_bad_windows(window):
    with pytest.raises(EmptyWindowError):
        mse([1, 0, 1], [0.5] * 3, window)


@given(st.lists(st.floats(0.01, 1.0), min_size=3, max_size=3), st.integers(0, 2))
def test_log_score_accepts_log_input(p, y):
    probs = np.array([p]) / np.sum(p)
    assert log_score(np.log(probs), [y], log=True) == pytest.approx(log_score(probs, [y]))


def test_evaluate_replay_report():
    reg, recs, truth = generate(SynthConfig(seed=2, M=6, T=50))
    init = RatingState.from_ratings(reg, truth)
    res = replay(recs, init, FifaEngine())
    rep = evaluate_replay(res)
    assert rep.window == (26, 50) and rep.games_counted == 25
    assert 0 < rep.mse < 1 and rep.params_echo["engine"] == "fifa"
    assert json.loads(rep.to_json())["window"] == [26, 50]
    assert rep.csv_row().startswith("26,50,25,")
    full = evaluate_replay(replay(recs, init, DavidsonEngine()), window=(1, 50))
    assert full.games_counted == 50 and full.shootout_substituted_games == 0
    assert isinstance(EvaluationReport.CSV_FIELDS, tuple)
