from datetime import date, timedelta

import pytest

from fifarank.match_data import MATCH_COLUMNS, MatchRecord, Shootout, TeamRegistry

HEADER = ",".join(MATCH_COLUMNS)


def csv_text(*rows: str) -> str:
    return "\n".join((HEADER,) + rows) + "\n"


def game(
    t,
    home,
    away,
    hg,
    ag,
    category=0,
    neutral=True,
    shootout=Shootout.NONE,
    knockout=False,
    two_legged=False,
    day=None,
):
    return MatchRecord(
        match_index=t,
        date=day or date(2020, 1, 1) + timedelta(days=t),
        home_id=home,
        away_id=away,
        home_goals=hg,
        away_goals=ag,
        category=category,
        neutral_venue=neutral,
        shootout_winner=shootout,
        knockout_stage=knockout,
        two_legged_tie=two_legged,
    )


def registry_of(matches):
    reg = TeamRegistry()
    for m in matches:
        reg.add(m.home_id)
        reg.add(m.away_id)
    return reg


@pytest.fixture
def tmp_csv(tmp_path):
    def write(text, name="matches.csv"):
        path = tmp_path / name
        path.write_text(text)
        return path

    return write


# -- acceptance summary: one line per criterion -----------------------------

_CRITERIA: list[tuple[str, str, float]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "SKIP" if rep.skipped else ("PASS" if rep.passed else "FAIL")
        _CRITERIA.append((marker.args[0], status, rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, status, duration in _CRITERIA:
        terminalreporter.write_line(f"{status:4s}  {name}  ({duration:.2f} s)")
