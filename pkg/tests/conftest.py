from importlib.resources import files

import pytest

from tanglelearn.game import parse_pgsolver


def fixture_path(name: str) -> str:
    return str(files("tanglelearn") / "fixtures" / name)


def fixture_text(name: str) -> str:
    return (files("tanglelearn") / "fixtures" / name).read_text(encoding="utf-8")


@pytest.fixture
def fig1():
    return parse_pgsolver(fixture_text("fig1.pg"))


@pytest.fixture
def fig4():
    return parse_pgsolver(fixture_text("fig4.pg"))


def names(game, vertices) -> set[str]:
    return {game.name(v) for v in vertices}


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(results[number])
