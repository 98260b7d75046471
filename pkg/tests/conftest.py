import pytest

from qgames.chsh_game import DEFAULT_ENTS, DEFAULT_GRID, build_win_table


@pytest.fixture(scope="session")
def grid():
    return DEFAULT_GRID


@pytest.fixture(scope="session")
def ents():
    return DEFAULT_ENTS


@pytest.fixture(scope="session")
def table_floored():
    return build_win_table(DEFAULT_GRID, DEFAULT_ENTS, 0.1)


@pytest.fixture(scope="session")
def table_exact():
    return build_win_table(DEFAULT_GRID, DEFAULT_ENTS, 0.0)
