import pytest

from polygame.instances import k4_conflict_pair, triangle_game, triangle_profiles


@pytest.fixture(scope="session")
def k4_pair():
    return k4_conflict_pair()


@pytest.fixture(scope="session")
def triangle():
    game = triangle_game()
    direct, indirect = triangle_profiles(game)
    return game, direct, indirect
