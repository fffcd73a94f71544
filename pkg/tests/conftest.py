import numpy as np
import pytest

from barrier_la import GameSpec, Model, PayoffMatrix, preset


@pytest.fixture
def case1() -> GameSpec:
    return preset("case1")


@pytest.fixture
def case2() -> GameSpec:
    return preset("case2")


@pytest.fixture
def case3() -> GameSpec:
    return preset("case3")


@pytest.fixture
def coordination() -> GameSpec:
    m = PayoffMatrix(1.0, 0.0, 0.0, 1.0)
    return GameSpec(Model.P, m, m)


def random_game(rng: np.random.Generator) -> GameSpec:
    r = rng.random(4)
    c = rng.random(4)
    return GameSpec(Model.P, PayoffMatrix(*r), PayoffMatrix(*c))
