import numpy as np
import pytest

from ghext import klein
from ghext.abelian import FiniteAbelianGroup
from ghext.asolve import SolveConfig, solve_A
from ghext.category import CategoryData
from ghext.cli import z2n_epsilon


def _solved(G, eps, restarts=50, seed=42) -> CategoryData:
    sols = solve_A(G, eps, None, SolveConfig(restarts=restarts, seed=seed))
    assert sols, f"no A found for {G}"
    return CategoryData(G, eps, a_tensor=sols[0][0])


@pytest.fixture(scope="session")
def z2_category() -> CategoryData:
    G = FiniteAbelianGroup([2])
    return _solved(G, z2n_epsilon(G))


@pytest.fixture(scope="session")
def z4_category() -> CategoryData:
    G = FiniteAbelianGroup([4])
    return _solved(G, z2n_epsilon(G))


@pytest.fixture(scope="session")
def klein_category() -> CategoryData:
    return _solved(klein.G, klein.epsilon_table())


@pytest.fixture(scope="session")
def solved_categories(z2_category, z4_category, klein_category) -> dict[str, CategoryData]:
    return {"Z2": z2_category, "Z4": z4_category, "Z2xZ2": klein_category}


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240611)
