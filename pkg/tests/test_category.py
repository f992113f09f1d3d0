import math

import numpy as np
import pytest

from ghext import ah4, klein
from ghext.abelian import FiniteAbelianGroup, enumerate_two_torsion
from ghext.category import (
    AXIOMS,
    CategoryData,
    EpsilonTable,
    EtaTable,
    InconsistentCocycle,
    MissingEntry,
    ParseError,
    ShapeMismatch,
    category_from_json,
    category_to_json,
    dimension,
    epsilon_from_bicharacter,
    epsilon_from_generator,
    load_category,
    save_category,
    verify_axioms,
)
from ghext.cli import z2n_epsilon

GOLDEN = (1 + math.sqrt(5)) / 2


@pytest.mark.parametrize("n", [1, 2, 3, 4, 8])
def test_dimension_solves_quadratic(n):
    d = dimension(n)
    assert d > 0
    assert abs(d * d - 1 - n * d) < 1e-12
    assert abs(dimension(FiniteAbelianGroup([n])) - d) < 1e-15


def test_trivial_group_dimension_is_golden_ratio():
    assert abs(dimension(1) - GOLDEN) < 1e-15


def test_epsilon_table_validation():
    G = FiniteAbelianGroup([2])
    with pytest.raises(ShapeMismatch):
        EpsilonTable(G, np.ones((3, 3)))
    with pytest.raises(ValueError):
        EpsilonTable(G, np.array([[1, 1], [1, 0]]))


def test_klein_table_is_the_displayed_matrix():
    displayed = [[1, 1, 1, 1], [1, -1, -1, 1], [1, 1, -1, -1], [1, -1, 1, -1]]
    eps = klein.epsilon_table()
    assert eps.values.tolist() == displayed
    assert eps.cocycle_violations() == 0


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_cyclic_normalization_restricts_to_alternating_sign(n):
    G = FiniteAbelianGroup([2 * n])
    eps = z2n_epsilon(G)
    assert eps.cocycle_violations() == 0
    for m in range(2 * n):
        assert eps((n,), (m,)) == (-1) ** m
    assert eps.is_bicharacter_on_two_torsion()


def test_generator_rejects_inconsistent_seed():
    G = FiniteAbelianGroup([4])
    with pytest.raises(InconsistentCocycle):
        epsilon_from_generator(G, [1, -1, -1, -1])


def test_bicharacter_extension_agrees_with_generator():
    G = FiniteAbelianGroup([4])
    eps = z2n_epsilon(G)
    g2 = enumerate_two_torsion(G)
    table = {(k, g): eps(k, g) for k in g2 for g in G.elements}
    built = epsilon_from_bicharacter(G, table, extra=[([((1,), (3,))], -1)])
    assert built == eps


def test_bicharacter_extension_detects_contradiction():
    G = FiniteAbelianGroup([2])
    with pytest.raises(InconsistentCocycle):
        epsilon_from_bicharacter(G, {((1,), (0,)): -1})


def test_ah4_table_has_a_trivially_acting_element():
    eps = ah4.build_epsilon()
    assert eps.cocycle_violations() == 0
    assert eps.trivially_acting() == [(0, 1)]
    assert CategoryData(ah4.G, eps).degenerate_elements == [(0, 1)]


def test_eta_table():
    G = FiniteAbelianGroup([3])
    eta = EtaTable(G, [0, 1, 2])
    assert not eta.is_trivial()
    assert np.allclose(eta.complex_values ** 3, 1)
    assert EtaTable.trivial(G).periodicity_violations() == 0
    with pytest.raises(ShapeMismatch):
        EtaTable(G, [0, 1])


def test_trivial_group_closed_form_passes_every_axiom():
    G = FiniteAbelianGroup([1])
    A = np.array([[[-1 / GOLDEN]]], dtype=complex)
    report = verify_axioms(CategoryData(G, EpsilonTable.trivial(G), a_tensor=A), tol=1e-12)
    assert report.passed, report.summary()
    assert set(report.residuals) == set(AXIOMS)


def test_wrong_tensor_is_rejected():
    G = FiniteAbelianGroup([1])
    A = np.array([[[1 / GOLDEN]]], dtype=complex)
    report = verify_axioms(CategoryData(G, EpsilonTable.trivial(G), a_tensor=A))
    assert not report.passed
    assert "row_sum" in report.failing()


def test_solved_tensors_pass(solved_categories):
    for name, c in solved_categories.items():
        report = verify_axioms(c, tol=1e-9)
        assert report.passed, (name, report.summary())
        assert report.derived["orthogonality_norm"] < 1e-9


def test_missing_tensor_raises():
    G = FiniteAbelianGroup([2])
    with pytest.raises(MissingEntry):
        verify_axioms(CategoryData(G, z2n_epsilon(G)))


def test_category_json_roundtrip(tmp_path, klein_category):
    path = tmp_path / "cat.json"
    save_category(klein_category, path)
    back = load_category(path)
    assert back.group == klein_category.group
    assert back.eps == klein_category.eps
    assert back.eta == klein_category.eta
    assert np.array_equal(back.a_tensor, klein_category.a_tensor)
    assert category_to_json(back) == category_to_json(klein_category)


def test_category_json_errors():
    with pytest.raises(ParseError):
        category_from_json({"epsilon": [[1]]})
    obj = category_to_json(CategoryData(FiniteAbelianGroup([2]), z2n_epsilon(FiniteAbelianGroup([2]))))
    obj["d"] = 3.0
    with pytest.raises(ParseError):
        category_from_json(obj)
    obj["d"] = None
    obj["A"] = [[[0.0, 0.0]]]
    with pytest.raises(ShapeMismatch):
        category_from_json(obj)
