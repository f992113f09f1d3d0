import logging
import random

import pytest
from hypothesis import given, settings, strategies as st

from ghext import klein
from ghext.abelian import FiniteAbelianGroup, RootOfUnity, enumerate_characters, root_order
from ghext.category import CategoryData
from ghext.cli import z2n_epsilon
from ghext.equiv import (
    EquivalenceMove,
    MixedParams,
    NotACharacter,
    act,
    all_moves,
    characters_trivial_on,
    classify,
    compute_tau,
    coreq_count,
)
from ghext.extdata import ExtensionData, ExtensionParams, all_params, check_extension_data, search_extension_data

logging.getLogger("ghext.extdata").setLevel(logging.ERROR)

Z4 = FiniteAbelianGroup([4])
GROUPS = {
    "Z2xZ2": CategoryData(klein.G, klein.epsilon_table()),
    "Z4": CategoryData(Z4, z2n_epsilon(Z4)),
}


@st.composite
def data_sets(draw, c: CategoryData):
    """Arbitrary (not necessarily valid) data over ``c.group``."""
    G = c.group
    N = root_order(G)
    chars = enumerate_characters(G)
    params = draw(st.sampled_from(all_params(G)))
    root = st.integers(0, N - 1).map(lambda k: RootOfUnity.from_exponent(k, N))
    return ExtensionData(
        params,
        draw(st.sampled_from(chars)),
        draw(st.sampled_from(chars)),
        draw(root),
        draw(root),
        tuple(draw(root) for _ in G.elements),
    )


@pytest.mark.parametrize("name", GROUPS)
def test_identity_move_fixes_every_solution(name):
    c = GROUPS[name]
    e = EquivalenceMove.identity(c.group)
    for params in all_params(c.group):
        for d in search_extension_data(c, params):
            assert act(e, d, c.eps) == d


@pytest.mark.parametrize("name", GROUPS)
def test_composition_law_exhaustive(name):
    c = GROUPS[name]
    moves = all_moves(c.group)
    for params in all_params(c.group):
        for d in search_extension_data(c, params):
            for m1 in moves:
                once = act(m1, d, c.eps)
                for m2 in moves:
                    assert act(m1 * m2, d, c.eps) == act(m2, once, c.eps)


@pytest.mark.parametrize("name", GROUPS)
def test_validity_is_preserved_exhaustive(name):
    c = GROUPS[name]
    moves = all_moves(c.group)
    for params in all_params(c.group):
        for d in search_extension_data(c, params):
            for m in moves:
                assert check_extension_data(c, act(m, d, c.eps)).passed


def test_validity_is_preserved_with_tensor(solved_categories):
    for c in solved_categories.values():
        for params in all_params(c.group):
            for d in search_extension_data(c, params):
                for m in all_moves(c.group):
                    assert check_extension_data(c, act(m, d, c.eps)).passed


@settings(max_examples=200, deadline=None)
@given(st.data())
def test_action_laws_on_arbitrary_data(data):
    c = GROUPS[data.draw(st.sampled_from(sorted(GROUPS)))]
    d = data.draw(data_sets(c))
    moves = all_moves(c.group)
    m1 = data.draw(st.sampled_from(moves))
    m2 = data.draw(st.sampled_from(moves))
    assert act(EquivalenceMove.identity(c.group), d, c.eps) == d
    assert act(m1 * m2, d, c.eps) == act(m2, act(m1, d, c.eps), c.eps)
    # acting preserves validity and invalidity alike
    before = check_extension_data(c, d).exact_passed
    assert check_extension_data(c, act(m1, d, c.eps)).exact_passed == before


def test_move_requires_two_torsion():
    with pytest.raises(ValueError):
        EquivalenceMove(enumerate_characters(Z4)[0], (1,))


def test_classification_ignores_input_order():
    c = GROUPS["Z4"]
    sols = search_extension_data(c, ExtensionParams(Z4, (1,), (0,)))
    shuffled = list(sols)
    random.Random(3).shuffle(shuffled)
    a, b = classify(sols, c.eps), classify(shuffled, c.eps)
    assert [o.representative for o in a] == [o.representative for o in b]
    assert sum(len(o) for o in a) == len(sols)
    N = root_order(Z4)
    for o in a:
        assert all(o.representative.encode(N) <= m.encode(N) for m in o.members)


def test_classify_rejects_mixed_params():
    c = GROUPS["Z4"]
    x = search_extension_data(c, ExtensionParams(Z4, (1,), (0,)))[0]
    y = search_extension_data(c, ExtensionParams(Z4, (1,), (2,)))[0]
    with pytest.raises(MixedParams):
        classify([x, y], c.eps)
    assert classify([], c.eps) == []


@pytest.mark.parametrize("m", [2, 4])
def test_cyclic_class_counts_match_tau_count(m, solved_categories):
    c = solved_categories[f"Z{m}"]
    for params in all_params(c.group):
        sols = search_extension_data(c, params)
        orbits = classify(sols, c.eps)
        assert len(orbits) == 2
        assert {coreq_count(d, c.eps) for d in sols} == {2}


def test_klein_class_counts_match_tau_count(klein_category):
    c = klein_category
    for params in all_params(c.group):
        sols = search_extension_data(c, params)
        orbits = classify(sols, c.eps)
        expected = 2 if params.z == (0, 0) else 1
        assert len(orbits) == expected, params
        assert {coreq_count(d, c.eps) for d in sols} == {expected}


def test_tau_is_trivial_on_klein_solutions(klein_category):
    for params in all_params(klein.G):
        for d in search_extension_data(klein_category, params):
            tau = compute_tau(d, klein_category.eps)
            assert tau(params.p) == 1


def test_tau_rejects_non_sign_values():
    c = GROUPS["Z4"]
    d = search_extension_data(c, ExtensionParams(Z4, (1,), (0,)))[0]
    bad = ExtensionData(d.params, d.chi, d.mu, d.xi, d.nu, (d.a[0], d.a[1] * RootOfUnity.from_exponent(1, 8)) + d.a[2:])
    with pytest.raises(NotACharacter):
        compute_tau(bad, c.eps)


def test_restricted_characters():
    G = FiniteAbelianGroup([4, 2])
    chars = characters_trivial_on(G, [(0, 1)])
    assert len(chars) == 4
    assert all(x((0, 1)) == 1 for x in chars)
    assert len(all_moves(G, chars)) == 4 * 4
