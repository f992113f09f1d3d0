from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from ghext.abelian import (
    I,
    MINUS_ONE,
    ONE,
    Character,
    FiniteAbelianGroup,
    RootOfUnity,
    enumerate_characters,
    enumerate_odd_part,
    enumerate_two_torsion,
    parse_group,
    root_order,
)

turns = st.integers(0, 191).map(lambda k: Fraction(k, 192))


def test_parse_group_forms():
    assert parse_group("Z2xZ2").moduli == (2, 2)
    assert parse_group("Z4 x Z2").moduli == (4, 2)
    assert parse_group("Z6").order == 6
    with pytest.raises(ValueError):
        parse_group("S3")


def test_group_tables_agree_with_elementwise_ops():
    G = FiniteAbelianGroup([4, 2])
    for g in G.elements:
        for h in G.elements:
            assert G.elements[G.add_table[G.index(g), G.index(h)]] == G.add(g, h)
            assert G.elements[G.sub_table[G.index(g), G.index(h)]] == G.sub(g, h)
        assert G.add(g, G.neg(g)) == G.zero


def test_two_torsion_and_odd_part():
    G = FiniteAbelianGroup([4, 2])
    assert enumerate_two_torsion(G) == [(0, 0), (0, 1), (2, 0), (2, 1)]
    assert enumerate_odd_part(G) == [(0, 1), (1, 0), (1, 1), (2, 1), (3, 0), (3, 1)]
    assert enumerate_odd_part(FiniteAbelianGroup([2, 2])) == [(0, 1), (1, 0), (1, 1)]


def test_root_order_covers_eighth_and_cube_roots():
    for moduli in ([1], [2], [4], [2, 2], [4, 2], [10]):
        N = root_order(FiniteAbelianGroup(moduli))
        assert N % 24 == 0 and N % 8 == 0


def test_named_roots():
    assert I * I == MINUS_ONE
    assert MINUS_ONE * MINUS_ONE == ONE
    assert I.sqrt() == (RootOfUnity(Fraction(1, 8)), RootOfUnity(Fraction(5, 8)))
    assert repr(I) == "i" and repr(-I) == "-i"


@given(turns, turns)
def test_root_arithmetic_matches_complex(s, t):
    x, y = RootOfUnity(s), RootOfUnity(t)
    assert abs((x * y).to_complex() - x.to_complex() * y.to_complex()) < 1e-12
    assert (x / y) * y == x
    for r in x.sqrt():
        assert r * r == x


@given(turns)
def test_from_complex_roundtrip(t):
    x = RootOfUnity(t)
    assert RootOfUnity.from_complex(x.to_complex(), 192) == x


def test_from_complex_rejects_off_grid():
    with pytest.raises(ValueError):
        RootOfUnity.from_complex(complex(0.6, 0.8), 8)


@pytest.mark.parametrize("moduli", [[2], [4], [2, 2], [4, 2], [6]])
def test_characters_form_the_dual_group(moduli):
    G = FiniteAbelianGroup(moduli)
    chars = enumerate_characters(G)
    assert len(set(chars)) == G.order
    for x in chars:
        for g in G.elements:
            for h in G.elements:
                assert x(G.add(g, h)) == x(g) * x(h)
        assert Character.from_values(G, x.values) == x


def test_from_values_rejects_non_characters():
    G = FiniteAbelianGroup([4])
    assert Character.from_values(G, [ONE, I, ONE, ONE]) is None
