import logging
import time
from dataclasses import replace
from fractions import Fraction

from ghext import ah4
from ghext.abelian import Character, I, RootOfUnity, enumerate_two_torsion
from ghext.category import CategoryData
from ghext.equiv import EquivalenceMove, act, classify
from ghext.extdata import check_extension_data, search_extension_data

logging.getLogger("ghext.extdata").setLevel(logging.ERROR)

E18 = RootOfUnity(Fraction(1, 8))
SIGN_X = Character(ah4.G, (2, 0))  # (x, y) -> (-1)^x


def test_sign_table():
    eps = ah4.build_epsilon()
    assert eps.cocycle_violations() == 0
    for k in enumerate_two_torsion(ah4.G):
        for g in ah4.G.elements:
            assert eps(k, g) == ah4.epsilon_rule(k, g)
    assert eps((2, 0), (0, 1)) == -1 and eps((2, 1), (3, 1)) == -1
    assert all(v == 1 for v in eps.values[ah4.G.index((0, 1))])


def test_displayed_data_pass_exact_relations():
    s = ah4.build_scenario()
    c = s.category
    for d in (s.data_p10, s.data_p01):
        rep = check_extension_data(c, d)
        assert rep.exact_passed, rep.status
        assert rep.status["tensor_shift"] is None


def test_displayed_data_are_found_by_search():
    s = ah4.build_scenario()
    for d in (s.data_p10, s.data_p01):
        assert d in search_extension_data(s.category, d.params)


def test_compatibility_constant_is_forced():
    s = ah4.build_scenario()
    ratios = {ah4.l11_ratio(s, g) for g in ah4.G.elements}
    assert ratios == {E18}
    assert ah4.check_l11(s, E18)
    assert ah4.solve_c(s) == [E18]
    assert set(ah4.solve_c(s)) <= set(I.sqrt())


def test_stated_constant_fails_for_displayed_data():
    s = ah4.build_scenario()
    assert ah4.STATED_C == RootOfUnity(Fraction(-3, 8))
    assert not ah4.check_l11(s)


def test_stated_constant_holds_for_equivalent_data():
    s = ah4.build_scenario()
    move = EquivalenceMove(SIGN_X, (0, 0))
    twisted = act(move, s.data_p01, s.eps)
    assert check_extension_data(s.category, twisted).exact_passed
    assert ah4.check_l11(replace(s, data_p01=twisted))
    assert SIGN_X in ah4.allowed_characters()


def test_c_prime_squares_to_mu_prime():
    s = ah4.build_scenario()
    assert s.c_prime ** 2 == s.data_p01.mu((1, 0)) == I
    assert s.c_prime == E18


def test_cuntz_realizability_conditions():
    assert ah4.trivext_conditions(ah4.build_epsilon()) == {"p10_trivial_on_G2": True, "p01_blocked": True}


def test_allowed_characters_are_trivial_on_degenerate_element():
    chars = ah4.allowed_characters()
    assert len(chars) == 4
    assert all(x(ah4.DEGENERATE) == 1 for x in chars)


def test_classification_under_allowed_characters():
    s = ah4.build_scenario()
    for d in (s.data_p10, s.data_p01):
        sols = search_extension_data(s.category, d.params)
        orbits = classify(sols, s.eps, ah4.allowed_characters())
        assert sum(len(o) for o in orbits) == len(sols)
        assert any(d in o.members for o in orbits)


def test_report_and_timing():
    started = time.perf_counter()
    rep = ah4.scenario_report(ah4.build_scenario())
    assert time.perf_counter() - started < 1.0
    assert rep["cocycle_violations"] == 0
    assert rep["degenerate_row_trivial"] and rep["rule_matches_on_G2xG"]
    assert rep["data_p10"]["passed"] and rep["data_p01"]["passed"]
    assert rep["l11_required_c"] == ["e(1/8)"]
    assert rep["solve_c"] == ["e(1/8)"]


def test_external_tensor_enables_tensor_check(tmp_path):
    # a tensor of the right shape enables the check; its outcome is data-dependent
    import numpy as np

    A = np.ones((8, 8, 8), dtype=complex)
    s = ah4.build_scenario(a_tensor=A)
    rep = check_extension_data(s.category, s.data_p10)
    assert rep.status["tensor_shift"] is not None
    assert CategoryData(ah4.G, s.eps, a_tensor=A).a_tensor is not None
