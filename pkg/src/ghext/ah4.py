"""The degenerate ``Z4 x Z2`` case: two extension data sets and their compatibility.

The sign table is only pinned down on ``G_2 x G`` by the rule
``eps_{(i,j)}((k,l)) = -1`` iff ``(i, l) = (2, 1)``.  The full table is
obtained by solving the cocycle law over GF(2) together with the sign
constraints that the two data sets impose through the sign relations; free
entries are set to +1.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

import numpy as np

from .abelian import (
    Character,
    FiniteAbelianGroup,
    GroupElem,
    RootOfUnity,
    ONE,
    MINUS_ONE,
    enumerate_two_torsion,
)
from .category import CategoryData, EpsilonTable, InconsistentCocycle, epsilon_from_bicharacter
from .equiv import characters_trivial_on
from .extdata import ExtensionData, ExtensionParams, check_extension_data

__all__ = [
    "G",
    "P10",
    "P01",
    "DEGENERATE",
    "STATED_C",
    "AH4Scenario",
    "epsilon_rule",
    "build_epsilon",
    "data_p10",
    "data_p01",
    "build_scenario",
    "check_l11",
    "l11_ratio",
    "solve_c",
    "allowed_characters",
    "trivext_conditions",
    "scenario_report",
]

G = FiniteAbelianGroup([4, 2])
P10: GroupElem = (1, 0)
P01: GroupElem = (0, 1)
DEGENERATE: GroupElem = (0, 1)
ZERO: GroupElem = (0, 0)

STATED_C = RootOfUnity(Fraction(-3, 8))
"""``e^{-3 pi i / 4}``, the value quoted for the compatibility constant."""


def epsilon_rule(h, g) -> int:
    """Signs on ``G_2 x G``: -1 iff ``(i, l) = (2, 1)`` for ``h = (i, j)``, ``g = (k, l)``."""
    (i, _), (_, l) = G.element(h), G.element(g)
    return -1 if (i, l) == (2, 1) else 1


def data_p10(nu: RootOfUnity = ONE) -> ExtensionData:
    """``p = (1,0)``, ``z = 0``: ``a((0,1)) = -1``, ``a = 1`` elsewhere, trivial chi, mu, xi."""
    triv = Character.trivial(G)
    a = tuple(MINUS_ONE if g == (0, 1) else ONE for g in G.elements)
    return ExtensionData(ExtensionParams(G, P10, ZERO), triv, triv, ONE, nu, a)


def data_p01(nu: RootOfUnity = ONE) -> ExtensionData:
    """``p = (0,1)``, ``z = 0``: ``a'((x,y)) = e^{x pi i / 4}``, ``chi' = mu' = i^x``, ``xi' = 1``."""
    a = tuple(RootOfUnity(Fraction(x, 8)) for x, _ in G.elements)
    chi = Character(G, (1, 0))
    return ExtensionData(ExtensionParams(G, P01, ZERO), chi, chi, ONE, nu, a)


def _data_constraints(d: ExtensionData):
    """The ``a_shift``, ``mu_from_a`` and ``a_inverse`` relations of ``d`` as products of eps entries equal to a sign."""
    p, z = d.params.p, d.params.z
    out = []

    def need(pairs, value: RootOfUnity):
        if value == 1:
            out.append((pairs, 1))
        elif value == -1:
            out.append((pairs, -1))
        else:
            raise InconsistentCocycle(f"relation forces a product of signs to equal {value}")

    for g in G.elements:
        for h in G.elements:
            lhs = d.a_at(G.add(h, G.mul(2, g))) / (d.a_at(h) * d.chi(g))
            need([(g, h), (g, G.sub(h, p))], lhs)
        need([(G.add(p, z), G.sub(g, G.mul(2, p)))], d.mu(g) / (d.a_at(g) * d.a_at(G.sub(g, p)) * d.xi))
        mg = G.neg(g)
        need([(mg, G.sub(g, p)), (mg, g)], d.a_at(g) * d.a_at(mg))
    return out


def build_epsilon(extra_data: tuple[ExtensionData, ...] | None = None) -> EpsilonTable:
    """Full sign table: the rule on ``G_2 x G``, the cocycle law and the
    constraints of the given data sets (default: both fixed data sets)."""
    if extra_data is None:
        extra_data = (data_p10(), data_p01())
    table = {(k, g): epsilon_rule(k, g) for k in enumerate_two_torsion(G) for g in G.elements}
    extra = [c for d in extra_data for c in _data_constraints(d)]
    return epsilon_from_bicharacter(G, table, extra)


@dataclass(frozen=True)
class AH4Scenario:
    eps: EpsilonTable
    data_p10: ExtensionData
    data_p01: ExtensionData
    c: RootOfUnity | None = STATED_C
    c_prime: RootOfUnity | None = None
    a_tensor: np.ndarray | None = None
    group: FiniteAbelianGroup = field(default=G)

    @property
    def category(self) -> CategoryData:
        return CategoryData(G, self.eps, a_tensor=self.a_tensor)

    def with_c(self, c: RootOfUnity | None) -> AH4Scenario:
        return replace(self, c=c)


def build_scenario(nu: RootOfUnity = ONE, nu_prime: RootOfUnity = ONE, c: RootOfUnity | None = STATED_C,
                   a_tensor: np.ndarray | None = None) -> AH4Scenario:
    d10, d01 = data_p10(nu), data_p01(nu_prime)
    eps = build_epsilon((d10, d01))
    # c'^2 = mu'((1,0)); the root with the smaller turn is taken
    c_prime = d01.mu(P10).sqrt()[0]
    return AH4Scenario(eps, d10, d01, c, c_prime, a_tensor)


def l11_ratio(s: AH4Scenario, g) -> RootOfUnity:
    """``a'(g) / (a'(g - (1,0)) a(g - (0,1)) a(g))``: the value ``c`` must take at ``g``."""
    a, ap = s.data_p10, s.data_p01
    return ap.a_at(g) / (ap.a_at(G.sub(g, P10)) * a.a_at(G.sub(g, P01)) * a.a_at(g))


def check_l11(s: AH4Scenario, c: RootOfUnity | None = None) -> bool:
    """Whether ``c a'(g - (1,0)) a(g - (0,1)) a(g) = a'(g)`` for all eight ``g``
    (``c`` defaults to ``s.c``)."""
    c = s.c if c is None else c
    if c is None:
        raise ValueError("no value of c given")
    return all(l11_ratio(s, g) == c for g in G.elements)


def solve_c(s: AH4Scenario) -> list[RootOfUnity]:
    """Square roots of ``chi'((1,0))`` satisfying the compatibility identity."""
    return [c for c in s.data_p01.chi(P10).sqrt() if check_l11(s, c)]


def allowed_characters() -> list[Character]:
    """Characters trivial on the trivially acting element ``(0,1)``."""
    return characters_trivial_on(G, [DEGENERATE])


def trivext_conditions(eps: EpsilonTable) -> dict[str, bool]:
    """``eps_k((1,0)) = 1`` for all ``k`` in ``G_2`` (realizable on the original
    Cuntz algebra for ``p = (1,0)``) and ``eps_{(2,0)}((0,1)) = -1`` (not for ``p = (0,1)``)."""
    g2 = enumerate_two_torsion(G)
    return {
        "p10_trivial_on_G2": all(eps(k, P10) == 1 for k in g2),
        "p01_blocked": eps((2, 0), P01) == -1,
    }


def scenario_report(s: AH4Scenario) -> dict:
    cat = s.category
    r10 = check_extension_data(cat, s.data_p10)
    r01 = check_extension_data(cat, s.data_p01)
    roots = solve_c(s)
    return {
        "cocycle_violations": s.eps.cocycle_violations(),
        "degenerate_row_trivial": bool(np.all(s.eps.values[G.index(DEGENERATE)] == 1)),
        "rule_matches_on_G2xG": all(s.eps(k, g) == epsilon_rule(k, g)
                                    for k in enumerate_two_torsion(G) for g in G.elements),
        "data_p10": r10.to_json(),
        "data_p01": r01.to_json(),
        "c": repr(s.c),
        "l11_holds": check_l11(s) if s.c is not None else None,
        "l11_required_c": sorted({repr(l11_ratio(s, g)) for g in G.elements}),
        "solve_c": [repr(c) for c in roots],
        "c_prime": repr(s.c_prime),
        "trivext": trivext_conditions(s.eps),
    }
