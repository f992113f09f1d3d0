"""Equivalence of extension data, the tau character and class counting.

A move ``(zeta, k)`` with ``zeta`` a character and ``k`` in ``G_2`` sends

    a'(g) = zeta(g) eps_k(g - p) eps_k(p) a(g)
    xi'   = zeta(p) chi(k) xi
    nu'   = zeta(p + z) mu(k) nu
    chi'  = zeta^2 chi,    mu' = zeta^2 mu

and two data sets for the same ``(p, z)`` give equivalent extensions iff a move
relates them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .abelian import (
    Character,
    FiniteAbelianGroup,
    GroupElem,
    enumerate_characters,
    enumerate_two_torsion,
    root_order,
)
from .category import EpsilonTable
from .extdata import ExtensionData

__all__ = [
    "EquivalenceMove",
    "TauCharacter",
    "Orbit",
    "MixedParams",
    "NotACharacter",
    "act",
    "all_moves",
    "characters_trivial_on",
    "classify",
    "compute_tau",
    "coreq_count",
]


class MixedParams(ValueError):
    """Solutions with different ``(p, z)`` cannot be compared."""


class NotACharacter(ValueError):
    """tau fails to be a sign-valued character with ``tau(p) = 1``."""


@dataclass(frozen=True)
class EquivalenceMove:
    zeta: Character
    k: GroupElem

    def __post_init__(self):
        G = self.zeta.group
        k = G.element(self.k)
        if G.mul(2, k) != G.zero:
            raise ValueError(f"k = {k} is not 2-torsion")
        object.__setattr__(self, "k", k)

    @classmethod
    def identity(cls, G: FiniteAbelianGroup) -> EquivalenceMove:
        return cls(Character.trivial(G), G.zero)

    def __mul__(self, other: EquivalenceMove) -> EquivalenceMove:
        G = self.zeta.group
        return EquivalenceMove(self.zeta * other.zeta, G.add(self.k, other.k))


def act(move: EquivalenceMove, d: ExtensionData, eps: EpsilonTable) -> ExtensionData:
    G = d.group
    zeta, k = move.zeta, move.k
    p, z = d.params.p, d.params.z
    a = tuple(zeta(g) * eps(k, G.sub(g, p)) * eps(k, p) * d.a[i] for i, g in enumerate(G.elements))
    return ExtensionData(
        d.params,
        zeta ** 2 * d.chi,
        zeta ** 2 * d.mu,
        zeta(p) * d.chi(k) * d.xi,
        zeta(G.add(p, z)) * d.mu(k) * d.nu,
        a,
    )


def characters_trivial_on(G: FiniteAbelianGroup, elements: Iterable) -> list[Character]:
    """Characters of ``G`` that are 1 on every listed element."""
    elements = [G.element(h) for h in elements]
    return [x for x in enumerate_characters(G) if all(x(h) == 1 for h in elements)]


def all_moves(G: FiniteAbelianGroup, characters: Sequence[Character] | None = None) -> list[EquivalenceMove]:
    chars = enumerate_characters(G) if characters is None else list(characters)
    return [EquivalenceMove(x, k) for x in chars for k in enumerate_two_torsion(G)]


@dataclass
class Orbit:
    representative: ExtensionData
    members: list[ExtensionData]

    def __len__(self) -> int:
        return len(self.members)


def classify(solutions: Sequence[ExtensionData], eps: EpsilonTable,
             characters: Sequence[Character] | None = None) -> list[Orbit]:
    """Partition ``solutions`` into equivalence classes.

    ``characters`` restricts the allowed ``zeta`` (default: all of the dual
    group).  Each orbit's representative is the element of its full orbit with
    the smallest exponent encoding, so the result does not depend on the input
    order.  Orbits are sorted by representative.
    """
    if not solutions:
        return []
    params = solutions[0].params
    if any(d.params != params for d in solutions):
        raise MixedParams("all solutions must share (p, z)")
    G = params.group
    N = root_order(G)
    moves = all_moves(G, characters)
    groups: dict[tuple, Orbit] = {}
    for d in solutions:
        orbit = [act(m, d, eps) for m in moves]
        rep = min(orbit, key=lambda x: x.encode(N))
        key = rep.encode(N)
        if key not in groups:
            groups[key] = Orbit(rep, [])
        if d not in groups[key].members:
            groups[key].members.append(d)
    return [groups[k] for k in sorted(groups)]


@dataclass(frozen=True)
class TauCharacter:
    group: FiniteAbelianGroup
    values: tuple[int, ...]
    """Signs in canonical element order."""

    def __call__(self, g) -> int:
        return self.values[self.group.index(g)]

    def is_trivial(self) -> bool:
        return all(v == 1 for v in self.values)


def compute_tau(d: ExtensionData, eps: EpsilonTable) -> TauCharacter:
    """``tau(g) = a(g - p) a(p) / a(g) * eps_{-p}(g) eps_{-p}(p)``.

    Raises
    ------
    NotACharacter
        If some value is not a sign, ``tau(p) != 1`` or tau is not multiplicative.
    """
    G = d.group
    p = d.params.p
    mp = G.neg(p)
    vals = []
    for g in G.elements:
        t = d.a_at(G.sub(g, p)) * d.a_at(p) / d.a_at(g) * eps(mp, g) * eps(mp, p)
        if t == 1:
            vals.append(1)
        elif t == -1:
            vals.append(-1)
        else:
            raise NotACharacter(f"tau({g}) = {t} is not a sign")
    tau = TauCharacter(G, tuple(vals))
    if tau(p) != 1:
        raise NotACharacter("tau(p) != 1")
    for g in G.elements:
        for h in G.elements:
            if tau(G.add(g, h)) != tau(g) * tau(h):
                raise NotACharacter(f"tau is not multiplicative at {g}, {h}")
    return tau


def coreq_count(d: ExtensionData, eps: EpsilonTable) -> int:
    """2 if ``tau(k) eps_k(z) eps_z(k) = 1`` for every ``k`` in ``G_2``, else 1.

    Assumes A has no vanishing entries, which is what makes any two data sets
    differ by a character.
    """
    tau = compute_tau(d, eps)
    z = d.params.z
    for k in enumerate_two_torsion(d.group):
        if tau(k) * eps(k, z) * eps(z, k) != 1:
            return 1
    return 2
