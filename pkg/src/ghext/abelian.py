"""Finite abelian groups, their characters, and exact roots of unity."""

from __future__ import annotations

import cmath
import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, reduce
from typing import Iterable, Iterator, Sequence

import numpy as np

__all__ = [
    "GroupElem",
    "FiniteAbelianGroup",
    "RootOfUnity",
    "Character",
    "ONE",
    "enumerate_two_torsion",
    "enumerate_odd_part",
    "enumerate_characters",
    "parse_group",
    "root_order",
]

GroupElem = tuple[int, ...]
"""Residue vector ``(g_1, ..., g_k)`` with ``0 <= g_i < m_i``."""


class FiniteAbelianGroup:
    """The group ``Z_{m_1} x ... x Z_{m_k}`` in additive notation.

    Elements are plain tuples of residues. They are enumerated in lexicographic
    order, and most of the numerical code works with the position of an element
    in that order (its *index*) through the precomputed :attr:`add_table` and
    :attr:`neg_table`.
    """

    def __init__(self, moduli: Sequence[int]):
        moduli = tuple(int(m) for m in moduli)
        if any(m < 1 for m in moduli):
            raise ValueError(f"moduli must be positive, got {moduli}")
        self.moduli: tuple[int, ...] = moduli

    def __repr__(self) -> str:
        return f"FiniteAbelianGroup({list(self.moduli)})"

    def __str__(self) -> str:
        return "x".join(f"Z{m}" for m in self.moduli) if self.moduli else "Z1"

    def __eq__(self, other) -> bool:
        return isinstance(other, FiniteAbelianGroup) and self.moduli == other.moduli

    def __hash__(self) -> int:
        return hash(self.moduli)

    def __len__(self) -> int:
        return self.order

    @property
    def order(self) -> int:
        return math.prod(self.moduli)

    @property
    def exponent(self) -> int:
        return reduce(math.lcm, self.moduli, 1)

    @property
    def rank(self) -> int:
        return len(self.moduli)

    @cached_property
    def elements(self) -> tuple[GroupElem, ...]:
        return tuple(itertools.product(*(range(m) for m in self.moduli)))

    def __iter__(self) -> Iterator[GroupElem]:
        return iter(self.elements)

    @cached_property
    def _index(self) -> dict[GroupElem, int]:
        return {g: i for i, g in enumerate(self.elements)}

    @property
    def zero(self) -> GroupElem:
        return tuple(0 for _ in self.moduli)

    def element(self, g: Iterable[int] | int) -> GroupElem:
        """Normalize ``g`` (tuple, list or, for cyclic groups, an int)."""
        if isinstance(g, (int, np.integer)):
            g = (int(g),)
        g = tuple(int(x) for x in g)
        if len(g) != self.rank:
            raise ValueError(f"element {g} does not belong to {self}")
        return tuple(x % m for x, m in zip(g, self.moduli))

    def index(self, g: Iterable[int] | int) -> int:
        return self._index[self.element(g)]

    def add(self, g: GroupElem, h: GroupElem) -> GroupElem:
        return tuple((a + b) % m for a, b, m in zip(g, h, self.moduli))

    def sub(self, g: GroupElem, h: GroupElem) -> GroupElem:
        return tuple((a - b) % m for a, b, m in zip(g, h, self.moduli))

    def neg(self, g: GroupElem) -> GroupElem:
        return tuple(-a % m for a, m in zip(g, self.moduli))

    def mul(self, n: int, g: GroupElem) -> GroupElem:
        return tuple(n * a % m for a, m in zip(g, self.moduli))

    def basis(self) -> list[GroupElem]:
        """Component generators ``e_1, ..., e_k`` in canonical order."""
        out = []
        for i in range(self.rank):
            e = [0] * self.rank
            e[i] = 1 % self.moduli[i]
            out.append(self.element(e))
        return out

    @cached_property
    def add_table(self) -> np.ndarray:
        n = self.order
        table = np.empty((n, n), dtype=np.intp)
        for i, g in enumerate(self.elements):
            for j, h in enumerate(self.elements):
                table[i, j] = self._index[self.add(g, h)]
        return table

    @cached_property
    def neg_table(self) -> np.ndarray:
        return np.array([self._index[self.neg(g)] for g in self.elements], dtype=np.intp)

    @cached_property
    def sub_table(self) -> np.ndarray:
        return self.add_table[:, self.neg_table]


def parse_group(spec: str) -> FiniteAbelianGroup:
    """Parse ``"Z4xZ2"``, ``"Z2"``, ``"Z1"`` (or ``"trivial"``)."""
    s = spec.strip().replace(" ", "")
    if s.lower() in ("trivial", "z1", "1", ""):
        return FiniteAbelianGroup([])
    parts = re.split(r"[x×*]", s)
    moduli = []
    for part in parts:
        m = re.fullmatch(r"[Zz]_?\{?(\d+)\}?", part)
        if not m:
            raise ValueError(f"cannot parse group spec {spec!r}")
        moduli.append(int(m.group(1)))
    return FiniteAbelianGroup([m for m in moduli if m != 1])


def root_order(G: FiniteAbelianGroup) -> int:
    """Root-of-unity order used for all exact data over ``G``."""
    return math.lcm(24, 8 * G.exponent)


@dataclass(frozen=True, order=True)
class RootOfUnity:
    """``exp(2*pi*i*turn)`` for a rational ``turn`` in ``[0, 1)``.

    Equality is equality of complex numbers, independent of the order the value
    was constructed in.
    """

    turn: Fraction

    def __post_init__(self):
        t = Fraction(self.turn)
        object.__setattr__(self, "turn", t - math.floor(t))

    @classmethod
    def from_exponent(cls, exponent: int, order: int) -> RootOfUnity:
        return cls(Fraction(int(exponent), int(order)))

    @classmethod
    def sign(cls, s: int) -> RootOfUnity:
        if s == 1:
            return ONE
        if s == -1:
            return MINUS_ONE
        raise ValueError(f"not a sign: {s}")

    @classmethod
    def from_complex(cls, z: complex, order: int, tol: float = 1e-9) -> RootOfUnity:
        """Snap ``z`` to the nearest element of ``mu_order``; error if too far."""
        k = round(cmath.phase(z) / (2 * math.pi) * order) % order
        r = cls.from_exponent(k, order)
        if abs(r.to_complex() - z) > tol:
            raise ValueError(f"{z} is not in mu_{order}")
        return r

    @property
    def order(self) -> int:
        """Multiplicative order (denominator of the turn)."""
        return self.turn.denominator

    def exponent(self, order: int) -> int:
        """Exponent ``k`` with ``self == exp(2 pi i k / order)``."""
        k = self.turn * order
        if k.denominator != 1:
            raise ValueError(f"{self} is not in mu_{order}")
        return int(k)

    def __mul__(self, other) -> RootOfUnity:
        if isinstance(other, RootOfUnity):
            return RootOfUnity(self.turn + other.turn)
        if other == 1:
            return self
        if other == -1:
            return RootOfUnity(self.turn + Fraction(1, 2))
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, other) -> RootOfUnity:
        if isinstance(other, RootOfUnity):
            return RootOfUnity(self.turn - other.turn)
        if other in (1, -1):
            return self * other
        return NotImplemented

    def __rtruediv__(self, other) -> RootOfUnity:
        if other in (1, -1):
            return self.inverse() * other
        return NotImplemented

    def __pow__(self, n: int) -> RootOfUnity:
        return RootOfUnity(self.turn * n)

    def __neg__(self) -> RootOfUnity:
        return self * -1

    def __eq__(self, other) -> bool:
        if isinstance(other, RootOfUnity):
            return self.turn == other.turn
        if other == 1:
            return self.turn == 0
        if other == -1:
            return self.turn == Fraction(1, 2)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.turn)

    def inverse(self) -> RootOfUnity:
        return RootOfUnity(-self.turn)

    conjugate = inverse

    def sqrt(self) -> tuple[RootOfUnity, RootOfUnity]:
        """Both square roots, the one with smaller turn first."""
        r = RootOfUnity(self.turn / 2)
        return tuple(sorted((r, -r)))

    def to_complex(self) -> complex:
        t = self.turn
        # exact values for the common quarter turns
        if t.denominator <= 2 or t.denominator == 4:
            return {Fraction(0): 1 + 0j, Fraction(1, 4): 1j,
                    Fraction(1, 2): -1 + 0j, Fraction(3, 4): -1j}[t]
        return cmath.exp(2j * math.pi * float(t))

    __complex__ = to_complex

    def __repr__(self) -> str:
        if self.turn == 0:
            return "1"
        if self.turn == Fraction(1, 2):
            return "-1"
        if self.turn == Fraction(1, 4):
            return "i"
        if self.turn == Fraction(3, 4):
            return "-i"
        return f"e({self.turn})"


ONE = RootOfUnity(Fraction(0))
MINUS_ONE = RootOfUnity(Fraction(1, 2))
I = RootOfUnity(Fraction(1, 4))


@dataclass(frozen=True)
class Character:
    """The character ``g -> exp(2 pi i sum_j c_j g_j / m_j)``."""

    group: FiniteAbelianGroup
    exponents: tuple[int, ...]

    def __post_init__(self):
        ex = tuple(int(c) % m for c, m in zip(self.exponents, self.group.moduli))
        if len(ex) != self.group.rank:
            raise ValueError("exponent vector has the wrong length")
        object.__setattr__(self, "exponents", ex)

    @classmethod
    def trivial(cls, G: FiniteAbelianGroup) -> Character:
        return cls(G, (0,) * G.rank)

    @classmethod
    def from_values(cls, G: FiniteAbelianGroup, values: Sequence[RootOfUnity]) -> Character | None:
        """Character with the given values (canonical order), or None if the
        values are not multiplicative."""
        ex = []
        for e, m in zip(G.basis(), G.moduli):
            k = values[G.index(e)].turn * m
            if k.denominator != 1:
                return None
            ex.append(int(k))
        chi = cls(G, tuple(ex))
        if any(chi(g) != v for g, v in zip(G.elements, values)):
            return None
        return chi

    def __call__(self, g) -> RootOfUnity:
        g = self.group.element(g)
        t = sum(Fraction(c * x, m) for c, x, m in zip(self.exponents, g, self.group.moduli))
        return RootOfUnity(t)

    @cached_property
    def values(self) -> tuple[RootOfUnity, ...]:
        return tuple(self(g) for g in self.group.elements)

    def __mul__(self, other: Character) -> Character:
        return Character(self.group, tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, n: int) -> Character:
        return Character(self.group, tuple(n * a for a in self.exponents))

    def inverse(self) -> Character:
        return self ** -1

    def is_trivial(self) -> bool:
        return not any(self.exponents)

    def __repr__(self) -> str:
        return f"Character({list(self.exponents)})"


def enumerate_two_torsion(G: FiniteAbelianGroup) -> list[GroupElem]:
    """``G_2 = {g : 2g = 0}`` in canonical order."""
    return [g for g in G.elements if G.mul(2, g) == G.zero]


def enumerate_odd_part(G: FiniteAbelianGroup) -> list[GroupElem]:
    """``G \\ 2G`` in canonical order."""
    doubles = {G.mul(2, g) for g in G.elements}
    return [g for g in G.elements if g not in doubles]


def enumerate_characters(G: FiniteAbelianGroup) -> list[Character]:
    """All ``|G|`` characters, ordered lexicographically by exponent vector."""
    return [Character(G, c) for c in itertools.product(*(range(m) for m in G.moduli))]
