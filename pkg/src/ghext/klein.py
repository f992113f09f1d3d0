"""Extensions of the generalized Haagerup category for the Klein four-group.

The group is ``G = Z2 x Z2 = {0, p, q, r}`` with ``p = (0,1)``, ``q = (1,0)``,
``r = (1,1)`` (canonical element order), the sign table ``EPSILON`` below and
the rotation ``theta: p -> q -> r -> p``.  A ``Z2 x Z2``-graded extension is
described by one ``Z2``-extension per ``h`` in ``{p, q, r}``: twists
``z_h``, signs ``nu_h`` and the fixed functions ``a_p, a_q, a_r``.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .abelian import Character, FiniteAbelianGroup, GroupElem, RootOfUnity, ONE, I
from .category import EpsilonTable
from .equiv import compute_tau
from .extdata import ExtensionData, ExtensionParams

__all__ = [
    "G",
    "EPSILON",
    "LABELS",
    "A_P",
    "A_Q",
    "A_R",
    "Inconsistent",
    "CensusError",
    "ZTriple",
    "KleinData",
    "KleinCensus",
    "A4Census",
    "theta",
    "phi",
    "epsilon_table",
    "derive_a_r",
    "admissible_z_triples",
    "satisfies_zcond",
    "satisfies_newcn",
    "nu_orbit_count",
    "check_scalar_identities",
    "klein_census",
    "a4_census",
    "arel_holds",
    "allowed_nu",
    "nu_triples",
    "element",
    "a_tables_theta_invariant",
    "epsilon_theta_invariant",
]

G = FiniteAbelianGroup([2, 2])
ZERO, P, Q, R = G.elements
LABELS = {ZERO: "0", P: "p", Q: "q", R: "r"}
_BY_LABEL = {v: k for k, v in LABELS.items()}

# rows: subscript g of eps_g, columns: argument h, both in the order (0, p, q, r)
EPSILON = np.array([
    [1, 1, 1, 1],
    [1, -1, -1, 1],
    [1, 1, -1, -1],
    [1, -1, 1, -1],
], dtype=np.int8)

_MI = -I
A_P = (ONE, _MI, ONE, I)
A_Q = (ONE, I, _MI, ONE)
A_R = (ONE, ONE, I, _MI)

ASSOCIATOR_MULTIPLICITY = 3
"""Number of choices of associator on the order-3 part (the order of H^3(Z3, T))."""


class Inconsistent(ValueError):
    pass


class CensusError(RuntimeError):
    """A hard-coded assumption of the census (trivial tau) failed."""


def epsilon_table() -> EpsilonTable:
    return EpsilonTable(G, EPSILON)


def element(x) -> GroupElem:
    """Accept ``"p"``-style labels as well as tuples."""
    if isinstance(x, str):
        return _BY_LABEL[x]
    return G.element(x)


def eps(h, g) -> int:
    return int(EPSILON[G.index(h), G.index(g)])


def theta(g) -> GroupElem:
    g = element(g)
    return {ZERO: ZERO, P: Q, Q: R, R: P}[g]


def phi(k, z) -> int:
    """``eps_k(z) eps_z(k)``."""
    return eps(k, z) * eps(z, k)


@dataclass(frozen=True, order=True)
class ZTriple:
    zp: GroupElem
    zq: GroupElem
    zr: GroupElem

    @classmethod
    def parse(cls, spec: str) -> ZTriple:
        parts = [s.strip() for s in spec.split(",")]
        if len(parts) != 3:
            raise ValueError(f"expected three comma-separated labels, got {spec!r}")
        return cls(*(element(s) for s in parts))

    def __iter__(self):
        return iter((self.zp, self.zq, self.zr))

    def label(self) -> str:
        return "(" + ",".join(LABELS[z] for z in self) + ")"

    @property
    def total(self) -> GroupElem:
        return G.add(G.add(self.zp, self.zq), self.zr)

    def rotate(self) -> ZTriple:
        """Relabel by theta: the new ``z_{theta(h)}`` is ``theta(z_h)``."""
        return ZTriple(theta(self.zr), theta(self.zp), theta(self.zq))

    def case(self) -> str:
        zs = list(self)
        nonzero = [z for z in zs if z != ZERO]
        if not nonzero:
            return "zero"
        if len(nonzero) == 1:
            return "one"
        if len(nonzero) == 2:
            return "pair" if nonzero[0] == nonzero[1] else "other"
        if len(set(zs)) == 1:
            return "equal"
        if len(set(zs)) == 3:
            return "distinct"
        return "other"


def satisfies_zcond(zt: ZTriple) -> bool:
    """Sum zero, two entries zero, or all entries equal."""
    zs = list(zt)
    return zt.total == ZERO or zs.count(ZERO) >= 2 or zs[0] == zs[1] == zs[2]


def satisfies_newcn(zt: ZTriple) -> bool:
    """``eps_s(z_h) eps_{z_h}(s) = 1`` for ``s = z_p + z_q + z_r`` and every ``h``."""
    s = zt.total
    return all(phi(s, z) == 1 for z in zt)


def admissible_z_triples() -> list[ZTriple]:
    return sorted(ZTriple(*t) for t in itertools.product(G.elements, repeat=3)
                  if satisfies_zcond(ZTriple(*t)))


def derive_a_r(a_p, a_q) -> tuple[RootOfUnity, ...]:
    """The ``a_r`` with ``a_p(g) a_q(g - p) a_r(g - r) = 1`` for all ``g``.

    Raises
    ------
    Inconsistent
        If the result violates the normalization ``a_r(0) = 1``.
    """
    out = []
    for h in G.elements:
        out.append((a_p[G.index(G.add(h, R))] * a_q[G.index(G.add(h, Q))]).inverse())
    if out[0] != 1:
        raise Inconsistent(f"a_r(0) = {out[0]}, expected 1")
    return tuple(out)


def arel_holds(a_p, a_q, a_r) -> bool:
    return all(a_p[G.index(g)] * a_q[G.index(G.sub(g, P))] * a_r[G.index(G.sub(g, R))] == 1
               for g in G.elements)


def _chi(h) -> Character:
    return Character.from_values(G, [RootOfUnity.sign(eps(g, h)) for g in G.elements])


def _mu(h, z) -> Character:
    return Character.from_values(G, [RootOfUnity.sign(eps(g, h) * eps(z, g)) for g in G.elements])


def allowed_nu(h, z) -> tuple[RootOfUnity, RootOfUnity]:
    """The two square roots of ``mu_h(h + z)``."""
    h, z = element(h), element(z)
    return _mu(h, z)(G.add(h, z)).sqrt()


@dataclass(frozen=True)
class KleinData:
    z_triple: ZTriple
    nu_triple: tuple[RootOfUnity, RootOfUnity, RootOfUnity]
    a_p: tuple[RootOfUnity, ...] = A_P
    a_q: tuple[RootOfUnity, ...] = A_Q
    a_r: tuple[RootOfUnity, ...] = A_R

    def __post_init__(self):
        for h, z, nu in zip((P, Q, R), self.z_triple, self.nu_triple):
            if nu not in allowed_nu(h, z):
                raise ValueError(f"nu_{LABELS[h]} = {nu} is not a square root of mu(h + z_h)")

    def a(self, h) -> tuple[RootOfUnity, ...]:
        return {P: self.a_p, Q: self.a_q, R: self.a_r}[element(h)]

    def extension_data(self, h) -> ExtensionData:
        """The single ``Z2``-extension data for twist ``h``:
        ``xi = i``, ``chi_h(g) = eps_g(h)``, ``mu_h = chi_h eps_{z_h}``."""
        h = element(h)
        i = (P, Q, R).index(h)
        z = list(self.z_triple)[i]
        return ExtensionData(ExtensionParams(G, h, z), _chi(h), _mu(h, z), I, self.nu_triple[i], self.a(h))

    def arel_holds(self) -> bool:
        return arel_holds(self.a_p, self.a_q, self.a_r)


def nu_triples(zt: ZTriple) -> list[tuple[RootOfUnity, ...]]:
    return list(itertools.product(*(allowed_nu(h, z) for h, z in zip((P, Q, R), zt))))


def _check_tau(zt: ZTriple):
    kd = KleinData(zt, tuple(r[0] for r in (allowed_nu(h, z) for h, z in zip((P, Q, R), zt))))
    table = epsilon_table()
    for h in (P, Q, R):
        tau = compute_tau(kd.extension_data(h), table)
        if not tau.is_trivial():
            raise CensusError(f"tau for h = {LABELS[h]} and z = {zt.label()} is {tau.values}, not trivial")


def nu_orbit_count(zt: ZTriple, check_tau: bool = True) -> int:
    """Number of orbits of the allowed nu-triples under ``(x, y)`` in ``G x G``
    acting by ``phi(x, z_p)``, ``phi(y, z_q)``, ``phi(x + y, z_r)``."""
    if check_tau:
        _check_tau(zt)
    signs = {(phi(x, zt.zp), phi(y, zt.zq), phi(G.add(x, y), zt.zr))
             for x in G.elements for y in G.elements}
    seen: set[tuple] = set()
    orbits = 0
    for t in nu_triples(zt):
        if t in seen:
            continue
        orbits += 1
        for s in signs:
            seen.add(tuple(n * si for n, si in zip(t, s)))
    return orbits


@dataclass
class ScalarReport:
    cond2: int
    """``-eps_{z_p}(p) eps_{z_q}(q) eps_{z_r}(r)``, the value of the product of
    nine unitaries in the second gluing relation."""
    prod1: int
    newcn: dict[str, int]
    newcn_holds: bool
    zcond_holds: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def check_scalar_identities(kd: KleinData | ZTriple) -> ScalarReport:
    zt = kd.z_triple if isinstance(kd, KleinData) else kd
    cond2 = -eps(zt.zp, P) * eps(zt.zq, Q) * eps(zt.zr, R)
    s = zt.total
    newcn = {LABELS[h]: phi(s, z) for h, z in zip((P, Q, R), zt)}
    return ScalarReport(cond2, 1, newcn, all(v == 1 for v in newcn.values()), satisfies_zcond(zt))


CASE_ORDER = ("zero", "one", "pair", "equal", "distinct")


@dataclass
class KleinCensus:
    rows: list[tuple[ZTriple, int]]
    total: int
    breakdown: dict[str, tuple[int, int]] = field(default_factory=dict)
    """case -> (extensions per triple, number of triples)"""

    def table(self) -> str:
        lines = [f"{'triple':<10} {'case':<9} extensions"]
        for zt, n in self.rows:
            lines.append(f"{zt.label():<10} {zt.case():<9} {n}")
        lines.append("")
        for case in CASE_ORDER:
            if case in self.breakdown:
                per, count = self.breakdown[case]
                lines.append(f"{case:<9} {per} x {count}")
        lines.append(f"triples = {len(self.rows)}")
        lines.append(f"total = {self.total}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "triples": [{"z": zt.label(), "case": zt.case(), "extensions": n} for zt, n in self.rows],
            "breakdown": {k: {"per_triple": v[0], "triples": v[1]} for k, v in self.breakdown.items()},
            "admissible": len(self.rows),
            "total": self.total,
        }


def klein_census() -> KleinCensus:
    rows = [(zt, nu_orbit_count(zt)) for zt in admissible_z_triples()]
    per_case: dict[str, set[int]] = {}
    counts: Counter = Counter()
    for zt, n in rows:
        per_case.setdefault(zt.case(), set()).add(n)
        counts[zt.case()] += 1
    breakdown = {}
    for case, ns in per_case.items():
        if len(ns) != 1:
            raise CensusError(f"case {case} has varying counts {sorted(ns)}")
        breakdown[case] = (ns.pop(), counts[case])
    return KleinCensus(rows, sum(n for _, n in rows), breakdown)


@dataclass
class A4Census:
    compatible: list[ZTriple]
    base_cases: list[tuple[ZTriple, tuple[RootOfUnity, ...]]]
    multiplicity: int
    total: int
    breakdown: dict[str, tuple[int, int]]
    """case -> (base cases, associator multiplicity)"""

    def table(self) -> str:
        lines = ["compatible z-triples: " + ", ".join(zt.label() for zt in self.compatible)]
        for zt, nus in self.base_cases:
            lines.append(f"{zt.label():<10} nu = {nus[0]!r}  x {self.multiplicity}")
        lines.append(" + ".join(f"{b}x{m}" for b, m in self.breakdown.values()))
        lines.append(f"total = {self.total}")
        return "\n".join(lines)

    def to_json(self) -> dict:
        return {
            "compatible": [zt.label() for zt in self.compatible],
            "base_cases": [{"z": zt.label(), "nu": repr(n[0])} for zt, n in self.base_cases],
            "multiplicity": self.multiplicity,
            "breakdown": {k: {"cases": v[0], "multiplicity": v[1]} for k, v in self.breakdown.items()},
            "total": self.total,
        }


def a_tables_theta_invariant() -> bool:
    """``a_{theta(h)}(theta(g)) = a_h(g)`` for the fixed ``a_p, a_q, a_r``."""
    tables = {P: A_P, Q: A_Q, R: A_R}
    return all(tables[theta(h)][G.index(theta(g))] == tables[h][G.index(g)]
               for h in (P, Q, R) for g in G.elements)


def epsilon_theta_invariant() -> bool:
    return all(eps(theta(g), theta(h)) == eps(g, h) for g in G.elements for h in G.elements)


def a4_census() -> A4Census:
    """Triples fixed by theta, equal nu's (normalized to 1 when ``z_h != 0``),
    times the three associators on the order-3 part."""
    compatible = [zt for zt in admissible_z_triples() if zt.rotate() == zt]
    base = []
    for zt in compatible:
        if zt.zp == ZERO:
            # nu_p = nu_q = nu_r = +-i
            common = set(allowed_nu(P, ZERO)) & set(allowed_nu(Q, ZERO)) & set(allowed_nu(R, ZERO))
            for nu in sorted(common):
                base.append((zt, (nu, nu, nu)))
        else:
            base.append((zt, (ONE, ONE, ONE)))
    breakdown = {
        "zero": (sum(1 for zt, _ in base if zt.zp == ZERO), ASSOCIATOR_MULTIPLICITY),
        "rotating": (sum(1 for zt, _ in base if zt.zp != ZERO), ASSOCIATOR_MULTIPLICITY),
    }
    return A4Census(compatible, base, ASSOCIATOR_MULTIPLICITY, len(base) * ASSOCIATOR_MULTIPLICITY, breakdown)
