"""Structure constants (epsilon, eta, A) of a generalized Haagerup category.

The category is encoded by a sign table ``eps[h, g] = epsilon_h(g)``, a table
of cube roots of unity ``eta_g`` and a complex tensor ``A[g, h, k] = A_g(h, k)``,
all indexed by positions of group elements in canonical order.  The dimension
of the generating object is the positive root of ``d^2 = 1 + |G| d``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .abelian import FiniteAbelianGroup, GroupElem, RootOfUnity, enumerate_two_torsion

__all__ = [
    "MissingEntry",
    "InconsistentCocycle",
    "ParseError",
    "ShapeMismatch",
    "EpsilonTable",
    "EtaTable",
    "CategoryData",
    "AxiomReport",
    "AXIOMS",
    "dimension",
    "verify_axioms",
    "epsilon_from_bicharacter",
    "epsilon_from_generator",
    "axiom_residuals",
    "load_category",
    "save_category",
    "tensor_to_json",
    "tensor_from_json",
]

DEFAULT_TOL = 1e-8

AXIOMS = ("eps_cocycle", "eta_periodic", "row_sum", "orthogonality", "sign_shift", "hermitian", "rotation", "shift_left", "shift_right", "cubic")


class MissingEntry(ValueError):
    """The A tensor is absent, has the wrong shape or contains NaNs."""


class InconsistentCocycle(ValueError):
    """No sign table with the requested restrictions satisfies the cocycle law."""


class ParseError(ValueError):
    pass


class ShapeMismatch(ValueError):
    pass


def dimension(G: FiniteAbelianGroup | int) -> float:
    """Perron-Frobenius dimension ``(n + sqrt(n^2 + 4)) / 2`` for ``n = |G|``."""
    n = G if isinstance(G, int) else G.order
    return (n + math.sqrt(n * n + 4)) / 2


@dataclass(frozen=True)
class EpsilonTable:
    """Signs ``epsilon_h(g)`` stored as ``values[h, g]`` (int8, entries +-1)."""

    group: FiniteAbelianGroup
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=np.int8)
        n = self.group.order
        if v.shape != (n, n):
            raise ShapeMismatch(f"epsilon table must be {n}x{n}, got {v.shape}")
        if not np.all(np.abs(v) == 1):
            raise ValueError("epsilon entries must be +1 or -1")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def trivial(cls, G: FiniteAbelianGroup) -> EpsilonTable:
        return cls(G, np.ones((G.order, G.order), dtype=np.int8))

    def __call__(self, h, g) -> int:
        G = self.group
        return int(self.values[G.index(h), G.index(g)])

    def __eq__(self, other) -> bool:
        return (isinstance(other, EpsilonTable) and self.group == other.group
                and np.array_equal(self.values, other.values))

    def __hash__(self) -> int:
        return hash((self.group, self.values.tobytes()))

    def cocycle_violations(self) -> int:
        """Number of ``(h, k, g)`` violating the cocycle law, plus the
        number of ``h`` with ``epsilon_h(0) != 1``."""
        G = self.group
        E = self.values.astype(np.int64)
        add = G.add_table
        dbl = add[np.arange(G.order), np.arange(G.order)]
        h, k, g = np.indices((G.order,) * 3)
        lhs = E[add[h, k], g]
        rhs = E[h, g] * E[k, add[g, dbl[h]]]
        return int(np.count_nonzero(lhs != rhs) + np.count_nonzero(E[:, 0] != 1))

    def trivially_acting(self) -> list[GroupElem]:
        """Nonzero ``h`` with ``epsilon_h`` identically 1."""
        G = self.group
        return [h for i, h in enumerate(G.elements) if i and np.all(self.values[i] == 1)]

    def is_bicharacter_on_two_torsion(self) -> bool:
        """Whether ``(k, g) -> epsilon_k(g)`` is multiplicative in both slots on ``G_2 x G``."""
        G = self.group
        g2 = enumerate_two_torsion(G)
        for k in g2:
            for g in G.elements:
                for h in G.elements:
                    if self(k, G.add(g, h)) != self(k, g) * self(k, h):
                        return False
            for k2 in g2:
                for g in G.elements:
                    if self(G.add(k, k2), g) != self(k, g) * self(k2, g):
                        return False
        return True


@dataclass(frozen=True)
class EtaTable:
    """``eta_g = exp(2 pi i e_g / 3)`` stored as the exponents ``e_g`` in {0, 1, 2}."""

    group: FiniteAbelianGroup
    exponents: tuple[int, ...]

    def __post_init__(self):
        ex = tuple(int(e) % 3 for e in self.exponents)
        if len(ex) != self.group.order:
            raise ShapeMismatch(f"eta needs {self.group.order} entries, got {len(ex)}")
        object.__setattr__(self, "exponents", ex)

    @classmethod
    def trivial(cls, G: FiniteAbelianGroup) -> EtaTable:
        return cls(G, (0,) * G.order)

    def __call__(self, g) -> RootOfUnity:
        return RootOfUnity(Fraction(self.exponents[self.group.index(g)], 3))

    def root(self, i: int) -> RootOfUnity:
        return RootOfUnity(Fraction(self.exponents[i], 3))

    def is_trivial(self) -> bool:
        return not any(self.exponents)

    @property
    def complex_values(self) -> np.ndarray:
        return np.exp(2j * np.pi * np.asarray(self.exponents) / 3)

    def periodicity_violations(self) -> int:
        """Number of ``(g, h)`` with ``eta_{g+2h} != eta_g``."""
        G = self.group
        e = np.asarray(self.exponents)
        add = G.add_table
        dbl = add[np.arange(G.order), np.arange(G.order)]
        g, h = np.indices((G.order, G.order))
        return int(np.count_nonzero(e[add[g, dbl[h]]] != e[g]))


@dataclass(frozen=True)
class CategoryData:
    """Structure constants of a (possibly degenerate) generalized Haagerup category.

    ``a_tensor`` may be None when only the exact tables are known (the extension
    checks then skip the A relation).
    """

    group: FiniteAbelianGroup
    eps: EpsilonTable
    eta: EtaTable = None
    a_tensor: np.ndarray | None = None
    dim: float = None

    def __post_init__(self):
        if self.eta is None:
            object.__setattr__(self, "eta", EtaTable.trivial(self.group))
        if self.dim is None:
            object.__setattr__(self, "dim", dimension(self.group))
        if self.a_tensor is not None:
            a = np.array(self.a_tensor, dtype=complex)
            n = self.group.order
            if a.shape != (n, n, n):
                raise ShapeMismatch(f"A must have shape {(n, n, n)}, got {a.shape}")
            a.setflags(write=False)
            object.__setattr__(self, "a_tensor", a)

    @property
    def degenerate_elements(self) -> list[GroupElem]:
        return self.eps.trivially_acting()

    @property
    def is_degenerate(self) -> bool:
        return bool(self.degenerate_elements)

    def with_tensor(self, a_tensor: np.ndarray | None) -> CategoryData:
        return CategoryData(self.group, self.eps, self.eta, a_tensor, self.dim)


@dataclass
class AxiomReport:
    residuals: dict[str, float]
    tol: float
    passed: bool
    derived: dict[str, float] = field(default_factory=dict)

    def failing(self) -> list[str]:
        return [k for k, v in self.residuals.items() if not v <= self.tol]

    def summary(self) -> str:
        lines = [f"{k:>5}: {v:.3e}" for k, v in self.residuals.items()]
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'} (tol={self.tol:g})")
        return "\n".join(lines)


def _tables(c: CategoryData):
    G = c.group
    n = G.order
    add, neg, sub = G.add_table, G.neg_table, G.sub_table
    dbl = add[np.arange(n), np.arange(n)]
    return n, add, neg, sub, dbl


def axiom_residuals(c: CategoryData) -> dict[str, float]:
    """Maximum absolute residual of every axiom (A must be present).

    The sign and cube-root conditions are compared exactly; their residual is
    0.0 or the size of the largest violation.
    """
    A = c.a_tensor
    if A is None:
        raise MissingEntry("no A tensor loaded")
    if not np.all(np.isfinite(A)):
        raise MissingEntry("A tensor contains non-finite entries")
    n, add, neg, sub, dbl = _tables(c)
    E = c.eps.values.astype(float)
    Y = c.eta.complex_values
    Yc = Y.conj()
    ex = np.asarray(c.eta.exponents)
    d = c.dim
    res = {}

    h, k, g = np.indices((n, n, n))
    cocycle = np.abs(E[add[h, k], g] - E[h, g] * E[k, add[g, dbl[h]]])
    res["eps_cocycle"] = float(max(cocycle.max(), np.abs(E[:, 0] - 1).max()))
    gg, hh = np.indices((n, n))
    res["eta_periodic"] = float(np.abs(Y[add[gg, dbl[hh]]] - Y[gg]).max()) if np.any(ex[add[gg, dbl[hh]]] != ex[gg]) else 0.0

    res["row_sum"] = float(np.abs(A[:, :, 0].sum(axis=1) + Yc / d).max())

    gi, hi, ki = np.indices((n, n, n))
    B = A[gi, sub[hi, gi], ki]
    S = np.einsum("ghk,Ghk->gGk", B, B.conj())
    target = np.eye(n)[:, :, None] - (Yc[:, None] * Y[None, :] / d)[:, :, None] * (np.arange(n) == 0)[None, None, :]
    res["orthogonality"] = float(np.abs(S - target).max())

    g, h, p, q = np.indices((n,) * 4)
    sign = E[h, g] * E[h, add[g, p]] * E[h, add[g, q]] * E[h, add[add[g, p], q]]
    res["sign_shift"] = float(np.abs(A[add[g, dbl[h]], p, q] - sign * A[g, p, q]).max())

    res["hermitian"] = float(np.abs(A - A.transpose(0, 2, 1).conj()).max())

    g, h, k = np.indices((n, n, n))
    mk, mh = neg[k], neg[h]
    gh, gk, ghk = add[g, h], add[g, k], add[add[g, h], k]
    rot_a = A[g, mk, sub[h, k]] * Y[g] * E[mk, gh] * E[mk, gk] * E[mk, ghk]
    rot_b = A[g, sub[k, h], mh] * Yc[g] * E[mh, gh] * E[mh, gk] * E[mh, ghk]
    res["rotation"] = float(max(np.abs(A - rot_a).max(), np.abs(A - rot_b).max()))
    left = A[gh, h, k] * Y[g] * Y[gk] * Yc[gh] * Yc[ghk] * E[h, g] * E[h, gk]
    res["shift_left"] = float(np.abs(A - left).max())
    right = A[gk, h, k] * Yc[g] * Yc[gh] * Y[gk] * Y[ghk] * E[k, g] * E[k, gh]
    res["shift_right"] = float(np.abs(A - right).max())

    res["cubic"] = float(np.abs(_cubic_lhs(c) - _cubic_rhs(c)).max())
    return res


def _cubic_lhs(c: CategoryData) -> np.ndarray:
    A = c.a_tensor
    n, add, neg, sub, dbl = _tables(c)
    g, p, q, x, y = np.indices((n,) * 5)
    out = np.zeros((n,) * 5, dtype=complex)
    xy = add[x, y]
    i1 = add[sub[g, p], x]
    i2 = add[sub[g, q], xy]
    for l in range(n):
        out += A[g, xy, l] * A[i1, neg[x], add[l, p]] * A[i2, neg[y], add[l, q]]
    return out


def _cubic_rhs(c: CategoryData) -> np.ndarray:
    A = c.a_tensor
    n, add, neg, sub, dbl = _tables(c)
    E = c.eps.values.astype(float)
    Y = c.eta.complex_values
    g, p, q, x, y = np.indices((n,) * 5)
    xy = add[x, y]
    px = add[p, x]
    qy = add[q, y]
    term = A[g, px, add[q, xy]] * A[sub[g, p], qy, add[px, y]]
    etas = (Y[g] * Y[add[add[g, q], x]] * Y[add[add[g, p], qy]]
            * np.conj(Y[add[g, p]] * Y[add[g, xy]] * Y[add[add[g, q], xy]]))
    signs = (E[p, add[sub[g, p], x]] * E[px, add[sub[g, p], qy]]
             * E[q, add[sub[g, q], xy]] * E[qy, add[sub[g, q], x]])
    delta = ((x == 0) & (y == 0)) / c.dim * Y[g] * Y[add[g, p]] * Y[add[g, q]]
    return term * etas * signs - delta


def verify_axioms(c: CategoryData, tol: float = DEFAULT_TOL) -> AxiomReport:
    """Check the full axiom system and report per-equation residuals.

    Passes iff every residual is at most ``tol``.  The derived row ``orthogonality_norm``
    records ``max_g |sum_h |A_g(h-g,0)|^2 - (1 - 1/d)|``.
    """
    res = axiom_residuals(c)
    A = c.a_tensor
    n, add, neg, sub, dbl = _tables(c)
    norms = np.array([sum(abs(A[g, sub[h, g], 0]) ** 2 for h in range(n)) for g in range(n)])
    derived = {"orthogonality_norm": float(np.abs(norms - (1 - 1 / c.dim)).max())}
    passed = all(v <= tol for v in res.values())
    return AxiomReport(res, tol, passed, derived)


# -- sign tables from bicharacters -------------------------------------------------

def _gf2_solve(rows: list[tuple[int, int]], nvars: int) -> int | None:
    """Solve a GF(2) system given as (bitmask, rhs) rows; free variables are 0.

    Returns the solution as a bitmask, or None if inconsistent.
    """
    pivots: dict[int, tuple[int, int]] = {}
    for mask, rhs in rows:
        for col, (pmask, prhs) in pivots.items():
            if mask >> col & 1:
                mask ^= pmask
                rhs ^= prhs
        if mask == 0:
            if rhs:
                return None
            continue
        col = mask.bit_length() - 1
        for c2, (pm, pr) in list(pivots.items()):
            if pm >> col & 1:
                pivots[c2] = (pm ^ mask, pr ^ rhs)
        pivots[col] = (mask, rhs)
    sol = 0
    # each pivot row is reduced w.r.t. the other pivots, so with free vars = 0
    # the pivot variable equals the row's rhs
    for col, (mask, rhs) in pivots.items():
        if rhs:
            sol |= 1 << col
    return sol


def epsilon_from_bicharacter(
    G: FiniteAbelianGroup,
    table_on_G2xG: Mapping[tuple[GroupElem, GroupElem], int] | np.ndarray,
    extra: Iterable[tuple[Sequence[tuple[GroupElem, GroupElem]], int]] = (),
) -> EpsilonTable:
    """Extend signs given on ``G_2 x G`` to a full table obeying the cocycle law.

    ``table_on_G2xG`` maps ``(k, g)`` with ``2k = 0`` to ``epsilon_k(g)``; an
    ``|G_2| x |G|`` array (rows in canonical order of ``G_2``) is accepted too.
    ``extra`` holds further product constraints
    ``prod epsilon_h(g) over the listed (h, g) == sign``.

    The constraints are linear over GF(2); among all solutions the one with
    every free entry equal to +1 is returned.

    Raises
    ------
    InconsistentCocycle
        If no table satisfies all constraints.
    """
    n = G.order
    g2 = enumerate_two_torsion(G)
    if isinstance(table_on_G2xG, np.ndarray) or (isinstance(table_on_G2xG, (list, tuple))):
        arr = np.asarray(table_on_G2xG)
        if arr.shape != (len(g2), n):
            raise ShapeMismatch(f"expected a {len(g2)}x{n} table on G2 x G, got {arr.shape}")
        given = {(k, g): int(arr[i, j]) for i, k in enumerate(g2) for j, g in enumerate(G.elements)}
    else:
        given = {(G.element(k), G.element(g)): int(v) for (k, g), v in table_on_G2xG.items()}

    def var(h, g) -> int:
        return G.index(h) * n + G.index(g)

    add = G.add_table
    dbl = add[np.arange(n), np.arange(n)]
    rows = []
    for h in range(n):
        rows.append((1 << (h * n), 0))
        for k in range(n):
            for g in range(n):
                mask = (1 << int(add[h, k] * n + g)) ^ (1 << (h * n + g)) ^ (1 << int(k * n + add[g, dbl[h]]))
                rows.append((mask, 0))
    for (k, g), v in given.items():
        if v not in (1, -1):
            raise ValueError(f"sign expected, got {v}")
        rows.append((1 << var(k, g), int(v == -1)))
    for pairs, sign in extra:
        mask = 0
        for h, g in pairs:
            mask ^= 1 << var(h, g)
        rows.append((mask, int(sign == -1)))
    sol = _gf2_solve(rows, n * n)
    if sol is None:
        raise InconsistentCocycle("no sign table satisfies the cocycle law with these values")
    vals = np.array([[-1 if sol >> (h * n + g) & 1 else 1 for g in range(n)] for h in range(n)],
                    dtype=np.int8)
    return EpsilonTable(G, vals)


def epsilon_from_generator(G: FiniteAbelianGroup, eps_one: Sequence[int]) -> EpsilonTable:
    """For cyclic ``G``: the table generated by ``epsilon_1`` via the cocycle law,
    ``epsilon_h(g) = prod_{j<h} epsilon_1(g + 2j)``."""
    if G.rank != 1:
        raise ValueError("epsilon_from_generator needs a cyclic group")
    n = G.order
    vals = np.ones((n, n), dtype=np.int8)
    for h in range(1, n):
        for g in range(n):
            vals[h, g] = vals[h - 1, g] * eps_one[(g + 2 * (h - 1)) % n]
    table = EpsilonTable(G, vals)
    if table.cocycle_violations():
        raise InconsistentCocycle("epsilon_1 does not generate a consistent table")
    return table


# -- JSON --------------------------------------------------------------------------

def tensor_to_json(A: np.ndarray) -> list:
    """Nested ``[g][h*n + k] -> [re, im]``."""
    n = A.shape[0]
    return [[[float(z.real), float(z.imag)] for z in A[g].reshape(n * n)] for g in range(n)]


def tensor_from_json(obj, n: int) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ParseError(f"A is not a numeric array: {exc}") from exc
    if arr.shape[-1:] != (2,):
        raise ParseError("A entries must be [re, im] pairs")
    if arr.size // 2 != n ** 3:
        raise ShapeMismatch(f"A has {arr.size // 2} entries, expected |G|^3 = {n ** 3}")
    flat = arr.reshape(n ** 3, 2)
    return (flat[:, 0] + 1j * flat[:, 1]).reshape(n, n, n)


def category_to_json(c: CategoryData) -> dict:
    out = {
        "group": list(c.group.moduli),
        "epsilon": c.eps.values.astype(int).tolist(),
        "eta": list(c.eta.exponents),
        "d": c.dim,
    }
    if c.a_tensor is not None:
        out["A"] = tensor_to_json(c.a_tensor)
    return out


def category_from_json(obj: dict) -> CategoryData:
    try:
        G = FiniteAbelianGroup(obj["group"])
        eps = EpsilonTable(G, np.asarray(obj["epsilon"]))
        eta = EtaTable(G, obj.get("eta") or [0] * G.order)
    except KeyError as exc:
        raise ParseError(f"missing field {exc}") from exc
    A = tensor_from_json(obj["A"], G.order) if obj.get("A") is not None else None
    d = obj.get("d")
    if d is not None and abs(d - dimension(G)) > 1e-9:
        raise ParseError(f"d = {d} does not solve d^2 = 1 + |G| d")
    return CategoryData(G, eps, eta, A)


def save_category(c: CategoryData, path: str | Path, **extra) -> None:
    obj = category_to_json(c)
    obj.update(extra)
    Path(path).write_text(json.dumps(obj, indent=1))


def load_category(path: str | Path) -> CategoryData:
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return category_from_json(obj)
