"""Z_2-extension data ``(chi, mu, xi, nu, a)`` and its constraint system.

For a twist ``p`` outside ``2G`` and ``z`` in ``G_2``, the data is valid when

    nu_square       nu^2 = mu(p + z)
    xi_square       xi^2 = chi(p)
    mu_chi_square   mu(g)^2 = chi(g)^2
    mu_at_p         mu(p) = chi(p + z)
    a_normalized    a(0) = 1
    a_square        chi(g) = a(g)^2
    a_shift         a(h + 2g) = a(h) eps_g(h) eps_g(h - p) chi(g)
    mu_from_a       a(g) a(g - p) eps_{p+z}(g - 2p) xi = mu(g)
    a_inverse       a(g) a(-g) = eps_{-g}(g - p) eps_{-g}(g)
    tensor_shift    A_g(h, k) = a(g+h) a(g+k) conj(a(g+h+k) a(g)) A_{g-p}(h, k)

together with ``chi(k) = eps_k(p) = eps_k(-p)`` on ``G_2`` and
``eta_{g+p} = eta_g``.  All but ``tensor_shift`` only involve roots of unity
and are checked exactly, as integer exponents modulo ``N = root_order(G)``;
``tensor_shift`` is checked in floating point against A.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .abelian import (
    Character,
    FiniteAbelianGroup,
    GroupElem,
    RootOfUnity,
    enumerate_characters,
    enumerate_odd_part,
    enumerate_two_torsion,
    root_order,
)
from .category import CategoryData

log = logging.getLogger(__name__)

__all__ = [
    "ExtensionParams",
    "ExtensionData",
    "ConstraintReport",
    "MissingA",
    "EXACT_RELATIONS",
    "REDUCED_RELATIONS",
    "check_eta_periodicity",
    "check_extension_data",
    "check_reduced_system",
    "reduced_system_report",
    "search_extension_data",
    "brute_force_search",
    "all_params",
]

EXACT_RELATIONS = ("nu_square", "xi_square", "mu_chi_square", "mu_at_p", "a_normalized", "a_square", "a_shift", "mu_from_a", "a_inverse", "chi_two_torsion", "eta_p_periodic")
REDUCED_RELATIONS = ("r1", "r2", "r3", "r4", "r5", "r6", "r7", "r8")

TENSOR_TOL = 1e-8
SMALL_ENTRY = 1e-10


class MissingA(ValueError):
    """The A relation was requested but the category carries no tensor."""


@dataclass(frozen=True)
class ExtensionParams:
    """The twist ``p`` (not in ``2G``) and ``z`` (``2z = 0``)."""

    group: FiniteAbelianGroup
    p: GroupElem
    z: GroupElem

    def __post_init__(self):
        G = self.group
        p, z = G.element(self.p), G.element(self.z)
        if p not in enumerate_odd_part(G):
            raise ValueError(f"p = {p} lies in 2G")
        if G.mul(2, z) != G.zero:
            raise ValueError(f"z = {z} is not 2-torsion")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "z", z)


def all_params(G: FiniteAbelianGroup) -> list[ExtensionParams]:
    return [ExtensionParams(G, p, z) for p in enumerate_odd_part(G) for z in enumerate_two_torsion(G)]


@dataclass(frozen=True)
class ExtensionData:
    params: ExtensionParams
    chi: Character
    mu: Character
    xi: RootOfUnity
    nu: RootOfUnity
    a: tuple[RootOfUnity, ...]
    """``a[i]`` is ``a`` at the i-th element in canonical order."""

    def __post_init__(self):
        if len(self.a) != self.params.group.order:
            raise ValueError("a needs one value per group element")
        object.__setattr__(self, "a", tuple(self.a))

    @property
    def group(self) -> FiniteAbelianGroup:
        return self.params.group

    def a_at(self, g) -> RootOfUnity:
        return self.a[self.group.index(g)]

    def encode(self, N: int | None = None) -> tuple:
        """Exponent tuple ``(chi, mu, xi, nu, a)`` in ``mu_N``; used as sort key."""
        N = N or root_order(self.group)
        return (tuple(x.exponent(N) for x in self.chi.values),
                tuple(x.exponent(N) for x in self.mu.values),
                self.xi.exponent(N), self.nu.exponent(N),
                tuple(x.exponent(N) for x in self.a))

    def to_json(self) -> dict:
        N = root_order(self.group)
        return {
            "p": list(self.params.p),
            "z": list(self.params.z),
            "root_order": N,
            "chi": list(self.chi.exponents),
            "mu": list(self.mu.exponents),
            "xi": self.xi.exponent(N),
            "nu": self.nu.exponent(N),
            "a": [x.exponent(N) for x in self.a],
        }

    @classmethod
    def from_json(cls, G: FiniteAbelianGroup, obj: dict) -> ExtensionData:
        N = obj.get("root_order", root_order(G))
        params = ExtensionParams(G, tuple(obj["p"]), tuple(obj["z"]))
        return cls(params, Character(G, tuple(obj["chi"])), Character(G, tuple(obj["mu"])),
                   RootOfUnity.from_exponent(obj["xi"], N), RootOfUnity.from_exponent(obj["nu"], N),
                   tuple(RootOfUnity.from_exponent(x, N) for x in obj["a"]))

    @classmethod
    def from_exponents(cls, params: ExtensionParams, N: int, chi: Sequence[int], mu: Sequence[int],
                       xi: int, nu: int, a: Sequence[int]) -> ExtensionData:
        """Build from value exponents in ``mu_N`` (chi and mu must be characters)."""
        G = params.group
        chi_c = Character.from_values(G, [RootOfUnity.from_exponent(x, N) for x in chi])
        mu_c = Character.from_values(G, [RootOfUnity.from_exponent(x, N) for x in mu])
        if chi_c is None or mu_c is None:
            raise ValueError("chi and mu must be characters")
        return cls(params, chi_c, mu_c, RootOfUnity.from_exponent(xi, N),
                   RootOfUnity.from_exponent(nu, N), tuple(RootOfUnity.from_exponent(x, N) for x in a))


def _listify(x):
    return [_listify(y) for y in x] if isinstance(x, (tuple, list)) else x


@dataclass
class ConstraintReport:
    """Per-relation status.  Exact relations map to True/False; ``tensor_shift`` is None
    when no tensor was available."""

    status: dict[str, bool | None]
    witnesses: dict[str, list] = field(default_factory=dict)
    tensor_residual: float | None = None
    tensor_skipped: int = 0
    tol: float = TENSOR_TOL

    @property
    def exact_passed(self) -> bool:
        return all(v for k, v in self.status.items() if k != "tensor_shift")

    @property
    def passed(self) -> bool:
        return self.exact_passed and self.status.get("tensor_shift") is not False

    @property
    def first_failure(self) -> str | None:
        for k, v in self.status.items():
            if v is False:
                return k
        return None

    def to_json(self) -> dict:
        return {
            "status": {k: ("unchecked" if v is None else v) for k, v in self.status.items()},
            "witnesses": {k: [_listify(w) for w in ws] for k, ws in self.witnesses.items()},
            "tensor_residual": self.tensor_residual,
            "tensor_skipped": self.tensor_skipped,
            "passed": self.passed,
        }


# -- exact evaluation ----------------------------------------------------------

class _Exp:
    """Integer exponent tables (mod N) for one category and one data set."""

    def __init__(self, c: CategoryData, d: ExtensionData):
        G = c.group
        self.G = G
        self.N = N = root_order(G)
        self.n = G.order
        self.p = G.index(d.params.p)
        self.z = G.index(d.params.z)
        self.add, self.neg, self.sub = G.add_table, G.neg_table, G.sub_table
        self.E = np.where(c.eps.values < 0, N // 2, 0).astype(np.int64)
        self.a = np.array([x.exponent(N) for x in d.a], dtype=np.int64)
        self.chi = np.array([x.exponent(N) for x in d.chi.values], dtype=np.int64)
        self.mu = np.array([x.exponent(N) for x in d.mu.values], dtype=np.int64)
        self.xi = d.xi.exponent(N)
        self.nu = d.nu.exponent(N)
        self.eta = np.asarray(c.eta.exponents)


def _bad(x, N) -> np.ndarray:
    return np.asarray(x) % N != 0


def _exact_status(c: CategoryData, d: ExtensionData) -> tuple[dict[str, bool], dict[str, list]]:
    t = _Exp(c, d)
    G, N, n, p, z = t.G, t.N, t.n, t.p, t.z
    add, neg, sub, E, a, chi, mu = t.add, t.neg, t.sub, t.E, t.a, t.chi, t.mu
    el = G.elements
    g = np.arange(n)
    gi, hi = np.indices((n, n))
    dbl = add[g, g]
    pz = add[p, z]
    checks: dict[str, np.ndarray] = {
        "nu_square": _bad([2 * t.nu - mu[pz]], N),
        "xi_square": _bad([2 * t.xi - chi[p]], N),
        "mu_chi_square": _bad(2 * mu - 2 * chi, N),
        "mu_at_p": _bad([mu[p] - chi[pz]], N),
        "a_normalized": _bad([a[0]], N),
        "a_square": _bad(chi - 2 * a, N),
        # index [g, h]
        "a_shift": _bad(a[add[hi, dbl[gi]]] - a[hi] - E[gi, hi] - E[gi, sub[hi, p]] - chi[gi], N),
        "mu_from_a": _bad(a + a[sub[g, p]] + E[pz, sub[g, dbl[p]]] + t.xi - mu, N),
        "a_inverse": _bad(a + a[neg] - E[neg, sub[g, p]] - E[neg, g], N),
    }
    two = np.array([G.index(k) for k in enumerate_two_torsion(G)])
    checks["chi_two_torsion"] = _bad(chi[two] - E[two, p], N) | _bad(chi[two] - E[two, neg[p]], N)
    checks["eta_p_periodic"] = t.eta[add[g, p]] != t.eta
    status, wit = {}, {}
    for name, bad in checks.items():
        bad = np.atleast_1d(bad)
        status[name] = not bad.any()
        if bad.any():
            idx = np.argwhere(bad)
            if name in ("a_shift",):
                wit[name] = [(el[i], el[j]) for i, j in idx[:5]]
            elif name == "chi_two_torsion":
                wit[name] = [el[two[i]] for (i,) in idx[:5]]
            elif bad.shape == (n,):
                wit[name] = [el[i] for (i,) in idx[:5]]
            else:
                wit[name] = []
    return status, wit


def _tensor_phases(G: FiniteAbelianGroup, a: Sequence[RootOfUnity]) -> np.ndarray:
    """``F[g, h, k] = a(g+h) a(g+k) conj(a(g+h+k) a(g))`` as complex numbers."""
    n = G.order
    av = np.array([x.to_complex() for x in a])
    add = G.add_table
    g, h, k = np.indices((n, n, n))
    gh, gk = add[g, h], add[g, k]
    return av[gh] * av[gk] * np.conj(av[add[gh, k]] * av[g])


def _tensor_shift(c: CategoryData, d: ExtensionData) -> tuple[float, int]:
    A = c.a_tensor
    G = c.group
    p = G.index(d.params.p)
    shifted = A[G.sub_table[:, p]]
    F = _tensor_phases(G, d.a)
    small = (np.abs(A) < SMALL_ENTRY) & (np.abs(shifted) < SMALL_ENTRY)
    skipped = int(np.count_nonzero(small))
    if skipped:
        log.warning("tensor_shift: %d entries of A vanish and were skipped", skipped)
    res = np.abs(A - F * shifted)
    res[small] = 0.0
    return float(res.max()), skipped


def check_eta_periodicity(c: CategoryData, p) -> bool:
    """Whether ``eta_{g+p} = eta_g`` for every ``g``."""
    G = c.group
    e = np.asarray(c.eta.exponents)
    return bool(np.all(e[G.add_table[:, G.index(p)]] == e))


def check_extension_data(c: CategoryData, d: ExtensionData, tol: float = TENSOR_TOL,
                         require_a: bool = False) -> ConstraintReport:
    """Evaluate the exact relations and ``tensor_shift``
    against ``c.a_tensor``.

    Raises
    ------
    MissingA
        Only if ``require_a`` is set and the category has no tensor; otherwise
        ``tensor_shift`` is reported as unchecked.
    """
    if d.group != c.group:
        raise ValueError("data and category live on different groups")
    status, wit = _exact_status(c, d)
    report = ConstraintReport(status, wit, tol=tol)
    if c.a_tensor is None:
        if require_a:
            raise MissingA("tensor_shift needs an A tensor")
        status["tensor_shift"] = None
    else:
        report.tensor_residual, report.tensor_skipped = _tensor_shift(c, d)
        status["tensor_shift"] = report.tensor_residual <= tol
    return report


def reduced_system_report(c: CategoryData, d: ExtensionData, tol: float = TENSOR_TOL) -> dict[str, bool | None]:
    """Status of the reduced relations r1-r8:

        r1  nu^2 = mu(p + z)
        r2  xi = a(p) eps_{-p}(p)
        r3  chi = a^2
        r4  mu(g) = a(g) a(g-p) a(p) eps_{-p}(g) eps_{-p}(p) eps_z(g)
        r5  a(0) = 1
        r6  a(h+2g) / (a(h) a(2g)) = eps_g(h) eps_g(h-p) eps_g(0) eps_g(-p)
        r7  a(g) a(-g) = eps_{-g}(g-p) eps_{-g}(g)
        r8  tensor_shift
    """
    t = _Exp(c, d)
    N, n, p, z = t.N, t.n, t.p, t.z
    add, neg, sub, E, a, chi, mu = t.add, t.neg, t.sub, t.E, t.a, t.chi, t.mu
    g = np.arange(n)
    gi, hi = np.indices((n, n))
    dbl = add[g, g]
    mp = neg[p]
    out: dict[str, bool | None] = {
        "r1": not _bad([2 * t.nu - mu[add[p, z]]], N).any(),
        "r2": not _bad([t.xi - a[p] - E[mp, p]], N).any(),
        "r3": not _bad(chi - 2 * a, N).any(),
        "r4": not _bad(mu - a - a[sub[g, p]] - a[p] - E[mp, g] - E[mp, p] - E[z, g], N).any(),
        "r5": not _bad([a[0]], N).any(),
        "r6": not _bad(a[add[hi, dbl[gi]]] - a[hi] - a[dbl[gi]]
                       - E[gi, hi] - E[gi, sub[hi, p]] - E[gi, 0] - E[gi, mp], N).any(),
        "r7": not _bad(a + a[neg] - E[neg, sub[g, p]] - E[neg, g], N).any(),
    }
    out["r8"] = None if c.a_tensor is None else _tensor_shift(c, d)[0] <= tol
    return out


def check_reduced_system(c: CategoryData, d: ExtensionData, tol: float = TENSOR_TOL) -> bool:
    """Whether the reduced relations hold (r8 is skipped without a tensor)."""
    return all(v is not False for v in reduced_system_report(c, d, tol).values())


# -- search --------------------------------------------------------------------

def _sign_constraints(c: CategoryData, p: int, chi: np.ndarray, N: int):
    """``a_shift`` and ``a_inverse`` as ``sum coef * a[idx] == const (mod N)``,
    bucketed by the largest index involved."""
    G = c.group
    n = G.order
    add, neg, sub = G.add_table, G.neg_table, G.sub_table
    E = np.where(c.eps.values < 0, N // 2, 0)
    buckets: list[list[tuple[tuple[int, ...], tuple[int, ...], int]]] = [[] for _ in range(n)]

    def put(terms: dict[int, int], const: int):
        terms = {i: k for i, k in terms.items() if k % N}
        if not terms:
            buckets[0].append(((0,), (0,), const % N))
            return
        idx = tuple(terms)
        buckets[max(idx)].append((idx, tuple(terms[i] for i in idx), const % N))

    for g in range(n):
        for h in range(n):
            t = add[h, add[g, g]]
            terms: dict[int, int] = {}
            terms[t] = terms.get(t, 0) + 1
            terms[h] = terms.get(h, 0) - 1
            put(terms, int(E[g, h] + E[g, sub[h, p]] + chi[g]))
        terms = {}
        terms[g] = terms.get(g, 0) + 1
        terms[neg[g]] = terms.get(neg[g], 0) + 1
        put(terms, int(E[neg[g], sub[g, p]] + E[neg[g], g]))
    return buckets


def _sign_patterns(c: CategoryData, p: int, chi: np.ndarray, N: int) -> Iterable[np.ndarray]:
    """All ``a`` with ``a^2 = chi``, ``a(0) = 1`` obeying ``a_shift`` and ``a_inverse``, by depth-first search."""
    n = c.group.order
    buckets = _sign_constraints(c, p, chi, N)
    a = np.zeros(n, dtype=np.int64)
    half = chi // 2

    def ok(i: int) -> bool:
        for idx, coefs, const in buckets[i]:
            if sum(k * a[j] for j, k in zip(idx, coefs)) % N != const:
                return False
        return True

    def rec(i: int):
        if i == n:
            yield a.copy()
            return
        for s in ((0,) if i == 0 else (0, N // 2)):
            a[i] = (half[i] + s) % N
            if ok(i):
                yield from rec(i + 1)

    if chi[0] % N:
        return
    yield from rec(0)


def _roots(x: int, N: int) -> tuple[int, int]:
    if x % 2:
        raise ValueError("value has no square root in mu_N")
    return (x // 2) % N, (x // 2 + N // 2) % N


def search_extension_data(c: CategoryData, params: ExtensionParams, use_a: bool = True,
                          tol: float = TENSOR_TOL) -> list[ExtensionData]:
    """Every extension data set for ``params``, sorted by exponent encoding.

    The search runs over characters ``chi``, the square roots ``a(g)`` of
    ``chi(g)`` (pruned by ``a_shift`` and ``a_inverse``), the two roots ``xi`` of ``chi(p)``,
    ``mu`` read off from ``mu_from_a``, and the two roots ``nu`` of ``mu(p + z)``.  Each
    candidate is then checked against all exact relations and, when the
    category has a tensor and ``use_a`` is set, against ``tensor_shift`` at ``tol``.
    Without a tensor the result is the unfiltered solution set of the exact relations.
    """
    G = c.group
    if params.group != G:
        raise ValueError("params belong to a different group")
    if not check_eta_periodicity(c, params.p):
        return []
    N = root_order(G)
    n = G.order
    p, z = G.index(params.p), G.index(params.z)
    sub, add = G.sub_table, G.add_table
    E = np.where(c.eps.values < 0, N // 2, 0)
    two = [G.index(k) for k in enumerate_two_torsion(G)]
    filter_a = use_a and c.a_tensor is not None
    if use_a and c.a_tensor is None:
        log.warning("no A tensor: tensor_shift not applied, results are unfiltered")
    g = np.arange(n)
    pz = add[p, z]
    out: list[ExtensionData] = []
    for chi_c in enumerate_characters(G):
        chi = np.array([x.exponent(N) for x in chi_c.values], dtype=np.int64)
        if any((chi[k] - E[k, p]) % N for k in two):
            continue
        for a in _sign_patterns(c, p, chi, N):
            for xi in _roots(int(chi[p]), N):
                mu = (a + a[sub[g, p]] + E[pz, sub[g, add[p, p]]] + xi) % N
                mu_c = Character.from_values(G, [RootOfUnity.from_exponent(int(x), N) for x in mu])
                if mu_c is None or mu[pz] % 2:
                    continue
                for nu in _roots(int(mu[pz]), N):
                    d = ExtensionData(params, chi_c, mu_c, RootOfUnity.from_exponent(xi, N),
                                      RootOfUnity.from_exponent(nu, N),
                                      tuple(RootOfUnity.from_exponent(int(x), N) for x in a))
                    status, _ = _exact_status(c, d)
                    if not all(status.values()):
                        continue
                    if filter_a and _tensor_shift(c, d)[0] > tol:
                        continue
                    out.append(d)
    out.sort(key=lambda d: d.encode(N))
    return out


def brute_force_search(c: CategoryData, params: ExtensionParams, use_a: bool = True,
                       tol: float = TENSOR_TOL, max_maps: int = 5_000_000) -> list[ExtensionData]:
    """Reference enumeration over all maps ``a: G -> mu_N`` with ``a(0) = 1``
    and all ``xi, nu`` in ``mu_N``, checked directly against every relation.

    Only feasible for tiny groups; ``max_maps`` guards against accidental use.
    """
    G = c.group
    N = root_order(G)
    n = G.order
    total = N ** (n - 1)
    if total > max_maps:
        raise ValueError(f"{total} maps exceed max_maps={max_maps}")
    if not check_eta_periodicity(c, params.p):
        return []
    add, sub, neg = G.add_table, G.sub_table, G.neg_table
    p, z = G.index(params.p), G.index(params.z)
    E = np.where(c.eps.values < 0, N // 2, 0).astype(np.int64)
    cols = np.indices((N,) * (n - 1), dtype=np.int32).reshape(n - 1, -1).T if n > 1 else np.empty((1, 0), np.int32)
    A = np.concatenate([np.zeros((cols.shape[0], 1), dtype=np.int32), cols], axis=1).astype(np.int64)
    chi = (2 * A) % N
    gi, hi = np.indices((n, n))
    # chi must be a character
    keep = np.all((chi[:, add[gi, hi]] - chi[:, gi] - chi[:, hi]) % N == 0, axis=(1, 2))
    A, chi = A[keep], chi[keep]
    dbl = add[np.arange(n), np.arange(n)]
    r19 = A[:, add[hi, dbl[gi]]] - A[:, hi] - E[gi, hi] - E[gi, sub[hi, p]] - chi[:, gi]
    keep = np.all(r19 % N == 0, axis=(1, 2))
    g = np.arange(n)
    r21 = A + A[:, neg] - E[neg, sub[g, p]] - E[neg, g]
    keep &= np.all(r21 % N == 0, axis=1)
    A, chi = A[keep], chi[keep]
    pz = add[p, z]
    out = []
    for a, ch in zip(A, chi):
        chi_c = Character.from_values(G, [RootOfUnity.from_exponent(int(x), N) for x in ch])
        for xi in range(N):
            if (2 * xi - ch[p]) % N:
                continue
            mu = (a + a[sub[g, p]] + E[pz, sub[g, add[p, p]]] + xi) % N
            mu_c = Character.from_values(G, [RootOfUnity.from_exponent(int(x), N) for x in mu])
            if mu_c is None:
                continue
            for nu in range(N):
                if (2 * nu - mu[pz]) % N:
                    continue
                d = ExtensionData(params, chi_c, mu_c, RootOfUnity.from_exponent(xi, N),
                                  RootOfUnity.from_exponent(nu, N),
                                  tuple(RootOfUnity.from_exponent(int(x), N) for x in a))
                rep = check_extension_data(c, d, tol) if use_a else None
                status = rep.status if rep else _exact_status(c, d)[0]
                if all(v is not False for v in status.values()):
                    out.append(d)
    out.sort(key=lambda d: d.encode(N))
    return out
