"""Numerical solution of the A-tensor equations for fixed (epsilon, eta).

The symmetry relations (translation by ``2h``, Hermitian symmetry, rotation and
the two shift relations) are enforced structurally: the tensor is rebuilt from
one complex value per orbit of index triples.  The remaining equations (the
row sum, the orthogonality relations and the cubic identity) are minimized by a
damped Gauss-Newton (Levenberg) iteration from random starting points.

All equations are polynomials in the entries of A and their conjugates.  They
are compiled once into monomial tables (coefficient, up to three factor
indices) so that residuals and exact Jacobians are cheap vectorized gathers.
"""

from __future__ import annotations

import json
import logging
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .abelian import FiniteAbelianGroup, RootOfUnity, ONE
from .category import (
    EpsilonTable,
    EtaTable,
    ParseError,
    ShapeMismatch,
    dimension,
    tensor_from_json,
    tensor_to_json,
)

log = logging.getLogger(__name__)

__all__ = [
    "SolveConfig",
    "SymmetryOrbits",
    "PhaseConflict",
    "NoConvergence",
    "PolynomialSystem",
    "build_orbits",
    "build_system",
    "solve_A",
    "load_A",
    "save_A",
    "reconstruct",
]


class PhaseConflict(ValueError):
    """Two chains of symmetry relations assign different phases to one entry."""


class NoConvergence(RuntimeError):
    """Raised only on request; :func:`solve_A` normally returns an empty list."""


@dataclass(frozen=True)
class SolveConfig:
    restarts: int = 50
    max_iter: int = 200
    convergence_tol: float = 1e-10
    seed: int = 42
    damping: float = 1e-3
    dedup_tol: float = 1e-6
    threads: int | None = None

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if not self.convergence_tol > 0:
            raise ValueError("convergence_tol must be positive")


@dataclass
class SymmetryOrbits:
    """Orbit decomposition of ``G^3`` under the symmetry relations of A.

    For each triple ``t`` (flat index ``g*n*n + h*n + k``): ``A[t] = phase[t] *
    X[rep_of[t]]``, or ``phase[t] * conj(X[...])`` when ``conj[t]`` is set.  Orbits
    whose value is forced onto a line ``X = line[o] * y`` with ``y`` real are
    listed in ``line``.
    """

    group: FiniteAbelianGroup
    representatives: list[tuple[int, int, int]]
    rep_of: np.ndarray
    phase: list[RootOfUnity]
    conj: np.ndarray
    line: dict[int, RootOfUnity] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.representatives)

    def is_real(self, orbit: int) -> bool:
        return orbit in self.line

    def linear_map(self) -> tuple[np.ndarray, list[tuple[int, str]]]:
        """Complex matrix ``M`` with ``A.ravel() = M @ v`` for the real parameter
        vector ``v``, plus a label ``(orbit, 're'|'im'|'line')`` per column."""
        labels: list[tuple[int, str]] = []
        col_of: dict[int, int] = {}
        for o in range(self.count):
            col_of[o] = len(labels)
            if o in self.line:
                labels.append((o, "line"))
            else:
                labels.extend([(o, "re"), (o, "im")])
        M = np.zeros((len(self.rep_of), len(labels)), dtype=complex)
        for t, o in enumerate(self.rep_of):
            ph = self.phase[t].to_complex()
            c = col_of[o]
            if o in self.line:
                w = self.line[o].to_complex()
                M[t, c] = ph * (np.conj(w) if self.conj[t] else w)
            else:
                M[t, c] = ph
                M[t, c + 1] = -1j * ph if self.conj[t] else 1j * ph
        return M, labels


def _relations(G: FiniteAbelianGroup, eps: EpsilonTable, eta: EtaTable):
    """Yield ``(t, t2, c, flip)`` meaning ``A[t] = c * A[t2]`` (or ``c * conj(A[t2])``)."""
    n = G.order
    add, neg, sub = G.add_table, G.neg_table, G.sub_table
    dbl = add[np.arange(n), np.arange(n)]
    E = eps.values
    eta_r = [eta.root(i) for i in range(n)]

    def flat(g, h, k):
        return (int(g) * n + int(h)) * n + int(k)

    def sgn(*ss):
        return RootOfUnity.sign(int(np.prod([int(s) for s in ss])))

    for g in range(n):
        for h in range(n):
            for k in range(n):
                t = flat(g, h, k)
                gh, gk, ghk = add[g, h], add[g, k], add[add[g, h], k]
                for s in range(n):
                    c = sgn(E[s, g], E[s, add[g, h]], E[s, add[g, k]], E[s, ghk])
                    # A_{g+2s}(h,k) = c A_g(h,k)
                    yield flat(add[g, dbl[s]], h, k), t, c, False
                yield t, flat(g, k, h), ONE, True
                mk, mh = neg[k], neg[h]
                yield t, flat(g, mk, sub[h, k]), eta_r[g] * sgn(E[mk, gh], E[mk, gk], E[mk, ghk]), False
                yield t, flat(g, sub[k, h], mh), eta_r[g].inverse() * sgn(E[mh, gh], E[mh, gk], E[mh, ghk]), False
                yield (t, flat(gh, h, k),
                       eta_r[g] * eta_r[gk] / (eta_r[gh] * eta_r[ghk]) * sgn(E[h, g], E[h, gk]), False)
                yield (t, flat(gk, h, k),
                       eta_r[gk] * eta_r[ghk] / (eta_r[g] * eta_r[gh]) * sgn(E[k, g], E[k, gh]), False)


def build_orbits(G: FiniteAbelianGroup, eps: EpsilonTable, eta: EtaTable | None = None) -> SymmetryOrbits:
    """Close ``G^3`` under the symmetry relations, tracking exact phases.

    Raises
    ------
    PhaseConflict
        If some entry would be forced to vanish because two relation chains give
        it different phases (inconsistent epsilon/eta input).
    """
    eta = eta or EtaTable.trivial(G)
    n = G.order
    N = n ** 3
    adj: list[list[tuple[int, RootOfUnity, bool]]] = [[] for _ in range(N)]
    for t, t2, c, flip in _relations(G, eps, eta):
        # A[t] = c A[t2] gives A[t2] = c^-1 A[t]; A[t] = c conj(A[t2]) gives A[t2] = c conj(A[t])
        adj[t2].append((t, c, flip))
        adj[t].append((t2, c if flip else c.inverse(), flip))

    rep_of = np.full(N, -1, dtype=np.intp)
    phase: list[RootOfUnity | None] = [None] * N
    conj = np.zeros(N, dtype=bool)
    reps: list[tuple[int, int, int]] = []
    line: dict[int, RootOfUnity] = {}
    for start in range(N):
        if rep_of[start] >= 0:
            continue
        o = len(reps)
        reps.append((start // (n * n), start // n % n, start % n))
        rep_of[start] = o
        phase[start] = ONE
        self_conj: RootOfUnity | None = None
        queue = deque([start])
        while queue:
            t = queue.popleft()
            for t2, c, flip in adj[t]:
                # value of A[t2] in terms of A[t]: A[t2] = c * A[t] or c * conj(A[t])
                ph = c * (phase[t].conjugate() if flip else phase[t])
                cj = bool(conj[t]) ^ flip
                if rep_of[t2] < 0:
                    rep_of[t2] = o
                    phase[t2] = ph
                    conj[t2] = cj
                    queue.append(t2)
                    continue
                if cj == conj[t2]:
                    if ph != phase[t2]:
                        g, h, k = t2 // (n * n), t2 // n % n, t2 % n
                        raise PhaseConflict(
                            f"A at {(G.elements[g], G.elements[h], G.elements[k])} gets phases "
                            f"{phase[t2]} and {ph}; the orbit would have to vanish")
                else:
                    # ph * X^a == phase[t2] * X^b with a != b: X = r * conj(X)
                    r = phase[t2] / ph if conj[t2] else ph / phase[t2]
                    if self_conj is None:
                        self_conj = r
                    elif self_conj != r:
                        raise PhaseConflict(f"orbit {o} is forced to zero by conflicting reality conditions")
        if self_conj is not None:
            # X = r conj(X)  <=>  X = w * y, y real, w^2 = r
            line[o] = RootOfUnity(self_conj.turn / 2)
    return SymmetryOrbits(G, reps, rep_of, phase, conj, line)


def reconstruct(orbits: SymmetryOrbits, values: np.ndarray) -> np.ndarray:
    """Full tensor from one complex value per orbit (line orbits are projected)."""
    n = orbits.group.order
    vals = np.asarray(values, dtype=complex).copy()
    for o, w in orbits.line.items():
        wc = w.to_complex()
        vals[o] = wc * (np.conj(wc) * vals[o]).real
    ph = np.array([p.to_complex() for p in orbits.phase])
    x = vals[orbits.rep_of]
    x = np.where(orbits.conj, np.conj(x), x)
    return (ph * x).reshape(n, n, n)


# -- polynomial system ---------------------------------------------------------------

@dataclass
class PolynomialSystem:
    """Equations ``sum_m coef[m] * prod_j Z[idx[m, j]] + const[e] = 0``.

    ``Z = [A.ravel(), conj(A.ravel()), 1]``; unused factor slots point at the
    trailing constant 1.
    """

    n: int
    eq: np.ndarray
    coef: np.ndarray
    idx: np.ndarray
    const: np.ndarray
    labels: list[tuple[str, int]]

    @property
    def n_equations(self) -> int:
        return len(self.const)

    def extended(self, A: np.ndarray) -> np.ndarray:
        a = A.ravel()
        return np.concatenate([a, a.conj(), [1.0]])

    def residual(self, A: np.ndarray) -> np.ndarray:
        Z = self.extended(A)
        vals = self.coef * Z[self.idx].prod(axis=1)
        r = np.zeros(self.n_equations, dtype=complex)
        np.add.at(r, self.eq, vals)
        return r + self.const

    def residual_by_label(self, A: np.ndarray) -> dict[str, float]:
        r = np.abs(self.residual(A))
        out: dict[str, float] = {}
        start = 0
        for name, stop in self.labels:
            out[name] = float(r[start:stop].max()) if stop > start else 0.0
            start = stop
        return out


class _Builder:
    def __init__(self, n: int):
        self.n = n
        self.n3 = n ** 3
        self.one = 2 * self.n3
        self.eq: list[np.ndarray] = []
        self.coef: list[np.ndarray] = []
        self.idx: list[np.ndarray] = []
        self.const: list[np.ndarray] = []
        self.neq = 0
        self.labels: list[tuple[str, int]] = []

    def a(self, g, h, k):
        return (np.asarray(g) * self.n + h) * self.n + k

    def abar(self, g, h, k):
        return self.a(g, h, k) + self.n3

    def terms(self, eq, coef, *factors):
        eq, coef, *factors = np.broadcast_arrays(eq, coef, *factors)
        cols = [f.ravel() for f in factors]
        while len(cols) < 3:
            cols.append(np.full(eq.size, self.one))
        self.eq.append(eq.ravel() + self.neq)
        self.coef.append(coef.ravel().astype(complex))
        self.idx.append(np.stack(cols, axis=1))

    def close(self, name, const):
        const = np.asarray(const, dtype=complex).ravel()
        self.const.append(const)
        self.neq += const.size
        self.labels.append((name, self.neq))

    def build(self) -> PolynomialSystem:
        return PolynomialSystem(
            self.n,
            np.concatenate(self.eq).astype(np.intp),
            np.concatenate(self.coef),
            np.concatenate(self.idx).astype(np.intp),
            np.concatenate(self.const),
            self.labels,
        )


def build_system(G: FiniteAbelianGroup, eps: EpsilonTable, eta: EtaTable | None = None,
                 which: tuple[str, ...] = ("row_sum", "orthogonality", "cubic")) -> PolynomialSystem:
    """Compile the row-sum, orthogonality and cubic equations into monomial tables."""
    eta = eta or EtaTable.trivial(G)
    n = G.order
    d = dimension(G)
    add, neg, sub = G.add_table, G.neg_table, G.sub_table
    E = eps.values.astype(float)
    Y = eta.complex_values
    Yc = Y.conj()
    b = _Builder(n)

    if "row_sum" in which:
        g, h = np.indices((n, n))
        b.terms(g, 1.0, b.a(g, h, 0))
        b.close("row_sum", Yc / d)

    if "orthogonality" in which:
        g, g2, k, h = np.indices((n, n, n, n))
        e = (g * n + g2) * n + k
        b.terms(e, 1.0, b.a(g, sub[h, g], k), b.abar(g2, sub[h, g2], k))
        g, g2, k = np.indices((n, n, n))
        const = -(g == g2).astype(float) + (Yc[g] * Y[g2] / d) * (k == 0)
        b.close("orthogonality", const)

    if "cubic" in which:
        g, p, q, x, y, l = np.indices((n,) * 6)
        e = (((g * n + p) * n + q) * n + x) * n + y
        xy = add[x, y]
        b.terms(e, 1.0,
                b.a(g, xy, l),
                b.a(add[sub[g, p], x], neg[x], add[l, p]),
                b.a(add[sub[g, q], xy], neg[y], add[l, q]))
        g, p, q, x, y = np.indices((n,) * 5)
        e = (((g * n + p) * n + q) * n + x) * n + y
        xy, px, qy = add[x, y], add[p, x], add[q, y]
        etas = (Y[g] * Y[add[add[g, q], x]] * Y[add[add[g, p], qy]]
                * np.conj(Y[add[g, p]] * Y[add[g, xy]] * Y[add[add[g, q], xy]]))
        signs = (E[p, add[sub[g, p], x]] * E[px, add[sub[g, p], qy]]
                 * E[q, add[sub[g, q], xy]] * E[qy, add[sub[g, q], x]])
        b.terms(e, -etas * signs, b.a(g, px, add[q, xy]), b.a(sub[g, p], qy, add[px, y]))
        delta = ((x == 0) & (y == 0)) / d * Y[g] * Y[add[g, p]] * Y[add[g, q]]
        b.close("cubic", delta)
    return b.build()


class _Objective:
    """Residual and Jacobian of a :class:`PolynomialSystem` in the real orbit parameters."""

    def __init__(self, system: PolynomialSystem, orbits: SymmetryOrbits):
        self.system = system
        self.orbits = orbits
        M, self.labels = orbits.linear_map()
        self.M = M
        self.m = M.shape[1]
        Mext = np.vstack([M, M.conj(), np.zeros((1, self.m))])
        # each row of Mext has at most two nonzeros
        nz_cols = np.zeros((Mext.shape[0], 2), dtype=np.intp)
        nz_vals = np.zeros((Mext.shape[0], 2), dtype=complex)
        for r in range(Mext.shape[0]):
            cols = np.flatnonzero(Mext[r])
            if len(cols) > 2:
                raise AssertionError("tensor entry depends on more than two parameters")
            nz_cols[r, :len(cols)] = cols
            nz_vals[r, :len(cols)] = Mext[r, cols]
        self.nz_cols = nz_cols
        self.nz_vals = nz_vals

    def tensor(self, v: np.ndarray) -> np.ndarray:
        n = self.orbits.group.order
        return (self.M @ v).reshape(n, n, n)

    def residual(self, v: np.ndarray) -> np.ndarray:
        r = self.system.residual(self.tensor(v))
        return np.concatenate([r.real, r.imag])

    def jacobian(self, v: np.ndarray) -> np.ndarray:
        s = self.system
        Z = s.extended(self.tensor(v))
        F = Z[s.idx]
        # d(monomial)/d(factor j) = coef * product of the other factors
        D = np.stack([s.coef * F[:, 1] * F[:, 2],
                      s.coef * F[:, 0] * F[:, 2],
                      s.coef * F[:, 0] * F[:, 1]], axis=1)
        rows = np.repeat(s.eq[:, None], 3, axis=1)
        ne, m = s.n_equations, self.m
        J = np.zeros(ne * m, dtype=complex)
        for slot in range(2):
            cols = self.nz_cols[s.idx, slot]
            vals = D * self.nz_vals[s.idx, slot]
            lin = (rows * m + cols).ravel()
            vals = vals.ravel()
            J += np.bincount(lin, weights=vals.real, minlength=ne * m)
            J += 1j * np.bincount(lin, weights=vals.imag, minlength=ne * m)
        J = J.reshape(ne, m)
        return np.vstack([J.real, J.imag])


def _levenberg(obj: _Objective, v0: np.ndarray, cfg: SolveConfig) -> tuple[np.ndarray, float, int]:
    v = v0.copy()
    r = obj.residual(v)
    cost = r @ r
    lam = cfg.damping
    it = 0
    for it in range(1, cfg.max_iter + 1):
        if np.abs(r).max() <= cfg.convergence_tol:
            break
        J = obj.jacobian(v)
        JtJ = J.T @ J
        g = J.T @ r
        improved = False
        while lam < 1e12:
            try:
                step = np.linalg.solve(JtJ + lam * np.eye(len(v)), -g)
            except np.linalg.LinAlgError:
                lam *= 10
                continue
            v_new = v + step
            r_new = obj.residual(v_new)
            cost_new = r_new @ r_new
            if cost_new < cost:
                v, r, cost = v_new, r_new, cost_new
                lam = max(lam * 0.1, 1e-12)
                improved = True
                break
            lam *= 10
        if not improved:
            break
    return v, float(np.abs(r).max()), it


def _initial_point(obj: _Objective, rng: np.random.Generator) -> np.ndarray:
    v = np.empty(obj.m)
    for j, (o, kind) in enumerate(obj.labels):
        if kind == "line":
            v[j] = rng.uniform(-1, 1)
        elif kind == "re":
            rad = np.sqrt(rng.uniform())
            ang = rng.uniform(0, 2 * np.pi)
            v[j] = rad * np.cos(ang)
            v[j + 1] = rad * np.sin(ang)
    return v


def _thread_count(cfg: SolveConfig) -> int:
    if cfg.threads:
        return cfg.threads
    env = os.environ.get("GHEXT_THREADS")
    if env:
        return max(1, int(env))
    return min(4, os.cpu_count() or 1)


def solve_A(G: FiniteAbelianGroup, eps: EpsilonTable, eta: EtaTable | None = None,
            cfg: SolveConfig | None = None, diagnostics: dict | None = None) -> list[tuple[np.ndarray, float]]:
    """Random-restart Levenberg solve of the A equations.

    Returns ``(A, residual)`` pairs for every restart whose maximum absolute
    residual is at most ``cfg.convergence_tol``, deduplicated by maximum entry
    distance and sorted by residual.  An empty list means no restart
    converged; ``diagnostics`` (if given) is filled with per-restart results.
    """
    cfg = cfg or SolveConfig()
    eta = eta or EtaTable.trivial(G)
    orbits = build_orbits(G, eps, eta)
    obj = _Objective(build_system(G, eps, eta), orbits)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)

    def run(i):
        rng = np.random.default_rng(seeds[i])
        v, res, its = _levenberg(obj, _initial_point(obj, rng), cfg)
        return i, v, res, its

    with ThreadPoolExecutor(max_workers=_thread_count(cfg)) as pool:
        results = list(pool.map(run, range(cfg.restarts)))

    converged = []
    for i, v, res, its in results:
        if res <= cfg.convergence_tol:
            converged.append((res, i, obj.tensor(v)))
    converged.sort(key=lambda t: (t[0], t[1]))
    unique: list[tuple[np.ndarray, float]] = []
    for res, i, A in converged:
        if all(np.abs(A - B).max() >= cfg.dedup_tol for B, _ in unique):
            unique.append((A, res))
    if diagnostics is not None:
        diagnostics.update({
            "orbits": orbits.count,
            "real_orbits": len(orbits.line),
            "parameters": obj.m,
            "equations": obj.system.n_equations,
            "restarts": cfg.restarts,
            "converged": len(converged),
            "unique": len(unique),
            "best_residual": min((r for _, _, r, _ in results), default=None),
            "eta": list(eta.exponents),
            "runs": [{"restart": i, "residual": res, "iterations": its} for i, _, res, its in results],
        })
    log.info("solve_A %s: %d/%d restarts converged, %d unique", G, len(converged), cfg.restarts, len(unique))
    return unique


def save_A(A: np.ndarray, path: str | Path, group: FiniteAbelianGroup, **meta) -> None:
    obj = {"group": list(group.moduli), "A": tensor_to_json(A)}
    obj.update(meta)
    Path(path).write_text(json.dumps(obj, indent=1))


def load_A(path: str | Path, group: FiniteAbelianGroup | None = None) -> np.ndarray:
    """Load an A tensor from JSON (an ``"A"`` field, or a bare array).

    Raises
    ------
    ParseError
        Malformed JSON or entries.
    ShapeMismatch
        Entry count differs from ``|G|^3``.
    """
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    if isinstance(obj, dict):
        if group is None:
            if "group" not in obj:
                raise ParseError("no group given and none recorded in the file")
            group = FiniteAbelianGroup(obj["group"])
        elif "group" in obj and list(obj["group"]) != list(group.moduli):
            raise ShapeMismatch(f"file is for group {obj['group']}, expected {list(group.moduli)}")
        if "A" not in obj:
            raise ParseError("missing field 'A'")
        data = obj["A"]
    else:
        if group is None:
            raise ParseError("bare array needs an explicit group")
        data = obj
    return tensor_from_json(data, group.order)
