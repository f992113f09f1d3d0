import math

import numpy as np
import pytest

from ghext import klein
from ghext.abelian import FiniteAbelianGroup
from ghext.asolve import (
    PhaseConflict,
    SolveConfig,
    _Objective,
    _initial_point,
    build_orbits,
    build_system,
    load_A,
    save_A,
    solve_A,
)
from ghext.category import CategoryData, EpsilonTable, EtaTable, ParseError, ShapeMismatch, axiom_residuals
from ghext.cli import z2n_epsilon

SYMMETRY_AXIOMS = ("sign_shift", "hermitian", "rotation", "shift_left", "shift_right")


def _cases():
    out = [("Z1", FiniteAbelianGroup([1]), EpsilonTable.trivial(FiniteAbelianGroup([1])), None)]
    for m in (2, 4, 6):
        G = FiniteAbelianGroup([m])
        out.append((f"Z{m}", G, z2n_epsilon(G), None))
    out.append(("Z2xZ2", klein.G, klein.epsilon_table(), None))
    G3 = FiniteAbelianGroup([3])
    out.append(("Z3", G3, EpsilonTable.trivial(G3), EtaTable.trivial(G3)))
    return out


CASES = _cases()
IDS = [c[0] for c in CASES]


def _objective(G, eps, eta):
    return _Objective(build_system(G, eps, eta), build_orbits(G, eps, eta))


def test_trivial_group_converges_to_closed_form():
    G = FiniteAbelianGroup([1])
    sols = solve_A(G, EpsilonTable.trivial(G), cfg=SolveConfig(restarts=5, seed=0))
    assert len(sols) == 1
    A, res = sols[0]
    assert res <= 1e-10
    assert abs(A[0, 0, 0] - (-2 / (1 + math.sqrt(5)))) < 1e-9


@pytest.mark.parametrize("name,G,eps,eta", CASES, ids=IDS)
def test_jacobian_matches_central_differences(name, G, eps, eta, rng):
    obj = _objective(G, eps, eta)
    h = 1e-6
    for _ in range(3):
        v = _initial_point(obj, rng)
        J = obj.jacobian(v)
        fd = np.empty_like(J)
        for j in range(obj.m):
            e = np.zeros(obj.m)
            e[j] = h
            fd[:, j] = (obj.residual(v + e) - obj.residual(v - e)) / (2 * h)
        rel = np.linalg.norm(J - fd) / max(np.linalg.norm(fd), 1e-300)
        assert rel < 1e-4, rel


@pytest.mark.parametrize("name,G,eps,eta", CASES, ids=IDS)
def test_parametrization_satisfies_symmetry_axioms(name, G, eps, eta, rng):
    obj = _objective(G, eps, eta)
    A = obj.tensor(_initial_point(obj, rng))
    res = axiom_residuals(CategoryData(G, eps, eta, A))
    for name in SYMMETRY_AXIOMS:
        assert res[name] < 1e-12, (name, res[name])


def test_residual_vanishes_on_solution(klein_category):
    c = klein_category
    system = build_system(c.group, c.eps, c.eta)
    assert np.abs(system.residual(c.a_tensor)).max() < 1e-9
    assert set(system.residual_by_label(c.a_tensor)) == {"row_sum", "orthogonality", "cubic"}


@pytest.mark.parametrize("m", [2, 4])
def test_cyclic_solutions_converge(m):
    G = FiniteAbelianGroup([m])
    diag = {}
    sols = solve_A(G, z2n_epsilon(G), cfg=SolveConfig(restarts=50, seed=42), diagnostics=diag)
    assert sols and sols[0][1] <= 1e-9
    assert diag["converged"] >= 1 and diag["restarts"] == 50
    assert len(diag["runs"]) == 50


def test_same_seed_same_output():
    G = klein.G
    eps = klein.epsilon_table()
    a = solve_A(G, eps, cfg=SolveConfig(restarts=8, seed=7, threads=1))
    b = solve_A(G, eps, cfg=SolveConfig(restarts=8, seed=7, threads=3))
    assert len(a) == len(b)
    for (x, rx), (y, ry) in zip(a, b):
        assert np.array_equal(x, y) and rx == ry


def test_thread_cap_from_environment(monkeypatch):
    from ghext.asolve import _thread_count

    monkeypatch.setenv("GHEXT_THREADS", "2")
    assert _thread_count(SolveConfig()) == 2
    assert _thread_count(SolveConfig(threads=1)) == 1


def test_config_validation():
    with pytest.raises(ValueError):
        SolveConfig(restarts=0)
    with pytest.raises(ValueError):
        SolveConfig(convergence_tol=0)


def test_save_and_load_tensor(tmp_path, z4_category):
    path = tmp_path / "A.json"
    save_A(z4_category.a_tensor, path, z4_category.group, note="z4")
    assert np.array_equal(load_A(path), z4_category.a_tensor)
    assert np.array_equal(load_A(path, z4_category.group), z4_category.a_tensor)
    with pytest.raises(ShapeMismatch):
        load_A(path, FiniteAbelianGroup([2]))


def test_load_tensor_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ParseError):
        load_A(bad)
    bare = tmp_path / "bare.json"
    bare.write_text("[[[1.0, 0.0]]]")
    with pytest.raises(ParseError):
        load_A(bare)
    assert load_A(bare, FiniteAbelianGroup([1])).shape == (1, 1, 1)


def test_contradictory_phases_are_reported():
    G = FiniteAbelianGroup([3])
    with pytest.raises(PhaseConflict):
        build_orbits(G, EpsilonTable.trivial(G), EtaTable(G, [1, 1, 1]))
