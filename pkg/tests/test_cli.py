import json

import numpy as np
import pytest
from click.testing import CliRunner

from ghext import klein
from ghext.abelian import FiniteAbelianGroup
from ghext.cli import builtin_presets, digest, main


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, *args):
    return runner.invoke(main, list(args), catch_exceptions=False)


@pytest.fixture(scope="module")
def z2_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "z2.json"
    res = CliRunner().invoke(main, ["solve-a", "--group", "Z2", "--seed", "5", "-o", str(path)])
    assert res.exit_code == 0, res.output
    return path


def test_klein_census(runner, tmp_path):
    out = tmp_path / "k.json"
    res = run(runner, "klein", "--census", "-o", str(out))
    assert res.exit_code == 0
    assert res.output.strip().endswith("total = 74")
    data = json.loads(out.read_text())
    assert data["total"] == 74 and data["manifest"]["command"] == "klein"


def test_klein_single_triple(runner):
    res = run(runner, "klein", "--triple", "p,q,r")
    assert res.exit_code == 0 and "extensions = 1" in res.output
    res = run(runner, "klein", "--triple", "p,q,0")
    assert res.exit_code == 0 and "admissible=False" in res.output


def test_a4_census(runner):
    res = run(runner, "a4", "--census")
    assert res.exit_code == 0
    assert res.output.strip().endswith("total = 15")


def test_census_all(runner):
    res = run(runner, "census-all")
    assert res.exit_code == 0, res.output
    assert "MISMATCH" not in res.output


def test_usage_errors_exit_2(runner):
    assert run(runner, "klein", "--bogus").exit_code == 2
    assert run(runner, "klein").exit_code == 2
    assert run(runner, "klein", "--census", "--triple", "p,p,0").exit_code == 2
    assert run(runner, "frobnicate").exit_code == 2
    res = run(runner, "solve-a", "--group", "Z3", "--eps", "builtin:z2n-nontrivial")
    assert res.exit_code == 2
    res = run(runner, "solve-a", "--group", "Z2", "--eps", "builtin:nope")
    assert res.exit_code == 2 and "z2z2-paper" in res.output


def test_ah4_check_reports_conflict(runner, tmp_path):
    out = tmp_path / "ah4.json"
    res = run(runner, "ah4", "--check", "--solve-c", "-o", str(out))
    assert res.exit_code == 1
    assert "data p=(1,0): pass" in res.output and "data p=(0,1): pass" in res.output
    assert "admissible c: ['e(1/8)']" in res.output
    assert json.loads(out.read_text())["l11_holds"] is False
    res = run(runner, "ah4", "--check", "--c", "1/8")
    assert res.exit_code == 0


def test_solve_verify_extensions_classify(runner, z2_file, tmp_path):
    data = json.loads(z2_file.read_text())
    assert data["manifest"]["seed"] == 5
    assert data["solutions"] >= 1 and data["residual"] <= 1e-9
    assert run(runner, "verify", "--category", str(z2_file)).exit_code == 0
    res = run(runner, "extensions", "--category", str(z2_file), "--p", "1", "--z", "0")
    assert res.exit_code == 0 and "4 solutions" in res.output
    res = run(runner, "classify", "--category", str(z2_file), "--p", "1", "--z", "1")
    assert res.exit_code == 0 and "2 classes" in res.output


def test_verify_fails_on_corrupted_tensor(runner, z2_file, tmp_path):
    data = json.loads(z2_file.read_text())
    data["A"][0][0] = [5.0, 0.0]
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    assert run(runner, "verify", "--category", str(bad)).exit_code == 1


def test_element_syntax_is_validated(runner, z2_file):
    res = run(runner, "extensions", "--category", str(z2_file), "--p", "0", "--z", "0")
    assert res.exit_code == 2


def test_equal_manifests_give_equal_digests(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert run(runner, "solve-a", "--group", "Z2xZ2", "--eps", "builtin:z2z2-paper",
                   "--restarts", "6", "--seed", "11", "-o", str(path)).exit_code == 0
    ma, mb = (json.loads(p.read_text())["manifest"] for p in (a, b))
    ma.pop("wall_clock"), mb.pop("wall_clock")
    assert ma == mb


def test_epsilon_from_file(runner, tmp_path):
    path = tmp_path / "eps.json"
    path.write_text(json.dumps({"epsilon": klein.EPSILON.tolist()}))
    res = run(runner, "solve-a", "--group", "Z2xZ2", "--eps", str(path), "--restarts", "4")
    assert res.exit_code == 0


def test_presets():
    presets = builtin_presets()
    assert {"z2n-nontrivial", "z2z2-paper", "ah4"} <= set(presets)
    assert np.array_equal(presets["z2z2-paper"](klein.G).values, klein.EPSILON)
    eps = presets["z2n-nontrivial"](FiniteAbelianGroup([4]))
    assert [eps((2,), (m,)) for m in range(4)] == [1, -1, 1, -1]
    ah = presets["ah4"](FiniteAbelianGroup([4, 2]))
    assert ah((2, 0), (1, 1)) == -1 and ah((2, 0), (1, 0)) == 1


def test_digest_is_order_independent():
    assert digest({"a": 1, "b": [1, 2]}) == digest({"b": [1, 2], "a": 1})
