"""Command-line front end: ``ghext <subcommand> ...``.

Exit codes: 0 success, 1 a checked constraint or expected count failed,
2 usage error (bad flags, unreadable input).
"""

from __future__ import annotations

import hashlib
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable

import click
import numpy as np

from . import __version__
from . import ah4 as ah4_mod
from . import klein as klein_mod
from .abelian import FiniteAbelianGroup, RootOfUnity, enumerate_two_torsion, parse_group
from .asolve import SolveConfig, solve_A
from .category import (
    CategoryData,
    EpsilonTable,
    EtaTable,
    ParseError,
    ShapeMismatch,
    category_to_json,
    epsilon_from_generator,
    load_category,
    verify_axioms,
)
from .equiv import characters_trivial_on, classify, coreq_count, NotACharacter
from .extdata import ExtensionParams, check_extension_data, search_extension_data

log = logging.getLogger("ghext")

DEFAULT_SEED = 42


# -- presets -------------------------------------------------------------------

def z2n_epsilon(G: FiniteAbelianGroup) -> EpsilonTable:
    """Cyclic ``Z_{2n}`` with ``eps_1(2n-1) = -1`` and ``eps_1 = 1`` elsewhere."""
    if G.rank != 1 or G.order % 2:
        raise click.BadParameter(f"z2n-nontrivial needs an even cyclic group, got {G}")
    m = G.order
    return epsilon_from_generator(G, [-1 if g == m - 1 else 1 for g in range(m)])


def builtin_presets() -> dict[str, Callable[[FiniteAbelianGroup], EpsilonTable]]:
    def z2z2(G):
        if G != klein_mod.G:
            raise click.BadParameter("z2z2-paper needs the group Z2xZ2")
        return klein_mod.epsilon_table()

    def ah4(G):
        if G != ah4_mod.G:
            raise click.BadParameter("ah4 needs the group Z4xZ2")
        return ah4_mod.build_epsilon()

    return {
        "z2n-nontrivial": z2n_epsilon,
        "z2z2-paper": z2z2,
        "ah4": ah4,
        "trivial": EpsilonTable.trivial,
    }


def load_epsilon(spec: str, G: FiniteAbelianGroup) -> EpsilonTable:
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        presets = builtin_presets()
        if name not in presets:
            raise click.BadParameter(f"unknown preset {name!r}; choose from {sorted(presets)}")
        return presets[name](G)
    try:
        obj = json.loads(Path(spec).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise click.BadParameter(f"cannot read epsilon file {spec}: {exc}") from exc
    if isinstance(obj, dict):
        obj = obj.get("epsilon")
    try:
        return EpsilonTable(G, np.asarray(obj))
    except (ValueError, ShapeMismatch) as exc:
        raise click.BadParameter(str(exc)) from exc


def parse_eta(spec: str, G: FiniteAbelianGroup) -> EtaTable:
    if spec == "trivial":
        return EtaTable.trivial(G)
    try:
        return EtaTable(G, [int(x) for x in spec.split(",")])
    except (ValueError, ShapeMismatch) as exc:
        raise click.BadParameter(f"eta: {exc}") from exc


def parse_element(spec: str, G: FiniteAbelianGroup):
    try:
        return G.element([int(x) for x in spec.split(",")])
    except ValueError as exc:
        raise click.BadParameter(f"element {spec!r}: {exc}") from exc


def read_category(path: str) -> CategoryData:
    try:
        return load_category(path)
    except (OSError, ParseError, ShapeMismatch, ValueError) as exc:
        raise click.BadParameter(f"{path}: {exc}") from exc


# -- manifest ------------------------------------------------------------------

def _sha256_file(path: str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def digest(result) -> str:
    return hashlib.sha256(json.dumps(result, sort_keys=True, default=str).encode()).hexdigest()


@dataclass
class RunManifest:
    command: str
    group: str | None = None
    inputs: dict[str, str] = field(default_factory=dict)
    seed: int | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    version: str = __version__
    wall_clock: float = 0.0
    result_digest: str = ""

    def finish(self, result, started: float) -> RunManifest:
        self.wall_clock = round(time.perf_counter() - started, 6)
        self.result_digest = digest(result)
        return self


def emit(result: dict, manifest: RunManifest, started: float, output: str | None, text: str, ok: bool):
    manifest.finish(result, started)
    if output:
        payload = dict(result)
        payload["manifest"] = asdict(manifest)
        Path(output).write_text(json.dumps(payload, indent=1, default=str))
    click.echo(text)
    sys.exit(0 if ok else 1)


# -- commands ------------------------------------------------------------------

@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def main(verbose: bool):
    """Structure constants and Z2-extensions of generalized Haagerup categories."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


output_option = click.option("-o", "--output", type=click.Path(dir_okay=False), help="Write JSON results here.")


@main.command()
@click.option("--category", "category_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--tol", default=1e-8, show_default=True)
@output_option
def verify(category_path, tol, output):
    """Check the structure-constant equations for a category file."""
    started = time.perf_counter()
    c = read_category(category_path)
    if c.a_tensor is None:
        raise click.UsageError("the category file has no A tensor")
    report = verify_axioms(c, tol)
    result = {"residuals": report.residuals, "derived": report.derived, "passed": report.passed}
    manifest = RunManifest("verify", str(c.group), {category_path: _sha256_file(category_path)}, tolerances={"tol": tol})
    emit(result, manifest, started, output, report.summary(), report.passed)


@main.command("solve-a")
@click.option("--group", "group_spec", required=True, help="e.g. Z2xZ2")
@click.option("--eps", "eps_spec", default="builtin:z2n-nontrivial", show_default=True,
              help="JSON file or builtin:<preset>")
@click.option("--eta", "eta_spec", default="trivial", show_default=True, help="'trivial' or comma-separated exponents")
@click.option("--restarts", default=50, show_default=True, type=click.IntRange(min=1))
@click.option("--max-iter", default=200, show_default=True, type=click.IntRange(min=1))
@click.option("--seed", default=DEFAULT_SEED, show_default=True)
@click.option("--tol", default=1e-10, show_default=True)
@output_option
def solve_a(group_spec, eps_spec, eta_spec, restarts, max_iter, seed, tol, output):
    """Solve for the A tensor with random-restart Levenberg iterations."""
    started = time.perf_counter()
    try:
        G = parse_group(group_spec)
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc
    eps = load_epsilon(eps_spec, G)
    eta = parse_eta(eta_spec, G)
    cfg = SolveConfig(restarts=restarts, max_iter=max_iter, convergence_tol=tol, seed=seed)
    diag: dict = {}
    sols = solve_A(G, eps, eta, cfg, diag)
    result = {"group": list(G.moduli), "eps": eps_spec, "eta": list(eta.exponents),
              "eta_assumed_trivial": eta.is_trivial(),
              "solutions": len(sols), "diagnostics": {k: v for k, v in diag.items() if k != "runs"}}
    if sols:
        A, res = sols[0]
        cat = CategoryData(G, eps, eta, A)
        result["category"] = category_to_json(cat)
        result["residual"] = res
        result["verify"] = verify_axioms(cat, 10 * tol).residuals
    manifest = RunManifest("solve-a", str(G), {"eps": eps_spec}, seed, {"convergence_tol": tol})
    text = (f"{G}: {diag['converged']}/{restarts} restarts converged, {len(sols)} distinct solutions"
            + (f", best residual {sols[0][1]:.2e}" if sols else ""))
    if output and sols:
        # the output doubles as a category file for the other subcommands
        result = {**result.pop("category"), **result}
    emit(result, manifest, started, output, text, bool(sols))


def _params(c: CategoryData, p: str, z: str) -> ExtensionParams:
    try:
        return ExtensionParams(c.group, parse_element(p, c.group), parse_element(z, c.group))
    except ValueError as exc:
        raise click.BadParameter(str(exc)) from exc


@main.command()
@click.option("--category", "category_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--p", "p_spec", required=True, help="comma-separated residues, e.g. 1,0")
@click.option("--z", "z_spec", required=True)
@click.option("--no-a-filter", is_flag=True, help="Skip the relation involving A.")
@click.option("--tol", default=1e-8, show_default=True)
@output_option
def extensions(category_path, p_spec, z_spec, no_a_filter, tol, output):
    """List all extension data for (p, z)."""
    started = time.perf_counter()
    c = read_category(category_path)
    params = _params(c, p_spec, z_spec)
    sols = search_extension_data(c, params, use_a=not no_a_filter, tol=tol)
    filtered = not no_a_filter and c.a_tensor is not None
    result = {
        "p": list(params.p), "z": list(params.z), "a_filter": filtered,
        "solutions": [{"data": d.to_json(), "report": check_extension_data(c, d, tol).to_json()} for d in sols],
    }
    manifest = RunManifest("extensions", str(c.group), {category_path: _sha256_file(category_path)},
                           tolerances={"tensor_shift": tol})
    lines = [f"p={params.p} z={params.z}: {len(sols)} solutions" + ("" if filtered else " (unfiltered)")]
    lines += [f"  a={list(d.a)} xi={d.xi!r} nu={d.nu!r}" for d in sols]
    emit(result, manifest, started, output, "\n".join(lines), bool(sols))


@main.command("classify")
@click.option("--category", "category_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--p", "p_spec", required=True)
@click.option("--z", "z_spec", required=True)
@click.option("--trivial-on", "trivial_on", multiple=True,
              help="Restrict zeta to characters trivial on this element (repeatable).")
@click.option("--no-a-filter", is_flag=True)
@output_option
def classify_cmd(category_path, p_spec, z_spec, trivial_on, no_a_filter, output):
    """Count equivalence classes of extension data for (p, z)."""
    started = time.perf_counter()
    c = read_category(category_path)
    params = _params(c, p_spec, z_spec)
    chars = characters_trivial_on(c.group, [parse_element(t, c.group) for t in trivial_on]) if trivial_on else None
    sols = search_extension_data(c, params, use_a=not no_a_filter)
    orbits = classify(sols, c.eps, chars)
    counts = set()
    for d in sols:
        try:
            counts.add(coreq_count(d, c.eps))
        except NotACharacter:
            counts.add(None)
    result = {
        "p": list(params.p), "z": list(params.z),
        "solutions": len(sols),
        "classes": len(orbits),
        "orbits": [{"size": len(o), "representative": o.representative.to_json()} for o in orbits],
        "coreq_counts": sorted(counts, key=str),
    }
    manifest = RunManifest("classify", str(c.group), {category_path: _sha256_file(category_path)})
    text = f"p={params.p} z={params.z}: {len(sols)} solutions in {len(orbits)} classes"
    emit(result, manifest, started, output, text, bool(sols))


@main.command()
@click.option("--census", is_flag=True, help="Count extensions over all admissible z-triples.")
@click.option("--triple", help="A single z-triple, e.g. p,q,r or 0,0,p")
@output_option
def klein(census, triple, output):
    """Z2xZ2-graded extensions of the Klein-four category."""
    started = time.perf_counter()
    if census == bool(triple):
        raise click.UsageError("give exactly one of --census or --triple")
    manifest = RunManifest("klein", str(klein_mod.G))
    if census:
        c = klein_mod.klein_census()
        ok = len(c.rows) == 28 and c.total == 74
        emit(c.to_json(), manifest, started, output, c.table(), ok)
    try:
        zt = klein_mod.ZTriple.parse(triple)
    except (KeyError, ValueError) as exc:
        raise click.BadParameter(f"triple {triple!r}: {exc}") from exc
    scal = klein_mod.check_scalar_identities(zt)
    admissible = klein_mod.satisfies_zcond(zt)
    result = {"z": zt.label(), "admissible": admissible, "scalars": scal.to_json()}
    text = f"{zt.label()}: admissible={admissible}"
    if admissible:
        n = klein_mod.nu_orbit_count(zt)
        result["extensions"] = n
        text += f", extensions = {n}"
    emit(result, manifest, started, output, text, True)


@main.command()
@click.option("--census", is_flag=True, required=True)
@output_option
def a4(census, output):
    """Extensions by the full A4 outer automorphism group."""
    started = time.perf_counter()
    c = klein_mod.a4_census()
    ok = c.total == 15 and len(c.compatible) == 4
    emit(c.to_json(), RunManifest("a4", str(klein_mod.G)), started, output, c.table(), ok)


@main.command()
@click.option("--check", is_flag=True, required=True)
@click.option("--a-file", type=click.Path(exists=True, dir_okay=False), help="Category or A file for the tensor relation.")
@click.option("--solve-c", "do_solve_c", is_flag=True, help="Also list every admissible c.")
@click.option("--c", "c_turn", help="Override c as a fraction of a full turn, e.g. 1/8.")
@output_option
def ah4(check, a_file, do_solve_c, c_turn, output):
    """The degenerate Z4xZ2 scenario and its compatibility constant."""
    from fractions import Fraction

    from .asolve import load_A

    started = time.perf_counter()
    A = None
    inputs = {}
    if a_file:
        try:
            A = load_A(a_file, ah4_mod.G)
        except (ParseError, ShapeMismatch) as exc:
            raise click.BadParameter(f"{a_file}: {exc}") from exc
        inputs[a_file] = _sha256_file(a_file)
    c = ah4_mod.STATED_C if c_turn is None else RootOfUnity(Fraction(c_turn))
    s = ah4_mod.build_scenario(c=c, a_tensor=A)
    rep = ah4_mod.scenario_report(s)
    if not do_solve_c:
        rep.pop("solve_c")
    exact_ok = rep["data_p10"]["passed"] and rep["data_p01"]["passed"] and rep["cocycle_violations"] == 0
    ok = exact_ok and rep["l11_holds"]
    lines = [
        f"epsilon cocycle violations: {rep['cocycle_violations']}",
        f"data p=(1,0): {'pass' if rep['data_p10']['passed'] else 'FAIL'}",
        f"data p=(0,1): {'pass' if rep['data_p01']['passed'] else 'FAIL'}",
        f"compatibility with c={rep['c']}: {'pass' if rep['l11_holds'] else 'FAIL'}"
        f" (identity requires c={', '.join(rep['l11_required_c'])})",
    ]
    if do_solve_c:
        lines.append(f"admissible c: {rep['solve_c']}")
    emit(rep, RunManifest("ah4", str(ah4_mod.G), inputs), started, output, "\n".join(lines), ok)


def z2n_checks(max_n: int = 5) -> list[dict]:
    """For Z_{2n}: the solution a(g) = -xi^g (g >= 1) is among the exact
    solutions for p = 1 and each z, and the class count is 2."""
    rows = []
    for n in range(1, max_n + 1):
        G = FiniteAbelianGroup([2 * n])
        eps = z2n_epsilon(G)
        cat = CategoryData(G, eps)
        for z in enumerate_two_torsion(G):
            params = ExtensionParams(G, (1,), z)
            logging.getLogger("ghext.extdata").disabled = True
            try:
                sols = search_extension_data(cat, params)
            finally:
                logging.getLogger("ghext.extdata").disabled = False
            found = any(all(d.a[g] == -(d.xi ** g) for g in range(1, 2 * n)) for d in sols)
            counts = {coreq_count(d, eps) for d in sols if found}
            rows.append({"group": str(G), "z": list(z), "solutions": len(sols),
                         "closed_form_found": found, "coreq": sorted(counts),
                         "ok": found and counts == {2}})
    return rows


@main.command("census-all")
@output_option
def census_all(output):
    """Run every count that has a fixed expected value."""
    started = time.perf_counter()
    kc = klein_mod.klein_census()
    ac = klein_mod.a4_census()
    z2n = z2n_checks()
    checks = {
        "klein_admissible": (len(kc.rows), 28),
        "klein_total": (kc.total, 74),
        "a4_compatible": (len(ac.compatible), 4),
        "a4_total": (ac.total, 15),
        "z2n_closed_form": (sum(r["ok"] for r in z2n), len(z2n)),
    }
    ok = all(got == want for got, want in checks.values())
    result = {"checks": {k: {"got": g, "expected": w} for k, (g, w) in checks.items()},
              "klein": kc.to_json(), "a4": ac.to_json(), "z2n": z2n, "passed": ok}
    lines = [f"{k:<18} {g} (expected {w}) {'ok' if g == w else 'MISMATCH'}" for k, (g, w) in checks.items()]
    emit(result, RunManifest("census-all"), started, output, "\n".join(lines), ok)


if __name__ == "__main__":
    main()
