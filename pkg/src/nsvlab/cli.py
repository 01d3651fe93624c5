"""Command-line harness: simulate | lyapunov | bounds | verify.

Exit status contract: 0 all checks passed, 1 verification failure,
2 configuration error, 3 runtime/numerical failure.

Every run writes its artifacts plus a manifest.json (config hash, version,
wall clock, artifact hashes, pass/fail summary) into the output directory;
--output-dir beats the NSVLAB_OUTPUT_DIR environment variable, which beats
the default ./nsvlab_runs/<subcommand>.  Values from --config <file> (JSON)
are overridden by explicit flags.  Runs are deterministic given the same
effective configuration and seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import bounds as bounds_mod
from . import dynamics as dyn
from . import inequalities as ineq
from . import lattice
from . import lyapunov as lyp
from . import spectral as sp
from .errors import ConfigError, IntegrationDivergedError, InvalidParameterError
from .fieldio import RunManifest, save_field, write_json

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_CONFIG = 2
EXIT_RUNTIME = 3

VERIFY_TARGETS = ("spectrum", "liyau", "lt", "rho-l2", "rho-linf")


# ----------------------------------------------------------------------------
# configuration

#: subcommand -> {param: (type, default)}
SCHEMAS = {
    "bounds": {
        "d": (int, 2),
        "nu": (float, 1.0),
        "alpha": (float, 0.0),
        "gnorm": (float, 1.0),
        "lambda1": (float, 1.0),
        "measure": (float, 4 * np.pi**2),
        "geometry": (str, "torus"),
        "g0_offset": (float, 5.74),
    },
    "simulate": {
        "n": (int, 64),
        "nu": (float, 1.0),
        "alpha": (float, 1.0),
        "dt": (float, 1e-3),
        "t_end": (float, 1.0),
        "sample_every": (int, 10),
        "snapshot_every": (int, 0),
        "forcing": (dict, {"kind": "zero"}),
        "initial": (dict, {"kind": "zero"}),
    },
    "lyapunov": {
        "n": (int, 64),
        "nu": (float, 1.0),
        "alpha": (float, 1.0),
        "dt": (float, 1e-2),
        "frame_n": (int, 4),
        "window": (float, 60.0),
        "warmup": (float, 0.0),
        "burn_in": (float, -1.0),  # -1: default 5/gamma
        "reorth_every": (int, 10),
        "scan": (bool, False),
        "n_max": (int, 64),
        "forcing": (dict, {"kind": "zero"}),
        "initial": (dict, {"kind": "zero"}),
    },
    "verify": {
        "target": (str, ""),
        "jmax": (int, 100_000),
        "mmax": (int, 10_000),
        "families": (int, 100),
        "family_n": (int, 16),
        "grid_n": (int, 64),
        "alpha": (float, 1.0),
        "alphas": (list, [0.01, 0.1, 1.0]),
        "kind": (str, ineq.ALPHA_ORTHONORMAL),
        "lam_min": (int, 1),
        "lam_max": (int, 64),
        "sums_lam_max": (int, 10_000),
    },
}


def _coerce(name, value, typ, problems):
    if typ is bool and isinstance(value, bool):
        return value
    if typ in (int, float) and isinstance(value, (int, float)) and not isinstance(value, bool):
        if typ is int and int(value) != value:
            problems.append(f"{name}: expected integer, got {value!r}")
            return None
        return typ(value)
    if typ is str and isinstance(value, str):
        return value
    if typ is dict and isinstance(value, dict):
        return value
    if typ is list and isinstance(value, list):
        return value
    problems.append(f"{name}: expected {typ.__name__}, got {type(value).__name__} {value!r}")
    return None


def parse_config(subcommand: str, file_path: str | None, overrides: dict) -> dict:
    """Merge defaults <- config file <- explicit flags, validating everything.

    All problems (unknown keys, type mismatches, constraint violations) are
    aggregated into one ConfigError.
    """
    schema = SCHEMAS[subcommand]
    problems: list[str] = []
    params = {k: default for k, (_, default) in schema.items()}

    if file_path:
        try:
            with open(file_path) as fh:
                data = json.load(fh)
        except FileNotFoundError:
            raise ConfigError([f"config file not found: {file_path}"])
        except json.JSONDecodeError as err:
            raise ConfigError([f"config file is not valid JSON: {err}"])
        if not isinstance(data, dict):
            raise ConfigError(["config file must hold a JSON object"])
        for key, value in data.items():
            if key not in schema:
                problems.append(f"unknown config key {key!r} for {subcommand}")
                continue
            coerced = _coerce(key, value, schema[key][0], problems)
            if coerced is not None:
                params[key] = coerced

    for key, value in overrides.items():
        if value is None:
            continue
        coerced = _coerce(key, value, schema[key][0], problems)
        if coerced is not None:
            params[key] = coerced

    problems.extend(_constraint_problems(subcommand, params))
    if problems:
        raise ConfigError(problems)
    return params


def _constraint_problems(subcommand: str, p: dict) -> list[str]:
    problems = []

    def positive(name):
        if p.get(name) is not None and p[name] <= 0:
            problems.append(f"{name} must be > 0, got {p[name]}")

    def nonneg(name):
        if p.get(name) is not None and p[name] < 0:
            problems.append(f"{name} must be >= 0, got {p[name]}")

    if subcommand == "bounds":
        if p["d"] not in (2, 3):
            problems.append(f"d must be 2 or 3, got {p['d']}")
        positive("nu")
        nonneg("alpha")
        nonneg("gnorm")
        positive("lambda1")
        positive("measure")
        if p["geometry"] not in ("torus", "domain"):
            problems.append(f"geometry must be torus|domain, got {p['geometry']!r}")
    elif subcommand in ("simulate", "lyapunov"):
        positive("nu")
        nonneg("alpha")
        positive("dt")
        if p["n"] < 8 or p["n"] % 2:
            problems.append(f"n must be even and >= 8, got {p['n']}")
        for spec_key in ("forcing", "initial"):
            kind = p[spec_key].get("kind")
            allowed = {"forcing": ("zero", "shear", "modes"),
                       "initial": ("zero", "shear", "random", "file")}[spec_key]
            if kind not in allowed:
                problems.append(f"{spec_key}.kind must be one of {allowed}, got {kind!r}")
        if subcommand == "simulate":
            nonneg("t_end")
            if p["sample_every"] < 1:
                problems.append(f"sample_every must be >= 1, got {p['sample_every']}")
        else:
            positive("window")
            nonneg("warmup")
            if p["frame_n"] < 1:
                problems.append(f"frame_n must be >= 1, got {p['frame_n']}")
            if p["reorth_every"] < 1:
                problems.append(f"reorth_every must be >= 1, got {p['reorth_every']}")
    elif subcommand == "verify":
        if p["target"] not in VERIFY_TARGETS:
            problems.append(f"target must be one of {VERIFY_TARGETS}, got {p['target']!r}")
        for key in ("jmax", "mmax", "families", "family_n", "lam_min", "lam_max", "sums_lam_max"):
            if p[key] < 1:
                problems.append(f"{key} must be >= 1, got {p[key]}")
        nonneg("alpha")
        if p["grid_n"] < 8 or p["grid_n"] % 2:
            problems.append(f"grid_n must be even and >= 8, got {p['grid_n']}")
    return problems


def _forcing_from(params: dict) -> dyn.ForcingSpec:
    f = params["forcing"]
    kind = f.get("kind", "zero")
    if kind == "zero":
        return dyn.ForcingSpec.zero()
    if kind == "shear":
        return dyn.ForcingSpec.shear(float(f.get("amplitude", 1.0)), int(f.get("wavenumber", 1)))
    modes = [((int(m[0]), int(m[1])), (m[2] + 1j * m[3], m[4] + 1j * m[5]))
             for m in f["modes"]]
    return dyn.ForcingSpec.from_modes(modes)


def _initial_from(params: dict, seed: int) -> dyn.InitialSpec:
    ic = params["initial"]
    kind = ic.get("kind", "zero")
    if kind == "zero":
        return dyn.InitialSpec.zero()
    if kind == "shear":
        return dyn.InitialSpec.shear(float(ic.get("amplitude", 1.0)), int(ic.get("wavenumber", 1)))
    if kind == "random":
        return dyn.InitialSpec.random(seed=int(ic.get("seed", seed)),
                                      decay=float(ic.get("decay", 3.0)),
                                      amplitude=float(ic.get("amplitude", 1.0)))
    return dyn.InitialSpec.from_file(ic["path"])


# ----------------------------------------------------------------------------
# subcommand runners (return (exit_code, summary))

def _run_bounds(params: dict, outdir: Path, seed: int, manifest: RunManifest):
    inp = bounds_mod.BoundsInput(
        d=params["d"], nu=params["nu"], alpha=params["alpha"], g_norm=params["gnorm"],
        lambda1=params["lambda1"], domain_measure=params["measure"],
        geometry=params["geometry"])
    report = bounds_mod.build_report(inp, g0_offset=params["g0_offset"])
    report_path = outdir / "bounds.json"
    write_json(report_path, report.as_dict())
    manifest.add_artifact(report_path)
    table_path = outdir / "bounds.txt"
    table = report.to_text()
    from .fieldio import atomic_write_text

    atomic_write_text(table_path, table + "\n")
    manifest.add_artifact(table_path)
    print(table)
    return EXIT_OK, {"passed": True, "entries": len(report.entries)}


def _sim_config(params: dict, seed: int) -> dyn.SimConfig:
    grid = sp.SpectralGrid(params["n"])
    return dyn.SimConfig(
        nu=params["nu"], alpha=params["alpha"], grid=grid, dt=params["dt"],
        t_end=params.get("t_end", 0.0), forcing=_forcing_from(params),
        initial=_initial_from(params, seed),
        sample_every=params.get("sample_every", 10))


def _run_simulate(params: dict, outdir: Path, seed: int, manifest: RunManifest):
    cfg = _sim_config(params, seed)
    result = dyn.integrate(cfg, snapshot_every=params["snapshot_every"])
    csv_path = outdir / "diagnostics.csv"
    result.diagnostics.write_csv(csv_path)
    manifest.add_artifact(csv_path)
    final_path = outdir / "final_state.field"
    save_field(result.final, final_path, alpha=cfg.alpha)
    manifest.add_artifact(final_path)
    for t, snap in result.snapshots:
        snap_path = outdir / f"snapshot_t{t:.6g}.field"
        save_field(snap, snap_path, alpha=cfg.alpha)
        manifest.add_artifact(snap_path)

    checks = [dyn.check_dissipative_bound(result.diagnostics, cfg)]
    checks.extend(dyn.check_time_averages(result.diagnostics, cfg))
    passed = all(c.passed for c in checks)
    summary = {
        "passed": passed,
        "steps": result.steps,
        "checks": [{"name": c.name, "passed": c.passed, "max_violation": c.max_violation}
                   for c in checks],
    }
    return (EXIT_OK if passed else EXIT_VERIFICATION), summary


def _run_lyapunov(params: dict, outdir: Path, seed: int, manifest: RunManifest):
    cfg = _sim_config(params, seed)
    burn_in = None if params["burn_in"] < 0 else params["burn_in"]
    kwargs = dict(warmup=params["warmup"], burn_in=burn_in,
                  reorth_every=params["reorth_every"], seed=seed)
    if params["scan"]:
        scan = lyp.scan_n_star(cfg, t_end=params["window"], n_max=params["n_max"], **kwargs)
        for n, series in scan.series.items():
            csv_path = outdir / f"trace_n{n}.csv"
            series.write_csv(csv_path)
            manifest.add_artifact(csv_path)
        summary_path = outdir / "summary.json"
        write_json(summary_path, scan.summary())
        manifest.add_artifact(summary_path)
        return EXIT_OK, {"passed": True, **scan.summary()}
    series = lyp.q_n_estimate(cfg, params["frame_n"], params["window"], **kwargs)
    csv_path = outdir / f"trace_n{params['frame_n']}.csv"
    series.write_csv(csv_path)
    manifest.add_artifact(csv_path)
    summary_path = outdir / "summary.json"
    write_json(summary_path, series.summary())
    manifest.add_artifact(summary_path)
    return EXIT_OK, {"passed": True, **series.summary()}


def _run_verify(params: dict, outdir: Path, seed: int, manifest: RunManifest):
    target = params["target"]
    grid = sp.SpectralGrid(params["grid_n"])
    seeds = range(seed, seed + params["families"])
    witness = None

    if target == "spectrum":
        rep = lattice.verify_eigenvalue_bounds(params["jmax"])
        payload = {
            "target": target, "range": {"j_max": params["jmax"]},
            "worst_ratio": max(1.0 / rep.min_ratio_lower, 1.0 / rep.min_ratio_upper),
            "pass": rep.passed, "violations": rep.violations, "note": rep.counting_note,
        }
    elif target == "liyau":
        rep = lattice.verify_liyau(params["mmax"])
        payload = {
            "target": target, "range": {"m_max": params["mmax"]},
            "worst_ratio": 1.0 / rep.min_sum_ratio,
            "pass": rep.passed, "violations": rep.violations,
        }
    elif target == "lt":
        sweep = ineq.run_lt_sweep(grid, seeds, n=params["family_n"],
                                  kind=params["kind"], alpha=params["alpha"])
        payload = {"target": target,
                   "range": {"families": params["families"], "n": params["family_n"]},
                   **sweep.as_dict()}
        payload["pass"] = sweep.all_passed
        witness = sweep
    elif target == "rho-l2":
        sweep = ineq.run_rho_l2_sweep(grid, seeds, alphas=params["alphas"],
                                      n=params["family_n"])
        payload = {"target": target,
                   "range": {"families": params["families"], "alphas": params["alphas"]},
                   **sweep.as_dict()}
        payload["pass"] = sweep.all_passed
        witness = sweep
    else:  # rho-linf
        sums = lattice.verify_spectral_sums(params["sums_lam_max"])
        sweep = ineq.run_rho_linf_sweep(
            grid, seeds, lam_caps=range(params["lam_min"], params["lam_max"] + 1),
            n=params["family_n"], alpha=params["alpha"])
        payload = {"target": target,
                   "range": {"families": params["families"],
                             "lam": [params["lam_min"], params["lam_max"]],
                             "sums_lam_max": params["sums_lam_max"]},
                   **sweep.as_dict()}
        payload["spectral_sums_pass"] = sums.passed
        payload["pass"] = sweep.all_passed and sums.passed
        witness = sweep

    if witness is not None and witness.near_saturation:
        # keep the closest-to-saturation family on disk for inspection;
        # worst_seed is the recorded successful sub-seed, so re-sampling
        # from it reproduces the family exactly
        worst_seed = witness.worst_seed
        worst_report = max(witness.reports, key=lambda r: r.ratio)
        alpha = worst_report.extras.get("alpha", params["alpha"])
        role = sp.VORTICITY if target == "rho-linf" else sp.VELOCITY
        fam = ineq.sample_suborthonormal(
            grid, params["family_n"], params.get("kind", ineq.ALPHA_ORTHONORMAL),
            worst_seed, role, sp.AlphaMetric(alpha))
        for j in range(fam.n):
            wpath = outdir / f"witness_seed{worst_seed}_vec{j}.field"
            save_field(sp.SpectralField(grid, role, fam.vectors[j]), wpath,
                       alpha=params["alpha"])
            manifest.add_artifact(wpath)
        payload["witness_persisted"] = True

    report_path = outdir / f"report_{target}.json"
    write_json(report_path, payload)
    manifest.add_artifact(report_path)
    print(json.dumps(payload, indent=2, sort_keys=True, default=str))
    return (EXIT_OK if payload["pass"] else EXIT_VERIFICATION), {"passed": payload["pass"]}


# ----------------------------------------------------------------------------
# entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nsvlab", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file; flags override its values")
        p.add_argument("--seed", type=int, default=0, help="base random seed")
        p.add_argument("--output-dir", help="artifact directory "
                       "(default $NSVLAB_OUTPUT_DIR or ./nsvlab_runs/<subcommand>)")

    p = sub.add_parser("bounds", help="evaluate every dimension bound for given parameters")
    add_common(p)
    p.add_argument("--d", type=int)
    p.add_argument("--nu", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--gnorm", type=float)
    p.add_argument("--lambda1", type=float)
    p.add_argument("--measure", type=float)
    p.add_argument("--geometry", choices=("torus", "domain"))
    p.add_argument("--g0-offset", dest="g0_offset", type=float)

    p = sub.add_parser("simulate", help="integrate the regularized flow, write diagnostics")
    add_common(p)
    for name, typ in (("n", int), ("nu", float), ("alpha", float), ("dt", float),
                      ("t_end", float), ("sample_every", int), ("snapshot_every", int)):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ)
    p.add_argument("--forcing-kind", dest="forcing_kind", choices=("zero", "shear"))
    p.add_argument("--forcing-amplitude", dest="forcing_amplitude", type=float)
    p.add_argument("--forcing-wavenumber", dest="forcing_wavenumber", type=int)
    p.add_argument("--initial-kind", dest="initial_kind",
                   choices=("zero", "shear", "random", "file"))
    p.add_argument("--initial-amplitude", dest="initial_amplitude", type=float)
    p.add_argument("--initial-path", dest="initial_path")

    p = sub.add_parser("lyapunov", help="trace averages q_hat(n) and the n* scan")
    add_common(p)
    for name, typ in (("n", int), ("nu", float), ("alpha", float), ("dt", float),
                      ("frame_n", int), ("window", float), ("warmup", float),
                      ("burn_in", float), ("reorth_every", int), ("n_max", int)):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ)
    p.add_argument("--scan", action="store_const", const=True, default=None)
    p.add_argument("--forcing-kind", dest="forcing_kind", choices=("zero", "shear"))
    p.add_argument("--forcing-amplitude", dest="forcing_amplitude", type=float)
    p.add_argument("--forcing-wavenumber", dest="forcing_wavenumber", type=int)
    p.add_argument("--initial-kind", dest="initial_kind",
                   choices=("zero", "shear", "random", "file"))
    p.add_argument("--initial-amplitude", dest="initial_amplitude", type=float)
    p.add_argument("--initial-path", dest="initial_path")

    p = sub.add_parser("verify", help="brute-force verification targets")
    add_common(p)
    p.add_argument("target", choices=VERIFY_TARGETS)
    for name, typ in (("jmax", int), ("mmax", int), ("families", int), ("family_n", int),
                      ("grid_n", int), ("alpha", float), ("lam_min", int),
                      ("lam_max", int), ("sums_lam_max", int)):
        p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=typ)
    p.add_argument("--kind", choices=(ineq.ALPHA_ORTHONORMAL, ineq.GRAM_SCALED))
    p.add_argument("--alphas", type=float, nargs="+")
    return parser


def _collect_overrides(args: argparse.Namespace, subcommand: str) -> dict:
    schema = SCHEMAS[subcommand]
    overrides = {}
    for key in schema:
        if hasattr(args, key) and getattr(args, key) is not None:
            overrides[key] = getattr(args, key)
    # flat forcing/initial flags fold into their nested dicts
    if subcommand in ("simulate", "lyapunov"):
        forcing = {}
        if getattr(args, "forcing_kind", None):
            forcing["kind"] = args.forcing_kind
        if getattr(args, "forcing_amplitude", None) is not None:
            forcing["amplitude"] = args.forcing_amplitude
        if getattr(args, "forcing_wavenumber", None) is not None:
            forcing["wavenumber"] = args.forcing_wavenumber
        if forcing:
            base = dict(SCHEMAS[subcommand]["forcing"][1])
            base.update(forcing)
            overrides["forcing"] = base
        initial = {}
        if getattr(args, "initial_kind", None):
            initial["kind"] = args.initial_kind
        if getattr(args, "initial_amplitude", None) is not None:
            initial["amplitude"] = args.initial_amplitude
        if getattr(args, "initial_path", None):
            initial["path"] = args.initial_path
        if initial:
            base = dict(SCHEMAS[subcommand]["initial"][1])
            base.update(initial)
            overrides["initial"] = base
    return overrides


RUNNERS = {
    "bounds": _run_bounds,
    "simulate": _run_simulate,
    "lyapunov": _run_lyapunov,
    "verify": _run_verify,
}


def run(subcommand: str, params: dict, seed: int, output_dir: Path) -> int:
    """Dispatch a validated configuration and write the run manifest."""
    output_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(config={"subcommand": subcommand, "params": params, "seed": seed})
    started = time.time()
    try:
        code, summary = RUNNERS[subcommand](params, output_dir, seed, manifest)
    except IntegrationDivergedError as err:
        manifest.summary = {"passed": False, "error": str(err), "diverged_step": err.step}
        manifest.complete = False
        manifest.wall_clock_s = time.time() - started
        manifest.write(output_dir / "manifest.json")
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ArithmeticError, FloatingPointError, np.linalg.LinAlgError, OSError) as err:
        manifest.summary = {"passed": False, "error": str(err)}
        manifest.complete = False
        manifest.wall_clock_s = time.time() - started
        try:
            manifest.write(output_dir / "manifest.json")
        except OSError:
            pass  # partial artifacts keep their .partial suffix
        print(f"error: {err}", file=sys.stderr)
        return EXIT_RUNTIME
    manifest.summary = summary
    manifest.wall_clock_s = time.time() - started
    manifest.write(output_dir / "manifest.json")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    subcommand = args.subcommand
    try:
        overrides = _collect_overrides(args, subcommand)
        if subcommand == "verify":
            overrides["target"] = args.target
        params = parse_config(subcommand, args.config, overrides)
    except ConfigError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except InvalidParameterError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG

    outdir = Path(args.output_dir or os.environ.get("NSVLAB_OUTPUT_DIR")
                  or Path("nsvlab_runs") / subcommand)
    try:
        return run(subcommand, params, args.seed, outdir)
    except InvalidParameterError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
