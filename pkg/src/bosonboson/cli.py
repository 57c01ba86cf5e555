"""Command-line experiment runner.

Subcommands `spectrum`, `g2` and `dynamics` execute a plan file (see
plans.py for the schema) and write CSV data plus a JSON manifest; the
manifest carries the resolved configuration, package version and
convergence diagnostics, and deliberately no timestamps, so re-running a
plan reproduces every output byte for byte. `validate` runs the
oracle-equivalence suite and reports one pass/fail line per check.
`resume` continues an interrupted dynamics run from its checkpoint.

Sweep cells run on a bounded worker pool; a failing cell does not stop
the others. Completed rows are written, the manifest lists the failed
cells, and the exit code is non-zero.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .bath import BathSpec, polaron_shift
from .observables import CavityState, find_t_star, photon_statistics, wigner
from .plans import ExperimentPlan, PlanError, parse_plan
from .spectra import (WeakDriveProblem, g2_decorrelated, g2_full, resonance,
                      spectrum_scan)
from .tempo import SystemSpec, TempoConfig, load_checkpoint, run

_OUT_ENV = "BOSONBOSON_OUT"


def _fmt(x) -> str:
    """Full-precision, locale-free cell text."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def _write_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    lines += [",".join(_fmt(c) for c in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(path: Path, plan: ExperimentPlan, outputs,
                    diagnostics, incomplete) -> None:
    doc = {
        "version": __version__,
        "plan": plan.resolved(),
        "outputs": sorted(str(o) for o in outputs),
        "diagnostics": diagnostics,
        "incomplete": incomplete,
    }
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def _fail(report: dict, code: int = 2) -> int:
    print(json.dumps(report, sort_keys=True), file=sys.stderr)
    return code


def _map_cells(cells, worker, n_workers):
    """Run worker over cells preserving order; collect per-cell errors."""
    results, errors = [None] * len(cells), []
    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            futures = [pool.submit(worker, c) for c in cells]
            for i, fut in enumerate(futures):
                try:
                    results[i] = fut.result()
                except Exception as exc:
                    errors.append({"cell": i, "params": repr(cells[i]),
                                   "error": str(exc)})
    else:
        for i, cell in enumerate(cells):
            try:
                results[i] = worker(cell)
            except Exception as exc:
                errors.append({"cell": i, "params": repr(cells[i]),
                               "error": str(exc)})
    return results, errors


def _spectrum_method(plan: ExperimentPlan) -> str:
    if plan.method == "closed":
        return "ohmic-analytic" if plan.s == 1.0 else "superohmic-series"
    return plan.method


def _run_spectrum(plan: ExperimentPlan, out_dir: Path, workers: int) -> int:
    stem = out_dir / Path(plan.out).stem

    def cell(alpha):
        prob = WeakDriveProblem(
            bath=BathSpec(alpha=alpha, s=plan.s, omega_c=1.0),
            kappa=plan.kappa, eta=plan.eta)
        res = spectrum_scan(prob, plan.delta_grid(alpha),
                            method=_spectrum_method(plan), with_estimate=True)
        return prob, res

    results, errors = _map_cells(list(plan.alphas), cell, workers)
    rows, diag = [], {"quadrature_error_estimates": [], "warnings": []}
    for alpha, got in zip(plan.alphas, results):
        if got is None:
            continue
        prob, res = got
        for dc, val in zip(res.delta_c, res.values):
            rows.append((alpha, dc, val, polaron_shift(prob.bath)))
        if res.error_estimate is not None:
            diag["quadrature_error_estimates"].append(res.error_estimate)
        diag["warnings"] += res.warnings
    _write_csv(stem.with_suffix(".csv"),
               ["alpha", "delta_c_over_omega_c", "spectrum",
                "polaron_shift_over_omega_c"], rows)
    _write_manifest(stem.parent / (stem.name + "_manifest.json"), plan,
                    [stem.with_suffix(".csv").name], diag, errors)
    return 3 if errors else 0


def _as_state(rho: np.ndarray, worst: dict) -> CavityState:
    # demo-scale memory/bond settings leave eigenvalue floors well below
    # the converged default; validate against the run's own diagnostics
    floor = max(1e-6, 2.0 * abs(min(worst["min_eigenvalue"], 0.0)))
    return CavityState(rho, psd_tol=floor,
                       herm_tol=max(1e-8, 10.0 * worst["herm_error"]))


def _steady_statistics(plan: ExperimentPlan, alpha: float, delta_c: float):
    bath = BathSpec(alpha=alpha, s=plan.s, omega_c=1.0)
    system = SystemSpec(bath=bath, kappa=plan.kappa, delta_c=delta_c,
                        eta=plan.eta, dim=plan.dim)
    # steady-state sweeps only need the end point; keep a coarse record
    stride = max(plan.readout_stride,
                 int(round(plan.t_final / plan.dt)) // 8 or 1)
    cfg = TempoConfig(dt=plan.dt, t_final=plan.t_final,
                      memory_steps=plan.memory_steps,
                      svd_cutoff=plan.svd_cutoff, max_bond=plan.max_bond,
                      readout_stride=stride)
    res = run(system, cfg)
    worst = res.diagnostics.worst()
    return photon_statistics(_as_state(res.states[-1], worst)), worst


def _run_g2(plan: ExperimentPlan, out_dir: Path, workers: int) -> int:
    stem = out_dir / Path(plan.out).stem
    cells = [(a, float(dc)) for a in plan.alphas
             for dc in plan.delta_grid(a)]

    def cell(params):
        alpha, dc = params
        prob = WeakDriveProblem(
            bath=BathSpec(alpha=alpha, s=plan.s, omega_c=1.0),
            kappa=plan.kappa, delta_c=dc, eta=plan.eta)
        full, est = g2_full(prob, with_estimate=True)
        try:
            approx = g2_decorrelated(prob, method=plan.method)
        except ValueError:
            approx = float("nan")
        row = [alpha, dc, full, approx, est]
        worst = None
        if plan.has_tempo:
            stats, worst = _steady_statistics(plan, alpha, dc)
            row += [stats.g2 if stats.g2_defined else float("nan"),
                    stats.mean]
        return row, worst

    results, errors = _map_cells(cells, cell, workers)
    header = ["alpha", "delta_c_over_omega_c", "g2_full", "g2_decorrelated",
              "g2_quadrature_estimate"]
    if plan.has_tempo:
        header += ["g2_tempo_steady", "n_tempo_steady"]
    rows, diag = [], {"tempo_worst": []}
    for got in results:
        if got is None:
            continue
        row, worst = got
        rows.append(row)
        if worst is not None:
            diag["tempo_worst"].append(worst)
    _write_csv(stem.with_suffix(".csv"), header, rows)
    _write_manifest(stem.parent / (stem.name + "_manifest.json"), plan,
                    [stem.with_suffix(".csv").name], diag, errors)
    return 3 if errors else 0


def _dynamics_outputs(plan: ExperimentPlan, out_dir: Path, result) -> list:
    d = plan.dim
    stem = out_dir / Path(plan.out).stem
    pops = np.real([np.diag(r) for r in result.states])
    means = pops @ np.arange(d)
    diag = result.diagnostics
    rows = [(t, means[i], *pops[i], diag.trace_error[i], diag.herm_error[i],
             diag.min_eigenvalue[i], diag.max_bond[i],
             diag.discarded_weight[i], diag.renormalization_drift[i])
            for i, t in enumerate(result.times)]
    header = (["t_omega_c", "n_mean"] + [f"p{n}" for n in range(d)]
              + ["trace_error", "herm_error", "min_eigenvalue", "max_bond",
                 "discarded_weight", "renormalization_drift"])
    _write_csv(stem.with_suffix(".csv"), header, rows)

    t_star, idx = find_t_star(result.times, result.states)
    snapshot = _as_state(result.states[idx], result.diagnostics.worst())
    stats = photon_statistics(snapshot)
    _write_csv(stem.parent / (stem.name + "_photons.csv"),
               ["n", "population"],
               [(n, p) for n, p in enumerate(stats.populations)])

    grid = wigner(snapshot, extent=plan.wigner_extent,
                  points=plan.wigner_points)
    wrows = [(grid.x[i], grid.p[j], grid.values[j, i])
             for j in range(grid.values.shape[0])
             for i in range(grid.values.shape[1])]
    _write_csv(stem.parent / (stem.name + "_wigner.csv"),
               ["re_zeta", "im_zeta", "wigner"], wrows)
    return [stem.with_suffix(".csv").name, stem.name + "_photons.csv",
            stem.name + "_wigner.csv"], t_star, stats


def _run_dynamics(plan: ExperimentPlan, out_dir: Path,
                  resume_path=None) -> int:
    alpha = plan.alphas[0]
    delta_c = float(plan.delta_grid(alpha)[0])
    bath = BathSpec(alpha=alpha, s=plan.s, omega_c=1.0)
    system = SystemSpec(bath=bath, kappa=plan.kappa, delta_c=delta_c,
                        eta=plan.eta, dim=plan.dim)
    cfg = TempoConfig(dt=plan.dt, t_final=plan.t_final,
                      memory_steps=plan.memory_steps,
                      svd_cutoff=plan.svd_cutoff, max_bond=plan.max_bond,
                      readout_stride=plan.readout_stride)
    stem = out_dir / Path(plan.out).stem
    ckpt = stem.parent / (stem.name + ".ckpt")
    result = run(system, cfg,
                 checkpoint_path=ckpt if plan.checkpoint_every else None,
                 checkpoint_every=plan.checkpoint_every or None,
                 resume_from=resume_path)
    outputs, t_star, stats = _dynamics_outputs(plan, out_dir, result)
    diagnostics = dict(result.diagnostics.worst())
    diagnostics["t_star"] = t_star
    diagnostics["p1_at_t_star"] = float(stats.populations[1])
    _write_manifest(stem.parent / (stem.name + "_manifest.json"), plan,
                    outputs, diagnostics, [])
    return 0


_VALIDATE_CHECKS = ("path_sum", "wick_gaussian", "spectrum_closed_forms",
                    "bare_cavity_dynamics", "polaron_shift_discretization",
                    "uncoupled_g2")


def _validate_checks():
    """Dual-route consistency suite; yields (name, passed, detail)."""
    from .liouville import driven_cavity_expectations
    from .oracles import (discretize_bath, full_path_sum,
                          gaussian_correlator_oracle)
    from .bath import SignedTimeTuple, wick_exponent_from_f2
    from .spectra import spectrum_numeric

    bath = BathSpec(alpha=0.3, s=2.0, omega_c=1.0)
    system = SystemSpec(bath=bath, kappa=0.1, delta_c=0.3, eta=0.4, dim=2)
    cfg = TempoConfig(dt=0.1, t_final=0.8, memory_steps=8,
                      svd_cutoff=0.0, max_bond=4096)
    dev = float(np.max(np.abs(run(system, cfg).states
                              - full_path_sum(system, 0.1, 8)[1])))
    yield "path_sum", dev < 1e-8, f"max deviation {dev:.3e}"

    spec = BathSpec(alpha=0.2, s=1.0, omega_c=1.0)
    modes = discretize_bath(spec, n_modes=200, omega_max_factor=30.0)
    worst = 0.0
    times = [0.0, 0.31, 0.54, 1.2, 1.7, 2.3, 2.9, 3.4]
    for k in range(5):
        tup = SignedTimeTuple(times=tuple(times[k:k + 4]),
                              signs=(+1, -1, +1, -1))
        via_wick = np.exp(-wick_exponent_from_f2(modes.f2, tup.times,
                                                 tup.signs))
        worst = max(worst, abs(gaussian_correlator_oracle(modes, tup)
                               - via_wick))
    yield "wick_gaussian", worst < 1e-10, f"max deviation {worst:.3e}"

    worst = 0.0
    for s, alphas in ((1.0, (0.1, 0.4)), (2.0, (0.5, 2.0))):
        for alpha in alphas:
            for dc in (-1.0, -0.2, 0.5):
                prob = WeakDriveProblem(
                    bath=BathSpec(alpha=alpha, s=s, omega_c=1.0),
                    kappa=0.1, delta_c=dc)
                closed = spectrum_scan(prob, [dc]).values[0]
                numeric = spectrum_numeric(prob)
                worst = max(worst, abs(closed - numeric) / numeric)
    yield "spectrum_closed_forms", worst < 1e-5, f"max rel dev {worst:.3e}"

    system = SystemSpec(bath=BathSpec(alpha=0.0, s=1.0, omega_c=1.0),
                        kappa=0.4, delta_c=0.2, eta=0.2, dim=6)
    cfg = TempoConfig(dt=0.05, t_final=3.0, memory_steps=8,
                      svd_cutoff=1e-12, max_bond=256)
    res = run(system, cfg)
    worst = 0.0
    for t, rho in zip(res.times, res.states):
        n_exact = driven_cavity_expectations(0.2, 0.2, 0.4, t)[1]
        worst = max(worst, abs(np.real(np.trace(
            rho @ np.diag(np.arange(6.0)))) - n_exact))
    yield "bare_cavity_dynamics", worst < 1e-6, f"max deviation {worst:.3e}"

    spec = BathSpec(alpha=0.35, s=2.0, omega_c=1.0)
    modes = discretize_bath(spec, n_modes=200, omega_max_factor=30.0)
    dev = abs(modes.polaron_shift - polaron_shift(spec))
    yield "polaron_shift_discretization", dev < 1e-8, f"deviation {dev:.3e}"

    prob = WeakDriveProblem(bath=BathSpec(alpha=0.0, s=1.0, omega_c=1.0),
                            kappa=0.1, delta_c=0.3)
    dev = abs(g2_full(prob) - 1.0)
    yield "uncoupled_g2", dev < 1e-3, f"|g2 - 1| = {dev:.3e}"


def _run_validate(out_dir: Path, strict: bool) -> int:
    report, failed = [], 0
    for name, ok, detail in _validate_checks():
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        report.append({"check": name, "passed": bool(ok), "detail": detail})
        failed += 0 if ok else 1
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "validate_report.json").write_text(
        json.dumps({"version": __version__, "checks": report,
                    "failed": failed}, indent=2, sort_keys=True) + "\n")
    return 1 if failed else 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bosonboson",
        description="Experiment runner for the driven dephased-cavity "
                    "simulation toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, plan_required=True):
        p.add_argument("--plan", required=plan_required,
                       help="plan file (flat key=value)")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: ${_OUT_ENV} or .)")
        p.add_argument("--workers", type=int, default=1,
                       help="sweep worker threads")
        p.add_argument("--strict", action="store_true",
                       help="promote warnings to errors")

    for kind in ("spectrum", "g2", "dynamics"):
        common(sub.add_parser(kind, help=f"run a {kind} plan"))
    common(sub.add_parser("validate",
                          help="run the oracle-equivalence suite"),
           plan_required=False)
    resume = sub.add_parser("resume",
                            help="continue a dynamics run from checkpoint")
    resume.add_argument("checkpoint", help="checkpoint file")
    common(resume)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    out_dir = Path(args.out or os.environ.get(_OUT_ENV) or ".")
    out_dir.mkdir(parents=True, exist_ok=True)

    if args.command == "validate" and args.plan is None:
        return _run_validate(out_dir, args.strict)

    try:
        plan = parse_plan(Path(args.plan))
    except PlanError as exc:
        return _fail({"error": "invalid plan", "plan": str(args.plan),
                      "problems": exc.problems})
    except OSError as exc:
        return _fail({"error": "unreadable plan", "detail": str(exc)})

    if args.command == "validate":
        return _run_validate(out_dir, args.strict)
    if plan.kind != args.command and args.command != "resume":
        return _fail({"error": "plan kind mismatch",
                      "plan_kind": plan.kind, "command": args.command})
    if args.command == "resume" and plan.kind != "dynamics":
        return _fail({"error": "resume needs a dynamics plan",
                      "plan_kind": plan.kind})

    if args.strict:
        import warnings
        warnings.simplefilter("error")

    try:
        if plan.kind == "spectrum":
            return _run_spectrum(plan, out_dir, args.workers)
        if plan.kind == "g2":
            return _run_g2(plan, out_dir, args.workers)
        if args.command == "resume":
            return _run_dynamics(plan, out_dir,
                                 resume_path=Path(args.checkpoint))
        return _run_dynamics(plan, out_dir)
    except Exception as exc:
        return _fail({"error": exc.__class__.__name__, "detail": str(exc)},
                     code=4)


if __name__ == "__main__":
    raise SystemExit(main())
