"""Command line surface: vpfp, pnp, sweep, and checks subcommands.

Every run writes CSV time series, a JSON manifest that echoes the fully
resolved configuration (enough to reproduce the run bit for bit), and a
standalone matplotlib script that renders the standard curves from the
CSV files.  CSV numbers are printed with repr-roundtrip precision, and
nothing in the pipeline draws random numbers, so rerunning a config
reproduces identical CSV bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .fokker_planck import apply_fp, build_maxwellians, fp_inverse_check
from .grid import KineticState, PhaseGrid, SpeciesParams
from .kernels import BACKEND
from .limits import (CK_TOL, LOGSO_TOL, SweepCase, SweepResult, ck_check,
                     diffusivity_probe, estimate_order, limit_current_check,
                     logsobolev_check, relative_entropy, sweep_epsilon)
from .pnp import PnpProblem, run_pnp, sg_flux
from .poisson import NEUTRALITY_RTOL, solve_poisson
from .transport import BC_MODES
from .util import bernoulli, fmt
from .vpfp import (SPLITTING_ORDER, TRACE_NOTE, VpfpProblem, dg_information,
                   entropy_production, free_energy, run_vpfp,
                   verify_dissipation)

__all__ = ["main", "run"]

WALL_FLUX_TOL = 1e-14
ENERGY_STEP_RTOL = 1e-6       # kinetic free energy, relative to |E(0)|
PNP_ENERGY_STEP_TOL = 1e-8    # drift-diffusion energy, absolute per step


class _OutputDir:
    """Collects written artifacts so the manifest can inventory them."""

    def __init__(self, path: str):
        self.dir = Path(path)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[dict] = []

    def write_csv(self, name: str, header, rows):
        target = self.dir / name
        with open(target, "w", newline="") as fh:
            fh.write(",".join(header) + "\n")
            for row in rows:
                fh.write(",".join(row) + "\n")
        self.files.append({"name": name, "bytes": target.stat().st_size})

    def write_text(self, name: str, text: str):
        target = self.dir / name
        with open(target, "w", newline="") as fh:
            fh.write(text)
        self.files.append({"name": name, "bytes": target.stat().st_size})

    def write_manifest(self, manifest: dict):
        manifest = dict(manifest)
        manifest["outputs"] = self.files + [{"name": "manifest.json"}]
        with open(self.dir / "manifest.json", "w", newline="") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _base_manifest(subcommand: str, cfg: RunConfig | None,
                   t0: float) -> dict:
    manifest = {
        "tool": {"name": "vpfplab", "version": __version__,
                 "kernels_backend": BACKEND},
        "subcommand": subcommand,
        "scheme": {
            "splitting_order": list(SPLITTING_ORDER),
            "trace_convention": TRACE_NOTE,
            "x_transport": "first-order upwind, zero inflow plus "
                           "reflected-trace reinjection",
            "v_transport": "first-order upwind, zero-flux velocity ends",
            "collision_step": "implicit exponential-fitting finite-volume "
                              "solve (unconditionally positive)",
            "pnp_flux": "exponential-fitting face flux, implicit density, "
                        "lagged potential",
        },
        "tolerances": {
            "ck": CK_TOL,
            "logso": LOGSO_TOL,
            "neutrality_rtol": NEUTRALITY_RTOL,
            "wall_flux": WALL_FLUX_TOL,
            "energy_step_rtol": ENERGY_STEP_RTOL,
            "pnp_energy_step": PNP_ENERGY_STEP_TOL,
        },
        "wall_clock_seconds": round(time.perf_counter() - t0, 3),
    }
    if cfg is not None:
        manifest["config"] = cfg.echo()
        manifest["config"]["path"] = cfg.source_path
        manifest["config"]["sha256"] = hashlib.sha256(
            cfg.source_text.encode()).hexdigest()
    return manifest


def _sample_series_rows(problem: VpfpProblem, samples):
    """Per-sample, per-species diagnostics rows for series.csv."""
    g = problem.grid
    for snap in samples:
        state = KineticState(g, problem.species, snap.f, snap.t,
                             problem.epsilon)
        field = solve_poisson(snap.n, [sp.z for sp in problem.species],
                              problem.background, problem.varpi, g)
        e_tot = free_energy(state, field)
        for i, sp in enumerate(problem.species):
            wq_l = problem.wallq[i]["left"]
            wq_r = problem.wallq[i]["right"]
            dg = (dg_information(snap.f[i][0, wq_l.out_slice], wq_l)
                  + dg_information(snap.f[i][-1, wq_r.out_slice], wq_r))
            ck_l, ck_r = ck_check(state, problem.maxw, i)
            ls_l, ls_r = logsobolev_check(state, problem.maxw, i)
            yield [fmt(snap.t), sp.label,
                   fmt(snap.n[i].sum() * g.dx),
                   fmt(e_tot),
                   fmt(entropy_production(state, i)),
                   fmt(dg),
                   fmt(ck_l), fmt(ck_r), fmt(ls_l), fmt(ls_r),
                   fmt(relative_entropy(state, problem.maxw, i))]


_SERIES_HEADER = ["t", "species", "mass", "free_energy",
                  "entropy_production", "dg_info", "ck_lhs", "ck_rhs",
                  "logso_lhs", "logso_rhs", "relative_entropy"]


def _step_rows(records, species):
    for r in records:
        for i, sp in enumerate(species):
            yield [fmt(r.t), fmt(r.dt), sp.label, fmt(r.mass[i]),
                   fmt(r.free_energy), fmt(r.field_energy),
                   fmt(r.kinetic_entropy[i]), fmt(r.second_moment[i]),
                   fmt(r.entropy_production[i]),
                   fmt(r.dg_left[i]), fmt(r.dg_right[i]),
                   fmt(r.wall_flux_left[i]), fmt(r.wall_flux_right[i]),
                   fmt(r.neutrality), fmt(r.fmin)]


_STEP_HEADER = ["t", "dt", "species", "mass", "free_energy", "field_energy",
                "kinetic_entropy", "second_moment", "entropy_production",
                "dg_left", "dg_right", "wall_flux_left", "wall_flux_right",
                "neutrality", "fmin"]


def _profile_rows(samples, species, grid):
    for snap in samples:
        for i, sp in enumerate(species):
            for j in range(grid.nx):
                yield [fmt(snap.t), sp.label, fmt(grid.x[j]),
                       fmt(snap.n[i][j]), fmt(snap.j[i][j])]


def _field_rows(samples, grid):
    for snap in samples:
        e_cell = 0.5 * (snap.e_faces[:-1] + snap.e_faces[1:])
        for j in range(grid.nx):
            yield [fmt(snap.t), fmt(grid.x[j]), fmt(snap.phi[j]),
                   fmt(e_cell[j])]


_PLOT_COMMON = '''#!/usr/bin/env python3
"""Render the standard curves from the CSV files next to this script."""
import csv
import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))


def read(name):
    with open(os.path.join(HERE, name), newline="") as fh:
        return list(csv.DictReader(fh))


'''

_PLOT_ENERGY_FN = '''def plot_energy(rows, out, label="free_energy"):
    seen = {}
    for row in rows:
        key = row.get("epsilon", "")
        seen.setdefault(key, ([], []))
        seen[key][0].append(float(row["t"]))
        seen[key][1].append(float(row[label]))
    fig, ax = plt.subplots(figsize=(6, 4))
    for key, (ts, es) in sorted(seen.items()):
        name = f"epsilon={key}" if key else label
        ax.plot(ts, es, label=name)
    ax.set_xlabel("t")
    ax.set_ylabel(label)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(os.path.join(HERE, out), dpi=150)
    print("wrote", out)


'''

_PLOT_VPFP = _PLOT_COMMON + _PLOT_ENERGY_FN + '''rows = read("steps.csv")
dedup = {}
for row in rows:
    dedup.setdefault(row["t"], row)
plot_energy(list(dedup.values()), "energy_vs_time.png")
'''

_PLOT_PNP = _PLOT_COMMON + _PLOT_ENERGY_FN + '''rows = read("series.csv")
dedup = {}
for row in rows:
    dedup.setdefault(row["t"], row)
plot_energy(list(dedup.values()), "energy_vs_time.png", label="energy")
'''

_PLOT_SWEEP = _PLOT_COMMON + _PLOT_ENERGY_FN + '''rows = read("sup.csv")
by_species = {}
for row in rows:
    by_species.setdefault(row["species"], ([], []))
    by_species[row["species"]][0].append(float(row["epsilon"]))
    by_species[row["species"]][1].append(float(row["sup_ngap"]))
fig, ax = plt.subplots(figsize=(6, 4))
for label, (eps, gaps) in sorted(by_species.items()):
    ax.loglog(eps, gaps, "o-", label=label)
ax.set_xlabel("epsilon")
ax.set_ylabel("sup_t L1 density gap")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(HERE, "gaps_vs_epsilon.png"), dpi=150)
print("wrote gaps_vs_epsilon.png")

energy_rows = read("energy.csv")
dedup = {}
for row in energy_rows:
    dedup.setdefault((row["epsilon"], row["t"]), row)
plot_energy(list(dedup.values()), "energy_vs_time.png")
'''


def _cmd_vpfp(cfg: RunConfig, out: _OutputDir, strict: bool, t0: float) -> int:
    cfg.ensure_runnable()
    if cfg.is_sweep:
        raise ConfigError(
            f"run.epsilon: {len(cfg.epsilons)} values given; the vpfp "
            f"subcommand runs a single epsilon (use sweep)")
    grid = cfg.build_grid()
    species = cfg.species_params()
    problem = VpfpProblem(grid, species, cfg.epsilons[0], cfg.varpi,
                          cfg.build_background(grid), bc_mode=cfg.bc_mode,
                          cfl=cfg.cfl)
    n0 = cfg.build_n0(grid)
    f0 = n0[:, :, None] * problem.maxw.m_tilde[:, None, :]
    result = run_vpfp(problem, f0, cfg.T, n_samples=cfg.n_samples)

    out.write_csv("steps.csv", _STEP_HEADER,
                  _step_rows(result.records, species))
    out.write_csv("series.csv", _SERIES_HEADER,
                  _sample_series_rows(problem, result.samples))
    out.write_csv("profiles.csv", ["t", "species", "x", "n", "j"],
                  _profile_rows(result.samples, species, grid))
    out.write_csv("fields.csv", ["t", "x", "phi", "e"],
                  _field_rows(result.samples, grid))
    out.write_text("plots.py", _PLOT_VPFP)

    report = verify_dissipation(result.records, problem.epsilon, species,
                                tol_step=None)
    wall_max = max(float(np.abs(r.wall_flux_left).max()) for r in result.records)
    wall_max = max(wall_max, max(float(np.abs(r.wall_flux_right).max())
                                 for r in result.records))
    mass0 = result.records[0].mass
    drift = max(float(np.abs(r.mass - mass0).max() / np.abs(mass0).max())
                for r in result.records)
    results = {
        "dissipation": {
            "ok": report.ok,
            "tol_step": report.tol_step,
            "worst_budget_excess": report.worst_budget_excess,
            "worst_energy_increase": report.worst_energy_increase,
            "messages": report.messages,
        },
        "max_abs_wall_flux": wall_max,
        "relative_mass_drift": drift,
        "min_f": min(float(r.fmin) for r in result.records),
        "steps": len(result.records) - 1,
    }
    manifest = _base_manifest("vpfp", cfg, t0)
    manifest["results"] = results
    out.write_manifest(manifest)

    violations = list(report.messages)
    if wall_max > WALL_FLUX_TOL:
        violations.append(
            f"wall flux reached {wall_max:.3e} (tolerance {WALL_FLUX_TOL:.1e})")
    for msg in violations:
        print(f"invariant violation: {msg}", file=sys.stderr)
    print(f"vpfp: {results['steps']} steps, "
          f"final t={result.final.t:g}, dissipation "
          f"{'ok' if report.ok else 'VIOLATED'}")
    return 1 if (strict and violations) else 0


def _cmd_pnp(cfg: RunConfig, out: _OutputDir, strict: bool, t0: float) -> int:
    cfg.ensure_runnable()
    grid = cfg.build_grid()
    species = cfg.species_params()
    problem = PnpProblem(grid, species, cfg.varpi,
                         cfg.build_background(grid),
                         diffusivity=cfg.diffusivity)
    result = run_pnp(problem, cfg.build_n0(grid), cfg.T,
                     n_samples=cfg.n_samples)

    def series_rows():
        for r in result.records:
            for i, sp in enumerate(species):
                yield [fmt(r.t), sp.label, fmt(r.mass[i]), fmt(r.energy),
                       fmt(r.field_energy), fmt(r.dissipation),
                       fmt(r.neutrality), fmt(r.nmin)]

    def profile_rows():
        for snap in result.samples:
            for i, sp in enumerate(species):
                for j in range(grid.nx):
                    yield [fmt(snap.t), sp.label, fmt(grid.x[j]),
                           fmt(snap.n[i][j])]

    out.write_csv("series.csv",
                  ["t", "species", "mass", "energy", "field_energy",
                   "dissipation", "neutrality", "nmin"], series_rows())
    out.write_csv("profiles.csv", ["t", "species", "x", "n"], profile_rows())
    out.write_csv("fields.csv", ["t", "x", "phi", "e"],
                  _field_rows(result.samples, grid))
    out.write_text("plots.py", _PLOT_PNP)

    e = np.array([r.energy for r in result.records])
    de = np.diff(e)
    n_viol = int((de > PNP_ENERGY_STEP_TOL).sum())
    results = {
        "energy_initial": float(e[0]),
        "energy_final": float(e[-1]),
        "energy_increase_violations": n_viol,
        "worst_energy_increase": float(de.max()) if de.size else 0.0,
        "min_n": min(float(r.nmin) for r in result.records),
        "steps": len(result.records) - 1,
    }
    manifest = _base_manifest("pnp", cfg, t0)
    manifest["results"] = results
    out.write_manifest(manifest)

    if n_viol:
        print(f"invariant violation: drift-diffusion energy increased "
              f"beyond tolerance on {n_viol} steps", file=sys.stderr)
    print(f"pnp: {results['steps']} steps, final t={result.t:g}, "
          f"energy {e[0]:.6g} -> {e[-1]:.6g}")
    return 1 if (strict and n_viol) else 0


def _sweep_csvs(out: _OutputDir, sweep: SweepResult, species):
    def gap_rows():
        for run in sweep.runs:
            for k, t in enumerate(run.times):
                for i, sp in enumerate(species):
                    yield [fmt(run.epsilon), fmt(t), sp.label,
                           fmt(run.fgap_l1[k, i]), fmt(run.ngap_l1[k, i]),
                           fmt(run.ck_lhs[k, i]), fmt(run.ck_rhs[k, i]),
                           fmt(run.logso_lhs[k, i]), fmt(run.logso_rhs[k, i]),
                           fmt(run.rnorm_base[k, i]), fmt(run.rnorm_vv[k, i]),
                           fmt(run.rnorm_v[k, i])]

    def phigap_rows():
        for run in sweep.runs:
            for k, t in enumerate(run.times):
                yield [fmt(run.epsilon), fmt(t), fmt(run.phigap_l2[k])]

    def sup_rows():
        for a, run in enumerate(sweep.runs):
            for i, sp in enumerate(species):
                yield [fmt(run.epsilon), sp.label,
                       fmt(sweep.sup_ngap[a, i]), fmt(sweep.sup_fgap[a, i]),
                       fmt(sweep.sup_phigap[a])]

    def monitor_rows():
        for run in sweep.runs:
            for name in sorted(run.monitors):
                yield [fmt(run.epsilon), name, fmt(run.monitors[name])]

    def energy_rows():
        for run in sweep.runs:
            for r in run.result.records:
                yield [fmt(run.epsilon), fmt(r.t), fmt(r.free_energy),
                       fmt(r.field_energy)]

    out.write_csv("gaps.csv",
                  ["epsilon", "t", "species", "fgap_l1", "ngap_l1",
                   "ck_lhs", "ck_rhs", "logso_lhs", "logso_rhs",
                   "rnorm_base", "rnorm_vv", "rnorm_v"], gap_rows())
    out.write_csv("phigap.csv", ["epsilon", "t", "phigap_l2"], phigap_rows())
    out.write_csv("sup.csv",
                  ["epsilon", "species", "sup_ngap", "sup_fgap",
                   "sup_phigap"], sup_rows())
    out.write_csv("monitors.csv", ["epsilon", "monitor", "value"],
                  monitor_rows())
    out.write_csv("energy.csv",
                  ["epsilon", "t", "free_energy", "field_energy"],
                  energy_rows())


def _cmd_sweep(cfg: RunConfig, out: _OutputDir, strict: bool,
               t0: float) -> int:
    cfg.ensure_runnable()
    grid = cfg.build_grid()
    species = cfg.species_params()
    case = SweepCase(grid=grid, species=species, varpi=cfg.varpi,
                     background=cfg.build_background(grid),
                     n0=cfg.build_n0(grid), T=cfg.T,
                     n_samples=cfg.n_samples, bc_mode=cfg.bc_mode,
                     cfl=cfg.cfl, diffusivity=cfg.diffusivity)
    sweep = sweep_epsilon(case, cfg.epsilons)
    _sweep_csvs(out, sweep, species)

    current = limit_current_check(sweep)
    probe = diffusivity_probe()

    orders = []
    order_results = {}
    if len(sweep.epsilons) >= 3:
        for i, sp in enumerate(species):
            fit = estimate_order(sweep.epsilons, sweep.sup_ngap[:, i])
            orders.append(["density_gap", sp.label, fit])
            fitf = estimate_order(sweep.epsilons, sweep.sup_fgap[:, i])
            orders.append(["equilibrium_gap", sp.label, fitf])
        fit = estimate_order(sweep.epsilons, sweep.sup_ngap.max(axis=1))
        orders.append(["density_gap", "max", fit])
        fitf = estimate_order(sweep.epsilons, sweep.sup_fgap.max(axis=1))
        orders.append(["equilibrium_gap", "max", fitf])
        fitp = estimate_order(sweep.epsilons, sweep.sup_phigap)
        orders.append(["potential_gap", "all", fitp])
        order_results = {
            f"{q}/{label}": {"slope": f.slope, "residual": f.residual,
                             "n_used": f.n_used, "excluded": f.excluded}
            for q, label, f in orders}

    def order_rows():
        for q, label, f in orders:
            yield [q, label, fmt(f.slope), fmt(f.residual),
                   str(f.n_used), str(f.excluded)]

    def current_rows():
        for a, eps in enumerate(current.epsilons):
            for m, mode in enumerate(current.modes):
                for i, sp in enumerate(species):
                    yield [fmt(eps), mode, sp.label,
                           fmt(current.per_species[a, m, i])]
                yield [fmt(eps), mode, "all",
                       fmt(current.aggregate[a, m])]

    out.write_csv("orders.csv",
                  ["quantity", "species", "slope", "residual", "n_used",
                   "excluded"], order_rows())
    out.write_csv("current.csv", ["epsilon", "mode", "species",
                                  "discrepancy"], current_rows())
    out.write_text("plots.py", _PLOT_SWEEP)

    violations = []
    dissipation = {}
    for run in sweep.runs:
        report = verify_dissipation(run.result.records, run.epsilon, species)
        dissipation[fmt(run.epsilon)] = {
            "ok": report.ok,
            "tol_step": report.tol_step,
            "worst_budget_excess": report.worst_budget_excess,
            "worst_energy_increase": report.worst_energy_increase,
            "messages": report.messages,
        }
        violations.extend(f"epsilon={run.epsilon:g}: {m}"
                          for m in report.messages)
        wall = max(
            float(np.abs(np.concatenate([r.wall_flux_left,
                                         r.wall_flux_right])).max())
            for r in run.result.records)
        if wall > WALL_FLUX_TOL:
            violations.append(
                f"epsilon={run.epsilon:g}: wall flux reached {wall:.3e}")

    sup_max = sweep.sup_ngap.max(axis=1)
    manifest = _base_manifest("sweep", cfg, t0)
    manifest["results"] = {
        "epsilons": sweep.epsilons,
        "sup_density_gap": [float(v) for v in sup_max],
        "sup_equilibrium_gap": [float(v)
                                for v in sweep.sup_fgap.max(axis=1)],
        "sup_potential_gap": [float(v) for v in sweep.sup_phigap],
        "orders": order_results,
        "dissipation": dissipation,
        "diffusivity_mode": {
            "configured": cfg.diffusivity,
            "sweep_verdict": current.verdict,
            "sweep_note": current.note,
            "sweep_discrepancies": {
                mode: [float(v) for v in current.aggregate[:, m]]
                for m, mode in enumerate(current.modes)},
            "sweep_decreasing": list(current.decreasing),
            "probe_verdict": probe.verdict,
            "probe_note": probe.note,
            "probe_gaps": probe.gaps,
            "probe_parameters": {"kappa": probe.kappa, "zeta": probe.zeta,
                                 "epsilon": probe.epsilon},
        },
    }
    out.write_manifest(manifest)

    for msg in violations:
        print(f"invariant violation: {msg}", file=sys.stderr)
    gaps_txt = ", ".join(f"{g:.4g}" for g in sup_max)
    print(f"sweep: epsilons {sweep.epsilons} -> sup density gaps "
          f"[{gaps_txt}]; diffusivity verdict: sweep {current.verdict}, "
          f"probe {probe.verdict}")
    return 1 if (strict and violations) else 0


def _checks_rows():
    """Operator identity panel: (check, case, value, bound, passed)."""
    rows = []

    prev = None
    for nv in (32, 64, 128):
        grid = PhaseGrid(nx=2, lx=1.0, nv=nv, vmax=8.0)
        sp = (SpeciesParams(label="s", z=0.0, kappa=1.0, zeta=1.0),)
        maxw = build_maxwellians(sp, grid)
        f = np.tile(maxw.m_tilde[0], (grid.nx, 1))
        resid = float(np.abs(apply_fp(f, sp[0], grid)).max())
        rows.append(("fp_null_space", f"nv={nv}", resid, "<=1e-12",
                     resid <= 1e-12))
        inv = fp_inverse_check(sp[0], grid)
        rows.append(("fp_inverse_residual", f"nv={nv}", inv, "", True))
        if prev is not None:
            ratio = prev / inv
            rows.append(("fp_inverse_ratio", f"nv={nv // 2}->{nv}", ratio,
                         "3.5..4.5", 3.5 <= ratio <= 4.5))
        prev = inv

    prev = None
    for nx in (32, 64, 128):
        grid = PhaseGrid(nx=nx, lx=1.0, nv=2, vmax=1.0)
        n = (1.0 + np.cos(np.pi * grid.x))[None, :]
        field = solve_poisson(n, [1.0], -np.ones(nx), 1.0, grid)
        exact = np.cos(np.pi * grid.x) / np.pi**2
        exact -= exact.sum() / nx
        err = float(np.abs(field.phi - exact).max())
        bound = "<=1.5e-3" if nx == 64 else ""
        rows.append(("poisson_manufactured", f"nx={nx}", err, bound,
                     err <= 1.5e-3 if nx == 64 else True))
        if prev is not None:
            ratio = prev / err
            rows.append(("poisson_ratio", f"nx={nx // 2}->{nx}", ratio,
                         "3.7..4.3", 3.7 <= ratio <= 4.3))
        prev = err

    grid = PhaseGrid(nx=64, lx=1.0, nv=2, vmax=1.0)
    sp = SpeciesParams(label="s", z=1.5, kappa=1.0, zeta=1.0)
    phi = 0.3 * np.cos(np.pi * grid.x)
    n_eq = np.exp(-sp.z * phi)
    flux = sg_flux(n_eq, phi, sp, 1.3, grid)
    resid = float(np.abs(flux).max())
    rows.append(("sg_boltzmann_exactness", "nx=64", resid, "<=1e-12",
                 resid <= 1e-12))

    s = np.array([-30.0, -1.0, -1e-8, 0.0, 1e-8, 1.0, 30.0])
    gap = float(np.abs(bernoulli(-s) - np.exp(s) * bernoulli(s)).max())
    rows.append(("bernoulli_reflection", "7 states", gap, "<=1e-9",
                 gap <= 1e-9))
    return rows


def _cmd_checks(out: _OutputDir, strict: bool, t0: float) -> int:
    rows = _checks_rows()
    out.write_csv("checks.csv",
                  ["check", "case", "value", "bound", "passed"],
                  ([name, case, fmt(value), bound, str(passed)]
                   for name, case, value, bound, passed in rows))
    failures = [(name, case, value) for name, case, value, _, passed in rows
                if not passed]
    manifest = _base_manifest("checks", None, t0)
    manifest["results"] = {
        "n_checks": len(rows),
        "n_failures": len(failures),
        "failures": [f"{name} [{case}] value {value:.6e}"
                     for name, case, value in failures],
    }
    out.write_manifest(manifest)
    for name, case, value, bound, passed in rows:
        status = "pass" if passed else "FAIL"
        print(f"{status}  {name:<24s} {case:<12s} {value:.6e} {bound}")
    return 1 if failures else 0


def run(subcommand: str, cfg: RunConfig | None, out_dir: str,
        strict: bool = False) -> int:
    """Execute one subcommand against a loaded config; returns exit status."""
    t0 = time.perf_counter()
    out = _OutputDir(out_dir)
    if subcommand == "vpfp":
        return _cmd_vpfp(cfg, out, strict, t0)
    if subcommand == "pnp":
        return _cmd_pnp(cfg, out, strict, t0)
    if subcommand == "sweep":
        return _cmd_sweep(cfg, out, strict, t0)
    if subcommand == "checks":
        return _cmd_checks(out, strict, t0)
    raise ValueError(f"unknown subcommand {subcommand!r}")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vpfplab",
        description="Kinetic and drift-diffusion runs on a bounded "
                    "interval, with diffusion-limit diagnostics.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name, needs_config, text in (
            ("vpfp", True, "run the kinetic solver at a single epsilon"),
            ("pnp", True, "run the drift-diffusion solver"),
            ("sweep", True, "run the epsilon sweep plus the reference"),
            ("checks", False, "run the operator identity panel")):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=needs_config, default=None,
                       help="path to the INI run configuration")
        p.add_argument("--out", default="vpfplab-out",
                       help="output directory (default: vpfplab-out)")
        p.add_argument("--strict", action="store_true",
                       help="exit nonzero on any invariant violation")
        p.add_argument("--mode", choices=BC_MODES, default=None,
                       help="override the wall reflection mode")
        p.add_argument("--diffusivity", choices=("kappa-over-zeta",
                                                 "one-over-zeta"),
                       default=None,
                       help="override the drift-diffusion coefficient mode")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = None
        if args.config is not None:
            cfg = load_config(args.config)
            if args.mode is not None:
                cfg.bc_mode = args.mode
            if args.diffusivity is not None:
                cfg.diffusivity = args.diffusivity
        return run(args.subcommand, cfg, args.out, strict=args.strict)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NotImplementedError as exc:
        print(f"not implemented: {exc}", file=sys.stderr)
        return 2
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
