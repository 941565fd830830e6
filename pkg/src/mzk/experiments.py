"""One runner per CLI subcommand.

Each runner takes a validated :class:`~mzk.config.RunConfig` and an output
directory, performs the experiment, writes auxiliary files (series CSVs,
snapshots) and returns an :class:`~mzk.report.ExperimentReport` whose
``metrics`` are what the config's ``assert`` block refers to.
"""
from __future__ import annotations

import math
import os
import time

import numpy as np

from . import diagnostics, illposed, inequalities
from .config import RunConfig
from .report import ExperimentReport
from .snapshot import write_snapshot
from .spectral import SpectralField, TorusGrid, hs_norm, shell_mask
from .timestepping import SolverConfig, solve


def _solver(cfg: RunConfig, N, record_every_default=1, **fallback):
    sv = cfg["solver"]
    dt, tol = sv["dt"], sv["tol"]
    if dt is None and tol is None:
        dt, tol = fallback.get("dt"), fallback.get("tol")
    return SolverConfig(N=N, t_end=float(sv["t_end"]), lam=float(cfg["equation"]["lam"]),
                        dt=dt, tol=tol, s=float(cfg["equation"]["s"]),
                        record_every=sv["record_every"] or record_every_default)


def _series_dir(out):
    d = os.path.join(out, "series")
    os.makedirs(d, exist_ok=True)
    return d


def _snap(cfg, out, name, field, t):
    if not cfg["output"]["snapshots"]:
        return None
    d = os.path.join(out, "snapshots")
    os.makedirs(d, exist_ok=True)
    path = os.path.join(d, f"{name}.mzk1")
    write_snapshot(path, field, t=t, lam=cfg["equation"]["lam"], s=cfg["equation"]["s"])
    return os.path.relpath(path, out)


def _slug(x):
    return f"{x:g}".replace(".", "p").replace("-", "m")


# --- simulate -------------------------------------------------------------

def initial_field(cfg: RunConfig):
    ini = cfg["initial"]
    K = int(cfg["grid"]["K"])
    if ini["kind"] == "zero":
        return SpectralField.zeros(TorusGrid(K))
    if ini["kind"] == "family":
        p = illposed.ApproxFamilyParams(int(ini["m"]), int(ini["j"]), float(ini["r"]),
                                        float(cfg["equation"]["s"]), float(cfg["equation"]["lam"]))
        return illposed.family_field(p, 0.0, TorusGrid(K))
    return diagnostics.smooth_random_field(K, cfg.seed, ini["decay"], ini["scale"])


def run_simulate(cfg: RunConfig, out):
    K = int(cfg["grid"]["K"])
    N = cfg["solver"]["N"] if cfg["solver"]["N"] is not None else K
    sc = _solver(cfg, N)
    u0 = initial_field(cfg)
    traj = solve(u0, sc)
    s = sc.s
    log = diagnostics.ConservationLog.from_trajectory(traj)
    hs = traj.norm_series(s)
    hs_var = float(np.abs(hs / hs[0] - 1).max()) if hs[0] > 0 else float(np.abs(hs).max())
    grad_value, grad_ratio = (diagnostics.grad_l1linf_diagnostic(traj) if len(traj) >= 2
                              else (math.nan, math.nan))
    violation = diagnostics.apriori_monitor(traj)
    traj.to_csv(os.path.join(_series_dir(out), "trajectory.csv"), s)
    snaps = [_snap(cfg, out, "initial", u0, 0.0), _snap(cfg, out, "final", traj.final, traj.times[-1])]
    rep = ExperimentReport("simulate")
    rep.payload = {"conservation": log.to_dict(), "hs_norm": hs.tolist(),
                   "grad_l1linf": grad_value, "grad_ratio": grad_ratio,
                   "apriori_violation_time": violation,
                   "steps": len(traj.step_sizes), "rejected_steps": int(sum(traj.rejected)),
                   "snapshots": [p for p in snaps if p]}
    rep.metrics = {"drift_rate": log.drift_rate, "tail_variation": log.tail_variation,
                   "hs_relative_variation": hs_var, "grad_l1linf": grad_value,
                   "grad_ratio": grad_ratio, "apriori_violated": violation is not None,
                   "steps": len(traj.step_sizes), "final_time": traj.times[-1]}
    rep.plot_data = {
        "norms": [(N, t, v, None) for t, v in zip(traj.times, hs)],
        "l2_drift": [(N, t, v, None) for t, v in zip(log.times, log.relative_drifts)],
    }
    return rep


# --- exact wave -----------------------------------------------------------

def run_exact_wave(cfg: RunConfig, out):
    ew = cfg["exact_wave"]
    K = int(cfg["grid"]["K"] or 20)
    lam, s = float(cfg["equation"]["lam"]), float(cfg["equation"]["s"])
    p = illposed.ApproxFamilyParams(int(ew["m"]), 0, float(ew["r"]), s, lam)
    grid = TorusGrid(K)
    sc = _solver(cfg, K, tol=1e-10)
    traj = solve(illposed.family_field(p, 0.0, grid), sc)
    errs = []
    for t, u in zip(traj.times, traj.fields):
        exact = illposed.family_field(p, t, grid)
        errs.append(hs_norm(0, u - exact) / hs_norm(0, exact))
    _snap(cfg, out, "final", traj.final, traj.times[-1])
    rep = ExperimentReport("exact-wave-test")
    rep.payload = {"m": p.m, "K": K, "t": traj.times, "rel_error": errs,
                   "steps": len(traj.step_sizes), "rejected_steps": int(sum(traj.rejected)),
                   "residual_linf": float(np.abs(illposed.family_residual(p, 0.0, TorusGrid(max(K, 2 * p.m))).coeffs).max())}
    rep.metrics = {"final_rel_error": errs[-1], "max_rel_error": max(errs),
                   "steps": len(traj.step_sizes), "residual_linf": rep.payload["residual_linf"]}
    rep.plot_data = {"exact_wave_error": [(p.m, t, e, None) for t, e in zip(traj.times, errs)]}
    return rep


# --- ill-posedness ----------------------------------------------------------

def run_illposed(cfg: RunConfig, out):
    ip = cfg["illposed"]
    lam, s = float(cfg["equation"]["lam"]), float(cfg["equation"]["s"])
    sc = _solver(cfg, 0, record_every_default=5, dt=1.0 / 200)
    res = illposed.run_divergence_experiment(
        ip["m_list"], r=float(ip["r"]), s=s, lam=lam, t_end=sc.t_end, cfg=sc,
        check_times=tuple(ip["check_times"]), fit_time=float(ip["fit_time"]), K=cfg["grid"]["K"])
    runs = [res["runs"][str(m)] for m in sorted(ip["m_list"])]
    rep = ExperimentReport("illposed")
    rep.payload = res
    margins = [c["D"] - c["lower_bound"] for r in runs for c in r["checks"].values()]
    rep.metrics = {
        "initial_distance_error": max(abs(r["initial_distance"] - r["predicted_initial_distance"])
                                      for r in runs),
        "checks_passed": all(c["ok"] for r in runs for c in r["checks"].values()),
        "min_check_margin": min(margins) if margins else math.nan,
        "max_exact_family_error": max(max(r["err_l2_j0"]) for r in runs),
    }
    if "fit_v1_l2" in res:
        rep.metrics["fit_v1_l2_exponent"] = res["fit_v1_l2"][0]
        rep.metrics["fit_v1_hs_exponent"] = res["fit_v1_hs"][0]
    rep.plot_data = {
        "divergence": [(r["m"], t, d, e) for r in runs for t, d, e in zip(r["t"], r["D"], r["envelope"])],
        "v1_error": [(r["m"], t, v, None) for r in runs for t, v in zip(r["t"], r["err_l2_j1"])],
    }
    return rep


# --- Galerkin convergence -------------------------------------------------

def run_galerkin_convergence(cfg: RunConfig, out):
    cv = cfg["convergence"]
    K = int(cfg["grid"]["K"])
    u0 = diagnostics.smooth_random_field(K, cfg.seed, cv["decay"], cv["scale"])
    sc = _solver(cfg, K, record_every_default=25, dt=2e-4)
    conv = diagnostics.galerkin_convergence(u0, cv["N_list"], sc.s, sc)
    rep = ExperimentReport("galerkin-convergence")
    rep.payload = conv.to_dict()
    rep.metrics = {"strictly_decreasing": conv.strictly_decreasing,
                   "insufficient_data": conv.insufficient_data}
    if conv.fitted_exponent is not None:
        rep.metrics["fitted_exponent"] = conv.fitted_exponent
    for n, e in conv.sup_errors.items():
        rep.metrics[f"sup_error_N{_slug(n)}"] = e
    rep.plot_data = {"galerkin_errors": [(n, t, e, None) for n in sorted(conv.error_series)
                                         for t, e in zip(conv.times, conv.error_series[n])]}
    return rep


# --- energy identity ------------------------------------------------------

def run_energy_identity(cfg: RunConfig, out):
    en = cfg["energy"]
    N, delta = en["N"], float(en["delta"])
    lam, s = float(cfg["equation"]["lam"]), float(cfg["equation"]["s"])
    fields = inequalities.random_band_limited(
        inequalities.RandomFieldSpec(cfg.seed, int(math.floor(N)), 0.0, int(en["count"])))
    rows = []
    for f in fields:
        u = f * (float(en["norm"]) / hs_norm(0, f))
        lhs, rhs, d = diagnostics.energy_identity_check(u, N, s, lam, delta)
        _, _, d_half = diagnostics.energy_identity_check(u, N, s, lam, delta / 2)
        slope = math.log2(d / d_half) if d > 0 and d_half > 0 else math.nan
        rows.append({"lhs": lhs, "rhs": rhs, "discrepancy": d, "discrepancy_half": d_half,
                     "slope": slope})
    slopes = [r["slope"] for r in rows]
    rep = ExperimentReport("energy-identity")
    rep.payload = {"N": N, "delta": delta, "samples": rows}
    rep.metrics = {"max_discrepancy": max(r["discrepancy"] for r in rows),
                   "min_slope": min(slopes), "max_slope": max(slopes)}
    rep.plot_data = {"energy_identity": [(N, i, r["discrepancy"], r["rhs"]) for i, r in enumerate(rows)]}
    return rep


# --- inequality harnesses -------------------------------------------------

def _bilinear(cfg, out, name, ensemble):
    ens = cfg["ensemble"]
    s = float(cfg["equation"]["s"])
    reports = {}
    for K in ens["K_list"]:
        spec = inequalities.RandomFieldSpec(cfg.seed, int(K), float(ens["beta"]), int(ens["count"]))
        reports[K] = ensemble(spec, s)
        reports[K].to_csv(os.path.join(_series_dir(out), f"{name}_K{K}.csv"))
    Ks = list(ens["K_list"])
    rep = ExperimentReport(f"ineq-{name.replace('_', '-')}")
    rep.payload = {"s": s, "ensembles": {str(K): r.to_dict() for K, r in reports.items()}}
    rep.metrics = {f"max_ratio_K{K}": r.max for K, r in reports.items()}
    rep.metrics.update({f"mean_ratio_K{K}": r.mean for K, r in reports.items()})
    rep.metrics["all_finite"] = all(np.all(np.isfinite(r.ratio)) for r in reports.values())
    rep.metrics["growth_factor"] = reports[Ks[-1]].max / reports[Ks[0]].max
    rep.plot_data = {name: [(K, i, v, None) for K, r in reports.items() for i, v in enumerate(r.ratio)]}
    return rep


def run_kato_ponce(cfg: RunConfig, out):
    s = float(cfg["equation"]["s"])
    rep = _bilinear(cfg, out, "kato_ponce", inequalities.kato_ponce_ensemble)
    K = int(cfg["ensemble"]["K_list"][0])
    g = inequalities.random_band_limited(inequalities.RandomFieldSpec(cfg.seed, K, 0.0, 1))[0]
    const = SpectralField.from_modes(TorusGrid(K), {(0, 0): 2.5 - 1j})
    lhs, rhs = inequalities.kato_ponce_terms(const, g, s)
    rep.metrics["constant_f_ratio"] = lhs / rhs
    return rep


def run_product(cfg: RunConfig, out):
    return _bilinear(cfg, out, "product", inequalities.product_ensemble)


def run_strichartz(cfg: RunConfig, out):
    st = cfg["strichartz"]
    K = int(cfg["grid"]["K"])
    reports = {}
    for j in st["j_list"]:
        spec = inequalities.RandomFieldSpec(cfg.seed, K, float(st["beta"]), int(st["count"]))
        reports[j] = inequalities.strichartz_ratio(int(j), spec, int(st["n_t"]), int(st["oversample"]))
        reports[j].to_csv(os.path.join(_series_dir(out), f"strichartz_j{j}.csv"))
    # a single mode has constant modulus, so the ratio is exactly 2^(-2j/3)
    j0 = int(st["j_list"][0])
    grid = TorusGrid(K)
    k = next(tuple(int(x) for x in grid.wavenumber_of(i))
             for i in zip(*np.nonzero(shell_mask(grid, j0))))
    lhs, rhs = inequalities.strichartz_terms(SpectralField.from_modes(grid, {k: 0.7j}), j0,
                                             int(st["n_t"]), int(st["oversample"]))
    js = list(st["j_list"])
    rep = ExperimentReport("ineq-strichartz")
    rep.payload = {"K": K, "shells": {str(j): r.to_dict() for j, r in reports.items()},
                   "single_mode": {"j": j0, "k": list(k), "ratio": lhs / rhs,
                                   "expected": 2.0 ** (-2 * j0 / 3)}}
    rep.metrics = {f"max_ratio_j{j}": r.max for j, r in reports.items()}
    rep.metrics["growth_factor"] = reports[js[-1]].max / reports[js[0]].max
    rep.metrics["single_mode_error"] = abs(lhs / rhs - 2.0 ** (-2 * j0 / 3))
    rep.plot_data = {"strichartz": [(j, i, v, None) for j, r in reports.items() for i, v in enumerate(r.ratio)]}
    return rep


def run_transference(cfg: RunConfig, out):
    tr = cfg["transference"]
    alpha, R, n = float(tr["alpha"]), int(tr["lattice_radius"]), int(tr["n_samples"])
    rep = ExperimentReport("ineq-transference")
    rep.payload = {"alpha": alpha, "lattice_radius": R, "n_samples": n, "checks": {}}
    for s in tr["s_list"]:
        res = inequalities.transference_check(float(s), alpha, R, n_samples=n)
        rep.payload["checks"][_slug(s)] = {"s": s, "max_discrepancy": res.max_discrepancy,
                                           "n_shifts": res.n_shifts}
        rep.metrics[f"max_discrepancy_s{_slug(s)}"] = res.max_discrepancy
        rep.plot_data[f"transference_s{_slug(s)}"] = [
            (s, i, float(a), float(b)) for i, (a, b) in
            enumerate(zip(res.torus_side[0], res.line_side[0]))]
    torus, plane = inequalities.periodization_l2_check(alpha, R, n)
    rep.payload["periodization_l2"] = {"torus": torus, "plane": plane}
    rep.metrics["periodization_ratio"] = torus / plane
    return rep


RUNNERS = {
    "simulate": run_simulate,
    "exact-wave-test": run_exact_wave,
    "illposed": run_illposed,
    "galerkin-convergence": run_galerkin_convergence,
    "energy-identity": run_energy_identity,
    "ineq-kato-ponce": run_kato_ponce,
    "ineq-product": run_product,
    "ineq-strichartz": run_strichartz,
    "ineq-transference": run_transference,
}


def run(cfg: RunConfig, out):
    """Run ``cfg.subcommand``; the report carries config echo, seed and timing."""
    os.makedirs(out, exist_ok=True)
    t0 = time.perf_counter()
    rep = RUNNERS[cfg.subcommand](cfg, out)
    rep.wall_seconds = time.perf_counter() - t0
    rep.config = cfg.echo()
    rep.seed = cfg.seed
    rep.evaluate(cfg.assertions)
    return rep
