"""Experiment drivers: decay runs, Monte Carlo runs, sweeps, and the
inequality verification battery.  Every artifact is a self-describing CSV
(or a plain-text summary recomputable from the CSVs)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import ConfigError, ExperimentConfig
from .fitting import DecayFit, fit_decay_rate
from .functionals import l1_distance, ls_slack, uniform_ls_slack
from .grid import DensityField, Grid, random_grid_function, random_smooth_density
from .montecarlo import (
    InteractionParams,
    initial_ensemble,
    mc_step,
    moments,
    sample_from_density,
    sweeps_for_time,
)
from .params import (
    KineticParams,
    ParamRegime,
    RegimeError,
    bakry_emery_rho,
    classify_params,
    log_sobolev_constant,
)
from .solver import (
    Trajectory,
    analytic_equilibrium_field,
    make_solver_state,
    solve,
    step_implicit,
)
from .transform import minimize_potential_second
from . import montecarlo


def _fmt(x: float) -> str:
    return f"{x:.16e}"


def write_csv(path: Path, header, columns):
    cols = [np.asarray(c, dtype=float) for c in columns]
    n = cols[0].size
    lines = [",".join(header)]
    for i in range(n):
        lines.append(",".join(_fmt(c[i]) for c in cols))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class DecayReport:
    """Trajectory rows with the inequality column and fitted decay rates."""

    trajectory: Trajectory
    k_constant: float | None          # None outside the L2 regime
    rho: float | None
    entropy_fit: DecayFit | None
    wl2_fit: DecayFit | None
    entropy_rate_bound: float | None  # fitted slope must be <= this
    wl2_rate_bound: float
    min_ls_row_slack: float | None    # min over rows of K*I - H

    def verdicts(self) -> dict:
        out = {}
        if self.entropy_fit is not None and self.entropy_rate_bound is not None:
            out["entropy_rate"] = self.entropy_fit.slope <= self.entropy_rate_bound
        if self.wl2_fit is not None:
            out["weighted_l2_rate"] = self.wl2_fit.slope <= self.wl2_rate_bound
        out["entropy_monotone"] = self.trajectory.max_entropy_increase <= 1e-12
        out["mass_conserved"] = self.trajectory.max_mass_drift <= 1e-12
        if self.min_ls_row_slack is not None:
            out["ls_rows"] = self.min_ls_row_slack >= -1e-9
        return out


def _safe_fit(times, values, window) -> DecayFit | None:
    try:
        return fit_decay_rate(times, values, window)
    except ValueError:
        return None


def build_decay_report(traj: Trajectory, fit_window=None) -> DecayReport:
    """Fit log H and log ||.||* over the (default: second) half of the run."""
    p = traj.params
    t = traj.times
    if fit_window is None:
        fit_window = (0.5 * float(t[-1]), float(t[-1]))
    admissible = classify_params(p) >= ParamRegime.L2_EQUILIBRIUM
    k = log_sobolev_constant(p) if admissible else None
    rho = bakry_emery_rho(p) if admissible else None
    entropy_fit = _safe_fit(t, traj.entropy, fit_window)
    wl2_fit = _safe_fit(t, traj.wl2_dist, fit_window)
    min_slack = None
    if admissible:
        finite = np.isfinite(traj.fisher)
        if np.any(finite):
            min_slack = float((k * traj.fisher[finite] - traj.entropy[finite]).min())
    return DecayReport(
        trajectory=traj,
        k_constant=k,
        rho=rho,
        entropy_fit=entropy_fit,
        wl2_fit=wl2_fit,
        entropy_rate_bound=(-0.95 / k) if admissible else None,
        wl2_rate_bound=-2.0 * 0.95,
        min_ls_row_slack=min_slack,
    )


def run_solve(cfg: ExperimentConfig, out_dir) -> DecayReport:
    """Decay experiment: integrate, emit decay/equilibrium/final CSVs + summary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    p = cfg.params()
    grid = cfg.grid()
    v0 = cfg.initial_density()
    traj = solve(p, v0, cfg.dt, cfg.t_end, cfg.sample_every)
    report = build_decay_report(traj)

    k_col = (report.k_constant * traj.fisher) if report.k_constant is not None \
        else np.full_like(traj.fisher, math.nan)
    write_csv(
        out / "decay.csv",
        ["t", "entropy", "fisher", "k_fisher", "l1_dist", "weighted_l2", "mass", "mean"],
        [traj.times, traj.entropy, traj.fisher, k_col,
         traj.l1_dist, traj.wl2_dist, traj.mass, traj.mean],
    )
    analytic = analytic_equilibrium_field(p, grid)
    write_csv(
        out / "equilibrium.csv",
        ["y", "analytic", "discrete"],
        [grid.centers, analytic.values, traj.equilibrium.values],
    )
    write_csv(out / "final_state.csv", ["y", "density"],
              [grid.centers, traj.final.values])

    lines = [
        f"lambda = {p.lam!r}",
        f"m = {p.m!r}",
        f"regime = {classify_params(p).name}",
        f"n = {cfg.n}",
        f"dt = {cfg.dt!r}",
        f"t_end = {cfg.t_end!r}",
        f"initial = {cfg.initial}",
    ]
    if report.k_constant is not None:
        lines.append(f"log_sobolev_constant = {_fmt(report.k_constant)}")
        lines.append(f"bakry_emery_rho = {_fmt(report.rho)}")
    verdicts = report.verdicts()
    if report.entropy_fit is not None:
        f = report.entropy_fit
        lines.append(f"entropy_slope = {_fmt(f.slope)} (r2 = {f.r_squared:.6f}, "
                     f"window = [{f.window[0]:g}, {f.window[1]:g}])")
        if report.entropy_rate_bound is not None:
            ok = verdicts.get("entropy_rate", False)
            lines.append(f"entropy_rate_bound = {_fmt(report.entropy_rate_bound)} "
                         f"-> {'PASS' if ok else 'FAIL'}")
    else:
        lines.append("entropy_slope = not fitted (series not positive in window)")
    if report.wl2_fit is not None:
        f = report.wl2_fit
        lines.append(f"weighted_l2_slope = {_fmt(f.slope)} (r2 = {f.r_squared:.6f})")
        ok = verdicts.get("weighted_l2_rate", False)
        lines.append(f"weighted_l2_rate_bound = {_fmt(report.wl2_rate_bound)} "
                     f"-> {'PASS' if ok else 'FAIL'}")
    else:
        lines.append("weighted_l2_slope = not fitted (series not positive in window)")
    lines.append(f"max_entropy_increase_per_step = {_fmt(traj.max_entropy_increase)} "
                 f"-> {'PASS' if verdicts['entropy_monotone'] else 'FAIL'}")
    lines.append(f"max_mass_drift = {_fmt(traj.max_mass_drift)} "
                 f"-> {'PASS' if verdicts['mass_conserved'] else 'FAIL'}")
    lines.append(f"final_l1_to_equilibrium = {_fmt(float(traj.l1_dist[-1]))}")
    if report.min_ls_row_slack is not None:
        lines.append(f"min_row_slack_K_fisher_minus_entropy = {_fmt(report.min_ls_row_slack)}")
    (out / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return report


def run_sweep(cfg: ExperimentConfig, out_dir, lambdas=None) -> dict:
    """One run_solve per lambda value, each in its own subdirectory."""
    values = tuple(lambdas) if lambdas else cfg.sweep_lambdas
    if not values:
        raise ConfigError("sweep requires sweep_lambdas in the config or --lambdas")
    out = Path(out_dir)
    reports = {}
    for lv in values:
        sub_cfg = ExperimentConfig(
            lam=lv, m=cfg.m, n=cfg.n, dt=cfg.dt, t_end=cfg.t_end,
            sample_every=cfg.sample_every, initial=cfg.initial,
            bimodal_width=cfg.bimodal_width, out=cfg.out, mc=cfg.mc,
        )
        reports[lv] = run_solve(sub_cfg, out / f"lambda_{lv:g}")
    return reports


def _fp_snapshots(p: KineticParams, v0: DensityField, dt: float, times) -> dict:
    """Backward-Euler snapshots of the density at the requested times."""
    state = make_solver_state(p, v0, dt)
    want = sorted(int(round(t / dt)) for t in times)
    out = {}
    if want and want[0] == 0:
        out[0] = state.density
    last = want[-1] if want else 0
    for k in range(1, last + 1):
        state = step_implicit(state)
        if k in want:
            out[k] = state.density
    return {k * dt: v for k, v in out.items()}


def coarsen_density(f: DensityField, coarse: Grid) -> DensityField:
    """Project onto a coarser nested grid by cell averaging (exact for
    uniform nested grids, mass preserving)."""
    factor, rem = divmod(f.grid.n_cells, coarse.n_cells)
    if rem != 0:
        raise ConfigError(
            f"histogram grid with {coarse.n_cells} cells must divide "
            f"the solver grid with {f.grid.n_cells} cells"
        )
    vals = f.values.reshape(coarse.n_cells, factor).mean(axis=1)
    return DensityField(coarse, vals)


def run_mc(cfg: ExperimentConfig, out_dir, seed=None) -> dict:
    """Monte Carlo run with matched Fokker-Planck reference at sample times."""
    if cfg.mc is None:
        raise ConfigError("mc run requires an mc block (mc.n, mc.epsilon, ...)")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mc_cfg = cfg.mc
    p = cfg.params()
    ip = InteractionParams.from_kinetic(p, gamma=mc_cfg.gamma, epsilon=mc_cfg.epsilon)
    use_seed = mc_cfg.seed if seed is None else seed

    if cfg.initial in ("bimodal", "uniform"):
        ens = initial_ensemble(mc_cfg.n_agents, use_seed, cfg.initial, cfg.bimodal_width)
    else:
        ens = sample_from_density(cfg.initial_density(), mc_cfg.n_agents, use_seed)

    hist_grid = Grid(mc_cfg.hist_n)
    t_samples = [mc_cfg.t_end * f for f in (0.25, 0.5, 0.75, 1.0)]
    fp = _fp_snapshots(p, cfg.initial_density(), cfg.dt, t_samples)
    fp_keys = sorted(fp.keys())

    total_sweeps = sweeps_for_time(ip, mc_cfg.t_end)
    sweep_of_sample = {sweeps_for_time(ip, t): t for t in t_samples}
    t_axis, mean_col, var_col = [], [], []
    att_col, rej_col = [], []
    hist_cols, fp_cols, l1_rows = {}, {}, []

    def record_moments(e):
        mean, var = moments(e)
        t_axis.append(e.time * ip.epsilon * ip.gamma)
        mean_col.append(mean)
        var_col.append(var)
        att_col.append(float(e.attempted_pairs))
        rej_col.append(float(e.rejected_pairs))

    record_moments(ens)
    for k in range(1, total_sweeps + 1):
        ens = mc_step(ens, ip)
        record_moments(ens)
        if k in sweep_of_sample:
            t = sweep_of_sample[k]
            hist = montecarlo.histogram(ens, hist_grid)
            t_fp = min(fp_keys, key=lambda u: abs(u - t))
            ref = coarsen_density(fp[t_fp], hist_grid)
            hist_cols[t] = hist.values
            fp_cols[t] = ref.values
            l1_rows.append((t, l1_distance(hist, ref)))

    write_csv(out / "moments.csv", ["t_fp", "mean", "variance"],
              [t_axis, mean_col, var_col])
    rej_frac = [r / a if a else 0.0 for r, a in zip(rej_col, att_col)]
    write_csv(out / "rejection_stats.csv",
              ["t_fp", "attempted_pairs", "rejected_pairs", "rejection_fraction"],
              [t_axis, att_col, rej_col, rej_frac])
    header = ["y"]
    cols = [hist_grid.centers]
    for t in sorted(hist_cols):
        header += [f"hist_t{t:g}", f"fp_t{t:g}"]
        cols += [hist_cols[t], fp_cols[t]]
    write_csv(out / "mc_hist.csv", header, cols)
    write_csv(out / "mc_vs_fp.csv", ["t_fp", "l1_distance"],
              [[r[0] for r in l1_rows], [r[1] for r in l1_rows]])

    final_l1 = l1_rows[-1][1] if l1_rows else math.nan
    ok = final_l1 <= 0.05
    (out / "mc_summary.txt").write_text(
        "\n".join([
            f"lambda = {p.lam!r}",
            f"m = {p.m!r}",
            f"n_agents = {mc_cfg.n_agents}",
            f"epsilon = {mc_cfg.epsilon!r}",
            f"gamma = {mc_cfg.gamma!r}",
            f"seed = {use_seed}",
            f"sweeps = {total_sweeps}",
            f"rejection_fraction = {_fmt(ens.rejection_fraction)}",
            f"final_l1_mc_vs_fp = {_fmt(final_l1)} (budget 0.05) "
            f"-> {'PASS' if ok else 'FAIL'}",
        ]) + "\n",
        encoding="utf-8",
    )
    return {"final_l1": final_l1, "pass": ok, "ensemble": ens}


def default_ls_grid(lambdas=None):
    """Admissible (lambda, m) points: per lambda, m = 0 and +-fractions of
    the admissibility margin 1 - lambda/2."""
    lams = tuple(lambdas) if lambdas else tuple(np.round(np.arange(0.2, 1.81, 0.2), 10))
    points = []
    for lv in lams:
        c = 1.0 - lv / 2.0
        if c <= 0.0:
            raise RegimeError(f"lambda = {lv} admits no log-Sobolev constant")
        points.append((lv, 0.0))
        for frac in (0.5, 0.9):
            points.append((lv, frac * c))
            points.append((lv, -frac * c))
    return points


@dataclass(frozen=True)
class LsVerification:
    rows: list
    all_pass: bool


def verify_ls(points=None, n: int = 400, n_samples: int = 200, seed: int = 2024,
              out_dir=None) -> LsVerification:
    """Inequality battery: per (lambda, m), the minimum log-Sobolev slack
    over random smooth densities, and the minimized potential curvature
    against its closed form.  The distinguished uniform case also runs the
    unconstrained battery."""
    pts = default_ls_grid() if points is None else list(points)
    bad = [
        f"(lambda={lv}, m={mv})" for lv, mv in pts
        if classify_params(KineticParams(lv, mv)) < ParamRegime.L2_EQUILIBRIUM
    ]
    if bad:
        raise RegimeError("inadmissible grid points: " + ", ".join(bad))

    grid = Grid(n)
    rng = np.random.default_rng(seed)
    rows = []
    for lv, mv in pts:
        p = KineticParams(lv, mv)
        k = log_sobolev_constant(p)
        rho = bakry_emery_rho(p)
        _, rho_min = minimize_potential_second(p)
        min_slack = math.inf
        for _ in range(n_samples):
            phi = random_smooth_density(grid, rng)
            min_slack = min(min_slack, ls_slack(phi, p))
        uni_slack = math.nan
        if lv == 1.0 and mv == 0.0:
            uni_slack = math.inf
            for _ in range(n_samples):
                w = random_grid_function(grid, rng)
                uni_slack = min(uni_slack, uniform_ls_slack(grid, w))
        ok = (min_slack >= -1e-6 and abs(rho_min - rho) <= 1e-10
              and (math.isnan(uni_slack) or uni_slack >= -1e-6))
        rows.append({
            "lambda": lv, "m": mv, "K": k, "rho": rho, "rho_minimized": rho_min,
            "min_ls_slack": min_slack, "min_uniform_slack": uni_slack, "pass": ok,
        })
    report = LsVerification(rows, all(r["pass"] for r in rows))
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(
            out / "ls_report.csv",
            ["lambda", "m", "K", "rho", "rho_minimized",
             "min_ls_slack", "min_uniform_slack", "passed"],
            [[r["lambda"] for r in rows], [r["m"] for r in rows],
             [r["K"] for r in rows], [r["rho"] for r in rows],
             [r["rho_minimized"] for r in rows], [r["min_ls_slack"] for r in rows],
             [r["min_uniform_slack"] for r in rows],
             [1.0 if r["pass"] else 0.0 for r in rows]],
        )
    return report


def format_ls_table(report: LsVerification) -> str:
    lines = [f"{'lambda':>8} {'m':>9} {'K':>10} {'rho':>10} "
             f"{'|rho_min-rho|':>14} {'min_slack':>12} {'uniform':>12} verdict"]
    for r in report.rows:
        uni = "-" if math.isnan(r["min_uniform_slack"]) else f"{r['min_uniform_slack']:.3e}"
        lines.append(
            f"{r['lambda']:>8.3f} {r['m']:>9.4f} {r['K']:>10.5f} {r['rho']:>10.5f} "
            f"{abs(r['rho_minimized'] - r['rho']):>14.3e} {r['min_ls_slack']:>12.3e} "
            f"{uni:>12} {'PASS' if r['pass'] else 'FAIL'}"
        )
    lines.append("overall: " + ("PASS" if report.all_pass else "FAIL"))
    return "\n".join(lines)
