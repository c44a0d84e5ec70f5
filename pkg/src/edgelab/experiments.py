"""Config-driven experiment runners.

Each runner reproduces one family of measurements: plain evolutions with
snapshot dumps, error-versus-epsilon scaling sweeps against the leading
ansatz, the Berry-phase trace around a circular interface, the dispersive
decay probe for orthogonally polarized data, and the transport-hierarchy
residual study.  Runs are deterministic for a fixed config and seed; every
run writes a ``meta.txt`` record sufficient to rerun it, and tables go to
RFC-4180 CSV.
"""

from __future__ import annotations

import csv
import dataclasses
import os
import platform

import numpy as np
import scipy
from scipy import stats

from . import __version__, evolution, hierarchy, snapshots
from .config import ConfigError, ExperimentConfig, parse_dt_rule
from .evolution import EvolutionConfig, Grid2D, SpinorField
from .geometry import integrate_trajectory, project_to_interface, trajectory_to_csv
from .hierarchy import CorrectorSolver, assemble_ansatz, frame_context
from .profiles import make_profile
from .walls import check_transversality, make_wall, normalize_wall

__all__ = [
    "FitResult",
    "ErrorTable",
    "fit_loglog",
    "run_experiment",
    "run_evolve",
    "run_scaling",
    "run_berry",
    "run_dispersion_probe",
    "run_hierarchy_check",
    "run_check_suite",
]


@dataclasses.dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    n: int


def fit_loglog(x, y) -> FitResult:
    """Least-squares fit of log(y) against log(x) with a 95% slope interval.

    The interval comes from the residual variance and the Student-t quantile;
    with the usual 3..5 points it is wide by construction.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise ValueError("need at least 3 points for a scaling fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("scaling fit needs positive data")
    lx, ly = np.log(x), np.log(y)
    A = np.vstack([lx, np.ones_like(lx)]).T
    coef, res, _, _ = np.linalg.lstsq(A, ly, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    dof = len(x) - 2
    if dof > 0:
        rss = float(res[0]) if res.size else float(np.sum((ly - A @ coef) ** 2))
        sxx = float(np.sum((lx - lx.mean()) ** 2))
        stderr = np.sqrt(rss / dof / sxx)
        tq = float(stats.t.ppf(0.975, dof))
    else:
        stderr, tq = np.inf, np.inf
    return FitResult(
        slope=slope, intercept=intercept, stderr=stderr,
        ci_low=slope - tq * stderr, ci_high=slope + tq * stderr, n=len(x),
    )


@dataclasses.dataclass
class ErrorTable:
    """Rows (epsilon, t, l2_error, relative_error, center_offset, Theta) plus per-time fits."""

    rows: list
    fits: dict

    def sorted_rows(self):
        return sorted(self.rows, key=lambda r: (r[0], r[1]))

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["epsilon", "t", "l2_error", "relative_error", "center_offset", "Theta"])
            for row in self.sorted_rows():
                w.writerow([repr(float(v)) for v in row])

    def errors_at(self, t, tol=1e-9):
        rows = [r for r in self.sorted_rows() if abs(r[1] - t) <= tol]
        return np.array([r[0] for r in rows]), np.array([r[3] for r in rows])


# ---------------------------------------------------------------------------
# shared setup helpers
# ---------------------------------------------------------------------------


def _build_wall(cfg: ExperimentConfig):
    wall = make_wall(cfg.get("wall.family"), cfg.get("wall.params"), backend=cfg.get("wall.backend"))
    if cfg.get("wall.normalize"):
        wall = normalize_wall(wall, cfg.get("wall.tube"))
    return wall


def _aligned_dts(eps, cfg, t_end):
    """Evolution step from the dt rule; trajectory step dividing it, near 1e-3 arclength."""
    dt_evol = parse_dt_rule(cfg.get("evolve.dt_rule"), eps)
    n_steps = max(1, int(round(t_end / dt_evol)))
    dt_evol = t_end / n_steps
    target = cfg.get("traj.dt")
    if target <= 0:
        target = min(1e-3 * max(t_end, 1.0), dt_evol)
    k = max(1, int(round(dt_evol / target)))
    return dt_evol, dt_evol / k


def _grid_for(cfg: ExperimentConfig, traj, eps):
    if cfg.get("grid.auto"):
        return auto_grid(traj.y, eps)
    return Grid2D(n1=cfg.get("grid.n1"), n2=cfg.get("grid.n2"),
                  l1=cfg.get("grid.l1"), l2=cfg.get("grid.l2"))


def auto_grid(traj_points, eps, margin_widths=5.0, min_n=128, max_n=1024):
    """Square box containing the trajectory with a safety margin of Gaussian widths."""
    pts = np.asarray(traj_points, dtype=float)
    w = np.sqrt(eps)
    reach = float(np.max(np.abs(pts))) + margin_widths * w + 4.0 * w
    half = 0.5 * np.ceil(2.0 * reach)
    n = min_n
    while half * 2.0 / n > w / 4.0 and n < max_n:
        n *= 2
    return Grid2D(n1=n, n2=n, l1=half, l2=half)


def _initial_field(cfg, kind, profile, traj, grid, eps, solver=None):
    """Initial data on the grid: ansatz, isotropic Gaussian, orthogonal, or spinor mix."""
    ctx = frame_context(traj, 0)
    y0 = traj.y[0]
    if kind == "ansatz":
        return assemble_ansatz(cfg.get("init.order"), profile, traj, 0.0, grid, eps, solver)
    X1, X2 = grid.mesh()
    gauss = np.exp(-((X1 - y0[0]) ** 2 + (X2 - y0[1]) ** 2) / (2.0 * eps)) / np.sqrt(eps)
    if kind == "gaussian":
        alpha = np.array([np.exp(-0.5j * ctx.theta), -np.exp(0.5j * ctx.theta)])
    elif kind == "orthogonal":
        alpha = np.array([np.exp(-0.5j * ctx.theta), np.exp(0.5j * ctx.theta)])
    elif kind == "mix":
        alpha = np.array([cfg.get("init.alpha1"), cfg.get("init.alpha2")], dtype=complex)
    else:
        raise ConfigError(f"unknown init.kind {kind!r}")
    return SpinorField(grid, gauss[None, ...] * alpha[:, None, None], 0.0)


def _write_meta(out_dir, cfg: ExperimentConfig, extra_lines=()):
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "meta.txt")
    with open(path, "w") as fh:
        fh.write(f"edgelab {__version__}\n")
        fh.write(f"numpy {np.__version__}, scipy {scipy.__version__}, python {platform.python_version()}\n")
        fh.write("--- effective configuration ---\n")
        for line in cfg.echo_lines():
            fh.write(line + "\n")
        if extra_lines:
            fh.write("--- run record ---\n")
            for line in extra_lines:
                fh.write(str(line) + "\n")
    return path


def _wall_check_lines(wall, traj):
    stride = max(1, len(traj) // 64)
    report = check_transversality(wall, traj.y[::stride], tol=1e-8, floor=1e-3)
    return [
        f"wall = {wall.describe()}",
        f"transversality: min |grad kappa| = {report.min_gradient!r} over {report.n_samples} samples "
        f"(floor {report.floor:g}, {'pass' if report.passed else 'FAIL'})",
    ]


def _csv_write(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow(row)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


# ---------------------------------------------------------------------------
# runners
# ---------------------------------------------------------------------------


def _trajectory_up_to(wall, y0, t_end, dt):
    """Integrate as far as transversality allows (degenerate walls truncate)."""
    from .walls import TransversalityError
    from .geometry import ProjectionError

    span = t_end
    while True:
        try:
            return integrate_trajectory(wall, y0, round(span / dt) * dt, dt), span < t_end
        except (TransversalityError, ProjectionError):
            span /= 2.0
            if round(span / dt) < 2:
                raise


def run_evolve(cfg: ExperimentConfig, out_dir):
    """Plain evolution with snapshot diagnostics (and optional field dumps).

    Degenerate interfaces (crossings, sharp corners) stop the reference
    trajectory early; the evolution itself still runs to t_end and the
    center-of-mass columns simply lose their interface reference there.
    """
    eps = cfg.get("evolve.epsilon")
    t_end = cfg.get("evolve.t_end")
    wall = _build_wall(cfg)
    dt_evol, dt_traj = _aligned_dts(eps, cfg, t_end)
    y0 = project_to_interface(wall, cfg.y0())
    traj, truncated = _trajectory_up_to(wall, y0, t_end, dt_traj)
    grid = _grid_for(cfg, traj, eps)
    profile = make_profile(cfg.get("init.profile"), cfg.get("init.profile_params"))
    solver = None
    if cfg.get("init.kind") == "ansatz" and cfg.get("init.order") > 0:
        solver = CorrectorSolver(profile, traj)
    initial = _initial_field(cfg, cfg.get("init.kind"), profile, traj, grid, eps, solver)

    n_snap = max(2, cfg.get("evolve.snapshots"))
    times = np.linspace(0.0, t_end, n_snap)
    ec = EvolutionConfig(epsilon=eps, dt=dt_evol, krylov_tol=cfg.get("evolve.krylov_tol"),
                         max_krylov_iter=cfg.get("evolve.max_krylov"))
    result = evolution.evolve(initial, wall, ec, t_end, snapshot_times=times)

    os.makedirs(out_dir, exist_ok=True)
    rows = []
    for snap in result.snapshots:
        t_snap = round(snap.time / dt_traj) * dt_traj
        if t_snap <= traj.t[-1] + dt_traj / 2:
            y_t = traj.y[traj.index_at(min(t_snap, traj.t[-1]), tol=dt_traj)]
            dist = float(np.hypot(*(snap.center_of_mass - y_t)))
            ref = [_fmt(float(y_t[0])), _fmt(float(y_t[1])), _fmt(dist)]
        else:
            ref = ["", "", ""]  # trajectory truncated at a degenerate point
        rows.append([_fmt(float(snap.time)), _fmt(snap.norm),
                     _fmt(float(snap.center_of_mass[0])), _fmt(float(snap.center_of_mass[1]))] + ref)
        if snap.field is not None and cfg.get("evolve.save_fields"):
            snapshots.write_snapshot(os.path.join(out_dir, f"field_{snap.time:011.6f}.desl"), snap.field, eps)
        if snap.field is not None and cfg.get("evolve.heatmaps"):
            snapshots.export_pgm(os.path.join(out_dir, f"density_{snap.time:011.6f}.pgm"), snap.field)
    _csv_write(os.path.join(out_dir, "evolution.csv"),
               ["t", "norm", "com1", "com2", "y1", "y2", "com_to_interface"], rows)
    trajectory_to_csv(traj, os.path.join(out_dir, "trajectory.csv"))
    meta = _wall_check_lines(wall, traj) + [
        f"dt = {dt_evol!r}, trajectory dt = {dt_traj!r}, grid = {grid}",
        f"norm drift = {result.norm_drift!r}, max krylov iterations = {result.max_krylov_iterations}",
    ]
    if truncated:
        meta.append(f"reference trajectory truncated at t = {traj.t[-1]!r} (degenerate interface point)")
    _write_meta(out_dir, cfg, meta)
    return {"norm_drift": result.norm_drift, "rows": rows, "trajectory_truncated": truncated}


def run_scaling(cfg: ExperimentConfig, out_dir) -> ErrorTable:
    """Evolve ansatz data per epsilon; tabulate errors against the order-0 ansatz."""
    eps_list = sorted(cfg.get("scaling.epsilons"), reverse=True)
    if len(eps_list) >= 3 and max(eps_list) / min(eps_list) < 4.0:
        raise ConfigError("scaling.epsilons should span at least a factor 4")
    times = sorted(cfg.get("scaling.times"))
    t_end = times[-1]
    wall = _build_wall(cfg)
    profile = make_profile(cfg.get("init.profile"), cfg.get("init.profile_params"))
    y0 = project_to_interface(wall, cfg.y0())

    rows = []
    drift = 0.0
    meta_extra = []
    traj_for_meta = None
    for eps in eps_list:
        dt_evol, dt_traj = _aligned_dts(eps, cfg, t_end)
        traj = integrate_trajectory(wall, y0, t_end, dt_traj)
        traj_for_meta = traj
        grid = _grid_for(cfg, traj, eps)
        solver = None
        if cfg.get("scaling.order") > 0 or cfg.get("init.order") > 0:
            solver = CorrectorSolver(profile, traj)
        initial = _initial_field(cfg, cfg.get("init.kind"), profile, traj, grid, eps, solver)
        norm0 = initial.norm()
        ec = EvolutionConfig(epsilon=eps, dt=dt_evol, krylov_tol=cfg.get("evolve.krylov_tol"),
                             max_krylov_iter=cfg.get("evolve.max_krylov"))
        result = evolution.evolve(initial, wall, ec, t_end, snapshot_times=times)
        drift = max(drift, result.norm_drift)
        for snap in result.snapshots:
            t_snap = round(snap.time / dt_traj) * dt_traj
            if not any(abs(snap.time - t) < dt_evol / 2 for t in times):
                continue
            idx = traj.index_at(t_snap, tol=dt_traj)
            ref = assemble_ansatz(0, profile, traj, traj.t[idx], grid, eps)
            diag = evolution.overlap_diagnostics(snap.field, ref, traj.y[idx], norm_ref=norm0)
            rows.append((eps, float(snap.time), diag.l2_error, diag.relative_error,
                         diag.center_offset, float(traj.Theta[idx])))
        meta_extra.append(f"eps = {eps!r}: dt = {dt_evol!r}, grid = {grid}, drift = {result.norm_drift!r}")

    fits = {}
    for t in times:
        at_t = [r for r in rows if abs(r[1] - t) < 1e-9]
        if len(at_t) >= 3:
            fits[t] = fit_loglog([r[0] for r in at_t], [r[3] for r in at_t])
    if not fits:
        raise ConfigError("scaling fit degenerate: fewer than 3 valid rows at every sample time")
    table = ErrorTable(rows=rows, fits=fits)
    os.makedirs(out_dir, exist_ok=True)
    table.write_csv(os.path.join(out_dir, "errors.csv"))
    _csv_write(
        os.path.join(out_dir, "fits.csv"),
        ["t", "slope", "intercept", "stderr", "ci_low", "ci_high", "n"],
        [[repr(float(t)), repr(f.slope), repr(f.intercept), repr(f.stderr),
          repr(f.ci_low), repr(f.ci_high), f.n] for t, f in sorted(fits.items())],
    )
    _write_meta(out_dir, cfg, _wall_check_lines(wall, traj_for_meta)
                + meta_extra + [f"max norm drift = {drift!r}"])
    return table


def run_berry(cfg: ExperimentConfig, out_dir):
    """Phase of the first spinor component at the packet center around a circle.

    One trace per configured radius; the total unwrapped phase after a full
    revolution is the Berry-phase measurement (theory: -pi for one turn).
    """
    eps = cfg.get("evolve.epsilon")
    radii = cfg.get("berry.radii")
    if not radii:
        params = cfg.get("wall.params")
        radii = (params[0] if params else 1.0,)
    revolutions = cfg.get("berry.revolutions")
    results = {}
    os.makedirs(out_dir, exist_ok=True)
    meta_extra = []
    for radius in radii:
        wall = make_wall("circle", (radius,))
        t_end = 2.0 * np.pi * radius * revolutions
        dt_evol, dt_traj = _aligned_dts(eps, cfg, t_end)
        y0 = project_to_interface(wall, np.array([radius, 0.0]))
        traj = integrate_trajectory(wall, y0, t_end, dt_traj)
        grid = _grid_for(cfg, traj, eps)
        profile = make_profile(cfg.get("init.profile"), cfg.get("init.profile_params"))
        initial = _initial_field(cfg, cfg.get("init.kind"), profile, traj, grid, eps)
        times = np.linspace(0.0, t_end, max(8, cfg.get("berry.snapshots")))
        ec = EvolutionConfig(epsilon=eps, dt=dt_evol, krylov_tol=cfg.get("evolve.krylov_tol"),
                             max_krylov_iter=cfg.get("evolve.max_krylov"))
        result = evolution.evolve(initial, wall, ec, t_end, snapshot_times=times)

        raw, thetas, snap_t, decohered = [], [], [], False
        for snap in result.snapshots:
            t_snap = round(snap.time / dt_traj) * dt_traj
            idx = traj.index_at(t_snap, tol=dt_traj)
            y_t = traj.y[idx]
            if float(np.hypot(*(snap.center_of_mass - y_t))) > 4.0 * np.sqrt(eps):
                decohered = True
                break
            diag = evolution.overlap_diagnostics(snap.field, snap.field, y_t)
            raw.append(diag.phase_at_center)
            thetas.append(traj.theta[idx] - traj.theta[0])
            snap_t.append(snap.time)
        phases = np.unwrap(np.asarray(raw))
        phases -= phases[0]
        rows = [[_fmt(float(t)), _fmt(float(p)), _fmt(float(-0.5 * th))]
                for t, p, th in zip(snap_t, phases, thetas)]
        _csv_write(os.path.join(out_dir, f"phase_r{radius:g}.csv"),
                   ["t", "phase", "predicted_minus_theta_over_2"], rows)
        results[radius] = {
            "total_phase": float(phases[-1]),
            "decohered": decohered,
            "norm_drift": result.norm_drift,
        }
        meta_extra.extend(_wall_check_lines(wall, traj))
        meta_extra.append(
            f"radius {radius!r}: dt = {dt_evol!r}, grid = {grid}, total phase = {phases[-1]!r}, "
            f"drift = {result.norm_drift!r}"
            + (" (partial trace: packet left the interface tube)" if decohered else "")
        )
    _write_meta(out_dir, cfg, meta_extra)
    return results


def run_dispersion_probe(cfg: ExperimentConfig, out_dir):
    """Sup-norm decay of orthogonally polarized or mixed initial data.

    Fits the time exponent of sup |psi| over the configured window; for mixed
    data also records the overlap coefficient with the propagating ansatz.
    The measured exponent is reported, never asserted.
    """
    eps = cfg.get("evolve.epsilon")
    t_end = cfg.get("evolve.t_end")
    wall = _build_wall(cfg)
    dt_evol, dt_traj = _aligned_dts(eps, cfg, t_end)
    y0 = project_to_interface(wall, cfg.y0())
    traj = integrate_trajectory(wall, y0, t_end, dt_traj)
    grid = _grid_for(cfg, traj, eps)
    profile = make_profile(cfg.get("init.profile"), cfg.get("init.profile_params"))
    kind = cfg.get("init.kind")
    initial = _initial_field(cfg, kind, profile, traj, grid, eps)

    # lambda1: component of the initial spinor along the propagating direction
    ctx0 = frame_context(traj, 0)
    w0 = np.array([np.exp(-0.5j * ctx0.theta), -np.exp(0.5j * ctx0.theta)])
    i1 = int(np.argmin(np.abs(grid.x1 - traj.y[0][0])))
    i2 = int(np.argmin(np.abs(grid.x2 - traj.y[0][1])))
    alpha = initial.data[:, i1, i2] * np.sqrt(eps)
    lambda1 = complex(np.vdot(w0, alpha) / 2.0)

    times = np.linspace(0.0, t_end, max(5, cfg.get("probe.sup_samples")))
    ec = EvolutionConfig(epsilon=eps, dt=dt_evol, krylov_tol=cfg.get("evolve.krylov_tol"),
                         max_krylov_iter=cfg.get("evolve.max_krylov"))
    result = evolution.evolve(initial, wall, ec, t_end, snapshot_times=times)

    rows = []
    for snap in result.snapshots:
        t_snap = round(snap.time / dt_traj) * dt_traj
        idx = traj.index_at(t_snap, tol=dt_traj)
        sup = float(np.sqrt(np.max(snap.field.density())))
        ref = assemble_ansatz(0, profile, traj, traj.t[idx], grid, eps)
        ov = complex(np.sum(np.conj(ref.data) * snap.field.data) * grid.dA)
        overlap_coeff = abs(ov) / max(ref.norm() ** 2, 1e-300)
        rows.append((float(snap.time), sup, overlap_coeff))

    t_min = cfg.get("probe.fit_t_min")
    t_max = cfg.get("probe.fit_t_max") or t_end
    window = [(t, s) for t, s, _ in rows if t_min <= t <= t_max and t > 0]
    if len(window) < 3:
        raise ConfigError("dispersion fit window too short (need >= 3 samples)")
    fit = fit_loglog([t for t, _ in window], [s for _, s in window])

    os.makedirs(out_dir, exist_ok=True)
    _csv_write(os.path.join(out_dir, "decay.csv"), ["t", "sup_norm", "ansatz_overlap_coeff"],
               [[_fmt(t), _fmt(s), _fmt(o)] for t, s, o in rows])
    _write_meta(out_dir, cfg, _wall_check_lines(wall, traj) + [
        f"fitted sup-norm exponent = {fit.slope!r} (95% CI [{fit.ci_low!r}, {fit.ci_high!r}])",
        f"|lambda1| = {abs(lambda1)!r}",
        f"norm drift = {result.norm_drift!r}",
    ])
    return {"fit": fit, "rows": rows, "lambda1": lambda1, "norm_drift": result.norm_drift}


def run_hierarchy_check(cfg: ExperimentConfig, out_dir):
    """Residual scaling of the order-m ansatz in epsilon (no evolution needed).

    For each order m the discrete residual ||(eps D_t + H) W|| is evaluated
    at the configured times and fitted against epsilon; the expected slope is
    (m+2)/2.  With ``hierarchy.evolve_check`` on, also evolves corrected
    initial data and fits the terminal error slope.
    """
    orders = [int(o) for o in cfg.get("hierarchy.orders")]
    if any(o not in (0, 1, 2) for o in orders):
        raise ConfigError("hierarchy.orders must be within {0, 1, 2}")
    eps_list = sorted(cfg.get("scaling.epsilons"), reverse=True)
    times = sorted(cfg.get("hierarchy.times"))
    fd_dt = cfg.get("hierarchy.fd_dt")
    wall = _build_wall(cfg)
    profile = make_profile(cfg.get("init.profile"), cfg.get("init.profile_params"))
    y0 = project_to_interface(wall, cfg.y0())

    t_max = times[-1] + 2.0 * fd_dt
    dt_traj = fd_dt / max(1, round(fd_dt / (1e-3 * max(1.0, t_max))))
    n = int(np.ceil(t_max / dt_traj))
    traj = integrate_trajectory(wall, y0, n * dt_traj, dt_traj)

    solver = None
    if max(orders) > 0:
        solver = CorrectorSolver(profile, traj)

    rows = []
    for m in orders:
        for eps in eps_list:
            grid = _grid_for(cfg, traj, eps)
            for t in times:
                resid, wnorm = hierarchy.ansatz_residual(m, profile, traj, t, grid, eps,
                                                         solver=solver, dt_fd=fd_dt)
                rows.append((m, eps, t, resid, resid / wnorm))

    fits = {}
    for m in orders:
        for t in times:
            pts = [(r[1], r[3]) for r in rows if r[0] == m and abs(r[2] - t) < 1e-12]
            if len(pts) >= 3:
                fits[(m, t)] = fit_loglog([p[0] for p in pts], [p[1] for p in pts])

    os.makedirs(out_dir, exist_ok=True)
    _csv_write(os.path.join(out_dir, "residuals.csv"),
               ["order", "epsilon", "t", "residual", "relative_residual"],
               [[r[0], _fmt(r[1]), _fmt(r[2]), _fmt(r[3]), _fmt(r[4])] for r in rows])
    _csv_write(os.path.join(out_dir, "residual_fits.csv"),
               ["order", "t", "slope", "expected", "ci_low", "ci_high"],
               [[m, _fmt(float(t)), _fmt(f.slope), _fmt((m + 2) / 2.0), _fmt(f.ci_low), _fmt(f.ci_high)]
                for (m, t), f in sorted(fits.items())])

    extra = [f"solvability residual max = {solver.max_solvability_residual()!r}" if solver else "order 0 only"]
    evolve_fits = {}
    if cfg.get("hierarchy.evolve_check"):
        T = times[-1]
        for m in orders:
            errs = []
            for eps in eps_list:
                dt_evol, dt_tr = _aligned_dts(eps, cfg, T)
                tr = integrate_trajectory(wall, y0, T, dt_tr)
                sol = CorrectorSolver(profile, tr) if m > 0 else None
                grid = _grid_for(cfg, tr, eps)
                initial = assemble_ansatz(m, profile, tr, 0.0, grid, eps, sol)
                ec = EvolutionConfig(epsilon=eps, dt=dt_evol, krylov_tol=cfg.get("evolve.krylov_tol"),
                                     max_krylov_iter=cfg.get("evolve.max_krylov"))
                res = evolution.evolve(initial, wall, ec, T, snapshot_times=[T])
                ref = assemble_ansatz(m, profile, tr, T, grid, eps, sol)
                diag = evolution.overlap_diagnostics(res.final, ref, tr.y[-1], norm_ref=initial.norm())
                errs.append((eps, diag.relative_error))
            if len(errs) >= 3:
                evolve_fits[m] = fit_loglog([e for e, _ in errs], [r for _, r in errs])
                extra.append(f"order {m} evolution error slope = {evolve_fits[m].slope!r} "
                             f"(theory {(m + 1) / 2.0})")
    _write_meta(out_dir, cfg, _wall_check_lines(wall, traj) + extra)
    return {"rows": rows, "fits": fits, "evolve_fits": evolve_fits,
            "solvability": solver.max_solvability_residual() if solver else 0.0}


_RUNNERS = {
    "evolve": run_evolve,
    "scaling": run_scaling,
    "berry": run_berry,
    "dispersion_probe": run_dispersion_probe,
    "hierarchy_check": run_hierarchy_check,
}


def run_experiment(cfg: ExperimentConfig, out_dir=None):
    out = out_dir if out_dir is not None else cfg.get("experiment.out")
    return _RUNNERS[cfg.kind](cfg, out)


# ---------------------------------------------------------------------------
# smoke-check suite (edgelab check)
# ---------------------------------------------------------------------------


def run_check_suite():
    """Fast property checks; returns a list of (name, passed, detail)."""
    from . import hermite
    from .geometry import integrate_trajectory
    from .profiles import GaussianProfile
    from .walls import CircleWall, straight_wall

    checks = []
    rng = np.random.default_rng(7)
    grid = hermite.X1Grid(n=128, half_extent=12.0)
    nh = 32

    # transport-operator algebra: kernel annihilation and inverse round trip
    kern = hermite.kernel_amplitude(np.exp(-0.5 * grid.x**2), grid, nh)
    out = hermite.apply_L(kern)
    checks.append(("kernel annihilation", out.norm() <= 1e-10 * max(kern.norm(), 1.0),
                   f"|L k| = {out.norm():.2e}"))
    a = hermite.HermiteAmplitude.zeros(grid, nh)
    a.coeffs[:] = rng.standard_normal((2, grid.n, nh)) + 1j * rng.standard_normal((2, grid.n, nh))
    a.coeffs[:, :, nh - 6:] = 0.0
    envelope = np.exp(-0.5 * (grid.x / 4.0) ** 2)
    a.coeffs *= envelope[None, :, None]
    _, a = hermite.kernel_project(a)
    rt = hermite.apply_L(hermite.invert_L(a))
    err = (rt - a).norm() / a.norm()
    checks.append(("inverse round trip", err <= 1e-8, f"rel err = {err:.2e}"))

    # one Crank-Nicolson step against the scalar Cayley phase on a plane wave
    g2 = Grid2D(n1=64, n2=64, l1=np.pi, l2=np.pi)
    eps, dt = 1.0, 0.05
    X1, _ = g2.mesh()
    k0 = 3.0
    data = np.exp(1j * k0 * X1)[None, ...] * np.array([1.0, 1.0])[:, None, None] / np.sqrt(2)
    stepper = evolution.CrankNicolsonStepper(g2, np.zeros((64, 64)), EvolutionConfig(epsilon=eps, dt=dt))
    stepped = stepper.step(data)
    lam = eps * k0
    cayley = (1.0 - 0.5j * dt * lam / eps) / (1.0 + 0.5j * dt * lam / eps)
    err = np.max(np.abs(stepped - cayley * data))
    checks.append(("Cayley plane-wave step", err <= 1e-10, f"max err = {err:.2e}, iters = {stepper.last_iterations}"))
    checks.append(("free preconditioner exact", stepper.last_iterations <= 1,
                   f"{stepper.last_iterations} iterations"))

    # short unitary evolution on a straight wall
    wall = straight_wall(0.0, 1.0)
    eps = 0.25
    g3 = Grid2D(n1=64, n2=64, l1=4.0, l2=4.0)
    X1, X2 = g3.mesh()
    gauss = np.exp(-(X1**2 + X2**2) / (2 * eps)) / np.sqrt(eps)
    init = SpinorField(g3, gauss[None, ...] * np.array([1.0, -1.0])[:, None, None], 0.0)
    res = evolution.evolve(init, wall, EvolutionConfig(epsilon=eps, dt=eps / 20), 10 * eps / 20)
    checks.append(("unitarity", res.norm_drift <= 1e-11, f"drift = {res.norm_drift:.2e}"))

    # first corrector against the circular-interface closed forms
    circ = CircleWall((1.0,))
    traj = integrate_trajectory(circ, np.array([1.0, 0.0]), 0.5, 1e-3)
    solver = CorrectorSolver(GaussianProfile(), traj, grid=hermite.X1Grid(128, 12.0), n_hermite=32)
    i = traj.index_at(0.5)
    f1 = solver.f1_values(i)
    expected = 0.5 * (2 * grid.x - grid.x**3) * np.exp(-0.5 * grid.x**2) * traj.Theta[i]
    err = np.max(np.abs(f1 - expected)) / np.max(np.abs(expected))
    checks.append(("circle corrector golden", err <= 1e-6, f"rel err = {err:.2e}"))
    return checks
