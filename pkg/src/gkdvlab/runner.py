"""Experiment orchestration: build initial data, evolve, run diagnostics,
emit CSV artifacts, snapshots, a JSON summary of fitted constants, and a
MANIFEST describing what was produced (including truncation).

Each diagnostic block is a thin composition of library calls; blocks run
in order and later blocks may consume the most recent modulation track
(monotonicity, temporal_decay, weinstein default to it).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from . import diagnostics as diag
from . import modulation as mod
from . import scattering
from .config import ExperimentConfig
from .core import Field, Trajectory
from .errors import ConfigError, DomainError, GKdVLabError
from .profiles import (
    BreatherParams,
    SolitonParams,
    breather,
    soliton,
    superpose,
)
from .snapshots import load_snapshot, save_snapshot
from .solver import evolve, h2_invariant  # noqa: F401  (h2 via records)

__all__ = ["run_experiment", "build_initial", "RunResult", "write_csv"]


@dataclass
class RunResult:
    outdir: Path
    summary: dict
    manifest: dict
    failures: list

    @property
    def ok(self) -> bool:
        return not self.failures and not self.manifest.get("truncated", False)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".17g")
    if value is None:
        return ""
    return str(value)


def write_csv(path: Path, header: List[str], rows, cfg_hash: str) -> None:
    """CSV with '.' decimals, newline-terminated rows, and the config hash
    on a leading comment line."""
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def build_initial(cfg: ExperimentConfig) -> Field:
    kind, prm = cfg.initial.kind, cfg.initial.params
    g, p = cfg.grid, cfg.p
    if kind == "soliton":
        sp = SolitonParams(c=prm["c"], x0=prm.get("x0", 0.0), sign=prm.get("sign", 1))
        return Field(g, p, 0.0, soliton(sp, p, 0.0, g.x))
    if kind == "breather":
        if p != 3:
            raise ConfigError("breather initial data requires p=3")
        bp = BreatherParams(
            alpha=prm["alpha"], beta=prm["beta"],
            x1=prm.get("x1", 0.0), x2=prm.get("x2", 0.0),
        )
        return Field(g, p, 0.0, breather(bp, 0.0, g.x))
    if kind == "superposition":
        sols = [
            SolitonParams(c=i["c"], x0=i.get("x0", 0.0), sign=i.get("sign", 1))
            for i in prm["solitons"]
        ]
        return superpose(sols, p, g, min_separation=prm.get("min_separation"))
    if kind == "gaussian":
        a, w = prm["amplitude"], prm["width"]
        x0 = prm.get("center", 0.0)
        return Field(g, p, 0.0, a * np.exp(-(((g.x - x0) / w) ** 2)))
    if kind == "file":
        u = load_snapshot(prm["path"], dt=g.dt)
        if u.grid.N != g.N or abs(u.grid.L - g.L) > 1e-12 * g.L:
            raise ConfigError(
                f"snapshot grid (L={u.grid.L}, N={u.grid.N}) does not match "
                f"config grid (L={g.L}, N={g.N})"
            )
        if u.p != p:
            raise ConfigError(f"snapshot p={u.p} does not match config p={p}")
        return u
    raise ConfigError(f"unknown initial kind {kind!r}")


def _conservation_csv(traj: Trajectory, outdir: Path, cfg_hash: str) -> dict:
    has_h2 = traj.records[0].h2_invariant is not None
    header = ["t", "mass", "energy"] + (["h2_invariant"] if has_h2 else []) + [
        "boundary_amplitude"
    ]
    rows = []
    for r in traj.records:
        row = [r.t, r.mass, r.energy]
        if has_h2:
            row.append(r.h2_invariant)
        row.append(r.boundary_amplitude)
        rows.append(row)
    write_csv(outdir / "conservation.csv", header, rows, cfg_hash)
    drift = traj.conservation_drift()
    m0, e0 = traj.records[0].mass, traj.records[0].energy
    out = {
        "mass_drift_rel": drift["mass"] / max(abs(m0), 1e-300),
        "energy_drift_rel": drift["energy"] / max(abs(e0), 1e-300),
    }
    if has_h2:
        h0 = traj.records[0].h2_invariant
        out["h2_drift_rel"] = drift["h2_invariant"] / max(abs(h0), 1e-300)
    return out


def _run_traveling_wave(traj, prm, outdir, name, cfg_hash):
    from .profiles import soliton_profile

    c = prm["c"]
    sign = prm.get("sign", 1)
    p = traj.frames[0].p
    rows = []
    for f in traj.frames:
        shift, dist = diag.fit_translation(
            f, lambda y, s=sign: s * soliton_profile(p, c, y)
        )
        rows.append([f.t, shift, dist])
    write_csv(outdir / f"{name}.csv", ["t", "shift", "l2_distance"], rows, cfg_hash)
    ts = np.array([r[0] for r in rows])
    shifts = np.array([r[1] for r in rows])
    slope = float(np.polyfit(ts, shifts, 1)[0]) if len(rows) > 1 else math.nan
    return {
        "max_l2_distance": max(r[2] for r in rows),
        "center_slope": slope,
        "speed": c,
    }


def _run_nondispersion(traj, prm, outdir, name, cfg_hash):
    rho, R = prm["rho"], prm["R"]
    rows = [[f.t, rho * f.t - R, diag.tail_mass(f, rho * f.t - R)] for f in traj.frames]
    write_csv(outdir / f"{name}.csv", ["t", "xstar", "tail_mass"], rows, cfg_hash)
    return {"rho": rho, "R": R, "epsilon": max(r[2] for r in rows)}


def _run_monotone_functional(traj, prm, outdir, name, cfg_hash):
    x0_list = prm.get("x0_list", [prm.get("x0", 0.0)])
    f_slope = prm["f_slope"]
    mt_slope = prm["mtilde_slope"]
    t0 = prm.get("t0", traj.frames[0].t)
    kappa = prm.get("kappa")
    if kappa is None:
        gap = mt_slope - f_slope
        if gap <= 0:
            raise ConfigError("monotone_functional: mtilde_slope must exceed f_slope")
        kappa = math.sqrt(0.5 * gap / 2.0)
    series = {}
    for x0 in x0_list:
        ts, vals = diag.monotone_functional(
            traj, t0, x0, f_slope, lambda t: mt_slope * t, kappa=kappa,
        )
        series[x0] = (ts, vals)
    ts = next(iter(series.values()))[0]
    header = ["t"] + [f"I_x0_{x0:g}" for x0 in x0_list]
    rows = [[t] + [series[x0][1][j] for x0 in x0_list] for j, t in enumerate(ts)]
    write_csv(outdir / f"{name}.csv", header, rows, cfg_hash)

    c1_fit = 0.0
    for x0 in x0_list:
        vals = series[x0][1]
        deficits = vals[0] - vals
        c1_fit = max(c1_fit, float(np.max(deficits)) * math.exp(-kappa * x0))
    return {"kappa": kappa, "f_slope": f_slope, "C1": c1_fit, "x0_list": list(x0_list)}


def _run_modulation(traj, prm, outdir, name, cfg_hash):
    mode = prm.get("mode", "translations")
    if mode == "translations":
        guesses = (prm["speeds"], prm["centers"])
    else:
        guesses = list(zip(prm["speeds"], prm["centers"]))
    tr = mod.track(
        traj, mode, guesses,
        min_separation=prm.get("min_separation", 1.0),
        closeness_cap=prm.get("closeness_cap", 1.0),
        t_start=prm.get("t_start"), t_end=prm.get("t_end"),
    )
    n = len(tr.frames[0].c) if tr.frames else 0
    header = (
        ["t"]
        + [f"center_{i+1}" for i in range(n)]
        + [f"c_{i+1}" for i in range(n)]
        + ["eps_l2", "eps_h1", "ortho_max"]
    )
    rows = [
        [f.t, *f.center, *f.c, f.eps_l2, f.eps_h1, max(f.ortho_residuals)]
        for f in tr.frames
    ]
    write_csv(outdir / f"{name}.csv", header, rows, cfg_hash)
    out = {"mode": mode, "frames": len(tr.frames), "truncated": tr.truncated}
    if tr.truncated:
        out["failure"] = tr.failure
    if len(tr.frames) >= 3:
        t = tr.times
        slopes = [float(np.polyfit(t, tr.centers[:, i], 1)[0]) for i in range(n)]
        out["center_slopes"] = slopes
        out["velocity_K"] = tr.velocity_check().get("K")
    return out, tr


def _subtrajectory(traj: Trajectory, times) -> Trajectory:
    wanted = set(float(t) for t in times)
    frames, records = [], []
    for f, r in zip(traj.frames, traj.records):
        if float(f.t) in wanted:
            frames.append(f)
            records.append(r)
    return Trajectory(frames, records)


def _run_monotonicity(traj, prm, outdir, name, cfg_hash, last_track):
    tr = last_track
    if tr is None or not tr.frames:
        raise ConfigError("monotonicity diagnostic needs a preceding modulation block")
    speeds = tr.frames[0].c
    nu = prm.get("nu")
    if nu is None:
        gaps = [b - a for a, b in zip(sorted(speeds), sorted(speeds)[1:])]
        nu = min([min(speeds)] + gaps) if gaps else min(speeds)
    kappa = prm.get("kappa", 0.9 * min(speeds) / 4.0)
    sub = _subtrajectory(traj, tr.times)
    mids = [
        [(a + b) / 2.0 for a, b in zip(f.center, f.center[1:])] for f in tr.frames
    ]
    report = diag.monotonicity_report(sub, mids, kappa, nu, c1=min(speeds))
    rows = [
        [fam, i, ta, tb, d] for fam, i, ta, tb, d in report.violations
    ]
    write_csv(
        outdir / f"{name}.csv",
        ["family", "i", "t_earlier", "t_later", "deficit"],
        rows,
        cfg_hash,
    )
    return {
        "nu": report.nu,
        "kappa": report.kappa,
        "K1": report.K1,
        "max_deficit_mass": report.max_deficit_mass,
        "max_deficit_energy": report.max_deficit_energy,
        "threshold_mass": report.threshold_mass,
        "threshold_energy": report.threshold_energy,
        "violations": len(report.violations),
        "ok": report.ok,
    }


def _run_spatial_decay(traj, prm, outdir, name, cfg_hash, last_track):
    which = prm.get("frame", "last")
    f = traj.frames[-1] if which == "last" else traj.frames[0]
    if "centers" in prm:
        centers = prm["centers"]
    elif last_track is not None and last_track.frames:
        centers = list(last_track.frames[-1].center)
    else:
        centers = [float(f.grid.x[int(np.argmax(np.abs(f.values)))])]
    fit = diag.fit_spatial_decay(
        f, prm.get("s", 0), centers, side=prm.get("side", "right")
    )
    write_csv(
        outdir / f"{name}.csv",
        ["rate", "amplitude", "log_residual", "window_lo", "window_hi"],
        [[fit.rate, fit.amplitude, fit.residual, fit.window[0], fit.window[1]]],
        cfg_hash,
    )
    return {"rate": fit.rate, "residual": fit.residual, "window": list(fit.window)}


def _run_temporal_decay(prm, outdir, name, cfg_hash, last_track):
    tr = last_track
    if tr is None or len(tr.frames) < 8:
        raise ConfigError("temporal_decay needs a modulation block with >= 8 frames")
    ts, vals = tr.times, tr.eps_h1
    fit = diag.fit_exponential_decay(ts, vals, trim=prm.get("trim", 0.1))
    rows = [[t, v] for t, v in zip(ts, vals)]
    write_csv(outdir / f"{name}.csv", ["t", "eps_h1"], rows, cfg_hash)
    return {
        "rate": fit.rate,
        "amplitude": fit.amplitude,
        "log_residual": fit.residual,
        "window": list(fit.window),
    }


def _run_scattering(u0: Field, prm, outdir, name, cfg_hash):
    path = prm.get("path", "auto")
    if path == "auto":
        path = "schrodinger" if u0.p == 2 else "zs"
    if path == "zs":
        spec = scattering.zs_spectrum(u0, M=prm.get("M"))
    elif path == "schrodinger":
        spec = scattering.schrodinger_spectrum(u0, M=prm.get("M"))
    else:
        raise ConfigError(f"unknown scattering path {path!r}")
    rows = [[lam.real, lam.imag] for lam in spec.eigenvalues]
    write_csv(outdir / f"{name}.csv", ["re", "im"], rows, cfg_hash)
    return {
        "path": path,
        "predicted_speeds": [s.c for s in spec.predicted_solitons],
        "predicted_breathers": [
            {"alpha": b.alpha, "beta": b.beta, "gamma": b.gamma}
            for b in spec.predicted_breathers
        ],
        "generic": spec.generic,
        "reason": spec.reason,
        "calibration": spec.calibration,
        "refinement_shift": spec.refinement_shift,
    }


def _run_weinstein(traj, prm, outdir, name, cfg_hash, last_track, seed):
    if "speeds" in prm and "centers" in prm:
        solitons = list(zip(prm["speeds"], prm["centers"]))
    elif last_track is not None and last_track.frames:
        mf = last_track.frames[-1]
        solitons = sorted(zip(mf.c, mf.center), key=lambda sc: sc[1])
    else:
        raise ConfigError("weinstein needs speeds/centers or a modulation block")
    speeds = [c for c, _ in solitons]
    nu = prm.get("nu", min(speeds))
    kappa = prm.get("kappa", 0.9 * min(speeds) / 4.0)
    part = diag.Partition.from_centers([a for _, a in solitons], nu)
    grid, p = traj.grid, traj.frames[0].p

    fit = diag.sample_coercivity(
        solitons, part, grid, p,
        n_samples=prm.get("samples", 100),
        eps_h1=prm.get("eps_h1", 1e-2),
        seed=seed,
        lambda_max=prm.get("lambda_max", 100.0),
    )
    rng = np.random.default_rng(seed + 1)
    worst_rel = 0.0
    for _ in range(prm.get("abel_samples", 20)):
        w = diag.random_smooth_field(grid, p, rng)
        wf = diag.weinstein_F(w, solitons, part, kappa)
        worst_rel = max(
            worst_rel, abs(wf.direct - wf.abel) / max(1.0, abs(wf.direct))
        )
    write_csv(
        outdir / f"{name}.csv",
        ["lambda0", "feasible", "n_samples", "abel_max_rel_err"],
        [[fit.lambda0, fit.feasible, fit.n_samples, worst_rel]],
        cfg_hash,
    )
    return {
        "lambda0": fit.lambda0,
        "feasible": fit.feasible,
        "n_samples": fit.n_samples,
        "abel_max_rel_err": worst_rel,
        "kappa": kappa,
    }


def _peak_guesses(u: Field, speeds, guesses, halfwidth: float):
    """Snap each center guess to the nearest local peak of |u|."""
    out = []
    for g0 in guesses:
        mask = np.abs(u.grid.x - g0) <= halfwidth
        idx = np.where(mask)[0]
        j = idx[int(np.argmax(np.abs(u.values[idx])))]
        out.append(float(u.grid.x[j]))
    return out


def _run_collision(traj, prm, outdir, name, cfg_hash):
    speeds = list(prm["speeds"])
    centers = list(prm["centers"])
    t_pre = prm["t_pre"]
    t_post = prm["t_post"]

    def window_track(t_window):
        frames = [f for f in traj.frames if t_window[0] - 1e-9 <= f.t <= t_window[1] + 1e-9]
        if not frames:
            raise DomainError(f"no frames in window {t_window}")
        first = frames[0]
        proj = [a + c * first.t for c, a in zip(speeds, centers)]
        order = np.argsort(proj)
        cs = [speeds[i] for i in order]
        guesses = _peak_guesses(first, cs, [proj[i] for i in order],
                                halfwidth=prm.get("peak_halfwidth", 8.0))
        pairs = list(zip(cs, guesses))
        return mod.track(
            traj, "full", pairs,
            min_separation=prm.get("min_separation", 1.0),
            closeness_cap=prm.get("closeness_cap", 1.0),
            t_start=t_window[0], t_end=t_window[1],
        ), order

    tr_pre, order_pre = window_track(t_pre)
    tr_post, order_post = window_track(t_post)
    if not tr_pre.frames or not tr_post.frames:
        raise DomainError(
            f"collision tracking failed: pre={tr_pre.failure}, post={tr_post.failure}"
        )

    c_pre_sorted = sorted(np.median(tr_pre.speeds, axis=0))
    c_post_sorted = sorted(np.median(tr_post.speeds, axis=0))
    rows = [
        [i + 1, cp, cq, cq - cp]
        for i, (cp, cq) in enumerate(zip(c_pre_sorted, c_post_sorted))
    ]
    write_csv(outdir / f"{name}.csv", ["soliton", "c_pre", "c_post", "delta"], rows, cfg_hash)
    res_pre = float(np.median(tr_pre.eps_l2))
    res_post = float(np.median(tr_post.eps_l2))
    return {
        "c_pre": list(c_pre_sorted),
        "c_post": list(c_post_sorted),
        "max_speed_change": max(abs(r[3]) for r in rows),
        "residual_pre_l2": res_pre,
        "residual_post_l2": res_post,
        "pre_truncated": tr_pre.truncated,
        "post_truncated": tr_post.truncated,
    }


def run_experiment(cfg: ExperimentConfig, outdir) -> RunResult:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg_hash = cfg.hash
    summary: dict = {"name": cfg.name, "config_hash": cfg_hash}
    manifest: dict = {
        "name": cfg.name,
        "config_hash": cfg_hash,
        "artifacts": [],
        "truncated": False,
        "status": "ok",
    }
    failures: list = []

    (outdir / "config.yaml").write_text(cfg.raw_text)
    manifest["artifacts"].append("config.yaml")

    u0 = build_initial(cfg)
    if cfg.snapshots != "none":
        save_snapshot(u0, outdir / "initial.gkdv")
        manifest["artifacts"].append("initial.gkdv")

    traj = evolve(
        u0, cfg.T, record_stride=cfg.record_stride, boundary_mode=cfg.boundary_mode
    )
    if traj.truncated:
        manifest["truncated"] = True
        manifest["status"] = "blowup"
        manifest["failure"] = traj.failure
    if traj.boundary_flagged:
        manifest["boundary_flagged"] = True

    summary["conservation"] = _conservation_csv(traj, outdir, cfg_hash)
    manifest["artifacts"].append("conservation.csv")

    if cfg.snapshots == "all":
        snapdir = outdir / "snapshots"
        snapdir.mkdir(exist_ok=True)
        for j, f in enumerate(traj.frames):
            save_snapshot(f, snapdir / f"frame_{j:05d}.gkdv")
        manifest["artifacts"].append(f"snapshots/ ({len(traj.frames)} frames)")
        manifest["frame_times"] = [f.t for f in traj.frames]
    if cfg.snapshots != "none" and not traj.truncated:
        save_snapshot(traj.frames[-1], outdir / "final.gkdv")
        manifest["artifacts"].append("final.gkdv")

    last_track = None
    if not traj.truncated:
        for j, d in enumerate(cfg.diagnostics):
            name = f"{j:02d}_{d.kind}"
            try:
                if d.kind == "conservation":
                    continue  # always written above
                elif d.kind == "traveling_wave":
                    summary[name] = _run_traveling_wave(traj, d.params, outdir, name, cfg_hash)
                elif d.kind == "nondispersion":
                    summary[name] = _run_nondispersion(traj, d.params, outdir, name, cfg_hash)
                elif d.kind == "monotone_functional":
                    summary[name] = _run_monotone_functional(traj, d.params, outdir, name, cfg_hash)
                elif d.kind == "modulation":
                    summary[name], last_track = _run_modulation(traj, d.params, outdir, name, cfg_hash)
                elif d.kind == "monotonicity":
                    summary[name] = _run_monotonicity(traj, d.params, outdir, name, cfg_hash, last_track)
                elif d.kind == "spatial_decay":
                    summary[name] = _run_spatial_decay(traj, d.params, outdir, name, cfg_hash, last_track)
                elif d.kind == "temporal_decay":
                    summary[name] = _run_temporal_decay(d.params, outdir, name, cfg_hash, last_track)
                elif d.kind == "scattering":
                    summary[name] = _run_scattering(traj.frames[0], d.params, outdir, name, cfg_hash)
                elif d.kind == "weinstein":
                    summary[name] = _run_weinstein(traj, d.params, outdir, name, cfg_hash, last_track, cfg.seed)
                elif d.kind == "collision":
                    summary[name] = _run_collision(traj, d.params, outdir, name, cfg_hash)
                csv_name = f"{name}.csv"
                if (outdir / csv_name).exists():
                    manifest["artifacts"].append(csv_name)
            except GKdVLabError as err:
                failures.append({"diagnostic": name, "error": f"{type(err).__name__}: {err}"})
                summary[name] = {"error": f"{type(err).__name__}: {err}"}
    else:
        manifest["skipped_diagnostics"] = [d.kind for d in cfg.diagnostics]

    if failures:
        manifest["status"] = "diagnostic_failure"
        manifest["diagnostic_failures"] = failures

    with open(outdir / "summary.json", "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
    manifest["artifacts"].append("summary.json")

    if cfg.plots:
        from .report import render_run_plots

        made = render_run_plots(outdir)
        manifest["artifacts"].extend(made)

    with open(outdir / "MANIFEST.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)

    return RunResult(outdir=outdir, summary=summary, manifest=manifest, failures=failures)
