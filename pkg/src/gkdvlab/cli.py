"""Command-line interface: config-driven runs plus thin one-shot tools.

Subcommands
    run        full experiment from a YAML config or a canned scenario
    simulate   evolve only (snapshots + conservation CSV)
    diagnose   point diagnostics on stored snapshots
    modulate   modulation tracking over a stored run's snapshot series
    scatter    discrete-spectrum prediction for one snapshot
    collide    collision pipeline (run + pre/post speed table)
    scenarios  list canned scenario names

Exit codes: 0 ok, 2 config, 3 blow-up, 4 domain, 5 diagnostic failure,
6 I/O or snapshot format.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import diagnostics as diag
from . import modulation as mod
from . import scattering
from .config import SCENARIOS, load_config, parse_config, scenario_text
from .core import Trajectory
from .errors import (
    BlowupError,
    ConfigError,
    DomainError,
    FormatError,
    GKdVLabError,
)
from .runner import run_experiment, write_csv
from .snapshots import load_snapshot
from .solver import conserved_record, energy, mass, sobolev_norm

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BLOWUP = 3
EXIT_DOMAIN = 4
EXIT_DIAGNOSTIC = 5
EXIT_IO = 6


def _load(args) -> "ExperimentConfig":
    if args.scenario:
        cfg = parse_config(scenario_text(args.scenario), name=args.scenario)
    elif args.config:
        cfg = load_config(args.config)
    else:
        raise ConfigError("provide --config FILE or --scenario NAME")
    if getattr(args, "output_dir", None):
        cfg.output_dir = args.output_dir
    if getattr(args, "plots", False):
        cfg.plots = True
    return cfg


def _outdir(cfg) -> Path:
    return Path(cfg.output_dir or f"out/{cfg.name}")


def _cmd_run(args) -> int:
    cfg = _load(args)
    result = run_experiment(cfg, _outdir(cfg))
    status = result.manifest["status"]
    print(f"[{cfg.name}] status={status} -> {result.outdir}")
    for f in result.failures:
        print(f"  diagnostic failed: {f['diagnostic']}: {f['error']}", file=sys.stderr)
    if status == "blowup":
        return EXIT_BLOWUP
    if result.failures:
        return EXIT_DIAGNOSTIC
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load(args)
    cfg.diagnostics = []
    result = run_experiment(cfg, _outdir(cfg))
    print(f"[{cfg.name}] status={result.manifest['status']} -> {result.outdir}")
    return EXIT_OK if result.manifest["status"] == "ok" else EXIT_BLOWUP


def _cmd_diagnose(args) -> int:
    rows = []
    for path in args.snapshot:
        u = load_snapshot(path)
        rec = conserved_record(u)
        row = {
            "snapshot": str(path),
            "t": u.t,
            "p": u.p,
            "mass": rec.mass,
            "energy": rec.energy,
            "boundary_amplitude": rec.boundary_amplitude,
        }
        if rec.h2_invariant is not None:
            row["h2_invariant"] = rec.h2_invariant
        if args.xstar is not None:
            row[f"tail_mass_{args.xstar:g}"] = diag.tail_mass(u, args.xstar)
        if args.sobolev is not None:
            row[f"h{args.sobolev:g}_norm"] = sobolev_norm(u, args.sobolev)
        if args.decay_order is not None:
            centers = args.centers or [float(u.grid.x[int(np.argmax(np.abs(u.values)))])]
            fit = diag.fit_spatial_decay(u, args.decay_order, centers, side=args.decay_side)
            row["decay_rate"] = fit.rate
            row["decay_residual"] = fit.residual
        rows.append(row)
    header = sorted({k for r in rows for k in r}, key=lambda k: (k != "snapshot", k))
    out = [[r.get(k, "") for k in header] for r in rows]
    if args.out:
        write_csv(Path(args.out), header, out, cfg_hash="diagnose")
        print(f"wrote {args.out}")
    else:
        print(",".join(header))
        for r in out:
            print(",".join(str(v) for v in r))
    return EXIT_OK


def _snapshot_series(run_dir: Path):
    manifest_path = run_dir / "MANIFEST.json"
    if not manifest_path.exists():
        raise FormatError(f"{run_dir}: no MANIFEST.json (was the run saved with snapshots: all?)")
    snapdir = run_dir / "snapshots"
    paths = sorted(snapdir.glob("frame_*.gkdv"))
    if not paths:
        raise FormatError(f"{run_dir}: no snapshot series under snapshots/")
    return [load_snapshot(p) for p in paths]


def _cmd_modulate(args) -> int:
    frames = _snapshot_series(Path(args.run_dir))
    records = [conserved_record(f) for f in frames]
    traj = Trajectory(frames, records)
    guesses = [tuple(map(float, g.split(":"))) for g in args.guess]
    if args.mode == "translations":
        track_guesses = ([c for c, _ in guesses], [a for _, a in guesses])
    else:
        track_guesses = guesses
    tr = mod.track(traj, args.mode, track_guesses,
                   t_start=args.t_start, t_end=args.t_end)
    n = len(tr.frames[0].c) if tr.frames else 0
    header = (["t"] + [f"center_{i+1}" for i in range(n)]
              + [f"c_{i+1}" for i in range(n)] + ["eps_l2", "eps_h1"])
    rows = [[f.t, *f.center, *f.c, f.eps_l2, f.eps_h1] for f in tr.frames]
    out = Path(args.out or (Path(args.run_dir) / "modulation_track.csv"))
    write_csv(out, header, rows, cfg_hash="modulate")
    print(f"wrote {out} ({len(rows)} frames{', truncated: ' + tr.failure if tr.truncated else ''})")
    return EXIT_OK if not tr.truncated else EXIT_DIAGNOSTIC


def _cmd_scatter(args) -> int:
    u = load_snapshot(args.snapshot)
    path = args.path
    if path == "auto":
        path = "schrodinger" if u.p == 2 else "zs"
    if path == "zs":
        spec = scattering.zs_spectrum(u, M=args.M)
    else:
        spec = scattering.schrodinger_spectrum(u, M=args.M)
    report = {
        "path": path,
        "eigenvalues": [[l.real, l.imag] for l in spec.eigenvalues],
        "predicted_speeds": [s.c for s in spec.predicted_solitons],
        "predicted_breathers": [
            {"alpha": b.alpha, "beta": b.beta, "gamma": b.gamma}
            for b in spec.predicted_breathers
        ],
        "generic": spec.generic,
        "reason": spec.reason,
        "calibration": spec.calibration,
    }
    print(json.dumps(report, indent=2))
    return EXIT_OK


def _cmd_collide(args) -> int:
    cfg = _load(args)
    if not any(d.kind == "collision" for d in cfg.diagnostics):
        raise ConfigError("collide requires a config with a 'collision' diagnostic block")
    return _cmd_run(args)


def _cmd_scenarios(_args) -> int:
    for name in sorted(SCENARIOS):
        print(name)
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gkdvlab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def add_config_args(p):
        p.add_argument("--config", help="YAML experiment config")
        p.add_argument("--scenario", help="canned scenario name")
        p.add_argument("--output-dir", help="override the output directory")
        p.add_argument("--plots", action="store_true", help="render SVG plots")

    p = sub.add_parser("run", help="run a configured experiment")
    add_config_args(p)
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("simulate", help="evolve only, skipping diagnostics")
    add_config_args(p)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("diagnose", help="point diagnostics on snapshots")
    p.add_argument("snapshot", nargs="+")
    p.add_argument("--xstar", type=float, help="tail mass cut position")
    p.add_argument("--sobolev", type=float, help="Sobolev norm order")
    p.add_argument("--decay-order", type=int, help="spatial decay derivative order")
    p.add_argument("--decay-side", choices=("left", "right"), default="right")
    p.add_argument("--centers", type=float, nargs="*", help="centers for decay fits")
    p.add_argument("--out", help="write CSV here instead of stdout")
    p.set_defaults(func=_cmd_diagnose)

    p = sub.add_parser("modulate", help="track modulation over stored snapshots")
    p.add_argument("--run-dir", required=True, help="run directory with snapshots/")
    p.add_argument("--mode", choices=("translations", "full"), default="translations")
    p.add_argument("--guess", action="append", required=True,
                   metavar="C:X0", help="speed:center guess, repeatable")
    p.add_argument("--t-start", type=float)
    p.add_argument("--t-end", type=float)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_modulate)

    p = sub.add_parser("scatter", help="discrete spectrum of one snapshot")
    p.add_argument("snapshot")
    p.add_argument("--path", choices=("auto", "zs", "schrodinger"), default="auto")
    p.add_argument("-M", type=int, default=None, help="eigensolver grid size")
    p.set_defaults(func=_cmd_scatter)

    p = sub.add_parser("collide", help="collision experiment with speed table")
    add_config_args(p)
    p.set_defaults(func=_cmd_collide)

    p = sub.add_parser("scenarios", help="list canned scenarios")
    p.set_defaults(func=_cmd_scenarios)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except BlowupError as err:
        print(f"blow-up: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except DomainError as err:
        print(f"domain error: {err}", file=sys.stderr)
        return EXIT_DOMAIN
    except FormatError as err:
        print(f"format error: {err}", file=sys.stderr)
        return EXIT_IO
    except OSError as err:
        print(f"i/o error: {err}", file=sys.stderr)
        return EXIT_IO
    except GKdVLabError as err:
        print(f"{type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_DIAGNOSTIC


if __name__ == "__main__":
    sys.exit(main())
