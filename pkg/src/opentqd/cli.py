"""Command-line runner: spectrum, evolve, sweep and verify subcommands.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 verification failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .config import DRIVES, ExperimentConfig, build_variants, load_config, model_params, sweep_points
from .dynamics import bloch_vector, fidelity, integrate, purity
from .errors import ConfigError, OpenTQDError
from .hs_algebra import devectorize
from .models import deutsch as dmod
from .models import landau_zener as lzmod
from .spectral import SpectralPath, TimeGrid, spectral_path
from . import verify as vfy

log = logging.getLogger("opentqd")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERIFY = 0, 2, 3, 4


def _fmt(x) -> str:
    return "%.17g" % x


def write_csv(path, cfg: ExperimentConfig, columns, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"# opentqd {__version__}",
        "# config: " + json.dumps(cfg.resolved(), sort_keys=True),
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(c if isinstance(c, str) else _fmt(c) for c in row))
    path.write_text("\n".join(lines) + "\n")


def read_csv(path):
    """Column names and rows of a CSV written by this tool (comments skipped)."""
    body = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    cols = body[0].split(",")
    rows = [ln.split(",") for ln in body[1:]]
    return cols, rows


# ---- spectrum -------------------------------------------------------------


def spectrum_path(cfg: ExperimentConfig, grid: TimeGrid) -> SpectralPath:
    source = cfg.output.get("source", "numeric" if cfg.model == "custom_file" else "analytic")
    if source not in ("analytic", "numeric"):
        raise ConfigError("output.source must be 'analytic' or 'numeric'")
    if source == "analytic":
        if cfg.model == "deutsch":
            return dmod.deutsch_analytic_spectrum(model_params(cfg), grid)
        if cfg.model == "landau_zener":
            return lzmod.lz_analytic_spectrum(model_params(cfg), grid)
        raise ConfigError("custom models have no closed-form spectrum; use output.source = 'numeric'")
    return spectral_path(build_variants(cfg).L_adiabatic, grid)


def cmd_spectrum(cfg: ExperimentConfig, out, self_check=False):
    n = int(cfg.output.get("n_points", 200))
    grid = TimeGrid(0.0, cfg.tau, n)
    path = spectrum_path(cfg, grid)
    N = path.n_branches
    cols = ["t"]
    cols += [f"{p}_lambda_{a}" for a in range(N) for p in ("re", "im")]
    cols += [f"{p}_G_{a}_{b}" for a in range(N) for b in range(N) for p in ("re", "im")]
    rows = []
    for j, t in enumerate(grid.points):
        G = path.lefts[j] @ path.rights_dot[j]
        row = [cfg.omega_ref * t]
        for lam in path.eigenvalues[j]:
            row += [lam.real, lam.imag]
        for g in G.ravel():
            row += [g.real, g.imag]
        rows.append(row)
    write_csv(out, cfg, cols, rows)
    for w in path.warnings:
        log.warning(w)
    return EXIT_OK


# ---- evolve ---------------------------------------------------------------


def _run_drive(cfg: ExperimentConfig, drive: str, self_check: bool):
    v = build_variants(cfg)
    grid = cfg.time_grid()
    if drive == "adiabatic_target":
        states = np.array([v.adiabatic_vector(t) for t in grid.points])
        trace_dev = np.abs(states[:, 0] - 1.0)
    else:
        traj = integrate(v.drive(drive), v.rho0, grid, basis=v.basis, self_check=self_check, monitors=False)
        states = traj.states
        trace_dev = traj.monitors["trace_dev"]
    return v, grid, states, trace_dev


def cmd_evolve(cfg: ExperimentConfig, out, self_check=False):
    v, grid, states, trace_dev = _run_drive(cfg, cfg.drive, self_check)
    every = int(cfg.output.get("every", 1))
    idx = list(range(0, len(grid), max(1, every)))
    if idx[-1] != len(grid) - 1:
        idx.append(len(grid) - 1)
    rows = []
    for j in idx:
        t = grid.points[j]
        rho = devectorize(states[j], v.basis, trace_tol=1e-6)
        x, y, z = bloch_vector(rho)
        rows.append([cfg.omega_ref * t, x, y, z, purity(rho), trace_dev[j], fidelity(rho, v.adiabatic_solution(t))])
    write_csv(out, cfg, ["t", "x", "y", "z", "purity", "trace_dev", "fidelity_vs_adiabatic"], rows)
    return EXIT_OK


# ---- sweep ----------------------------------------------------------------


def _sweep_point(args):
    cfg, value, drive, self_check = args
    sub = cfg.with_param(cfg.sweep["variable"], value)
    v, grid, states, trace_dev = _run_drive(sub, drive, self_check)
    rho = devectorize(states[-1], v.basis, trace_tol=1e-6)
    return [value, sub.omega_ref * sub.tau, drive, fidelity(rho, v.target_state), float(np.max(trace_dev))]


def cmd_sweep(cfg: ExperimentConfig, out, self_check=False):
    if cfg.sweep is None:
        raise ConfigError("sweep command needs a 'sweep' block in the config")
    jobs = [(cfg, value, drive, self_check) for value, drive in sweep_points(cfg)]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(jobs))) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(j) for j in jobs]
    order = {d: k for k, d in enumerate(DRIVES)}
    rows.sort(key=lambda r: (r[0], order[r[2]]))
    cols = [cfg.sweep["variable"], "omega_tau", "drive", "fidelity", "max_trace_dev"]
    write_csv(out, cfg, cols, rows)
    return EXIT_OK


# ---- verify ---------------------------------------------------------------


def run_suite(cfg: ExperimentConfig):
    if cfg.model == "deutsch":
        return vfy.deutsch_suite(model_params(cfg))
    if cfg.model == "landau_zener":
        return vfy.lz_suite(model_params(cfg))
    v = build_variants(cfg)
    return vfy.custom_suite(v.L_adiabatic, TimeGrid(0.0, cfg.tau, 400))


def cmd_verify(cfg: ExperimentConfig, out, self_check=False):
    checks = run_suite(cfg)
    ok = vfy.overall_ok(checks)
    report = {
        "version": __version__,
        "config": cfg.resolved(),
        "ok": ok,
        "checks": [c.as_dict() for c in checks],
    }
    out = Path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    print(vfy.format_report(checks))
    return EXIT_OK if ok else EXIT_VERIFY


COMMANDS = {"spectrum": cmd_spectrum, "evolve": cmd_evolve, "sweep": cmd_sweep, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="opentqd", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON experiment configuration")
        p.add_argument("--out", help="output file (defaults to output.path in the config)")
        p.add_argument("--self-check", action="store_true", help="validate the integrator by step halving")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        out = args.out or cfg.output.get("path")
        if not out:
            raise ConfigError("no output path: pass --out or set output.path")
        return COMMANDS[args.command](cfg, out, self_check=args.self_check)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OpenTQDError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
