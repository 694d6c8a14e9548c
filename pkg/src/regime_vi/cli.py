"""Command-line entry point: ``regime-vi solve|verify|simulate|plotdata``.

Exit codes: 0 all checks pass, 1 checks ran and failed, 2 input or usage
error, 3 solver failure.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .boundaries import extract_boundaries, verify_theorem
from .checks import value_report
from .errors import NonMonotoneContact, ParamMismatch, RegimeVIError, SolverError
from .io import (config_digest, dumps, load_config, read_surfaces, write_boundaries, write_plot_data,
                 write_report, write_surfaces)
from .penalty import solve_penalized
from .simulator import (BASELINES, SimConfig, run_strategy, simulate_paths, value_check)
from .vi_oracle import complementarity_check, solve_vi

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_SOLVER = 0, 1, 2, 3
VI_COMPLEMENTARITY_TOL = 1e-5


@dataclass
class RunManifest:
    command: str
    config_digest: str | None
    outputs: list[dict] = field(default_factory=list)
    passed: bool = True
    started: str = ""
    finished: str = ""
    extra: dict = field(default_factory=dict)

    def record(self, path: Path) -> None:
        data = Path(path).read_bytes()
        self.outputs.append({"file": Path(path).name, "bytes": len(data),
                             "sha256": hashlib.sha256(data).hexdigest()})

    def to_dict(self) -> dict:
        import numba
        import scipy
        return {
            "command": self.command,
            "config_digest": self.config_digest,
            "versions": {"regime_vi": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                         "numba": numba.__version__, "python": platform.python_version()},
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
            "passed": self.passed,
            **self.extra,
        }

    def write(self, out_dir: Path) -> Path:
        self.finished = _now()
        path = Path(out_dir) / f"{self.command}_manifest.json"
        path.write_text(dumps(self.to_dict()))
        return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _out(out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_solve(config_path, method: str, out_dir) -> RunManifest:
    cfg = load_config(config_path)
    out = _out(out_dir)
    man = RunManifest("solve", cfg.digest, started=_now())
    grid = cfg.grid
    results = {}
    if method in ("penalty", "both"):
        results["penalty"] = solve_penalized(cfg.params, grid, cfg.penalty_eps)
    if method in ("vi", "both"):
        results["vi"] = solve_vi(cfg.params, grid)
    if not results:
        raise ValueError(f"unknown method {method!r}")
    for name, surf in results.items():
        logging.getLogger("regime_vi").info("%s solve done: %s", name, surf.diagnostics)
        for p in write_surfaces(surf, out / f"{name}_surfaces.csv", cfg):
            man.record(p)
    if len(results) == 2:
        pen, vi = results["penalty"], results["vi"]
        gap = {
            "sup_gap": pen.sup_distance(vi),
            "per_function": {n: float(np.max(np.abs(getattr(pen, n) - getattr(vi, n))))
                             for n in ("v0", "v1", "v_neg1")},
            "penalty_eps": cfg.penalty_eps,
            "h": grid.h,
        }
        gap_path = out / "gap.json"
        gap_path.write_text(dumps(gap))
        man.record(gap_path)
        man.extra["sup_gap"] = gap["sup_gap"]
    return man


def cmd_verify(surfaces_path, out_dir) -> RunManifest:
    surfaces, meta = read_surfaces(surfaces_path)
    out = _out(out_dir)
    man = RunManifest("verify", meta.get("config_digest"), started=_now())
    stem = Path(surfaces_path).stem
    props = {"values": value_report(surfaces).to_dict()}
    passed = props["values"]["all_passed"]
    try:
        fb = extract_boundaries(surfaces)
    except NonMonotoneContact as exc:
        props["boundaries"] = {"all_passed": False, "error": str(exc)}
        passed = False
    else:
        man.record(write_boundaries(fb, out / f"{stem}_boundaries.csv"))
        theorem = verify_theorem(fb, surfaces.params, surfaces.grid)
        props["boundaries"] = theorem.to_dict()
        passed = passed and theorem.all_passed
    man.record(write_report(props, out / f"{stem}_properties.json"))

    comp = complementarity_check(surfaces, surfaces.params, surfaces.grid)
    if surfaces.provenance == "penalty" and surfaces.penalty_eps:
        tol = 2.0 * surfaces.penalty_eps
    else:
        tol = VI_COMPLEMENTARITY_TOL
    comp_ok = comp.passes(tol)
    comp_dict = comp.to_dict()
    comp_dict.update(tolerance=tol, passed=comp_ok)
    man.record(write_report(comp_dict, out / f"{stem}_complementarity.json"))
    man.passed = bool(passed and comp_ok)
    failed = [k for k, c in props["values"]["checks"].items() if not c["passed"]]
    failed += [k for k, c in props["boundaries"].get("checks", {}).items() if not c["passed"]]
    if not comp_ok:
        failed.append("complementarity")
    man.extra["failed_checks"] = failed
    return man


def cmd_simulate(config_path, surfaces_path, n_paths: int, seed: int, out_dir, *,
                 s0: float = 100.0, p_init: float = 0.5, per_path: bool = False) -> RunManifest:
    cfg = load_config(config_path)
    surfaces, meta = read_surfaces(surfaces_path)
    recorded = meta.get("config_digest")
    if recorded is not None and recorded != cfg.digest:
        raise ParamMismatch(f"config digest {cfg.digest[:12]} differs from surface metadata {recorded[:12]}")
    if recorded is None and surfaces.params != cfg.params:
        raise ParamMismatch("config parameters differ from the surface metadata")
    out = _out(out_dir)
    man = RunManifest("simulate", cfg.digest, started=_now())

    sim = SimConfig(s0=s0, p_init=p_init, n_paths=n_paths, n_steps=surfaces.grid.n_t, seed=seed)
    paths = simulate_paths(cfg.params, sim)
    fb = extract_boundaries(surfaces)
    optimal = run_strategy(paths, fb, keep_paths=per_path)
    baselines = {name: run_strategy(paths, name) for name in BASELINES}
    verdict = value_check(optimal, surfaces, sim, baselines)
    sim_dict = {"s0": sim.s0, "p_init": sim.p_init, "n_paths": sim.n_paths, "n_steps": sim.n_steps,
                "seed": sim.seed, "initial_position": sim.initial_position}
    report = {
        "params": cfg.params.to_dict(),
        "config_digest": cfg.digest,
        "sim_config": sim_dict,
        "sim_config_digest": config_digest(sim_dict),
        "surfaces_provenance": surfaces.provenance,
        "policies": {"optimal": optimal.to_dict(), **{k: v.to_dict() for k, v in baselines.items()}},
        "verdict": verdict.to_dict(),
    }
    rep_path = out / "simulation_report.json"
    rep_path.write_text(dumps(report))
    man.record(rep_path)
    if per_path:
        pp = out / "paths.csv"
        with pp.open("w") as fh:
            fh.write("path,reward,n_trades\n")
            for i, (r, n) in enumerate(zip(optimal.rewards, optimal.trades)):
                fh.write(f"{i},{float(r)!r},{int(n)}\n")
        man.record(pp)
    man.passed = verdict.passed
    return man


def cmd_plotdata(surfaces_path, out_dir) -> RunManifest:
    surfaces, meta = read_surfaces(surfaces_path)
    out = _out(out_dir)
    man = RunManifest("plotdata", meta.get("config_digest"), started=_now())
    fb = extract_boundaries(surfaces)
    stem = Path(surfaces_path).stem
    man.record(write_plot_data(fb, out / f"{stem}_plotdata.csv"))
    return man


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regime-vi", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="compute value surfaces")
    p.add_argument("--config", required=True)
    p.add_argument("--method", choices=("penalty", "vi", "both"), default="both")
    p.add_argument("--out", required=True)

    p = sub.add_parser("verify", help="check surface and boundary properties")
    p.add_argument("--surfaces", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("simulate", help="Monte Carlo check of the trading rule")
    p.add_argument("--config", required=True)
    p.add_argument("--surfaces", required=True)
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--s0", type=float, default=100.0)
    p.add_argument("--p-init", type=float, default=0.5)
    p.add_argument("--per-path", action="store_true", help="also write paths.csv")

    p = sub.add_parser("plotdata", help="emit boundary curves as columnar data")
    p.add_argument("--surfaces", required=True)
    p.add_argument("--out", required=True)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "solve":
            man = cmd_solve(args.config, args.method, args.out)
        elif args.command == "verify":
            man = cmd_verify(args.surfaces, args.out)
        elif args.command == "simulate":
            man = cmd_simulate(args.config, args.surfaces, args.paths, args.seed, args.out,
                               s0=args.s0, p_init=args.p_init, per_path=args.per_path)
        else:
            man = cmd_plotdata(args.surfaces, args.out)
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (RegimeVIError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    man.write(args.out)
    if not man.passed:
        print(f"checks failed: {', '.join(man.extra.get('failed_checks', [])) or 'see report'}",
              file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
