"""Config ingestion and the CSV/JSON artifact formats."""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .boundaries import FreeBoundaries, PropertyReport
from .errors import ConfigError, FormatError, ParamError
from .model import Grid, ModelParams, make_grid, validate_params
from .surfaces import Surfaces

PARAM_KEYS = ("mu1", "mu2", "sigma", "rho", "lambda1", "lambda2", "K", "T")
GRID_KEYS = ("n_p", "n_t")
OPTIONAL_KEYS = {"eps": None, "penalty_eps": 1e-4}

SURFACE_HEADER = "t,p,v0,v1,v_neg1,u1,u_neg1"
BOUNDARY_HEADER = "t,p_0_neg1,p_1_0,p_star,p_neg1_0,p_0_1"
SURFACE_FORMAT = "regime_vi.surfaces/1"
FLOAT_FMT = "%.17g"

CANONICAL_CONFIG = {
    "mu1": 0.2, "mu2": -0.1, "sigma": 0.3, "rho": 0.05, "lambda1": 1.0, "lambda2": 1.0,
    "K": 0.001, "T": 1.0, "n_p": 401, "n_t": 2000, "penalty_eps": 1e-4,
}


@dataclass(frozen=True)
class RunConfig:
    params: ModelParams
    n_p: int
    n_t: int
    eps: float | None
    penalty_eps: float

    @property
    def grid(self) -> Grid:
        return make_grid(self.params, self.n_p, self.n_t, self.eps)

    def to_dict(self) -> dict:
        d = self.params.to_dict()
        d.update(n_p=self.n_p, n_t=self.n_t, eps=self.eps, penalty_eps=self.penalty_eps)
        return d

    @property
    def digest(self) -> str:
        return config_digest(self.to_dict())


def dumps(obj) -> str:
    """Deterministic JSON: sorted keys, round-trip floats, non-finite values as strings."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else repr(x)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def config_digest(cfg: dict) -> str:
    return hashlib.sha256(json.dumps(_clean(cfg), sort_keys=True).encode()).hexdigest()


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    allowed = set(PARAM_KEYS) | set(GRID_KEYS) | set(OPTIONAL_KEYS)
    for key in raw:
        if key not in allowed:
            raise ConfigError(key, "unknown key")
    for key in PARAM_KEYS + GRID_KEYS:
        if key not in raw:
            raise ConfigError(key, "missing required key")
    values = {}
    for key in PARAM_KEYS:
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(key, f"expected a number, got {v!r}")
        values[key] = float(v)
    for key in GRID_KEYS:
        v = raw[key]
        if isinstance(v, bool) or not isinstance(v, int):
            raise ConfigError(key, f"expected an integer, got {v!r}")
    if raw["n_p"] < 3:
        raise ConfigError("n_p", f"grid too small: need at least 3 nodes, got {raw['n_p']}")
    if raw["n_t"] < 1:
        raise ConfigError("n_t", f"grid too small: need at least 1 step, got {raw['n_t']}")
    eps = raw.get("eps", OPTIONAL_KEYS["eps"])
    if eps is not None and (isinstance(eps, bool) or not isinstance(eps, (int, float)) or not 0 <= eps < 0.5):
        raise ConfigError("eps", f"expected a number in [0, 0.5), got {eps!r}")
    penalty_eps = raw.get("penalty_eps", OPTIONAL_KEYS["penalty_eps"])
    if isinstance(penalty_eps, bool) or not isinstance(penalty_eps, (int, float)) or not penalty_eps > 0:
        raise ConfigError("penalty_eps", f"expected a positive number, got {penalty_eps!r}")
    try:
        params = validate_params(ModelParams(**values))
    except ParamError as exc:
        raise ConfigError(exc.field, str(exc)) from exc
    return RunConfig(params, int(raw["n_p"]), int(raw["n_t"]),
                     None if eps is None else float(eps), float(penalty_eps))


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("<file>", f"cannot read {path}: {exc}") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_config(raw)


def sidecar(path) -> Path:
    return Path(path).with_suffix(".json")


def write_surfaces(surfaces: Surfaces, path, config: RunConfig | None = None) -> list[Path]:
    """Write the surface CSV and its JSON metadata; returns both paths."""
    path = Path(path)
    g = surfaces.grid
    tt, pp = np.meshgrid(g.t, g.p, indexing="ij")
    table = np.column_stack([
        tt.ravel(), pp.ravel(), surfaces.v0.ravel(), surfaces.v1.ravel(), surfaces.v_neg1.ravel(),
        surfaces.u1.ravel(), surfaces.u_neg1.ravel(),
    ])
    np.savetxt(path, table, fmt=FLOAT_FMT, delimiter=",", header=SURFACE_HEADER, comments="")
    meta = {
        "format": SURFACE_FORMAT,
        "provenance": surfaces.provenance,
        "params": surfaces.params.to_dict(),
        "grid": g.to_dict(),
        "penalty_eps": surfaces.penalty_eps,
        "diagnostics": surfaces.diagnostics,
        "config": None if config is None else config.to_dict(),
        "config_digest": None if config is None else config.digest,
        "rows": int(table.shape[0]),
    }
    meta_path = sidecar(path)
    meta_path.write_text(dumps(meta))
    return [path, meta_path]


def read_metadata(path) -> dict:
    meta_path = sidecar(path)
    try:
        meta = json.loads(meta_path.read_text())
    except OSError as exc:
        raise FormatError(f"missing metadata file {meta_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"metadata {meta_path} is not valid JSON: {exc.msg}", exc.lineno) from exc
    if meta.get("format") != SURFACE_FORMAT:
        raise FormatError(f"metadata {meta_path} has unknown format {meta.get('format')!r}")
    return meta


def _scan_for_error(path: Path, n_cols: int, expected_rows: int) -> FormatError:
    with path.open() as fh:
        lineno = 1
        next(fh, None)
        for lineno, line in enumerate(fh, start=2):
            fields = line.rstrip("\n").split(",")
            if len(fields) != n_cols:
                return FormatError(f"expected {n_cols} columns, found {len(fields)}", lineno)
            try:
                [float(f) for f in fields]
            except ValueError:
                return FormatError("non-numeric field", lineno)
    got = lineno - 1
    return FormatError(f"expected {expected_rows} data rows, found {got} (truncated file?)", lineno)


def read_surfaces(path) -> tuple[Surfaces, dict]:
    path = Path(path)
    meta = read_metadata(path)
    try:
        params = ModelParams(**meta["params"])
        gd = meta["grid"]
        grid = Grid(p_lo=gd["p_lo"], p_hi=gd["p_hi"], n_p=gd["n_p"], n_t=gd["n_t"], eps=gd["eps"], T=gd["T"])
    except (KeyError, TypeError) as exc:
        raise FormatError(f"metadata is missing grid or params: {exc}") from exc
    expected = (grid.n_t + 1) * grid.n_p
    try:
        with path.open() as fh:
            header = fh.readline().strip()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    if header != SURFACE_HEADER:
        raise FormatError(f"bad header {header!r}, expected {SURFACE_HEADER!r}", 1)
    try:
        table = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except ValueError:
        raise _scan_for_error(path, 7, expected) from None
    if table.shape != (expected, 7):
        raise _scan_for_error(path, 7, expected)
    shape = (grid.n_t + 1, grid.n_p)
    if np.max(np.abs(table[:, 0].reshape(shape) - grid.t[:, None])) > 1e-9 or \
            np.max(np.abs(table[:, 1].reshape(shape) - grid.p[None, :])) > 1e-9:
        raise FormatError("t/p columns do not match the grid recorded in the metadata")
    surfaces = Surfaces(
        v0=table[:, 2].reshape(shape).copy(),
        v1=table[:, 3].reshape(shape).copy(),
        v_neg1=table[:, 4].reshape(shape).copy(),
        grid=grid,
        params=params,
        provenance=meta["provenance"],
        penalty_eps=meta.get("penalty_eps"),
        diagnostics=meta.get("diagnostics", {}),
    )
    return surfaces, meta


def write_boundaries(fb: FreeBoundaries, path) -> Path:
    path = Path(path)
    table = np.column_stack([fb.t_values, fb.p0neg1, fb.p10, np.full(fb.t_values.size, fb.p_star),
                             fb.pneg10, fb.p01])
    np.savetxt(path, table, fmt=FLOAT_FMT, delimiter=",", header=BOUNDARY_HEADER, comments="")
    return path


def read_boundaries(path, h: float) -> FreeBoundaries:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip()
    if header != BOUNDARY_HEADER:
        raise FormatError(f"bad header {header!r}", 1)
    try:
        t, p0neg1, p10, ps, pneg10, p01 = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2).T
    except ValueError as exc:
        raise FormatError(f"malformed boundary file: {exc}") from exc
    return FreeBoundaries(t, p01, p10, pneg10, p0neg1, float(ps[0]), h)


def write_plot_data(fb: FreeBoundaries, path) -> Path:
    """Long-format ``series,p,t`` table: the four boundaries plus the vertical ``p_star`` line."""
    path = Path(path)
    t = fb.t_values
    names = ("p_0_neg1", "p_1_0", "p_neg1_0", "p_0_1", "p_star")
    curves = (fb.p0neg1, fb.p10, fb.pneg10, fb.p01, np.full(t.size, fb.p_star))
    with path.open("w") as fh:
        fh.write("series,p,t\n")
        for name, curve in zip(names, curves):
            for pv, tv in zip(curve[1:], t[1:]):
                fh.write(f"{name},{float(pv)!r},{float(tv)!r}\n")
    return path


def write_report(report: PropertyReport | dict, path) -> Path:
    path = Path(path)
    data = report.to_dict() if hasattr(report, "to_dict") else report
    path.write_text(dumps(data))
    return path
