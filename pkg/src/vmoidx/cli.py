"""Command line front end: ``vmoidx {index,vmo-index,extend,linefield,selftest}``.

Reports are JSON (sorted keys, UTF-8); field samples are CSV with a header row.
Exit codes: 0 success, 2 topological obstruction, 3 numerical certification
failure, 4 configuration error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from dataclasses import asdict, dataclass
from dataclasses import field as dc_field
from fractions import Fraction
from pathlib import Path

import numpy as np
from threadpoolctl import threadpool_limits

from . import __version__
from . import fields as F_
from .config import read_key_values
from .errors import ConfigError, VmoIndexError
from .geometry import get_surface, load_surface

TIMING_KEYS = ("timing",)


@dataclass
class RunConfig:
    command: str
    surface: str | None = None
    field: str | None = None
    datum: str | None = None
    eps_grid: list | None = None
    tol_zero: float = F_.ZERO_TOL
    tol_jac: float = F_.JAC_TOL
    seed: int = 0
    grid: int = 64
    out: str | None = None
    preset: str | None = None
    c1: float | None = None
    c2: float | None = None
    only: list | None = None
    extra: dict = dc_field(default_factory=dict)

    def validate(self):
        if not (self.tol_zero > 0 and self.tol_jac > 0):
            raise ConfigError("tolerances must be positive")
        if self.grid < 4:
            raise ConfigError("grid must be at least 4")
        if self.eps_grid is not None:
            g = self.eps_grid
            if not g or any(e <= 0 for e in g) or any(b >= a for a, b in zip(g, g[1:])):
                raise ConfigError("eps grid must be positive and strictly decreasing")
        for name in ("c1", "c2"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ConfigError(f"{name} must be positive")
        if self.c1 is not None and self.c2 is not None and self.c1 > self.c2:
            raise ConfigError("c1 must not exceed c2")
        return self


def _float_list(text):
    try:
        return [float(x) for x in str(text).replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad number list {text!r}") from exc


_CASTS = {"tol_zero": float, "tol_jac": float, "seed": int, "grid": int, "c1": float,
          "c2": float, "eps_grid": _float_list,
          "only": lambda t: [int(x) for x in _float_list(t)]}


def build_config(args):
    """Merge a key-value config file with command line flags (flags win)."""
    values = {}
    if args.config:
        values.update(read_key_values(args.config))
    for key in ("surface", "field", "datum", "eps_grid", "tol_zero", "tol_jac", "seed", "grid",
                "out", "preset", "c1", "c2", "only"):
        val = getattr(args, key, None)
        if val is not None:
            values[key] = val
    known = set(RunConfig.__dataclass_fields__) - {"command", "extra"}
    cfg = {"command": args.command, "extra": {}}
    for key, val in values.items():
        if key not in known:
            cfg["extra"][key] = val
            continue
        cast = _CASTS.get(key)
        try:
            cfg[key] = cast(val) if (cast and isinstance(val, str)) else val
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {val!r}") from exc
    return RunConfig(**cfg).validate()


def _surface(cfg, default=None):
    name = cfg.surface or default
    if name is None:
        raise ConfigError("no surface given")
    if Path(str(name)).suffix in (".cfg", ".txt", ".ini", ".conf") or Path(str(name)).is_file():
        return load_surface(name)
    return get_surface(name)


def _field(cfg, S, text):
    if text is None:
        raise ConfigError("no field given")
    if str(text).lower().endswith(".csv"):
        return F_.SampledField.from_csv(S, text)
    return F_.TangentField.from_expression(S, text)


def _sample_rows(S, v, n=32):
    rows = []
    for k, chart in enumerate(S.charts):
        (u0, u1), (v0, v1) = chart.bounds
        U, V = np.meshgrid(np.linspace(u0, u1, n), np.linspace(v0, v1, n), indexing="ij")
        uv = np.stack([U, V], -1).reshape(-1, 2)
        P = chart.embed(uv)
        keep = S.scan_mask(P, 0.0)
        if len(S.charts) > 1:
            keep &= S.locate(P)[0] == k
        W = v(P[keep])
        for q, p, w in zip(uv[keep], P[keep], W):
            rows.append([k, *q, *p, *w])
    return rows


def _write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh)
        wr.writerow(header)
        for r in rows:
            wr.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return str(obj)
    return obj


def dump_report(report, path):
    text = json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False)
    Path(path).write_text(text + "\n", encoding="utf-8")


def strip_timing(report):
    """Copy of a report without wall-clock fields, for determinism checks."""
    if isinstance(report, dict):
        return {k: strip_timing(v) for k, v in report.items()
                if k not in TIMING_KEYS and k != "seconds"}
    if isinstance(report, list):
        return [strip_timing(v) for v in report]
    return report


# -- commands ------------------------------------------------------------------------------


def cmd_index(cfg):
    from .index import morse_check
    from .presets import get_preset, preset_field

    if cfg.preset:
        v = preset_field(cfg.preset)
        S = v.surface
    else:
        S = _surface(cfg)
        v = _field(cfg, S, cfg.field)
    rep = morse_check(S, v, grid=cfg.grid, zero_tol=cfg.tol_zero, jac_tol=cfg.tol_jac)
    files = {}
    if cfg.out:
        path = Path(cfg.out) / "field_samples.csv"
        _write_csv(path, ["chart", "u", "v", "x", "y", "z", "w1", "w2", "w3"], _sample_rows(S, v))
        files["field_samples"] = str(path)
    res = rep.as_dict()
    if cfg.preset:
        res["preset"] = asdict(get_preset(cfg.preset))
    return 0, {"index": res, "files": files}


def cmd_vmo_index(cfg):
    from .presets import get_preset, preset_datum, preset_field
    from .vmo import vmo_index

    if cfg.preset:
        v = preset_field(cfg.preset)
        S = v.surface
        g = None if S.is_closed else preset_datum(cfg.preset)
    else:
        S = _surface(cfg)
        v = _field(cfg, S, cfg.field)
        g = None if cfg.datum is None else F_.BoundaryDatum.from_expression(S, cfg.datum)
    if cfg.eps_grid and cfg.eps_grid[0] > S.r0:
        raise ConfigError(f"eps grid must lie in (0, r0={S.r0:g}]")
    res = vmo_index(S, v, g, cfg.eps_grid, grid=min(cfg.grid, 48))
    files = {}
    if cfg.out:
        path = Path(cfg.out) / "diagnostics.csv"
        keys = ["eps", "ind", "ind_minus", "sup_u_minus_ubar", "sup_boundary_u_minus_g",
                "min_g_eps", "max_g_eps"]
        _write_csv(path, keys, [[r.get(k) for k in keys] for r in res.rows])
        files["diagnostics"] = str(path)
    out = res.as_dict()
    if cfg.preset:
        out["preset"] = asdict(get_preset(cfg.preset))
    return 0, {"vmo_index": out, "files": files}


def cmd_extend(cfg):
    from .extension import extend_boundary_datum
    from .presets import preset_datum

    if cfg.preset:
        g = preset_datum(cfg.preset)
        S = g.surface
    else:
        S = _surface(cfg)
        if cfg.datum is None:
            raise ConfigError("extend needs --datum or --preset")
        g = F_.BoundaryDatum.from_expression(S, cfg.datum)
    res = extend_boundary_datum(S, g, cfg.c1, cfg.c2, cfg.seed,
                                int(cfg.extra.get("scan", 128)), cfg.grid)
    files = {}
    if cfg.out:
        path = Path(cfg.out) / "extended_field.csv"
        _write_csv(path, ["chart", "u", "v", "x", "y", "z", "w1", "w2", "w3"],
                   _sample_rows(S, res.field))
        files["extended_field"] = str(path)
    return 0, {"extension": res.report, "files": files}


def cmd_linefield(cfg):
    from .presets import preset_linefield
    from .qtensor import LineField, orientability_check, total_linefield_index, \
        vmo_linefield_obstruction

    if cfg.preset:
        L = preset_linefield(cfg.preset)
        S = L.surface
    else:
        S = _surface(cfg)
        if cfg.field is None:
            raise ConfigError("linefield needs --field (a director expression) or --preset")
        d = F_.TangentField.from_expression(S, cfg.field)
        L = LineField.from_director(S, d, name=cfg.field)
    out = {"surface": S.name, "linefield": L.name, "chi": S.euler_characteristic()}
    if S.is_closed:
        orientable, signs = orientability_check(S, L)
        out["holonomy"] = signs
        out["orientable"] = orientable
        out["total_index"] = total_linefield_index(S, L, cfg.grid)
        out["vmo"] = vmo_linefield_obstruction(S, L)
    else:
        from .qtensor import linefield_singularities
        sing = linefield_singularities(S, L, cfg.grid)
        out["singularities"] = [{"chart": s["chart"], "uv": s["uv"], "index": s["index"]}
                                for s in sing]
        out["total_index"] = sum((s["index"] for s in sing), Fraction(0))
    return 0, {"linefield": out, "files": {}}


def cmd_selftest(cfg):
    from .acceptance import Settings, run_all

    settings = Settings(seed=cfg.seed, tol_zero=cfg.tol_zero, tol_jac=cfg.tol_jac)
    for key in ("random_fields", "perturbations", "scan"):
        if key in cfg.extra:
            try:
                setattr(settings, key, int(cfg.extra[key]))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key}") from exc
    outcomes = run_all(settings, cfg.only)
    for o in outcomes:
        print(o.line(), file=sys.stderr)
    ok = all(o.satisfied for o in outcomes)
    return (0 if ok else 3), {"criteria": [o.as_dict() for o in outcomes], "all_satisfied": ok,
                              "files": {}}


COMMANDS = {"index": cmd_index, "vmo-index": cmd_vmo_index, "extend": cmd_extend,
            "linefield": cmd_linefield, "selftest": cmd_selftest}


def build_parser():
    p = argparse.ArgumentParser(prog="vmoidx", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"vmoidx {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="key = value file mirroring the flags")
        s.add_argument("--surface", help="catalog name (disk, annulus, sphere, torus) or config")
        s.add_argument("--field", help="ambient expression in x, y, z or a CSV file")
        s.add_argument("--datum", help="boundary expression in x, y, z, t")
        s.add_argument("--eps-grid", dest="eps_grid", type=_float_list)
        s.add_argument("--seed", type=int)
        s.add_argument("--tol-zero", dest="tol_zero", type=float)
        s.add_argument("--tol-jac", dest="tol_jac", type=float)
        s.add_argument("--grid", type=int)
        s.add_argument("--out", help="directory for report.json and CSV files")
        s.add_argument("--preset")
        s.add_argument("--quiet", action="store_true")
        if name == "extend":
            s.add_argument("--c1", type=float)
            s.add_argument("--c2", type=float)
        if name == "selftest":
            s.add_argument("--only", type=lambda t: [int(x) for x in t.split(",")],
                           help="comma separated criterion numbers")
    return p


def _threads():
    raw = os.environ.get("VMOIDX_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError as exc:
        raise ConfigError(f"VMOIDX_THREADS must be an integer, got {raw!r}") from exc
    if n < 1:
        raise ConfigError("VMOIDX_THREADS must be positive")
    return n


def run(argv=None):
    """Run a command; returns ``(exit_code, report)``."""
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    report = {"command": args.command, "version": __version__}
    try:
        cfg = build_config(args)
        report["config"] = {k: v for k, v in asdict(cfg).items() if v not in (None, {}, [])}
        if cfg.out:
            Path(cfg.out).mkdir(parents=True, exist_ok=True)
        with threadpool_limits(limits=_threads()):
            code, results = COMMANDS[args.command](cfg)
        report["results"] = results
    except VmoIndexError as exc:
        code = exc.exit_code
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "ind_minus"):
            report["error"].update(ind_minus=exc.ind_minus, chi=exc.chi)
        cfg = locals().get("cfg")
    report["exit_code"] = code
    report["timing"] = {"seconds": round(time.perf_counter() - t0, 3)}
    if cfg is not None and cfg.out:
        dump_report(report, Path(cfg.out) / "report.json")
    if not args.quiet:
        print(json.dumps(_jsonable(report), sort_keys=True, indent=2, ensure_ascii=False))
    return code, report


def main(argv=None):
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
