"""Command-line front end.

Configuration is an INI file with flat ``key = value`` sections; ``--set
section.key=value`` overrides file entries.  Every run writes ``summary.json``
and one ``<name>.csv`` per diagnostic series into the output directory.

Exit codes: 0 success (a flagged blow-up is a success), 1 configuration
error, 2 failed invariant.
"""

from __future__ import annotations

import argparse
import configparser
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .diagnostics import ParityError

COMMANDS = ("validate", "simulate", "conservation", "inflate1", "inflate2", "sweep")
WORKERS_ENV = "FOCHLAB_WORKERS"

# section -> key -> (type, default)
SCHEMA: dict[str, dict[str, tuple[type, Any]]] = {
    "model": {"alpha": (float, 1.0), "beta": (float, 1.0), "b": (float, 2.0)},
    "grid": {"length": (float, 2 * math.pi), "n": (int, 256)},
    "control": {
        "t_end": (float, 0.5),
        "cfl": (float, 0.3),
        "dt_min": (float, 1e-10),
        "blow_threshold": (float, 1e4),
        "snapshot_stride": (int, 1),
        "speed_floor": (float, 1.0),
        "dt_max": (float, math.inf),
    },
    "experiment": {
        "N": (int, 8),
        "q": (float, 2.0),
        "amplitude": (float, 0.1),
        "initial": (str, "sin"),
        "n_data": (int, 0),
        "dt_max": (float, 5e-3),
    },
    "run": {"out": (str, "fochlab-out"), "seed": (int, 0)},
    "sweep": {"command": (str, "inflate2"), "key": (str, "experiment.N"), "values": (str, "8,10")},
}

INITIAL_SHAPES = ("sin", "cos", "const", "odd")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    values: dict  # section -> key -> value

    def get(self, section: str, key: str):
        return self.values[section][key]

    def echo(self) -> dict:
        return {"command": self.command, **{s: dict(v) for s, v in self.values.items()}}


def _parse_value(section: str, key: str, raw: str):
    typ = SCHEMA[section][key][0]
    try:
        if typ is float:
            return float(raw)
        if typ is int:
            return int(raw)
        return str(raw).strip()
    except ValueError:
        raise ConfigError(f"{section}.{key}: cannot parse {raw!r} as {typ.__name__}") from None


def _check_ranges(v: dict) -> None:
    def need(cond, key, msg):
        if not cond:
            raise ConfigError(f"{key}: {msg}")

    m, g, c, e = v["model"], v["grid"], v["control"], v["experiment"]
    need(m["alpha"] * m["beta"] != 0, "model.alpha", "alpha * beta must be nonzero")
    need(g["length"] > 0, "grid.length", "must be positive")
    n = g["n"]
    need(n >= 16 and n & (n - 1) == 0, "grid.n", "must be a power of two >= 16")
    need(c["t_end"] >= 0, "control.t_end", "must be >= 0")
    need(0 < c["cfl"] <= 1, "control.cfl", "must lie in (0, 1]")
    need(c["dt_min"] > 0, "control.dt_min", "must be positive")
    need(c["blow_threshold"] > 0, "control.blow_threshold", "must be positive")
    need(c["snapshot_stride"] >= 0, "control.snapshot_stride", "must be >= 0")
    need(c["speed_floor"] > 0, "control.speed_floor", "must be positive")
    need(c["dt_max"] > 0, "control.dt_max", "must be positive")
    need(e["N"] >= 4, "experiment.N", "must be >= 4")
    need(e["q"] > 1, "experiment.q", "must be > 1 (inf allowed)")
    need(e["initial"] in INITIAL_SHAPES, "experiment.initial", f"must be one of {INITIAL_SHAPES}")
    nd = e["n_data"]
    need(nd == 0 or (nd >= 16 and nd & (nd - 1) == 0), "experiment.n_data",
         "must be 0 (experiment default) or a power of two >= 16")
    need(e["dt_max"] > 0, "experiment.dt_max", "must be positive")
    need(v["sweep"]["command"] in COMMANDS[:-1], "sweep.command", "must be a non-sweep command")


def load_config(command: str, path: str | None = None, overrides=()) -> RunConfig:
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}")
    values = {s: {k: d for k, (_, d) in keys.items()} for s, keys in SCHEMA.items()}
    if path:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        if not cp.read(path):
            raise ConfigError(f"cannot read config file {path}")
        for section in cp.sections():
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]")
            for key, raw in cp.items(section):
                if key not in SCHEMA[section]:
                    raise ConfigError(f"unknown key {section}.{key}")
                values[section][key] = _parse_value(section, key, raw)
    for item in overrides:
        if "=" not in item or "." not in item.split("=", 1)[0]:
            raise ConfigError(f"override {item!r} is not of the form section.key=value")
        dotted, raw = item.split("=", 1)
        section, key = dotted.strip().split(".", 1)
        if section not in SCHEMA or key not in SCHEMA[section]:
            raise ConfigError(f"unknown key {dotted.strip()}")
        values[section][key] = _parse_value(section, key, raw)
    _check_ranges(values)
    return RunConfig(command, values)


# ---------------------------------------------------------------- emitters

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _write_outputs(out: Path, cfg: RunConfig, headline: dict, series: dict) -> None:
    out.mkdir(parents=True, exist_ok=True)
    for name in sorted(series):
        series[name].to_csv(out / f"{name}.csv")
    summary = {
        "command": cfg.command,
        "config": cfg.echo(),
        "headline": headline,
        "series": sorted(series),
    }
    (out / "summary.json").write_text(json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- commands

def _params(cfg: RunConfig):
    from .model import FochParams
    m = cfg.values["model"]
    return FochParams(m["alpha"], m["beta"], m["b"])


def _controller(cfg: RunConfig):
    from .dynamics import StepController
    return StepController(**cfg.values["control"])


def _initial(cfg: RunConfig):
    from .spectral import Grid1D
    g = Grid1D(cfg.get("grid", "length"), cfg.get("grid", "n"))
    a = cfg.get("experiment", "amplitude")
    shape = cfg.get("experiment", "initial")
    kx = 2 * np.pi / g.length
    if shape == "sin":
        return g.sample(lambda x: a * np.sin(kx * x))
    if shape == "cos":
        return g.sample(lambda x: a * np.cos(kx * x))
    if shape == "const":
        return g.constant(a)
    # odd about the midpoint, with u_x(x0) = a * kx > 0 at the centre
    return g.sample(lambda x: -a * np.sin(kx * x) * (1.0 + 0.5 * np.cos(kx * x)) / 1.5)


def _cmd_simulate(cfg: RunConfig) -> tuple[dict, dict, int]:
    from .diagnostics import BlowupMonitor, ConservedMonitor
    from .dynamics import integrate
    params = _params(cfg)
    u0 = _initial(cfg)
    hooks = [BlowupMonitor(params)]
    if 0 <= params.b <= 1:
        hooks.append(ConservedMonitor(params, params.b))
    traj = integrate(u0, params, _controller(cfg), hooks=hooks)
    headline = {
        "termination": traj.termination,
        "t_final": traj.t_final,
        "steps": len(traj.times) - 1,
        "sup_change": float(np.max(np.abs(traj.final.values - u0.values))),
        "sup_u_final": traj.final.max_abs(),
    }
    series = dict(traj.series)
    if cfg.get("experiment", "initial") == "odd" and traj.snapshots:
        from .diagnostics import riccati_monitor
        ric = riccati_monitor(traj)
        series[ric.name] = ric
        headline.update({f"riccati_{k}": v for k, v in ric.meta.items()})
    return headline, series, 0


def _cmd_conservation(cfg: RunConfig) -> tuple[dict, dict, int]:
    from .experiments import run_conservation_study
    b = cfg.get("model", "b")
    if not 0 <= b <= 1:
        raise ConfigError("model.b: conservation runs need 0 <= b <= 1")
    rep = run_conservation_study(b, cfg.get("experiment", "amplitude"), cfg.get("control", "t_end"),
                                 n=cfg.get("grid", "n"), ctrl=_controller(cfg),
                                 identity=cfg.get("control", "snapshot_stride") == 1,
                                 alpha=cfg.get("model", "alpha"), beta=cfg.get("model", "beta"))
    return rep.scalars(), rep.series, 0


def _cmd_inflate(cfg: RunConfig, kind: str) -> tuple[dict, dict, int]:
    from .experiments import Ill1Config, Ill2Config, run_inflation
    from .model import FochParams
    e = cfg.values["experiment"]
    m = cfg.values["model"]
    params = FochParams(m["alpha"], m["beta"], m["b"])
    if not params.is_critical:
        raise ConfigError("model.b: inflation runs need b = 5/3 (set model.b = 1.6666666666666667)")
    n = e["n_data"] or None
    try:
        if kind == "inflate1":
            ecfg = Ill1Config(e["N"], n=n, dt_max=e["dt_max"])
        else:
            ecfg = Ill2Config(e["N"], e["q"], n=n, dt_max=e["dt_max"])
    except ValueError as exc:
        raise ConfigError(f"experiment: {exc}") from None
    rep = run_inflation(ecfg, params)
    return rep.scalars(), rep.series, 0


def _cmd_validate(cfg: RunConfig) -> tuple[dict, dict, int]:
    from .validation import run_validation
    rows = run_validation(seed=cfg.get("run", "seed"))
    passed = all(r["passed"] for r in rows)
    headline = {"checks": len(rows), "failed": [r["name"] for r in rows if not r["passed"]],
                "all_passed": passed, "table": rows}
    return headline, {}, 0 if passed else 2


def _dispatch(cfg: RunConfig) -> tuple[dict, dict, int]:
    if cfg.command == "simulate":
        return _cmd_simulate(cfg)
    if cfg.command == "conservation":
        return _cmd_conservation(cfg)
    if cfg.command in ("inflate1", "inflate2"):
        return _cmd_inflate(cfg, cfg.command)
    if cfg.command == "validate":
        return _cmd_validate(cfg)
    raise ConfigError(f"command {cfg.command!r} cannot be dispatched directly")


def execute(cfg: RunConfig, out: Path) -> int:
    headline, series, status = _dispatch(cfg)
    if cfg.command == "validate":
        _write_validate_csv(out, headline["table"])
    _write_outputs(out, cfg, headline, series)
    return status


def _write_validate_csv(out: Path, rows) -> None:
    out.mkdir(parents=True, exist_ok=True)
    lines = ["name,value,tolerance,passed"]
    for r in rows:
        lines.append(f"{r['name']},{r['value']!r},{r['tolerance']!r},{int(r['passed'])}")
    (out / "validate.csv").write_text("\n".join(lines) + "\n")


def _sweep_point(args) -> tuple[str, int]:
    command, values, label, out = args
    cfg = RunConfig(command, values)
    return label, execute(cfg, Path(out))


def _cmd_sweep(cfg: RunConfig, out: Path) -> int:
    sw = cfg.values["sweep"]
    section, _, key = sw["key"].partition(".")
    if section not in SCHEMA or key not in SCHEMA[section]:
        raise ConfigError(f"sweep.key: unknown key {sw['key']}")
    raw_values = [v.strip() for v in sw["values"].split(",") if v.strip()]
    if not raw_values:
        raise ConfigError("sweep.values: empty list")
    jobs = []
    for raw in raw_values:
        vals = {s: dict(d) for s, d in cfg.values.items()}
        vals[section][key] = _parse_value(section, key, raw)
        _check_ranges(vals)
        label = f"{key}={raw}"
        jobs.append((sw["command"], vals, label, str(out / label)))
    workers = max(1, int(os.environ.get(WORKERS_ENV, "1")))
    if workers == 1:
        results = [_sweep_point(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_sweep_point, jobs))
    headline = {"points": [label for label, _ in results],
                "status": {label: st for label, st in results}}
    _write_outputs(out, cfg, headline, {})
    return max(st for _, st in results)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fochlab", description="FOCH numerical laboratory")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="INI file with [model], [grid], [control], [experiment], [run], [sweep]")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override a config entry (repeatable)")
    p.add_argument("--out", help="output directory (overrides run.out)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = list(args.overrides)
        if args.out:
            overrides.append(f"run.out={args.out}")
        cfg = load_config(args.command, args.config, overrides)
        out = Path(cfg.get("run", "out"))
        if cfg.command == "sweep":
            return _cmd_sweep(cfg, out)
        return execute(cfg, out)
    except ConfigError as exc:
        print(f"fochlab: config error: {exc}", file=sys.stderr)
        return 1
    except ParityError as exc:
        print(f"fochlab: invariant violated: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
