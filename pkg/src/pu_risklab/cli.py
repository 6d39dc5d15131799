"""Command-line front end.

Each subcommand resolves its parameters from built-in defaults, then an
optional JSON config file, then explicit flags. Results go to ``--out`` as a
CSV whose first line names the schema, with a JSON manifest next to it; without
``--out`` the CSV goes to standard output. Exit codes: 0 success, 1 a
validation check failed, 2 bad configuration.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, bounds, experiments
from .erm import erm
from .losses import RISK_CSV_COLUMNS, LossKind, risk_report
from .model import (
    AllLabelingsOfPoints,
    ScenarioError,
    TableHypothesis,
    assouad_scenario,
    bayes_classifier,
    excess_risk,
    sample,
    scenario_from_dict,
    scenario_to_dict,
)
from .runtime import default_workers, stream

SCHEMA_VERSION = 1
SUBCOMMANDS = ("validate", "risk", "erm", "bounds", "curve", "minimax", "cannings")
STOCHASTIC = {"validate", "risk", "erm", "curve", "minimax", "cannings"}

DEFAULTS = {
    "validate": dict(replicates=20_000),
    "risk": dict(n=50, V=3, p=0.2, h=0.4, em=0.5, g=None),
    "erm": dict(n=50, V=3, p=0.2, h=0.4, em=0.5, loss="sar"),
    "bounds": dict(kappa1=1.0, kappa2=None, K=1.0),
    "curve": dict(sweep="n", grid=[500, 1000, 2000, 4000, 8000, 16000], n=4000, V=4, h=0.5, em=0.5, p=None,
                  replicates=2000, loss="sar"),
    "minimax": dict(V=4, h=0.3, em=0.5, n=2000, p=None, replicates=2000, kappa1=None, kappa2=None),
    "cannings": dict(grid=[250, 1000, 4000, 10_000], replicates=2000),
}
REQUIRED = {"bounds": ("n", "V", "h", "em")}


class ConfigError(ValueError):
    def __init__(self, field: str, message: str):
        super().__init__(f"field '{field}': {message}")
        self.field = field


def _grid(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected a comma-separated list of numbers")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        m = re.search(r"argument (\S+?):", message)
        field = m.group(1).lstrip("-") if m else "argv"
        raise ConfigError("subcommand" if field == "command" else field, message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pu-risklab", description="PU risk laboratory under SAR propensities")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with parameter values; flags override it")
        p.add_argument("--seed", type=int)
        p.add_argument("--out", help="CSV output path; a .manifest.json is written alongside")
        p.add_argument("--workers", type=int)
        p.add_argument("--scenario", help="scenario as inline JSON or a path to a JSON file")
        for flag in ("n", "V", "replicates"):
            p.add_argument(f"--{flag}", type=int)
        for flag in ("h", "em", "p", "kappa1", "kappa2", "K"):
            p.add_argument(f"--{flag}", type=float)
        p.add_argument("--grid", type=_grid)
        p.add_argument("--loss", choices=[k.value for k in LossKind])
        p.add_argument("--sweep", choices=("n", "h", "e_m", "em"))
        p.add_argument("--g", help="classifier as a bit string over the support, e.g. 100")
    return parser


# --------------------------------------------------------------------------- #
# Configuration
# --------------------------------------------------------------------------- #


def resolve_config(args: argparse.Namespace) -> dict:
    cfg = dict(DEFAULTS[args.command])
    cfg.update(seed=None, workers=None, scenario=None)
    if args.config:
        try:
            loaded = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError("config", f"cannot read JSON config ({exc})")
        if not isinstance(loaded, dict):
            raise ConfigError("config", "top level must be a JSON object")
        for key, value in loaded.items():
            if key == "command":
                continue
            if key not in cfg and key not in ("n", "V", "h", "em", "p", "kappa1", "kappa2", "K"):
                raise ConfigError(key, f"unknown parameter for '{args.command}'")
            cfg[key] = value
    for key, value in vars(args).items():
        if key in ("command", "config", "out") or value is None:
            continue
        cfg[key] = value
    if cfg["workers"] is None:
        cfg["workers"] = default_workers()
    if cfg.get("sweep") == "em":
        cfg["sweep"] = "e_m"
    check_config(args.command, cfg)
    return cfg


def _number(cfg, key, lo=None, hi=None, lo_open=False, integer=False, allow_none=False):
    v = cfg.get(key)
    if v is None:
        if allow_none:
            return
        raise ConfigError(key, "required")
    if isinstance(v, bool) or not isinstance(v, (int, float)) or (integer and float(v) != int(v)):
        raise ConfigError(key, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
    if not math.isfinite(v):
        raise ConfigError(key, "must be finite")
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(key, f"must be {'>' if lo_open else '>='} {lo}, got {v}")
    if hi is not None and v > hi:
        raise ConfigError(key, f"must be <= {hi}, got {v}")
    if integer:
        cfg[key] = int(v)


def check_config(command: str, cfg: dict):
    for key in REQUIRED.get(command, ()):
        if cfg.get(key) is None:
            raise ConfigError(key, "required")
    if command in STOCHASTIC:
        _number(cfg, "seed", lo=0, hi=2**64 - 1, integer=True)
    else:
        _number(cfg, "seed", lo=0, hi=2**64 - 1, integer=True, allow_none=True)
    _number(cfg, "workers", lo=1, integer=True)
    _number(cfg, "n", lo=1, integer=True, allow_none=True)
    _number(cfg, "V", lo=2 if command in ("minimax", "curve", "risk", "erm") else 1, integer=True, allow_none=True)
    _number(cfg, "h", lo=0, hi=1, lo_open=True, allow_none=True)
    _number(cfg, "em", lo=0, hi=1, lo_open=True, allow_none=True)
    _number(cfg, "p", lo=0, hi=1, lo_open=True, allow_none=True)
    _number(cfg, "kappa1", lo=0, lo_open=True, allow_none=True)
    _number(cfg, "kappa2", lo=0, lo_open=True, allow_none=True)
    _number(cfg, "K", lo=1, allow_none=True)
    _number(cfg, "replicates", lo=1, integer=True, allow_none=True)
    if command in ("curve", "minimax", "cannings") and cfg.get("replicates") is not None and cfg["replicates"] < 100:
        raise ConfigError("replicates", f"must be >= 100, got {cfg['replicates']}")
    if command == "minimax" and cfg.get("V", 0) > 13:
        raise ConfigError("V", "must be <= 13 so that all bit vectors can be enumerated")
    if cfg.get("p") is not None and cfg.get("V", 1) >= 2 and cfg["p"] > 1.0 / (cfg["V"] - 1) + 1e-15:
        raise ConfigError("p", f"must be <= 1/(V-1) = {1.0 / (cfg['V'] - 1):.6g}")
    if command == "bounds" and cfg["n"] * cfg["em"] < 1:
        raise ConfigError("n", "n * em must be >= 1")
    if "loss" in cfg and cfg["loss"] not in [k.value for k in LossKind]:
        raise ConfigError("loss", f"unknown loss kind {cfg['loss']!r}")
    if "grid" in cfg:
        grid = cfg["grid"]
        if not isinstance(grid, (list, tuple)) or len(grid) < 2:
            raise ConfigError("grid", "need at least two values")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError("grid", "must be strictly increasing")
        if command == "cannings" or cfg.get("sweep") == "n":
            if any(v < 1 or float(v) != int(v) for v in grid):
                raise ConfigError("grid", "sample sizes must be positive integers")
        elif any(not 0 < v <= 1 for v in grid):
            raise ConfigError("grid", f"{cfg['sweep']} values must lie in (0, 1]")


def load_scenario(cfg: dict):
    """Scenario from --scenario (inline JSON or file), else the Assouad member with b = all ones."""
    source = cfg.get("scenario")
    if source is None:
        return assouad_scenario(cfg["V"], cfg["p"], cfg["h"], (1,) * (cfg["V"] - 1), cfg["em"])
    if isinstance(source, str):
        text = source
        if not source.lstrip().startswith("{"):
            try:
                text = Path(source).read_text()
            except OSError as exc:
                raise ConfigError("scenario", f"cannot read file ({exc})")
        try:
            source = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("scenario", f"malformed JSON ({exc})")
    try:
        return scenario_from_dict(source)
    except (ScenarioError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError("scenario", str(exc))


# --------------------------------------------------------------------------- #
# Output
# --------------------------------------------------------------------------- #


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return str(int(v))
    return str(v)


def render_csv(schema: str, columns, rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema: pu_risklab.{schema}.v{SCHEMA_VERSION}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def emit(command: str, cfg: dict, out: str | None, schema: str, columns, rows, summary: list[str],
         started: float, extra: dict | None = None):
    text = render_csv(schema, columns, rows)
    if out is None:
        sys.stdout.write(text)
        for line in summary:
            print(f"# {line}")
        return
    path = Path(out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True)
    path.write_text(text)
    manifest = {
        "command": command, "config": cfg, "seed": cfg.get("seed"), "version": __version__,
        "schema": f"pu_risklab.{schema}.v{SCHEMA_VERSION}", "wall_time_s": time.perf_counter() - started,
    }
    if extra:
        manifest.update(extra)
    Path(str(path) + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str))
    for line in summary:
        print(line)
    print(f"wrote {path}")


# --------------------------------------------------------------------------- #
# Subcommands
# --------------------------------------------------------------------------- #


def cmd_validate(cfg, out, started) -> int:
    checks = experiments.run_invariant_suite(cfg["seed"], cfg["replicates"], workers=cfg["workers"])
    rows = [dict(check=c.name, passed=c.passed, cases=c.cases, detail=c.detail) for c in checks]
    summary = [f"{'PASS' if c.passed else 'FAIL'} {c.name} ({c.cases} cases) {c.detail}".rstrip() for c in checks]
    emit("validate", cfg, out, "validate", ("check", "passed", "cases", "detail"), rows, summary, started)
    return 0 if all(c.passed for c in checks) else 1


def _classifiers(cfg, scenario):
    if cfg.get("g"):
        bits = str(cfg["g"])
        if len(bits) != scenario.size or set(bits) - {"0", "1"}:
            raise ConfigError("g", f"expected {scenario.size} bits, got {bits!r}")
        return [TableHypothesis(tuple(int(c) for c in bits))]
    return experiments.default_classifiers(scenario)


def cmd_risk(cfg, out, started) -> int:
    scenario = load_scenario(cfg)
    data = sample(scenario, cfg["n"], stream(cfg["seed"], 0, 0))
    alpha = scenario.alpha if scenario.is_scar else None
    rows = []
    for g in _classifiers(cfg, scenario):
        rep = risk_report(scenario, data, g, alpha=alpha, e_m=scenario.e_m)
        rows.append(rep.to_row(scenario.name, g.encoding, cfg["n"], cfg["seed"]))
    summary = [f"{r['g_id']}: R={r['r_true']:.6g} sar={r['r_emp_sar']:.6g}" for r in rows]
    emit("risk", cfg, out, "risk", RISK_CSV_COLUMNS, rows, summary, started,
         {"scenario": scenario_to_dict(scenario)})
    return 0


def cmd_erm(cfg, out, started) -> int:
    scenario = load_scenario(cfg)
    data = sample(scenario, cfg["n"], stream(cfg["seed"], 0, 0))
    kind = LossKind(cfg["loss"])
    res = erm(AllLabelingsOfPoints(scenario.size), data, kind,
              alpha=scenario.alpha if kind is LossKind.SCAR_ALPHA else None,
              e_m=scenario.e_m if kind is LossKind.SCAR_EM else None)
    row = dict(res.to_dict(), n=cfg["n"], seed=cfg["seed"], bayes=bayes_classifier(scenario).encoding,
               excess=excess_risk(scenario, res.minimizer))
    cols = ("loss_kind", "hypothesis_encoding", "min_emp_risk", "num_ties", "bayes", "excess", "n", "seed")
    emit("erm", cfg, out, "erm", cols, [row], [f"ERM {row['hypothesis_encoding']} excess={row['excess']:.6g}"],
         started)
    return 0


def cmd_bounds(cfg, out, started) -> int:
    try:
        rep = bounds.bound_report(cfg["n"], cfg["V"], cfg["h"], cfg["em"], cfg["kappa1"], cfg["kappa2"], cfg["K"])
    except ValueError as exc:
        raise ConfigError("bounds", str(exc))
    summary = [f"upper={rep.upper:.6g} ({rep.regime}) lower={rep.lower} ({rep.lower_case}) eps*^2={rep.eps_star_sq:.6g}"]
    emit("bounds", cfg, out, "bounds", bounds.BOUND_CSV_COLUMNS, [rep.to_row()], summary, started)
    return 0


def cmd_curve(cfg, out, started) -> int:
    param = cfg["sweep"]
    grid = tuple(int(v) for v in cfg["grid"]) if param == "n" else tuple(float(v) for v in cfg["grid"])
    tpl = experiments.ScenarioTemplate(V=cfg["V"], h=cfg["h"], e_m=cfg["em"], p=cfg["p"])
    try:
        config = experiments.SweepConfig(tpl, param, grid, n=cfg["n"], replicates=cfg["replicates"],
                                         seed=cfg["seed"], loss_kind=cfg["loss"])
        res = experiments.run_rate_sweep(config, workers=cfg["workers"])
    except (ScenarioError, ValueError) as exc:
        raise ConfigError("curve", str(exc))
    fit = res.fit
    summary = [f"slope={fit.slope:.4f} r2={fit.r_squared:.4f} points={len(fit.points)} excluded={fit.excluded}"
               if fit.ok else f"no fit: {fit.excluded} points excluded"]
    emit("curve", cfg, out, "curve", experiments.SWEEP_COLUMNS, res.rows, summary, started,
         {"fit": dict(slope=fit.slope, intercept=fit.intercept, r_squared=fit.r_squared, excluded=fit.excluded)})
    return 0


def cmd_minimax(cfg, out, started) -> int:
    V, h, em, n = cfg["V"], cfg["h"], cfg["em"], cfg["n"]
    p = cfg["p"] if cfg["p"] is not None else experiments.ScenarioTemplate(V=V, h=h, e_m=em).mass(n)
    try:
        res = experiments.run_minimax_experiment(V, p, h, em, n, cfg["replicates"], cfg["seed"],
                                                 kappa1_hat=cfg["kappa1"], kappa2=cfg["kappa2"],
                                                 workers=cfg["workers"])
    except (ScenarioError, ValueError) as exc:
        raise ConfigError("minimax", str(exc))
    summary = [f"sup_b={res.sup_mean:.6g} (se {res.sup_se:.2g}, b={''.join(map(str, res.sup_b))}) "
               f"lower={res.lower:.6g} ({res.lower_case}) upper={res.upper:.6g}"
               + (f" calibrated={res.calibrated_upper:.6g}" if res.calibrated_upper is not None else "")]
    emit("minimax", cfg, out, "minimax", experiments.MINIMAX_COLUMNS, res.rows, summary, started,
         {"sup_mean": res.sup_mean, "lower": res.lower, "lower_case": res.lower_case, "upper": res.upper,
          "calibrated_upper": res.calibrated_upper, "p": p})
    return 0 if res.sup_mean >= res.lower else 1


def cmd_cannings(cfg, out, started) -> int:
    rows = experiments.run_cannings_study(experiments.cannings_pair(), [int(v) for v in cfg["grid"]],
                                          cfg["replicates"], cfg["seed"], workers=cfg["workers"])
    summary = [f"{r['scenario']} n={r['n']} {r['loss']}: {r['mean_excess']:.4g} (plateau {r['plateau']:.4g})"
               for r in rows]
    emit("cannings", cfg, out, "cannings", experiments.CANNINGS_COLUMNS, rows, summary, started)
    return 0


HANDLERS = dict(validate=cmd_validate, risk=cmd_risk, erm=cmd_erm, bounds=cmd_bounds, curve=cmd_curve,
                minimax=cmd_minimax, cannings=cmd_cannings)


def main(argv=None) -> int:
    started = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ConfigError("subcommand", f"missing; choose one of {', '.join(SUBCOMMANDS)}")
        cfg = resolve_config(args)
        return HANDLERS[args.command](cfg, args.out, started)
    except ConfigError as exc:
        print(f"pu-risklab: config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
