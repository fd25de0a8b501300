"""Command-line experiment runner.

Every subcommand writes a JSON report (and CSV tables) into ``--out``.
Settings resolve as flags > ``POLYINT_*`` environment variables > config
file (TOML, or JSON by extension) > defaults.

Exit codes: 0 all checks passed; 2 usage or configuration error; 3 numeric
failure (diagnostic JSON in ``error.json``); 11-15 a failed check in the
section, fracderiv, identities, integrability or reconstruct stage.  ``suite``
returns the code of the first failing stage.
"""

import argparse
import dataclasses
import json
import math
import os
import sys
import traceback
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, _backend
from .errors import PolyIntError, UnsupportedOperation
from .fracderiv import derivative_sweep, fractional_limit_check, sweep_to_csv
from .geometry import BodySpecError, Ellipsoid, as_direction, chord, load_body
from .integrability import derivative_vanishing_report, integrability_report
from .reconstruct import (
    odd_power_radical_check,
    parallelogram_test,
    product_body_B,
    reconstruct_ellipsoid,
)
from .sections import concavity_defect, section_area, section_profile, volume
from .spectral import checks_summary_csv, identity_sweep
from .spheres import sphere_points

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3
STAGE_CODES = {
    "section": 11,
    "fracderiv": 12,
    "identities": 13,
    "integrability": 14,
    "reconstruct": 15,
}
ENV_PREFIX = "POLYINT_"


class UsageError(Exception):
    pass


@dataclasses.dataclass
class RunConfig:
    body: object = "ball3"
    seed: int = 0
    dirs: int = 64
    nodes: int = 33
    nmax: int = 10
    tol: float = 1e-7
    control_tol: float = 1e-3
    identity_tol: float = 1e-6
    out: str = "reports"
    xi: list = None
    orders: list = dataclasses.field(default_factory=lambda: [0.0, 0.5, 1.0, 1.5, 2.0, 2.5])
    expect_degree: int = None
    expect_ellipsoid: bool = None
    csv: bool = True

    def validate(self):
        for name in ("tol", "control_tol", "identity_tol"):
            if not getattr(self, name) > 0:
                raise UsageError(f"{name} must be positive")
        if self.dirs < 8:
            raise UsageError("dirs must be at least 8")
        if self.nodes < 16:
            raise UsageError("nodes must be at least 16")
        if not 0 <= self.nmax < self.nodes - 2:
            raise UsageError("nmax must satisfy 0 <= nmax < nodes - 2")
        return self

    def to_json(self):
        return dataclasses.asdict(self)


_FIELDS = {f.name: f for f in dataclasses.fields(RunConfig)}


def _coerce(name, value):
    kind = {"seed": int, "dirs": int, "nodes": int, "nmax": int, "expect_degree": int,
            "tol": float, "control_tol": float, "identity_tol": float, "out": str}.get(name)
    try:
        if name in ("csv", "expect_ellipsoid"):
            if isinstance(value, str):
                low = value.strip().lower()
                if low not in ("1", "0", "true", "false", "yes", "no"):
                    raise ValueError(value)
                return low in ("1", "true", "yes")
            return bool(value)
        if name in ("xi", "orders"):
            if isinstance(value, str):
                value = [v for v in value.replace(",", " ").split()]
            return [float(v) for v in value]
        if name == "body":
            if isinstance(value, str) and value.strip().startswith("{"):
                return json.loads(value)
            return value
        return kind(value) if kind else value
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid value for {name}: {value!r}") from exc


def _read_config_file(path):
    p = Path(path)
    try:
        raw = p.read_bytes()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    try:
        if p.suffix.lower() == ".json":
            data = json.loads(raw)
        else:
            data = tomllib.loads(raw.decode())
    except (ValueError, tomllib.TOMLDecodeError) as exc:
        raise UsageError(f"cannot parse config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise UsageError("config must be a table/object at top level")
    unknown = sorted(set(data) - set(_FIELDS))
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return data


def resolve_config(args, environ=None):
    """Merge defaults, config file, environment and flags (in increasing priority)."""
    environ = os.environ if environ is None else environ
    values = {}
    if args.config:
        values.update(_read_config_file(args.config))
    for name in _FIELDS:
        key = ENV_PREFIX + name.upper()
        if key in environ:
            values[name] = environ[key]
    for name in _FIELDS:
        v = getattr(args, name, None)
        if v is not None:
            values[name] = v
    cfg = RunConfig(**{k: _coerce(k, v) for k, v in values.items()})
    return cfg.validate()


# ---------------------------------------------------------------------------
# reports


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def render_report(body):
    """JSON text whose second line is the (timestamped) header; the rest is deterministic."""
    header = {"timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
              "tool": f"polyint {__version__}", "backend": _backend.NAME}
    rest = json.dumps(_plain(body), indent=2, sort_keys=False)
    return '{\n  "header": ' + json.dumps(header) + "," + rest[1:] + "\n"


def _write(out, name, text):
    out.mkdir(parents=True, exist_ok=True)
    (out / name).write_text(text)


def _check(name, value, limit, passed=None, **extra):
    ok = (value <= limit) if passed is None else passed
    return {"name": name, "value": value, "limit": limit, "pass": bool(ok), **extra}


def _direction(cfg, dim):
    if cfg.xi is not None:
        if len(cfg.xi) != dim:
            raise UsageError(f"xi has {len(cfg.xi)} components, body lives in R^{dim}")
        return as_direction(cfg.xi)
    return as_direction(np.arange(1, dim + 1, dtype=float))


# ---------------------------------------------------------------------------
# stages; each returns (result dict, checks list, csv tables)


def stage_section(body, cfg):
    xi = _direction(cfg, body.dim)
    prof = section_profile(body, xi, cfg.nodes)
    vol = volume(body)
    checks = [
        _check("volume direction spread", vol.spread, 1e-6),
        _check("concavity defect", concavity_defect(prof), 1e-6),
    ]
    a0 = section_area(body, xi, 0.0) if chord(body, xi).contains(0.0) else 0.0
    entry = {"name": "A(0)", "value": a0}
    if isinstance(body, Ellipsoid):
        ref = section_area(body, xi, 0.0, method="quadrature")
        checks.append(_check("A(0)", abs(a0 - ref), 1e-9, closed_form=a0, quadrature=ref))
    else:
        checks.append(_check("A(0)", 0.0, 0.0, passed=a0 > 0, value_A0=a0))
    result = {"direction": xi.tolist(), "volume": vol.value, "volume_per_direction":
              vol.per_direction, "A0": entry, "profile": prof.to_json()}
    return result, checks, {"section.csv": prof.to_csv()}


def stage_fracderiv(body, cfg):
    xi = _direction(cfg, body.dim)
    prof = section_profile(body, xi, cfg.nodes)
    reports = derivative_sweep(prof, cfg.orders)
    checks, limits = [], []
    for k in (0, 1, 2):
        lc = fractional_limit_check(prof, k)
        limits.append({"k": k, "reference": lc.reference,
                       "deviations": {repr(d): v for d, v in lc.deviations.items()},
                       "central": {repr(d): v for d, v in lc.central.items()}})
        checks.append(_check(f"continuity at q={k}", lc.residual, None, passed=lc.shrinking))
    result = {"direction": xi.tolist(),
              "sweep": [dataclasses.asdict(r) for r in reports], "limits": limits}
    return result, checks, {"fracderiv.csv": sweep_to_csv(reports)}


def stage_identities(body, cfg):
    if not (isinstance(body, Ellipsoid) and body.centered):
        raise UnsupportedOperation("identity checks need a ball or centered ellipsoid")
    n = body.dim
    dirs = sphere_points(n, cfg.dirs, cfg.seed)
    orders = [k for k in range(0, n - 1)]
    checks_raw = identity_sweep(body, orders, dirs, node_count=cfg.nodes)
    worst = {}
    for c in checks_raw:
        worst[c.k] = max(worst.get(c.k, 0.0), c.abs_residual)
    checks = [_check(f"identity k={k}", r, cfg.identity_tol) for k, r in worst.items()]
    sample = [c.to_json() for c in checks_raw if c.xi == checks_raw[0].xi]
    result = {"orders": orders, "max_residual": {str(k): v for k, v in worst.items()},
              "first_direction": sample}
    return result, checks, {"identities.csv": checks_summary_csv(checks_raw)}


def stage_integrability(body, cfg):
    verdict = integrability_report(body, cfg.dirs, cfg.nmax, cfg.tol, cfg.nodes, seed=cfg.seed)
    result = {"verdict": verdict.to_json()}
    checks = []
    if verdict.global_N is None:
        control = integrability_report(body, cfg.dirs, cfg.nmax, cfg.control_tol, cfg.nodes,
                                       seed=cfg.seed)
        result["negative_control"] = {"tol": cfg.control_tol, "global_N": control.global_N}
    else:
        ms = list(range(verdict.global_N + 1, 7))
        if ms:
            van = derivative_vanishing_report(body, ms, cfg.dirs, cfg.nodes, seed=cfg.seed)
            result["derivative_vanishing"] = {str(m): v for m, v in van.items()}
            worst = max(v["max"] for v in van.values())
            checks.append(_check("derivatives above N vanish", worst, 10 * cfg.tol))
    if cfg.expect_degree is not None:
        checks.append(_check("expected degree", 0.0, 0.0,
                             passed=verdict.global_N == cfg.expect_degree,
                             expected=cfg.expect_degree, found=verdict.global_N))
    return result, checks, {"integrability.csv": verdict.to_csv()}


def stage_reconstruct(body, cfg):
    rep = reconstruct_ellipsoid(body, seed=cfg.seed)
    result = {"pipeline": rep.to_json()}
    checks = []
    if rep.matrix_error is not None:
        checks.append(_check("matrix relative error", rep.matrix_error, 1e-6))
        checks.append(_check("center error", rep.center_error, 1e-6))
    if cfg.expect_ellipsoid is not None:
        checks.append(_check("expected classification", 0.0, 0.0,
                             passed=(rep.verdict == "ellipsoid") == cfg.expect_ellipsoid,
                             expected=cfg.expect_ellipsoid, found=rep.verdict))
    B, resB = product_body_B(body, seed=cfg.seed)
    result["product_body_B"] = {"residual": resB, "B": B.to_json()}
    if rep.verdict == "ellipsoid":
        rad = {str(k): odd_power_radical_check(body, k, seed=cfg.seed) for k in (1, 2, 3)}
        result["odd_power_radical"] = rad
        checks.append(_check("odd-power radical identity", max(rad.values()), 1e-6))
    if body.symmetric:
        result["parallelogram_violation"] = parallelogram_test(body, seed=cfg.seed)
    return result, checks, {}


STAGES = {
    "section": stage_section,
    "fracderiv": stage_fracderiv,
    "identities": stage_identities,
    "integrability": stage_integrability,
    "reconstruct": stage_reconstruct,
}


def _run_stage(name, body, cfg, out):
    result, checks, tables = STAGES[name](body, cfg)
    if cfg.csv:
        for fname, text in tables.items():
            _write(out, fname, text)
    passed = all(c["pass"] for c in checks)
    return {"stage": name, "pass": passed, "checks": checks, "result": result}


def run(command, cfg):
    """Execute one subcommand; returns the exit code and writes reports into ``cfg.out``."""
    out = Path(cfg.out)
    body = load_body(cfg.body)
    base = {"command": command, "config": cfg.to_json(), "body": body.to_json()}
    if command == "suite":
        stages, code = [], EXIT_OK
        for name in STAGES:
            if name == "identities" and not (isinstance(body, Ellipsoid) and body.centered):
                stages.append({"stage": name, "pass": True, "skipped":
                               "identity checks need a ball or centered ellipsoid"})
                continue
            st = _run_stage(name, body, cfg, out)
            stages.append(st)
            if not st["pass"] and code == EXIT_OK:
                code = STAGE_CODES[name]
        report = dict(base, stages=stages, exit_code=code)
    else:
        st = _run_stage(command, body, cfg, out)
        code = EXIT_OK if st["pass"] else STAGE_CODES[command]
        report = dict(base, **st, exit_code=code)
    _write(out, f"{command}.json", render_report(report))
    return code


# ---------------------------------------------------------------------------
# argument parsing


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML (or .json) run configuration")
    common.add_argument("--body", help="catalog id, JSON text or path to a body JSON file")
    common.add_argument("--out", metavar="DIR", help="report directory (default: reports)")
    common.add_argument("--seed", type=int, help="seed for every sampling decision")
    common.add_argument("--dirs", type=int, help="number of directions")
    common.add_argument("--nodes", type=int, help="profile node count")
    common.add_argument("--nmax", type=int, help="maximal polynomial degree tried")
    common.add_argument("--tol", type=float, help="integrability tolerance")
    common.add_argument("--xi", help="profile direction, comma separated")
    common.add_argument("--orders", help="fractional orders for the sweep, comma separated")
    common.add_argument("--expect-degree", dest="expect_degree", type=int)
    common.add_argument("--expect-ellipsoid", dest="expect_ellipsoid",
                        choices=["true", "false"])
    common.add_argument("--no-csv", dest="csv", action="store_const", const=False)

    parser = argparse.ArgumentParser(prog="polyint", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"polyint {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "section": "section profiles, volume and concavity checks",
        "fracderiv": "integer and fractional derivative sweeps at t = 0",
        "identities": "derivative / Fourier transform identities",
        "integrability": "polynomial integrability verdicts",
        "reconstruct": "ellipsoid reconstruction pipeline",
        "suite": "all of the above",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve_config(args)
    except UsageError as exc:
        print(f"polyint: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return run(args.command, cfg)
    except (UsageError, BodySpecError, UnsupportedOperation) as exc:
        print(f"polyint: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (PolyIntError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        diag = {"command": args.command, "error": type(exc).__name__, "message": str(exc),
                "config": cfg.to_json(), "traceback": traceback.format_exc().splitlines()[-6:]}
        try:
            _write(Path(cfg.out), "error.json", json.dumps(_plain(diag), indent=2) + "\n")
        except OSError:
            pass
        print(json.dumps(_plain(diag)), file=sys.stderr)
        return EXIT_NUMERIC
