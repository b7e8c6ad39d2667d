"""
Batch front end.

    ccch <command> --config <path> --out <dir> [--seed N]

Commands: simulate, peakon, norms, exp-nonuniform, exp-hoelder,
exp-conservation, check-peakon. Each writes a CSV table and ``report.json``
into the output directory. Exit status: 0 all checks pass, 2 some check
fails, 3 blow-up detected, 1 invalid config or I/O error.

``CCCH_THREADS`` caps the number of concurrent solves in sweeps.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import pathlib
import sys
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from . import experiments as ex
from .dynamics import CALIBRATED_CS, SolverParams, integrate, lifespan_estimate
from .norms import besov_norm, lp_norm, sobolev_norm, sup_norm
from .peakon import PeakonConfiguration, exact_traveling_peakon, integrate_peakons, weak_residual
from .spectral import FieldState, GridSpec, PDEParams, helmholtz, helmholtz_inv, random_bandlimited

__all__ = ["ConfigError", "RunConfig", "parse_config", "dispatch", "main", "COMMANDS", "EXIT"]

EXIT = {"pass": 0, "io": 1, "fail": 2, "blowup": 3}


class ConfigError(ValueError):
    pass


# -- schema ------------------------------------------------------------------------


@dataclass(frozen=True)
class Key:
    kind: str  # int, float, str, bool, list[float], list[int]
    default: Any = None
    check: Callable[[Any], str | None] | None = None
    choices: tuple | None = None
    required: bool = False


def _ge(lo, name=None):
    return lambda v: None if v >= lo else f"must be ≥ {lo}"


def _gt(lo):
    return lambda v: None if v > lo else f"must be > {lo}"


def _open01(v):
    return None if 0 < v < 1 else "must lie in (0, 1)"


def _half_open01(v):
    return None if 0 < v <= 1 else "must lie in (0, 1]"


def _pow2(v):
    return None if v >= 8 and v & (v - 1) == 0 else "must be a power of two ≥ 8"


def _positive_list(v):
    return None if len(v) >= 1 and all(x > 0 for x in v) else "must be a non-empty list of positive numbers"


PDE_KEYS = {
    "p": Key("int", 1, _ge(1)),
    "q": Key("int", 1, _ge(1)),
    "a": Key("float", 2.0),
    "b": Key("float", 2.0),
}
GRID_KEYS = {
    "n": Key("int", 1024, _pow2),
    "L": Key("float", 2.0 * math.pi, _gt(0)),
}
STEP_KEYS = {
    "dt": Key("float", 1e-3, _gt(0)),
    "cfl": Key("float", 0.5, _half_open01),
}

COMMANDS: dict[str, dict[str, Key]] = {
    "simulate": {
        **PDE_KEYS, **GRID_KEYS, **STEP_KEYS,
        "t_final": Key("float", None, _gt(0)),
        "s": Key("float", 3.0),
        "C_s": Key("float", CALIBRATED_CS, _gt(0)),
        "monitor_every": Key("int", 10, _ge(1)),
        "formulation": Key("str", "velocity", choices=("velocity", "momentum")),
        "dealias_degree": Key("int", None),
        "initial": Key("str", "random", choices=("random", "bump", "peakon")),
        "amplitude": Key("float", 0.5, _gt(0)),
        "kmax": Key("int", 8, _ge(1)),
        "mollify_eps": Key("float", None, _half_open01),
    },
    "peakon": {
        **PDE_KEYS,
        "c": Key("float", 1.0, _gt(0)),
        "domain": Key("str", "line", choices=("line", "circle")),
        "t_final": Key("float", 1.0, _gt(0)),
        "dt": Key("float", 1e-3, _gt(0)),
        "f": Key("list[float]", None),
        "g": Key("list[float]", None),
        "h": Key("list[float]", None),
        "k": Key("list[float]", None),
    },
    "norms": {
        **GRID_KEYS,
        "field": Key("str", "random", choices=("random", "sin", "peakon")),
        "kmax": Key("int", 16, _ge(1)),
        "amplitude": Key("float", 1.0, _gt(0)),
        "s_list": Key("list[float]", [0.0, 1.0, 2.5, 3.0]),
        "r_list": Key("list[float]", [1.0, 2.0, math.inf]),
        "lp_list": Key("list[float]", [1.0, 2.0]),
    },
    "exp-nonuniform": {
        **PDE_KEYS,
        "s": Key("float", 3.0, lambda v: None if v > 2.5 else "must be > 5/2"),
        "delta": Key("float", 0.5, _open01),
        "lambdas": Key("list[float]", [64.0, 128.0, 256.0, 512.0, 1024.0], _positive_list),
        "omegas": Key("list[float]", [0.0, 1.0], lambda v: None if len(v) == 2 else "must hold two values"),
        "t_probe": Key("float", 1.0, _gt(0)),
        "dt": Key("float", 0.05, _gt(0)),
        "points_per_wavelength": Key("float", 8.0, _ge(8)),
        "theta": Key("float", 2.0),
        "measure_error": Key("bool", True),
        "phi": Key("str", "cinf", choices=("cinf", "smoothstep")),
        "tilde": Key("str", "cinf_wide", choices=("cinf_wide", "smoothstep_wide")),
    },
    "exp-hoelder": {
        **PDE_KEYS,
        "s": Key("float", 3.0, lambda v: None if v > 2.5 else "must be > 5/2"),
        "r": Key("float", 2.0, _ge(0)),
        "eps_list": Key("list[float]", [1e-2, 5e-3, 2.5e-3, 1.25e-3, 6.25e-4], _positive_list),
        "n": Key("int", 256, _pow2),
        "dt": Key("float", 1e-3, _gt(0)),
        "t_final": Key("float", 0.5, _gt(0)),
        "amplitude": Key("float", 0.5, _gt(0)),
        "perturbation_scale": Key("float", 1.0, _ge(0)),
    },
    "exp-conservation": {
        "p": Key("int", 2, _ge(1)),
        "q": Key("int", 2, _ge(1)),
        "a": Key("float", 1.0),
        "b": Key("float", 1.0),
        "n": Key("int", 256, _pow2),
        "dt": Key("float", 1e-3, _gt(0)),
        "t_final": Key("float", 1.0, _gt(0)),
        "amplitude": Key("float", 0.5, _gt(0)),
        "monitor_every": Key("int", 10, _ge(1)),
    },
    "check-peakon": {
        **PDE_KEYS,
        "c": Key("float", 1.0, _gt(0)),
        "amplitude_scale": Key("float", 1.0, _gt(0)),
        "tol": Key("float", 1e-3, _gt(0)),
    },
}


@dataclass
class RunConfig:
    command: str
    params: dict
    seed: int = 0
    out_dir: pathlib.Path | None = None
    echo: dict = field(default_factory=dict)


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise ConfigError(f"config.{k}: duplicate key {k!r}")
        out[k] = v
    return out


def _coerce(path: str, name: str, spec: Key, value):
    def bad(what):
        return ConfigError(f"{path}: {name} must be {what}, got {value!r}")

    if value is None:
        return None
    kind = spec.kind
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise bad("an integer")
    elif kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise bad("a number")
        value = float(value)
    elif kind == "bool":
        if not isinstance(value, bool):
            raise bad("a boolean")
    elif kind == "str":
        if not isinstance(value, str):
            raise bad("a string")
        if spec.choices and value not in spec.choices:
            raise bad(f"one of {list(spec.choices)}")
    elif kind.startswith("list"):
        if not isinstance(value, list):
            raise bad("a list")
        out = []
        for i, item in enumerate(value):
            if isinstance(item, str) and item in ("inf", "Infinity"):
                item = math.inf
            if isinstance(item, bool) or not isinstance(item, (int, float)):
                raise ConfigError(f"{path}[{i}]: {name} entries must be numbers, got {item!r}")
            out.append(float(item))
        value = out
    if spec.check is not None:
        msg = spec.check(value)
        if msg:
            raise ConfigError(f"{path}: {name} {msg}")
    return value


def parse_config(text: str) -> RunConfig:
    """Validate a JSON run configuration and fill defaults.

    Raises :class:`ConfigError` naming the offending key path.
    """
    try:
        raw = json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config: invalid JSON ({e})") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: top level must be an object")
    command = raw.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"config.command: must be one of {sorted(COMMANDS)}, got {command!r}")
    schema = COMMANDS[command]
    seed = raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError(f"config.seed: seed must be a non-negative integer, got {seed!r}")
    params = {}
    for key, value in raw.items():
        if key in ("command", "seed"):
            continue
        if key not in schema:
            raise ConfigError(f"config.{key}: unknown key {key!r} for command {command!r}")
        params[key] = _coerce(f"config.{key}", key, schema[key], value)
    for key, spec in schema.items():
        if params.get(key) is None:
            if spec.required:
                raise ConfigError(f"config.{key}: missing required key")
            params[key] = spec.default
    _cross_checks(command, params)
    echo = {"command": command, "seed": seed, **{k: _jsonable(v) for k, v in params.items()}}
    return RunConfig(command, params, seed, None, echo)


def _jsonable(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    if isinstance(v, list):
        return [_jsonable(x) for x in v]
    return v


def _cross_checks(command: str, P: dict):
    if "p" in P and "q" in P and "dealias_degree" in P:
        kappa = max(P["p"], P["q"])
        if P["dealias_degree"] is None:
            P["dealias_degree"] = kappa + 1
        elif P["dealias_degree"] < kappa + 1:
            raise ConfigError(f"config.dealias_degree: dealias_degree must be ≥ {kappa + 1}")
    if command == "exp-hoelder":
        if not P["r"] < P["s"]:
            raise ConfigError("config.r: r must be < s")
        try:
            ex.classify_region(P["s"], P["r"])
        except ValueError as e:
            raise ConfigError(f"config.r: {e}") from None
        if len(P["eps_list"]) < 2:
            raise ConfigError("config.eps_list: eps_list needs at least two entries")
    if command == "exp-nonuniform":
        lams = P["lambdas"]
        if len(lams) < 2 or any(b <= a for a, b in zip(lams, lams[1:])) or lams[0] < 4:
            raise ConfigError("config.lambdas: lambdas must be increasing, ≥ 4, with at least two entries")
        if P["measure_error"] and not (1.5 < P["theta"] < P["s"] and P["delta"] < 1 + P["s"] - P["theta"]):
            raise ConfigError("config.theta: theta must satisfy 3/2 < theta < s and delta < 1 + s - theta")
    if command == "peakon":
        given = [P[k] is not None for k in ("f", "g", "h", "k")]
        if any(given) and not all(given):
            raise ConfigError("config.f: f, g, h, k must be given together")
        if all(given) and (len(P["f"]) != len(P["g"]) or len(P["h"]) != len(P["k"])):
            raise ConfigError("config.g: amplitude and position lists must have equal lengths")


# -- commands ----------------------------------------------------------------------


def _threads() -> int:
    raw = os.environ.get("CCCH_THREADS")
    if raw is None:
        return os.cpu_count() or 1
    try:
        val = int(raw)
    except ValueError:
        raise ConfigError(f"CCCH_THREADS must be a positive integer, got {raw!r}") from None
    if val < 1:
        raise ConfigError(f"CCCH_THREADS must be a positive integer, got {raw!r}")
    return val


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([("%.17g" % v) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


@dataclass
class Outcome:
    status: str
    csv_name: str
    csv_text: str
    report: dict


def _verdict(name, passed, **kw) -> dict:
    return {"name": name, "verdict": "PASS" if passed else "FAIL", **kw}


def _cmd_simulate(cfg: RunConfig) -> Outcome:
    P = cfg.params
    pde = PDEParams(P["p"], P["q"], P["a"], P["b"])
    g = GridSpec(P["n"], P["L"])
    rng = np.random.default_rng(cfg.seed)
    if P["initial"] == "random":
        u = random_bandlimited(g, rng, kmax=P["kmax"], amplitude=P["amplitude"])
        v = random_bandlimited(g, rng, kmax=P["kmax"], amplitude=P["amplitude"])
    elif P["initial"] == "bump":
        m0 = g.field(ex.compact_bump(g.x, 0.4 * g.length, 0.16 * g.length, P["amplitude"]))
        n0 = g.field(ex.compact_bump(g.x, 0.55 * g.length, 0.19 * g.length, P["amplitude"]))
        u, v = helmholtz_inv(m0), helmholtz_inv(n0)
    else:
        cfg_pk = exact_traveling_peakon(1.0, pde.p, pde.q, "line", pde.a, pde.b, x0=0.5 * g.length)
        u, v = g.field(cfg_pk.u(g.x)), g.field(cfg_pk.v(g.x))
    st = FieldState(u, v, pde)
    T0 = lifespan_estimate(st, P["s"], P["C_s"])
    t_final = P["t_final"] if P["t_final"] is not None else min(T0, 10.0)
    sp = SolverParams(
        p=pde.p, q=pde.q, a=pde.a, b=pde.b, dt=P["dt"], cfl=P["cfl"], t_final=t_final,
        dealias_degree=P["dealias_degree"], monitor_every=P["monitor_every"], formulation=P["formulation"],
        norm_s=P["s"], mollify_eps=P["mollify_eps"],
    )
    _, trace = integrate(st, sp)
    finite = all(math.isfinite(x) for r in trace.rows for x in r)
    verdicts = [_verdict("finite_trace", finite)]
    report = {
        "lifespan_T0": T0, "C_s": P["C_s"], "t_final": t_final, "run_status": trace.status,
        "blowup_time": trace.blowup_time, "blowup_reason": trace.blowup_reason, "steps": trace.steps,
        "halvings": trace.halvings, "verdicts": verdicts,
    }
    if trace.status == "blowup":
        status = "blowup"
    else:
        status = "pass" if finite else "fail"
    return Outcome(status, "trace.csv", _csv_text(trace.columns, trace.rows), report)


def _cmd_peakon(cfg: RunConfig) -> Outcome:
    P = cfg.params
    pde = PDEParams(P["p"], P["q"], P["a"], P["b"])
    exact = P["f"] is None
    if exact:
        pk = exact_traveling_peakon(P["c"], pde.p, pde.q, P["domain"], pde.a, pde.b)
    else:
        pk = PeakonConfiguration(P["domain"], P["f"], P["g"], P["h"], P["k"], pde)
    traj = integrate_peakons(pk, P["t_final"], P["dt"])
    verdicts = [_verdict("no_collision", traj.status == "ok", message=traj.message)]
    if exact and traj.status == "ok":
        gs, fs = traj.series("g")[:, 0], traj.series("f")[:, 0]
        shift = gs[-1] - gs[0]
        if P["domain"] == "circle":
            shift = (shift - P["c"] * P["t_final"] + math.pi) % (2 * math.pi) - math.pi + P["c"] * P["t_final"]
        err = abs(shift - P["c"] * P["t_final"])
        verdicts.append(_verdict("travel_distance", err <= 1e-10, measured=err, predicted=0.0))
        fdev = float(np.abs(fs - fs[0]).max())
        verdicts.append(_verdict("constant_amplitude", fdev <= 1e-12, measured=fdev, predicted=0.0))
    ok = all(v["verdict"] == "PASS" for v in verdicts)
    report = {"run_status": traj.status, "verdicts": verdicts}
    return Outcome("pass" if ok else "fail", "peakons.csv", _csv_text(traj.header(), traj.rows()), report)


def _cmd_norms(cfg: RunConfig) -> Outcome:
    P = cfg.params
    g = GridSpec(P["n"], P["L"])
    if P["field"] == "random":
        f = random_bandlimited(g, np.random.default_rng(cfg.seed), kmax=P["kmax"], amplitude=P["amplitude"])
    elif P["field"] == "sin":
        f = g.field(P["amplitude"] * np.sin(2 * math.pi * g.x / g.length))
    else:
        f = g.field(P["amplitude"] * np.exp(-np.abs(g.x - 0.5 * g.length)))
    rows = []
    worst = 0.0
    m = helmholtz(f)
    for s in P["s_list"]:
        hs = sobolev_norm(f, s)
        rows.append(["sobolev", s, "", hs])
        if hs > 0:
            worst = max(worst, abs(sobolev_norm(m, s - 2) - hs) / hs)
        for r in P["r_list"]:
            rows.append(["besov", s, r, besov_norm(f, s, r)])
    for p in P["lp_list"]:
        rows.append(["lebesgue", p, "", lp_norm(f, p)])
    rows.append(["sup", "", "", sup_norm(f)])
    verdicts = [_verdict("momentum_identity", worst <= 1e-12, measured=worst, predicted=0.0)]
    rows = [[k, ("%.17g" % a) if isinstance(a, float) else a, ("%.17g" % b) if isinstance(b, float) else b, v]
            for k, a, b, v in rows]
    report = {"verdicts": verdicts}
    return Outcome("pass" if worst <= 1e-12 else "fail", "norms.csv",
                   _csv_text(["kind", "index", "r", "value"], rows), report)


def _report_outcome(rep: ex.ExperimentReport, csv_name: str) -> Outcome:
    report = rep.to_dict()
    report.pop("config", None)
    return Outcome("pass" if rep.passed else "fail", csv_name, rep.csv_text(), report)


def _cmd_nonuniform(cfg: RunConfig) -> Outcome:
    P = cfg.params
    prm = ex.NonuniformParams(
        s=P["s"], delta=P["delta"], p=P["p"], q=P["q"], a=P["a"], b=P["b"], lambdas=tuple(P["lambdas"]),
        omegas=tuple(P["omegas"]), t_probe=P["t_probe"], phi=P["phi"], psi=P["phi"], phi_tilde=P["tilde"],
        psi_tilde=P["tilde"], points_per_wavelength=P["points_per_wavelength"], dt=P["dt"],
        theta=P["theta"], measure_error=P["measure_error"],
    )
    rep = ex.run_nonuniform(prm, workers=_threads())
    out = _report_outcome(rep, "nonuniform.csv")
    if any("blew up" in n for n in rep.notes) and out.status == "pass":
        out.status = "blowup"
    return out


def _cmd_hoelder(cfg: RunConfig) -> Outcome:
    P = cfg.params
    rep = ex.run_hoelder(
        s=P["s"], r=P["r"], p=P["p"], q=P["q"], a=P["a"], b=P["b"], eps_list=P["eps_list"], seed=cfg.seed,
        n=P["n"], t_final=P["t_final"], dt=P["dt"], amplitude=P["amplitude"],
        perturbation_scale=P["perturbation_scale"], workers=_threads(),
    )
    return _report_outcome(rep, "hoelder.csv")


def _cmd_conservation(cfg: RunConfig) -> Outcome:
    P = cfg.params
    rep = ex.run_conservation(
        p=P["p"], q=P["q"], a=P["a"], b=P["b"], n=P["n"], dt=P["dt"], t_final=P["t_final"], seed=cfg.seed,
        amplitude=P["amplitude"], monitor_every=P["monitor_every"],
    )
    out = _report_outcome(rep, "trace.csv")
    if not rep.verdicts[0].passed:
        out.status = "blowup"
    return out


def _cmd_check_peakon(cfg: RunConfig) -> Outcome:
    P = cfg.params
    pk = exact_traveling_peakon(P["c"], P["p"], P["q"], "line", P["a"], P["b"])
    if P["amplitude_scale"] != 1.0:
        s = P["amplitude_scale"]
        pk = PeakonConfiguration("line", pk.f * s, pk.g, pk.h * s, pk.k, pk.params)
    res = weak_residual(pk, P["c"], tol=P["tol"])
    verdicts = [
        _verdict("nonlocal_identity", res.identity_holds, measured=res.identity_error, predicted=0.0),
        _verdict("weak_solution", res.is_weak_solution, measured=res.residual_sup, predicted=0.0),
    ]
    rows = list(zip(res.x, res.I1_quad, res.I1_closed, res.I2_quad, res.I2_closed, res.residual_u, res.residual_v))
    header = ["x", "I1_quad", "I1_closed", "I2_quad", "I2_closed", "residual_u", "residual_v"]
    ok = all(v["verdict"] == "PASS" for v in verdicts)
    return Outcome("pass" if ok else "fail", "residual.csv", _csv_text(header, rows), {"verdicts": verdicts})


HANDLERS = {
    "simulate": _cmd_simulate,
    "peakon": _cmd_peakon,
    "norms": _cmd_norms,
    "exp-nonuniform": _cmd_nonuniform,
    "exp-hoelder": _cmd_hoelder,
    "exp-conservation": _cmd_conservation,
    "check-peakon": _cmd_check_peakon,
}


def dispatch(cfg: RunConfig) -> int:
    """Run ``cfg``, write its artifacts into ``cfg.out_dir`` and return the exit status."""
    if cfg.out_dir is None:
        raise ValueError("RunConfig.out_dir is not set")
    t0 = time.perf_counter()
    out = HANDLERS[cfg.command](cfg)
    report = {"command": cfg.command, **out.report, "status": out.status,
              "config": cfg.echo, "wall_time": time.perf_counter() - t0}
    try:
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        (cfg.out_dir / out.csv_name).write_text(out.csv_text)
        (cfg.out_dir / "report.json").write_text(json.dumps(report, indent=2, default=_json_default) + "\n")
    except OSError as e:
        print(f"ccch: cannot write output: {e}", file=sys.stderr)
        return EXIT["io"]
    return EXIT[out.status]


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, float) and not math.isfinite(o):
        return str(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(prog="ccch", description="Cross-coupled Camassa-Holm simulation laboratory")
    ap.add_argument("command", choices=sorted(COMMANDS))
    ap.add_argument("--config", required=True, help="JSON run configuration")
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    args = ap.parse_args(argv)
    try:
        text = pathlib.Path(args.config).read_text()
    except OSError as e:
        print(f"ccch: cannot read config: {e}", file=sys.stderr)
        return EXIT["io"]
    try:
        cfg = parse_config(text)
        if cfg.command != args.command:
            raise ConfigError(f"config.command: {cfg.command!r} does not match the CLI command {args.command!r}")
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg.seed = args.seed
            cfg.echo["seed"] = args.seed
        _threads()
    except ConfigError as e:
        print(f"ccch: {e}", file=sys.stderr)
        return EXIT["io"]
    cfg.out_dir = pathlib.Path(args.out)
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
