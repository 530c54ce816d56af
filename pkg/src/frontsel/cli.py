"""Command-line interface.

Usage::

    frontsel dispersion --config run.toml
    frontsel speed      --config run.toml --out results --svg
    frontsel wave       --config run.toml
    frontsel classify   --config run.toml
    frontsel threshold  --config run.toml
    frontsel sweep      --config run.toml --workers 4
    frontsel preset     {figure1,figure2,hadeler_rothe_table,beta_star_check,nonlocal_kpp}

Config schema (TOML; JSON with the same structure is also accepted, unknown
keys are rejected)::

    workers = 1                      # worker processes for sweeps
    deterministic = true

    [model]
    kind = "lv_system"               # scalar_local | lv_system | scalar_nonlocal
    [model.nonlinearity]             # scalar models
    kind = "hadeler_rothe"           # fisher_kpp | hadeler_rothe | custom_cubic
    s = 3.0
    coeffs = [0, 1, -1]              # custom_cubic only, ascending powers
    [model.lv]
    a = 0.5
    b = 0.5
    d = 1.0
    r = 1.0
    [model.kernel]                   # scalar_nonlocal
    shape = "uniform"                # uniform | parabolic_bump | custom_samples
    half_width = 1.0
    h = 0.1                          # defaults to grid.h
    samples = [...]                  # custom_samples only

    [grid]
    length = 400.0
    h = 0.1
    x0 = 10.0
    profile = "step"                 # step | tanh | compact_bump
    v_background = 1.0

    [run]
    t_end = 100.0
    dt = 0.01                        # default: from the CFL bound
    dt_cap = 0.01
    scheme = "explicit_euler"        # explicit_euler | imex_diffusion
    comoving = true
    sample_dt = 0.5
    level = 0.5
    t_lo_fraction = 0.5

    [wave]
    c = 2.1                          # omit for the minimal wave
    h = 0.02
    side = "plus_inf"                # plus_inf | minus_inf (classify)

    [threshold]
    parameter = "b"                  # a | b | d | r | s | q
    bracket = [0.5, 5.0]
    tol = 0.01
    method = "tw_bisection"          # tw_bisection | cauchy_speed
    margin = 0.02

    [sweep]
    parameter = "b"
    values = [0.5, 1.0, 2.0]
    measurements = ["c_hat", "excess", "c_star", "tail_class", "I", "verdict"]
    method = "tw_bisection"

    [output]
    dir = "results"
    svg = false

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 bracket or contract violation.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path
from typing import List, Optional

from .config import (build_family, build_model, build_setup, config_hash, load_config)
from .dispersion import (decay_rates, hadeler_rothe_speed, lv_dispersion_report, nonlocal_linear_speed,
                         scalar_linear_speed)
from .errors import ConfigError, FrontselError
from .model import LVModel, NonlocalModel, ScalarModel, kpp_condition
from .output import OutputDir, _jsonable
from .presets import PRESETS
from .speed import speed_excess, spreading_speed
from .threshold import MEASUREMENTS, ModelFamily, find_threshold, minimal_wave_for, selection_verdict, sweep
from .waves.lv_bvp import lv_wave_bvp, pushed_integral
from .waves.nonlocal_waves import nonlocal_wave_extract
from .waves.shooting import scalar_wave_shoot
from .waves.tails import fit_tail

COMMANDS = ("dispersion", "speed", "wave", "classify", "threshold", "sweep", "preset")


def _require(cfg: dict, section: str):
    if section not in cfg:
        raise ConfigError(f"config key {section}: required by this command")
    return cfg[section]


# ---------------------------------------------------------------- commands

def cmd_dispersion(cfg: dict, out: OutputDir, svg: bool) -> dict:
    model = build_model(cfg)
    c = cfg.get("wave", {}).get("c")
    if isinstance(model, LVModel):
        report = lv_dispersion_report(model.params, c)
    elif isinstance(model, NonlocalModel):
        disp = nonlocal_linear_speed(model.kernel, model.family.gamma0)
        report = {"c0_star": disp.c0_star, "lambda0": disp.lambda0, "kernel_h": model.kernel.h}
        if c is not None and c > disp.c0_star:
            report["speed"] = c
            report["lambda_minus"] = disp.lambda_minus(c)
            report["lambda_plus"] = disp.lambda_plus(c)
    else:
        fam = model.family
        c_lin = scalar_linear_speed(fam.gamma0)
        report = {"f_prime_0": fam.gamma0, "linear_speed": c_lin, "kpp_condition": kpp_condition(fam)}
        if fam.kind == "hadeler_rothe":
            report["minimal_speed_formula"] = hadeler_rothe_speed(fam.s)
        c_eval = c_lin if c is None else c
        report["speed"] = c_eval
        report["decay_rates"] = list(decay_rates(c_eval, fam.gamma0))
    report = {"model": model.kind, **report}
    out.write_json("dispersion.json", report)
    return report


def cmd_speed(cfg: dict, out: OutputDir, svg: bool) -> dict:
    model = build_model(cfg)
    setup = build_setup(cfg)
    run = spreading_speed(model, setup)
    ex = speed_excess(run.estimate, model.linear_speed)
    out.write_csv("track.csv", ("t", "x", "x_over_t"),
                  ((t, x, x / t if t > 0 else math.nan) for t, x in zip(run.track.t.tolist(), run.track.x.tolist())))
    out.write_csv("series.csv", ("t", "front", "u_min", "u_max", "mass"), run.series.rows(setup.level))
    report = {"model": model.kind, "estimate": run.estimate.to_dict(), "excess": ex.to_dict(),
              "dt": run.config.dt, "scheme": run.config.scheme}
    out.write_json("speed.json", report)
    if svg:
        t, x = run.track.t, run.track.x
        pos = t > 5.0
        out.write_svg("speed.svg", series=[("x/t", t[pos].tolist(), (x[pos] / t[pos]).tolist())],
                      hlines=[(model.linear_speed, "linear speed")], xlabel="t", ylabel="x(t)/t")
    return report


def _wave(cfg: dict, model):
    wsec = cfg.get("wave", {})
    c = wsec.get("c")
    h = float(wsec.get("h", 0.02))
    if c is None:
        return minimal_wave_for(model, h=h)
    if isinstance(model, LVModel):
        return lv_wave_bvp(model.params, c=float(c), h=h)
    if isinstance(model, NonlocalModel):
        return nonlocal_wave_extract(model, float(c))
    prof = scalar_wave_shoot(model.family, float(c))
    if prof is None:
        from .errors import NumericError

        raise NumericError(f"no monotone wave at c={c}")
    return prof


def cmd_wave(cfg: dict, out: OutputDir, svg: bool) -> dict:
    model = build_model(cfg)
    prof = _wave(cfg, model)
    header = ("xi", "U") if prof.v is None else ("xi", "U", "V")
    cols = (prof.xi, prof.u) if prof.v is None else (prof.xi, prof.u, prof.v)
    out.write_csv("wave.csv", header, zip(*(c.tolist() for c in cols)))
    report = {"model": model.kind, "wave": prof.summary()}
    out.write_json("wave.json", report)
    if svg:
        series = [("U", prof.xi.tolist(), prof.u.tolist())]
        if prof.v is not None:
            series.append(("V", prof.xi.tolist(), prof.v.tolist()))
        out.write_svg("wave.svg", series=series, xlabel="xi", ylabel="profile", title=f"c={prof.c:.6g}")
    return report


def cmd_classify(cfg: dict, out: OutputDir, svg: bool) -> dict:
    model = build_model(cfg)
    prof = _wave(cfg, model)
    side = cfg.get("wave", {}).get("side", "plus_inf")
    fit = fit_tail(prof, side)
    report = {"model": model.kind, "wave": prof.summary(), "tail": fit.to_dict()}
    if isinstance(model, LVModel) and abs(prof.c - model.linear_speed) < 1e-2 and "lambda_double" in prof.meta:
        report["pushed_integral"] = pushed_integral(prof).to_dict()
    out.write_json("classify.json", report)
    return report


def cmd_threshold(cfg: dict, out: OutputDir, svg: bool) -> dict:
    sec = _require(cfg, "threshold")
    fam = ModelFamily(build_model(cfg), sec["parameter"])
    setup = build_setup(cfg) if sec.get("method") == "cauchy_speed" else None
    res = find_threshold(fam, sec["bracket"], tol=float(sec.get("tol", 1e-2)),
                         method=sec.get("method", "tw_bisection"), margin=sec.get("margin"), setup=setup)
    report = res.to_dict()
    out.write_json("threshold.json", report)
    return report


def cmd_sweep(cfg: dict, out: OutputDir, svg: bool, workers: int = 1) -> dict:
    sec = _require(cfg, "sweep")
    fam = ModelFamily(build_model(cfg), sec["parameter"])
    meas = sec.get("measurements", ["verdict"])
    table = sweep(fam, sec["values"], meas, setup=build_setup(cfg), workers=workers,
                  method=sec.get("method", "tw_bisection"))
    out.write_csv("sweep.csv", table.columns, ([r.get(k, "") for k in table.columns] for r in table.rows))
    report = {"parameter": table.parameter, "columns": table.columns, "rows": table.rows}
    out.write_json("sweep.json", report)
    if svg:
        numeric = [k for k in table.columns[1:] if all(isinstance(v, float) for v in table.column(k))]
        if numeric:
            out.write_svg("sweep.svg", series=[(k, table.column(table.parameter), table.column(k))
                                               for k in numeric], xlabel=table.parameter)
    return report


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frontsel", description="Spreading speeds and front selection.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("preset", nargs="?", choices=sorted(PRESETS), help="preset name (preset command only)")
    p.add_argument("--config", type=Path, help="TOML or JSON run configuration")
    p.add_argument("--out", type=Path, help="output directory (default: config output.dir or ./frontsel_out)")
    p.add_argument("--workers", type=int, help="worker processes for sweeps")
    p.add_argument("--svg", action="store_true", help="also emit SVG line plots")
    return p


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    try:
        if args.command == "preset":
            if args.preset is None:
                raise ConfigError("preset command needs a preset name")
            cfg = {"preset": args.preset}
            if args.config is not None:
                raise ConfigError("presets take no --config; their settings are pinned")
        else:
            if args.preset is not None:
                raise ConfigError(f"unexpected positional argument {args.preset!r}")
            if args.config is None:
                raise ConfigError(f"{args.command} needs --config")
            cfg = load_config(args.config)
            if "model" not in cfg:
                raise ConfigError("config key model: required")
        out_cfg = cfg.get("output", {})
        out = OutputDir(args.out or out_cfg.get("dir", "frontsel_out"))
        svg = args.svg or bool(out_cfg.get("svg", False))
        workers = args.workers or int(cfg.get("workers", 1))
        if workers < 1:
            raise ConfigError("--workers must be at least 1")
        if args.command == "preset":
            report = PRESETS[args.preset](out=out, svg=svg, log=lambda s: print(s, file=sys.stderr))
        elif args.command == "sweep":
            report = cmd_sweep(cfg, out, svg, workers)
        else:
            report = globals()[f"cmd_{args.command}"](cfg, out, svg)
        out.write_record(args.command, config_hash(cfg), started)
    except FrontselError as exc:
        print(f"frontsel: error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(json.dumps(report, indent=2, sort_keys=True, default=_jsonable))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
