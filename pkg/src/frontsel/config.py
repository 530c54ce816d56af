"""Run configuration: TOML (or JSON) documents validated against a JSON schema."""
from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Any, Dict

import jsonschema
import tomli

from .errors import ConfigError
from .model import (KernelSpec, LVModel, LVParams, ModelSpec, NonlinearityFamily, NonlocalModel,
                    ScalarModel)
from .speed import CauchySetup

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}


def _obj(props: Dict[str, Any], required=()) -> dict:
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


SCHEMA = _obj({
    "model": _obj({
        "kind": {"enum": ["scalar_local", "lv_system", "scalar_nonlocal"]},
        "nonlinearity": _obj({
            "kind": {"enum": ["fisher_kpp", "hadeler_rothe", "custom_cubic"]},
            "s": {"type": "number", "minimum": 0},
            "coeffs": {"type": "array", "items": _num, "minItems": 2},
        }),
        "lv": _obj({"a": _pos, "b": _pos, "d": _pos, "r": _pos}, required=("a", "b")),
        "kernel": _obj({
            "shape": {"enum": ["uniform", "parabolic_bump", "custom_samples"]},
            "half_width": _pos,
            "h": _pos,
            "samples": {"type": "array", "items": {"type": "number", "minimum": 0}},
        }),
    }, required=("kind",)),
    "grid": _obj({
        "length": _pos, "h": _pos, "x0": _num, "profile": {"enum": ["step", "tanh", "compact_bump"]},
        "v_background": {"type": "number", "minimum": 0},
    }),
    "run": _obj({
        "t_end": _pos, "dt": _pos, "dt_cap": _pos,
        "scheme": {"enum": ["explicit_euler", "imex_diffusion"]},
        "comoving": {"type": "boolean"}, "sample_dt": _pos,
        "level": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
        "t_lo_fraction": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
    }),
    "wave": _obj({
        "c": _pos, "h": _pos, "minimal": {"type": "boolean"},
        "side": {"enum": ["plus_inf", "minus_inf"]},
    }),
    "threshold": _obj({
        "parameter": {"enum": ["a", "b", "d", "r", "s", "q"]},
        "bracket": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "tol": _pos, "method": {"enum": ["tw_bisection", "cauchy_speed"]}, "margin": _pos,
    }, required=("parameter", "bracket")),
    "sweep": _obj({
        "parameter": {"enum": ["a", "b", "d", "r", "s", "q"]},
        "values": {"type": "array", "items": _num, "minItems": 1},
        "measurements": {"type": "array",
                         "items": {"enum": ["c_hat", "excess", "c_star", "tail_class", "I", "verdict"]}},
        "method": {"enum": ["tw_bisection", "cauchy_speed"]},
    }, required=("parameter", "values")),
    "output": _obj({"dir": {"type": "string"}, "svg": {"type": "boolean"}}),
    "workers": {"type": "integer", "minimum": 1},
    "deterministic": {"type": "boolean"},
})


def load_config(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        if path.suffix.lower() == ".json":
            cfg = json.loads(text)
        else:
            cfg = tomli.loads(text)
    except (tomli.TOMLDecodeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    validate_config(cfg)
    return cfg


def validate_config(cfg: dict) -> None:
    try:
        jsonschema.validate(cfg, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config key {where}: {exc.message}") from exc


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def build_family(sec: dict) -> NonlinearityFamily:
    coeffs = sec.get("coeffs")
    return NonlinearityFamily(sec.get("kind", "fisher_kpp"), float(sec.get("s", 0.0)),
                              tuple(coeffs) if coeffs is not None else None)


def build_kernel(sec: dict, default_h: float) -> KernelSpec:
    shape = sec.get("shape", "uniform")
    h = float(sec.get("h", default_h))
    if shape == "custom_samples":
        if "samples" not in sec:
            raise ConfigError("config key model/kernel: custom_samples needs 'samples'")
        return KernelSpec.from_samples(sec["samples"], h)
    L = float(sec.get("half_width", 1.0))
    return KernelSpec.uniform(L, h) if shape == "uniform" else KernelSpec.parabolic_bump(L, h)


def build_model(cfg: dict) -> ModelSpec:
    m = cfg["model"]
    kind = m["kind"]
    if kind == "lv_system":
        if "lv" not in m:
            raise ConfigError("config key model: lv_system needs an [model.lv] table")
        return LVModel(LVParams(**{k: float(v) for k, v in m["lv"].items()}))
    fam = build_family(m.get("nonlinearity", {}))
    if kind == "scalar_nonlocal":
        h = float(cfg.get("grid", {}).get("h", 0.1))
        return NonlocalModel(fam, build_kernel(m.get("kernel", {}), h))
    return ScalarModel(fam)


def build_setup(cfg: dict) -> CauchySetup:
    g, r = cfg.get("grid", {}), cfg.get("run", {})
    keys = {
        "length": g.get("length"), "h": g.get("h"), "x0": g.get("x0"), "profile": g.get("profile"),
        "v_background": g.get("v_background"), "t_end": r.get("t_end"), "dt": r.get("dt"),
        "dt_cap": r.get("dt_cap"), "scheme": r.get("scheme"), "comoving": r.get("comoving"),
        "sample_dt": r.get("sample_dt"), "level": r.get("level"), "t_lo_fraction": r.get("t_lo_fraction"),
    }
    return CauchySetup(**{k: v for k, v in keys.items() if v is not None})
