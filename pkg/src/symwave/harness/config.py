"""Experiment configuration: defaults, schema checks and loading.

A config file is a JSON object::

    {
      "name": "evolution",          # one of EXPERIMENT_NAMES
      "seed": 0,                    # optional, default 0
      "output_dir": "runs/evolution",   # optional
      "parameters": {...}           # optional, merged over the defaults
    }

Parameters omitted from the file take the default values below. Nested
objects are merged key by key; lists replace the default wholesale.
"""
from __future__ import annotations

import copy
import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..pde_parity import BUILTIN_CORPUS, BUILTIN_PARAMS, COUNTEREXAMPLES

OUTPUT_ENV = "SYMWAVE_OUTPUT"

DEFAULTS = {
    "parity": {
        "params": dict(BUILTIN_PARAMS),
        "equations": (
            [{"name": k, "source": v, "expect": True} for k, v in BUILTIN_CORPUS.items()]
            + [{"name": k, "source": v, "expect": False} for k, v in COUNTEREXAMPLES.items()]
        ),
    },
    "forward-sl": {
        "M": 4096,
        "count": 10,
        "tol": 1e-10,
        "shift": 3.7,
        "sensitivity": {
            "potentials": 5,
            "indices": [0, 1, 2],
            "basis_size": 6,
            "amplitude": 3.0,
            "fd_step": 1e-4,
            "mu1": 1.0,
            "mu2": 1.0,
        },
    },
    "inverse-asymmetric": {
        "N": 2,
        "count": 6,
        "basis_size": 12,
        "M": 4096,
        "mu1": 1.0,
        "mu2": 1.0,
        "c": 0.0,
        "coefficients": [[1.0, 1.0], [1.0, 1.0]],
        "seed_method": "auto",
        "nx": 64,
    },
    "dispersion": {
        "k": 1,
        "report_k": 2,
        "c": 0.3,
        "mu1": 1.0,
        "M": 4096,
        "a": 1.0,
        "b": 0.0,
        "nx": 64,
    },
    "evolution": {
        "dt": 1e-4,
        "t_end": 1.0,
        "save_every": 100,
        "soliton": {"kappa": 1.0, "L": 40.0, "n": 512},
        "cosine": {"amplitude": 1.0, "L": 40.0, "n": 512},
        "ch_profile": {"c": 2.0, "kappa": 0.5, "a": 0.0, "b": 0.0, "L": 80.0, "n": 512},
        "peakon": {"c": 1.0, "L": 40.0, "n": 4096, "bank_size": 50,
                   "refine": [1, 2, 4], "speed_offset": 0.1},
    },
}

DESCRIPTIONS = {
    "dispersion": "constant-vorticity current: surface relation and a single sin(x)sinh(y) mode",
    "evolution": "KdV/CH evolution: symmetric data travel, non-traveling data lose symmetry, weak peakon residual",
    "forward-sl": "Robin Sturm-Liouville eigenvalues, shift identity and eigenvalue sensitivities",
    "inverse-asymmetric": "potential from a prescribed spectrum, current recovery and an asymmetric linear wave",
    "parity": "symbolic x-parity hypotheses for P(d/dx) u_t = F(u) on the built-in corpus",
}

EXPERIMENT_NAMES = tuple(sorted(DEFAULTS))


@dataclass
class ExperimentConfig:
    name: str
    parameters: dict = field(default_factory=dict)
    output_dir: str = ""
    seed: int = 0

    def __post_init__(self):
        if self.name not in DEFAULTS:
            raise ConfigError(f"unknown experiment {self.name!r}; choose from {', '.join(EXPERIMENT_NAMES)}")
        self.parameters = merge(DEFAULTS[self.name], self.parameters or {})
        if not self.output_dir:
            self.output_dir = str(Path("runs") / self.name)
        problems = check_parameters(self.name, self.parameters)
        if problems:
            raise ConfigError("; ".join(problems))

    @property
    def resolved_output_dir(self) -> Path:
        """``output_dir``, or ``$SYMWAVE_OUTPUT/<name>`` when the variable is set."""
        override = os.environ.get(OUTPUT_ENV)
        if override:
            return Path(override) / self.name
        return Path(self.output_dir)

    def to_dict(self) -> dict:
        return {"name": self.name, "seed": self.seed, "parameters": self.parameters}


def merge(base: dict, update: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in update.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


# --------------------------------------------------------------------------
# Schema checks
# --------------------------------------------------------------------------

def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _shape(path: str, default, value, out: list):
    """Unknown keys and type mismatches against the default layout."""
    if isinstance(default, dict):
        if not isinstance(value, dict):
            out.append(f"{path} must be an object")
            return
        for key in value:
            if key not in default and path != "params":
                out.append(f"{_join(path, key)} is not a recognized parameter")
        for key, sub in default.items():
            if key in value:
                _shape(_join(path, key), sub, value[key], out)
    elif isinstance(default, list):
        if not isinstance(value, list):
            out.append(f"{path} must be a list")
    elif isinstance(default, bool):
        if not isinstance(value, bool):
            out.append(f"{path} must be true or false")
    elif _is_int(default) and not isinstance(default, bool):
        if not _is_int(value):
            out.append(f"{path} must be an integer")
    elif isinstance(default, float):
        if not _is_num(value):
            out.append(f"{path} must be a finite number")
    elif isinstance(default, str):
        if not isinstance(value, str):
            out.append(f"{path} must be a string")


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _positive(p, path, out):
    if _is_num(p) and not p > 0:
        out.append(f"{path} must be positive")


def _pow2(n, path, out, low=64):
    if _is_int(n) and (n < low or n & (n - 1)):
        out.append(f"{path} must be a power of two >= {low} (got {n})")


def _at_least(v, low, path, out):
    if _is_num(v) and v < low:
        out.append(f"{path} must be >= {low}")


def _ranges(name: str, p: dict, out: list):
    if name == "parity":
        eqs = p.get("equations")
        if isinstance(eqs, list):
            for i, e in enumerate(eqs):
                if not isinstance(e, dict) or not isinstance(e.get("source"), str):
                    out.append(f"equations[{i}] must be an object with a string 'source'")
                elif "expect" in e and not isinstance(e["expect"], bool):
                    out.append(f"equations[{i}].expect must be true or false")
        for key, v in (p.get("params") or {}).items():
            if not _is_num(v):
                out.append(f"params.{key} must be a finite number")
    elif name == "forward-sl":
        _pow2(p["M"], "M", out)
        _at_least(p["count"], 1, "count", out)
        _positive(p["tol"], "tol", out)
        s = p["sensitivity"]
        if isinstance(s, dict):
            _at_least(s.get("potentials", 1), 1, "sensitivity.potentials", out)
            _at_least(s.get("basis_size", 1), 1, "sensitivity.basis_size", out)
            _positive(s.get("fd_step", 1.0), "sensitivity.fd_step", out)
            _positive(s.get("mu2", 1.0), "sensitivity.mu2", out)
            idx = s.get("indices", [])
            if not isinstance(idx, list) or not idx or not all(_is_int(i) and i >= 0 for i in idx):
                out.append("sensitivity.indices must be a non-empty list of non-negative integers")
    elif name == "inverse-asymmetric":
        _pow2(p["M"], "M", out)
        _at_least(p["N"], 1, "N", out)
        _positive(p["mu2"], "mu2", out)
        _pow2(p["nx"], "nx", out, low=8)
        if _is_int(p["N"]) and _is_int(p["count"]) and p["count"] < p["N"] + 1:
            out.append("count must be >= N + 1")
        if _is_int(p["basis_size"]) and _is_int(p["count"]) and p["basis_size"] < p["count"]:
            out.append("basis_size must be >= count")
        if p["seed_method"] not in ("auto", "constant", "transform"):
            out.append("seed_method must be one of auto, constant, transform")
        coef = p["coefficients"]
        ok = isinstance(coef, list) and all(
            isinstance(r, list) and len(r) == 2 and all(_is_num(v) for v in r) for r in coef)
        if not ok:
            out.append("coefficients must be a list of [a, b] number pairs")
        elif _is_int(p["N"]) and len(coef) != p["N"]:
            out.append(f"coefficients must have N = {p['N']} rows (one per wavenumber 1..N)")
    elif name == "dispersion":
        for key in ("k", "report_k"):
            _at_least(p[key], 1, key, out)
        _positive(p["mu1"], "mu1", out)
        _pow2(p["M"], "M", out)
        _pow2(p["nx"], "nx", out, low=8)
    elif name == "evolution":
        _positive(p["dt"], "dt", out)
        _positive(p["t_end"], "t_end", out)
        if _is_num(p["dt"]) and _is_num(p["t_end"]) and p["dt"] > 0 and p["t_end"] < p["dt"]:
            out.append("t_end must be at least dt")
        _at_least(p["save_every"], 1, "save_every", out)
        for run in ("soliton", "cosine", "ch_profile", "peakon"):
            sub = p.get(run)
            if not isinstance(sub, dict):
                continue
            _pow2(sub.get("n", 64), f"{run}.n", out)
            _positive(sub.get("L", 1.0), f"{run}.L", out)
        _positive(p["ch_profile"]["c"], "ch_profile.c", out)
        _positive(p["peakon"]["c"], "peakon.c", out)
        _at_least(p["peakon"]["bank_size"], 1, "peakon.bank_size", out)
        ref = p["peakon"]["refine"]
        if not isinstance(ref, list) or len(ref) < 2 or not all(_is_int(r) and r >= 1 for r in ref):
            out.append("peakon.refine must list at least two positive integers")


def check_parameters(name: str, parameters: dict) -> list:
    """Diagnostics for merged ``parameters`` of experiment ``name``."""
    out: list = []
    _shape("", DEFAULTS[name], parameters, out)
    if not out:
        _ranges(name, parameters, out)
    return out


def _diagnose(raw) -> list:
    if not isinstance(raw, dict):
        return ["config must be a JSON object"]
    out = []
    for key in raw:
        if key not in ("name", "seed", "output_dir", "parameters", "description"):
            out.append(f"{key} is not a recognized top-level field")
    name = raw.get("name")
    if name not in DEFAULTS:
        out.append(f"name must be one of {', '.join(EXPERIMENT_NAMES)} (got {name!r})")
        return out
    if "seed" in raw and not _is_int(raw["seed"]):
        out.append("seed must be an integer")
    if "output_dir" in raw and not isinstance(raw["output_dir"], str):
        out.append("output_dir must be a string")
    params = raw.get("parameters", {})
    if not isinstance(params, dict):
        out.append("parameters must be an object")
        return out
    _shape("", DEFAULTS[name], params, out)
    if not out:
        out.extend(check_parameters(name, merge(DEFAULTS[name], params)))
    return out


def _read(path) -> object:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def validate_config(path) -> list:
    """Schema and range diagnostics for the config at ``path``; ``[]`` if valid.

    Raises ``OSError`` when the file is missing. Nothing is executed.
    """
    if not Path(path).is_file():
        raise FileNotFoundError(path)
    try:
        raw = _read(path)
    except ConfigError as exc:
        return [str(exc)]
    return _diagnose(raw)


def load_config(path) -> ExperimentConfig:
    raw = _read(path)
    problems = _diagnose(raw)
    if problems:
        raise ConfigError(f"{path}: " + "; ".join(problems))
    return ExperimentConfig(raw["name"], raw.get("parameters", {}),
                            raw.get("output_dir", ""), raw.get("seed", 0))


def default_config(name: str, output_dir: str = "", seed: int = 0) -> ExperimentConfig:
    return ExperimentConfig(name, {}, output_dir, seed)


def config_to_json(config: ExperimentConfig) -> str:
    data = {"name": config.name, "seed": config.seed, "output_dir": config.output_dir,
            "description": DESCRIPTIONS[config.name], "parameters": config.parameters}
    return json.dumps(data, indent=2) + "\n"
