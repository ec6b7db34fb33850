"""Flat key = value run configuration.

One global registry of typed keys; commands overlay their own defaults and
user files overlay both.  Unknown keys are rejected at parse time so a
typo cannot silently fall back to a default.  Length-like keys carry the
unit in the name (suffix _nm, _rad, _over_gamma); everything else is
dimensionless or a plain count.
"""

from __future__ import annotations

import math

import numpy as np

from .coupling import ChainSpec, QuadratureConfig
from .errors import ConfigError
from .fiber import FiberSpec

_NM = 1e-9

# name -> (type, default).  bool is parsed from {true,false,0,1}.
SCHEMA: dict[str, tuple[type, object]] = {
    "n_atoms": (int, 15),
    "a_nm": (float, 800.0),
    "lambda_nm": (float, 1000.0),
    "h_nm": (float, 100.0),
    "r_f_nm": (float, 220.0),
    "n_fiber": (float, 0.0),  # 0 -> use the silica dispersion model
    "dipole": (str, "circ"),
    "omega_L_over_gamma": (float, 0.01),
    "delta_over_gamma": (float, 0.0),
    "phi_rad": (float, 1.37),
    "phi_match": (str, "none"),  # none | plus | minus
    "n_matching": (int, 1),
    "theta_z_rad": (float, 0.0),
    "theta_x_rad": (float, 0.0),
    "v_policy": (str, "tier1"),
    "pv_window": (float, 0.5),
    "quad_rel_tol": (float, 1e-8),
    "quad_m_cap": (int, 60),
    "quad_min_level": (int, 3),
    "quad_max_level": (int, 9),
    "threads": (int, 0),  # 0 -> FIBERQED_THREADS or 1
    # sweep axes
    "a_min_nm": (float, 50.0),
    "a_max_nm": (float, 1000.0),
    "n_grid_a": (int, 101),
    "phi_min_rad": (float, 0.0),
    "phi_max_rad": (float, math.pi),
    "n_grid_phi": (int, 101),
    "lambda_min_nm": (float, 600.0),
    "lambda_max_nm": (float, 1400.0),
    "n_grid_lambda": (int, 101),
    "rf_min_nm": (float, 40.0),
    "rf_max_nm": (float, 360.0),
    "n_grid_rf": (int, 101),
    "h_min_nm": (float, 0.0),
    "h_max_nm": (float, 500.0),
    "n_grid_h": (int, 101),
    "theta_min_rad": (float, 0.0),
    "theta_max_rad": (float, math.pi),
    "n_grid_theta": (int, 101),
    "delta_min_over_gamma": (float, -8.0),
    "delta_max_over_gamma": (float, 8.0),
    "n_grid_delta": (int, 801),
    "growth_n_max": (int, 15),
}

_DIPOLE_PRESETS = {
    "circ": (1j / math.sqrt(2.0), 0.0, -1.0 / math.sqrt(2.0)),
    "x": (1.0, 0.0, 0.0),
    "y": (0.0, 1.0, 0.0),
    "z": (0.0, 0.0, 1.0),
}


def _coerce(key: str, raw: str):
    typ, _ = SCHEMA[key]
    raw = raw.strip()
    try:
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key '{key}' expects {typ.__name__}, got '{raw}'") from exc
    return raw


def parse_config(text: str) -> dict:
    """Parse flat key = value text (# comments) into a typed dict."""
    out: dict = {}
    for ln, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {ln}: expected 'key = value', got '{body}'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError(f"line {ln}: unknown key '{key}'")
        out[key] = _coerce(key, raw)
    return out


def serialize_config(cfg: dict) -> str:
    """Canonical text form; parse(serialize(parse(s))) == parse(s)."""
    lines = []
    for key in sorted(cfg):
        if key not in SCHEMA:
            raise ConfigError(f"unknown key '{key}'")
        val = cfg[key]
        if isinstance(val, float):
            lines.append(f"{key} = {format(val, '.17g')}")
        else:
            lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"


def merge(*layers: dict) -> dict:
    """Defaults, then each layer in order; validates keys and types."""
    cfg = {key: default for key, (_, default) in SCHEMA.items()}
    for layer in layers:
        for key, val in layer.items():
            if key not in SCHEMA:
                raise ConfigError(f"unknown key '{key}'")
            typ, _ = SCHEMA[key]
            if typ is float and isinstance(val, int):
                val = float(val)
            if not isinstance(val, typ):
                raise ConfigError(f"key '{key}' expects {typ.__name__}")
            cfg[key] = val
    return cfg


def parse_dipole(text: str) -> tuple:
    """Preset name or three comma-separated complex components."""
    name = text.strip().lower()
    if name in _DIPOLE_PRESETS:
        return _DIPOLE_PRESETS[name]
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"dipole '{text}' is neither a preset nor a complex triple")
    try:
        vec = tuple(complex(p.strip().replace("i", "j")) for p in parts)
    except ValueError as exc:
        raise ConfigError(f"cannot parse dipole component in '{text}'") from exc
    if not np.linalg.norm(vec) > 0:
        raise ConfigError("dipole must be nonzero")
    return vec


def fiber_from(cfg: dict) -> FiberSpec:
    n = cfg["n_fiber"] if cfg["n_fiber"] > 0 else None
    return FiberSpec.make(cfg["r_f_nm"] * _NM, cfg["lambda_nm"] * _NM, n)


def chain_from(cfg: dict, n_atoms: int | None = None) -> ChainSpec:
    return ChainSpec(
        n_atoms=n_atoms if n_atoms is not None else cfg["n_atoms"],
        a=cfg["a_nm"] * _NM,
        h=cfg["h_nm"] * _NM,
        lambda_a=cfg["lambda_nm"] * _NM,
        dipole=parse_dipole(cfg["dipole"]),
    )


def quad_from(cfg: dict) -> QuadratureConfig:
    return QuadratureConfig(
        rel_tol=cfg["quad_rel_tol"],
        m_cap=cfg["quad_m_cap"],
        min_level=cfg["quad_min_level"],
        max_level=cfg["quad_max_level"],
    )
