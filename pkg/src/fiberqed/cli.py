"""Command-line front end: scenario datasets and ad-hoc computations.

Scenario commands (fig2..fig5) write deterministic data tables for the
bundled parameter studies; compute runs a single pipeline stage and
prints one JSON record.  Exit codes: 0 success, 1 computational failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from functools import partial
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    chain_from,
    fiber_from,
    merge,
    parse_config,
    parse_dipole,
    quad_from,
)
from .coupling import ChainSpec, assemble, free_space_oracle
from .errors import ConfigError, DomainError, FiberQEDError
from .fiber import FiberSpec, solve_he11
from .modes import diagonalize, guided_only_modes, superradiant_profile
from .observables import (
    _atom_tensors,
    collective_observables,
    collective_residue,
    emission_spectrum,
    mode_matching_angle,
    single_atom,
    sweep,
)
from .tables import write_table

_NM = 1e-9
_PROFILE_SPACINGS_NM = (250.0, 800.0)

# Scenario parameter sets; every entry can be overridden from the config file.
CMD_DEFAULTS: dict[str, dict] = {
    "fig2": {
        "n_atoms": 15,
        "lambda_nm": 1000.0,
        "h_nm": 100.0,
        "r_f_nm": 220.0,
        "a_min_nm": 50.0,
        "a_max_nm": 1000.0,
    },
    "fig3": {
        "n_atoms": 15,
        "omega_L_over_gamma": 0.01,
        "lambda_nm": 1000.0,
        "h_nm": 100.0,
        "r_f_nm": 220.0,
        "a_min_nm": 500.0,
        "a_max_nm": 1000.0,
    },
    "fig4": {"lambda_nm": 1000.0, "h_nm": 100.0, "dipole": "circ"},
    "fig5": {"lambda_nm": 1000.0, "r_f_nm": 220.0, "h_nm": 100.0},
    "compute": {},
}

SELECTORS = ("beta_f", "gamma_matrix", "modes", "spectrum", "collective", "single_atom")


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------


def _resolve_workers(cfg: dict) -> int:
    if cfg["threads"] > 0:
        return cfg["threads"]
    env = os.environ.get("FIBERQED_THREADS", "").strip()
    if env:
        try:
            n = int(env)
        except ValueError as exc:
            raise ConfigError(f"FIBERQED_THREADS must be an integer, got '{env}'") from exc
        if n > 0:
            return n
    return 1


def _pmap(fn, items, workers: int) -> list:
    """Ordered map over items, optionally through a bounded process pool."""
    if workers > 1 and len(items) > 1:
        from concurrent.futures import ProcessPoolExecutor

        chunk = max(1, len(items) // (8 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items, chunksize=chunk))
    return [fn(x) for x in items]


def _meta(cfg: dict, extra: dict | None = None) -> dict:
    # threads is execution plumbing: identical physics config must give
    # byte-identical tables regardless of worker count.
    out = {f"cfg.{k}": cfg[k] for k in sorted(cfg) if k != "threads"}
    if extra:
        out.update(extra)
    return out


def _guided_meta(gm) -> dict:
    return {
        "beta_f_per_m": gm.beta_f,
        "beta_f_prime_s_per_m": gm.beta_f_prime,
        "lambda_f_nm": gm.lambda_f / _NM,
        "n_eff": gm.n_eff,
    }


def _phi_from(cfg: dict, gm) -> float:
    mode = cfg["phi_match"]
    if mode == "none":
        return cfg["phi_rad"]
    if mode not in ("plus", "minus"):
        raise ConfigError(f"phi_match must be none/plus/minus, got '{mode}'")
    phi = mode_matching_angle(
        cfg["a_nm"] * _NM,
        cfg["lambda_nm"] * _NM,
        gm.lambda_f,
        cfg["n_matching"],
        +1 if mode == "plus" else -1,
    )
    if phi is None:
        raise DomainError(
            f"no matched drive angle exists for a = {cfg['a_nm']} nm, "
            f"n = {cfg['n_matching']}, branch {mode}"
        )
    return phi


def _cleanup_on_error(written: list[Path]):
    for p in written:
        try:
            p.unlink()
        except OSError:
            pass


# ---------------------------------------------------------------------------
# Grid-point workers (module level so process pools can pickle them)
# ---------------------------------------------------------------------------


def _fig2_row(a_nm, fiber, n_atoms, h, lam, dipole, quad, v_policy):
    chain = ChainSpec(n_atoms=n_atoms, a=a_nm * _NM, h=h, lambda_a=lam, dipole=dipole)
    try:
        cm = assemble(chain, fiber, quad, v_policy)
        _, g_free = free_space_oracle(chain)
        rates_free = np.linalg.eigvalsh(g_free)[::-1]
        rates_full = diagonalize(cm.gamma).gamma_c
        rates_guided = diagonalize(cm.gamma_gR + cm.gamma_gL).gamma_c
        return (list(rates_free), list(rates_full), list(rates_guided), None)
    except FiberQEDError as exc:
        return (None, None, None, f"{type(exc).__name__}: {exc}")


def _fig3_row(a_nm, fiber, n_atoms, h, lam, dipole, quad, v_policy, phis, omega_L):
    try:
        chain = ChainSpec(n_atoms=n_atoms, a=a_nm * _NM, h=h, lambda_a=lam, dipole=dipole)
        cm = assemble(chain, fiber, quad, v_policy)
    except FiberQEDError as exc:
        msg = f"{type(exc).__name__}: {exc}"
        return [{"error": msg} for _ in phis]
    try:
        obs = collective_residue(chain, cm, omega_L, np.asarray(phis))
        return [
            {
                "gamma_C_over_omega2": o.gamma_C / omega_L**2,
                "beta_C": o.beta_C,
                "C_C": o.C_C,
            }
            for o in obs
        ]
    except FiberQEDError:
        pass
    rows = []
    for phi in phis:
        try:
            o = collective_observables(chain, cm, omega_L, phi)
            rows.append(
                {
                    "gamma_C_over_omega2": o.gamma_C / omega_L**2,
                    "beta_C": o.beta_C,
                    "C_C": o.C_C,
                }
            )
        except FiberQEDError as exc:
            rows.append({"error": f"{type(exc).__name__}: {exc}"})
    return rows


def _fig4_point(point, h, dipole, quad):
    lam = point["lambda_nm"] * _NM
    fiber = FiberSpec.make(point["r_f_nm"] * _NM, lam)
    chain = ChainSpec(n_atoms=1, a=lam, h=h, lambda_a=lam, dipole=dipole)
    obs = single_atom(chain, fiber, (0.0, 0.0), quad)
    return {
        "gamma_total": obs.gamma_total,
        "beta": obs.beta,
        "C": obs.C,
        "single_mode": bool(point["r_f_nm"] * _NM < fiber.single_mode_radius),
    }


def _fig4h_point(point, lam, dipole, quad):
    fiber = FiberSpec.make(point["r_f_nm"] * _NM, lam)
    chain = ChainSpec(n_atoms=1, a=lam, h=point["h_nm"] * _NM, lambda_a=lam, dipole=dipole)
    obs = single_atom(chain, fiber, (0.0, 0.0), quad)
    return {"gamma_total": obs.gamma_total, "beta": obs.beta, "C": obs.C}


def _fig5_point(point, chain, fiber, quad):
    obs = single_atom(chain, fiber, (point["theta_z_rad"], point["theta_x_rad"]), quad)
    return {"gamma_total": obs.gamma_total, "beta": obs.beta, "C": obs.C}


# ---------------------------------------------------------------------------
# Scenario drivers
# ---------------------------------------------------------------------------


def cmd_fig2(cfg, outdir: Path, fmt: str, workers: int, resume: bool = False) -> list[Path]:
    """Collective decay rates vs spacing plus superradiant mode profiles."""
    fiber = fiber_from(cfg)
    gm = solve_he11(fiber)
    quad = quad_from(cfg)
    dipole = parse_dipole(cfg["dipole"])
    n = cfg["n_atoms"]
    ext = fmt if fmt == "json" else "csv"
    a_grid = np.linspace(cfg["a_min_nm"], cfg["a_max_nm"], cfg["n_grid_a"])
    worker = partial(
        _fig2_row,
        fiber=fiber,
        n_atoms=n,
        h=cfg["h_nm"] * _NM,
        lam=cfg["lambda_nm"] * _NM,
        dipole=dipole,
        quad=quad,
        v_policy=cfg["v_policy"],
    )
    results = _pmap(worker, list(a_grid), workers)

    lam_nm = cfg["lambda_nm"]
    rate_cols = ["a_over_lambda"] + [f"gamma_c_{i + 1:02d}" for i in range(n)] + ["error"]
    tables = {"free": [], "full": [], "guided": []}
    for a_nm, (free, full, guided, err) in zip(a_grid, results):
        for key, rates in (("free", free), ("full", full), ("guided", guided)):
            vals = list(rates) if rates is not None else [float("nan")] * n
            tables[key].append([a_nm / lam_nm] + vals + [err])

    written: list[Path] = []
    meta = _meta(cfg, _guided_meta(gm))
    try:
        for key in ("free", "full", "guided"):
            p = outdir / f"fig2_rates_{key}.{ext}"
            written.append(write_table(p, f"fig2_rates_{key}", rate_cols, tables[key], meta, fmt))
        for a_nm in _PROFILE_SPACINGS_NM:
            chain = ChainSpec(
                n_atoms=n, a=a_nm * _NM, h=cfg["h_nm"] * _NM,
                lambda_a=cfg["lambda_nm"] * _NM, dipole=dipole,
            )
            cm = assemble(chain, fiber, quad, cfg["v_policy"])
            modes = diagonalize(cm.gamma)
            prof = superradiant_profile(modes)
            rows = [
                [i + 1, float(prof.magnitudes[i]), float(prof.phases[i])]
                for i in range(n)
            ]
            pm = _meta(cfg, {**_guided_meta(gm), "a_nm": a_nm,
                             "gamma_c_super": float(modes.gamma_c[0]),
                             "degenerate": prof.degenerate})
            p = outdir / f"fig2_profile_a{int(round(a_nm))}nm.{ext}"
            written.append(
                write_table(p, f"fig2_profile_a{int(round(a_nm))}nm",
                            ["atom", "magnitude", "phase_rad"], rows, pm, fmt)
            )
    except BaseException:
        _cleanup_on_error(written)
        raise
    return written


def cmd_fig3(cfg, outdir: Path, fmt: str, workers: int, resume: bool = False) -> list[Path]:
    """Collective emission maps over (spacing, drive angle) plus extras."""
    fiber = fiber_from(cfg)
    gm = solve_he11(fiber)
    quad = quad_from(cfg)
    dipole = parse_dipole(cfg["dipole"])
    omega_L = cfg["omega_L_over_gamma"]
    lam = cfg["lambda_nm"] * _NM
    ext = fmt if fmt == "json" else "csv"
    a_grid = np.linspace(cfg["a_min_nm"], cfg["a_max_nm"], cfg["n_grid_a"])
    phis = np.linspace(cfg["phi_min_rad"], cfg["phi_max_rad"], cfg["n_grid_phi"])

    worker = partial(
        _fig3_row,
        fiber=fiber,
        n_atoms=cfg["n_atoms"],
        h=cfg["h_nm"] * _NM,
        lam=lam,
        dipole=dipole,
        quad=quad,
        v_policy=cfg["v_policy"],
        phis=list(phis),
        omega_L=omega_L,
    )
    blocks = _pmap(worker, list(a_grid), workers)
    map_cols = ["a_over_lambda", "phi_rad", "gamma_C_over_omega2", "beta_C", "C_C", "error"]
    map_rows = []
    nan = float("nan")
    for a_nm, block in zip(a_grid, blocks):
        for phi, cell in zip(phis, block):
            map_rows.append(
                [
                    a_nm / cfg["lambda_nm"],
                    float(phi),
                    cell.get("gamma_C_over_omega2", nan),
                    cell.get("beta_C", nan),
                    cell.get("C_C", nan),
                    cell.get("error"),
                ]
            )

    written: list[Path] = []
    meta = _meta(cfg, _guided_meta(gm))
    try:
        written.append(
            write_table(outdir / f"fig3_maps.{ext}", "fig3_maps", map_cols, map_rows, meta, fmt)
        )

        # Spectra at the two matched drive angles of the marked working point.
        chain = chain_from(cfg)
        cm = assemble(chain, fiber, quad, cfg["v_policy"])
        deltas = np.linspace(
            cfg["delta_min_over_gamma"], cfg["delta_max_over_gamma"], cfg["n_grid_delta"]
        )
        sp_cols = ["delta_over_gamma", "n_p", "n_p_g", "n_p_gR", "n_p_gL", "n_p_u"]
        for branch, tag in ((+1, "plus"), (-1, "minus")):
            phi = mode_matching_angle(chain.a, lam, gm.lambda_f, cfg["n_matching"], branch)
            if phi is None:
                raise DomainError(
                    f"no matched angle at a = {cfg['a_nm']} nm for branch {tag}"
                )
            sp = emission_spectrum(chain, cm, omega_L, phi, deltas)
            rows = [
                [float(sp.delta[i]), float(sp.n_p[i]), float(sp.n_p_g[i]),
                 float(sp.n_p_gR[i]), float(sp.n_p_gL[i]), float(sp.n_p_u[i])]
                for i in range(len(deltas))
            ]
            sm = _meta(cfg, {**_guided_meta(gm), "phi_rad_used": phi, "branch": tag})
            written.append(
                write_table(outdir / f"fig3_spectrum_{tag}.{ext}",
                            f"fig3_spectrum_{tag}", sp_cols, rows, sm, fmt)
            )

        # Growth of the angle-optimized collective beta factor with N.
        sa = single_atom(
            ChainSpec(n_atoms=1, a=lam, h=cfg["h_nm"] * _NM, lambda_a=lam, dipole=dipole),
            fiber, (0.0, 0.0), quad,
        )
        growth_rows = []
        for n_at in range(1, cfg["growth_n_max"] + 1):
            ch = ChainSpec(
                n_atoms=n_at, a=cfg["a_nm"] * _NM, h=cfg["h_nm"] * _NM,
                lambda_a=lam, dipole=dipole,
            )
            cmx = assemble(ch, fiber, quad, cfg["v_policy"])
            obs = collective_residue(ch, cmx, omega_L, phis)
            betas = np.array([o.beta_C for o in obs])
            ref = n_at * sa.gamma_g / (n_at * sa.gamma_g + sa.gamma_u)
            growth_rows.append(
                [n_at, float(betas.max()), float(phis[betas.argmax()]), float(ref)]
            )
        written.append(
            write_table(
                outdir / f"fig3_growth.{ext}", "fig3_growth",
                ["n_atoms", "beta_C_max", "phi_argmax_rad", "beta_reference"],
                growth_rows, meta, fmt,
            )
        )
    except BaseException:
        _cleanup_on_error(written)
        raise
    return written


def cmd_fig4(cfg, outdir: Path, fmt: str, workers: int, resume: bool = False) -> list[Path]:
    """Single-atom decay observables over (wavelength, fiber radius) and vs h."""
    quad = quad_from(cfg)
    dipole = parse_dipole(cfg["dipole"])
    ext = fmt if fmt == "json" else "csv"
    axes = {
        "lambda_nm": np.linspace(cfg["lambda_min_nm"], cfg["lambda_max_nm"], cfg["n_grid_lambda"]),
        "r_f_nm": np.linspace(cfg["rf_min_nm"], cfg["rf_max_nm"], cfg["n_grid_rf"]),
    }
    ckpt = outdir / "fig4_maps.ckpt" if resume else None
    rows = sweep(
        axes,
        partial(_fig4_point, h=cfg["h_nm"] * _NM, dipole=dipole, quad=quad),
        checkpoint=ckpt,
        workers=workers,
    )
    nan = float("nan")
    map_cols = ["lambda_nm", "r_f_nm", "gamma_total", "beta", "C", "single_mode", "error"]
    map_rows = [
        [r["lambda_nm"], r["r_f_nm"], r.get("gamma_total", nan), r.get("beta", nan),
         r.get("C", nan), r.get("single_mode"), r.get("error")]
        for r in rows
    ]

    boundary_rows = []
    for lam_nm in axes["lambda_nm"]:
        f = FiberSpec.make(1e-9, lam_nm * _NM)
        boundary_rows.append([float(lam_nm), f.single_mode_radius / _NM])

    # Per-wavelength radius maximizing beta, over points that computed cleanly.
    ridge_rows = []
    h_nm = cfg["h_nm"]
    for lam_nm in axes["lambda_nm"]:
        best = (-1.0, nan)
        for r in rows:
            if r["lambda_nm"] == lam_nm and "error" not in r and r["beta"] == r["beta"]:
                if r["beta"] > best[0]:
                    best = (r["beta"], r["r_f_nm"])
        if best[0] >= 0:
            ridge_rows.append(
                [float(lam_nm), best[1], (best[1] + h_nm) / lam_nm, best[0]]
            )

    h_axes = {
        "r_f_nm": np.array([180.0, 220.0, 260.0]),
        "h_nm": np.linspace(cfg["h_min_nm"], cfg["h_max_nm"], cfg["n_grid_h"]),
    }
    h_rows_raw = sweep(
        h_axes,
        partial(_fig4h_point, lam=cfg["lambda_nm"] * _NM, dipole=dipole, quad=quad),
        workers=workers,
    )
    h_cols = ["r_f_nm", "h_nm", "gamma_total", "beta", "C", "error"]
    h_rows = [
        [r["r_f_nm"], r["h_nm"], r.get("gamma_total", nan), r.get("beta", nan),
         r.get("C", nan), r.get("error")]
        for r in h_rows_raw
    ]

    written: list[Path] = []
    meta = _meta(cfg)
    try:
        written.append(write_table(outdir / f"fig4_maps.{ext}", "fig4_maps", map_cols, map_rows, meta, fmt))
        written.append(
            write_table(outdir / f"fig4_boundary.{ext}", "fig4_boundary",
                        ["lambda_nm", "r_single_mode_nm"], boundary_rows, meta, fmt)
        )
        written.append(
            write_table(outdir / f"fig4_ridge.{ext}", "fig4_ridge",
                        ["lambda_nm", "r_f_argmax_nm", "ratio_rf_plus_h_over_lambda", "beta_max"],
                        ridge_rows, meta, fmt)
        )
        written.append(
            write_table(outdir / f"fig4_beta_vs_h.{ext}", "fig4_beta_vs_h",
                        h_cols, h_rows, meta, fmt)
        )
    except BaseException:
        _cleanup_on_error(written)
        raise
    if ckpt is not None and ckpt.exists():
        ckpt.unlink()
    return written


def cmd_fig5(cfg, outdir: Path, fmt: str, workers: int, resume: bool = False) -> list[Path]:
    """Single-atom observables over the two dipole rotation angles."""
    fiber = fiber_from(cfg)
    quad = quad_from(cfg)
    lam = cfg["lambda_nm"] * _NM
    chain = ChainSpec(
        n_atoms=1, a=lam, h=cfg["h_nm"] * _NM, lambda_a=lam,
        dipole=parse_dipole(cfg["dipole"]),
    )
    ext = fmt if fmt == "json" else "csv"
    thetas = np.linspace(cfg["theta_min_rad"], cfg["theta_max_rad"], cfg["n_grid_theta"])
    ckpt = outdir / "fig5_maps.ckpt" if resume else None
    rows = sweep(
        {"theta_z_rad": thetas, "theta_x_rad": thetas},
        partial(_fig5_point, chain=chain, fiber=fiber, quad=quad),
        checkpoint=ckpt,
        workers=workers,
    )
    nan = float("nan")
    cols = ["theta_z_rad", "theta_x_rad", "gamma_total", "beta", "C", "error"]
    out_rows = [
        [r["theta_z_rad"], r["theta_x_rad"], r.get("gamma_total", nan),
         r.get("beta", nan), r.get("C", nan), r.get("error")]
        for r in rows
    ]
    written: list[Path] = []
    try:
        written.append(
            write_table(outdir / f"fig5_maps.{ext}", "fig5_maps", cols, out_rows,
                        _meta(cfg), fmt)
        )
    except BaseException:
        _cleanup_on_error(written)
        raise
    if ckpt is not None and ckpt.exists():
        ckpt.unlink()
    return written


# ---------------------------------------------------------------------------
# compute
# ---------------------------------------------------------------------------


def _c2(x) -> list[float]:
    return [float(np.real(x)), float(np.imag(x))]


def _cmat(m) -> list:
    return [[_c2(v) for v in row] for row in np.asarray(m)]


def cmd_compute(cfg, selector: str) -> dict:
    """One pipeline stage -> one JSON-serializable record."""
    record: dict = {"selector": selector, "inputs": {k: cfg[k] for k in sorted(cfg)}}
    fiber = fiber_from(cfg)
    quad = quad_from(cfg)

    if selector == "beta_f":
        gm = solve_he11(fiber)
        record["outputs"] = {
            "beta_f_per_m": gm.beta_f,
            "beta_f_prime_s_per_m": gm.beta_f_prime,
            "lambda_f_nm": gm.lambda_f / _NM,
            "n_eff": gm.n_eff,
            "single_mode": bool(fiber.radius < fiber.single_mode_radius),
        }
        record["certificates"] = {"dispersion_residual": gm.residual}
        return record

    if selector == "single_atom":
        chain = chain_from(cfg, n_atoms=1)
        obs = single_atom(chain, fiber, (cfg["theta_z_rad"], cfg["theta_x_rad"]), quad)
        _, _, _, cert = _atom_tensors(fiber, chain.h, chain.lambda_a, quad)
        record["outputs"] = {
            "gamma_total": obs.gamma_total,
            "beta": obs.beta,
            "C": obs.C,
            "gamma_gR": obs.gamma_gR,
            "gamma_gL": obs.gamma_gL,
            "gamma_u": obs.gamma_u,
        }
        record["certificates"] = dict(cert)
        return record

    gm = solve_he11(fiber)
    chain = chain_from(cfg)
    cm = assemble(chain, fiber, quad, cfg["v_policy"])
    certs = {
        "radiation_m_max": cm.meta["radiation"]["m_max"],
        "radiation_quad_level": cm.meta["radiation"]["quad_level"],
        "v_policy": cfg["v_policy"],
    }

    if selector == "gamma_matrix":
        record["outputs"] = {
            "v": _cmat(cm.v),
            "gamma": _cmat(cm.gamma),
            "gamma_gR": _cmat(cm.gamma_gR),
            "gamma_gL": _cmat(cm.gamma_gL),
            "gamma_u": _cmat(cm.gamma_u),
        }
        record["certificates"] = certs
        return record

    if selector == "modes":
        modes = diagonalize(cm.gamma)
        gonly = guided_only_modes(cm.gamma_gR, cm.gamma_gL)
        prof = superradiant_profile(modes)
        record["outputs"] = {
            "gamma_c": [float(x) for x in modes.gamma_c],
            "guided_gamma_c": [float(x) for x in gonly.gamma_c],
            "guided_labels": gonly.labels,
            "superradiant_magnitudes": [float(x) for x in prof.magnitudes],
            "superradiant_phases_rad": [float(x) for x in prof.phases],
            "degenerate": prof.degenerate,
        }
        record["certificates"] = certs
        return record

    phi = _phi_from(cfg, gm)
    omega_L = cfg["omega_L_over_gamma"]

    if selector == "spectrum":
        deltas = np.linspace(
            cfg["delta_min_over_gamma"], cfg["delta_max_over_gamma"], cfg["n_grid_delta"]
        )
        sp = emission_spectrum(chain, cm, omega_L, phi, deltas)
        record["outputs"] = {
            "phi_rad_used": phi,
            "delta_over_gamma": [float(x) for x in sp.delta],
            "n_p": [float(x) for x in sp.n_p],
            "n_p_g": [float(x) for x in sp.n_p_g],
            "n_p_gR": [float(x) for x in sp.n_p_gR],
            "n_p_gL": [float(x) for x in sp.n_p_gL],
            "n_p_u": [float(x) for x in sp.n_p_u],
        }
        record["certificates"] = certs
        return record

    if selector == "collective":
        obs = collective_observables(chain, cm, omega_L, phi)
        res = collective_residue(chain, cm, omega_L, phi)
        record["outputs"] = {
            "phi_rad_used": phi,
            "gamma_C": obs.gamma_C,
            "gamma_C_over_omega2": obs.gamma_C / omega_L**2,
            "beta_C": obs.beta_C,
            "C_C": obs.C_C,
        }
        record["certificates"] = {
            **certs,
            "tail_fraction": obs.tail_fraction,
            "resolved": obs.resolved,
            "residue_route_gamma_C": res.gamma_C,
            "residue_route_beta_C": res.beta_C,
            "residue_route_C_C": res.C_C,
        }
        return record

    raise ConfigError(f"unknown selector '{selector}'")


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_DRIVERS = {"fig2": cmd_fig2, "fig3": cmd_fig3, "fig4": cmd_fig4, "fig5": cmd_fig5}

_HELP = {
    "fig2": "collective decay rates vs spacing and superradiant mode profiles",
    "fig3": "collective emission maps over spacing and drive angle",
    "fig4": "single-atom observables over wavelength and fiber radius",
    "fig5": "single-atom observables over dipole rotation angles",
}


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="fiberqed",
        description="Directional collective emission of fiber-coupled atom chains.",
    )
    p.add_argument("--version", action="version", version=f"fiberqed {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("fig2", "fig3", "fig4", "fig5"):
        q = sub.add_parser(name, help=_HELP[name])
        q.add_argument("--config", type=Path, help="flat key = value config file")
        q.add_argument("--out", type=Path, default=Path("."), help="output directory")
        q.add_argument("--format", choices=("csv", "json"), default="csv")
        q.add_argument("--threads", type=int, help="worker processes for sweeps")
        q.add_argument("--resume", action="store_true",
                       help="resume an interrupted sweep from its checkpoint")
    q = sub.add_parser("compute", help="run one pipeline stage, print one JSON record")
    q.add_argument("selector", choices=SELECTORS)
    q.add_argument("--config", type=Path, help="flat key = value config file")
    q.add_argument("--out", type=Path, default=Path("."), help="unused; accepted for symmetry")
    q.add_argument("--format", choices=("csv", "json"), default="csv")
    q.add_argument("--threads", type=int, help="worker processes for sweeps")
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        user = parse_config(args.config.read_text()) if args.config else {}
        cfg = merge(CMD_DEFAULTS.get(args.command, {}), user)
        if getattr(args, "threads", None):
            cfg["threads"] = args.threads
        workers = _resolve_workers(cfg)
        if args.command == "compute":
            record = cmd_compute(cfg, args.selector)
            print(json.dumps(record, indent=2, sort_keys=True))
            return 0
        outdir: Path = args.out
        outdir.mkdir(parents=True, exist_ok=True)
        files = _DRIVERS[args.command](
            cfg, outdir, args.format, workers, resume=args.resume
        )
        for f in files:
            print(f)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FiberQEDError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
