"""Weak-drive stationary state of the chain and per-detuning emission rates.

In the single-excitation regime the excited-state amplitudes c solve

    (Delta + i Gamma_11 / 2) c_i - sum_{j != i} (V_ij - i Gamma_ij / 2) c_j
        = Omega_L v_i

and every emission rate is a quadratic form c^dag K c with K the total or
per-channel rate matrix.  All rates inherit the |Omega_L|^2 scaling of the
drive; detuning and Rabi frequency are in units of gamma.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .coupling import ChainSpec, CouplingMatrices
from .errors import SolverError

_WEAK_DRIVE_WARN = 0.1
_RESIDUAL_TOL = 1e-10


@dataclass(frozen=True)
class DriveField:
    """Plane-wave laser drive: Rabi frequency, detuning, angle to the chain.

    The wavevector magnitude is the atomic 2 pi / lambda_a; only its
    projection on the chain axis matters, the common transverse phase is
    dropped.  Polarization is fixed (x) and enters only through Omega_L.
    """

    omega_L: float
    delta: float
    phi: float

    def __post_init__(self):
        if self.omega_L > _WEAK_DRIVE_WARN:
            warnings.warn(
                f"Omega_L = {self.omega_L:g} gamma is outside the weak-drive "
                "regime; the single-excitation treatment degrades",
                stacklevel=3,
            )


@dataclass
class SteadyStateAmplitudes:
    c_e: np.ndarray
    residual: float

    @property
    def max_population(self) -> float:
        return float(np.max(np.abs(self.c_e) ** 2))


@dataclass
class EmissionRates:
    """Photon emission rates (units of gamma) at one detuning."""

    n_p: float
    n_p_g: float
    n_p_gR: float
    n_p_gL: float
    n_p_u: float


def drive_vector(chain: ChainSpec, drive: DriveField) -> np.ndarray:
    """Drive phase pattern along the chain, v_j = exp(-i k_L cos(phi) z_j).

    The sign makes the mode-matched angle from the + branch of the matching
    condition drive the rightward superradiant mode (phases of v then track
    exp(i beta_f z_j) up to a reciprocal-lattice shift), which is the
    labeling the collective-chirality results rely on.
    """
    k_l = chain.k * np.cos(drive.phi)
    return np.exp(-1j * k_l * chain.z)


def solve_steady(
    chain: ChainSpec, couplings: CouplingMatrices, drive: DriveField
) -> SteadyStateAmplitudes:
    """Stationary amplitudes of the driven chain at drive.delta.

    Raises SolverError with a condition estimate if the shifted system is
    numerically singular (possible at exceptional points).
    """
    n = chain.n_atoms
    h_nh = couplings.v - 0.5j * couplings.gamma
    a = drive.delta * np.eye(n) - h_nh
    v = drive_vector(chain, drive)
    b = drive.omega_L * v
    try:
        c = np.linalg.solve(a, b)
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            f"steady-state system singular at Delta = {drive.delta:g} "
            f"(cond ~ {np.linalg.cond(a):.3e})"
        ) from exc
    res = np.linalg.norm(a @ c - b) / max(np.linalg.norm(b), 1e-300)
    if not np.isfinite(res) or res > 1e-6:
        raise SolverError(
            f"steady-state solve untrustworthy: residual {res:.3e}, "
            f"cond ~ {np.linalg.cond(a):.3e}"
        )
    return SteadyStateAmplitudes(c_e=c, residual=float(res))


def _rate(k: np.ndarray, c: np.ndarray) -> float:
    return float(np.real(c.conj() @ k @ c))


def emission_rates(couplings: CouplingMatrices, state: SteadyStateAmplitudes) -> EmissionRates:
    """Total and per-channel photon rates of the stationary state."""
    c = state.c_e
    n_gr = _rate(couplings.gamma_gR, c)
    n_gl = _rate(couplings.gamma_gL, c)
    n_u = _rate(couplings.gamma_u, c)
    return EmissionRates(
        n_p=n_gr + n_gl + n_u,
        n_p_g=n_gr + n_gl,
        n_p_gR=n_gr,
        n_p_gL=n_gl,
        n_p_u=n_u,
    )
