"""Collective decay modes: diagonalization of Gamma and mode bookkeeping.

The dissipator in diagonal form uses collective jump operators built from
rows of M: row c of M is the (unconjugated) eigenvector of Gamma with rate
gamma_c, so Gamma_ij = sum_c gamma_c M_ci conj(M_cj).  Rates are sorted
descending and each row carries a deterministic global phase: the first
component of largest magnitude is made real and positive (ties broken by
lowest index, which matters for guided modes whose magnitudes are flat).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

_HERM_TOL = 1e-10
_ZERO_RATE = 1e-8
_DEGEN_GAP = 1e-6


@dataclass
class ModeDecomposition:
    """Eigenmodes of a dissipative coupling matrix, rows of m are modes."""

    gamma_c: np.ndarray
    m: np.ndarray
    overlap_R: np.ndarray | None = None
    overlap_L: np.ndarray | None = None

    @property
    def n_atoms(self) -> int:
        return self.m.shape[1]

    @property
    def labels(self) -> list[str] | None:
        """Direction tag per mode, from the stored propagation overlaps."""
        if self.overlap_R is None or self.overlap_L is None:
            return None
        return ["R" if r >= l else "L" for r, l in zip(self.overlap_R, self.overlap_L)]


@dataclass
class ModeProfile:
    """Magnitude and unwrapped phase of one collective mode along the chain."""

    magnitudes: np.ndarray
    phases: np.ndarray
    degenerate: bool = False


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Deterministic global phase per row: leading max-|.| component > 0."""
    out = vecs.copy()
    for c in range(out.shape[0]):
        mags = np.abs(out[c])
        idx = int(np.nonzero(mags >= mags.max() * (1.0 - 1e-9))[0][0])
        piv = out[c, idx]
        if np.abs(piv) > 0:
            out[c] *= np.abs(piv) / piv
    return out


def diagonalize(gamma: np.ndarray) -> ModeDecomposition:
    """Spectral decomposition of a Hermitian PSD rate matrix.

    Gamma_ij = sum_c gamma_c M_ci conj(M_cj) with rows of M orthonormal;
    eigenvalues descending.
    """
    gamma = np.asarray(gamma)
    if gamma.ndim != 2 or gamma.shape[0] != gamma.shape[1]:
        raise DomainError("rate matrix must be square")
    scale = max(np.abs(gamma).max(), 1.0)
    if np.abs(gamma - gamma.conj().T).max() > _HERM_TOL * scale:
        raise DomainError("rate matrix is not Hermitian within tolerance")
    vals, vecs = np.linalg.eigh(gamma)
    order = np.argsort(vals)[::-1]
    vals = vals[order].real
    m = _fix_phases(vecs[:, order].T)
    return ModeDecomposition(gamma_c=vals, m=m)


def reconstruct(modes: ModeDecomposition) -> np.ndarray:
    """Rebuild Gamma from the decomposition (round-trip identity check)."""
    return np.einsum("ci,c,cj->ij", modes.m, modes.gamma_c, modes.m.conj())


def guided_only_modes(gamma_gR: np.ndarray, gamma_gL: np.ndarray) -> ModeDecomposition:
    """Collective modes of the guided-only dissipator Gamma_gR + Gamma_gL.

    A lossless single transverse channel per direction makes each matrix
    rank one, so at most two rates are nonzero.  Each mode row is labeled
    by its squared overlap with the dominant mode of the pure rightward /
    leftward matrix (the ideal phase profiles exp(+-i beta_f z_j)).
    """
    if gamma_gR.shape != gamma_gL.shape:
        raise DomainError("directional guided matrices must share a shape")
    modes = diagonalize(gamma_gR + gamma_gL)
    ref_r = diagonalize(gamma_gR).m[0]
    ref_l = diagonalize(gamma_gL).m[0]
    modes.overlap_R = np.abs(modes.m @ ref_r.conj()) ** 2
    modes.overlap_L = np.abs(modes.m @ ref_l.conj()) ** 2
    return modes


def mode_profile(modes: ModeDecomposition, c: int) -> ModeProfile:
    """Magnitude/unwrapped-phase profile of mode c."""
    row = modes.m[c]
    phases = np.unwrap(np.angle(row))
    gaps = np.abs(np.diff(modes.gamma_c))
    near = False
    if len(modes.gamma_c) > 1:
        lo = max(c - 1, 0)
        near = bool(np.any(gaps[lo : c + 1] < _DEGEN_GAP))
    return ModeProfile(magnitudes=np.abs(row), phases=phases, degenerate=near)


def superradiant_profile(modes: ModeDecomposition) -> ModeProfile:
    """Profile of the most superradiant (largest-rate) mode.

    The degenerate flag warns that the top rate gap is below 1e-6, where
    the eigenvector content is not trustworthy.
    """
    return mode_profile(modes, 0)


def hybridization_overlap(
    modes_full: ModeDecomposition,
    modes_guided: ModeDecomposition,
    modes_freespace: ModeDecomposition,
) -> dict:
    """Squared overlaps of every full mode with guided and free-space modes.

    Rows index full-Gamma modes; row sums are bounded by 1 since each
    reference set is orthonormal.
    """
    n = modes_full.n_atoms
    if modes_guided.n_atoms != n or modes_freespace.n_atoms != n:
        raise DomainError("mode decompositions have mismatched atom numbers")
    ov_g = np.abs(modes_full.m @ modes_guided.m.conj().T) ** 2
    ov_f = np.abs(modes_full.m @ modes_freespace.m.conj().T) ** 2
    return {"guided": ov_g, "free_space": ov_f}


def nonzero_rates(modes: ModeDecomposition, tol: float = _ZERO_RATE) -> np.ndarray:
    """Indices of modes with rate above tol (units of gamma)."""
    return np.nonzero(modes.gamma_c > tol)[0]
