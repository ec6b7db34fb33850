"""Spectral decomposition of the collective rate matrix."""

import numpy as np
import pytest

import fiberqed as fq
from fiberqed.coupling import guided_gamma
from fiberqed.modes import mode_profile, nonzero_rates

LAMBDA = 1.0e-6


def test_reconstruction_identity(cm15):
    modes = fq.diagonalize(cm15.gamma)
    rec = fq.reconstruct(modes)
    assert np.abs(rec - cm15.gamma).max() < 1e-10


def test_rows_orthonormal(cm15):
    m = fq.diagonalize(cm15.gamma).m
    eye = m @ m.conj().T
    assert np.abs(eye - np.eye(m.shape[0])).max() < 1e-10


def test_rates_sum_to_trace(cm15):
    modes = fq.diagonalize(cm15.gamma)
    assert modes.gamma_c.sum() == pytest.approx(np.trace(cm15.gamma).real, rel=1e-12)
    assert modes.gamma_c.min() > -1e-10
    assert np.all(np.diff(modes.gamma_c) <= 1e-14)  # descending


def test_diagonalize_is_deterministic(cm15):
    a = fq.diagonalize(cm15.gamma)
    b = fq.diagonalize(cm15.gamma)
    assert np.array_equal(a.m, b.m)
    assert np.array_equal(a.gamma_c, b.gamma_c)


def test_diagonalize_rejects_bad_input():
    with pytest.raises(fq.DomainError):
        fq.diagonalize(np.zeros((2, 3)))
    with pytest.raises(fq.DomainError):
        fq.diagonalize(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_guided_only_two_modes(cm15):
    modes = fq.guided_only_modes(cm15.gamma_gR, cm15.gamma_gL)
    idx = nonzero_rates(modes)
    assert len(idx) == 2
    labels = modes.labels
    assert [labels[i] for i in idx] == ["R", "L"]
    # Bright rates are close to N * A_f; the R/L profiles are not exactly
    # orthogonal, which shifts them at the percent level at most.
    n = modes.n_atoms
    a_r = cm15.gamma_gR[0, 0].real
    a_l = cm15.gamma_gL[0, 0].real
    assert modes.gamma_c[idx[0]] == pytest.approx(n * a_r, rel=0.05)
    assert modes.gamma_c[idx[1]] == pytest.approx(n * a_l, rel=0.05)


def test_guided_only_shape_mismatch():
    with pytest.raises(fq.DomainError):
        fq.guided_only_modes(np.eye(3, dtype=complex), np.eye(4, dtype=complex))


def test_commensurate_spacing_collapses_to_one_mode(gm):
    # a equal to the guided wavelength makes the two direction profiles
    # identical, so the guided dissipator drops to rank one.
    chain = fq.ChainSpec(n_atoms=6, a=gm.lambda_f, h=100e-9, lambda_a=LAMBDA)
    g_r, g_l = guided_gamma(chain, gm)
    modes = fq.guided_only_modes(g_r, g_l)
    assert len(nonzero_rates(modes)) == 1


def test_labels_absent_without_overlaps(cm15):
    assert fq.diagonalize(cm15.gamma).labels is None


def test_hybridization_overlap(cm15):
    full = fq.diagonalize(cm15.gamma)
    guided = fq.guided_only_modes(cm15.gamma_gR, cm15.gamma_gL)
    free = fq.diagonalize(fq.free_space_oracle(
        fq.ChainSpec(n_atoms=15, a=800e-9, h=100e-9, lambda_a=LAMBDA))[1])
    ov = fq.hybridization_overlap(full, guided, free)
    for key in ("guided", "free_space"):
        mat = ov[key]
        assert mat.shape == (15, 15)
        assert mat.min() >= 0.0
        # Each reference set is a complete orthonormal basis.
        assert np.abs(mat.sum(axis=1) - 1.0).max() < 1e-10
    small = fq.diagonalize(np.eye(4))
    with pytest.raises(fq.DomainError):
        fq.hybridization_overlap(full, small, free)


def test_profile_consistency(cm15):
    modes = fq.diagonalize(cm15.gamma)
    prof = fq.superradiant_profile(modes)
    assert np.array_equal(prof.magnitudes, np.abs(modes.m[0]))
    # Unwrapped phases reproduce the raw angles modulo 2 pi and never jump
    # by more than pi between neighbors.
    assert np.allclose(np.exp(1j * prof.phases), np.exp(1j * np.angle(modes.m[0])), atol=1e-12)
    assert np.abs(np.diff(prof.phases)).max() <= np.pi
    assert not prof.degenerate


def test_degenerate_flag():
    prof = fq.superradiant_profile(fq.diagonalize(np.eye(4)))
    assert prof.degenerate


def test_phase_convention_pins_leading_component(cm15):
    m = fq.diagonalize(cm15.gamma).m
    for row in m:
        piv = row[np.argmax(np.abs(row) >= np.abs(row).max() * (1 - 1e-9))]
        assert piv.real > 0
        assert abs(piv.imag) < 1e-12 * abs(piv)


def test_mode_profile_any_index(cm15):
    modes = fq.diagonalize(cm15.gamma)
    prof = mode_profile(modes, 7)
    assert prof.magnitudes.shape == (15,)
