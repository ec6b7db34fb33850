"""Coupling matrices: free-space oracle equivalence, structure, channels."""

import numpy as np
import pytest

import fiberqed as fq
from fiberqed.coupling import (
    _tensor_m_term,
    free_space_oracle,
    guided_amplitudes,
    radiation_gamma,
)
from fiberqed.fiber import solve_he11

LAMBDA = 1.0e-6


def _chain(n=3, a=0.4e-6, h=100e-9, dipole=None):
    kw = {} if dipole is None else {"dipole": dipole}
    return fq.ChainSpec(n_atoms=n, a=a, h=h, lambda_a=LAMBDA, **kw)


def test_chain_validation():
    with pytest.raises(fq.DomainError):
        fq.ChainSpec(n_atoms=0, a=1e-6, h=0.0, lambda_a=LAMBDA)
    with pytest.raises(fq.DomainError):
        fq.ChainSpec(n_atoms=2, a=0.0, h=0.0, lambda_a=LAMBDA)
    with pytest.raises(fq.DomainError):
        fq.ChainSpec(n_atoms=2, a=1e-6, h=-1e-9, lambda_a=LAMBDA)
    # N = 1 tolerates a = 0 (no pair separations exist).
    fq.ChainSpec(n_atoms=1, a=0.0, h=0.0, lambda_a=LAMBDA)


def test_dipole_is_normalized():
    c = fq.ChainSpec(n_atoms=1, a=0.0, h=0.0, lambda_a=LAMBDA, dipole=(2.0, 0.0, 0.0))
    assert np.allclose(c.d_vec, [1.0, 0.0, 0.0])


def test_mode_sum_matches_free_space_oracle():
    """Boundary-free mode expansion must reproduce the analytic dipole kernel.

    This is the main correctness anchor of the continuum quadrature: the
    same machinery that later carries the fiber boundary is run with the
    boundary switched off and compared against the closed form.
    """
    chain = _chain()
    v_fs, g_fs = free_space_oracle(chain)
    cm = fq.assemble(chain, None)
    assert np.abs(cm.gamma - g_fs).max() < 1e-6
    assert np.abs(cm.v - v_fs).max() < 1e-12  # tier1 V is the same closed form
    assert np.abs(cm.gamma_gR).max() == 0.0
    assert np.abs(cm.gamma_gL).max() == 0.0


def test_free_space_rates_do_not_depend_on_position():
    # Without a boundary the transverse offset is a gauge choice.
    g_lo = fq.assemble(_chain(h=50e-9), None).gamma
    g_hi = fq.assemble(_chain(h=400e-9), None).gamma
    assert np.abs(g_lo - g_hi).max() < 1e-10


@pytest.mark.slow
def test_tier2_reduces_to_free_space_without_fiber():
    # The window principal value integrates fiber-minus-free-space density;
    # with no fiber that difference is pure quadrature noise.
    chain = _chain()
    v_fs, _ = free_space_oracle(chain)
    cm2 = fq.assemble(chain, None, v_policy="tier2")
    assert np.abs(cm2.v - v_fs).max() < 1e-6


def test_gamma_structure(cm15):
    g = cm15.gamma
    assert np.abs(g - g.conj().T).max() < 1e-12
    assert np.linalg.eigvalsh(g).min() > -1e-10
    # Uniform chain: every matrix is Toeplitz in the atom index.
    n = g.shape[0]
    for mat in (g, cm15.v, cm15.gamma_u):
        for s in range(1, n):
            diag = np.diagonal(mat, offset=s)
            assert np.abs(diag - diag[0]).max() < 1e-12


def test_v_hermitian_zero_diagonal(cm15):
    v = cm15.v
    assert np.abs(v - v.conj().T).max() < 1e-14
    assert np.abs(np.diagonal(v)).max() == 0.0


def test_channel_additivity(cm15):
    total = cm15.gamma_gR + cm15.gamma_gL + cm15.gamma_u
    assert np.abs(cm15.gamma - total).max() < 1e-14


def test_guided_phase_law(cm15, gm):
    """|Gamma_gR| is separation independent; its phase winds as beta_f z."""
    g = cm15.gamma_gR
    mags = np.abs(g)
    assert np.abs(mags - mags[0, 0]).max() < 1e-14 * mags[0, 0]
    z = 800e-9 * np.arange(g.shape[0])
    zij = z[:, None] - z[None, :]
    expected = np.angle(np.exp(1j * gm.beta_f * zij))
    assert np.abs(np.angle(g) - expected).max() < 1e-10
    # Left-movers carry the opposite winding at their own rate.
    ratio = cm15.gamma_gL[0, 0].real / cm15.gamma_gR[0, 0].real
    assert np.abs(cm15.gamma_gL - ratio * cm15.gamma_gR.conj()).max() \
        < 1e-12 * np.abs(cm15.gamma_gL).max()


def test_guided_rank_one(cm15):
    for mat in (cm15.gamma_gR, cm15.gamma_gL):
        s = np.linalg.svd(mat, compute_uv=False)
        assert s[1] < 1e-12 * s[0]


def test_azimuthal_flip_symmetry(fiber):
    """m -> -m mirrors the tensor through the (x, z) plane."""
    k = 2 * np.pi / LAMBDA
    beta = np.array([0.2, 0.5, 0.8]) * k
    flip = np.diag([1.0, -1.0, 1.0])
    for m in (1, 2, 5):
        t_p = _tensor_m_term(fiber.n_fiber, 1.0, k, fiber.radius, beta, m, 0.32e-6)
        t_m = _tensor_m_term(fiber.n_fiber, 1.0, k, fiber.radius, beta, -m, 0.32e-6)
        mirrored = flip @ t_p @ flip
        assert np.abs(t_m - mirrored).max() < 1e-12 * np.abs(t_p).max()


def test_real_dipole_has_no_chirality(fiber):
    for d in [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.6, 0.0, 0.8)]:
        chain = _chain(n=1, a=0.0, dipole=d)
        a_r, a_l = guided_amplitudes(chain, solve_he11(fiber))
        assert a_r == pytest.approx(a_l, rel=1e-12)


def test_quadrature_failure_paths(fiber):
    chain = _chain(n=2)
    with pytest.raises(fq.ConvergenceError):
        radiation_gamma(chain, fiber, fq.QuadratureConfig(m_cap=2))
    with pytest.raises(fq.ConvergenceError):
        radiation_gamma(chain, fiber, fq.QuadratureConfig(rel_tol=1e-13, min_level=3, max_level=4))


def test_unknown_v_policy(fiber):
    with pytest.raises(fq.DomainError):
        fq.assemble(_chain(), fiber, v_policy="tier3")


def test_assembly_meta_certificates(cm15):
    rad = cm15.meta["radiation"]
    assert rad["m_max"] >= 5
    assert rad["level_rel_change"] < 1e-8
    assert cm15.meta["v_policy"] == "tier1"
    assert cm15.meta["beta_f"] == pytest.approx(6602128.354, rel=1e-9)
