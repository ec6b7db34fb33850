"""Driven steady state: oracles, scaling laws, failure modes."""

import numpy as np
import pytest

import fiberqed as fq

LAMBDA = 1.0e-6
OMEGA_L = 0.01


def _drive(delta, phi=1.37, omega_L=OMEGA_L):
    return fq.DriveField(omega_L=omega_L, delta=delta, phi=phi)


def test_single_atom_lorentzian(chain1, cm1):
    """N = 1 has the closed form c = Omega / (Delta + i Gamma / 2)."""
    g_tot = cm1.gamma[0, 0].real
    for delta in (-3.0, -0.2, 0.0, 0.61, 4.0):
        state = fq.solve_steady(chain1, cm1, _drive(delta))
        rates = fq.emission_rates(cm1, state)
        pop = OMEGA_L**2 / (delta**2 + g_tot**2 / 4)
        assert state.max_population == pytest.approx(pop, rel=1e-10)
        assert rates.n_p == pytest.approx(g_tot * pop, rel=1e-10)
        # Channel split follows the rate matrix elements exactly.
        assert rates.n_p_gR == pytest.approx(cm1.gamma_gR[0, 0].real * pop, rel=1e-10)
        assert rates.n_p_u == pytest.approx(cm1.gamma_u[0, 0].real * pop, rel=1e-10)


def test_amplitudes_linear_in_drive(chain15, cm15):
    s1 = fq.solve_steady(chain15, cm15, _drive(0.3, omega_L=0.005))
    s2 = fq.solve_steady(chain15, cm15, _drive(0.3, omega_L=0.010))
    assert np.allclose(s2.c_e, 2.0 * s1.c_e, rtol=1e-13, atol=0.0)
    r1 = fq.emission_rates(cm15, s1)
    r2 = fq.emission_rates(cm15, s2)
    assert r2.n_p == pytest.approx(4.0 * r1.n_p, rel=1e-12)
    assert r2.n_p_gR == pytest.approx(4.0 * r1.n_p_gR, rel=1e-12)


def test_two_atom_closed_form(fiber):
    """Independent 2x2 inverse via the explicit determinant."""
    chain = fq.ChainSpec(n_atoms=2, a=800e-9, h=100e-9, lambda_a=LAMBDA)
    cm = fq.assemble(chain, fiber)
    drive = _drive(0.4)
    a = drive.delta * np.eye(2) - (cm.v - 0.5j * cm.gamma)
    det = a[0, 0] * a[1, 1] - a[0, 1] * a[1, 0]
    inv = np.array([[a[1, 1], -a[0, 1]], [-a[1, 0], a[0, 0]]]) / det
    expected = inv @ (drive.omega_L * fq.drive_vector(chain, drive))
    state = fq.solve_steady(chain, cm, drive)
    assert np.abs(state.c_e - expected).max() < 1e-12 * np.abs(expected).max()


def test_channel_rates_are_additive(chain15, cm15):
    state = fq.solve_steady(chain15, cm15, _drive(-0.7))
    rates = fq.emission_rates(cm15, state)
    c = state.c_e
    total = float(np.real(c.conj() @ cm15.gamma @ c))
    assert rates.n_p_gR + rates.n_p_gL + rates.n_p_u == pytest.approx(total, rel=1e-12)
    assert rates.n_p_g == pytest.approx(rates.n_p_gR + rates.n_p_gL, rel=1e-14)
    assert min(rates.n_p_gR, rates.n_p_gL, rates.n_p_u) >= 0.0


def test_solution_residual_reported(chain15, cm15):
    state = fq.solve_steady(chain15, cm15, _drive(0.0))
    assert state.residual < 1e-10


def test_weak_drive_warning():
    with pytest.warns(UserWarning, match="weak-drive"):
        fq.DriveField(omega_L=0.2, delta=0.0, phi=0.0)


def test_populations_stay_perturbative(chain15, cm15):
    # Omega_L = gamma/100 keeps every excited population << 1 across the
    # resonance window, which is what justifies the linear treatment.
    for delta in np.linspace(-8.0, 8.0, 33):
        state = fq.solve_steady(chain15, cm15, _drive(delta))
        assert state.max_population < 1e-2


def test_singular_system_raises():
    chain = fq.ChainSpec(n_atoms=2, a=800e-9, h=100e-9, lambda_a=LAMBDA)
    z = np.zeros((2, 2), dtype=complex)
    v = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
    cm = fq.CouplingMatrices(v=v, gamma=z, gamma_gR=z, gamma_gL=z, gamma_u=z)
    with pytest.raises(fq.SolverError):
        fq.solve_steady(chain, cm, fq.DriveField(omega_L=0.01, delta=1.0, phi=0.0))


def test_drive_vector_phases(chain15):
    v = fq.drive_vector(chain15, _drive(0.0, phi=np.pi / 2))
    assert np.allclose(v, 1.0, atol=1e-12)
    v0 = fq.drive_vector(chain15, _drive(0.0, phi=0.0))
    expected = np.exp(-1j * chain15.k * chain15.z)
    assert np.allclose(v0, expected, rtol=1e-14)
    assert np.allclose(np.abs(v0), 1.0, rtol=1e-15)
