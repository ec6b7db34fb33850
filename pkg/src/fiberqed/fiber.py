"""Nanofiber material dispersion, HE11 eigenvalue problem, and mode profiles.

Conventions used throughout:

* cylindrical coordinates (r, phi, z) with the fiber axis along z;
* mode fields factor as e(r) * exp(i(l*phi + f*beta*z)) for the guided mode
  and e(r) * exp(i(m*phi + beta*z)) for radiation modes; the profile
  functions here return the r-dependent cylindrical components only,
  with the azimuthal factor included and the z factor left to the caller;
* guided profiles are normalized so that the cross-section integral of
  n^2 |e|^2 equals one (units 1/m); radiation profiles are delta-normalized
  in frequency (units sqrt(s)/m).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import jv, jvp, kv, kvp, yv, yvp

from .errors import DomainError, SolverError

C_LIGHT = 299792458.0  # m/s

# Fused silica at room temperature (Malitson), lambda in micrometers.
_SELL_B = np.array([0.6961663, 0.4079426, 0.8974794])
_SELL_C = np.array([0.0684043, 0.1162414, 9.896161]) ** 2
_SELL_LO = 0.21e-6
_SELL_HI = 3.7e-6

_J0_FIRST_ZERO = 2.404825557695773


def sellmeier_index(lambda_a: float) -> float:
    """Refractive index of fused silica at vacuum wavelength ``lambda_a`` (m)."""
    if not _SELL_LO <= lambda_a <= _SELL_HI:
        raise DomainError(
            f"wavelength {lambda_a:.4g} m outside Sellmeier validity window "
            f"[{_SELL_LO:.2e}, {_SELL_HI:.2e}] m"
        )
    x2 = (lambda_a * 1e6) ** 2
    n2 = 1.0 + np.sum(_SELL_B * x2 / (x2 - _SELL_C))
    return float(np.sqrt(n2))


@dataclass(frozen=True)
class FiberSpec:
    """Step-index cylinder with vacuum cladding.

    ``from_sellmeier`` records whether ``n_fiber`` came from the material
    model; re-solves at shifted frequency (for the group-velocity derivative)
    re-evaluate the index only in that case.
    """

    radius: float
    lambda_a: float
    n_fiber: float
    n_clad: float = 1.0
    from_sellmeier: bool = True

    @classmethod
    def make(cls, radius: float, lambda_a: float, n_fiber: float | None = None) -> "FiberSpec":
        if radius <= 0 or lambda_a <= 0:
            raise DomainError("fiber radius and wavelength must be positive")
        if n_fiber is None:
            return cls(radius, lambda_a, sellmeier_index(lambda_a))
        if n_fiber <= 1.0:
            raise DomainError("core index must exceed the vacuum cladding index")
        return cls(radius, lambda_a, n_fiber, from_sellmeier=False)

    @property
    def k(self) -> float:
        return 2.0 * np.pi / self.lambda_a

    @property
    def omega(self) -> float:
        return self.k * C_LIGHT

    @property
    def v_number(self) -> float:
        return self.k * self.radius * np.sqrt(self.n_fiber**2 - self.n_clad**2)

    @property
    def single_mode_radius(self) -> float:
        """Largest radius supporting only HE11 at this wavelength."""
        return _J0_FIRST_ZERO * self.lambda_a / (2.0 * np.pi * np.sqrt(self.n_fiber**2 - self.n_clad**2))


def check_single_mode(fiber: FiberSpec) -> bool:
    """True iff only the fundamental mode propagates (strict inequality)."""
    return fiber.radius < fiber.single_mode_radius


@dataclass(frozen=True)
class ModeIndex:
    """Label of one field mode: guided (f, l) or unguided (omega, beta, m, l)."""

    kind: str
    l: int
    omega: float
    f: int | None = None
    m: int | None = None
    beta: float | None = None

    def __post_init__(self):
        if self.kind not in ("guided", "unguided"):
            raise DomainError(f"unknown mode kind {self.kind!r}")
        if self.l not in (-1, 1):
            raise DomainError("polarization index l must be +1 or -1")
        if self.kind == "guided":
            if self.f not in (-1, 1):
                raise DomainError("guided mode needs direction f = +1 or -1")
            if self.m is not None or self.beta is not None:
                raise DomainError("guided mode carries (f, l) only")
        else:
            if self.m is None or self.beta is None:
                raise DomainError("unguided mode needs azimuthal order m and beta")
            if self.f is not None:
                raise DomainError("unguided mode carries (m, l, beta) only")
            k = self.omega / C_LIGHT
            if not abs(self.beta) < k:
                raise DomainError(f"radiation mode requires |beta| < omega/c = {k:.6g}")


def _char_he11(b: float, n1: float, n2: float, ka: float) -> float:
    """HE11 branch of the hybrid-mode characteristic function of b = beta/k.

    Vanishes at the fundamental-mode propagation constant.  Written in the
    form whose only pole in (n2, n1) would come from a zero of J1(u); below
    the single-mode cutoff u stays under the first J1 zero, so the function
    is smooth across the whole bracket.
    """
    u = ka * np.sqrt(n1**2 - b**2)
    w = ka * np.sqrt(b**2 - n2**2)
    kbar = kvp(1, w) / (w * kv(1, w))
    r = np.sqrt(
        ((n1**2 - n2**2) / (2 * n1**2) * kbar) ** 2
        + (b / n1) ** 2 * (1.0 / u**2 + 1.0 / w**2) ** 2
    )
    return jv(0, u) / (u * jv(1, u)) - 1.0 / u**2 + (n1**2 + n2**2) / (2 * n1**2) * kbar + r


def _char_residual(b: float, n1: float, n2: float, ka: float) -> float:
    """Scale-free residual of the product-form eigenvalue equation at b."""
    u = ka * np.sqrt(n1**2 - b**2)
    w = ka * np.sqrt(b**2 - n2**2)
    jbar = jvp(1, u) / (u * jv(1, u))
    kbar = kvp(1, w) / (w * kv(1, w))
    lhs = (jbar + kbar) * (jbar + (n2 / n1) ** 2 * kbar)
    rhs = (b / n1) ** 2 * (1.0 / u**2 + 1.0 / w**2) ** 2
    scale = abs(lhs) + abs(rhs)
    return abs(lhs - rhs) / scale if scale > 0 else 0.0


_BRACKET_PAD = 1e-6
_SCAN_POINTS = 1025


def _solve_beta(radius: float, lambda_a: float, n1: float, n2: float) -> tuple[float, float]:
    """Root b = beta/k of the HE11 characteristic equation, plus its residual."""
    ka = 2.0 * np.pi / lambda_a * radius
    lo = n2 * (1.0 + _BRACKET_PAD)
    hi = n1 * (1.0 - _BRACKET_PAD)
    grid = np.linspace(lo, hi, _SCAN_POINTS)
    vals = np.array([_char_he11(b, n1, n2, ka) for b in grid])
    if not np.all(np.isfinite(vals)):
        raise SolverError("characteristic function not finite on the scan grid")
    flips = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
    if len(flips) != 1:
        raise SolverError(
            f"expected exactly one sign change of the HE11 characteristic "
            f"function in ({lo:.8f}, {hi:.8f}), found {len(flips)}"
        )
    i = flips[0]
    b = brentq(_char_he11, grid[i], grid[i + 1], args=(n1, n2, ka), xtol=1e-15, rtol=8.9e-16)
    return b, _char_residual(b, n1, n2, ka)


def _s_param(u: float, w: float) -> float:
    return (1.0 / u**2 + 1.0 / w**2) / (
        jvp(1, u) / (u * jv(1, u)) + kvp(1, w) / (w * kv(1, w))
    )


def _guided_radial(r, beta, h_in, q_out, s, a_in, b_out, radius):
    """Unnormalized cylindrical profile pieces (e_r/i, e_phi, e_z) at radius r.

    e_r is purely imaginary for real amplitudes; the first return value is
    its imaginary part.  Scalar or array r.
    """
    r = np.asarray(r, dtype=float)
    inside = r < radius
    rr = np.where(r > 0, r, 1.0)  # axis value patched below

    hr = h_in * rr
    er_in = a_in * beta / (2 * h_in) * ((1 - s) * jv(0, hr) - (1 + s) * jv(2, hr))
    ephi_in = -a_in * beta / (2 * h_in) * ((1 - s) * jv(0, hr) + (1 + s) * jv(2, hr))
    ez_in = a_in * jv(1, hr)

    qr = q_out * rr
    er_out = b_out * beta / (2 * q_out) * ((1 - s) * kv(0, qr) + (1 + s) * kv(2, qr))
    ephi_out = -b_out * beta / (2 * q_out) * ((1 - s) * kv(0, qr) - (1 + s) * kv(2, qr))
    ez_out = b_out * kv(1, qr)

    er = np.where(inside, er_in, er_out)
    ephi = np.where(inside, ephi_in, ephi_out)
    ez = np.where(inside, ez_in, ez_out)
    if np.any(r == 0):
        # r -> 0 limit: J0 -> 1, J2 -> 0, J1 -> 0.
        er = np.where(r == 0, a_in * beta / (2 * h_in) * (1 - s), er)
        ephi = np.where(r == 0, -a_in * beta / (2 * h_in) * (1 - s), ephi)
        ez = np.where(r == 0, 0.0, ez)
    return er, ephi, ez


@dataclass(frozen=True)
class GuidedModeData:
    """Solved HE11 mode at the fiber's design frequency."""

    fiber: FiberSpec
    beta_f: float
    beta_f_prime: float
    lambda_f: float
    h_in: float
    q_out: float
    s_param: float
    amp_in: float
    amp_out: float
    residual: float

    @property
    def n_eff(self) -> float:
        return self.beta_f / self.fiber.k


@lru_cache(maxsize=256)
def solve_he11(fiber: FiberSpec, domega_rel: float = 1e-6) -> GuidedModeData:
    """Solve the HE11 dispersion at omega_a and its local frequency derivative.

    beta_f' is a central finite difference over omega; when the fiber index
    came from the Sellmeier model the material dispersion is included by
    re-evaluating the index at the shifted wavelengths.

    Raises DomainError if the fiber is not single-mode, SolverError if the
    bracket scan does not isolate exactly one root.
    """
    if not check_single_mode(fiber):
        raise DomainError(
            f"fiber radius {fiber.radius:.4g} m is not single-mode at "
            f"{fiber.lambda_a:.4g} m (limit {fiber.single_mode_radius:.4g} m)"
        )
    n1, n2 = fiber.n_fiber, fiber.n_clad
    b, residual = _solve_beta(fiber.radius, fiber.lambda_a, n1, n2)
    k = fiber.k
    beta_f = b * k

    def beta_at(scale: float) -> float:
        lam = fiber.lambda_a / scale
        n = sellmeier_index(lam) if fiber.from_sellmeier else n1
        bb, _ = _solve_beta(fiber.radius, lam, n, n2)
        return bb * 2.0 * np.pi / lam

    d = domega_rel
    beta_f_prime = (beta_at(1.0 + d) - beta_at(1.0 - d)) / (2.0 * d * fiber.omega)

    u = fiber.radius * np.sqrt((n1 * k) ** 2 - beta_f**2)
    w = fiber.radius * np.sqrt(beta_f**2 - (n2 * k) ** 2)
    h_in = u / fiber.radius
    q_out = w / fiber.radius
    s = _s_param(u, w)
    b_over_a = jv(1, u) / kv(1, w)

    # Cross-section normalization integral for unit inside amplitude.  The
    # outside piece is integrated in x = q (r - a): near cutoff the decay
    # length 1/q dwarfs the radius and an unscaled infinite-interval quad
    # collapses all the mass into an endpoint spike it never samples.
    def dens(r):
        er, ephi, ez = _guided_radial(r, beta_f, h_in, q_out, s, 1.0, b_over_a, fiber.radius)
        return (er**2 + ephi**2 + ez**2) * r

    i_in, err_in = quad(dens, 0.0, fiber.radius, limit=200)
    i_out, err_out = quad(
        lambda x: dens(fiber.radius + x / q_out) / q_out, 0.0, np.inf, limit=200
    )
    total = 2.0 * np.pi * (n1**2 * i_in + n2**2 * i_out)
    if not np.isfinite(total) or total <= 0:
        raise SolverError("guided-mode normalization integral failed")
    amp_in = 1.0 / np.sqrt(total)

    return GuidedModeData(
        fiber=fiber,
        beta_f=beta_f,
        beta_f_prime=beta_f_prime,
        lambda_f=2.0 * np.pi / beta_f,
        h_in=h_in,
        q_out=q_out,
        s_param=s,
        amp_in=amp_in,
        amp_out=amp_in * b_over_a,
        residual=residual,
    )


def guided_profile(gm: GuidedModeData, mode: ModeIndex, r, phi=0.0):
    """Cylindrical components (e_r, e_phi, e_z) of the guided mode at (r, phi).

    Includes the exp(i l phi) azimuthal factor; the exp(i f beta z)
    propagation factor is the caller's.  Reversing f negates e_z, which is
    the same as mapping the profile to minus its complex conjugate.
    """
    if mode.kind != "guided":
        raise DomainError("guided_profile needs a guided ModeIndex")
    if np.any(np.asarray(r) < 0):
        raise DomainError("radius must be nonnegative")
    er_im, ephi, ez = _guided_radial(
        r, gm.beta_f, gm.h_in, gm.q_out, gm.s_param, gm.amp_in, gm.amp_out, gm.fiber.radius
    )
    phase = np.exp(1j * mode.l * phi)
    return (
        1j * er_im * phase,
        mode.l * ephi * phase,
        mode.f * ez * phase,
    )


# ---------------------------------------------------------------------------
# Radiation (unguided) modes
# ---------------------------------------------------------------------------
#
# Inside the fiber the longitudinal fields are A J_m(h r) and (for the
# magnetic part, rescaled by the vacuum impedance so only k appears)
# B J_m(h r); outside they are C J_m(q r) + D Y_m(q r) and
# E J_m(q r) + F Y_m(q r).  Tangential continuity at r = a fixes
# (C, D, E, F) linearly in (A, B) through the Bessel Wronskian.


def _transfer(n1, n2, k, a, beta, m, amp_a, amp_b):
    """Outside coefficients (C, D, E, F) from inside amplitudes (A, B).

    Vectorized over beta.  amp_a / amp_b may be complex scalars or arrays.
    """
    h = np.sqrt((n1 * k) ** 2 - beta**2)
    q = np.sqrt((n2 * k) ** 2 - beta**2)
    u = h * a
    w = q * a

    jm_u, jp_u = jv(m, u), jvp(m, u)
    jm_w, jp_w = jv(m, w), jvp(m, w)
    ym_w, yp_w = yv(m, w), yvp(m, w)
    wron = 2.0 / (np.pi * w)

    cross = 1j * m * beta * q / (a * k) * (1.0 / q**2 - 1.0 / h**2)
    s1 = amp_a * jm_u
    s2 = (q / h) * amp_b * jp_u + cross * amp_a * jm_u
    s3 = amp_b * jm_u
    s4 = (n1 / n2) ** 2 * (q / h) * amp_a * jp_u - cross / n2**2 * amp_b * jm_u

    c = (s1 * yp_w - s4 * ym_w) / wron
    d = (s4 * jm_w - s1 * jp_w) / wron
    e = (s3 * yp_w - s2 * ym_w) / wron
    f = (s2 * jm_w - s3 * jp_w) / wron
    return c, d, e, f


def _radiation_coeffs(n1, n2, k, a, beta, m, l):
    """Full coefficient set and norm for polarization l, vectorized over beta.

    Returns (A, B, C, D, E, F, norm).  The two independent polarizations at
    fixed (omega, beta, m) are paired as B = i l eta A with eta chosen so
    that l = +1 and l = -1 are orthogonal under the large-r overlap; the
    norm is the delta-in-frequency normalization denominator.
    """
    c1, d1, e1, f1 = _transfer(n1, n2, k, a, beta, m, 1.0, 0.0)
    c2, d2, e2, f2 = _transfer(n1, n2, k, a, beta, m, 0.0, 1.0)
    num = n2**2 * (c1.real**2 + d1.real**2) + e1.imag**2 + f1.imag**2
    den = n2**2 * (c2.imag**2 + d2.imag**2) + e2.real**2 + f2.real**2
    eta = np.sqrt(num / den)

    amp_b = 1j * l * eta
    c = c1 + amp_b * c2
    d = d1 + amp_b * d2
    e = e1 + amp_b * e2
    f = f1 + amp_b * f2
    q2 = (n2 * k) ** 2 - beta**2
    omega = k * C_LIGHT
    norm = (2.0 * np.pi * omega / q2) * (
        n2**2 * (np.abs(c) ** 2 + np.abs(d) ** 2) + np.abs(e) ** 2 + np.abs(f) ** 2
    )
    return 1.0, amp_b, c, d, e, f, norm


def _e_components(kappa, beta, k, m, r, ez_pair, hz_pair):
    """Cylindrical (e_r, e_phi, e_z) at radius r from the (J, Y) amplitudes.

    ez_pair = (p, s): E_z = p J_m(kappa r) + s Y_m(kappa r); same for the
    rescaled magnetic hz_pair.  Vectorized over the amplitudes' shape.
    """
    x = kappa * r
    jm, jp = jv(m, x), jvp(m, x)
    ym, yp = yv(m, x), yvp(m, x)
    pe, se = ez_pair
    ph, sh = hz_pair
    ez = pe * jm + se * ym
    hz = ph * jm + sh * ym
    dez = kappa * (pe * jp + se * yp)
    dhz = kappa * (ph * jp + sh * yp)
    k2 = kappa**2
    er = (1j / k2) * (beta * dez + 1j * m * k / r * hz)
    ephi = (1j / k2) * (1j * m * beta / r * ez - k * dhz)
    return er, ephi, ez


def _h_components(kappa, beta, k, m, r, n_sq, ez_pair, hz_pair):
    """Rescaled magnetic components (h_r, h_phi, h_z); for continuity tests."""
    x = kappa * r
    jm, jp = jv(m, x), jvp(m, x)
    ym, yp = yv(m, x), yvp(m, x)
    pe, se = ez_pair
    ph, sh = hz_pair
    ez = pe * jm + se * ym
    hz = ph * jm + sh * ym
    dez = kappa * (pe * jp + se * yp)
    dhz = kappa * (ph * jp + sh * yp)
    k2 = kappa**2
    hr = (1j / k2) * (beta * dhz - 1j * m * k * n_sq / r * ez)
    hphi = (1j / k2) * (1j * m * beta / r * hz + k * n_sq * dez)
    return hr, hphi, hz


def radiation_profile(fiber: FiberSpec, mode: ModeIndex, r, phi=0.0):
    """Normalized cylindrical components of radiation mode (omega, beta, m, l).

    Includes the exp(i m phi) azimuthal factor; exp(i beta z) is the
    caller's.  Output units sqrt(s)/m from the delta-in-frequency
    normalization.
    """
    if mode.kind != "unguided":
        raise DomainError("radiation_profile needs an unguided ModeIndex")
    if np.any(np.asarray(r) < 0):
        raise DomainError("radius must be nonnegative")
    n1, n2 = fiber.n_fiber, fiber.n_clad
    k = mode.omega / C_LIGHT
    a = fiber.radius
    beta, m = mode.beta, mode.m

    amp_a, amp_b, c, d, e, f, norm = _radiation_coeffs(n1, n2, k, a, np.asarray(beta, dtype=float), m, mode.l)
    h = np.sqrt((n1 * k) ** 2 - beta**2)
    q = np.sqrt((n2 * k) ** 2 - beta**2)
    scale = np.exp(1j * m * phi) / np.sqrt(norm)

    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < a):
        er_i, ephi_i, ez_i = _e_components(h, beta, k, m, np.where(r_arr < a, r_arr, a), (amp_a, 0.0), (amp_b, 0.0))
    if np.any(r_arr >= a):
        er_o, ephi_o, ez_o = _e_components(q, beta, k, m, np.where(r_arr >= a, r_arr, a), (c, d), (e, f))
    if np.all(r_arr < a):
        er, ephi, ez = er_i, ephi_i, ez_i
    elif np.all(r_arr >= a):
        er, ephi, ez = er_o, ephi_o, ez_o
    else:
        inside = r_arr < a
        er = np.where(inside, er_i, er_o)
        ephi = np.where(inside, ephi_i, ephi_o)
        ez = np.where(inside, ez_i, ez_o)
    return er * scale, ephi * scale, ez * scale
