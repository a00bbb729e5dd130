"""Dyadic Green tensor of the vector Helmholtz equation, three ways:
closed-form homogeneous bulk, a (2+1)-dimensional radial spectral integral
over lateral wavenumber, and a truncated cavity mode sum.

Conventions: G propagates a point dipole source, so for vacuum the
far field is e^{ik rho}(I - ee)/(4 pi rho) and the coincidence limit of
Im G in a lossless medium is (sqrt(eps) w / 6 pi c) I.  Wavenumbers take
the Im k >= 0 branch (outgoing, decaying), which also makes every backend
satisfy the reflection G(-w) = G*(w) on the real axis.  The contact
delta-function term is never evaluated numerically; each bulk backend
reports its coefficient symbolically via delta_term().
"""

import numpy as np
from scipy import special

from .constants import Constants
from .numerics import QuadratureSpec, sommerfeld_radial
from .tensors import I3, r3


def wavenumber(omega, eps, const=None):
    """k = sqrt(eps) w / c on the Im k >= 0 branch."""
    const = const or Constants.natural()
    k = np.sqrt(complex(eps)) * omega / const.c
    if k.imag < 0.0:
        k = -k
    return k


def _bulk_green_batch(disp, k):
    """Closed-form G for displacement rows disp (N, 3), N-batched."""
    disp = np.atleast_2d(np.asarray(disp, dtype=float))
    rho = np.linalg.norm(disp, axis=1)
    if np.any(rho == 0.0):
        raise ValueError("coincidence limit: use im_green_coincidence")
    ehat = disp / rho[:, None]
    x = k * rho
    phase = np.exp(1j * x)
    denom = 4.0 * np.pi * k**2 * rho**3
    a = -phase * (1.0 - 1j * x - x**2) / denom
    b = phase * (3.0 - 3j * x - x**2) / denom
    ee = ehat[:, :, None] * ehat[:, None, :]
    return a[:, None, None] * I3 + b[:, None, None] * ee


def bulk_green(r, r0, omega, eps, const=None):
    """Closed-form bulk Green tensor at r != r0 (delta term excluded)."""
    k = wavenumber(omega, eps, const)
    return _bulk_green_batch((r3(r) - r3(r0))[None, :], k)[0]


def im_green_coincidence(omega, eps, const=None):
    """Coincidence limit of Im G for a lossless medium: (sqrt(eps) w/6 pi c) I.

    In a lossy medium Im G diverges at coincidence, so Im eps > 0 raises.
    """
    const = const or Constants.natural()
    eps = complex(eps)
    if eps.imag != 0.0:
        raise ValueError(
            "Im G diverges at coincidence inside a lossy medium; "
            "only the lossless limit is finite"
        )
    if eps.real <= 0.0:
        raise ValueError("need eps > 0 for a propagating coincidence limit")
    if omega <= 0.0:
        raise ValueError("need omega > 0")
    return (np.sqrt(eps.real) * omega / (6.0 * np.pi * const.c)) * I3.copy()


def default_k_max(k, lateral, dz, multiplier=30.0):
    """Radial cutoff heuristic: oscillation scale plus evanescent depth.

    Uses the smallest positive separation scale; capped at 500 |k| to keep
    pathological geometries from exploding the integration range.
    """
    scales = [s for s in (abs(dz), abs(lateral)) if s > 0.0]
    if not scales:
        raise ValueError("coincidence: no separation scale for k_max")
    km = multiplier * abs(k) + 40.0 / min(scales)
    return min(km, 500.0 * abs(k))


def _sommerfeld_integrand(kpar, k, lateral, dz_abs, sign_z):
    kperp = np.sqrt(k * k - kpar * kpar + 0j)
    flip = kperp.imag < 0.0
    kperp = np.where(flip, -kperp, kperp)
    q = kperp / k
    pp = kpar / k
    alpha = kpar * lateral
    j0 = special.j0(alpha)
    j1 = special.j1(alpha)
    j2 = special.jv(2, alpha)
    pref = (1j / (8.0 * np.pi**2)) * (kpar / kperp) * np.exp(1j * kperp * dz_abs)
    out = np.zeros(kpar.shape + (3, 3), dtype=complex)
    out[:, 0, 0] = np.pi * ((j0 + j2) + q**2 * (j0 - j2))
    out[:, 1, 1] = np.pi * ((j0 - j2) + q**2 * (j0 + j2))
    out[:, 2, 2] = 2.0 * np.pi * pp**2 * j0
    xz = -sign_z * 2j * np.pi * q * pp * j1
    out[:, 0, 2] = xz
    out[:, 2, 0] = xz
    return pref[:, None, None] * out


def bulk_green_sommerfeld(r, r0, omega, eps, spec=None, k_max=None, const=None):
    """Bulk Green tensor from the radial lateral-wavenumber integral.

    The 2-d spectral integral is reduced to Bessel kernels J0, J1, J2 in a
    frame whose x axis lies along the lateral separation, then rotated
    back.  Decay along k_par comes from e^{i k_perp |dz|}, so accuracy
    degrades when z = z0 (no exponential cutoff; the tail warning fires).
    Delta term excluded, as in the closed form.
    """
    spec = spec or QuadratureSpec()
    const = const or Constants.natural()
    disp = r3(r) - r3(r0)
    dx, dy, dz = disp
    lateral = float(np.hypot(dx, dy))
    if lateral == 0.0 and dz == 0.0:
        raise ValueError("coincidence limit: use im_green_coincidence")
    k = wavenumber(omega, eps, const)
    if k_max is None:
        k_max = default_k_max(k, lateral, dz)
    sign_z = float(np.sign(dz))

    def f(kpar):
        return _sommerfeld_integrand(kpar, k, lateral, abs(dz), sign_z)

    g_local, _err = sommerfeld_radial(f, k, k_max, spec)
    phi = np.arctan2(dy, dx)
    cp, sp = np.cos(phi), np.sin(phi)
    rot = np.array([[cp, -sp, 0.0], [sp, cp, 0.0], [0.0, 0.0, 1.0]])
    return rot @ g_local @ rot.T


def cavity_green(r, r0, omega, modeset, eta=0.0):
    """Truncated mode-sum Green tensor with optional pole softening.

    G = c^2 sum_k E_k(r) E_k(r0)^T / (w_k^2 - w^2 - i eta w).  Real mode
    fields make each term symmetric under (r, r0) exchange + transpose.
    Truncation is bounded by modeset.omega_top; callers should keep
    |omega| well below it.
    """
    if eta < 0.0:
        raise ValueError("eta must be >= 0")
    geom = modeset.geometry
    if not (geom.contains(r) and geom.contains(r0)):
        raise ValueError("points must lie inside the cavity")
    denom = modeset.omegas**2 - omega**2 - 1j * eta * omega
    if eta == 0.0 and float(np.min(np.abs(denom))) <= 1e-12 * omega**2:
        raise ValueError(
            "frequency hits a cavity resonance; use eta > 0 to soften the pole"
        )
    fr = modeset.eval_all(r)
    f0 = modeset.eval_all(r0)
    c2 = modeset.const.c**2
    return c2 * np.einsum("m,mi,mj->ij", 1.0 / denom, fr, f0)


class GreenEvaluator:
    """Common interface: evaluate(r, r0, omega) -> 3x3 complex."""

    def evaluate(self, r, r0, omega):
        raise NotImplementedError

    def im_coincidence(self, r, omega):
        """Im G(r, r, omega); defined only where the limit is finite."""
        raise NotImplementedError


class BulkClosedForm(GreenEvaluator):
    def __init__(self, eps_model, const=None):
        if eps_model.is_tensor:
            raise ValueError("bulk closed form needs a scalar permittivity")
        self.eps_model = eps_model
        self.const = const or Constants.natural()

    def evaluate(self, r, r0, omega):
        return bulk_green(r, r0, omega, self.eps_model.eval(omega), self.const)

    def im_coincidence(self, r, omega):
        return im_green_coincidence(omega, self.eps_model.eval(omega), self.const)

    def delta_term(self, omega):
        """Symbolic contact-term coefficient: G ⊃ delta_term * delta^3(r-r0)."""
        k = wavenumber(omega, self.eps_model.eval(omega), self.const)
        return -I3 / (3.0 * k**2)


class BulkSommerfeld(GreenEvaluator):
    def __init__(self, eps_model, spec=None, k_max_multiplier=30.0, const=None):
        if eps_model.is_tensor:
            raise ValueError("Sommerfeld backend needs a scalar permittivity")
        self.eps_model = eps_model
        self.spec = spec or QuadratureSpec()
        self.k_max_multiplier = float(k_max_multiplier)
        self.const = const or Constants.natural()

    def evaluate(self, r, r0, omega):
        eps = self.eps_model.eval(omega)
        k = wavenumber(omega, eps, self.const)
        disp = r3(r) - r3(r0)
        lateral = float(np.hypot(disp[0], disp[1]))
        k_max = default_k_max(k, lateral, disp[2], self.k_max_multiplier)
        return bulk_green_sommerfeld(
            r, r0, omega, eps, self.spec, k_max=k_max, const=self.const)

    def delta_term(self, omega):
        """Planar-decomposition contact term: -(z z)/k^2 times delta^3."""
        k = wavenumber(omega, self.eps_model.eval(omega), self.const)
        zz = np.zeros((3, 3), dtype=complex)
        zz[2, 2] = 1.0
        return -zz / k**2


class CavityModeSum(GreenEvaluator):
    def __init__(self, modeset, eta=0.0):
        if eta < 0.0:
            raise ValueError("eta must be >= 0")
        self.modeset = modeset
        self.eta = float(eta)

    @property
    def omega_top(self):
        return self.modeset.omega_top

    def evaluate(self, r, r0, omega):
        return cavity_green(r, r0, omega, self.modeset, self.eta)

    def im_coincidence(self, r, omega):
        if self.eta == 0.0:
            raise ValueError(
                "mode-sum Im G at coincidence needs eta > 0 (discrete poles)"
            )
        g = self.evaluate(r, r, omega)
        return g.imag
