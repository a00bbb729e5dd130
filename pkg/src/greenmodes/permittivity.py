"""Permittivity models.

A model maps (position, frequency) to a relative permittivity, either a
complex scalar or a complex symmetric 3x3 tensor.  All models are passive:
construction rejects parameters that would describe gain at positive
frequency.  Evaluation at negative real frequency returns the Schwarz
reflection eps(-omega) = conj(eps(omega)), which analytic response
functions satisfy identically and which the constant (single-frequency
idealization) models enforce by hand.
"""

import numpy as np

from .tensors import antihermitian_part_over_i, c33, is_psd, r3


class PermittivityModel:
    """Base class.  Subclasses implement _eval_pos(omega >= 0 branch)."""

    is_tensor = False

    def eval(self, omega):
        """Permittivity at frequency omega, vectorized, causal reflection
        applied for Re(omega) < 0."""
        omega = np.asarray(omega)
        scalar_in = omega.ndim == 0
        omega = np.atleast_1d(omega)
        out = np.asarray(self._eval_pos(np.abs(omega.real) + 1j * omega.imag), dtype=complex)
        neg = omega.real < 0
        if np.any(neg):
            out = out.copy()
            out[neg] = np.conj(out[neg])
        return out[0] if scalar_in else out

    def at(self, r, omega):
        """Position-resolved value.  Homogeneous models ignore r."""
        return self.eval(omega)

    def _eval_pos(self, omega):
        raise NotImplementedError


class ConstantScalar(PermittivityModel):
    """Frequency-independent complex scalar.

    A constant complex value only makes sense as a single-frequency
    idealization; the causal reflection for negative omega is imposed in
    eval() so spectral integrands stay consistent.
    """

    def __init__(self, value):
        value = complex(value)
        if value.imag < 0.0:
            raise ValueError("gain medium (Im eps < 0) not supported")
        if value.real == 0.0 and value.imag == 0.0:
            raise ValueError("eps = 0 is singular")
        self.value = value

    def _eval_pos(self, omega):
        return np.full(np.shape(omega), self.value, dtype=complex)

    def __repr__(self):
        return "ConstantScalar(%r)" % (self.value,)


class DrudeLorentz(PermittivityModel):
    """eps(omega) = eps_inf + sum_j wp_j^2 / (w0_j^2 - omega^2 - i g_j omega).

    poles is a sequence of (wp, w0, gamma) triples.  gamma >= 0 keeps the
    model passive; w0 = 0 gives the Drude limit.
    """

    def __init__(self, eps_inf=1.0, poles=()):
        self.eps_inf = float(eps_inf)
        self.poles = tuple((float(wp), float(w0), float(g)) for wp, w0, g in poles)
        if self.eps_inf <= 0.0:
            raise ValueError("eps_inf must be positive")
        for wp, w0, g in self.poles:
            if g < 0.0:
                raise ValueError("pole damping gamma must be >= 0")

    def _eval_pos(self, omega):
        omega = np.asarray(omega, dtype=complex)
        if any(w0 == 0.0 for _, w0, _ in self.poles) and np.any(omega == 0.0):
            raise ValueError("Drude pole (w0 = 0) is singular at omega = 0")
        out = np.full(omega.shape, self.eps_inf, dtype=complex)
        for wp, w0, g in self.poles:
            out += wp**2 / (w0**2 - omega**2 - 1j * g * omega)
        return out

    def __repr__(self):
        return "DrudeLorentz(eps_inf=%r, poles=%r)" % (self.eps_inf, self.poles)


class ConstantTensor(PermittivityModel):
    """Constant complex symmetric 3x3 permittivity (reciprocal medium).

    Passivity requires the absorption tensor (eps - eps^dagger)/2i to be
    positive semidefinite.  Same single-frequency caveat as ConstantScalar.
    """

    is_tensor = True

    def __init__(self, value):
        value = c33(value)
        if np.max(np.abs(value - value.T)) > 1e-12 * max(1.0, np.max(np.abs(value))):
            raise ValueError("permittivity tensor must be symmetric (reciprocity)")
        if not is_psd(antihermitian_part_over_i(value), tol=1e-10):
            raise ValueError("gain medium: absorption tensor not PSD")
        self.value = value

    def _eval_pos(self, omega):
        omega = np.asarray(omega)
        out = np.empty(omega.shape + (3, 3), dtype=complex)
        out[...] = self.value
        return out

    def absorption_tensor(self):
        return antihermitian_part_over_i(self.value)


class Box:
    def __init__(self, lo, hi):
        self.lo = r3(lo)
        self.hi = r3(hi)
        if np.any(self.hi <= self.lo):
            raise ValueError("box needs hi > lo componentwise")

    def contains(self, r):
        r = r3(r)
        return bool(np.all(r >= self.lo) and np.all(r <= self.hi))


class Sphere:
    def __init__(self, center, radius):
        self.center = r3(center)
        self.radius = float(radius)
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")

    def contains(self, r):
        return bool(np.linalg.norm(r3(r) - self.center) <= self.radius)


class PiecewiseRegions(PermittivityModel):
    """Spatially piecewise model: first region containing r wins, else
    background.  eval() without a position returns the background."""

    def __init__(self, background, regions=()):
        if not isinstance(background, PermittivityModel):
            raise TypeError("background must be a PermittivityModel")
        self.background = background
        self.regions = tuple(regions)
        for shape, model in self.regions:
            if not hasattr(shape, "contains"):
                raise TypeError("region shape needs a contains() method")
            if not isinstance(model, PermittivityModel):
                raise TypeError("region model must be a PermittivityModel")

    def _eval_pos(self, omega):
        return self.background._eval_pos(omega)

    def at(self, r, omega):
        for shape, model in self.regions:
            if shape.contains(r):
                return model.eval(omega)
        return self.background.eval(omega)


def eval_permittivity(model, r, omega):
    """Permittivity tensor at one position and frequency.

    Scalar models are promoted to eps * I so callers can treat every model
    uniformly as a 3x3 tensor.
    """
    value = model.at(r, omega)
    value = np.asarray(value)
    if value.shape == (3, 3):
        return value.astype(complex)
    if value.ndim == 0:
        return complex(value) * np.eye(3)
    raise ValueError("permittivity evaluation returned shape %s" % (value.shape,))
