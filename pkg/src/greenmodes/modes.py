"""Eigenmodes of a perfectly conducting rectangular box filled with a
uniform lossless dielectric, plus plane-wave modes and atom-mode coupling.

Mode functions are the standard trigonometric transverse patterns

    E_x = A_x cos(kx x) sin(ky y) sin(kz z)
    E_y = A_y sin(kx x) cos(ky y) sin(kz z)
    E_z = A_z sin(kx x) sin(ky y) cos(kz z)

with k = (m pi/Lx, n pi/Ly, p pi/Lz) and A.k = 0.  Triples with two or
three zero indices have identically vanishing transverse field and are
excluded.  Exactly one zero index leaves a single polarization branch
(A along that axis); otherwise there are two.  Amplitudes are fixed by the
closed-form normalization integral int eps_b |E|^2 = 1, so orthonormality
is exact by construction and the overlap matrix needs no cubature.
"""

from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .constants import Constants
from .permittivity import ConstantScalar, PermittivityModel
from .tensors import r3


def _background_eps(background):
    if isinstance(background, (int, float)):
        background = ConstantScalar(background)
    if not isinstance(background, PermittivityModel):
        raise TypeError("background must be a PermittivityModel or a real number")
    if background.is_tensor or not isinstance(background, ConstantScalar):
        raise ValueError(
            "mode construction needs a position-independent real scalar background"
        )
    eps = background.value
    if eps.imag != 0.0:
        raise ValueError("mode construction needs a lossless (real) background")
    if eps.real <= 0.0:
        raise ValueError("background permittivity must be positive")
    return background, float(eps.real)


@dataclass(frozen=True)
class CavityGeometry:
    """Rectangular box [0,Lx]x[0,Ly]x[0,Lz] with a real scalar filling."""

    Lx: float
    Ly: float
    Lz: float
    background: PermittivityModel = dc_field(default_factory=lambda: ConstantScalar(1.0))

    def __post_init__(self):
        if min(self.Lx, self.Ly, self.Lz) <= 0.0:
            raise ValueError("box lengths must be positive")
        bg, eps = _background_eps(self.background)
        object.__setattr__(self, "background", bg)
        object.__setattr__(self, "_eps_b", eps)

    @property
    def eps_b(self):
        return self._eps_b

    @property
    def lengths(self):
        return np.array([self.Lx, self.Ly, self.Lz])

    @property
    def volume(self):
        return self.Lx * self.Ly * self.Lz

    def contains(self, r):
        r = r3(r)
        return bool(np.all(r >= 0.0) and np.all(r <= self.lengths))


@dataclass(frozen=True, order=True)
class ModeIndex:
    m: int
    n: int
    p: int
    branch: int

    def __post_init__(self):
        if min(self.m, self.n, self.p) < 0:
            raise ValueError("mode indices must be nonnegative")
        if (self.m == 0) + (self.n == 0) + (self.p == 0) >= 2:
            raise ValueError("two or more zero indices give a vanishing mode")
        if self.branch not in (1, 2):
            raise ValueError("branch must be 1 or 2")


@dataclass(frozen=True)
class ModeEntry:
    """One eigenmode: index, frequency, wavevector and amplitude vector."""

    index: ModeIndex
    omega: float
    kvec: np.ndarray
    amplitude: np.ndarray
    geometry: Optional[CavityGeometry] = None

    def field(self, r):
        """Mode function at r, shape (..., 3) in, (..., 3) out."""
        r = np.asarray(r, dtype=float)
        x, y, z = r[..., 0], r[..., 1], r[..., 2]
        kx, ky, kz = self.kvec
        ax, ay, az = self.amplitude
        ex = ax * np.cos(kx * x) * np.sin(ky * y) * np.sin(kz * z)
        ey = ay * np.sin(kx * x) * np.cos(ky * y) * np.sin(kz * z)
        ez = az * np.sin(kx * x) * np.sin(ky * y) * np.cos(kz * z)
        return np.stack([ex, ey, ez], axis=-1)


class ModeSet:
    """Immutable collection of box modes with vectorized field evaluation.

    entries are sorted ascending in omega with lexicographic
    (m, n, p, branch) tie-breaking, so the ordering is deterministic for
    degenerate shells.
    """

    def __init__(self, geometry, entries, n_max, const=None):
        self.geometry = geometry
        self.const = const or Constants.natural()
        self.n_max = n_max
        order = sorted(
            range(len(entries)),
            key=lambda i: (entries[i].omega,) + (
                entries[i].index.m, entries[i].index.n,
                entries[i].index.p, entries[i].index.branch),
        )
        self.entries = tuple(entries[i] for i in order)
        if not self.entries:
            raise ValueError("empty mode set")
        self._k = np.array([e.kvec for e in self.entries])
        self._amp = np.array([e.amplitude for e in self.entries])
        self.omegas = np.array([e.omega for e in self.entries])

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    @property
    def omega_top(self):
        return float(self.omegas[-1])

    def subset(self, indices):
        picked = [self.entries[i] for i in indices]
        return ModeSet(self.geometry, picked, self.n_max, self.const)

    def eval_all(self, r):
        """All mode fields at one point, shape (n_modes, 3)."""
        x, y, z = r3(r)
        cx = np.cos(self._k[:, 0] * x)
        sx = np.sin(self._k[:, 0] * x)
        cy = np.cos(self._k[:, 1] * y)
        sy = np.sin(self._k[:, 1] * y)
        cz = np.cos(self._k[:, 2] * z)
        sz = np.sin(self._k[:, 2] * z)
        out = np.empty((len(self.entries), 3))
        out[:, 0] = self._amp[:, 0] * cx * sy * sz
        out[:, 1] = self._amp[:, 1] * sx * cy * sz
        out[:, 2] = self._amp[:, 2] * sx * sy * cz
        return out

    def overlap(self, i, j):
        """Closed-form orthonormality integral int eps_b E_i . E_j dV."""
        ei = self.entries[i]
        ej = self.entries[j]
        ti = (ei.index.m, ei.index.n, ei.index.p)
        if ti != (ej.index.m, ej.index.n, ej.index.p):
            return 0.0
        lengths = self.geometry.lengths
        total = 0.0
        for comp in range(3):
            w = 1.0
            dead = False
            for ax in range(3):
                if ax == comp:
                    # cosine factor: full length when the index is zero
                    w *= lengths[ax] if ti[ax] == 0 else 0.5 * lengths[ax]
                else:
                    if ti[ax] == 0:
                        dead = True
                        break
                    w *= 0.5 * lengths[ax]
            if dead:
                continue
            total += ei.amplitude[comp] * ej.amplitude[comp] * w
        return self.geometry.eps_b * total


def build_pec_box_modes(geometry, n_max, const=None):
    """All transverse box modes with max(m, n, p) <= n_max.

    Mode count is 2 n_max^3 + 3 n_max^2 (two branches for all-nonzero
    triples, one for exactly-one-zero triples).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    const = const or Constants.natural()
    eps_b = geometry.eps_b
    lengths = geometry.lengths
    vol = geometry.volume
    entries = []
    for m in range(n_max + 1):
        for n in range(n_max + 1):
            for p in range(n_max + 1):
                n_zero = (m == 0) + (n == 0) + (p == 0)
                if n_zero >= 2:
                    continue
                kvec = np.pi * np.array([m, n, p]) / lengths
                knorm = float(np.linalg.norm(kvec))
                omega = const.c * knorm / np.sqrt(eps_b)
                if n_zero == 1:
                    axis = (m, n, p).index(0)
                    amp = np.zeros(3)
                    amp[axis] = 2.0 / np.sqrt(eps_b * vol)
                    entries.append(
                        ModeEntry(ModeIndex(m, n, p, 1), omega, kvec, amp, geometry))
                else:
                    kpar = float(np.hypot(kvec[0], kvec[1]))
                    a1 = np.array([kvec[1], -kvec[0], 0.0]) / kpar
                    a2 = np.array([
                        kvec[2] * kvec[0],
                        kvec[2] * kvec[1],
                        -kpar**2,
                    ]) / (knorm * kpar)
                    scale = np.sqrt(8.0 / (eps_b * vol))
                    entries.append(
                        ModeEntry(ModeIndex(m, n, p, 1), omega, kvec, a1 * scale, geometry))
                    entries.append(
                        ModeEntry(ModeIndex(m, n, p, 2), omega, kvec, a2 * scale, geometry))
    return ModeSet(geometry, entries, n_max, const)


def plane_wave_mode(k_vector, s, volume):
    """Normalized plane-wave mode e_{ks} exp(ik.r)/sqrt(V).

    s in {1, 2} picks the polarization; (e1, e2, k/|k|) is right-handed.
    k along +z gives e1 = x, e2 = y.
    """
    k = r3(k_vector)
    knorm = float(np.linalg.norm(k))
    if knorm == 0.0:
        raise ValueError("k must be nonzero")
    if volume <= 0.0:
        raise ValueError("volume must be positive")
    if s not in (1, 2):
        raise ValueError("s must be 1 or 2")
    khat = k / knorm
    if abs(khat[0]) < 1e-14 and abs(khat[1]) < 1e-14:
        e1 = np.array([1.0, 0.0, 0.0])
    else:
        e1 = np.cross(np.array([0.0, 0.0, 1.0]), khat)
        e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(khat, e1)
    pol = e1 if s == 1 else e2

    def mode(r):
        r = np.asarray(r, dtype=float)
        phase = np.exp(1j * (r @ k))
        return np.multiply.outer(phase, pol) / np.sqrt(volume)

    return mode


def coupling_constant(atom, entry, const=None):
    """Atom-mode coupling g = i sqrt(hbar w_k / 2 eps0) (d . E_k(r0))."""
    const = const or Constants.natural()
    if entry.geometry is not None and not entry.geometry.contains(atom.position):
        raise ValueError("atom position outside the cavity")
    overlap = float(atom.dipole @ entry.field(atom.position))
    return 1j * np.sqrt(const.hbar * entry.omega / (2.0 * const.eps0)) * overlap


def coupling_strengths(modeset, atom):
    """|g_k|^2 / hbar^2 for every mode, vectorized.

    This is the discrete spectral weight entering memory kernels and
    spectral densities.  Raises if the atom sits outside the box.
    """
    if not modeset.geometry.contains(atom.position):
        raise ValueError("atom position outside the cavity")
    const = modeset.const
    fields = modeset.eval_all(atom.position)
    proj = fields @ atom.dipole
    return modeset.omegas * proj**2 / (2.0 * const.hbar * const.eps0)
