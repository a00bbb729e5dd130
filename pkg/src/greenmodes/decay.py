"""Excited-state decay with memory.

The amplitude of an initially excited atom obeys
dc/dt = int_0^t D(t - s) c(s) ds with a stationary kernel
D(tau) = -int w(omega) exp(-i (omega - omega0) tau) d(omega),
where the weight w >= 0 is either a discrete set of mode lines or a
continuous density built from the coincidence Im G.  Both constructions
are provided, the Volterra march solves the dynamics, and the Markov
limit (rate plus shift) is extracted by the half-line tau integral.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import Constants
from .modes import coupling_strengths
from .numerics import (
    Grid1D,
    QuadratureSpec,
    fourier_table,
    integrate_adaptive,
    integrate_pv,
    volterra_march,
)


@dataclass
class MemoryKernel:
    """Stationary decay kernel D(tau) with its frequency-domain origin.

    Discrete: weights[i] at omegas[i] (units of rate squared).
    Continuous: weight(omega) density on [0, omega_max].  Exactly one of
    the two representations is populated.  provenance records which
    construction route produced it ('nmqed', 'lna', 'custom').
    """

    omega0: float
    provenance: str = "custom"
    omegas: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None
    weight: Optional[object] = None  # callable w(omega), vectorized
    omega_max: float = 0.0
    edge_hints: Optional[np.ndarray] = None  # sharp features of w(omega)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.omega0 <= 0.0:
            raise ValueError("omega0 must be positive")
        if (self.weight is None) == (self.weights is None):
            raise ValueError("exactly one of weights / weight must be given")
        if self.weights is not None:
            self.omegas = np.asarray(self.omegas, dtype=float)
            self.weights = np.asarray(self.weights, dtype=float)
            if self.omegas.shape != self.weights.shape or self.omegas.ndim != 1:
                raise ValueError("omegas and weights must be matching 1-d arrays")
            if self.omegas.size == 0:
                raise ValueError("empty mode list")
            if np.any(self.weights < 0.0):
                raise ValueError("negative spectral weight")
        else:
            if self.omega_max <= 0.0:
                raise ValueError("continuous kernel needs omega_max > 0")

    @property
    def is_discrete(self):
        return self.weights is not None

    def total_weight(self, spec=None):
        """Sum or integral of w; this is -D(0) and the short-time
        curvature of the population."""
        if self.is_discrete:
            return float(np.sum(self.weights))
        spec = spec or QuadratureSpec()
        val, _ = integrate_adaptive(
            lambda w: np.asarray(self.weight(w), dtype=float),
            0.0, self.omega_max, spec)
        return float(val)

    def table(self, taus):
        """D on an array of delays, vectorized over the whole grid."""
        taus = np.asarray(taus, dtype=float)
        if self.is_discrete:
            detun = self.omegas - self.omega0
            # chunked so the tau x mode phase matrix stays small
            flat = taus.ravel()
            res = np.empty(flat.shape, dtype=complex)
            for i in range(0, flat.size, 4096):
                chunk = flat[i:i + 4096]
                res[i:i + 4096] = np.exp(
                    -1j * np.outer(chunk, detun)) @ self.weights
            return -res.reshape(taus.shape)
        return -fourier_table(self.weight, 0.0, self.omega_max, taus,
                              rotation=self.omega0,
                              edge_hints=self.edge_hints).reshape(taus.shape)

    def __call__(self, tau):
        return complex(self.table(np.array([float(tau)]))[0])


def resonance_edge_hints(omegas, eta, omega_max):
    """Panel edges bracketing softened lines at omegas with half width
    ~eta, geometric on both sides so a fixed Gauss rule resolves the core
    and the algebraic tails."""
    uniq = np.unique(np.round(np.asarray(omegas, dtype=float), 9))
    offs = eta * np.array(
        [-1000.0, -200.0, -50.0, -10.0, -3.0, 0.0, 3.0, 10.0, 50.0, 200.0, 1000.0])
    edges = (uniq[:, None] + offs[None, :]).ravel()
    return edges[(edges > 0.0) & (edges < omega_max)]


def kernel_nmqed(modeset, atom):
    """Discrete kernel from a closed-cavity mode set: one line per mode
    at weight |g|^2 / hbar^2."""
    if len(modeset) == 0:
        raise ValueError("empty mode set")
    weights = coupling_strengths(modeset, atom)
    return MemoryKernel(
        omega0=atom.omega0,
        provenance="nmqed",
        omegas=modeset.omegas.copy(),
        weights=weights,
        metadata={"n_modes": len(modeset)},
    )


def _lna_mode_masses(modeset, atom, const):
    """Per-mode frequency-integrated weight of the noise-current kernel
    in the vanishing-softening limit.

    Each softened mode line integrates to
    (1 / hbar pi eps0) (w_k^2 / c^2) (gamma . E_k)^2 c^2 (pi / 2 w_k);
    the arithmetic is kept in this order on purpose so the route stays
    distinct from the |g|^2/hbar^2 chain it must agree with.
    """
    fields = modeset.eval_all(atom.position)
    proj = (fields @ atom.dipole) ** 2
    om = modeset.omegas
    return (1.0 / (const.hbar * np.pi * const.eps0)) * (
        om**2 / const.c**2) * proj * const.c**2 * (np.pi / (2.0 * om))


def kernel_lna(green, atom, spec=None, omega_max=None, analytic_limit=False):
    """Kernel from the coincidence Im G of a Green backend.

    w(omega) = (1 / hbar pi eps0) (omega^2 / c^2) gamma . Im G(r0, r0) . gamma.

    analytic_limit=True requires a cavity mode-sum backend and collapses
    each softened line onto its vanishing-width mass, producing a
    discrete kernel through noise-current arithmetic; this is the path
    that must match kernel_nmqed line by line.  Otherwise the kernel is
    continuous, tabulated from im_coincidence, and a lossy medium at the
    atom position raises through the backend.
    """
    spec = spec or QuadratureSpec()
    const = (getattr(green, "const", None)
             or getattr(getattr(green, "modeset", None), "const", None)
             or Constants.natural())

    if analytic_limit:
        modeset = getattr(green, "modeset", None)
        if modeset is None:
            raise ValueError("analytic_limit needs a cavity mode-sum backend")
        if len(modeset) == 0:
            raise ValueError("empty mode set")
        masses = _lna_mode_masses(modeset, atom, const)
        return MemoryKernel(
            omega0=atom.omega0,
            provenance="lna",
            omegas=modeset.omegas.copy(),
            weights=masses,
            metadata={"n_modes": len(modeset), "path": "analytic-limit"},
        )

    if omega_max is None:
        omega_max = spec.omega_max
    gamma = atom.dipole
    r0 = atom.position
    pref = 1.0 / (const.hbar * np.pi * const.eps0)

    def weight(omega):
        omega = np.atleast_1d(omega)
        out = np.empty(omega.shape, dtype=float)
        for i, w in enumerate(omega):
            img = green.im_coincidence(r0, float(w))
            out[i] = pref * (w**2 / const.c**2) * float(gamma @ img @ gamma)
        return out

    # a softened mode-sum backend has narrow lines the tabulation must
    # not step over
    hints = None
    modeset = getattr(green, "modeset", None)
    eta = getattr(green, "eta", 0.0)
    if modeset is not None and eta > 0.0:
        hints = resonance_edge_hints(modeset.omegas, eta, float(omega_max))

    return MemoryKernel(
        omega0=atom.omega0,
        provenance="lna",
        weight=weight,
        omega_max=float(omega_max),
        edge_hints=hints,
        metadata={"omega_max": float(omega_max)},
    )


@dataclass
class DecayResult:
    grid: Grid1D
    c_es: np.ndarray
    population: np.ndarray
    markov_fit: Optional[tuple] = None

    @property
    def times(self):
        return self.grid.points


def fit_rate_and_shift(times, c_es, lo_frac=0.35, hi_frac=0.95):
    """Least-squares exponential fit on a window of the trajectory.

    Returns (rate, shift): population ~ exp(-rate t), phase ~ shift t.
    """
    times = np.asarray(times)
    n = times.size
    lo = int(lo_frac * (n - 1))
    hi = max(int(hi_frac * (n - 1)), lo + 2)
    t = times[lo:hi]
    pop = np.abs(c_es[lo:hi]) ** 2
    if np.any(pop <= 0.0):
        raise ValueError("population touches zero inside the fit window")
    slope, _ = np.polyfit(t, np.log(pop), 1)
    phase = np.unwrap(np.angle(c_es[lo:hi]))
    dslope, _ = np.polyfit(t, phase, 1)
    return -slope, dslope


def solve_volterra(kernel, t_max, n_steps, fit_window=None):
    """March the memory equation from c(0) = 1 on a uniform grid.

    fit_window, optional (lo_frac, hi_frac), attaches an exponential fit
    over that fraction of the trajectory as markov_fit.
    """
    if n_steps < 10:
        raise ValueError("n_steps must be >= 10")
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    grid = Grid1D(0.0, float(t_max), int(n_steps) + 1)
    ktab = kernel.table(grid.points)
    try:
        y = volterra_march(ktab, grid.h)
    except RuntimeError as exc:
        raise RuntimeError(
            "volterra march unstable (%s); reduce the step t_max/n_steps"
            % exc) from None
    fit = None
    if fit_window is not None:
        fit = fit_rate_and_shift(grid.points, y, *fit_window)
    return DecayResult(grid, y, np.abs(y) ** 2, fit)


def markov_rate_and_shift(kernel, atom=None, spec=None):
    """(Gamma, delta) of the Markov limit c(t) = exp(-Gamma t / 2 + i delta t).

    Gamma = 2 pi w(omega0); delta = PV int w(omega) / (omega - omega0).
    Discrete kernels: any line exactly at omega0 must carry zero weight
    (otherwise there is no Markov limit), the shift is the plain sum over
    detuned lines.  atom, when given, only cross-checks omega0.
    """
    spec = spec or QuadratureSpec()
    omega0 = kernel.omega0
    if atom is not None and abs(atom.omega0 - omega0) > 1e-12 * omega0:
        raise ValueError("atom and kernel disagree on omega0")

    if kernel.is_discrete:
        detun = kernel.omegas - omega0
        resonant = np.abs(detun) <= 1e-12 * omega0
        if np.any(kernel.weights[resonant] > 0.0):
            raise ValueError(
                "discrete line with finite weight exactly at omega0; "
                "the Markov limit does not exist"
            )
        keep = ~resonant
        gamma = 0.0
        delta = float(np.sum(kernel.weights[keep] / detun[keep]))
        return gamma, delta

    w0 = float(np.atleast_1d(kernel.weight(np.array([omega0])))[0])
    gamma = 2.0 * np.pi * w0
    if not (0.0 < omega0 < kernel.omega_max):
        raise ValueError("omega0 must lie inside (0, omega_max) for the PV shift")

    def f(w):
        return np.asarray(kernel.weight(w), dtype=float) / (w - omega0)

    delta, _ = integrate_pv(f, omega0, 0.0, kernel.omega_max, spec)
    return gamma, float(delta)
