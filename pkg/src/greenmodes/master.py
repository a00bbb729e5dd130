"""Driven two-level dynamics in a structured thermal bath.

The reduced density operator evolves under a memory-integral equation
whose coefficients are time integrals of two bath correlators,

    C_up(tau) = S[ J(w) (n(w)+1) exp(-i (w - w_d) tau) ],
    C_dn(tau) = S[ J(w)  n(w)    exp(-i (w - w_d) tau) ],

with S either a mode sum (discrete density) or a frequency integral
(continuous density) and w_d the transition frequency.  Two modes are
shipped: 'finite_memory' keeps the literal int_0^t coefficients, and
'markov' extends them to infinity, which turns the equation into a
constant-rate Lindblad form with rates 2 pi J(w_d)(n+1), 2 pi J(w_d) n
and a principal-value level shift.

Basis convention: index 0 is the excited state, index 1 the ground state.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .constants import Constants, ThermalState, thermal_occupation
from .decay import resonance_edge_hints
from .modes import coupling_strengths
from .numerics import (
    Grid1D,
    QuadratureSpec,
    fourier_table,
    integrate_pv,
)


@dataclass
class SpectralDensity:
    """Frequency-resolved coupling J, discrete lines or continuous density.

    temperature rides along so bath correlators can be built without
    re-threading a thermal state through every call site.
    """

    provenance: str = "custom"
    omegas: Optional[np.ndarray] = None
    values: Optional[np.ndarray] = None
    sampler: Optional[object] = None  # callable J(omega), vectorized
    omega_max: float = 0.0
    temperature: Optional[ThermalState] = None
    edge_hints: Optional[np.ndarray] = None  # sharp features of J(omega)
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if (self.sampler is None) == (self.values is None):
            raise ValueError("exactly one of values / sampler must be given")
        if self.values is not None:
            self.omegas = np.asarray(self.omegas, dtype=float)
            self.values = np.asarray(self.values, dtype=float)
            if self.omegas.shape != self.values.shape or self.omegas.ndim != 1:
                raise ValueError("omegas and values must be matching 1-d arrays")
            if self.omegas.size == 0:
                raise ValueError("empty line list")
            if np.any(self.omegas <= 0.0):
                raise ValueError("line frequencies must be positive")
            if np.any(np.diff(self.omegas) < 0.0):
                raise ValueError("line frequencies must be sorted")
            if np.any(self.values < 0.0):
                raise ValueError("negative spectral density")
        else:
            if self.omega_max <= 0.0:
                raise ValueError("continuous density needs omega_max > 0")
        if self.temperature is None:
            self.temperature = ThermalState(0.0, Constants.natural())

    @property
    def is_discrete(self):
        return self.values is not None

    def value(self, omega):
        if self.is_discrete:
            raise ValueError("discrete density has no pointwise value")
        return np.asarray(self.sampler(np.atleast_1d(omega)), dtype=float)

    def occupation(self, omega):
        return self.temperature.occupation(omega)


def spectral_density_nmqed(modeset, atom, temperature=None):
    """One line per cavity mode at J_k = |g_k|^2 / hbar^2."""
    if len(modeset) == 0:
        raise ValueError("empty mode set")
    order = np.argsort(modeset.omegas, kind="stable")
    values = coupling_strengths(modeset, atom)[order]
    return SpectralDensity(
        provenance="nmqed",
        omegas=modeset.omegas[order].copy(),
        values=values,
        temperature=temperature,
        metadata={"n_modes": len(modeset)},
    )


def _lna_line_masses(modeset, atom, const):
    """Noise-current arithmetic for the frequency-integrated mass of each
    softened line in the vanishing-width limit; numerically equal to
    |g|^2 / hbar^2 through a different chain of factors."""
    fields = modeset.eval_all(atom.position)
    proj = (fields @ atom.dipole) ** 2
    om = modeset.omegas
    return (om**2 / const.c**2) * proj * const.c**2 * np.pi / (
        2.0 * om * np.pi * const.hbar * const.eps0)


def spectral_density_lna(green, atom, spec=None, omega_max=None,
                         temperature=None, analytic_limit=False):
    """J(omega) = (omega^2/c^2) gamma . Im G(r0, r0, omega) . gamma / (pi hbar eps0).

    Continuous by default, sampled through the backend's coincidence
    Im G.  analytic_limit=True needs a cavity mode-sum backend and
    returns the discrete line masses instead (the vanishing-softening
    limit taken analytically, line by line).
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
        order = np.argsort(modeset.omegas, kind="stable")
        masses = _lna_line_masses(modeset, atom, const)[order]
        return SpectralDensity(
            provenance="lna",
            omegas=modeset.omegas[order].copy(),
            values=masses,
            temperature=temperature,
            metadata={"n_modes": len(modeset), "path": "analytic-limit"},
        )

    if omega_max is None:
        omega_max = spec.omega_max
    gamma = atom.dipole
    r0 = atom.position
    pref = 1.0 / (np.pi * const.hbar * const.eps0)

    def sampler(omega):
        omega = np.atleast_1d(omega)
        out = np.empty(omega.shape, dtype=float)
        for i, w in enumerate(omega):
            img = green.im_coincidence(r0, float(w))
            out[i] = pref * (w**2 / const.c**2) * float(gamma @ img @ gamma)
        return out

    hints = None
    modeset = getattr(green, "modeset", None)
    eta = getattr(green, "eta", 0.0)
    if modeset is not None and eta > 0.0:
        hints = resonance_edge_hints(modeset.omegas, eta, float(omega_max))

    return SpectralDensity(
        provenance="lna",
        sampler=sampler,
        omega_max=float(omega_max),
        temperature=temperature,
        edge_hints=hints,
        metadata={"omega_max": float(omega_max)},
    )


def kernel_equivalence_check(discrete, continuous, taus, spec=None):
    """max_tau | sum_k J_k e^{-i w_k tau} - int J(w) e^{-i w tau} dw |.

    The discrete side must be a line density; the continuous side may
    itself be discrete when it was built through the analytic
    vanishing-softening path, in which case both transforms are plain
    sums over the same line positions.
    """
    if not discrete.is_discrete:
        raise ValueError("first argument must be a discrete density")
    taus = np.asarray(taus, dtype=float)

    def line_transform(density):
        return np.exp(-1j * np.outer(taus, density.omegas)) @ density.values

    s_disc = line_transform(discrete)
    if continuous.is_discrete:
        if continuous.omegas.shape != discrete.omegas.shape or not np.allclose(
                continuous.omegas, discrete.omegas, rtol=1e-9, atol=0.0):
            raise ValueError("densities come from different mode data")
        s_cont = line_transform(continuous)
    else:
        if continuous.omega_max <= discrete.omegas[-1]:
            raise ValueError(
                "continuous window ends below the highest discrete line")
        s_cont = fourier_table(continuous.sampler, 0.0, continuous.omega_max,
                               taus, rotation=0.0,
                               edge_hints=continuous.edge_hints)
    return float(np.max(np.abs(s_disc - s_cont)))


# ---------------------------------------------------------------------------
# bath correlators and the time march


@dataclass
class BathCorrelations:
    """C_up / C_dn sampled on a uniform tau grid (step h/2 of the solver)."""

    taus: np.ndarray
    c_up: np.ndarray
    c_dn: np.ndarray
    omega_d: float

    def cumulative(self):
        """k1(t), k2(t) = int_0^t C(tau) d(tau), trapezoid on the grid."""
        h = self.taus[1] - self.taus[0]

        def cum(c):
            out = np.empty_like(c)
            out[0] = 0.0
            np.cumsum(0.5 * h * (c[1:] + c[:-1]), out=out[1:])
            return out

        return cum(self.c_up), cum(self.c_dn)


def bath_correlations(density, omega_d, taus):
    """Correlator tables for a density at transition frequency omega_d."""
    taus = np.asarray(taus, dtype=float)
    if density.is_discrete:
        nbar = thermal_occupation(
            density.omegas, density.temperature.temperature,
            density.temperature.const)
        phases = np.exp(-1j * np.outer(taus, density.omegas - omega_d))
        c_up = phases @ (density.values * (nbar + 1.0))
        c_dn = phases @ (density.values * nbar)
    else:
        tstate = density.temperature

        def w_up(w):
            return density.value(w) * (tstate.occupation(w) + 1.0)

        c_up = fourier_table(w_up, 0.0, density.omega_max, taus,
                             rotation=omega_d, edge_hints=density.edge_hints)
        if tstate.temperature == 0.0:
            c_dn = np.zeros_like(c_up)
        else:
            def w_dn(w):
                return density.value(w) * tstate.occupation(w)

            c_dn = fourier_table(w_dn, 0.0, density.omega_max, taus,
                                 rotation=omega_d,
                                 edge_hints=density.edge_hints)
    return BathCorrelations(taus, c_up, c_dn, float(omega_d))


def markov_coefficients(density, omega_d, spec=None):
    """Half-line tau integrals of the correlators: (k1, k2) constants.

    k1 = pi J(w_d)(n(w_d)+1) - i PV int J(w)(n(w)+1)/(w - w_d) dw, and the
    same with n alone for k2.  Discrete densities get zero delta-part
    unless a line sits exactly at omega_d with finite weight (error).
    """
    spec = spec or QuadratureSpec()
    if density.is_discrete:
        detun = density.omegas - omega_d
        resonant = np.abs(detun) <= 1e-12 * omega_d
        if np.any(density.values[resonant] > 0.0):
            raise ValueError(
                "discrete line with finite weight exactly at omega_d; "
                "the Markov limit does not exist")
        keep = ~resonant
        nbar = thermal_occupation(
            density.omegas, density.temperature.temperature,
            density.temperature.const)
        up = density.values * (nbar + 1.0)
        dn = density.values * nbar
        s_up = float(np.sum(up[keep] / detun[keep]))
        s_dn = float(np.sum(dn[keep] / detun[keep]))
        return -1j * s_up, -1j * s_dn

    if not (0.0 < omega_d < density.omega_max):
        raise ValueError("omega_d must lie inside (0, omega_max)")
    tstate = density.temperature
    j_d = float(density.value(omega_d)[0])
    n_d = float(thermal_occupation(omega_d, tstate.temperature, tstate.const))

    def f_up(w):
        return density.value(w) * (tstate.occupation(w) + 1.0) / (w - omega_d)

    s_up, _ = integrate_pv(f_up, omega_d, 0.0, density.omega_max, spec)
    if tstate.temperature == 0.0:
        s_dn = 0.0
    else:
        def f_dn(w):
            return density.value(w) * tstate.occupation(w) / (w - omega_d)

        s_dn, _ = integrate_pv(f_dn, omega_d, 0.0, density.omega_max, spec)

    k1 = np.pi * j_d * (n_d + 1.0) - 1j * float(s_up)
    k2 = np.pi * j_d * n_d - 1j * float(s_dn)
    return complex(k1), complex(k2)


def check_density_matrix(rho, herm_tol=1e-10, trace_tol=1e-10, eig_floor=-1e-8):
    """Validate a 2x2 state: Hermitian, unit trace, nonnegative spectrum.

    Returns the offending description or None.
    """
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        return "shape %r is not (2, 2)" % (rho.shape,)
    if np.max(np.abs(rho - rho.conj().T)) > herm_tol:
        return "not Hermitian"
    if abs(np.trace(rho).real - 1.0) > trace_tol or abs(np.trace(rho).imag) > trace_tol:
        return "trace differs from 1"
    if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < eig_floor:
        return "negative eigenvalue"
    return None


def _hamiltonian_over_hbar(atom):
    """Rotating-frame coherent part divided by hbar: detuning on the
    excited level plus the drive in the off-diagonals.  No drive means
    the atom's own frame: both entries zero."""
    if atom.drive is None:
        det = 0.0
        rabi = 0.0
    else:
        det = atom.omega0 - atom.drive.omega_L
        rabi = atom.drive.rabi
    return np.array([[det, 0.5 * rabi], [0.5 * rabi, 0.0]], dtype=complex)


def _rhs(rho, hmat, k1, k2):
    out = -1j * (hmat @ rho - rho @ hmat)
    g1 = k1.real * 2.0
    g2 = k2.real * 2.0
    out[0, 0] += -g1 * rho[0, 0] + g2 * rho[1, 1]
    out[1, 1] += g1 * rho[0, 0] - g2 * rho[1, 1]
    out[0, 1] += -(k1 + np.conj(k2)) * rho[0, 1]
    out[1, 0] += -(np.conj(k1) + k2) * rho[1, 0]
    return out


def _march(rho0, hmat, k1_of, k2_of, n_steps, h):
    """Classical fourth-order fixed-step march; k*_of map a half-step
    index (0 .. 2 n_steps) to the coefficient value at that time."""
    rhos = np.empty((n_steps + 1, 2, 2), dtype=complex)
    rhos[0] = rho0
    rho = rho0.copy()
    for i in range(n_steps):
        j = 2 * i
        ka1, kb1, kc1 = k1_of(j), k1_of(j + 1), k1_of(j + 2)
        ka2, kb2, kc2 = k2_of(j), k2_of(j + 1), k2_of(j + 2)
        f1 = _rhs(rho, hmat, ka1, ka2)
        f2 = _rhs(rho + 0.5 * h * f1, hmat, kb1, kb2)
        f3 = _rhs(rho + 0.5 * h * f2, hmat, kb1, kb2)
        f4 = _rhs(rho + h * f3, hmat, kc1, kc2)
        rho = rho + (h / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
        rhos[i + 1] = rho
    return rhos


@dataclass
class MasterTrajectory:
    grid: Grid1D
    rhos: np.ndarray
    mode: str
    k1: complex = 0.0 + 0.0j
    k2: complex = 0.0 + 0.0j
    n_steps_used: int = 0
    warnings: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)

    @property
    def times(self):
        return self.grid.points

    @property
    def rho_ee(self):
        return self.rhos[:, 0, 0].real

    @property
    def rho_eg(self):
        return self.rhos[:, 0, 1]

    @property
    def decay_rate(self):
        """Downward Lindblad rate 2 Re k1 (markov mode)."""
        return 2.0 * self.k1.real

    def steady_state(self):
        """Null state of the constant generator (markov mode only)."""
        if self.mode != "markov":
            raise ValueError("steady state defined for markov mode")
        hmat = self.metadata["hmat"]
        basis = np.eye(4, dtype=complex)
        lmat = np.empty((4, 4), dtype=complex)
        for col in range(4):
            lmat[:, col] = _rhs(
                basis[:, col].reshape(2, 2).copy(), hmat, self.k1, self.k2
            ).reshape(4)
        a = np.vstack([lmat, np.array([[1.0, 0.0, 0.0, 1.0]])])
        b = np.zeros(5, dtype=complex)
        b[4] = 1.0
        sol, *_ = np.linalg.lstsq(a, b, rcond=None)
        return sol.reshape(2, 2)


def evolve_master_equation(atom, density, rho0, t_max, n_steps,
                           mode="markov", spec=None, tol=1e-8,
                           max_refinements=6):
    """Evolve the reduced state under the memory-integral equation.

    mode 'markov': coefficients frozen at their half-line values
    (constant-rate Lindblad form); trace or positivity violation raises
    with the offending time.  mode 'finite_memory': literal int_0^t
    coefficients from correlator tables; violations are recorded as
    warnings, since equations of this type may transiently leave the
    state space.  The step is halved until rho_ee changes by <= tol
    between refinements.
    """
    if mode not in ("markov", "finite_memory"):
        raise ValueError("mode must be 'markov' or 'finite_memory'")
    if n_steps < 10:
        raise ValueError("n_steps must be >= 10")
    rho0 = np.asarray(rho0, dtype=complex)
    bad = check_density_matrix(rho0)
    if bad is not None:
        raise ValueError("initial state invalid: %s" % bad)
    spec = spec or QuadratureSpec()
    omega_d = atom.omega0
    hmat = _hamiltonian_over_hbar(atom)
    warnings = []

    if mode == "markov":
        k1c, k2c = markov_coefficients(density, omega_d, spec)

    def run(n):
        h = t_max / n
        if mode == "markov":
            k1_of = lambda j: k1c  # noqa: E731
            k2_of = lambda j: k2c  # noqa: E731
        else:
            half_taus = np.linspace(0.0, t_max, 2 * n + 1)
            corr = bath_correlations(density, omega_d, half_taus)
            k1_tab, k2_tab = corr.cumulative()
            k1_of = lambda j: k1_tab[j]  # noqa: E731
            k2_of = lambda j: k2_tab[j]  # noqa: E731
        return _march(rho0, hmat, k1_of, k2_of, n, h)

    n = int(n_steps)
    rhos = run(n)
    converged = max_refinements == 0
    for _ in range(max_refinements):
        finer = run(2 * n)
        change = np.max(np.abs(finer[::2, 0, 0].real - rhos[:, 0, 0].real))
        rhos, n = finer, 2 * n
        if change <= tol:
            converged = True
            break
    if not converged:
        warnings.append(
            "step refinement stopped at n=%d with rho_ee change %.3e > %.3e"
            % (n, change, tol))

    grid = Grid1D(0.0, float(t_max), n + 1)
    tr = np.einsum("nii->n", rhos).real
    drift = np.max(np.abs(tr - 1.0))
    herm = np.max(np.abs(rhos - np.conj(np.transpose(rhos, (0, 2, 1)))))
    eigs = np.linalg.eigvalsh(0.5 * (rhos + np.conj(np.transpose(rhos, (0, 2, 1)))))
    min_eig = float(np.min(eigs))
    worst_t = grid.points[int(np.argmin(eigs.min(axis=1)))]
    if drift > 1e-6:
        msg = "trace drift %.3e at t <= %g" % (drift, t_max)
        if mode == "markov":
            raise ValueError(msg)
        warnings.append(msg)
    if min_eig < -1e-6:
        msg = "negative eigenvalue %.3e at t = %g" % (min_eig, worst_t)
        if mode == "markov":
            raise ValueError(msg)
        warnings.append(msg)

    result = MasterTrajectory(
        grid=grid,
        rhos=rhos,
        mode=mode,
        k1=complex(k1c) if mode == "markov" else 0.0 + 0.0j,
        k2=complex(k2c) if mode == "markov" else 0.0 + 0.0j,
        n_steps_used=n,
        warnings=warnings,
        metadata={
            "hmat": hmat,
            "trace_drift": float(drift),
            "hermiticity_defect": float(herm),
            "min_eigenvalue": min_eig,
        },
    )
    return result
