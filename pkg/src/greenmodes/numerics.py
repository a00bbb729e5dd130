"""Shared numerical kernels: adaptive quadrature, principal values, panel
Gauss rules, and the Volterra history march.

All routines are deterministic: fixed node sets, fixed subdivision order,
no randomness and no environment-dependent branching, so repeated runs
produce bitwise identical results.  Integrands are evaluated vectorized:
f(x) receives a 1-d array of nodes and must return an array whose leading
axis matches x; trailing axes (tensor components) are integrated
componentwise with the error taken as the max over components.
"""

import warnings
from dataclasses import dataclass

import numpy as np

try:
    from . import _volterra as _volterra_impl

    HAVE_COMPILED_VOLTERRA = True
except ImportError:
    from . import _volterra_py as _volterra_impl

    HAVE_COMPILED_VOLTERRA = False


class ConvergenceError(RuntimeError):
    """Quadrature failed to reach the requested tolerance.

    Carries the best available estimate and the error bound so callers can
    decide whether to degrade gracefully or abort.
    """

    def __init__(self, message, estimate=None, error_bound=None):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class TailTruncationWarning(UserWarning):
    """A half-infinite integral was cut at finite range and the integrand
    was not yet negligible there."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Tolerances and truncation knobs shared by the integral routines.

    omega_max truncates frequency integrals (in units of the scenario
    reference frequency), pv_excision is the starting half-width for
    principal-value excision, eta softens mode-sum poles.
    """

    abs_tol: float = 1e-10
    rel_tol: float = 1e-10
    max_subdivisions: int = 4000
    omega_max: float = 20.0
    pv_excision: float = 0.25
    eta: float = 1e-3

    def __post_init__(self):
        if self.abs_tol <= 0.0 or self.rel_tol <= 0.0:
            raise ValueError("tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")
        if self.omega_max <= 0.0:
            raise ValueError("omega_max must be positive")
        if self.pv_excision <= 0.0:
            raise ValueError("pv_excision must be positive")
        if self.eta < 0.0:
            raise ValueError("eta must be >= 0")


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid over [start, stop] with n_points nodes."""

    start: float
    stop: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 2:
            raise ValueError("need at least 2 grid points")
        if not self.stop > self.start:
            raise ValueError("need stop > start")

    @property
    def h(self):
        return (self.stop - self.start) / (self.n_points - 1)

    @property
    def points(self):
        return np.linspace(self.start, self.stop, self.n_points)


# 15-point Kronrod pair (QUADPACK dqk15 constants).
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# sorted nodes on [-1, 1] and matching weight vectors
_NODES = np.concatenate([-_XGK[:7], [0.0], _XGK[:7][::-1]])
_W15 = np.concatenate([_WGK[:7], [_WGK[7]], _WGK[:7][::-1]])
_W7 = np.zeros(15)
_W7[1:7:2] = _WG[:3]
_W7[7] = _WG[3]
_W7[9:15:2] = _WG[:3][::-1]


def _gk15_panel(f, a, b):
    c = 0.5 * (a + b)
    hw = 0.5 * (b - a)
    fx = np.asarray(f(c + hw * _NODES))
    gk = hw * np.tensordot(_W15, fx, axes=(0, 0))
    g7 = hw * np.tensordot(_W7, fx, axes=(0, 0))
    err = float(np.max(np.abs(gk - g7)))
    return gk, err


def integrate_adaptive(f, a, b, spec=None):
    """Adaptive Gauss-Kronrod 15(7) integration of f over [a, b].

    Depth-first bisection with a per-interval tolerance budget proportional
    to interval length.  Returns (value, error_bound); raises
    ConvergenceError (with .estimate / .error_bound attached) when the
    subdivision budget runs out before the tolerance is met.
    """
    spec = spec or QuadratureSpec()
    a = float(a)
    b = float(b)
    if b <= a:
        raise ValueError("integrate_adaptive needs b > a")
    val0, err0 = _gk15_panel(f, a, b)
    scale = max(float(np.max(np.abs(val0))), 1e-300)
    tol = spec.abs_tol + spec.rel_tol * scale
    if err0 <= tol:
        return val0, err0

    total = np.zeros_like(val0)
    total_err = 0.0
    n_panels = 1
    # stack entries: (lo, hi, panel value, panel error); LIFO keeps the
    # refinement order independent of intermediate results
    stack = [(a, b, val0, err0)]
    span = b - a
    while stack:
        lo, hi, val, err = stack.pop()
        local_tol = tol * (hi - lo) / span
        width_floor = (hi - lo) <= 1e-14 * (abs(lo) + abs(hi) + 1.0)
        if err <= local_tol or width_floor:
            total = total + val
            total_err += err
            continue
        if n_panels >= spec.max_subdivisions:
            est = total + val + sum(e[2] for e in stack)
            bound = total_err + err + sum(e[3] for e in stack)
            raise ConvergenceError(
                "quadrature did not converge in %d panels (err ~ %.3e)"
                % (n_panels, bound),
                estimate=est,
                error_bound=bound,
            )
        mid = 0.5 * (lo + hi)
        left = _gk15_panel(f, lo, mid)
        right = _gk15_panel(f, mid, hi)
        n_panels += 2
        scale = max(scale, float(np.max(np.abs(total))))
        tol = spec.abs_tol + spec.rel_tol * scale
        stack.append((mid, hi) + right)
        stack.append((lo, mid) + left)
    return total, total_err


def integrate_pv(f, pole, a, b, spec=None, excision=None):
    """Cauchy principal value of f over [a, b] with a simple pole inside.

    f is the complete integrand including the singular factor.  Symmetric
    excision at shrinking half-widths h, h/2, ..., h/16 leaves only odd
    powers of h in the error; three Richardson stages remove the h, h^3
    and h^5 terms.  Returns (value, error_bound).
    """
    spec = spec or QuadratureSpec()
    pole = float(pole)
    if not (a < pole < b):
        raise ValueError("pole must lie strictly inside (a, b)")
    room = min(pole - a, b - pole)
    h0 = excision if excision is not None else min(spec.pv_excision, room / 8.0)
    if h0 <= 0.0 or h0 >= room:
        raise ValueError("excision half-width out of range")

    vals = []
    errs = 0.0
    for lvl in range(5):
        h = h0 / 2**lvl
        vl, el = integrate_adaptive(f, a, pole - h, spec)
        vr, er = integrate_adaptive(f, pole + h, b, spec)
        vals.append(vl + vr)
        errs += el + er
    r1 = [2.0 * vals[i + 1] - vals[i] for i in range(4)]
    r2 = [(8.0 * r1[i + 1] - r1[i]) / 7.0 for i in range(3)]
    r3 = [(32.0 * r2[i + 1] - r2[i]) / 31.0 for i in range(2)]
    value = r3[1]
    err = float(np.max(np.abs(r3[1] - r3[0]))) + errs
    return value, err


def sommerfeld_radial(f, k, k_max, spec=None):
    """Integrate a radial spectral integrand over k_par in [0, k_max].

    Splits at Re(k), the branch point of k_perp = sqrt(k^2 - k_par^2), so
    the inverse-square-root behavior there is an endpoint singularity the
    adaptive rule resolves.  Warns when the integrand has not decayed at
    the cutoff.  Returns (value, error_bound).
    """
    spec = spec or QuadratureSpec()
    k = complex(k)
    if k.imag < 0.0:
        raise ValueError("need Im k >= 0")
    k_max = float(k_max)
    if not k_max > abs(k.real):
        raise ValueError("k_max must exceed |Re k|")
    split = abs(k.real)
    value = np.array(0.0, dtype=complex)
    err = 0.0
    edges = [0.0] + ([split] if split > 0.0 else []) + [k_max]
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = integrate_adaptive(f, lo, hi, spec)
        value = value + v
        err += e
    tail = float(np.max(np.abs(f(np.array([k_max]))))) * k_max
    scale = max(float(np.max(np.abs(value))), 1e-300)
    if tail > max(spec.rel_tol * scale, spec.abs_tol):
        warnings.warn(
            "integrand not negligible at k_max (tail estimate %.2e "
            "vs result scale %.2e); increase k_max" % (tail, scale),
            TailTruncationWarning,
            stacklevel=2,
        )
    return value, err


def gauss_panels(f, edges, n=24):
    """Fixed-order Legendre-Gauss rule applied panel by panel.

    edges is an increasing array of panel boundaries.  All panels are
    evaluated in a single vectorized call.  No error estimate; use this
    where the panel layout already controls accuracy.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or edges.size < 2:
        raise ValueError("edges must be a 1-d array with >= 2 entries")
    if np.any(np.diff(edges) <= 0.0):
        raise ValueError("edges must be strictly increasing")
    x, w = np.polynomial.legendre.leggauss(n)
    lo = edges[:-1][:, None]
    hw = 0.5 * np.diff(edges)[:, None]
    nodes = lo + hw * (x[None, :] + 1.0)
    fx = np.asarray(f(nodes.ravel()))
    weights = (hw * w[None, :]).ravel()
    return np.tensordot(weights, fx, axes=(0, 0))


def fourier_table(weight, a, b, taus, rotation=0.0, n_gauss=24,
                  max_phase=18.0, block=4096, edge_hints=None):
    """int_a^b w(omega) exp(-i (omega - rotation) tau) d(omega) for every tau.

    Panel Gauss with the panel width chosen so the largest |tau| sees at
    most max_phase radians of phase per panel, which keeps the fixed rule
    accurate for all rows at once.  edge_hints inserts extra panel edges
    where the weight has sharp features (narrow resonances) that the
    uniform phase-bounded layout would step over.  The tau x node phase
    matrix is processed in blocks to bound memory.
    """
    taus = np.atleast_1d(np.asarray(taus, dtype=float))
    if b <= a:
        raise ValueError("need b > a")
    tau_scale = float(np.max(np.abs(taus)))
    width = (b - a) if tau_scale == 0.0 else max_phase / tau_scale
    n_panels = max(int(np.ceil((b - a) / width)), 4)
    edges = np.linspace(a, b, n_panels + 1)
    if edge_hints is not None:
        hints = np.asarray(edge_hints, dtype=float)
        hints = hints[(hints > a) & (hints < b)]
        edges = np.unique(np.concatenate([edges, hints]))
        # collapse near-duplicate edges so panel widths stay positive
        keep = np.concatenate([[True], np.diff(edges) > 1e-13 * (b - a)])
        edges = edges[keep]
    x, w = np.polynomial.legendre.leggauss(n_gauss)
    lo = edges[:-1][:, None]
    hw = 0.5 * np.diff(edges)[:, None]
    nodes = (lo + hw * (x[None, :] + 1.0)).ravel()
    wts = (hw * w[None, :]).ravel()
    fw = wts * np.asarray(weight(nodes), dtype=complex)
    shifted = nodes - rotation
    out = np.empty(taus.shape, dtype=complex)
    for i in range(0, taus.size, block):
        chunk = taus[i:i + block]
        out[i:i + block] = np.exp(-1j * np.outer(chunk, shifted)) @ fw
    return out


def volterra_march(kernel, h, y0=1.0 + 0.0j, blowup=10.0, backend=None):
    """March y'(t) = int_0^t K(t - s) y(s) ds on a uniform grid.

    kernel holds K(i h) for i = 0..N; returns y at the same nodes.
    Product-trapezoid predictor-corrector, second order in h.  backend
    selects 'compiled' or 'python' explicitly (default: compiled when
    available).  Raises RuntimeError if |y| exceeds blowup, which almost
    always means the step is too large for the kernel bandwidth.
    """
    kernel = np.ascontiguousarray(kernel, dtype=complex)
    if kernel.ndim != 1 or kernel.size < 2:
        raise ValueError("kernel must be a 1-d array with >= 2 samples")
    if backend is None:
        impl = _volterra_impl
    elif backend == "python":
        from . import _volterra_py as impl
    elif backend == "compiled":
        if not HAVE_COMPILED_VOLTERRA:
            raise RuntimeError("compiled volterra backend not available")
        impl = _volterra_impl
    else:
        raise ValueError("backend must be None, 'python' or 'compiled'")
    return impl.march(kernel, float(h), complex(y0), float(blowup))
