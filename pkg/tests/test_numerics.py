"""Quadrature engines and the Volterra substrate.

Reference values marked "frozen" were produced by an independent
scipy-based oracle (quad / quad weight='cauchy') and pasted here as
literals; the suite must not regenerate them.
"""

import numpy as np
import pytest
from scipy import special

from greenmodes import (
    HAVE_COMPILED_VOLTERRA,
    ConvergenceError,
    Grid1D,
    QuadratureSpec,
    TailTruncationWarning,
    gauss_panels,
    integrate_adaptive,
    integrate_pv,
    sommerfeld_radial,
    volterra_march,
)
from greenmodes.numerics import fourier_table

TIGHT = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-12, max_subdivisions=4000)

# frozen: int_0^5 x^2 exp(-x) sin(3x) dx
I1_REF = -1.943390739218870e-03
# frozen: PV int_0^4 exp(x/3)/(x - 1.37) dx
I2_REF = 3.433800163009548e+00
# frozen: int_0^inf exp(-x/20) J0(2x) x/(x^2+4) dx
I4_REF = 1.294393195284186e-02
# frozen: int_0^6 x^2 exp(-x) exp(-7.3 i x) dx
I5_REF = -5.278234479565019e-03 + 1.632083986227809e-02j


def test_adaptive_matches_frozen_reference():
    val, err = integrate_adaptive(
        lambda x: x**2 * np.exp(-x) * np.sin(3.0 * x), 0.0, 5.0, TIGHT)
    assert abs(val - I1_REF) < 5e-13
    assert abs(val - I1_REF) <= err + 1e-13


def test_adaptive_vector_integrand():
    # rows integrate independently in one pass
    f = lambda x: np.stack([np.sin(x), np.cos(x)], axis=-1)
    val, _ = integrate_adaptive(f, 0.0, np.pi / 2, TIGHT)
    assert np.allclose(val, [1.0, 1.0], atol=1e-12)


def test_adaptive_linearity(rng):
    # integrate(a f + b g) == a integrate(f) + b integrate(g)
    for _ in range(5):
        pf = rng.normal(size=4)
        pg = rng.normal(size=4)
        alpha, beta = rng.normal(size=2)
        f = lambda x: np.polyval(pf, x)
        g = lambda x: np.polyval(pg, x)
        both = lambda x: alpha * f(x) + beta * g(x)
        vf, _ = integrate_adaptive(f, -1.0, 2.0, TIGHT)
        vg, _ = integrate_adaptive(g, -1.0, 2.0, TIGHT)
        vb, _ = integrate_adaptive(both, -1.0, 2.0, TIGHT)
        assert abs(vb - (alpha * vf + beta * vg)) < 1e-11 * max(1.0, abs(vb))


def test_adaptive_deterministic_bitwise():
    f = lambda x: np.exp(-x) / (1.0 + 25.0 * x**2)
    v1, e1 = integrate_adaptive(f, 0.0, 10.0, TIGHT)
    v2, e2 = integrate_adaptive(f, 0.0, 10.0, TIGHT)
    assert v1 == v2 and e1 == e2


def test_adaptive_budget_exhaustion_raises_with_estimate():
    spec = QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=8)
    f = lambda x: np.abs(x - np.sqrt(2.0) / 2.0) ** 0.3
    with pytest.raises(ConvergenceError) as exc:
        integrate_adaptive(f, 0.0, 1.0, spec)
    assert exc.value.estimate is not None
    assert exc.value.error_bound > 0.0


def test_pv_matches_frozen_reference():
    val, err = integrate_pv(lambda x: np.exp(x / 3.0) / (x - 1.37),
                            1.37, 0.0, 4.0, TIGHT)
    assert abs(val - I2_REF) < 1e-9


def test_pv_reduces_to_adaptive_for_removable_pole():
    # numerator vanishing at the pole: PV == plain adaptive integral
    f = lambda x: np.sin(x - 2.0) / (x - 2.0)
    pv, _ = integrate_pv(f, 2.0, 0.5, 4.0, TIGHT)
    plain, _ = integrate_adaptive(f, 0.5, 4.0, TIGHT)
    assert abs(pv - plain) < 1e-9


def test_pv_odd_integrand_is_zero():
    val, _ = integrate_pv(lambda x: 1.0 / (x - 1.0), 1.0, 0.0, 2.0, TIGHT)
    assert abs(val) < 1e-10


def test_pv_pole_outside_interval_raises():
    with pytest.raises(ValueError):
        integrate_pv(lambda x: 1.0 / (x - 5.0), 5.0, 0.0, 2.0, TIGHT)


def test_sommerfeld_radial_frozen_reference():
    f = lambda x: np.exp(-x / 20.0) * special.j0(2.0 * x) * x / (x**2 + 4.0)
    # branch point at k=1 is inside; integrand decays on its own
    val, err = sommerfeld_radial(f, 1.0 + 0.0j, 800.0, TIGHT)
    assert abs(val - I4_REF) < 5e-8


def test_sommerfeld_radial_tail_warning():
    f = lambda x: 1.0 / (1.0 + x)
    with pytest.warns(TailTruncationWarning):
        sommerfeld_radial(f, 1.0 + 0.0j, 50.0, QuadratureSpec())


def test_sommerfeld_radial_rejects_bad_args():
    f = lambda x: np.exp(-x)
    with pytest.raises(ValueError):
        sommerfeld_radial(f, 2.0 - 0.1j, 50.0)
    with pytest.raises(ValueError):
        sommerfeld_radial(f, 2.0, 1.0)


def test_gauss_panels_polynomial_exactness():
    # degree 2n-1 polynomials are integrated exactly by an n-point rule
    f = lambda x: 3.0 * x**5 - x**3 + 2.0
    got = gauss_panels(f, np.array([0.0, 0.7, 2.0]), n=8)
    exact = 0.5 * 2.0**6 - 0.25 * 2.0**4 + 4.0
    assert abs(got - exact) < 1e-12 * abs(exact)


def test_fourier_table_frozen_reference():
    taus = np.array([0.0, 7.3])
    got = fourier_table(lambda x: x**2 * np.exp(-x), 0.0, 6.0, taus)
    assert abs(got[1] - I5_REF) < 1e-10
    # tau = 0 row is the plain integral of the weight
    plain, _ = integrate_adaptive(lambda x: x**2 * np.exp(-x), 0.0, 6.0, TIGHT)
    assert abs(got[0] - plain) < 1e-10


def test_fourier_table_rotation_is_phase_shift():
    taus = np.linspace(0.0, 9.0, 7)
    w = lambda x: np.exp(-((x - 2.0) ** 2))
    plain = fourier_table(w, 0.0, 5.0, taus)
    rot = fourier_table(w, 0.0, 5.0, taus, rotation=1.4)
    assert np.max(np.abs(rot - plain * np.exp(1j * 1.4 * taus))) < 1e-10


def test_fourier_table_edge_hints_resolve_narrow_line():
    # Lorentzian of width eta: uniform phase-bounded panels miss it, panel
    # edges clustered at the line restore the quadrature
    eta = 1e-4
    w0 = 3.0
    w = lambda x: (eta / np.pi) / ((x - w0) ** 2 + eta**2)
    taus = np.array([2.5])
    hints = w0 + eta * np.array([-1e3, -200.0, -50.0, -10.0, -3.0, 0.0,
                                 3.0, 10.0, 50.0, 200.0, 1e3])
    got = fourier_table(w, 0.0, 6.0, taus, edge_hints=hints)[0]
    # narrow-line limit: exp(-i w0 tau) with envelope exp(-eta tau)
    expect = np.exp(-1j * w0 * 2.5) * np.exp(-eta * 2.5)
    assert abs(got - expect) < 2e-3
    # hints outside (a, b) must be ignored, not crash
    out = fourier_table(w, 0.0, 6.0, taus,
                        edge_hints=np.array([-5.0, 100.0, 3.0]))
    assert np.isfinite(out).all()


# -- grid and volterra -----------------------------------------------------


def test_grid1d_spacing():
    g = Grid1D(0.0, 2.0, 5)
    assert g.h == 0.5
    assert np.allclose(g.points, [0.0, 0.5, 1.0, 1.5, 2.0])
    with pytest.raises(ValueError):
        Grid1D(1.0, 1.0, 5)


def flat_kernel_solution(g, ts):
    # y' = int K y with K = -g^2 (constant): y = cos(g t)
    return np.cos(g * ts)


def test_volterra_flat_kernel_cosine():
    g = 1.0
    grid = Grid1D(0.0, 10.0, 4001)
    kern = np.full(grid.n_points, -(g**2), dtype=complex)
    y = volterra_march(kern, grid.h)
    err = np.max(np.abs(y - flat_kernel_solution(g, grid.points)))
    assert err < 1e-4


def test_volterra_oscillating_kernel_closed_form():
    # K(t) = -g^2 cos(nu t)  ->  y = (nu^2 + g^2 cos(W t)) / W^2, W^2 = nu^2 + g^2
    g, nu = 1.3, 0.7
    grid = Grid1D(0.0, 12.0, 6001)
    kern = -(g**2) * np.cos(nu * grid.points).astype(complex)
    y = volterra_march(kern, grid.h)
    w2 = nu**2 + g**2
    exact = (nu**2 + g**2 * np.cos(np.sqrt(w2) * grid.points)) / w2
    assert np.max(np.abs(y - exact)) < 1e-4


def test_volterra_second_order_convergence():
    g = 1.0
    errs = []
    for n in (1000, 2000):
        grid = Grid1D(0.0, 10.0, n + 1)
        kern = np.full(grid.n_points, -(g**2), dtype=complex)
        y = volterra_march(kern, grid.h)
        errs.append(np.max(np.abs(y - flat_kernel_solution(g, grid.points))))
    assert errs[0] / errs[1] >= 3.5


def test_volterra_backends_agree():
    if not HAVE_COMPILED_VOLTERRA:
        pytest.skip("compiled extension not built")
    grid = Grid1D(0.0, 8.0, 2001)
    kern = -np.exp(1j * 0.3 * grid.points) * np.cos(0.9 * grid.points)
    y_c = volterra_march(kern, grid.h, backend="compiled")
    y_py = volterra_march(kern, grid.h, backend="python")
    # same algorithm, different summation order: agreement to roundoff scale
    assert np.max(np.abs(y_c - y_py)) < 1e-10


def test_volterra_blowup_guard():
    grid = Grid1D(0.0, 40.0, 801)
    kern = np.full(grid.n_points, +4.0, dtype=complex)  # growing solution
    with pytest.raises(RuntimeError):
        volterra_march(kern, grid.h, blowup=10.0)


def test_volterra_input_validation():
    with pytest.raises(ValueError):
        volterra_march(np.zeros((3, 3), dtype=complex), 0.1)
    with pytest.raises(ValueError):
        volterra_march(np.zeros(1, dtype=complex), 0.1)
