"""Green tensor backends: frozen oracle values, reciprocity, Schwarz
reflection, backend cross-validation, coincidence behavior.

The frozen tensors below come from an independent finite-difference oracle:
G = [I + grad grad / k^2] e^{ik rho}/(4 pi rho) with Richardson-extrapolated
central second differences (h = 2e-4), accurate to ~1e-9 relative.
"""

import numpy as np
import pytest

from greenmodes import (
    BulkClosedForm,
    BulkSommerfeld,
    CavityModeSum,
    ConstantScalar,
    QuadratureSpec,
    bulk_green,
    bulk_green_sommerfeld,
    cavity_green,
    im_green_coincidence,
    wavenumber,
)

SPEC = QuadratureSpec(abs_tol=1e-12, rel_tol=1e-10, max_subdivisions=4000)

# frozen: eps = 2 + 0.5j, omega = 1.3, r = (0.9, 0.4, -0.5), r0 = (0.1, -0.2, 0.3)
G_LOSSY = np.array([
    [-1.848265157650e-02 + 2.293756661596e-02j,
     1.925266946646e-02 + 7.314519217924e-03j,
     -2.567022597189e-02 - 9.752692332747e-03j],
    [1.925266946646e-02 + 7.314519217924e-03j,
     -2.971337543225e-02 + 1.867076379282e-02j,
     -1.925266946646e-02 - 7.314519217924e-03j],
    [-2.567022597189e-02 - 9.752692332747e-03j,
     -1.925266946646e-02 - 7.314519217924e-03j,
     -1.848265157650e-02 + 2.293756661596e-02j]])

# frozen: eps = 1, omega = 2.0, r = (0.7, -0.3, 0.2), r0 = (0.0, 0.1, -0.4)
G_VACUUM = np.array([
    [-4.890141721444e-03 + 5.260688119328e-02j,
     -3.205746200723e-02 - 8.816483679548e-03j,
     4.808619303072e-02 + 1.322472557353e-02j],
    [-3.205746200723e-02 - 8.816483679548e-03j,
     -4.267215037015e-02 + 4.221602532368e-02j,
     -2.747782455039e-02 - 7.556985995811e-03j],
    [4.808619303072e-02 + 1.322472557353e-02j,
     -2.747782455039e-02 - 7.556985995811e-03j,
     -1.977396328382e-02 + 4.851351371526e-02j]])


def test_bulk_green_frozen_lossy():
    g = bulk_green(np.array([0.9, 0.4, -0.5]), np.array([0.1, -0.2, 0.3]),
                   1.3, 2.0 + 0.5j)
    assert np.max(np.abs(g - G_LOSSY)) < 1e-6 * np.max(np.abs(G_LOSSY))


def test_bulk_green_frozen_vacuum():
    g = bulk_green(np.array([0.7, -0.3, 0.2]), np.array([0.0, 0.1, -0.4]),
                   2.0, 1.0)
    assert np.max(np.abs(g - G_VACUUM)) < 1e-6 * np.max(np.abs(G_VACUUM))


def test_wavenumber_branch():
    k = wavenumber(1.0, 2.0 + 0.5j)
    assert k.imag > 0.0
    # lossless: real positive root
    k0 = wavenumber(3.0, 4.0)
    assert abs(k0 - 6.0) < 1e-14


def test_coincidence_raises_and_formula():
    with pytest.raises(ValueError):
        bulk_green(np.zeros(3), np.zeros(3), 1.0, 1.0)
    with pytest.raises(ValueError):
        im_green_coincidence(1.0, 1.0 + 0.2j)
    v = im_green_coincidence(1.7, 2.25)
    expect = 1.5 * 1.7 / (6.0 * np.pi) * np.eye(3)
    assert np.max(np.abs(v - expect)) < 1e-15


def test_im_green_smooth_at_small_separation():
    # lossless Im G tends to the coincidence value as rho -> 0
    w, eps = 1.0, 1.0
    target = im_green_coincidence(w, eps)[1, 1]
    r0 = np.zeros(3)
    vals = []
    for rho in (1e-2, 1e-3):
        g = bulk_green(np.array([rho, 0, 0]), r0, w, eps)
        vals.append(g.imag[1, 1])
    # quadratic approach: the smaller separation must sit ~100x closer
    assert abs(vals[1] - target) < 1e-6 * target
    assert abs(vals[0] - target) < 1e-4


def make_backends():
    eps = ConstantScalar(2.0 + 0.4j)
    return [
        BulkClosedForm(eps),
        BulkSommerfeld(eps, spec=SPEC),
    ]


def random_pair(rng):
    r = rng.uniform(-0.8, 0.8, size=3)
    r0 = rng.uniform(-0.8, 0.8, size=3)
    # keep a finite axial gap: the planar decomposition is conditionally
    # convergent at dz = 0
    if abs(r[2] - r0[2]) < 0.15:
        r[2] = r0[2] + np.sign(r[2] - r0[2] or 1.0) * 0.25
    return r, r0


def test_reciprocity_bulk_backends(rng):
    for backend in make_backends():
        for _ in range(4):
            r, r0 = random_pair(rng)
            a = backend.evaluate(r, r0, 1.1)
            b = backend.evaluate(r0, r, 1.1)
            assert np.max(np.abs(a - b.T)) < 1e-8 * np.max(np.abs(a))


def test_reciprocity_mode_sum(cube_modeset, rng):
    backend = CavityModeSum(cube_modeset, eta=1e-3)
    for _ in range(4):
        r = rng.uniform(0.1, 0.9, size=3)
        r0 = rng.uniform(0.1, 0.9, size=3)
        a = backend.evaluate(r, r0, 5.0)
        b = backend.evaluate(r0, r, 5.0)
        assert np.max(np.abs(a - b.T)) < 1e-12 * np.max(np.abs(a))


def test_schwarz_reflection_all_backends(cube_modeset, rng):
    # G(-omega) = conj(G(omega)) at real frequency
    bulks = make_backends()
    r, r0 = random_pair(rng)
    for backend in bulks:
        a = backend.evaluate(r, r0, 1.3)
        b = backend.evaluate(r, r0, -1.3)
        assert np.max(np.abs(b - np.conj(a))) < 1e-8 * np.max(np.abs(a))
    ms = CavityModeSum(cube_modeset, eta=1e-3)
    rc = rng.uniform(0.2, 0.8, size=3)
    r0c = rng.uniform(0.2, 0.8, size=3)
    a = ms.evaluate(rc, r0c, 6.0)
    b = ms.evaluate(rc, r0c, -6.0)
    assert np.max(np.abs(b - np.conj(a))) < 1e-12 * np.max(np.abs(a))


def test_sommerfeld_matches_closed_form(rng):
    # entrywise relative agreement on random lossy pairs
    eps = ConstantScalar(1.8 + 0.6j)
    closed = BulkClosedForm(eps)
    somm = BulkSommerfeld(eps, spec=SPEC)
    worst = 0.0
    for _ in range(5):
        r, r0 = random_pair(rng)
        a = closed.evaluate(r, r0, 1.4)
        b = somm.evaluate(r, r0, 1.4)
        worst = max(worst, np.max(np.abs(a - b)) / np.max(np.abs(a)))
    assert worst < 1e-6, worst


def test_sommerfeld_function_wrapper():
    g = bulk_green_sommerfeld(np.array([0.3, -0.2, 0.6]),
                              np.array([-0.1, 0.1, 0.1]),
                              1.2, 2.0 + 0.3j, spec=SPEC)
    ref = bulk_green(np.array([0.3, -0.2, 0.6]), np.array([-0.1, 0.1, 0.1]),
                     1.2, 2.0 + 0.3j)
    assert np.max(np.abs(g - ref)) < 1e-6 * np.max(np.abs(ref))


def test_mode_sum_requires_eta_for_imaginary_part(cube_modeset):
    sharp = CavityModeSum(cube_modeset, eta=0.0)
    with pytest.raises(ValueError):
        sharp.im_coincidence(np.array([0.4, 0.5, 0.6]), 5.0)


def test_mode_sum_coincidence_passivity(cube_modeset):
    # softened mode sum: Im G(r, r, w) is PSD for every sampled frequency
    backend = CavityModeSum(cube_modeset, eta=1e-2)
    r = np.array([0.43, 0.51, 0.47])
    for w in np.linspace(2.0, 0.95 * cube_modeset.omega_top, 7):
        m = backend.im_coincidence(r, w)
        eig = np.linalg.eigvalsh(0.5 * (m + m.T.conj()))
        assert eig.min() >= -1e-12 * max(abs(eig).max(), 1e-30)


def test_cavity_green_function_wrapper(cube_modeset):
    r = np.array([0.3, 0.6, 0.5])
    r0 = np.array([0.5, 0.4, 0.55])
    g1 = cavity_green(r, r0, 5.0, cube_modeset, eta=1e-3)
    g2 = CavityModeSum(cube_modeset, eta=1e-3).evaluate(r, r0, 5.0)
    assert np.array_equal(g1, g2)


def test_mode_sum_outside_box_raises(cube_modeset):
    backend = CavityModeSum(cube_modeset, eta=1e-3)
    with pytest.raises(ValueError):
        backend.evaluate(np.array([1.2, 0.5, 0.5]), np.array([0.5, 0.5, 0.5]), 5.0)
