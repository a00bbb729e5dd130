import numpy as np
import pytest

from greenmodes import CavityGeometry, TwoLevelAtom, build_pec_box_modes


@pytest.fixture(scope="session")
def cube_modeset():
    """Unit PEC cube, N_max = 6: 540 modes, reused across the suite."""
    geom = CavityGeometry(1.0, 1.0, 1.0)
    return build_pec_box_modes(geom, 6)


@pytest.fixture(scope="session")
def box_modeset():
    """Slightly anisotropic box, N_max = 4, splits most degeneracies."""
    geom = CavityGeometry(1.0, 1.13, 0.87)
    return build_pec_box_modes(geom, 4)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)


def make_atom(omega0=1.0, dipole=(0.0, 0.0, 0.1), position=(0.43, 0.51, 0.47),
              drive=None):
    return TwoLevelAtom(position=position, dipole=dipole, omega0=omega0,
                        drive=drive)
