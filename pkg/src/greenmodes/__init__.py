"""greenmodes: electromagnetic Green tensors, cavity mode expansions, and
the open-system dynamics they drive.

The package implements two quantization routes for the macroscopic field,
a closed-cavity normal-mode expansion and a noise-current (Green-tensor)
formulation, along with the numerical identity checks tying them together
in the lossless limit, plus non-Markovian decay and driven master-equation
solvers built on either route.
"""

__version__ = "0.1.0"

from .atom import Drive, TwoLevelAtom
from .constants import Constants, ThermalState, thermal_occupation, thermal_weight
from .decay import (
    DecayResult,
    MemoryKernel,
    fit_rate_and_shift,
    kernel_lna,
    kernel_nmqed,
    markov_rate_and_shift,
    solve_volterra,
)
from .greens import (
    BulkClosedForm,
    BulkSommerfeld,
    CavityModeSum,
    bulk_green,
    bulk_green_sommerfeld,
    cavity_green,
    im_green_coincidence,
    wavenumber,
)
from .identities import (
    IdentityReport,
    check_appendix_lossless_limit,
    check_conversion_p1,
    check_magic_formula,
    check_surface_term,
    vacuum_correlation_spectrum,
)
from .master import (
    BathCorrelations,
    MasterTrajectory,
    SpectralDensity,
    bath_correlations,
    evolve_master_equation,
    kernel_equivalence_check,
    markov_coefficients,
    spectral_density_lna,
    spectral_density_nmqed,
)
from .modes import (
    CavityGeometry,
    ModeEntry,
    ModeIndex,
    ModeSet,
    build_pec_box_modes,
    coupling_constant,
    coupling_strengths,
    plane_wave_mode,
)
from .numerics import (
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
from .permittivity import (
    Box,
    ConstantScalar,
    ConstantTensor,
    DrudeLorentz,
    PermittivityModel,
    PiecewiseRegions,
    Sphere,
    eval_permittivity,
)

__all__ = [name for name in dir() if not name.startswith("_")]
