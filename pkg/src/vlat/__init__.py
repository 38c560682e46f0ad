"""vlat: phase-vortex lattice simulation and analysis.

The package is organized around the life cycle of a vortex-lattice
measurement: transverse wavefunctions and beam/interferometer parameters
(`beams`), orbital-angular-momentum observables with independent quadrature
oracles (`oam`), azimuthal mode decompositions (`modes`), synthetic detector
images (`lattice`), the reduction pipeline (`reduce`), lattice-model fitting
(`fitkit`) and per-domain OAM maps (`vortexmap`).  File formats live in `io`,
run configuration in `config`, and the batch front end in `cli`.

Sign convention used throughout: an azimuthal harmonic ``exp(-i*l*phi)``
with ``phi = Arg(x + i*y)`` carries ``l`` units of orbital angular momentum.
All transforms, closed forms and quadrature oracles share this convention.
"""

from .beams import (
    BeamParams,
    InterferometerConfig,
    ComplexField,
    eval_psi0_real,
    eval_psi_t,
    eval_psi1,
    prism_refraction,
    transverse_kick,
    lattice_period,
)
from .oam import (
    DegenerateStateError,
    OamResult,
    oam_closed_form,
    oam_second_moment,
    oam_bandwidth,
    oam_anisotropic,
    oam_normalization,
    closed_form_observables,
    oam_quadrature_oracle,
    oam_second_moment_oracle,
    delta_lz_translation,
    mean_transverse_wavenumbers,
    oam_realspace_shift,
)
from .modes import (
    ModeSpectrum,
    aft,
    inverse_aft,
    decompose,
    mode_probabilities,
    jacobi_anger_amplitude,
    first_order_modes,
)
from .lattice import (
    DetectorImage,
    LatticeTruth,
    intensity_ideal,
    fringe_model,
    expected_intensity,
    synthesize_image,
    flat_image,
)
from .reduce import (
    ReductionConfig,
    bin_image,
    flat_field,
    remove_vertical_drift,
    normalize_zero_mean,
    fourier_denoise,
    reduce_pipeline,
)
from .fitkit import FitResult, initial_guess, fit_lattice, contrast, model_image
from .vortexmap import (
    OamMap,
    reconstruct_test_field,
    saaft,
    saaft_spectrum,
    oam_from_spectrum,
    oam_map,
    default_domain_radius,
)
from .config import RunConfig, ConfigError, parse_config, reference_config

__version__ = "0.1.0"
