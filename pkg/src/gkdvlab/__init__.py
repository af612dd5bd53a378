"""gkdvlab: a numerical laboratory for generalized KdV soliton dynamics.

Closed-form profiles (ground state, solitons, breathers), a spectral
solver with exact linear propagation, the functional diagnostics used to
certify non-dispersion and almost-monotonicity, modulation decomposition,
discrete-spectrum content prediction, and a config-driven experiment CLI.
"""

from .core import ConservedRecord, Exponent, Field, GridSpec, Trajectory
from .diagnostics import (
    DecayFit,
    Partition,
    PhiWeight,
    PsiWeight,
    fit_exponential_decay,
    fit_spatial_decay,
    fit_translation,
    localized_energy,
    localized_mass,
    monotone_functional,
    monotonicity_report,
    nondispersion_profile,
    sample_coercivity,
    tail_mass,
    tilde_m,
    weinstein_F,
    weinstein_H,
)
from .errors import (
    BlowupError,
    ClosenessError,
    ConfigError,
    DecayError,
    DomainError,
    FormatError,
    GKdVLabError,
    KappaRangeError,
    NoConvergenceError,
    NonPositiveValueError,
    OverlapError,
    SeparationError,
    SpectralTailError,
    SpeedRangeError,
    UnresolvedSpectrumError,
    WrongExponentError,
)
from .modulation import (
    ModulationFrame,
    ModulationTrack,
    decompose_full,
    decompose_translations,
    track,
)
from .profiles import (
    BreatherParams,
    SolitonParams,
    Superposition,
    breather,
    ground_state,
    ground_state_derivative,
    soliton,
    soliton_profile,
    soliton_profile_derivative,
    superpose,
)
from .scattering import (
    SpectrumResult,
    genericity_check,
    schrodinger_spectrum,
    zs_spectrum,
)
from .snapshots import load_snapshot, save_snapshot
from .solver import (
    energy,
    evolve,
    h2_invariant,
    mass,
    sobolev_norm,
    step,
)

__version__ = "0.1.0"
