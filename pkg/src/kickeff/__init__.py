"""Effective time-independent description of the quantum kicked top.

The public surface is re-exported here; submodules hold the details.
"""

from kickeff.spin import (
    CoherentState,
    SpinAlgebra,
    build_spin_operators,
    commutator,
    hermitian_exp,
    spin_coherent_state,
)
from kickeff.floquet import (
    QuasiSpectrum,
    TopParams,
    build_floquet,
    heisenberg_step,
    quasienergies,
    wrap_angle,
)
from kickeff.effective import (
    DriveSpec,
    EffectiveModel,
    classical_limit_check,
    delta_kick_effective,
    effective_spectrum,
    fourier_effective,
    kick_operator_at,
    kicked_top_drive,
    kicked_top_effective,
    reconstruct_floquet,
)
from kickeff.spectral import (
    DosCurve,
    cbh_alpha_star,
    cbh_singularity_probe,
    classify_gap_minima,
    dos_fourier,
    dos_gaussian,
    exact_spectrum,
    find_dos_peaks,
    fold_to_brillouin,
    folded_effective_spectrum,
    gap_scan,
    match_spectra,
)
from kickeff.classical import (
    CanonicalState,
    ClassicalState,
    compare_orbits,
    hcl_energy,
    integrate_cartesian,
    integrate_flow,
    iterate_map,
    kicked_top_map,
    phase_portrait,
    standard_ic_grid,
)
from kickeff.errors import NumericalError

__version__ = "0.1.0"
