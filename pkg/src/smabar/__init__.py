"""Dynamic thermomechanics of shape-memory-alloy bars and thin slabs.

Subpackages:

* constitutive -- sextic Landau free energy, stress, entropy, conduction
* heat_flux    -- Fourier, relaxed (finite-speed) and generalised flux laws
* invariants3d -- cubic-group strain invariants and the 3D free energy
* solver1d     -- staggered-grid method-of-lines solver for the coupled bar
* slab         -- centre-manifold reduced model of a thin slab
* manufactured -- symbolic manufactured-solution harness
* cli          -- config files, presets, run orchestration (`sma` command)
"""

from .constitutive import (
    MaterialParams1D,
    ThermoState,
    conductivity,
    cu_based,
    entropy,
    equilibrium_stress,
    free_energy,
    internal_energy,
    strain_energy,
    total_stress,
)
from .heat_flux import cattaneo_step, fourier_flux, generalized_flux
from .invariants3d import (
    FalkKonopkaCoeffs,
    Strain3,
    StrainInvariants,
    cu_based_3d,
    cubic_group_elements,
    free_energy_3d,
    invariants,
)
from .manufactured import MmsCase, build_mms_case
from .slab import (
    SlabParams,
    SlabRunSetup,
    SlabState,
    cu_based_slab,
    reconstruct_fields,
    slab_rhs,
    slab_simulate,
)
from .solver1d import (
    BoundarySpec,
    FieldState,
    Forcing,
    Grid1D,
    IntegrationError,
    RunSetup,
    Trajectory,
    compute_stress,
    conduction_entropy_production,
    energy_budget,
    rhs,
    simulate,
    stable_dt,
    step,
)
from .cli import ConfigError, SimConfig, load_config, preset, run, write_config

__version__ = "0.1.0"
