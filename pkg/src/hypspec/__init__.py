"""Spectral analysis of linear hyperbolic transport systems.

The systems handled are ``z_t = -(lambda0 z)_zeta + M z`` on ``[0, 1]`` with
one positive speed ``lambda0`` and the boundary coupling
``lambda0(0) K z(0) + lambda0(1) L z(1) = 0``.  The package classifies the
dynamics, computes the eigenvalue lattice, eigenfunctions and Jordan chains,
decides exponential stability and checks modal expansions against an exact
solution by characteristics.
"""

import sys

__version__ = "0.1.0"

from .systems import (
    DEFAULT_SINGULAR_TOL,
    CoefficientProfile,
    DimensionMismatch,
    HypspecError,
    MatrixProfile,
    NonIncreasingGrid,
    NonPositiveSpeed,
    Regime,
    SpectralClassification,
    SystemSpec,
    ValidatedSystem,
    classify,
    validate_system,
)
from .geometry import GeometryTables, OutOfRange, build_geometry, eta_inverse
from .similarity import SimilaritySolution, inverse_transform, solve_P, transform_state
from .spectrum import (
    BoundaryEigenStructure,
    Eigenvalue,
    ModeIndex,
    SpectrumResult,
    analyze,
    boundary_matrix,
    eigen_structure,
    enumerate_modes,
    growth_bound,
    mode_eigenvalue,
    stability_verdict,
)
from .eigenfunctions import (
    ModalCoefficients,
    ModeFunction,
    WeightMatrix,
    build_weight,
    chain_residuals,
    eigenfunction,
    generalized_eigenfunction,
    jordan_omegas,
    project_initial_state,
    weighted_inner_product,
)
from .semigroup import (
    CharacteristicsOracle,
    SimulationResult,
    characteristics_oracle,
    compare_methods,
    modal_simulate,
    simulate,
    simulate_original,
    smooth_initial_state,
    state_norm,
)
from .heat_exchanger import (
    HeatExchangerSpec,
    HXReport,
    hx_boundary_matrix,
    hx_closed_form_P,
    hx_eigenvalues,
    hx_kappa_threshold,
    hx_report,
    hx_to_system,
)
from .io import load_config, spec_from_mapping, spec_to_mapping

__all__ = [name for name, obj in list(globals().items()) if not name.startswith("_") and not isinstance(obj, type(sys))]
