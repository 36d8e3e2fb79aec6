"""Spectral geometry of rotationally symmetric ends.

Numerical toolkit for warped-product metrics g = dr^2 + f^2(r) g_{S^{n-1}}:
curvature and comparison machinery, separation into half-line Schrodinger
channels, detection of eigenvalues embedded in the essential spectrum via
slowly decaying oscillatory tails, a glued ball+bridge+tail construction
carrying an explicit embedded eigenfunction, the surface growth functional
with its decay-hypothesis dichotomy, and quadrature-verified radial integral
identities.
"""

from .channel_reduction import (
    ChannelPotential,
    ChannelSpec,
    ConjugatedSolution,
    channel_potential,
    decade_window,
    exp_conjugation,
    inverse_liouville,
    liouville_transform,
    predicted_k_eff,
    predicted_phase_constant,
    require_oscillatory,
    resonance_coupling_threshold,
    resonance_energy,
    sphere_multiplicity,
    sphere_spectrum,
)
from .cli import RunConfig, config_from_json, config_to_json, emit_plot_data, main
from .embedded_construction import (
    Connector,
    DiskEigenfunction,
    GluedConstruction,
    build_construction,
    disk_eigenfunction,
    junction_candidates,
    reference_profile,
    scale_construction,
    verify_construction,
)
from .errors import (
    ComparisonFailureError,
    ConfigError,
    ConnectorFailureError,
    CouplingTooWeakError,
    DetectorRefusalError,
    HypothesisViolatedError,
    InsufficientDataError,
    InvalidProfileError,
    NoDecayingSolutionError,
    NonOscillatoryError,
    OutsideRegimeError,
    ResolutionError,
    SingularOriginError,
    TwoRunMismatchError,
    WarpspecError,
)
from .growth_and_identities import (
    GaugeWeight,
    GrowthSeries,
    GrowthThresholds,
    GrowthVerdict,
    IdentityCheck,
    IdentityData,
    RadialSolution,
    SmoothFn,
    check_growth_dichotomy,
    check_parts_identities,
    conjugation_energy_constant,
    conjugation_energy_margin,
    eigenfunction_growth_series,
    final_decade_report,
    gauge_potential,
    gaussian_fn,
    growth_series,
    growth_thresholds,
    poly_fn,
    power_decay_profile,
    radial_solution_from_w,
    sine_fn,
    sine_gauge,
    slow_log_decay_profile,
    solve_radial,
    standard_identity_data,
    verify_growth_theorem,
    zero_gauge,
)
from .halfline_solver import (
    ChannelScanReport,
    DecayFit,
    EigenDetection,
    ShootingResult,
    decaying_solution,
    detect_embedded_eigenvalue,
    fired_detections,
    fit_power_decay,
    frobenius_init,
    integrate_schrodinger,
    prufer_series,
    reversibility_check,
    scan_channels,
    synthetic_channel,
)
from .warp_geometry import (
    ComparisonReport,
    CurvatureField,
    RiccatiBound,
    ShapeFns,
    WarpProfile,
    bochner_residual,
    curvature_of_profile,
    cusp_profile,
    euclidean_profile,
    fd_derivative,
    hessian_comparison_check,
    hyperbolic_profile,
    profile_from_json,
    profile_from_shape,
    profile_to_json,
    register_profile_kind,
    solve_riccati_bound,
    sphere_area,
    uniform_grid,
)

__version__ = "0.1.0"
