"""Visible-region-aware phase-shift optimization for a cylindrical RIS.

A cylinder-mounted reflecting surface only shows each transceiver about
half of every ring, which splits the elements into user-specific and
shared sets. User-specific phases have exact closed-form optima; only the
shared set needs gradient iterations. This package provides the array
geometry, the Rician channel statistics and sampling, closed-form ergodic
spectral-efficiency bounds with Monte Carlo validation, the hybrid
optimizer (plus a planar full-gradient baseline), and a sweep/benchmark
CLI.

Hot optimizer loops are numba-jitted; set ``CYLRIS_NO_NUMBA=1`` to force
the pure-numpy fallback.
"""

from ._kernels import BACKEND
from .channel import (
    ChannelRealization,
    DerivedCoefficients,
    LinkStats,
    appendix_cross_terms,
    derive_coefficients,
    los_cascaded_vectors,
    sample_realization,
    sample_realization_batch,
)
from .geometry import (
    AngleSet,
    ArrayDescriptor,
    ArrayKind,
    ElementClassification,
    ElementRole,
    VisibilityMask,
    classify_elements,
    ula_arv,
    uca_arv,
    upa_arv,
    visibility_mask,
)
from .harness import (
    ConfigError,
    ResultTable,
    Scenario,
    ScenarioConfig,
    ValidationReport,
    benchmark_iterations,
    build_scenario,
    default_config,
    emit_config,
    load_config,
    parse_config,
    sweep_ring_size,
    sweep_uav_azimuth,
    validate_bounds,
)
from .optimizer import (
    ClosedFormResult,
    ObjectiveContext,
    OptimizerOptions,
    OptimizerReport,
    closed_form_specific,
    gradient_shared,
    hybrid_optimize,
    objective,
    upa_optimize,
)
from .performance import (
    DegenerateChannelError,
    PhaseProfile,
    SeReport,
    beamforming_gain,
    bound_argument,
    ergodic_se_mc,
    instantaneous_se,
    lemma1_bound,
    mrt_beamformer,
    sum_se_upper_bound,
)

__version__ = "0.1.0"

__all__ = [
    "AngleSet",
    "ArrayDescriptor",
    "ArrayKind",
    "BACKEND",
    "ChannelRealization",
    "ClosedFormResult",
    "ConfigError",
    "DegenerateChannelError",
    "DerivedCoefficients",
    "ElementClassification",
    "ElementRole",
    "LinkStats",
    "ObjectiveContext",
    "OptimizerOptions",
    "OptimizerReport",
    "PhaseProfile",
    "ResultTable",
    "Scenario",
    "ScenarioConfig",
    "SeReport",
    "ValidationReport",
    "appendix_cross_terms",
    "beamforming_gain",
    "benchmark_iterations",
    "bound_argument",
    "build_scenario",
    "classify_elements",
    "closed_form_specific",
    "default_config",
    "derive_coefficients",
    "emit_config",
    "ergodic_se_mc",
    "gradient_shared",
    "hybrid_optimize",
    "instantaneous_se",
    "lemma1_bound",
    "load_config",
    "los_cascaded_vectors",
    "mrt_beamformer",
    "objective",
    "parse_config",
    "sample_realization",
    "sample_realization_batch",
    "sum_se_upper_bound",
    "sweep_ring_size",
    "sweep_uav_azimuth",
    "uca_arv",
    "ula_arv",
    "upa_arv",
    "upa_optimize",
    "validate_bounds",
    "visibility_mask",
]
