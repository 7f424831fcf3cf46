"""Reduced Joule-heating models of flash sintering.

Nondimensionalization, exact steady states and critical curves, transient
solves with voltage-to-current control switching and blow-up detection,
and dimensional regime maps.
"""
__version__ = "0.1.0"

from .model import (
    ControlMode,
    ControlSchedule,
    DimensionalParameters,
    DimensionlessGroups,
    DomainError,
    HighAspectGroups,
    arrhenius_conductivity,
    conductivity_hat,
    high_aspect_groups,
    nondimensionalize,
)
from .regime import FlashCheck, RegimeGrid, critical_field, flash_condition, regime_diagram
from .scenario import ModelKind, Scenario, ScenarioError, bundled_scenario, load_scenario
from .steady import (
    AxialSteadyState,
    Branch,
    ContinuationError,
    LumpedCriterion,
    RadialSteadyState,
    axial_critical_lambda,
    axial_steady_current,
    axial_steady_voltage,
    evaluate_profile,
    high_aspect_critical,
    lumped_flash_criterion,
    radial_critical_lambda,
    radial_steady_current,
    radial_steady_voltage,
)
from .transient import (
    BlowupReason,
    BlowupReport,
    Geometry,
    ProfileSnapshot,
    SolverError,
    SolverOptions,
    SpatialGrid,
    TransientResult,
    solve_axial,
    solve_high_aspect,
    solve_lumped,
    solve_radial,
)
