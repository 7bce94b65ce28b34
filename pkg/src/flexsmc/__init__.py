"""Sliding-mode control of a single-link flexible manipulator with a functional observer."""

from .config import ProjectConfig, load_config
from .errors import (
    CompositeUnstable,
    ConfigError,
    ConfigSemantic,
    ConfigSyntax,
    DegenerateNullspace,
    DimensionMismatch,
    Divergence,
    FlexSMCError,
    NeverReached,
    RootSearchExhausted,
    SimulationError,
    SingularGammaB,
    SingularMass,
    SpectraOverlap,
    StepTooLarge,
    SynthesisError,
    Unrealizable,
)
from .modal import BeamParams, ModalData, ModeShape, find_beta_roots, find_mode_shape, modal_analysis
from .observer import ObserverSpec, build_F, check_conditions, solve_GD, solve_T, synthesize
from .plant import PlantModel, build_plant, measure, rigid_plant
from .simulate import (
    SimConfig,
    SimResult,
    SlidingModeController,
    reaching_metrics,
    rigid_body_oracle,
    simulate,
)
from .smc import (
    ReferenceSignal,
    SlidingSpec,
    control_expanded,
    control_from_estimate,
    control_full_state,
    reaching_time_bound,
)

__version__ = "0.1.0"
