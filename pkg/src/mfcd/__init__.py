"""Mean-field counter-diabatic annealing: Bloch simulator, exact-state
cross-checks, and hardware schedule compilation."""

from .bloch import (
    FixedPointResult,
    MagnetizationTrajectory,
    integrate_bloch,
    self_consistent_magnetization,
)
from .errors import (
    ConfigError,
    FrameError,
    IntegrationError,
    InvariantViolation,
    ScheduleRangeError,
)
from .model import (
    ProblemInstance,
    RngSpec,
    Schedule,
    make_linear_schedule,
    make_tabulated_schedule,
    make_trig_schedule,
    sample_gaussian_couplings,
    sample_uniform_fields,
    staggered_instance,
)
from .quantum import (
    EvolveResult,
    evolve,
    exact_cd_operator,
    fidelity_trace,
    ground_state,
    sample_measurements,
    wilson_interval,
)
from .rotframe import (
    AnnealScheduleExport,
    FrameAngle,
    ScheduleTraces,
    evolve_hardware,
    export_schedule,
    frame_angle,
    hardware_schedules,
    hardware_target,
    linear_baseline_traces,
    load_schedule,
    save_schedule,
    verify_frame_equivalence,
)

__version__ = "0.1.0"
