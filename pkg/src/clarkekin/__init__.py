"""Clarke-transform toolkit for displacement-actuated continuum robots.

Construction of the generalized transform matrix pair for any number of
joints, constant-curvature forward and inverse kinematics built on it,
direct sampling of the displacement manifold, and a deterministic
closed-loop displacement controller simulation.
"""

from .arcspace import (
    AngleAngle,
    CurvatureAngle,
    CurvatureCurvature,
    SegmentGeometry,
    aar_to_car,
    arc_from_clarke,
    car_to_aar,
    car_to_ccr,
    ccr_to_car,
    clarke_from_arc,
    virtual_displacement,
)
from .clarke import (
    ClarkeTransform,
    JointLayout,
    build_transform,
    displacement_from_rectangular,
    inverse_transform,
    is_on_manifold,
    manifold_residual,
    polar_to_rectangular,
    projector,
    rectangular_to_polar,
    transform,
    wrap_to_two_pi,
)
from .control import (
    ControllerConfig,
    NoiseModel,
    NoisePropagationReport,
    PT1Plant,
    SimTrace,
    TrajectorySpec,
    clarke_tracking_rms,
    controller_step,
    generate_trajectory,
    noise_propagation,
    plant_step,
    run_simulation,
)
from .kinematics import (
    Pose,
    RegularizationConfig,
    f_dep,
    f_dep_curvature_angle,
    f_dep_inverse,
    f_ind,
    f_ind_inverse,
    fk_direct,
    ik,
    recover_pose_from_position,
)
from .sampling import (
    MethodBenchmark,
    SampleBatch,
    SamplerConfig,
    SamplingStats,
    benchmark,
    sample,
    sample_direct,
    sample_direct_batched,
    sample_rejection_independent,
    sample_rejection_resolved,
)

__version__ = "0.1.0"

__all__ = [
    "AngleAngle",
    "ClarkeTransform",
    "ControllerConfig",
    "CurvatureAngle",
    "CurvatureCurvature",
    "JointLayout",
    "MethodBenchmark",
    "NoiseModel",
    "NoisePropagationReport",
    "PT1Plant",
    "Pose",
    "RegularizationConfig",
    "SampleBatch",
    "SamplerConfig",
    "SamplingStats",
    "SegmentGeometry",
    "SimTrace",
    "TrajectorySpec",
    "aar_to_car",
    "arc_from_clarke",
    "benchmark",
    "build_transform",
    "car_to_aar",
    "car_to_ccr",
    "ccr_to_car",
    "clarke_from_arc",
    "clarke_tracking_rms",
    "controller_step",
    "displacement_from_rectangular",
    "f_dep",
    "f_dep_curvature_angle",
    "f_dep_inverse",
    "f_ind",
    "f_ind_inverse",
    "fk_direct",
    "generate_trajectory",
    "ik",
    "inverse_transform",
    "is_on_manifold",
    "manifold_residual",
    "noise_propagation",
    "plant_step",
    "polar_to_rectangular",
    "projector",
    "recover_pose_from_position",
    "rectangular_to_polar",
    "run_simulation",
    "sample",
    "sample_direct",
    "sample_direct_batched",
    "sample_rejection_independent",
    "sample_rejection_resolved",
    "transform",
    "virtual_displacement",
    "wrap_to_two_pi",
]
