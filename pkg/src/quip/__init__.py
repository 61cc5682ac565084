"""QuIP: exact maximin designs and sequential acquisition optimization
over categorical lattices, with path-planning benchmark simulators."""

from .acquisition import (
    AcqSolveReport,
    AcquisitionSpec,
    candidate_set_acquisition,
    enumerate_acquisition,
    eval_alm,
    eval_ucb,
    optimize_acquisition,
    random_point,
)
from .bounds import derangement, derangement_q, gilbert_q, hamming_ball, q0
from .encoding import (
    Design,
    Point,
    decode,
    design_from_array,
    encode,
    hamming,
    load_design,
    min_pairwise_distance,
    save_design,
)
from .gp import (
    FitConfig,
    GpModel,
    KernelParams,
    build_model,
    d_optimality_ratio,
    fit_mle,
    kernel,
    load_model,
    predict,
    predict_batch,
    save_model,
)
from .maximin import (
    FeasibilityInstance,
    MaximinResult,
    SolveReport,
    brute_force_maximin,
    optimize_maximin,
    solve_feasibility,
)
from .sequential import (
    Campaign,
    best_so_far,
    load_campaign,
    rrmse,
    run_campaign,
    save_campaign,
)
from .simulators import (
    GridWorld,
    ObstacleCourse,
    SimResult,
    maze_cost,
    rover_cost,
    snake_reward,
)

__version__ = "0.1.0"

__all__ = [
    "AcqSolveReport",
    "AcquisitionSpec",
    "Campaign",
    "Design",
    "FeasibilityInstance",
    "FitConfig",
    "GpModel",
    "GridWorld",
    "KernelParams",
    "MaximinResult",
    "ObstacleCourse",
    "Point",
    "SimResult",
    "SolveReport",
    "best_so_far",
    "brute_force_maximin",
    "build_model",
    "candidate_set_acquisition",
    "d_optimality_ratio",
    "decode",
    "derangement",
    "derangement_q",
    "design_from_array",
    "encode",
    "enumerate_acquisition",
    "eval_alm",
    "eval_ucb",
    "fit_mle",
    "gilbert_q",
    "hamming",
    "hamming_ball",
    "kernel",
    "load_campaign",
    "load_design",
    "load_model",
    "maze_cost",
    "min_pairwise_distance",
    "optimize_acquisition",
    "optimize_maximin",
    "predict",
    "predict_batch",
    "q0",
    "random_point",
    "rover_cost",
    "rrmse",
    "run_campaign",
    "save_campaign",
    "save_design",
    "save_model",
    "snake_reward",
    "solve_feasibility",
]
