"""Curriculum scheduling by learning progress: teachers, simulated students, and a harness."""

from .errors import ConfigError, DomainError, TSCLError, UsageError
from .harness import (
    Baseline,
    BaselineConfig,
    ExperimentConfig,
    RunTrace,
    aggregate,
    run_session,
    telescoping_check,
)
from .kernels import BACKEND
from .students import (
    ChainMdpConfig,
    ChainMdpStudent,
    ChainStudent,
    ChainStudentConfig,
    GridStudent,
    GridStudentConfig,
)
from .teachers import (
    Algorithm,
    Formulation,
    NoSlope,
    Policy,
    QTable,
    TeacherConfig,
    boltzmann_probs,
    eps_greedy_select,
    make_teacher,
    ols_slope,
    preference,
    q_update,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DomainError",
    "TSCLError",
    "UsageError",
    "aggregate",
    "Algorithm",
    "BACKEND",
    "Baseline",
    "BaselineConfig",
    "boltzmann_probs",
    "ChainMdpConfig",
    "ChainMdpStudent",
    "ChainStudent",
    "ChainStudentConfig",
    "eps_greedy_select",
    "ExperimentConfig",
    "Formulation",
    "GridStudent",
    "GridStudentConfig",
    "make_teacher",
    "NoSlope",
    "ols_slope",
    "Policy",
    "preference",
    "q_update",
    "QTable",
    "run_session",
    "RunTrace",
    "TeacherConfig",
    "telescoping_check",
]
