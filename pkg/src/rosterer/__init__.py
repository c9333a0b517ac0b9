"""Configurable physician duty rostering engine.

Compiles a department's roster configuration into an integer program,
solves it through an external branch-and-cut solver (file exchange) or
an exhaustive oracle, independently validates the result, and serves the
planner/physician workflow over HTTP.
"""

from .derivation import DerivedSets, derive, expand_instances, with_expanded_instances
from .errors import (
    BuildInfeasibleError,
    ConfigurationError,
    OracleSizeError,
    RostererError,
    SolverEnvironmentError,
    SolverProtocolError,
    VersionConflictError,
)
from .mip import CanonicalModel, build_model, model_statistics
from .model import RosterInstance, WeightConfig, validate_instance
from .mps import emit_mps, parse_mps
from .pipeline import PipelineResult, run_pipeline
from .solve import (
    RawSolution,
    RosterSolution,
    SolveRequest,
    SolverConfig,
    exhaustive_oracle,
    extract_roster,
    invoke_external,
)
from .validate import QualityReport, quality_report, recount_soft, validate_hard

__version__ = "0.1.0"

__all__ = [
    "BuildInfeasibleError",
    "CanonicalModel",
    "ConfigurationError",
    "DerivedSets",
    "OracleSizeError",
    "PipelineResult",
    "QualityReport",
    "RawSolution",
    "RosterInstance",
    "RosterSolution",
    "RostererError",
    "SolveRequest",
    "SolverConfig",
    "SolverEnvironmentError",
    "SolverProtocolError",
    "VersionConflictError",
    "WeightConfig",
    "build_model",
    "derive",
    "emit_mps",
    "exhaustive_oracle",
    "expand_instances",
    "extract_roster",
    "invoke_external",
    "model_statistics",
    "parse_mps",
    "quality_report",
    "recount_soft",
    "run_pipeline",
    "validate_hard",
    "validate_instance",
    "with_expanded_instances",
    "__version__",
]
