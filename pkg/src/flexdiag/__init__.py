"""Anytime direct diagnosis and reconfiguration of constraint-based configurations."""
from .diagnosis import Diagnosis, GranularityError, InstanceTooLarge, Status, estimate_checks, flexdiag
from .engine import BudgetExceeded, CheckSession, ConstraintModel, is_consistent, solve
from .evolution import EvolutionParams, evolutionary_diagnose
from .expr import ExpressionError, evaluate, parse
from .featuremodel import (FeatureModel, FeatureModelError, GenerationParams, fm_to_csp, generate_random_fm,
                           generate_reconfig_requirements, parse_sxfm, reconfiguration_task,
                           sample_configuration, write_sxfm)
from .metrics import accuracy, aggregate, minimality
from .reconfig import NoDiagnosis, Reconfiguration, diagnose, enumerate_diagnoses, reconfigure, validate_task
from .task import (AssignmentConstraint, ConfigurationTask, ConstraintExpr, Domain, ReconfigurationTask, TaskError,
                   Variable, dump_task, load_task, load_task_file, parse_constraint)

__version__ = "0.1.0"

__all__ = [
    "AssignmentConstraint", "BudgetExceeded", "CheckSession", "ConfigurationTask", "ConstraintExpr",
    "ConstraintModel", "Diagnosis", "Domain", "EvolutionParams", "ExpressionError", "FeatureModel",
    "FeatureModelError", "GenerationParams", "GranularityError", "InstanceTooLarge", "NoDiagnosis",
    "Reconfiguration", "ReconfigurationTask", "Status", "TaskError", "Variable", "accuracy", "aggregate",
    "diagnose", "dump_task", "enumerate_diagnoses", "estimate_checks", "evaluate", "evolutionary_diagnose",
    "flexdiag", "fm_to_csp", "generate_random_fm", "generate_reconfig_requirements", "is_consistent",
    "load_task", "load_task_file", "minimality", "parse", "parse_constraint", "parse_sxfm", "reconfiguration_task",
    "reconfigure", "sample_configuration", "validate_task", "write_sxfm",
]
