"""End-to-end evaluation: fit, screen, solve, validate, report."""

from .pipeline import (ExperimentConfig, GeneratorSpec, TopologyResult, method_configs,
                       random_split, run_pipeline, survivable_outages, topology_experiment,
                       training_costs, worst_case_split)
from .report import EvaluationReport, MethodReport, emit_report, format_table, parse_report

__all__ = [
    "EvaluationReport", "ExperimentConfig", "GeneratorSpec", "MethodReport", "TopologyResult",
    "emit_report", "format_table", "method_configs", "parse_report", "random_split",
    "run_pipeline", "survivable_outages", "topology_experiment", "training_costs",
    "worst_case_split",
]
