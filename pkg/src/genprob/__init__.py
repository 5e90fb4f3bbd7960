"""Generative probability engine.

Two halves: exhaustive enumeration of programs for a small counter machine
(algorithmic probability lower bounds, shortest programs, Kraft sums), and an
exact rational calculus for outcome and result probabilities of observer
scenarios.
"""

from .calculus import (
    Outcome,
    OutcomeTable,
    ResultRef,
    Scenario,
    ScenarioError,
    Situation,
    monte_carlo_check,
    outcome_probabilities,
    resolve_outcomes,
    situation_result_probability,
    validate_scenario,
)
from .enumerator import (
    CompressionResult,
    KraftReport,
    MassEstimate,
    enumerate_valid,
    estimate_probability,
    kraft_report,
    optimal_compression,
)
from .mlang import EvalLimit, Instr, Op, Program, Status, Trace, decode, encode, evaluate, parse_program
from .scenario_io import parse_scenario, render_report, render_scenario

__version__ = "0.1.0"
