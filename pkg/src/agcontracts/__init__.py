"""Assume-guarantee contracts for node-based autonomous systems."""

__version__ = "0.1.0"

from .composition import (
    ComposedContract, CompositionError, Obligation, compose_branch, compose_join, compose_loop,
    compose_sequential, discharge_obligations, system_contract,
)
from .confidence import ConfidenceReport, confidence_report, confidence_score
from .dsl import Diagnostic, SpecError, load_spec, parse_formula, parse_spec, render_spec, resolve
from .entailment import (
    Counterexample, Model, ResourceExhausted, Scope, UnsatWithinScope, Valid, check_entailment,
    check_sat, enumerate_interpretations,
)
from .graph import Contract, Edge, NodeSpec, SystemGraph, topological_order, validate_graph
from .logic import Signature, alpha_equivalent, check_well_sorted, evaluate, formula_text, substitute
from .monitor import ContractMonitor, Event, ScenarioUniverse, check_trace, instantiate_monitor, step_monitor
from .simulation import NodeStub, make_stub, parse_scenario, run_simulation
