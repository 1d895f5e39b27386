"""Deterministic simulation of a node graph with scripted stubs.

Every step fires each node once, in topological order.  An in-port takes
its value from the producing node's output in the same step, from the
node's own previous output for a self-loop (for at most ``unroll``
feedback steps), or otherwise from the environment inputs.
"""

from __future__ import annotations

import itertools
import random
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .composition import system_contract
from .dsl import Diagnostic
from .graph import NodeSpec, SystemGraph, topological_order
from .logic import Span, evaluate, strip_eventually
from .monitor import (
    INPUT, OUTPUT, ContractMonitor, Event, MonitorError, MonitorState,
    ScenarioUniverse, Violated,
)

Behavior = Callable[[Mapping[str, object], int, int], Mapping[str, object]]
SYSTEM = "<system>"


class SimulationError(Exception):
    pass


@dataclass(frozen=True)
class NodeStub:
    name: str
    behavior: Behavior
    label: str = "custom"

    def __call__(self, inputs, seed, step):
        return self.behavior(inputs, seed, step)


# ----------------------------------------------------------- stub library

def _first(universe, sort):
    if sort.kind == "set":
        return frozenset()
    return universe.domain(sort)[0]


def _rng(seed, node, step):
    return random.Random(f"{seed}/{node}/{step}")


def _stub_first(node, universe):
    def behave(inputs, seed, step):
        return {p.name: _first(universe, p.sort) for p in node.out_ports}
    return behave


def _stub_random(node, universe):
    def behave(inputs, seed, step):
        rng = _rng(seed, node.name, step)
        out = {}
        for p in node.out_ports:
            if p.sort.kind == "set":
                out[p.name] = frozenset(e for e in universe.domain(p.sort.element) if rng.random() < 0.5)
            else:
                out[p.name] = rng.choice(universe.domain(p.sort))
        return out
    return behave


def _searching(node, universe, want: bool):
    contract = node.contract
    body = strip_eventually(contract.guarantee)
    interp = universe.interpretation([contract.assumption, body])
    sorts = {p.name: p.sort for p in node.ports}
    outs = node.out_ports

    def behave(inputs, seed, step):
        base = {k: universe.encode(v, sorts[k]) for k, v in inputs.items()}
        for combo in itertools.product(*(universe.domain(p.sort) for p in outs)):
            env = dict(base)
            env.update({p.name: universe.encode(v, p.sort) for p, v in zip(outs, combo)})
            if evaluate(body, interp, env) == want:
                return {p.name: v for p, v in zip(outs, combo)}
        return {p.name: _first(universe, p.sort) for p in outs}
    return behave


def _stub_satisfy(node, universe):
    return _searching(node, universe, True)


def _stub_violate(node, universe):
    return _searching(node, universe, False)


def _goal(universe):
    if "goal" not in universe.constants:
        raise SimulationError("stub needs a 'goal' constant in the universe")
    return universe.constants["goal"]


def _stub_locate_goal(node, universe):
    goal = _goal(universe)

    def behave(inputs, seed, step):
        return {p.name: goal if goal in universe.domain(p.sort) else _first(universe, p.sort)
                for p in node.out_ports}
    return behave


def _stub_plans_to_goal(node, universe):
    goal = _goal(universe)
    visits = universe.predicates.get("visits", frozenset())

    def behave(inputs, seed, step):
        out = {}
        for p in node.out_ports:
            if p.sort.kind == "set":
                out[p.name] = frozenset(x for x in universe.domain(p.sort.element) if (x, goal) in visits)
            else:
                out[p.name] = _first(universe, p.sort)
        return out
    return behave


def _picker(node, universe, pick):
    length = universe.functions.get("length", {})
    set_inputs = [p for p in node.in_ports if p.sort.kind == "set"]

    def behave(inputs, seed, step):
        out = {}
        for p in node.out_ports:
            candidates = []
            for q in set_inputs:
                if q.sort.element == p.sort:
                    order = universe.domain(p.sort)
                    candidates = sorted(inputs.get(q.name, ()), key=order.index)
                    break
            if candidates:
                out[p.name] = pick(candidates, key=lambda x: length.get((x,), 0))
            else:
                out[p.name] = _first(universe, p.sort)
        return out
    return behave


def _stub_shortest(node, universe):
    return _picker(node, universe, min)


def _stub_longest(node, universe):
    return _picker(node, universe, max)


def _stub_drive_plan(node, universe):
    drives = universe.predicates.get("drives", frozenset())

    def behave(inputs, seed, step):
        out = {}
        targets = [v for v in inputs.values() if not isinstance(v, (frozenset, int))]
        for p in node.out_ports:
            choice = _first(universe, p.sort)
            if p.sort.kind == "base":
                for c in universe.domain(p.sort):
                    if any((c, t) in drives for t in targets):
                        choice = c
                        break
            out[p.name] = choice
        return out
    return behave


STUB_LIBRARY: dict[str, Callable[[NodeSpec, ScenarioUniverse], Behavior]] = {
    "first": _stub_first,
    "random": _stub_random,
    "satisfy": _stub_satisfy,
    "violate": _stub_violate,
    "locate-goal": _stub_locate_goal,
    "plans-to-goal": _stub_plans_to_goal,
    "shortest-plan": _stub_shortest,
    "longest-plan": _stub_longest,
    "drive-plan": _stub_drive_plan,
}


def make_stub(label: str, node: NodeSpec, universe: ScenarioUniverse) -> NodeStub:
    if label not in STUB_LIBRARY:
        raise SimulationError(f"unknown stub label {label!r}; known: {', '.join(sorted(STUB_LIBRARY))}")
    return NodeStub(node.name, STUB_LIBRARY[label](node, universe), label)


# ------------------------------------------------------------- simulation

@dataclass(frozen=True)
class SimulationResult:
    trace: tuple[Event, ...]
    verdicts: Mapping[str, MonitorState]
    system_verdict: MonitorState

    @property
    def violations(self) -> list[str]:
        names = [n for n, s in self.verdicts.items() if isinstance(s, Violated)]
        if isinstance(self.system_verdict, Violated):
            names.append(SYSTEM)
        return names


def run_simulation(graph: SystemGraph, stubs: Mapping[str, NodeStub], universe: ScenarioUniverse,
                   env_inputs: Mapping[str, object], seed: int, max_steps: int, *,
                   unroll: int | None = None) -> SimulationResult:
    """Fire the graph ``max_steps`` times and monitor every contract online.

    ``env_inputs`` maps ``"Node.port"`` to the value of each environment
    in-port (self-loop in-ports use it for their first step).
    """
    if max_steps < 0:
        raise SimulationError("max_steps must be non-negative")
    missing = [n for n in graph.names if n not in stubs]
    if missing:
        raise SimulationError(f"no stub for node(s) {missing}")
    order = topological_order(graph, ignore_self_loops=True)
    unroll = max_steps if unroll is None else unroll
    composed, _ = system_contract(graph, unroll=max(unroll, 1))
    feeds = {}
    for e in graph.edges:
        feeds[(e.dst, e.dst_port)] = e
    for n in graph.nodes:
        for p in n.in_ports:
            edge = feeds.get((n.name, p.name))
            if (edge is None or edge.src == n.name) and f"{n.name}.{p.name}" not in env_inputs:
                raise SimulationError(f"no environment value for {n.name}.{p.name}")

    monitors = {n.name: ContractMonitor(n.contract, universe, n.name) for n in graph.nodes}
    system = ContractMonitor(composed, universe, SYSTEM)
    trace: list[Event] = []

    def record(event):
        trace.append(event)
        for m in monitors.values():
            m.step(event)
        system.step(event)

    previous: dict[str, dict] = {}
    for step in range(max_steps):
        current: dict[str, dict] = {}
        for name in order:
            node = graph.node(name)
            inputs = {}
            for p in node.in_ports:
                edge = feeds.get((name, p.name))
                if edge is not None and edge.src != name:
                    inputs[p.name] = current[edge.src][edge.src_port]
                elif edge is not None and 0 < step <= unroll:
                    inputs[p.name] = previous[name][edge.src_port]
                else:
                    inputs[p.name] = env_inputs[f"{name}.{p.name}"]
                _check_value(universe, inputs[p.name], p.sort, f"{name}.{p.name}")
            record(Event(step, name, INPUT, inputs))
            outputs = dict(stubs[name](dict(inputs), seed, step))
            expected = {p.name for p in node.out_ports}
            if set(outputs) != expected:
                raise SimulationError(f"stub for {name} produced ports {sorted(outputs)}, expected {sorted(expected)}")
            for p in node.out_ports:
                outputs[p.name] = _normalize(outputs[p.name])
                _check_value(universe, outputs[p.name], p.sort, f"{name}.{p.name}")
            record(Event(step, name, OUTPUT, outputs))
            current[name] = outputs
        previous = current

    verdicts = {name: m.finish() for name, m in monitors.items()}
    return SimulationResult(tuple(trace), verdicts, system.finish())


def _normalize(value):
    if isinstance(value, (set, list, tuple)):
        return frozenset(value)
    return value


def _check_value(universe, value, sort, where):
    try:
        universe.encode(value, sort)
    except MonitorError as exc:
        raise SimulationError(f"{where}: {exc}") from None


def system_contracts(graph: SystemGraph, unroll: int = 1) -> dict[str, object]:
    """Node contracts plus the composed contract, keyed as in simulation verdicts."""
    contracts = {n.name: n.contract for n in graph.nodes}
    contracts[SYSTEM] = system_contract(graph, unroll=unroll)[0]
    return contracts


# ---------------------------------------------------------- scenario files

@dataclass
class Scenario:
    universe: ScenarioUniverse
    stubs: dict[str, str] = field(default_factory=dict)
    inputs: dict[str, object] = field(default_factory=dict)
    seed: int = 0
    steps: int = 1
    unroll: int | None = None

    def build_stubs(self, graph: SystemGraph) -> dict[str, NodeStub]:
        return {n.name: make_stub(self.stubs[n.name], n, self.universe)
                for n in graph.nodes if n.name in self.stubs}


class ScenarioError(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = tuple(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


_IDENT = r"[A-Za-z_][A-Za-z0-9_]*"
_LINE_PATTERNS = [
    ("sort", re.compile(rf"sort\s+({_IDENT})\s*=\s*(.+)$")),
    ("nat", re.compile(r"nat\s+(\d+)$")),
    ("const", re.compile(rf"const\s+({_IDENT})\s*=\s*(.+)$")),
    ("func", re.compile(rf"func\s+({_IDENT})\s*\(([^)]*)\)\s*=\s*(.+)$")),
    ("pred", re.compile(rf"pred\s+({_IDENT})\s*\(([^)]*)\)$")),
    ("stub", re.compile(rf"stub\s+({_IDENT})\s*=\s*([A-Za-z0-9_-]+)$")),
    ("input", re.compile(rf"input\s+({_IDENT})\.({_IDENT})\s*=\s*(.+)$")),
    ("seed", re.compile(r"seed\s+(-?\d+)$")),
    ("steps", re.compile(r"steps\s+(\d+)$")),
    ("unroll", re.compile(r"unroll\s+(\d+)$")),
]


def _atom(text: str):
    text = text.strip()
    if re.fullmatch(r"\d+", text):
        return int(text)
    if re.fullmatch(_IDENT, text):
        return text
    raise ValueError(f"bad value {text!r}")


def _value(text: str):
    text = text.strip()
    if text.startswith("{"):
        if not text.endswith("}"):
            raise ValueError(f"unclosed set {text!r}")
        inner = text[1:-1].strip()
        return frozenset(_atom(t) for t in inner.split(",")) if inner else frozenset()
    return _atom(text)


def _args(text: str) -> tuple:
    text = text.strip()
    return tuple(_atom(t) for t in text.split(",")) if text else ()


def parse_scenario(text: str) -> Scenario:
    """Parse a line-oriented ``.agsim`` scenario.

    ::

        sort Plan = p0, p1
        nat 4
        const goal = l0
        func length(p0) = 2
        pred visits(p0, l0)
        stub Agent = shortest-plan
        input Vision.frame = img0
        seed 7
        steps 1
    """
    diags = []
    sorts, constants, functions, predicates = {}, {}, {}, {}
    stubs, inputs = {}, {}
    settings = {"nat": 4, "seed": 0, "steps": 1, "unroll": None}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("--", 1)[0].strip()
        if not line:
            continue
        span = Span(lineno, raw.index(line[0]) + 1, len(line))
        for kind, pattern in _LINE_PATTERNS:
            m = pattern.match(line)
            if m:
                break
        else:
            diags.append(Diagnostic("error", f"unrecognized scenario line {line!r}", span, "scenario"))
            continue
        try:
            if kind == "sort":
                sorts[m[1]] = tuple(_atom(v) for v in m[2].split(","))
            elif kind in ("nat", "seed", "steps", "unroll"):
                settings[kind] = int(m[1])
            elif kind == "const":
                constants[m[1]] = _atom(m[2])
            elif kind == "func":
                functions.setdefault(m[1], {})[_args(m[2])] = _atom(m[3])
            elif kind == "pred":
                predicates.setdefault(m[1], set()).add(_args(m[2]))
            elif kind == "stub":
                if m[1] in stubs:
                    raise ValueError(f"duplicate stub for {m[1]}")
                stubs[m[1]] = m[2]
            elif kind == "input":
                inputs[f"{m[1]}.{m[2]}"] = _value(m[3])
        except ValueError as exc:
            diags.append(Diagnostic("error", str(exc), span, "scenario"))
    try:
        universe = ScenarioUniverse(sorts, settings["nat"], constants, functions, predicates)
    except MonitorError as exc:
        diags.append(Diagnostic("error", str(exc), Span(1, 1, 1), "scenario"))
    if diags:
        raise ScenarioError(diags)
    return Scenario(universe, stubs, inputs, settings["seed"], settings["steps"], settings["unroll"])
