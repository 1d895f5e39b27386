"""Finite-trace monitors for ``assumption => eventually guarantee`` contracts.

A monitor starts idle.  An input event of the monitored node on which the
assumption holds makes it *obligated*, freezing the triggering inputs.  An
output event on which the guarantee holds (over the frozen inputs and the
current outputs) makes it *satisfied*.  At the end of the trace an
obligated monitor is *violated* and an idle one *vacuous*.  Satisfied,
violated and vacuous are absorbing.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .entailment import infer_signature
from .graph import Contract
from .logic import Interpretation, Sort, evaluate, free_names, free_vars, strip_eventually

INPUT, OUTPUT = "input", "output"


class MonitorError(Exception):
    pass


class TraceError(MonitorError):
    pass


# -------------------------------------------------------------- universe

@dataclass(frozen=True)
class ScenarioUniverse:
    """Closed world for runtime evaluation.

    ``sorts`` names the elements of each base sort.  ``constants`` gives
    nullary functions such as ``goal``; ``functions`` and ``predicates``
    give the remaining symbol tables over element names.
    """

    sorts: Mapping[str, tuple[str, ...]]
    nat_bound: int = 4
    constants: Mapping[str, object] = field(default_factory=dict)
    functions: Mapping[str, Mapping[tuple, object]] = field(default_factory=dict)
    predicates: Mapping[str, frozenset] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sorts", {k: tuple(v) for k, v in self.sorts.items()})
        for name, values in self.sorts.items():
            if not values:
                raise MonitorError(f"sort {name} has an empty domain")
            if len(set(values)) != len(values):
                raise MonitorError(f"sort {name} repeats a value")
        if self.nat_bound < 1:
            raise MonitorError("nat bound must be positive")
        object.__setattr__(self, "predicates",
                           {k: frozenset(tuple(t) for t in v) for k, v in self.predicates.items()})

    def domain(self, sort: Sort) -> list:
        """All runtime values of ``sort``; sets enumerate every subset."""
        if sort.kind == "nat":
            return list(range(self.nat_bound))
        if sort.kind == "base":
            self._require(sort)
            return list(self.sorts[sort.name])
        elems = self.domain(sort.element)
        return [frozenset(e for i, e in enumerate(elems) if mask >> i & 1)
                for mask in range(1 << len(elems))]

    def _require(self, sort: Sort):
        if sort.name not in self.sorts:
            raise MonitorError(f"universe has no sort {sort.name}")

    def encode(self, value, sort: Sort):
        """Runtime value to the index form used by :func:`evaluate`."""
        if sort.kind == "nat":
            if not isinstance(value, int) or isinstance(value, bool) or not 0 <= value < self.nat_bound:
                raise MonitorError(f"value {value!r} is outside Nat (bound {self.nat_bound})")
            return value
        if sort.kind == "set":
            if not isinstance(value, (set, frozenset, list, tuple)):
                raise MonitorError(f"value {value!r} is not a set of {sort.element}")
            return frozenset(self.encode(v, sort.element) for v in value)
        self._require(sort)
        try:
            return self.sorts[sort.name].index(value)
        except ValueError:
            raise MonitorError(f"value {value!r} is outside sort {sort.name}") from None

    def decode(self, index, sort: Sort):
        if sort.kind == "nat":
            return index
        if sort.kind == "set":
            return frozenset(self.decode(i, sort.element) for i in index)
        return self.sorts[sort.name][index]

    def interpretation(self, formulas: Iterable) -> Interpretation:
        """An interpretation covering every symbol the formulas use."""
        signature, _ = infer_signature(formulas)
        for s in signature.sorts.values():
            self._require(s)
        functions = {}
        for sym in signature.functions.values():
            if not sym.args:
                if sym.name in self.constants:
                    raw = {(): self.constants[sym.name]}
                else:
                    raw = self.functions.get(sym.name)
            else:
                raw = self.functions.get(sym.name)
            if raw is None:
                raise MonitorError(f"universe does not interpret {sym.name}")
            table = {}
            for args, value in raw.items():
                key = tuple(self.encode(a, s) for a, s in zip(args, sym.args))
                table[key] = self.encode(value, sym.result)
            for key in _product(self, sym.args):
                if key not in table:
                    raise MonitorError(f"universe table for {sym.name} is not total")
            functions[sym.name] = table
        predicates = {}
        for sym in signature.predicates.values():
            rows = self.predicates.get(sym.name, frozenset())
            predicates[sym.name] = frozenset(
                tuple(self.encode(a, s) for a, s in zip(row, sym.args)) for row in rows)
        return Interpretation(sizes={k: len(v) for k, v in self.sorts.items()},
                              nat_bound=self.nat_bound, functions=functions, predicates=predicates)


def _product(universe, sorts):
    return itertools.product(*(range(len(universe.sorts[s.name])) if s.kind == "base"
                               else range(universe.nat_bound) for s in sorts))


# ---------------------------------------------------------------- events

@dataclass(frozen=True)
class Event:
    step: int
    node: str
    phase: str
    values: Mapping[str, object]

    def __post_init__(self):
        if self.phase not in (INPUT, OUTPUT):
            raise TraceError(f"unknown phase {self.phase!r}")
        if self.step < 0:
            raise TraceError("steps are non-negative")

    def to_json(self) -> dict:
        return {"step": self.step, "node": self.node, "phase": self.phase,
                "values": {k: _json_value(v) for k, v in sorted(self.values.items())}}

    @classmethod
    def from_json(cls, data: Mapping) -> Event:
        values = {k: frozenset(v) if isinstance(v, list) else v for k, v in data["values"].items()}
        return cls(data["step"], data["node"], data["phase"], values)


def _json_value(v):
    if isinstance(v, (set, frozenset)):
        return sorted(v)
    return v


Trace = Sequence[Event]


def trace_to_jsonl(trace: Trace) -> str:
    return "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in trace)


def trace_from_jsonl(text: str) -> list[Event]:
    return [Event.from_json(json.loads(line)) for line in text.splitlines() if line.strip()]


def check_well_formed(trace: Trace) -> None:
    """Steps never decrease and each firing's input precedes its output."""
    last = -1
    open_inputs = set()
    for e in trace:
        if e.step < last:
            raise TraceError(f"step {e.step} follows step {last}")
        if e.step > last:
            open_inputs.clear()
        last = e.step
        key = (e.step, e.node)
        if e.phase == INPUT:
            open_inputs.add(key)
        elif key not in open_inputs:
            raise TraceError(f"output of {e.node} at step {e.step} has no preceding input")


# --------------------------------------------------------- monitor states

@dataclass(frozen=True)
class Idle:
    name = "idle"

    def to_json(self):
        return {"state": self.name}


@dataclass(frozen=True)
class Obligated:
    since: int
    inputs: tuple = ()
    name = "obligated"

    def to_json(self):
        return {"state": self.name, "since": self.since}


@dataclass(frozen=True)
class Satisfied:
    at: int
    name = "satisfied"

    def to_json(self):
        return {"state": self.name, "at": self.at}


@dataclass(frozen=True)
class Violated:
    since: int
    name = "violated"

    def to_json(self):
        return {"state": self.name, "since": self.since, "at": "end"}


@dataclass(frozen=True)
class Vacuous:
    name = "vacuous"

    def to_json(self):
        return {"state": self.name}


IDLE, VACUOUS = Idle(), Vacuous()
MonitorState = Idle | Obligated | Satisfied | Violated | Vacuous
TERMINAL = (Satisfied, Violated, Vacuous)


# --------------------------------------------------------------- monitors

class ContractMonitor:
    """Online monitor for one node contract or one composed contract.

    Variables are tied to ``(node, port)`` pairs: a node contract's ports
    belong to its node, a composed contract carries its own origins.
    """

    def __init__(self, contract, universe: ScenarioUniverse, node: str | None = None):
        self.contract = contract
        self.universe = universe
        self.assumption = contract.assumption
        self.body = strip_eventually(contract.guarantee)
        if isinstance(contract, Contract):
            self.node = node or contract.node
            ports = {**contract.input_sorts, **contract.output_sorts}
            self.origins = {v: (self.node, v) for v in ports}
            self.sorts = ports
            entry = (self.node,)
            exits = (self.node,)
        else:
            self.node = node or "system"
            self.origins = contract.origin_map
            self.sorts = {**contract.input_sorts, **contract.output_sorts}
            entry = contract.constituents[:1]
            exits = contract.guarantors
        self.sorts.update({n: s for n, s in _var_sorts(self.assumption, self.body).items()})
        missing = sorted(v for v in free_names(self.assumption) | free_names(self.body)
                         if v not in self.origins)
        if missing:
            raise MonitorError(f"no port for contract variable(s) {missing}")
        self.interp = universe.interpretation([self.assumption, self.body])
        self.by_port = {o: v for v, o in self.origins.items()}
        self.a_vars = sorted(free_names(self.assumption))
        self.g_vars = sorted(free_names(self.body))
        self.trigger_nodes = {self.origins[v][0] for v in self.a_vars} or set(entry)
        self.goal_nodes = {self.origins[v][0] for v in self.g_vars} or set(exits)
        self.seen: dict[str, object] = {}
        self.state: MonitorState = IDLE
        self.last_step = -1

    def _env(self, names, values) -> dict:
        return {n: self.universe.encode(values[n], self.sorts[n]) for n in names}

    def observe(self, event: Event) -> dict:
        """Contract variables carried by ``event``, validated against the universe."""
        found = {}
        for port, value in event.values.items():
            var = self.by_port.get((event.node, port))
            if var is not None:
                self.universe.encode(value, self.sorts[var])
                found[var] = value
        return found

    def step(self, event: Event) -> MonitorState:
        self.last_step = max(self.last_step, event.step)
        found = self.observe(event)
        self.seen.update(found)
        state = self.state
        if isinstance(state, Idle) and event.phase == INPUT and event.node in self.trigger_nodes:
            if all(v in self.seen for v in self.a_vars):
                if evaluate(self.assumption, self.interp, self._env(self.a_vars, self.seen)):
                    frozen = {v: self.seen[v] for v in self.a_vars}
                    frozen.update(found)
                    state = Obligated(event.step, tuple(sorted(frozen.items(), key=lambda kv: kv[0])))
        elif isinstance(state, Obligated) and event.phase == OUTPUT and event.node in self.goal_nodes:
            values = dict(self.seen)
            values.update(dict(state.inputs))
            if all(v in values for v in self.g_vars):
                if evaluate(self.body, self.interp, self._env(self.g_vars, values)):
                    state = Satisfied(event.step)
        self.state = state
        return state

    def finish(self) -> MonitorState:
        if isinstance(self.state, Obligated):
            self.state = Violated(self.state.since)
        elif isinstance(self.state, Idle):
            self.state = VACUOUS
        return self.state


def _var_sorts(*formulas) -> dict[str, Sort]:
    out = {}
    for f in formulas:
        for name, sort in free_vars(f):
            if sort is not None:
                out[name] = sort
    return out


def instantiate_monitor(contract, universe: ScenarioUniverse, node: str | None = None) -> ContractMonitor:
    return ContractMonitor(contract, universe, node)


def step_monitor(monitor: ContractMonitor, event: Event | None) -> MonitorState:
    """Feed one event, or ``None`` for end of trace."""
    if event is None:
        return monitor.finish()
    return monitor.step(event)


def check_trace(trace: Trace, contracts: Mapping[str, object], universe: ScenarioUniverse
                ) -> dict[str, MonitorState]:
    """Offline verdicts: fresh monitors stepped through ``trace`` then ended."""
    check_well_formed(trace)
    monitors = {name: ContractMonitor(c, universe, name) for name, c in contracts.items()}
    for event in trace:
        for m in monitors.values():
            m.step(event)
    return {name: m.finish() for name, m in monitors.items()}


def verdicts_json(verdicts: Mapping[str, MonitorState]) -> dict:
    return {name: state.to_json() for name, state in verdicts.items()}
