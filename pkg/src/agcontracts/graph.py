"""Typed node-and-edge model of a component architecture."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .logic import Formula, Sort, free_names, strip_eventually

IN, OUT = "in", "out"


class GraphError(Exception):
    pass


class CycleError(GraphError):
    def __init__(self, components):
        self.components = tuple(components)
        shown = "; ".join("{" + ", ".join(c) + "}" for c in self.components)
        super().__init__(f"graph has cycles: {shown}")


@dataclass(frozen=True)
class Port:
    name: str
    direction: str
    sort: Sort

    def __post_init__(self):
        if self.direction not in (IN, OUT):
            raise GraphError(f"port direction must be 'in' or 'out', got {self.direction!r}")


def _pairs(ports) -> tuple[tuple[str, Sort], ...]:
    if isinstance(ports, Mapping):
        return tuple(ports.items())
    return tuple(ports)


@dataclass(frozen=True)
class Contract:
    """Assumption over the inputs, guarantee over inputs and outputs."""

    assumption: Formula
    guarantee: Formula
    inputs: tuple[tuple[str, Sort], ...] = ()
    outputs: tuple[tuple[str, Sort], ...] = ()
    node: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "inputs", _pairs(self.inputs))
        object.__setattr__(self, "outputs", _pairs(self.outputs))
        ins, outs = set(self.input_sorts), set(self.output_sorts)
        stray = free_names(self.assumption) - ins
        if stray:
            raise GraphError(f"assumption mentions non-input variable(s) {sorted(stray)}")
        stray = free_names(self.guarantee) - ins - outs
        if stray:
            raise GraphError(f"guarantee mentions unknown variable(s) {sorted(stray)}")

    @property
    def input_sorts(self) -> dict[str, Sort]:
        return dict(self.inputs)

    @property
    def output_sorts(self) -> dict[str, Sort]:
        return dict(self.outputs)

    @property
    def body(self) -> Formula:
        """The guarantee without any outer ``Eventually``."""
        return strip_eventually(self.guarantee)


@dataclass(frozen=True)
class NodeSpec:
    name: str
    ports: tuple[Port, ...]
    contract: Contract
    evidence: frozenset[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "ports", tuple(self.ports))
        object.__setattr__(self, "evidence", frozenset(self.evidence))
        if not self.ports:
            raise GraphError(f"node {self.name} needs at least one port")
        names = [p.name for p in self.ports]
        if len(set(names)) != len(names):
            raise GraphError(f"node {self.name} has duplicate port names")

    def port(self, name: str) -> Port | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    @property
    def in_ports(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == IN)

    @property
    def out_ports(self) -> tuple[Port, ...]:
        return tuple(p for p in self.ports if p.direction == OUT)


@dataclass(frozen=True)
class Edge:
    src: str
    src_port: str
    dst: str
    dst_port: str

    def __str__(self):
        return f"{self.src}.{self.src_port} -> {self.dst}.{self.dst_port}"


@dataclass(frozen=True)
class SystemGraph:
    nodes: tuple[NodeSpec, ...]
    edges: tuple[Edge, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def names(self) -> list[str]:
        return [n.name for n in self.nodes]

    def node(self, name: str) -> NodeSpec:
        for n in self.nodes:
            if n.name == name:
                return n
        raise KeyError(name)

    def incoming(self, name: str) -> list[Edge]:
        return [e for e in self.edges if e.dst == name]

    def outgoing(self, name: str) -> list[Edge]:
        return [e for e in self.edges if e.src == name]

    def environment_inputs(self) -> list[tuple[str, str]]:
        """In-ports with no incoming edge; supplied by the environment."""
        fed = {(e.dst, e.dst_port) for e in self.edges}
        return [(n.name, p.name) for n in self.nodes for p in n.in_ports if (n.name, p.name) not in fed]

    def system_outputs(self) -> list[tuple[str, str]]:
        used = {(e.src, e.src_port) for e in self.edges}
        return [(n.name, p.name) for n in self.nodes for p in n.out_ports if (n.name, p.name) not in used]


@dataclass(frozen=True)
class Violation:
    code: str
    message: str
    edge: Edge | None = None


@dataclass(frozen=True)
class GraphReport:
    violations: tuple[Violation, ...]
    cycles: tuple[tuple[str, ...], ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def acyclic(self) -> bool:
        return not self.cycles


def validate_graph(graph: SystemGraph) -> GraphReport:
    """Every structural violation, plus the graph's cycle components."""
    violations = []
    seen = set()
    for n in graph.nodes:
        if n.name in seen:
            violations.append(Violation("duplicate-node", f"duplicate node name {n.name}"))
        seen.add(n.name)
    by_name = {n.name: n for n in graph.nodes}
    fan_in: dict[tuple[str, str], list[Edge]] = {}
    for e in graph.edges:
        src = by_name.get(e.src)
        dst = by_name.get(e.dst)
        sp = src.port(e.src_port) if src else None
        dp = dst.port(e.dst_port) if dst else None
        if sp is None or sp.direction != OUT:
            violations.append(Violation("dangling-endpoint", f"{e}: no out-port {e.src}.{e.src_port}", e))
        if dp is None or dp.direction != IN:
            violations.append(Violation("dangling-endpoint", f"{e}: no in-port {e.dst}.{e.dst_port}", e))
        if sp is not None and dp is not None and sp.sort != dp.sort:
            violations.append(Violation("sort-mismatch", f"{e}: cannot connect {sp.sort} to {dp.sort}", e))
        fan_in.setdefault((e.dst, e.dst_port), []).append(e)
    for (node, port), edges in fan_in.items():
        if len(edges) > 1:
            violations.append(Violation("fan-in", f"in-port {node}.{port} has {len(edges)} incoming edges",
                                        edges[1]))
    return GraphReport(tuple(violations), tuple(cycle_components(graph)))


def _successors(graph: SystemGraph, ignore_self_loops: bool) -> dict[str, list[str]]:
    succ: dict[str, set[str]] = {n.name: set() for n in graph.nodes}
    for e in graph.edges:
        if e.src in succ and e.dst in succ:
            if ignore_self_loops and e.src == e.dst:
                continue
            succ[e.src].add(e.dst)
    return {k: sorted(v) for k, v in succ.items()}


def cycle_components(graph: SystemGraph, *, ignore_self_loops: bool = False) -> list[tuple[str, ...]]:
    """Strongly connected components with more than one node or a self-loop."""
    succ = _successors(graph, ignore_self_loops)
    index: dict[str, int] = {}
    low: dict[str, int] = {}
    stack: list[str] = []
    on_stack: set[str] = set()
    found = []
    counter = 0

    def connect(v):
        nonlocal counter
        index[v] = low[v] = counter
        counter += 1
        stack.append(v)
        on_stack.add(v)
        for w in succ[v]:
            if w not in index:
                connect(w)
                low[v] = min(low[v], low[w])
            elif w in on_stack:
                low[v] = min(low[v], index[w])
        if low[v] == index[v]:
            comp = []
            while True:
                w = stack.pop()
                on_stack.discard(w)
                comp.append(w)
                if w == v:
                    break
            found.append(tuple(sorted(comp)))

    for v in sorted(succ):
        if v not in index:
            connect(v)
    cyclic = [c for c in found if len(c) > 1 or c[0] in succ[c[0]]]
    return sorted(cyclic)


def topological_order(graph: SystemGraph, *, ignore_self_loops: bool = False) -> list[str]:
    """Node names respecting every edge, ties broken by name.

    Raises :class:`CycleError` carrying the cycle components otherwise.
    """
    cycles = cycle_components(graph, ignore_self_loops=ignore_self_loops)
    if cycles:
        raise CycleError(cycles)
    succ = _successors(graph, True)
    indegree = {v: 0 for v in succ}
    for v, ws in succ.items():
        for w in ws:
            indegree[w] += 1
    ready = [v for v, d in indegree.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        v = heapq.heappop(ready)
        order.append(v)
        for w in succ[v]:
            indegree[w] -= 1
            if indegree[w] == 0:
                heapq.heappush(ready, w)
    return order


def build_graph(nodes: Iterable[NodeSpec], edges: Iterable[Edge] = ()) -> SystemGraph:
    return SystemGraph(tuple(nodes), tuple(edges))
