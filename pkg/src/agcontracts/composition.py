"""Composition calculus for assume-guarantee contracts.

Each rule returns a composed contract ``A => eventually G`` together with
the compatibility obligations that justify it:

============  ==============================================  =========================
rule          obligation(s)                                    composed contract
============  ==============================================  =========================
sequential    [G1] |= A2[binding]                              (A1, ◊G2)
join          [G_u1, ..., G_uk] |= A_w[bindings]                (A_u1 ∧ ... ∧ A_uk, ◊G_w)
branch        per branch b: [G_up, guard_b] |= A_b[binding]    (A_up, ◊(∧ G_b)) when all
                                                               guards are true, else
                                                               (A_up, ◊(∨ guard_b ∧ G_b))
loop          [G] |= A[in := out]                              (A, ◊G), unroll bound k
============  ==============================================  =========================

Variables of different contracts live in separate namespaces: names that
collide without being connected are renamed apart with a numeric suffix.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .entailment import (
    DEFAULT_BUDGET, DEFAULT_SCOPE, Counterexample, ResourceExhausted, Scope,
    UnsatWithinScope, Valid, check_entailment, check_sat,
)
from .graph import (
    Contract, SystemGraph, cycle_components, topological_order, validate_graph,
)
from .logic import (
    TRUE, And, Sort, Var, conj, count_eventually, disj, eventually, free_names,
    fresh_name, rename_free, strip_eventually, substitute,
)

PATTERNS = ("sequential", "join", "branch", "loop")
VALID, FAILED, EXHAUSTED, PENDING = "valid-within-scope", "failed", "exhausted", "pending"


class CompositionError(Exception):
    pass


@dataclass(frozen=True)
class ComposedContract:
    assumption: object
    guarantee: object
    pattern: str
    constituents: tuple[str, ...]
    inputs: tuple[tuple[str, Sort], ...] = ()
    outputs: tuple[tuple[str, Sort], ...] = ()
    origins: tuple[tuple[str, str, str], ...] = ()
    guarantors: tuple[str, ...] = ()
    unroll: int | None = None

    def __post_init__(self):
        if self.pattern not in PATTERNS:
            raise CompositionError(f"unknown pattern {self.pattern!r}")
        object.__setattr__(self, "guarantee", eventually(self.guarantee))
        if count_eventually(self.guarantee) != 1:
            raise CompositionError("a composed guarantee has exactly one outer eventually")

    @property
    def body(self):
        return strip_eventually(self.guarantee)

    @property
    def input_sorts(self) -> dict[str, Sort]:
        return dict(self.inputs)

    @property
    def output_sorts(self) -> dict[str, Sort]:
        return dict(self.outputs)

    @property
    def origin_map(self) -> dict[str, tuple[str, str]]:
        return {v: (n, p) for v, n, p in self.origins}


@dataclass(frozen=True)
class Obligation:
    id: str
    hypotheses: tuple
    conclusion: object
    binding: tuple[tuple[str, str], ...]
    origin: str
    sources: tuple[str, ...] = ()
    targets: tuple[str, ...] = ()
    status: str = PENDING
    result: object = field(default=None, compare=False)
    warnings: tuple[str, ...] = ()

    @property
    def counterexample(self) -> Counterexample | None:
        return self.result if isinstance(self.result, Counterexample) else None


# ------------------------------------------------------- namespace views

@dataclass(frozen=True)
class _View:
    names: tuple[str, ...]
    guarantors: tuple[str, ...]
    assumption: object
    body: object
    inputs: dict
    outputs: dict
    origins: dict

    def variables(self) -> set[str]:
        return (set(self.inputs) | set(self.outputs) | set(self.origins)
                | free_names(self.assumption) | free_names(self.body))

    def rename(self, mapping: Mapping[str, str]) -> _View:
        if not mapping:
            return self

        def keys(d):
            return {mapping.get(k, k): v for k, v in d.items()}
        return replace(self, assumption=rename_free(self.assumption, mapping),
                       body=rename_free(self.body, mapping), inputs=keys(self.inputs),
                       outputs=keys(self.outputs), origins=keys(self.origins))


def _view(c) -> _View:
    if isinstance(c, ComposedContract):
        return _View(c.constituents, c.guarantors or c.constituents[-1:], c.assumption, c.body,
                     c.input_sorts, c.output_sorts, c.origin_map)
    if isinstance(c, Contract):
        name = c.node or "contract"
        ports = {**c.input_sorts, **c.output_sorts}
        return _View((name,), (name,), c.assumption, c.body, c.input_sorts, c.output_sorts,
                     {v: (name, v) for v in ports})
    raise TypeError(f"expected a contract, got {type(c).__name__}")


def _apart(view: _View, taken: set[str], keep: Iterable[str] = ()) -> tuple[_View, dict[str, str]]:
    keep = set(keep)
    own = view.variables()
    avoid = set(taken) | own
    mapping = {}
    for name in sorted(own):
        if name in taken and name not in keep:
            new = fresh_name(name, avoid)
            avoid.add(new)
            mapping[name] = new
    return view.rename(mapping), mapping


def _binding_pairs(binding) -> tuple[tuple[str, str], ...]:
    if binding is None:
        return ()
    if isinstance(binding, Mapping):
        return tuple(binding.items())
    return tuple(tuple(p) for p in binding)


def _check_binding(up: _View, down: _View, pairs, what: str):
    if len({d for _, d in pairs}) != len(pairs):
        raise CompositionError(f"{what}: an in-port is bound twice")
    for u, d in pairs:
        if u not in up.outputs:
            raise CompositionError(f"{what}: {u} is not an output of {'+'.join(up.names)}")
        if d not in down.inputs:
            raise CompositionError(f"{what}: {d} is not an input of {'+'.join(down.names)}")
        if up.outputs[u] != down.inputs[d]:
            raise CompositionError(f"{what}: cannot bind {u}: {up.outputs[u]} to {d}: {down.inputs[d]}")


def _check_environment(down: _View, bound: set[str], environment, what: str):
    if environment is None:
        return
    missing = sorted(set(down.inputs) - bound - set(environment))
    if missing:
        raise CompositionError(f"{what}: in-port(s) {missing} are neither bound nor environment inputs")


def _port(view: _View, var: str) -> str:
    node, port = view.origins.get(var, (view.names[-1], var))
    return f"{node}.{port}"


def _bind_down(up: _View, down: _View, pairs, taken: set[str]):
    """Rename ``down`` apart from ``taken``; return it and the binding as terms."""
    keep = {d for u, d in pairs if u == d}
    down, mapping = _apart(down, taken, keep)
    terms = {mapping.get(d, d): Var(u, up.outputs[u]) for u, d in pairs}
    return down, mapping, terms


# ----------------------------------------------------------------- rules

def compose_sequential(c1, c2, binding, *, environment: Iterable[str] | None = None):
    """``c1`` feeds ``c2``; ``binding`` maps c1 out-ports to c2 in-ports."""
    up, down = _view(c1), _view(c2)
    pairs = _binding_pairs(binding)
    what = f"{'+'.join(up.names)} ; {'+'.join(down.names)}"
    _check_binding(up, down, pairs, what)
    _check_environment(down, {d for _, d in pairs}, environment, what)
    down, mapping, terms = _bind_down(up, down, pairs, up.variables())
    obligation = Obligation(
        id=f"{'+'.join(up.guarantors)}->{'+'.join(down.names)}",
        hypotheses=(up.body,),
        conclusion=substitute(down.assumption, terms),
        binding=pairs,
        origin="sequential",
        sources=tuple(_port(up, u) for u, _ in pairs),
        targets=tuple(_port(down, mapping.get(d, d)) for _, d in pairs),
    )
    composed = ComposedContract(
        assumption=up.assumption, guarantee=eventually(down.body), pattern="sequential",
        constituents=up.names + down.names,
        inputs=tuple(up.inputs.items()),
        outputs=tuple({**down.inputs, **down.outputs}.items()),
        origins=tuple((v, n, p) for v, (n, p) in {**up.origins, **down.origins}.items()),
        guarantors=down.guarantors,
    )
    return composed, obligation


def compose_join(upstreams: Sequence, downstream, bindings: Sequence, *,
                 environment: Iterable[str] | None = None):
    """Several upstream contracts feed distinct in-ports of ``downstream``."""
    if not upstreams:
        raise CompositionError("join needs at least one upstream contract")
    if len(bindings) != len(upstreams):
        raise CompositionError("join needs one binding per upstream contract")
    if len(upstreams) == 1:
        return compose_sequential(upstreams[0], downstream, bindings[0], environment=environment)
    views, all_pairs, taken = [], [], set()
    for c, b in zip(upstreams, bindings):
        view, mapping = _apart(_view(c), taken)
        taken |= view.variables()
        pairs = tuple((mapping.get(u, u), d) for u, d in _binding_pairs(b))
        views.append(view)
        all_pairs.append(pairs)
    down = _view(downstream)
    what = f"join into {'+'.join(down.names)}"
    seen = set()
    for view, pairs in zip(views, all_pairs):
        _check_binding(view, down, pairs, what)
        for _, d in pairs:
            if d in seen:
                raise CompositionError(f"{what}: in-port {d} is bound by two upstreams")
            seen.add(d)
    _check_environment(down, seen, environment, what)
    merged = _View(tuple(n for v in views for n in v.names), (), TRUE, TRUE,
                   {}, {k: s for v in views for k, s in v.outputs.items()},
                   {k: o for v in views for k, o in v.origins.items()})
    flat = tuple(p for pairs in all_pairs for p in pairs)
    down, mapping, terms = _bind_down(merged, down, flat, taken)
    obligation = Obligation(
        id=f"{'+'.join(g for v in views for g in v.guarantors)}->{'+'.join(down.names)}",
        hypotheses=tuple(v.body for v in views),
        conclusion=substitute(down.assumption, terms),
        binding=flat,
        origin="join",
        sources=tuple(_port(merged, u) for u, _ in flat),
        targets=tuple(_port(down, mapping.get(d, d)) for _, d in flat),
    )
    origins = {k: o for v in views for k, o in v.origins.items()}
    origins.update(down.origins)
    composed = ComposedContract(
        assumption=conj(v.assumption for v in views), guarantee=eventually(down.body),
        pattern="join", constituents=merged.names + down.names,
        inputs=tuple((k, s) for v in views for k, s in v.inputs.items()),
        outputs=tuple({**down.inputs, **down.outputs}.items()),
        origins=tuple((v, n, p) for v, (n, p) in origins.items()),
        guarantors=down.guarantors,
    )
    return composed, obligation


def compose_branch(upstream, branches: Sequence, bindings: Sequence, *,
                   environment: Iterable[str] | None = None):
    """``upstream`` fans out to guarded branch contracts.

    ``branches`` is a sequence of ``(guard, contract)`` pairs; guards range
    over the upstream's outputs.  Returns the composed contract and one
    obligation per branch.
    """
    if not branches:
        raise CompositionError("branch needs at least one branch contract")
    if len(bindings) != len(branches):
        raise CompositionError("branch needs one binding per branch")
    up = _view(upstream)
    for guard, _ in branches:
        stray = free_names(guard) - set(up.outputs)
        if stray:
            raise CompositionError(f"guard mentions non-upstream variable(s) {sorted(stray)}")
    if len(branches) == 1 and branches[0][0] == TRUE:
        composed, obligation = compose_sequential(upstream, branches[0][1], bindings[0],
                                                  environment=environment)
        return composed, [obligation]
    taken = up.variables()
    obligations, bodies, names, outputs, origins = [], [], list(up.names), {}, dict(up.origins)
    all_true = all(g == TRUE for g, _ in branches)
    for (guard, contract), binding in zip(branches, bindings):
        down = _view(contract)
        pairs = _binding_pairs(binding)
        what = f"branch {'+'.join(up.names)} -> {'+'.join(down.names)}"
        _check_binding(up, down, pairs, what)
        _check_environment(down, {d for _, d in pairs}, environment, what)
        down, mapping, terms = _bind_down(up, down, pairs, taken)
        taken |= down.variables()
        hypotheses = (up.body,) if guard == TRUE else (up.body, guard)
        obligations.append(Obligation(
            id=f"{'+'.join(up.guarantors)}->{'+'.join(down.names)}",
            hypotheses=hypotheses,
            conclusion=substitute(down.assumption, terms),
            binding=pairs,
            origin="branch",
            sources=tuple(_port(up, u) for u, _ in pairs),
            targets=tuple(_port(down, mapping.get(d, d)) for _, d in pairs),
        ))
        bodies.append(down.body if all_true else And(guard, down.body))
        names.extend(down.names)
        outputs.update(down.inputs)
        outputs.update(down.outputs)
        origins.update(down.origins)
    composed = ComposedContract(
        assumption=up.assumption,
        guarantee=eventually(conj(bodies) if all_true else disj(bodies)),
        pattern="branch", constituents=tuple(names),
        inputs=tuple(up.inputs.items()), outputs=tuple(outputs.items()),
        origins=tuple((v, n, p) for v, (n, p) in origins.items()),
        guarantors=tuple(n for _, c in branches for n in _view(c).guarantors),
    )
    return composed, obligations


def compose_loop(contract, self_binding, unroll: int):
    """Feed some outputs of ``contract`` back into its own inputs.

    ``self_binding`` maps out-ports to in-ports.  The loop is monitored for
    at most ``unroll`` iterations.
    """
    if unroll < 1:
        raise CompositionError("unroll bound must be a positive integer")
    pairs = _binding_pairs(self_binding)
    if not pairs:
        raise CompositionError("loop needs a nonempty self-binding")
    view = _view(contract)
    what = f"loop on {'+'.join(view.names)}"
    _check_binding(view, view, pairs, what)
    terms = {d: Var(u, view.outputs[u]) for u, d in pairs}
    name = "+".join(view.guarantors)
    obligation = Obligation(
        id=f"{name}->{name}",
        hypotheses=(view.body,),
        conclusion=substitute(view.assumption, terms),
        binding=pairs,
        origin="loop",
        sources=tuple(_port(view, u) for u, _ in pairs),
        targets=tuple(_port(view, d) for _, d in pairs),
    )
    composed = ComposedContract(
        assumption=view.assumption, guarantee=eventually(view.body), pattern="loop",
        constituents=view.names, inputs=tuple(view.inputs.items()),
        outputs=tuple({**view.inputs, **view.outputs}.items()),
        origins=tuple((v, n, p) for v, (n, p) in view.origins.items()),
        guarantors=view.guarantors, unroll=unroll,
    )
    return composed, obligation


# ------------------------------------------------------------- discharge

def discharge_obligations(obligations: Sequence[Obligation], scope: Scope = DEFAULT_SCOPE, *,
                          budget: int = DEFAULT_BUDGET) -> tuple[list[Obligation], dict[str, int]]:
    """Check every obligation within ``scope``; returns updated copies and status counts.

    An obligation whose hypotheses have no model within scope still passes
    but carries a vacuity warning.
    """
    done = []
    for ob in obligations:
        result = check_entailment(ob.hypotheses, ob.conclusion, scope, budget=budget)
        warnings = list(ob.warnings)
        if isinstance(result, Valid):
            status = VALID
            if ob.hypotheses:
                sat = check_sat(conj(ob.hypotheses), scope, budget=budget)
                if isinstance(sat, UnsatWithinScope):
                    warnings.append("hypotheses are unsatisfiable within scope; the obligation holds vacuously")
        elif isinstance(result, ResourceExhausted):
            status = EXHAUSTED
        else:
            status = FAILED
        done.append(replace(ob, status=status, result=result, warnings=tuple(warnings)))
    counts = Counter(ob.status for ob in done)
    summary = {s: counts.get(s, 0) for s in (VALID, FAILED, EXHAUSTED)}
    return done, summary


# -------------------------------------------------------- system contract

def system_contract(graph: SystemGraph, *, unroll: int = 1) -> tuple[ComposedContract, list[Obligation]]:
    """Fold the calculus over ``graph`` in topological order.

    Sequential along single edges, branch where one node feeds several nodes
    that have no other producer, join at nodes with several producers, loop
    at self-loops.  The end-to-end assumption conjoins the source nodes'
    assumptions; the guarantee is eventually the conjunction of the sink
    nodes' guarantees.
    """
    report = validate_graph(graph)
    if not report.ok:
        raise CompositionError("; ".join(v.message for v in report.violations))
    multi = cycle_components(graph, ignore_self_loops=True)
    if multi:
        raise CompositionError("unsupported cycle through " + "; ".join(", ".join(c) for c in multi))
    order = topological_order(graph, ignore_self_loops=True)
    position = {n: i for i, n in enumerate(order)}
    contract = {n.name: n.contract for n in graph.nodes}

    def producers(v):
        return sorted({e.src for e in graph.incoming(v) if e.src != v}, key=position.get)

    def consumers(u):
        return sorted({e.dst for e in graph.outgoing(u) if e.dst != u}, key=position.get)

    def pairs(u, v):
        return tuple((e.src_port, e.dst_port) for e in graph.edges if e.src == u and e.dst == v)

    obligations: list[Obligation] = []
    patterns = set()
    handled = set()
    for v in order:
        ups = producers(v)
        if len(ups) == 1 and v not in handled:
            u = ups[0]
            siblings = [w for w in consumers(u) if producers(w) == [u]]
            if len(siblings) > 1:
                _, obs = compose_branch(contract[u], [(TRUE, contract[w]) for w in siblings],
                                        [pairs(u, w) for w in siblings])
                obligations.extend(obs)
                handled.update(siblings)
                patterns.add("branch")
            else:
                _, ob = compose_sequential(contract[u], contract[v], pairs(u, v))
                obligations.append(ob)
                patterns.add("sequential")
        elif len(ups) > 1:
            _, ob = compose_join([contract[u] for u in ups], contract[v], [pairs(u, v) for u in ups])
            obligations.append(ob)
            patterns.add("join")
        loop = pairs(v, v)
        if loop:
            _, ob = compose_loop(contract[v], loop, unroll)
            obligations.append(ob)
            patterns.add("loop")

    sources = [n for n in order if not producers(n)]
    sinks = [n for n in order if not consumers(n)]
    taken: set[str] = set()
    assumptions, inputs, origins, views = [], {}, {}, {}
    for n in sources:
        view, _ = _apart(_view(contract[n]), taken)
        taken |= view.variables()
        views[n] = view
        assumptions.append(view.assumption)
        inputs.update(view.inputs)
        origins.update({k: o for k, o in view.origins.items() if k in view.inputs})
    bodies, outputs = [], {}
    for n in sinks:
        view = views.get(n)
        if view is None:
            view, _ = _apart(_view(contract[n]), taken)
            taken |= view.variables()
        bodies.append(view.body)
        outputs.update(view.inputs)
        outputs.update(view.outputs)
        origins.update(view.origins)
    for pattern in ("join", "branch", "loop", "sequential"):
        if pattern in patterns:
            break
    else:
        pattern = "sequential"
    composed = ComposedContract(
        assumption=conj([a for a in assumptions if a != TRUE]), guarantee=eventually(conj(bodies)),
        pattern=pattern,
        constituents=tuple(order), inputs=tuple(inputs.items()), outputs=tuple(outputs.items()),
        origins=tuple((v, n, p) for v, (n, p) in origins.items()), guarantors=tuple(sinks),
        unroll=unroll if "loop" in patterns else None,
    )
    return composed, obligations
