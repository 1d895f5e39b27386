"""Shared test fixtures: oracles, random formula generators, the rover universe."""

from __future__ import annotations

import itertools
import random
from pathlib import Path

from agcontracts.entailment import Scope, enumerate_interpretations, infer_signature
from agcontracts.logic import (
    FALSE, NAT, TRUE, And, App, Eq, Exists, Forall, Implies, In, Le, Lt, NatLit, Neq, Not, Or,
    Pred, Var, base_sort, conj, evaluate, set_of,
)
from agcontracts.monitor import ScenarioUniverse

ROOT = Path(__file__).resolve().parent.parent
SPECS = ROOT / "specs"
S = base_sort("S")


def spec_text(name: str) -> str:
    return (SPECS / name).read_text()


# ------------------------------------------------------------------ oracle

def naive_entails(hypotheses, conclusion, scope: Scope) -> bool:
    """True iff no interpretation and assignment within scope falsifies the entailment.

    Deliberately slow: enumerate every interpretation, then every assignment
    to the non-set free variables, and call the tree-walking evaluator.
    """
    formulas = list(hypotheses) + [conclusion]
    signature, variables = infer_signature(formulas)
    set_vars = [(n, s) for n, s in variables.items() if s.is_set]
    plain = sorted((n, s) for n, s in variables.items() if not s.is_set)
    for interp in enumerate_interpretations(signature, set_vars, scope):
        domains = [interp.domain(s) for _, s in plain]
        for values in itertools.product(*domains):
            env = dict(zip((n for n, _ in plain), values))
            if all(evaluate(h, interp, env) for h in hypotheses) and not evaluate(conclusion, interp, env):
                return False
    return True


def count_interpretations(n_sorts_sizes, preds, funcs, nat_bound=4):
    """Closed-form count of interpretations for a single base sort.

    ``preds`` and ``funcs`` list the arities over that sort; functions map
    into the same sort.
    """
    total = 0
    for n in n_sorts_sizes:
        k = 1
        for arity in preds:
            k *= 2 ** (n ** arity)
        for arity in funcs:
            k *= n ** (n ** arity)
        total += k
    return total


# --------------------------------------------------------------- generator

class FormulaGen:
    """Random well-sorted formulas over one base sort ``S``.

    Symbols: unary predicates P and Q, unary function f : S -> S.  Free
    variables x and y; binders draw from z and w (sometimes reusing x to
    exercise shadowing).  ``rich`` adds a Nat-valued function ``g``, Nat
    literals and a set-sorted free variable ``X``.
    """

    def __init__(self, rng: random.Random, rich: bool = False):
        self.rng = rng
        self.rich = rich

    def term(self, scope_vars, depth):
        r = self.rng
        v = Var(r.choice(scope_vars), S)
        if depth > 0 and r.random() < 0.35:
            return App("f", (self.term(scope_vars, depth - 1),), S)
        return v

    def nat_term(self, scope_vars):
        if self.rng.random() < 0.4:
            return NatLit(self.rng.randrange(4))
        return App("g", (self.term(scope_vars, 0),), NAT)

    def atom(self, scope_vars):
        r = self.rng
        kinds = ["P", "Q", "eq", "neq", "const"]
        if self.rich:
            kinds += ["le", "lt", "in"]
        kind = r.choice(kinds)
        if kind in ("P", "Q"):
            return Pred(kind, (self.term(scope_vars, 1),))
        if kind == "eq":
            return Eq(self.term(scope_vars, 1), self.term(scope_vars, 1))
        if kind == "neq":
            return Neq(self.term(scope_vars, 1), self.term(scope_vars, 1))
        if kind == "le":
            return Le(self.nat_term(scope_vars), self.nat_term(scope_vars))
        if kind == "lt":
            return Lt(self.nat_term(scope_vars), self.nat_term(scope_vars))
        if kind == "in":
            return In(self.term(scope_vars, 1), Var("X", set_of(S)))
        return r.choice([TRUE, FALSE])

    def formula(self, depth=3, scope_vars=("x", "y")):
        r = self.rng
        if depth == 0 or r.random() < 0.25:
            return self.atom(list(scope_vars))
        kind = r.choice(["not", "and", "or", "implies", "forall", "exists"])
        if kind == "not":
            return Not(self.formula(depth - 1, scope_vars))
        if kind in ("and", "or", "implies"):
            cls = {"and": And, "or": Or, "implies": Implies}[kind]
            return cls(self.formula(depth - 1, scope_vars), self.formula(depth - 1, scope_vars))
        name = r.choice(["z", "w", "x"])
        cls = Forall if kind == "forall" else Exists
        return cls(name, S, self.formula(depth - 1, tuple(set(scope_vars) | {name})))

    def entailment(self):
        hyps = [self.formula() for _ in range(self.rng.randrange(0, 3))]
        return hyps, self.formula()


def entailment_cases(n: int, seed: int, rich: bool = False):
    gen = FormulaGen(random.Random(seed), rich)
    return [gen.entailment() for _ in range(n)]


def formula_signature_text(rich=False) -> str:
    """Declarations that make FormulaGen output parseable."""
    lines = ["sort S", "pred P(S)", "pred Q(S)", "func f(S) : S"]
    if rich:
        lines.append("func g(S) : Nat")
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------------ rover

def rover_universe(**overrides) -> ScenarioUniverse:
    fields = dict(
        sorts={"Image": ("img0",), "Location": ("l0", "l1"), "Plan": ("p0", "p1"),
               "Command": ("c0", "c1")},
        nat_bound=4,
        constants={"goal": "l0"},
        functions={"length": {("p0",): 2, ("p1",): 3}},
        predicates={"visits": {("p0", "l0"), ("p1", "l0")}, "shows": {("img0", "l0")},
                    "drives": {("c0", "p0"), ("c1", "p1")}},
    )
    fields.update(overrides)
    return ScenarioUniverse(**fields)


def random_universe(rng: random.Random, signature, nat_bound=None, max_size=3) -> ScenarioUniverse:
    """A random closed world interpreting every symbol of ``signature``."""
    nat_bound = nat_bound or rng.randint(2, 5)
    sorts = {name: tuple(f"{name.lower()}{i}" for i in range(rng.randint(1, max_size)))
             for name in signature.sorts}

    def values(sort):
        return list(range(nat_bound)) if sort.kind == "nat" else list(sorts[sort.name])

    constants, functions, predicates = {}, {}, {}
    for sym in signature.functions.values():
        if not sym.args:
            constants[sym.name] = rng.choice(values(sym.result))
        else:
            functions[sym.name] = {args: rng.choice(values(sym.result))
                                   for args in itertools.product(*(values(a) for a in sym.args))}
    for sym in signature.predicates.values():
        predicates[sym.name] = {args for args in itertools.product(*(values(a) for a in sym.args))
                                if rng.random() < 0.6}
    return ScenarioUniverse(sorts, nat_bound, constants, functions, predicates)


SCENARIO_SPECS = ("rover.agspec", "rover-mutant.agspec", "diamond.agspec", "fanout.agspec",
                  "counter-loop.agspec", "single-node.agspec", "join-fail.agspec")
GENERIC_STUBS = ("first", "random", "satisfy", "violate")
ROVER_STUBS = {
    "Vision": ("locate-goal",), "Planner": ("plans-to-goal",),
    "Agent": ("shortest-plan", "longest-plan"), "HardwareInterface": ("drive-plan",),
}


def random_scenario(rng: random.Random):
    """(graph, stubs, universe, env_inputs, seed, steps, unroll) for a random corpus spec."""
    from agcontracts.dsl import load_spec
    from agcontracts.simulation import make_stub

    _, signature, graph = load_spec(spec_text(rng.choice(SCENARIO_SPECS)))
    universe = random_universe(rng, signature)
    stubs = {}
    for n in graph.nodes:
        labels = GENERIC_STUBS + ROVER_STUBS.get(n.name, ())
        stubs[n.name] = make_stub(rng.choice(labels), n, universe)
    fed = {(e.dst, e.dst_port) for e in graph.edges if e.src != e.dst}
    env = {}
    for n in graph.nodes:
        for p in n.in_ports:
            if (n.name, p.name) not in fed:
                env[f"{n.name}.{p.name}"] = rng.choice(universe.domain(p.sort))
    steps = rng.randint(0, 4)
    unroll = rng.choice([None, 1, 2])
    return graph, stubs, universe, env, rng.randrange(1000), steps, unroll


__all__ = [
    "ROOT", "SPECS", "S", "spec_text", "naive_entails", "count_interpretations", "FormulaGen",
    "entailment_cases", "formula_signature_text", "rover_universe", "random_universe",
    "random_scenario", "SCENARIO_SPECS", "conj",
]
