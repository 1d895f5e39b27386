"""Scope-bounded model enumeration for satisfiability and entailment.

Enumeration order (canonical, used to pick the first counterexample):

1. Domain-size vectors over the signature's base sorts (sorted by name),
   ordered by total size and then lexicographically.  The first
   counterexample found is therefore size-minimal.
2. Within one size vector: function tables, then predicate tables, then
   set-valued constants, each group by symbol name, the first symbol
   varying slowest.  A function table lists its results for the argument
   tuples in lexicographic order and is itself enumerated
   lexicographically.  Predicate tables and sets are counted upward in
   binary, the first tuple (element) being the least significant bit, so
   the empty relation comes first and ``{0}`` precedes ``{1}``.
3. For entailment and satisfiability, assignments to the non-set free
   variables (sorted by name) are enumerated lexicographically inside each
   interpretation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Mapping, Sequence

from .logic import (
    NAT, And, App, BoolConst, Eq, Eventually, Exists, Forall, FunctionSymbol,
    Implies, In, Interpretation, Le, LogicError, Lt, Neq, Not, NatLit, Or, Pred,
    PredicateSymbol, Signature, Sort, Var, conj, free_vars, term_sort, walk,
)

DEFAULT_BUDGET = 10**7


class ScopeError(LogicError):
    pass


@dataclass(frozen=True)
class Scope:
    """Per-sort domain bounds plus the Nat bound.

    ``default`` applies to base sorts without an override; ``None`` makes
    every base sort mandatory in ``overrides``.
    """

    default: int | None = 3
    nat_bound: int = 4
    overrides: tuple[tuple[str, int], ...] = ()

    def __post_init__(self):
        if isinstance(self.overrides, Mapping):
            object.__setattr__(self, "overrides", tuple(sorted(self.overrides.items())))
        bounds = [b for _, b in self.overrides] + [self.nat_bound]
        if self.default is not None:
            bounds.append(self.default)
        if any(b < 1 for b in bounds):
            raise ScopeError("all scope bounds must be at least 1")

    def bound(self, sort_name: str) -> int:
        for name, b in self.overrides:
            if name == sort_name:
                return b
        if self.default is None:
            raise ScopeError(f"scope has no bound for sort {sort_name}")
        return self.default

    def describe(self) -> str:
        parts = [f"{n}<={b}" for n, b in self.overrides]
        if self.default is not None:
            parts.append(f"other sorts<={self.default}")
        parts.append(f"Nat<{self.nat_bound}")
        return ", ".join(parts)

    def to_json(self) -> dict:
        return {"default": self.default, "nat_bound": self.nat_bound,
                "sorts": dict(self.overrides)}


DEFAULT_SCOPE = Scope()


# --------------------------------------------------------------- results

@dataclass(frozen=True)
class Valid:
    scope: Scope
    examined: int

    def __str__(self):
        return f"valid within scope ({self.scope.describe()}); {self.examined} cases examined"


@dataclass(frozen=True)
class Counterexample:
    interpretation: Interpretation
    assignment: Mapping[str, object]
    scope: Scope
    signature: Signature = field(compare=False, repr=False, default=None)
    variable_sorts: Mapping[str, Sort] = field(compare=False, repr=False, default_factory=dict)

    def to_json(self) -> dict:
        return model_json(self.interpretation, self.assignment, self.signature, self.variable_sorts)

    def __str__(self):
        return "counterexample:\n" + model_text(self.interpretation, self.assignment,
                                                self.signature, self.variable_sorts)


@dataclass(frozen=True)
class Model:
    interpretation: Interpretation
    assignment: Mapping[str, object]
    signature: Signature = field(compare=False, repr=False, default=None)
    variable_sorts: Mapping[str, Sort] = field(compare=False, repr=False, default_factory=dict)

    def to_json(self) -> dict:
        return model_json(self.interpretation, self.assignment, self.signature, self.variable_sorts)


@dataclass(frozen=True)
class UnsatWithinScope:
    scope: Scope


@dataclass(frozen=True)
class ResourceExhausted:
    examined: int
    budget: int

    def __str__(self):
        return f"budget of {self.budget} cases exhausted after {self.examined}"


# ------------------------------------------------------------ signatures

def infer_signature(formulas: Iterable) -> tuple[Signature, dict[str, Sort]]:
    """Recover the symbols used by sort-annotated formulas.

    Returns the signature restricted to what the formulas mention and the
    sorts of their free variables.
    """
    sorts: dict[str, Sort] = {}
    functions: dict[str, FunctionSymbol] = {}
    predicates: dict[str, PredicateSymbol] = {}
    variables: dict[str, Sort] = {}

    def note_sort(s: Sort | None, where):
        if s is None:
            raise LogicError(f"unsorted term {where!r}; run check_well_sorted first")
        if s.kind == "set":
            s = s.element
        if s.kind == "base":
            sorts.setdefault(s.name, s)

    def add(table, sym):
        old = table.setdefault(sym.name, sym)
        if old != sym:
            raise LogicError(f"symbol {sym.name} used with inconsistent sorts")

    formulas = list(formulas)
    for f in formulas:
        for node in walk(f):
            if isinstance(node, Eventually):
                raise LogicError("eventually is not first-order; strip it before checking")
            if isinstance(node, Var):
                note_sort(node.sort, node)
            elif isinstance(node, App):
                note_sort(node.sort, node)
                arg_sorts = tuple(term_sort(a) for a in node.args)
                for s in arg_sorts:
                    note_sort(s, node)
                add(functions, FunctionSymbol(node.name, arg_sorts, node.sort))
            elif isinstance(node, Pred):
                arg_sorts = tuple(term_sort(a) for a in node.args)
                for s in arg_sorts:
                    note_sort(s, node)
                add(predicates, PredicateSymbol(node.name, arg_sorts))
            elif isinstance(node, (Forall, Exists)):
                note_sort(node.sort, node)
        for name, sort in free_vars(f):
            if variables.setdefault(name, sort) != sort:
                raise LogicError(f"free variable {name} used with sorts {variables[name]} and {sort}")
    signature = Signature(sorts=[sorts[n] for n in sorted(sorts)],
                          functions=[functions[n] for n in sorted(functions)],
                          predicates=[predicates[n] for n in sorted(predicates)])
    return signature, variables


# ----------------------------------------------------------- enumeration

class InterpretationStream:
    """Iterator over interpretations; ``truncated`` is set if ``limit`` cut it short."""

    def __init__(self, source: Iterator[Interpretation], limit: int | None):
        self._source = source
        self._limit = limit
        self.count = 0
        self.truncated = False

    def __iter__(self):
        return self

    def __next__(self) -> Interpretation:
        if self._limit is not None and self.count >= self._limit:
            for _ in self._source:
                self.truncated = True
                break
            raise StopIteration
        item = next(self._source)
        self.count += 1
        return item


def size_vectors(sort_names: Sequence[str], scope: Scope) -> list[tuple[int, ...]]:
    ranges = [range(1, scope.bound(n) + 1) for n in sort_names]
    return sorted(itertools.product(*ranges), key=lambda v: (sum(v), v))


def enumerate_interpretations(signature: Signature, universe_constants: Iterable[tuple[str, Sort]] = (),
                              scope: Scope = DEFAULT_SCOPE, *, limit: int | None = None
                              ) -> InterpretationStream:
    """Every interpretation of ``signature`` within ``scope``, in canonical order.

    ``universe_constants`` are set-sorted constants given every subset value.
    """
    constants = sorted(universe_constants, key=lambda c: c[0])
    for name, sort in constants:
        if not sort.is_set:
            raise LogicError(f"universe constant {name} must be set-sorted")
    return InterpretationStream(_interpretations(signature, constants, scope), limit)


def _interpretations(signature, constants, scope):
    sort_names = sorted(signature.sorts)
    functions = [signature.functions[n] for n in sorted(signature.functions)]
    predicates = [signature.predicates[n] for n in sorted(signature.predicates)]
    for vector in size_vectors(sort_names, scope):
        sizes = dict(zip(sort_names, vector))

        def dom(s: Sort, sizes=sizes) -> range:
            return range(scope.nat_bound) if s.kind == "nat" else range(sizes[s.name])

        slots: list[tuple[str, str, list, Callable[[], Iterator]]] = []
        for sym in functions:
            keys = list(itertools.product(*(dom(s) for s in sym.args)))
            result = dom(sym.result)
            slots.append(("f", sym.name, keys,
                          lambda keys=keys, result=result: itertools.product(result, repeat=len(keys))))
        for sym in predicates:
            keys = list(itertools.product(*(dom(s) for s in sym.args)))
            slots.append(("p", sym.name, keys,
                          lambda keys=keys: _bit_vectors(len(keys))))
        for name, sort in constants:
            keys = list(dom(sort.element))
            slots.append(("s", name, keys, lambda keys=keys: _bit_vectors(len(keys))))
        for choice in _nested(slots, 0):
            fun, rel, sets = {}, {}, {}
            for (kind, name, keys, _), picked in zip(slots, choice):
                if kind == "f":
                    fun[name] = dict(zip(keys, picked))
                elif kind == "p":
                    rel[name] = frozenset(k for k, bit in zip(keys, picked) if bit)
                else:
                    sets[name] = frozenset(k for k, bit in zip(keys, picked) if bit)
            yield Interpretation(sizes=dict(sizes), nat_bound=scope.nat_bound,
                                 functions=fun, predicates=rel, sets=sets)


def _bit_vectors(n):
    for mask in range(1 << n):
        yield tuple(bool(mask >> i & 1) for i in range(n))


def _nested(slots, i):
    if i == len(slots):
        yield ()
        return
    for picked in slots[i][3]():
        for rest in _nested(slots, i + 1):
            yield (picked,) + rest


# ------------------------------------------------------- compiled checks

def _compile_term(t):
    if isinstance(t, Var):
        name = t.name

        def var(I, env):
            try:
                return env[name]
            except KeyError:
                return I.sets[name]
        return var
    if isinstance(t, NatLit):
        value = t.value
        return lambda I, env: value
    name = t.name
    args = [_compile_term(a) for a in t.args]
    if not args:
        return lambda I, env: I.functions[name][()]
    return lambda I, env: I.functions[name][tuple(a(I, env) for a in args)]


def _compile(f):
    if isinstance(f, BoolConst):
        value = f.value
        return lambda I, env: value
    if isinstance(f, Pred):
        name = f.name
        args = [_compile_term(a) for a in f.args]
        return lambda I, env: tuple(a(I, env) for a in args) in I.predicates[name]
    if isinstance(f, (Eq, Neq, Le, Lt)):
        left, right = _compile_term(f.left), _compile_term(f.right)
        if isinstance(f, Eq):
            return lambda I, env: left(I, env) == right(I, env)
        if isinstance(f, Neq):
            return lambda I, env: left(I, env) != right(I, env)
        if isinstance(f, Le):
            return lambda I, env: left(I, env) <= right(I, env)
        return lambda I, env: left(I, env) < right(I, env)
    if isinstance(f, In):
        elem, cont = _compile_term(f.element), _compile_term(f.container)
        return lambda I, env: elem(I, env) in cont(I, env)
    if isinstance(f, Not):
        body = _compile(f.body)
        return lambda I, env: not body(I, env)
    if isinstance(f, (And, Or, Implies)):
        left, right = _compile(f.left), _compile(f.right)
        if isinstance(f, And):
            return lambda I, env: left(I, env) and right(I, env)
        if isinstance(f, Or):
            return lambda I, env: left(I, env) or right(I, env)
        return lambda I, env: (not left(I, env)) or right(I, env)
    if isinstance(f, (Forall, Exists)):
        body, var, sort = _compile(f.body), f.var, f.sort
        universal = isinstance(f, Forall)

        def quantified(I, env):
            saved = env.get(var, _MISSING)
            try:
                for value in I.domain(sort):
                    env[var] = value
                    if body(I, env) != universal:
                        return not universal
                return universal
            finally:
                if saved is _MISSING:
                    env.pop(var, None)
                else:
                    env[var] = saved
        return quantified
    raise LogicError(f"cannot check {type(f).__name__} by enumeration")


_MISSING = object()


def _search(formulas, scope, budget, accept):
    """First (interpretation, assignment) where ``accept(values)`` holds.

    ``values`` are the truth values of ``formulas`` in order.  Returns the
    pair, or the number of cases examined, or a ResourceExhausted.
    """
    signature, variables = infer_signature(formulas)
    set_vars = [(n, s) for n, s in sorted(variables.items()) if s.is_set]
    plain_vars = [(n, s) for n, s in sorted(variables.items()) if not s.is_set]
    for name in signature.sorts:
        scope.bound(name)
    compiled = [_compile(f) for f in formulas]
    examined = 0
    for interp in enumerate_interpretations(signature, set_vars, scope):
        domains = [interp.domain(s) for _, s in plain_vars]
        names = [n for n, _ in plain_vars]
        for values in itertools.product(*domains):
            if examined >= budget:
                return ResourceExhausted(examined, budget), signature, variables
            examined += 1
            env = dict(zip(names, values))
            if accept([c(interp, env) for c in compiled]):
                full = dict(env)
                full.update(interp.sets)
                return (interp, dict(sorted(full.items()))), signature, variables
    return examined, signature, variables


def check_entailment(hypotheses: Sequence, conclusion, scope: Scope = DEFAULT_SCOPE, *,
                     budget: int = DEFAULT_BUDGET):
    """Does the conjunction of ``hypotheses`` entail ``conclusion`` within ``scope``?

    Returns :class:`Valid`, the first :class:`Counterexample` in canonical
    order, or :class:`ResourceExhausted`.
    """
    formulas = list(hypotheses) + [conclusion]

    def falsifies(values):
        return all(values[:-1]) and not values[-1]

    found, signature, variables = _search(formulas, scope, budget, falsifies)
    if isinstance(found, ResourceExhausted):
        return found
    if isinstance(found, int):
        return Valid(scope, found)
    interp, assignment = found
    return Counterexample(interp, assignment, scope, signature, variables)


def check_sat(formula, scope: Scope = DEFAULT_SCOPE, *, budget: int = DEFAULT_BUDGET):
    """First model of ``formula`` in canonical order, else :class:`UnsatWithinScope`."""
    found, signature, variables = _search([formula], scope, budget, lambda v: v[0])
    if isinstance(found, ResourceExhausted):
        return found
    if isinstance(found, int):
        return UnsatWithinScope(scope)
    interp, assignment = found
    return Model(interp, assignment, signature, variables)


def check_sat_all(formulas: Sequence, scope: Scope = DEFAULT_SCOPE, *, budget: int = DEFAULT_BUDGET):
    return check_sat(conj(formulas), scope, budget=budget)


# ------------------------------------------------------------- reporting

def element_name(sort: Sort, index) -> str:
    return f"{sort.name}{index}"


def _value_json(sort: Sort | None, value):
    if sort is None or sort.kind == "nat":
        return value
    if sort.is_set:
        return [element_name(sort.element, v) for v in sorted(value)]
    return element_name(sort, value)


def model_json(interp: Interpretation, assignment, signature: Signature | None,
               variable_sorts: Mapping[str, Sort]) -> dict:
    sig = signature or Signature()
    domains = {name: [element_name(sig.sorts[name], i) for i in range(size)]
               for name, size in sorted(interp.sizes.items())}
    functions = {}
    for name, table in sorted(interp.functions.items()):
        sym = sig.functions.get(name)
        rows = []
        for args, value in sorted(table.items()):
            rows.append({
                "args": [_value_json(s, a) for s, a in zip(sym.args, args)] if sym else list(args),
                "value": _value_json(sym.result if sym else None, value),
            })
        functions[name] = rows
    predicates = {}
    for name, rel in sorted(interp.predicates.items()):
        sym = sig.predicates.get(name)
        predicates[name] = [[_value_json(s, a) for s, a in zip(sym.args, tup)] if sym else list(tup)
                            for tup in sorted(rel)]
    values = {name: _value_json(variable_sorts.get(name), v) for name, v in sorted(assignment.items())}
    return {"domains": domains, "nat_bound": interp.nat_bound, "functions": functions,
            "predicates": predicates, "assignment": values}


def model_text(interp: Interpretation, assignment, signature: Signature | None,
               variable_sorts: Mapping[str, Sort]) -> str:
    data = model_json(interp, assignment, signature, variable_sorts)

    def show(v):
        if isinstance(v, list):
            return "{" + ", ".join(map(str, v)) + "}"
        return str(v)

    lines = ["  domains:"]
    for name, elems in data["domains"].items():
        lines.append(f"    {name} = {show(elems)}")
    lines.append(f"    Nat = 0..{data['nat_bound'] - 1}")
    if data["functions"]:
        lines.append("  functions:")
        for name, rows in data["functions"].items():
            for row in rows:
                lines.append(f"    {name}({', '.join(map(str, row['args']))}) = {row['value']}")
    if data["predicates"]:
        lines.append("  predicates:")
        for name, tuples in data["predicates"].items():
            body = ", ".join("(" + ", ".join(map(str, t)) + ")" for t in tuples)
            lines.append(f"    {name} = {{{body}}}")
    if data["assignment"]:
        lines.append("  assignment:")
        for name, v in data["assignment"].items():
            lines.append(f"    {name} = {show(v)}")
    return "\n".join(lines)
