"""Many-sorted first-order logic over finite structures.

Terms and formulas are immutable dataclasses.  Every node carries an
optional source ``span`` that is excluded from equality, so a formula
parsed from text compares equal to one built by hand.

Values used by :func:`evaluate`:

* base-sort elements are indices ``0 .. size-1``;
* ``Nat`` values are integers ``0 .. nat_bound-1``;
* set values are ``frozenset`` objects of base-sort indices.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, NamedTuple, Union


class Span(NamedTuple):
    line: int
    column: int
    length: int


class LogicError(Exception):
    pass


@dataclass(frozen=True)
class SortIssue:
    code: str
    message: str
    node: object = None

    @property
    def span(self) -> Span | None:
        return getattr(self.node, "span", None)

    def __str__(self) -> str:
        return self.message


class SortError(LogicError):
    """One or more well-sortedness violations."""

    def __init__(self, issues: Iterable[SortIssue]):
        self.issues = tuple(issues)
        super().__init__("; ".join(i.message for i in self.issues))


class EvaluationError(LogicError):
    pass


# ---------------------------------------------------------------- sorts

@dataclass(frozen=True)
class Sort:
    name: str
    kind: str = "base"
    element: Sort | None = None

    def __post_init__(self):
        if self.kind not in ("base", "nat", "set"):
            raise ValueError(f"unknown sort kind {self.kind!r}")
        if self.kind == "set" and (self.element is None or self.element.kind != "base"):
            raise ValueError("set-of may wrap only a base sort")
        if self.kind != "set" and self.element is not None:
            raise ValueError("only set sorts have an element sort")

    @property
    def is_set(self) -> bool:
        return self.kind == "set"

    def __str__(self) -> str:
        return self.name


NAT = Sort("Nat", "nat")


def base_sort(name: str) -> Sort:
    return Sort(name, "base")


def set_of(element: Sort) -> Sort:
    return Sort(f"Set<{element.name}>", "set", element)


@dataclass(frozen=True)
class FunctionSymbol:
    name: str
    args: tuple[Sort, ...]
    result: Sort


@dataclass(frozen=True)
class PredicateSymbol:
    name: str
    args: tuple[Sort, ...]


class Signature:
    """Declared base sorts plus function and predicate symbols.

    ``Nat`` is always available.  Symbol arguments and function results
    range over base sorts and ``Nat`` only; sets exist as port values.
    """

    def __init__(self, sorts: Iterable[Sort] = (), functions: Iterable[FunctionSymbol] = (),
                 predicates: Iterable[PredicateSymbol] = ()):
        self.sorts: dict[str, Sort] = {}
        self.functions: dict[str, FunctionSymbol] = {}
        self.predicates: dict[str, PredicateSymbol] = {}
        problems = []
        for s in sorts:
            if s.kind != "base":
                problems.append(f"only base sorts are declared, got {s.name}")
            elif s.name in self.sorts:
                problems.append(f"duplicate sort {s.name}")
            else:
                self.sorts[s.name] = s
        for sym in itertools.chain(functions, predicates):
            if sym.name in self.functions or sym.name in self.predicates:
                problems.append(f"duplicate symbol {sym.name}")
                continue
            used = list(sym.args) + ([sym.result] if isinstance(sym, FunctionSymbol) else [])
            for s in used:
                if s.kind == "set":
                    problems.append(f"symbol {sym.name} may not take or return sets")
                elif s.kind == "base" and self.sorts.get(s.name) != s:
                    problems.append(f"symbol {sym.name} uses undeclared sort {s.name}")
            if isinstance(sym, FunctionSymbol):
                self.functions[sym.name] = sym
            else:
                self.predicates[sym.name] = sym
        if problems:
            raise LogicError("; ".join(problems))

    def sort(self, name: str) -> Sort | None:
        if name == NAT.name:
            return NAT
        return self.sorts.get(name)

    def __eq__(self, other):
        if not isinstance(other, Signature):
            return NotImplemented
        return (self.sorts, self.functions, self.predicates) == (
            other.sorts, other.functions, other.predicates)

    def __repr__(self):
        return (f"Signature(sorts={list(self.sorts)}, functions={list(self.functions)}, "
                f"predicates={list(self.predicates)})")


# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Var:
    name: str
    sort: Sort | None = None
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class App:
    name: str
    args: tuple = ()
    sort: Sort | None = None
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NatLit:
    value: int
    span: Span | None = field(default=None, compare=False, repr=False)


Term = Union[Var, App, NatLit]


# ------------------------------------------------------------- formulas

@dataclass(frozen=True)
class BoolConst:
    value: bool
    span: Span | None = field(default=None, compare=False, repr=False)


TRUE = BoolConst(True)
FALSE = BoolConst(False)


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple = ()
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class _Relation:
    left: Term
    right: Term
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Eq(_Relation):
    pass


@dataclass(frozen=True)
class Neq(_Relation):
    pass


@dataclass(frozen=True)
class Le(_Relation):
    pass


@dataclass(frozen=True)
class Lt(_Relation):
    pass


@dataclass(frozen=True)
class In:
    element: Term
    container: Term
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    body: Formula
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class _Connective:
    left: Formula
    right: Formula
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class And(_Connective):
    pass


@dataclass(frozen=True)
class Or(_Connective):
    pass


@dataclass(frozen=True)
class Implies(_Connective):
    pass


@dataclass(frozen=True)
class _Quantifier:
    var: str
    sort: Sort
    body: Formula
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Forall(_Quantifier):
    pass


@dataclass(frozen=True)
class Exists(_Quantifier):
    pass


@dataclass(frozen=True)
class Eventually:
    body: Formula
    span: Span | None = field(default=None, compare=False, repr=False)


Formula = Union[BoolConst, Pred, Eq, Neq, Le, Lt, In, Not, And, Or, Implies,
                Forall, Exists, Eventually]

RELATIONS = (Eq, Neq, Le, Lt)
CONNECTIVES = (And, Or, Implies)
QUANTIFIERS = (Forall, Exists)


def conj(formulas: Iterable[Formula]) -> Formula:
    """Left-nested conjunction; ``TRUE`` for an empty sequence."""
    items = list(formulas)
    if not items:
        return TRUE
    result = items[0]
    for f in items[1:]:
        result = And(result, f)
    return result


def disj(formulas: Iterable[Formula]) -> Formula:
    items = list(formulas)
    if not items:
        return FALSE
    result = items[0]
    for f in items[1:]:
        result = Or(result, f)
    return result


def eventually(formula: Formula) -> Eventually:
    """Wrap in a single ``Eventually``, collapsing any already present."""
    return Eventually(strip_eventually(formula))


def strip_eventually(formula: Formula) -> Formula:
    while isinstance(formula, Eventually):
        formula = formula.body
    return formula


def count_eventually(formula) -> int:
    return sum(1 for node in walk(formula) if isinstance(node, Eventually))


def walk(node):
    """Pre-order traversal over formula and term nodes."""
    yield node
    if isinstance(node, (App, Pred)):
        for a in node.args:
            yield from walk(a)
    elif isinstance(node, _Relation):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, In):
        yield from walk(node.element)
        yield from walk(node.container)
    elif isinstance(node, (Not, Eventually)):
        yield from walk(node.body)
    elif isinstance(node, _Connective):
        yield from walk(node.left)
        yield from walk(node.right)
    elif isinstance(node, _Quantifier):
        yield from walk(node.body)


def term_sort(term: Term) -> Sort | None:
    if isinstance(term, NatLit):
        return NAT
    return term.sort


# ------------------------------------------------------ well-sortedness

def check_well_sorted(formula: Formula, signature: Signature,
                      context: Mapping[str, Sort] | None = None, *,
                      allow_eventually: bool = False) -> Formula:
    """Return ``formula`` with every variable and application annotated.

    Identifiers are resolved innermost binder first, then ``context``, then
    the variable's own annotation, then as a nullary function symbol.
    ``Eventually`` is accepted only as the outermost connective and only
    when ``allow_eventually`` is set.  Raises :class:`SortError` listing
    every violation found.
    """
    checker = _SortChecker(signature, dict(context or {}))
    top = formula
    if isinstance(formula, Eventually) and allow_eventually:
        result = replace(formula, body=checker.formula(formula.body, {}))
    else:
        result = checker.formula(top, {})
    if checker.issues:
        raise SortError(checker.issues)
    return result


class _SortChecker:
    def __init__(self, signature: Signature, context: dict[str, Sort]):
        self.sig = signature
        self.context = context
        self.issues: list[SortIssue] = []

    def error(self, code, message, node):
        self.issues.append(SortIssue(code, message, node))

    def term(self, t, bound):
        if isinstance(t, NatLit):
            if t.value < 0:
                self.error("sort-mismatch", f"negative literal {t.value}", t)
            return t, NAT
        if isinstance(t, Var):
            sort = bound.get(t.name) or self.context.get(t.name)
            if sort is not None:
                if t.sort is not None and t.sort != sort:
                    self.error("sort-mismatch",
                               f"variable {t.name} annotated {t.sort} but declared {sort}", t)
                return replace(t, sort=sort), sort
            if t.sort is not None:
                return t, t.sort
            sym = self.sig.functions.get(t.name)
            if sym is not None and not sym.args:
                return App(t.name, (), sym.result, span=t.span), sym.result
            self.error("unknown-symbol", f"unknown identifier {t.name}", t)
            return t, None
        sym = self.sig.functions.get(t.name)
        if sym is None:
            if t.name in self.sig.predicates:
                self.error("unknown-symbol", f"predicate {t.name} used as a term", t)
            else:
                self.error("unknown-symbol", f"unknown function {t.name}", t)
            args = tuple(self.term(a, bound)[0] for a in t.args)
            return replace(t, args=args), None
        args = []
        if len(t.args) != len(sym.args):
            self.error("arity", f"{t.name} expects {len(sym.args)} argument(s), got {len(t.args)}", t)
            args = [self.term(a, bound)[0] for a in t.args]
        else:
            for a, expected in zip(t.args, sym.args):
                checked, got = self.term(a, bound)
                if got is not None and got != expected:
                    self.error("sort-mismatch",
                               f"argument of {t.name} has sort {got}, expected {expected}", a)
                args.append(checked)
        return replace(t, args=tuple(args), sort=sym.result), sym.result

    def formula(self, f, bound):
        if isinstance(f, BoolConst):
            return f
        if isinstance(f, Pred):
            sym = self.sig.predicates.get(f.name)
            if sym is None:
                kind = "function used as a predicate" if f.name in self.sig.functions else "unknown predicate"
                self.error("unknown-symbol", f"{kind} {f.name}", f)
                return replace(f, args=tuple(self.term(a, bound)[0] for a in f.args))
            if len(f.args) != len(sym.args):
                self.error("arity", f"{f.name} expects {len(sym.args)} argument(s), got {len(f.args)}", f)
                return replace(f, args=tuple(self.term(a, bound)[0] for a in f.args))
            args = []
            for a, expected in zip(f.args, sym.args):
                checked, got = self.term(a, bound)
                if got is not None and got != expected:
                    self.error("sort-mismatch",
                               f"argument of {f.name} has sort {got}, expected {expected}", a)
                args.append(checked)
            return replace(f, args=tuple(args))
        if isinstance(f, _Relation):
            left, ls = self.term(f.left, bound)
            right, rs = self.term(f.right, bound)
            if isinstance(f, (Le, Lt)):
                for side, s in ((left, ls), (right, rs)):
                    if s is not None and s != NAT:
                        self.error("sort-mismatch", f"comparison requires Nat, got {s}", side)
            elif ls is not None and rs is not None and ls != rs:
                self.error("sort-mismatch", f"cannot compare {ls} with {rs}", f)
            return replace(f, left=left, right=right)
        if isinstance(f, In):
            elem, es = self.term(f.element, bound)
            cont, cs = self.term(f.container, bound)
            if cs is not None and not cs.is_set:
                self.error("sort-mismatch", f"In requires set-of sort, got {cs}", f.container)
            elif cs is not None and es is not None and es != cs.element:
                self.error("sort-mismatch", f"element of sort {es} cannot be a member of {cs}", f)
            return replace(f, element=elem, container=cont)
        if isinstance(f, Not):
            return replace(f, body=self.formula(f.body, bound))
        if isinstance(f, _Connective):
            return replace(f, left=self.formula(f.left, bound), right=self.formula(f.right, bound))
        if isinstance(f, _Quantifier):
            sort = f.sort
            resolved = self.sig.sort(sort.name) if sort is not None else None
            if resolved is None or resolved.kind == "set":
                self.error("unknown-sort", f"cannot quantify over sort {sort}", f)
                resolved = sort
            inner = dict(bound)
            inner[f.var] = resolved
            return replace(f, sort=resolved, body=self.formula(f.body, inner))
        if isinstance(f, Eventually):
            self.error("eventually-position",
                       "eventually may appear only as the outermost connective of a guarantee", f)
            return replace(f, body=self.formula(f.body, bound))
        raise TypeError(f"not a formula: {f!r}")


# ------------------------------------------------------- free variables

def free_vars(formula) -> frozenset[tuple[str, Sort | None]]:
    """Variables with a free occurrence, as ``(name, sort)`` pairs."""
    out: set = set()
    _free(formula, frozenset(), out)
    return frozenset(out)


def free_names(formula) -> frozenset[str]:
    return frozenset(name for name, _ in free_vars(formula))


def _free(node, bound, out):
    if isinstance(node, Var):
        if node.name not in bound:
            out.add((node.name, node.sort))
    elif isinstance(node, _Quantifier):
        _free(node.body, bound | {node.var}, out)
    elif isinstance(node, (App, Pred)):
        for a in node.args:
            _free(a, bound, out)
    elif isinstance(node, _Relation):
        _free(node.left, bound, out)
        _free(node.right, bound, out)
    elif isinstance(node, In):
        _free(node.element, bound, out)
        _free(node.container, bound, out)
    elif isinstance(node, (Not, Eventually)):
        _free(node.body, bound, out)
    elif isinstance(node, _Connective):
        _free(node.left, bound, out)
        _free(node.right, bound, out)


# --------------------------------------------------------- substitution

def fresh_name(base: str, taken) -> str:
    k = 1
    while f"{base}{k}" in taken:
        k += 1
    return f"{base}{k}"


def substitute(formula, binding: Mapping[str, Term]):
    """Capture-avoiding simultaneous substitution of free variables.

    A binder whose variable would capture a free variable of a replacement
    term is renamed to ``name`` plus the smallest unused numeric suffix.
    """
    issues = []
    for name, sort in free_vars(formula):
        if name in binding:
            got = term_sort(binding[name])
            if sort is not None and got is not None and sort != got:
                issues.append(SortIssue("sort-mismatch",
                                        f"cannot substitute {got} term for {name}: {sort}",
                                        binding[name]))
    if issues:
        raise SortError(issues)
    return _subst(formula, dict(binding))


def rename_free(formula, renaming: Mapping[str, str]):
    """Rename free variables, keeping their sorts."""
    binding = {old: Var(renaming[old], sort) for old, sort in free_vars(formula)
               if old in renaming}
    return _subst(formula, binding)


def _subst(node, b):
    if not b:
        return node
    if isinstance(node, Var):
        return b.get(node.name, node)
    if isinstance(node, NatLit) or isinstance(node, BoolConst):
        return node
    if isinstance(node, (App, Pred)):
        return replace(node, args=tuple(_subst(a, b) for a in node.args))
    if isinstance(node, _Relation):
        return replace(node, left=_subst(node.left, b), right=_subst(node.right, b))
    if isinstance(node, In):
        return replace(node, element=_subst(node.element, b), container=_subst(node.container, b))
    if isinstance(node, (Not, Eventually)):
        return replace(node, body=_subst(node.body, b))
    if isinstance(node, _Connective):
        return replace(node, left=_subst(node.left, b), right=_subst(node.right, b))
    if isinstance(node, _Quantifier):
        body_free = free_names(node.body)
        inner = {k: v for k, v in b.items() if k != node.var and k in body_free}
        if not inner:
            return node
        range_names = set()
        for t in inner.values():
            range_names |= free_names(t)
        var, body = node.var, node.body
        if var in range_names:
            new = fresh_name(var, body_free | range_names | set(inner))
            body = _subst(body, {var: Var(new, node.sort)})
            var = new
        return replace(node, var=var, body=_subst(body, inner))
    raise TypeError(f"cannot substitute into {node!r}")


# ------------------------------------------------------ alpha-equivalence

def alpha_normalize(formula):
    """Rename every bound variable to a canonical name by binder depth."""
    return _alpha(formula, {}, 0)


def alpha_equivalent(a, b) -> bool:
    return alpha_normalize(a) == alpha_normalize(b)


def _alpha(node, env, depth):
    if isinstance(node, Var):
        return replace(node, name=env[node.name]) if node.name in env else node
    if isinstance(node, (NatLit, BoolConst)):
        return node
    if isinstance(node, (App, Pred)):
        return replace(node, args=tuple(_alpha(a, env, depth) for a in node.args))
    if isinstance(node, _Relation):
        return replace(node, left=_alpha(node.left, env, depth), right=_alpha(node.right, env, depth))
    if isinstance(node, In):
        return replace(node, element=_alpha(node.element, env, depth),
                       container=_alpha(node.container, env, depth))
    if isinstance(node, (Not, Eventually)):
        return replace(node, body=_alpha(node.body, env, depth))
    if isinstance(node, _Connective):
        return replace(node, left=_alpha(node.left, env, depth), right=_alpha(node.right, env, depth))
    if isinstance(node, _Quantifier):
        canonical = f"%{depth}"
        return replace(node, var=canonical,
                       body=_alpha(node.body, {**env, node.var: canonical}, depth + 1))
    raise TypeError(f"not a formula: {node!r}")


# ------------------------------------------------------- interpretations

@dataclass(frozen=True)
class Interpretation:
    """A finite first-order structure.

    ``functions`` maps each symbol to a total table keyed by argument tuples;
    nullary symbols use the key ``()``.  ``sets`` holds the values of
    set-sorted constants and ports.
    """

    sizes: Mapping[str, int]
    nat_bound: int
    functions: Mapping[str, Mapping[tuple, int]] = field(default_factory=dict)
    predicates: Mapping[str, frozenset] = field(default_factory=dict)
    sets: Mapping[str, frozenset] = field(default_factory=dict)

    def domain(self, sort: Sort) -> range:
        if sort.kind == "nat":
            return range(self.nat_bound)
        if sort.kind == "base":
            if sort.name not in self.sizes:
                raise EvaluationError(f"no domain for sort {sort.name}")
            return range(self.sizes[sort.name])
        raise EvaluationError(f"sets are not quantifiable: {sort.name}")

    def check(self, signature: Signature) -> None:
        """Raise :class:`LogicError` unless every table is total and in range."""
        for name, size in self.sizes.items():
            if size < 1:
                raise LogicError(f"domain of {name} must be nonempty")
        if self.nat_bound < 1:
            raise LogicError("nat bound must be positive")
        for sym in signature.functions.values():
            table = self.functions.get(sym.name)
            if table is None:
                raise LogicError(f"missing table for function {sym.name}")
            keys = set(itertools.product(*(self.domain(s) for s in sym.args)))
            if set(table) != keys:
                raise LogicError(f"table for {sym.name} is not total")
            if any(v not in self.domain(sym.result) for v in table.values()):
                raise LogicError(f"table for {sym.name} leaves its result domain")
        for sym in signature.predicates.values():
            rel = self.predicates.get(sym.name, frozenset())
            doms = [self.domain(s) for s in sym.args]
            for tup in rel:
                if len(tup) != len(doms) or any(v not in d for v, d in zip(tup, doms)):
                    raise LogicError(f"tuple {tup} outside the domain of {sym.name}")


Assignment = Mapping[str, object]


# ------------------------------------------------------------ evaluation

def evaluate(formula: Formula, interp: Interpretation, assign: Assignment) -> bool:
    """Tarskian truth value of an ``Eventually``-free formula."""
    return _eval(formula, interp, dict(assign))


def evaluate_term(term: Term, interp: Interpretation, assign: Assignment):
    return _term(term, interp, dict(assign))


def _lookup(name, interp, env):
    if name in env:
        return env[name]
    if name in interp.sets:
        return interp.sets[name]
    raise EvaluationError(f"unassigned free variable {name}")


def _term(t, interp, env):
    if isinstance(t, Var):
        return _lookup(t.name, interp, env)
    if isinstance(t, NatLit):
        return t.value
    args = tuple(_term(a, interp, env) for a in t.args)
    try:
        return interp.functions[t.name][args]
    except KeyError:
        raise EvaluationError(f"{t.name}{args} is outside the interpretation") from None


def _eval(f, interp, env):
    if isinstance(f, BoolConst):
        return f.value
    if isinstance(f, Pred):
        args = tuple(_term(a, interp, env) for a in f.args)
        return args in interp.predicates.get(f.name, ())
    if isinstance(f, Eq):
        return _term(f.left, interp, env) == _term(f.right, interp, env)
    if isinstance(f, Neq):
        return _term(f.left, interp, env) != _term(f.right, interp, env)
    if isinstance(f, Le):
        return _term(f.left, interp, env) <= _term(f.right, interp, env)
    if isinstance(f, Lt):
        return _term(f.left, interp, env) < _term(f.right, interp, env)
    if isinstance(f, In):
        return _term(f.element, interp, env) in _term(f.container, interp, env)
    if isinstance(f, Not):
        return not _eval(f.body, interp, env)
    if isinstance(f, And):
        return _eval(f.left, interp, env) and _eval(f.right, interp, env)
    if isinstance(f, Or):
        return _eval(f.left, interp, env) or _eval(f.right, interp, env)
    if isinstance(f, Implies):
        return (not _eval(f.left, interp, env)) or _eval(f.right, interp, env)
    if isinstance(f, _Quantifier):
        want_all = isinstance(f, Forall)
        for value in interp.domain(f.sort):
            holds = _eval(f.body, interp, {**env, f.var: value})
            if want_all and not holds:
                return False
            if not want_all and holds:
                return True
        return want_all
    if isinstance(f, Eventually):
        raise EvaluationError("eventually has no first-order value; monitor the trace instead")
    raise TypeError(f"not a formula: {f!r}")


# -------------------------------------------------------------- printing

_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_NOT = 1, 2, 3, 4


def term_text(t) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, NatLit):
        return str(t.value)
    if not t.args:
        return t.name
    return f"{t.name}({', '.join(term_text(a) for a in t.args)})"


def formula_text(f) -> str:
    """Concrete syntax, parenthesized only where precedence demands it."""
    return _fmt(f, 0)


def _paren(text, needed):
    return f"({text})" if needed else text


def _fmt(f, ctx):
    if isinstance(f, BoolConst):
        return "true" if f.value else "false"
    if isinstance(f, Pred):
        return f"{f.name}({', '.join(term_text(a) for a in f.args)})"
    if isinstance(f, _Relation):
        op = {Eq: "=", Neq: "!=", Le: "<=", Lt: "<"}[type(f)]
        return f"{term_text(f.left)} {op} {term_text(f.right)}"
    if isinstance(f, In):
        return f"{term_text(f.element)} in {term_text(f.container)}"
    if isinstance(f, Not):
        return _paren("not " + _fmt(f.body, _PREC_NOT), ctx > _PREC_NOT)
    if isinstance(f, Implies):
        text = f"{_fmt(f.left, _PREC_OR)} => {_fmt(f.right, _PREC_IMPLIES)}"
        return _paren(text, ctx > _PREC_IMPLIES)
    if isinstance(f, Or):
        text = f"{_fmt(f.left, _PREC_OR)} or {_fmt(f.right, _PREC_AND)}"
        return _paren(text, ctx > _PREC_OR)
    if isinstance(f, And):
        text = f"{_fmt(f.left, _PREC_AND)} and {_fmt(f.right, _PREC_NOT)}"
        return _paren(text, ctx > _PREC_AND)
    if isinstance(f, _Quantifier):
        word = "forall" if isinstance(f, Forall) else "exists"
        return _paren(f"{word} {f.var}: {f.sort.name} . {_fmt(f.body, 0)}", ctx > 0)
    if isinstance(f, Eventually):
        return _paren("eventually " + _fmt(f.body, 0), ctx > 0)
    raise TypeError(f"not a formula: {f!r}")
