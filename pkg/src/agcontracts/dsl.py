"""The ``.agspec`` contract language: parsing, rendering and name resolution.

Example::

    sort Plan
    sort Location
    func goal() : Location
    pred visits(Plan, Location)

    node Agent {
      in PlanSet: Set<Plan>
      out plan: Plan
      assumes forall p: Plan . p in PlanSet => visits(p, goal)
      guarantees plan in PlanSet
      evidence testing, formal
    }

    connect Planner.plans -> Agent.PlanSet

Comments run from ``--`` to the end of the line.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import IN, OUT, Contract, Edge, NodeSpec, Port, SystemGraph
from .logic import (
    FALSE, NAT, TRUE, And, App, Eq, Eventually, Exists, Forall, FunctionSymbol,
    Implies, In, Le, LogicError, Lt, NatLit, Neq, Not, Or, Pred, PredicateSymbol,
    Signature, Sort, SortError, Span, Var, base_sort, check_well_sorted, formula_text,
    free_names, set_of, term_text,
)

KEYWORDS = frozenset({
    "sort", "func", "pred", "node", "in", "out", "assumes", "guarantees",
    "evidence", "connect", "forall", "exists", "not", "and", "or", "true",
    "false", "eventually", "Nat", "Set",
})
TECHNIQUES = ("testing", "simulation", "formal")
_DECL_STARTS = frozenset({"sort", "func", "pred", "node", "connect"})
_SYMBOLS = ("->", "=>", "!=", "<=", "(", ")", "{", "}", "<", ">", ",", ":", ".", "=")


@dataclass(frozen=True)
class Diagnostic:
    severity: str
    message: str
    span: Span
    code: str

    def __str__(self):
        return f"{self.span.line}:{self.span.column}: {self.severity}: {self.message} [{self.code}]"

    def to_json(self) -> dict:
        return {"severity": self.severity, "code": self.code, "message": self.message,
                "line": self.span.line, "column": self.span.column, "length": self.span.length}


class SpecError(Exception):
    """Raised with every diagnostic when a spec cannot be parsed or resolved."""

    def __init__(self, diagnostics: Iterable[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


# ------------------------------------------------------------------ AST

@dataclass(frozen=True)
class TypeRef:
    kind: str  # named | nat | set
    name: str | None = None
    span: Span | None = field(default=None, compare=False, repr=False)

    def __str__(self):
        if self.kind == "nat":
            return "Nat"
        if self.kind == "set":
            return f"Set<{self.name}>"
        return self.name


@dataclass(frozen=True)
class SortDecl:
    name: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class FuncDecl:
    name: str
    args: tuple[TypeRef, ...]
    result: TypeRef
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PredDecl:
    name: str
    args: tuple[TypeRef, ...]
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class PortDecl:
    direction: str
    name: str
    type: TypeRef
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class NodeDecl:
    name: str
    ports: tuple[PortDecl, ...]
    assumes: object
    guarantees: object
    evidence: tuple[str, ...] = ()
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class ConnectDecl:
    src: str
    src_port: str
    dst: str
    dst_port: str
    span: Span | None = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class SpecFile:
    declarations: tuple = ()

    def of_type(self, kind):
        return [d for d in self.declarations if isinstance(d, kind)]

    @property
    def nodes(self) -> list[NodeDecl]:
        return self.of_type(NodeDecl)


# ---------------------------------------------------------------- lexer

@dataclass(frozen=True)
class Token:
    kind: str  # id | num | kw | sym | eof
    value: str
    line: int
    column: int
    offset: int

    @property
    def end(self) -> int:
        return self.offset + len(self.value)

    @property
    def span(self) -> Span:
        return Span(self.line, self.column, max(len(self.value), 1))

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else repr(self.value)


def tokenize(text: str) -> tuple[list[Token], list[Diagnostic]]:
    tokens, diags = [], []
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        c = text[i]
        if c == "\n":
            i, line, col = i + 1, line + 1, 1
            continue
        if c.isspace():
            i, col = i + 1, col + 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
                col += 1
            continue
        start, start_col = i, col
        if c.isalpha() or c == "_":
            while i < n and (text[i].isalnum() or text[i] == "_"):
                i += 1
            word = text[start:i]
            tokens.append(Token("kw" if word in KEYWORDS else "id", word, line, start_col, start))
        elif c.isdigit():
            while i < n and text[i].isdigit():
                i += 1
            tokens.append(Token("num", text[start:i], line, start_col, start))
        else:
            sym = next((s for s in _SYMBOLS if text.startswith(s, i)), None)
            if sym is None:
                diags.append(Diagnostic("error", f"unexpected character {c!r}",
                                        Span(line, start_col, 1), "lex"))
                i += 1
            else:
                i += len(sym)
                tokens.append(Token("sym", sym, line, start_col, start))
        col += i - start
    tokens.append(Token("eof", "", line, col, n))
    return tokens, diags


# --------------------------------------------------------------- parser

class _Abort(Exception):
    pass


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens, self.diags = tokenize(text)
        self.pos = 0

    # token helpers
    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    @property
    def prev(self) -> Token:
        return self.tokens[self.pos - 1]

    def at(self, value: str, kind: str | None = None) -> bool:
        t = self.tok
        return t.value == value and t.kind in ((kind,) if kind else ("kw", "sym"))

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "eof":
            self.pos += 1
        return t

    def fail(self, message: str, span: Span, code: str = "syntax"):
        self.diags.append(Diagnostic("error", message, span, code))
        raise _Abort

    def expect(self, value: str, closing: bool = False) -> Token:
        if self.at(value):
            return self.advance()
        if closing and self.pos > 0:
            end = self.prev
            span = Span(end.line, end.column + len(end.value), 1)
        else:
            span = self.tok.span
        self.fail(f"expected '{value}', found {self.tok.describe()}", span)

    def ident(self, what: str = "identifier") -> Token:
        if self.tok.kind == "id":
            return self.advance()
        self.fail(f"expected {what}, found {self.tok.describe()}", self.tok.span)

    def span_from(self, start: Token) -> Span:
        end = self.prev.end if self.pos > 0 else start.end
        return Span(start.line, start.column, max(end - start.offset, 1))

    # declarations
    def spec(self) -> SpecFile:
        decls = []
        while self.tok.kind != "eof":
            start = self.pos
            try:
                decls.append(self.declaration())
            except _Abort:
                if self.pos == start:
                    self.advance()
                while self.tok.kind != "eof" and not (self.tok.kind == "kw" and self.tok.value in _DECL_STARTS):
                    self.advance()
        return SpecFile(tuple(decls))

    def declaration(self):
        t = self.tok
        if t.kind == "kw" and t.value in _DECL_STARTS:
            return getattr(self, "decl_" + t.value)()
        self.fail(f"expected a declaration, found {t.describe()}", t.span)

    def decl_sort(self):
        start = self.advance()
        name = self.ident("sort name")
        return SortDecl(name.value, span=self.span_from(start))

    def type_list(self) -> tuple[TypeRef, ...]:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.type_ref())
            while self.at(","):
                self.advance()
                args.append(self.type_ref())
        self.expect(")", closing=True)
        return tuple(args)

    def decl_func(self):
        start = self.advance()
        name = self.ident("function name")
        args = self.type_list()
        self.expect(":")
        result = self.type_ref()
        return FuncDecl(name.value, args, result, span=self.span_from(start))

    def decl_pred(self):
        start = self.advance()
        name = self.ident("predicate name")
        args = self.type_list()
        return PredDecl(name.value, args, span=self.span_from(start))

    def type_ref(self) -> TypeRef:
        start = self.tok
        if self.at("Nat", "kw"):
            self.advance()
            return TypeRef("nat", span=self.span_from(start))
        if self.at("Set", "kw"):
            self.advance()
            self.expect("<")
            elem = self.ident("element sort")
            self.expect(">", closing=True)
            return TypeRef("set", elem.value, span=self.span_from(start))
        name = self.ident("type")
        return TypeRef("named", name.value, span=self.span_from(start))

    def decl_node(self):
        start = self.advance()
        name = self.ident("node name")
        self.expect("{")
        ports = []
        while self.at("in", "kw") or self.at("out", "kw"):
            pstart = self.advance()
            pname = self.ident("port name")
            self.expect(":")
            ptype = self.type_ref()
            ports.append(PortDecl(pstart.value, pname.value, ptype, span=self.span_from(pstart)))
        self.expect("assumes")
        assumes = self.formula()
        self.expect("guarantees")
        guarantees = self.formula()
        evidence = []
        if self.at("evidence", "kw"):
            self.advance()
            evidence.append(self.technique(evidence))
            while self.at(","):
                self.advance()
                evidence.append(self.technique(evidence))
        self.expect("}")
        return NodeDecl(name.value, tuple(ports), assumes, guarantees,
                        tuple(e for e in evidence if e is not None), span=self.span_from(start))

    def technique(self, seen) -> str | None:
        t = self.tok
        if t.kind != "id" or t.value not in TECHNIQUES:
            self.fail(f"expected one of {', '.join(TECHNIQUES)}, found {t.describe()}", t.span)
        self.advance()
        if t.value in seen:
            self.diags.append(Diagnostic("error", f"duplicate evidence '{t.value}'", t.span,
                                         "duplicate-evidence"))
            return None
        return t.value

    def decl_connect(self):
        start = self.advance()
        src = self.ident("node name")
        self.expect(".")
        src_port = self.ident("port name")
        self.expect("->")
        dst = self.ident("node name")
        self.expect(".")
        dst_port = self.ident("port name")
        return ConnectDecl(src.value, src_port.value, dst.value, dst_port.value,
                           span=self.span_from(start))

    # formulas
    def formula(self):
        start = self.tok
        if self.at("forall", "kw") or self.at("exists", "kw"):
            kind = Forall if self.advance().value == "forall" else Exists
            var = self.ident("bound variable")
            self.expect(":")
            if self.at("Nat", "kw"):
                self.advance()
                sort = NAT
            else:
                sort = base_sort(self.ident("sort name").value)
            self.expect(".")
            body = self.formula()
            return kind(var.value, sort, body, span=self.span_from(start))
        if self.at("eventually", "kw"):
            self.advance()
            body = self.formula()
            if isinstance(body, Eventually):  # eventually is idempotent
                body = body.body
            return Eventually(body, span=self.span_from(start))
        return self.implication()

    def implication(self):
        start = self.tok
        left = self.disjunction()
        if self.at("=>"):
            self.advance()
            right = self.implication()
            return Implies(left, right, span=self.span_from(start))
        return left

    def disjunction(self):
        start = self.tok
        left = self.conjunction()
        while self.at("or", "kw"):
            self.advance()
            left = Or(left, self.conjunction(), span=self.span_from(start))
        return left

    def conjunction(self):
        start = self.tok
        left = self.unary()
        while self.at("and", "kw"):
            self.advance()
            left = And(left, self.unary(), span=self.span_from(start))
        return left

    def unary(self):
        start = self.tok
        if self.at("not", "kw"):
            self.advance()
            return Not(self.unary(), span=self.span_from(start))
        return self.primary()

    _RELATIONS = {"=": Eq, "!=": Neq, "<=": Le, "<": Lt}

    def primary(self):
        start = self.tok
        if self.at("("):
            self.advance()
            inner = self.formula()
            self.expect(")", closing=True)
            return inner
        if self.at("true", "kw"):
            self.advance()
            return TRUE
        if self.at("false", "kw"):
            self.advance()
            return FALSE
        if start.kind not in ("id", "num"):
            self.fail(f"expected a formula, found {start.describe()}", start.span)
        left = self.term()
        op = self.tok
        if op.kind == "sym" and op.value in self._RELATIONS:
            self.advance()
            right = self.term()
            return self._RELATIONS[op.value](left, right, span=self.span_from(start))
        if op.kind == "kw" and op.value == "in":
            self.advance()
            right = self.term()
            return In(left, right, span=self.span_from(start))
        if isinstance(left, App):
            return Pred(left.name, left.args, span=left.span)
        self.fail(f"expected a comparison after {term_text(left)!r}, found {op.describe()}", op.span)

    def term(self):
        start = self.tok
        if start.kind == "num":
            self.advance()
            return NatLit(int(start.value), span=start.span)
        name = self.ident("term")
        if self.at("("):
            self.advance()
            args = []
            if not self.at(")"):
                args.append(self.term())
                while self.at(","):
                    self.advance()
                    args.append(self.term())
            self.expect(")", closing=True)
            return App(name.value, tuple(args), span=self.span_from(start))
        return Var(name.value, span=name.span)


def parse_spec(text: str) -> SpecFile:
    """Parse ``.agspec`` source; raises :class:`SpecError` listing every problem found."""
    parser = _Parser(text)
    spec = parser.spec()
    if parser.diags:
        raise SpecError(sorted(parser.diags, key=lambda d: (d.span.line, d.span.column)))
    return spec


def parse_formula(text: str, signature: Signature | None = None,
                  context: Mapping[str, Sort] | None = None):
    """Parse one formula; sort-check it too when ``signature`` is given."""
    parser = _Parser(text)
    try:
        f = parser.formula()
        if parser.tok.kind != "eof":
            parser.fail(f"unexpected {parser.tok.describe()} after formula", parser.tok.span)
    except _Abort:
        pass
    if parser.diags:
        raise SpecError(parser.diags)
    if signature is None:
        return f
    return check_well_sorted(f, signature, context or {}, allow_eventually=True)


# ------------------------------------------------------------- rendering

def render_spec(spec: SpecFile) -> str:
    lines = []
    for d in spec.declarations:
        if isinstance(d, SortDecl):
            lines.append(f"sort {d.name}")
        elif isinstance(d, FuncDecl):
            lines.append(f"func {d.name}({', '.join(map(str, d.args))}) : {d.result}")
        elif isinstance(d, PredDecl):
            lines.append(f"pred {d.name}({', '.join(map(str, d.args))})")
        elif isinstance(d, NodeDecl):
            lines.append(f"node {d.name} {{")
            for p in d.ports:
                lines.append(f"  {p.direction} {p.name}: {p.type}")
            lines.append(f"  assumes {formula_text(d.assumes)}")
            lines.append(f"  guarantees {formula_text(d.guarantees)}")
            if d.evidence:
                lines.append(f"  evidence {', '.join(d.evidence)}")
            lines.append("}")
        elif isinstance(d, ConnectDecl):
            lines.append(f"connect {d.src}.{d.src_port} -> {d.dst}.{d.dst_port}")
        else:
            raise TypeError(f"unknown declaration {d!r}")
    return "".join(line + "\n" for line in lines)


# ------------------------------------------------------------ resolution

_NOWHERE = Span(1, 1, 1)


def resolve(spec: SpecFile) -> tuple[Signature, SystemGraph]:
    """Build the signature and system graph, checking every name and sort."""
    diags: list[Diagnostic] = []

    def error(message, span, code):
        diags.append(Diagnostic("error", message, span or _NOWHERE, code))

    sorts = {}
    symbol_names = set()
    for d in spec.of_type(SortDecl):
        if d.name in sorts:
            error(f"duplicate sort {d.name}", d.span, "duplicate-sort")
        sorts[d.name] = base_sort(d.name)

    def sort_of(t: TypeRef):
        if t.kind == "nat":
            return NAT
        if t.name not in sorts:
            error(f"unknown sort {t.name}", t.span, "unknown-sort")
            return None
        return set_of(sorts[t.name]) if t.kind == "set" else sorts[t.name]

    functions, predicates = [], []
    for d in spec.declarations:
        if not isinstance(d, (FuncDecl, PredDecl)):
            continue
        if d.name in symbol_names or d.name in sorts:
            error(f"duplicate symbol {d.name}", d.span, "duplicate-symbol")
            continue
        symbol_names.add(d.name)
        types = list(d.args) + ([d.result] if isinstance(d, FuncDecl) else [])
        resolved = [sort_of(t) for t in types]
        if any(s is None for s in resolved):
            continue
        bad = [t for t, s in zip(types, resolved) if s.is_set]
        if bad:
            error(f"{d.name}: symbols take and return base sorts or Nat only", bad[0].span, "set-in-symbol")
            continue
        if isinstance(d, FuncDecl):
            functions.append(FunctionSymbol(d.name, tuple(resolved[:-1]), resolved[-1]))
        else:
            predicates.append(PredicateSymbol(d.name, tuple(resolved)))
    signature = Signature(sorts=sorts.values(), functions=functions, predicates=predicates)

    nodes: dict[str, NodeSpec] = {}
    for d in spec.nodes:
        if d.name in nodes:
            error(f"duplicate node name {d.name}", d.span, "duplicate-node")
            continue
        ports = []
        for p in d.ports:
            if any(q.name == p.name for q in ports):
                error(f"duplicate port {p.name} in node {d.name}", p.span, "duplicate-port")
                continue
            s = sort_of(p.type)
            if s is not None:
                ports.append(Port(p.name, p.direction, s))
        if not d.ports:
            error(f"node {d.name} declares no ports", d.span, "no-ports")
            continue
        inputs = {p.name: p.sort for p in ports if p.direction == IN}
        outputs = {p.name: p.sort for p in ports if p.direction == OUT}
        leaking = sorted(free_names(d.assumes) & set(outputs))
        for name in leaking:
            span = _var_span(d.assumes, name) or d.span
            error(f"assumption may reference in-ports only; {name} is an out-port of {d.name}",
                  span, "assumes-out-port")
        assumption = _checked(d.assumes, signature, {**outputs, **inputs}, False, d.span, diags)
        guarantee = _checked(d.guarantees, signature, {**outputs, **inputs}, True, d.span, diags)
        if assumption is None or guarantee is None or leaking or len(ports) != len(d.ports):
            nodes[d.name] = None
            continue
        try:
            contract = Contract(assumption, guarantee, inputs, outputs, node=d.name)
        except Exception as exc:  # stray variables already reported above
            error(str(exc), d.span, "contract")
            nodes[d.name] = None
            continue
        nodes[d.name] = NodeSpec(d.name, tuple(ports), contract, frozenset(d.evidence))

    edges = []
    fed = {}
    for c in spec.of_type(ConnectDecl):
        src, dst = _endpoint(nodes, spec, c.src, c.src_port, OUT), _endpoint(nodes, spec, c.dst, c.dst_port, IN)
        if isinstance(src, str):
            error(src, c.span, "unknown-endpoint")
        if isinstance(dst, str):
            error(dst, c.span, "unknown-endpoint")
        if isinstance(src, Port) and isinstance(dst, Port) and src.sort != dst.sort:
            error(f"cannot connect {c.src}.{c.src_port}: {src.sort} to {c.dst}.{c.dst_port}: {dst.sort}",
                  c.span, "port-sort-mismatch")
            continue
        key = (c.dst, c.dst_port)
        if key in fed:
            error(f"in-port {c.dst}.{c.dst_port} already has an incoming edge", c.span, "fan-in")
            continue
        fed[key] = c
        edges.append(Edge(c.src, c.src_port, c.dst, c.dst_port))

    if diags:
        raise SpecError(sorted(diags, key=lambda x: (x.span.line, x.span.column)))
    return signature, SystemGraph(tuple(nodes.values()), tuple(edges))


def _endpoint(nodes, spec, node, port, direction):
    if node not in nodes:
        return f"unknown node {node}"
    if nodes[node] is None:
        return None
    p = nodes[node].port(port)
    if p is None:
        return f"node {node} has no port {port}"
    if p.direction != direction:
        return f"{node}.{port} is an {p.direction}-port; expected an {direction}-port"
    return p


def _var_span(formula, name):
    from .logic import walk
    for node in walk(formula):
        if isinstance(node, Var) and node.name == name and node.span is not None:
            return node.span
    return None


def _checked(formula, signature, context, allow_eventually, fallback, diags):
    try:
        return check_well_sorted(formula, signature, context, allow_eventually=allow_eventually)
    except SortError as exc:
        for issue in exc.issues:
            diags.append(Diagnostic("error", issue.message, issue.span or fallback or _NOWHERE, issue.code))
    except LogicError as exc:
        diags.append(Diagnostic("error", str(exc), fallback or _NOWHERE, "logic"))
    return None


def load_spec(text: str) -> tuple[SpecFile, Signature, SystemGraph]:
    spec = parse_spec(text)
    signature, graph = resolve(spec)
    return spec, signature, graph
