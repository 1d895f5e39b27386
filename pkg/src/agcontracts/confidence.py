"""Verification-confidence measure over a per-node evidence table.

Each node can earn one point per technique category applied to it, so a
graph of ``n`` nodes has ``3 n`` points available.  The score is the exact
fraction earned.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from fractions import Fraction
from typing import Iterable, Mapping

from .graph import SystemGraph

TECHNIQUES = ("testing", "simulation", "formal")
TECHNIQUE_NAMES = {
    "testing": "testing",
    "simulation": "simulation-based testing",
    "formal": "formal methods",
}
_ALIASES = {**{t: t for t in TECHNIQUES}, **{v: k for k, v in TECHNIQUE_NAMES.items()}}


class ConfidenceError(ValueError):
    pass


EvidenceTable = Mapping[str, Iterable[str]]


def technique(name: str) -> str:
    """Canonical short name; accepts the long category names too."""
    try:
        return _ALIASES[name]
    except KeyError:
        raise ConfidenceError(f"unknown technique {name!r}; expected one of {', '.join(TECHNIQUES)}") from None


def normalize_table(table: EvidenceTable) -> dict[str, frozenset[str]]:
    return {node: frozenset(technique(t) for t in techs) for node, techs in table.items()}


def confidence_score(table: EvidenceTable) -> Fraction:
    table = normalize_table(table)
    if not table:
        raise ConfidenceError("evidence table is empty")
    return Fraction(sum(len(t) for t in table.values()), len(table) * len(TECHNIQUES))


def percent_text(score: Fraction) -> str:
    """``score`` as a percentage with one decimal, rounding half up."""
    value = Decimal(score.numerator * 100) / Decimal(score.denominator)
    return str(value.quantize(Decimal("0.1"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class NodeRow:
    node: str
    applied: tuple[str, ...]
    missing: tuple[str, ...]

    def to_json(self) -> dict:
        return {"node": self.node, "applied": list(self.applied), "missing": list(self.missing)}


@dataclass(frozen=True)
class ConfidenceReport:
    numerator: int
    denominator: int
    rows: tuple[NodeRow, ...]

    @property
    def score(self) -> Fraction:
        return Fraction(self.numerator, self.denominator)

    @property
    def percent(self) -> str:
        return percent_text(self.score)

    def to_json(self) -> dict:
        return {"numerator": self.numerator, "denominator": self.denominator,
                "percent": self.percent, "per_node": [r.to_json() for r in self.rows]}

    def text(self) -> str:
        width = max([len("node")] + [len(r.node) for r in self.rows])
        head = "node".ljust(width) + "  " + "  ".join(TECHNIQUES)
        lines = [head, "-" * len(head)]
        for r in self.rows:
            cells = ("x".center(len(t)) if t in r.applied else ".".center(len(t)) for t in TECHNIQUES)
            lines.append((r.node.ljust(width) + "  " + "  ".join(cells)).rstrip())
        lines.append(f"confidence {self.numerator}/{self.denominator} = {self.percent}%")
        return "\n".join(lines)


def confidence_report(graph: SystemGraph, table: EvidenceTable) -> ConfidenceReport:
    """Report over every graph node; nodes absent from ``table`` have no evidence."""
    table = normalize_table(table)
    unknown = sorted(set(table) - set(graph.names))
    if unknown:
        raise ConfidenceError(f"evidence names unknown node(s): {', '.join(unknown)}")
    if not graph.nodes:
        raise ConfidenceError("graph has no nodes")
    rows = []
    for node in graph.nodes:
        have = table.get(node.name, frozenset())
        rows.append(NodeRow(node.name, tuple(t for t in TECHNIQUES if t in have),
                            tuple(t for t in TECHNIQUES if t not in have)))
    return ConfidenceReport(sum(len(r.applied) for r in rows), len(rows) * len(TECHNIQUES), tuple(rows))


def evidence_from_graph(graph: SystemGraph) -> dict[str, frozenset[str]]:
    return {n.name: frozenset(n.evidence) for n in graph.nodes}


def load_evidence(text: str) -> dict[str, frozenset[str]]:
    """Parse a JSON evidence file ``{"Node": ["testing", ...]}``."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfidenceError(f"evidence file is not JSON: {exc}") from None
    if not isinstance(data, dict) or not all(isinstance(v, list) for v in data.values()):
        raise ConfidenceError("evidence file must map node names to lists of techniques")
    return normalize_table(data)
