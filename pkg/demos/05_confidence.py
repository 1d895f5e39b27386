"""How much verification evidence backs the rover."""
from pathlib import Path

from agcontracts.confidence import TECHNIQUES, confidence_report, load_evidence
from agcontracts.dsl import load_spec

SPECS = Path(__file__).resolve().parent.parent / "specs"
_, _, graph = load_spec((SPECS / "rover.agspec").read_text())
table = load_evidence((SPECS / "evidence.json").read_text())

# %% The evidence matrix as shipped
print(confidence_report(graph, table).text())

# %% Formal methods on the vision node closes part of the gap
better = {**table, "Vision": table["Vision"] | {"formal"}}
print(confidence_report(graph, better).text().splitlines()[-1])

# %% Everything everywhere
full = {n: frozenset(TECHNIQUES) for n in graph.names}
print(confidence_report(graph, full).text().splitlines()[-1])
