"""Composing the rover pipeline into one system contract."""
from pathlib import Path

from agcontracts.composition import discharge_obligations, system_contract
from agcontracts.dsl import load_spec
from agcontracts.logic import formula_text

SPECS = Path(__file__).resolve().parent.parent / "specs"

# %% Four nodes in a line give three sequential obligations
_, _, graph = load_spec((SPECS / "rover.agspec").read_text())
composed, obligations = system_contract(graph)
done, summary = discharge_obligations(obligations)
for ob in done:
    print(f"{ob.id:28s} {ob.status}")
print("system:", formula_text(composed.assumption), "=>", formula_text(composed.guarantee))

# %% A diamond needs branch and join rules
_, _, diamond = load_spec((SPECS / "diamond.agspec").read_text())
composed, obligations = system_contract(diamond)
print([ob.origin for ob in obligations])
print("system:", formula_text(composed.guarantee))

# %% Weakening the planner breaks exactly one link
_, _, mutant = load_spec((SPECS / "rover-mutant.agspec").read_text())
done, _ = discharge_obligations(system_contract(mutant)[1])
for ob in done:
    print(f"{ob.id:28s} {ob.status}")
