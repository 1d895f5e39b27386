"""Monitoring a simulated rover.

The same world is run twice: once with an agent that picks the shortest
plan and once with one that picks the longest.
"""
from pathlib import Path

from agcontracts.dsl import load_spec
from agcontracts.monitor import check_trace, trace_to_jsonl
from agcontracts.simulation import parse_scenario, run_simulation, system_contracts

SPECS = Path(__file__).resolve().parent.parent / "specs"
_, _, graph = load_spec((SPECS / "rover.agspec").read_text())


def run(name):
    sc = parse_scenario((SPECS / name).read_text())
    return sc, run_simulation(graph, sc.build_stubs(graph), sc.universe, sc.inputs, sc.seed, sc.steps)


# %% Shortest plan
sc, result = run("rover.agsim")
print(trace_to_jsonl(result.trace), end="")
print({k: v.name for k, v in result.verdicts.items()}, result.system_verdict.name)

# %% Longest plan: the agent breaks its promise, the system contract still holds
sc, result = run("rover-longest.agsim")
print({k: v.name for k, v in result.verdicts.items()}, result.system_verdict.name)
print("violations:", result.violations)

# %% Replaying the trace offline gives the same verdicts
offline = check_trace(result.trace, system_contracts(graph), sc.universe)
print("offline agrees:", offline == {**result.verdicts, "<system>": result.system_verdict})
