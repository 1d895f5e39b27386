import random

import pytest
from hypothesis import given, settings, strategies as st

from agcontracts.dsl import load_spec
from agcontracts.logic import NAT, base_sort, set_of
from agcontracts.monitor import (
    INPUT, OUTPUT, Event, Idle, MonitorError, Obligated, Satisfied, TraceError, Vacuous, Violated,
    check_trace, check_well_formed, instantiate_monitor, step_monitor, trace_from_jsonl,
    trace_to_jsonl, verdicts_json,
)
from agcontracts.simulation import run_simulation, system_contracts

from helpers import random_scenario, rover_universe, spec_text

_, _, ROVER = load_spec(spec_text("rover.agspec"))
AGENT = ROVER.node("Agent").contract
PLANS = frozenset({"p0", "p1"})


def agent_monitor(**overrides):
    return instantiate_monitor(AGENT, rover_universe(**overrides), "Agent")


def test_agent_obligated_then_satisfied_by_shortest_plan():
    m = agent_monitor()
    assert isinstance(m.state, Idle)
    s = step_monitor(m, Event(0, "Agent", INPUT, {"PlanSet": PLANS}))
    assert s == Obligated(0, (("PlanSet", PLANS),))
    assert step_monitor(m, Event(0, "Agent", OUTPUT, {"plan": "p0"})) == Satisfied(0)
    assert step_monitor(m, None) == Satisfied(0)


def test_longest_plan_leaves_obligation_open():
    m = agent_monitor()
    step_monitor(m, Event(0, "Agent", INPUT, {"PlanSet": PLANS}))
    assert isinstance(step_monitor(m, Event(0, "Agent", OUTPUT, {"plan": "p1"})), Obligated)
    assert step_monitor(m, None) == Violated(0)
    assert Violated(0).to_json() == {"state": "violated", "since": 0, "at": "end"}


def test_false_assumption_keeps_monitor_idle_and_vacuous():
    m = agent_monitor(predicates={"visits": {("p0", "l0")}})
    step_monitor(m, Event(0, "Agent", INPUT, {"PlanSet": PLANS}))
    assert isinstance(m.state, Idle)
    assert step_monitor(m, None) == Vacuous()


def test_empty_trace_is_vacuous_everywhere():
    verdicts = check_trace([], system_contracts(ROVER), rover_universe())
    assert set(verdicts) == {"Vision", "Planner", "Agent", "HardwareInterface", "<system>"}
    assert all(isinstance(v, Vacuous) for v in verdicts.values())


def test_guarantee_met_at_a_later_step():
    # A holds when the node first fires; G only holds on the third output
    m = agent_monitor()
    trace = [Event(1, "Agent", INPUT, {"PlanSet": PLANS}), Event(1, "Agent", OUTPUT, {"plan": "p1"}),
             Event(2, "Agent", INPUT, {"PlanSet": PLANS}), Event(2, "Agent", OUTPUT, {"plan": "p1"}),
             Event(3, "Agent", INPUT, {"PlanSet": PLANS}), Event(3, "Agent", OUTPUT, {"plan": "p0"})]
    states = [step_monitor(m, e) for e in trace]
    assert states[0] == Obligated(1, (("PlanSet", PLANS),))
    assert states[-1] == Satisfied(3)
    assert verdicts_json({"Agent": m.finish()}) == {"Agent": {"state": "satisfied", "at": 3}}


def test_guarantee_uses_frozen_inputs():
    # a later, smaller PlanSet does not change what the obligation is about
    m = agent_monitor()
    step_monitor(m, Event(0, "Agent", INPUT, {"PlanSet": PLANS}))
    step_monitor(m, Event(0, "Agent", OUTPUT, {"plan": "p1"}))
    step_monitor(m, Event(1, "Agent", INPUT, {"PlanSet": frozenset({"p1"})}))
    assert isinstance(step_monitor(m, Event(1, "Agent", OUTPUT, {"plan": "p1"})), Obligated)


def test_events_of_other_nodes_are_ignored():
    m = agent_monitor()
    step_monitor(m, Event(0, "Planner", OUTPUT, {"plans": PLANS}))
    assert isinstance(m.state, Idle)


def test_universe_errors():
    u = rover_universe()
    with pytest.raises(MonitorError):
        u.encode("p9", base_sort("Plan"))
    with pytest.raises(MonitorError):
        u.encode(4, NAT)
    with pytest.raises(MonitorError):
        u.encode("p0", set_of(base_sort("Plan")))
    with pytest.raises(MonitorError):
        u.domain(base_sort("Ghost"))
    with pytest.raises(MonitorError):
        agent_monitor(sorts={"Location": ("l0",), "Image": ("i",), "Command": ("c",)})
    with pytest.raises(MonitorError):
        agent_monitor(functions={"length": {("p0",): 1}})
    m = agent_monitor()
    with pytest.raises(MonitorError):
        step_monitor(m, Event(0, "Agent", INPUT, {"PlanSet": frozenset({"p7"})}))


def test_universe_domain_and_decode():
    u = rover_universe()
    plan = base_sort("Plan")
    assert u.domain(set_of(plan)) == [frozenset(), frozenset({"p0"}), frozenset({"p1"}), PLANS]
    assert u.decode(u.encode(PLANS, set_of(plan)), set_of(plan)) == PLANS
    with pytest.raises(MonitorError):
        rover_universe(sorts={"Plan": ()})
    with pytest.raises(MonitorError):
        rover_universe(sorts={"Plan": ("p0", "p0")})


def test_jsonl_round_trip():
    trace = [Event(0, "Agent", INPUT, {"PlanSet": PLANS}), Event(0, "Agent", OUTPUT, {"plan": "p0"})]
    text = trace_to_jsonl(trace)
    assert text.splitlines()[0] == ('{"node": "Agent", "phase": "input", "step": 0, '
                                    '"values": {"PlanSet": ["p0", "p1"]}}')
    assert trace_from_jsonl(text) == trace


def test_well_formedness():
    with pytest.raises(TraceError):
        Event(0, "A", "sideways", {})
    with pytest.raises(TraceError):
        Event(-1, "A", INPUT, {})
    with pytest.raises(TraceError):
        check_well_formed([Event(1, "A", INPUT, {}), Event(0, "A", INPUT, {})])
    with pytest.raises(TraceError):
        check_well_formed([Event(0, "A", OUTPUT, {})])
    with pytest.raises(TraceError):
        check_well_formed([Event(0, "A", INPUT, {}), Event(1, "A", OUTPUT, {})])
    check_well_formed([Event(0, "A", INPUT, {}), Event(0, "B", INPUT, {}), Event(0, "A", OUTPUT, {})])


# ------------------------------------------------------------- properties

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def simulate(seed):
    graph, stubs, universe, env, sim_seed, steps, unroll = random_scenario(random.Random(seed))
    result = run_simulation(graph, stubs, universe, env, sim_seed, steps, unroll=unroll)
    contracts = system_contracts(graph, max(steps if unroll is None else unroll, 1))
    return result, contracts, universe


@settings(max_examples=150, deadline=None)
@given(seeds)
def test_online_and_offline_verdicts_agree(seed):
    result, contracts, universe = simulate(seed)
    online = {**result.verdicts, "<system>": result.system_verdict}
    assert check_trace(result.trace, contracts, universe) == online
    assert check_trace(trace_from_jsonl(trace_to_jsonl(result.trace)), contracts, universe) == online


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_terminal_states_are_absorbing(seed):
    result, contracts, universe = simulate(seed)
    for name, contract in contracts.items():
        m = instantiate_monitor(contract, universe, name)
        history = [m.state] + [step_monitor(m, e) for e in result.trace]
        for before, after in zip(history, history[1:]):
            if isinstance(before, Satisfied):
                assert after == before
            if isinstance(before, Obligated):
                assert isinstance(after, (Obligated, Satisfied))
                if isinstance(after, Obligated):
                    assert after == before
        final = step_monitor(m, None)
        assert step_monitor(m, None) == final
