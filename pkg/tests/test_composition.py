import pytest
from hypothesis import given, settings, strategies as st

from agcontracts.composition import (
    EXHAUSTED, FAILED, PENDING, VALID, ComposedContract, CompositionError, compose_branch,
    compose_join, compose_loop, compose_sequential, discharge_obligations, system_contract,
)
from agcontracts.dsl import load_spec, parse_formula
from agcontracts.entailment import Scope
from agcontracts.graph import Contract
from agcontracts.logic import (
    FALSE, NAT, TRUE, And, Eventually, Not, Or, Pred, PredicateSymbol, Signature, Var,
    alpha_equivalent, base_sort, count_eventually, formula_text,
)

from helpers import spec_text

R = base_sort("Reading")
SIG = Signature(sorts=[R], predicates=[PredicateSymbol(n, (R,)) for n in ("P", "Q", "W")])


def contract(name, assume, guarantee, ins, outs, sig=SIG):
    ctx = {**dict(ins), **dict(outs)}
    return Contract(parse_formula(assume, sig, ctx), parse_formula(guarantee, sig, ctx),
                    tuple(ins), tuple(outs), node=name)


def rover():
    return load_spec(spec_text("rover.agspec"))[2]


def node_contract(graph, name):
    return graph.node(name).contract


# ------------------------------------------------------------ sequential

def test_planner_agent_sequential():
    g = rover()
    planner, agent = node_contract(g, "Planner"), node_contract(g, "Agent")
    composed, ob = compose_sequential(planner, agent, {"plans": "PlanSet"})
    assert ob.id == "Planner->Agent" and ob.status == PENDING
    assert ob.hypotheses == (planner.body,)
    assert formula_text(ob.conclusion) == "forall p: Plan . p in plans => visits(p, goal)"
    assert ob.sources == ("Planner.plans",) and ob.targets == ("Agent.PlanSet",)
    assert composed.assumption == planner.assumption
    assert composed.guarantee == Eventually(agent.body)
    assert composed.pattern == "sequential" and composed.constituents == ("Planner", "Agent")
    (done,), summary = discharge_obligations([ob])
    assert done.status == VALID and summary == {VALID: 1, FAILED: 0, EXHAUSTED: 0}


def test_chain_of_three_has_one_eventually():
    a = contract("a", "P(x)", "eventually Q(y)", [("x", R)], [("y", R)])
    b = contract("b", "Q(x)", "eventually eventually W(y)", [("x", R)], [("y", R)])
    c = contract("c", "W(x)", "P(y)", [("x", R)], [("y", R)])
    ab, ob1 = compose_sequential(a, b, {"y": "x"})
    # b's y was renamed apart from a's y inside the composed contract
    assert ab.origin_map["y1"] == ("b", "y")
    abc, ob2 = compose_sequential(ab, c, {"y1": "x"})
    assert count_eventually(abc.guarantee) == 1 and isinstance(abc.guarantee, Eventually)
    assert abc.assumption == a.assumption
    assert ob2.id == "b->c"
    done, summary = discharge_obligations([ob1, ob2], Scope(2))
    assert summary[VALID] == 2


def test_sequential_errors():
    a = contract("a", "true", "P(y)", [("x", R)], [("y", R)])
    n = Contract(TRUE, TRUE, (("k", NAT),), (), node="n")
    with pytest.raises(CompositionError):
        compose_sequential(a, n, {"y": "k"})
    b = contract("b", "P(x) and Q(z)", "true", [("x", R), ("z", R)], [])
    with pytest.raises(CompositionError):
        compose_sequential(a, b, {"y": "x"}, environment=())
    composed, _ = compose_sequential(a, b, {"y": "x"}, environment=("z",))
    assert composed.pattern == "sequential"


def test_name_clashes_are_renamed_apart():
    a = contract("a", "P(x)", "Q(y) and P(x)", [("x", R)], [("y", R)])
    b = contract("b", "Q(x)", "W(y) and Q(x)", [("x", R)], [("y", R)])
    composed, ob = compose_sequential(a, b, {"y": "x"})
    assert formula_text(ob.conclusion) == "Q(y)"
    # b's own y must not be confused with a's y
    assert formula_text(composed.body) == "W(y1) and Q(x1)"
    assert composed.origin_map["y1"] == ("b", "y") and composed.origin_map["x"] == ("a", "x")


# ----------------------------------------------------------------- join

def test_join_two_upstreams():
    u = contract("u", "true", "P(o)", [("i", R)], [("o", R)])
    v = contract("v", "true", "Q(o)", [("i", R)], [("o", R)])
    w = contract("w", "P(a) and Q(b)", "W(z)", [("a", R), ("b", R)], [("z", R)])
    composed, ob = compose_join([u, v], w, [{"o": "a"}, {"o": "b"}])
    assert ob.id == "u+v->w" and len(ob.hypotheses) == 2
    assert formula_text(ob.conclusion) == "P(o) and Q(o1)"
    assert composed.assumption == And(TRUE, TRUE) and composed.guarantee == Eventually(w.body)
    (done,), _ = discharge_obligations([ob], Scope(2))
    assert done.status == VALID and not done.warnings


def test_join_with_contradictory_upstreams_warns():
    u = contract("u", "true", "P(o)", [], [("o", R)])
    v = contract("v", "true", "not P(o)", [], [("o", R)])
    w = contract("w", "W(a) and W(b)", "true", [("a", R), ("b", R)], [])
    _, ob = compose_join([u, v], w, [{"o": "a"}, {"o": "b"}])
    # o is renamed apart, so the hypotheses only clash once they share a value
    (done,), _ = discharge_obligations([ob], Scope(2))
    assert done.status == FAILED
    v2 = contract("v", "true", "forall r: Reading . not P(r)", [], [("o", R)])
    _, ob = compose_join([u, v2], w, [{"o": "a"}, {"o": "b"}])
    (done,), _ = discharge_obligations([ob], Scope(2))
    assert done.status == VALID
    assert any("unsatisfiable" in w for w in done.warnings)


def test_join_rejects_overlap():
    u = contract("u", "true", "P(o)", [], [("o", R)])
    w = contract("w", "P(a)", "true", [("a", R)], [])
    with pytest.raises(CompositionError):
        compose_join([u, u], w, [{"o": "a"}, {"o": "a"}])


def test_single_upstream_join_equals_sequential():
    g = rover()
    planner, agent = node_contract(g, "Planner"), node_contract(g, "Agent")
    assert compose_join([planner], agent, [{"plans": "PlanSet"}]) == \
        compose_sequential(planner, agent, {"plans": "PlanSet"})


# ---------------------------------------------------------------- branch

def test_fanout_branch_conjoins():
    up = contract("up", "true", "P(o)", [("i", R)], [("o", R)])
    b1 = contract("b1", "P(x)", "Q(y)", [("x", R)], [("y", R)])
    b2 = contract("b2", "P(x)", "W(y)", [("x", R)], [("y", R)])
    composed, obs = compose_branch(up, [(TRUE, b1), (TRUE, b2)], [{"o": "x"}, {"o": "x"}])
    assert [o.id for o in obs] == ["up->b1", "up->b2"]
    assert all(o.hypotheses == (up.body,) for o in obs)
    assert formula_text(composed.body) == "Q(y) and W(y1)"
    done, summary = discharge_obligations(obs, Scope(2))
    assert summary[VALID] == 2


def test_guarded_branch_disjoins():
    up = contract("up", "true", "true", [], [("o", R)])
    b1 = contract("b1", "P(x)", "Q(y)", [("x", R)], [("y", R)])
    b2 = contract("b2", "not P(x)", "W(y)", [("x", R)], [("y", R)])
    guard = Pred("P", (Var("o", R),))
    composed, obs = compose_branch(up, [(guard, b1), (Not(guard), b2)], [{"o": "x"}, {"o": "x"}])
    assert composed.body == Or(And(guard, b1.body), And(Not(guard), Pred("W", (Var("y1", R),))))
    assert [o.hypotheses for o in obs] == [(TRUE, guard), (TRUE, Not(guard))]
    done, summary = discharge_obligations(obs, Scope(2))
    assert summary[VALID] == 2


def test_branch_guard_must_use_upstream_outputs():
    up = contract("up", "true", "true", [("i", R)], [("o", R)])
    b = contract("b", "true", "true", [("x", R)], [])
    with pytest.raises(CompositionError):
        compose_branch(up, [(Pred("P", (Var("i", R),)), b)], [{"o": "x"}])


def test_single_branch_equals_sequential():
    g = rover()
    vision, planner = node_contract(g, "Vision"), node_contract(g, "Planner")
    composed, (ob,) = compose_branch(vision, [(TRUE, planner)], [{"target": "target"}])
    assert (composed, ob) == compose_sequential(vision, planner, {"target": "target"})


# ------------------------------------------------------------------ loop

def test_counter_loop_certified_at_nat_bound_5():
    sig = Signature()
    c = contract("Counter", "x <= 3", "xn <= 3", [("x", NAT)], [("xn", NAT)], sig)
    composed, ob = compose_loop(c, {"xn": "x"}, unroll=3)
    assert composed.pattern == "loop" and composed.unroll == 3
    assert formula_text(ob.conclusion) == "xn <= 3"
    (done,), _ = discharge_obligations([ob], Scope(3, 5))
    assert done.status == VALID and not done.warnings


def test_loop_with_false_guarantee_warns():
    c = Contract(Pred("P", (Var("x", R),)), FALSE, (("x", R),), (("y", R),), node="c")
    _, ob = compose_loop(c, {"y": "x"}, 1)
    (done,), _ = discharge_obligations([ob], Scope(2))
    assert done.status == VALID and done.warnings


def test_loop_preconditions():
    c = Contract(TRUE, TRUE, (("x", R),), (("y", R),), node="c")
    with pytest.raises(CompositionError):
        compose_loop(c, {"y": "x"}, 0)
    with pytest.raises(CompositionError):
        compose_loop(c, {}, 1)


# ------------------------------------------------------------- discharge

def test_discharge_empty_and_mutant():
    assert discharge_obligations([]) == ([], {VALID: 0, FAILED: 0, EXHAUSTED: 0})
    _, obs = system_contract(load_spec(spec_text("rover-mutant.agspec"))[2])
    done, summary = discharge_obligations(obs, Scope(2))
    assert summary == {VALID: 2, FAILED: 1, EXHAUSTED: 0}
    bad = [o for o in done if o.status == FAILED][0]
    assert bad.id == "Planner->Agent"
    assert bad.counterexample.interpretation.sizes["Plan"] == 2


def test_discharge_exhausted():
    _, obs = system_contract(load_spec(spec_text("rover-mutant.agspec"))[2])
    done, summary = discharge_obligations(obs, Scope(3), budget=10)
    assert summary[EXHAUSTED] >= 1


# ------------------------------------------------------- system contract

def test_rover_system_contract():
    g = rover()
    composed, obs = system_contract(g)
    assert composed.assumption == node_contract(g, "Vision").assumption
    assert composed.guarantee == Eventually(node_contract(g, "HardwareInterface").body)
    assert [o.id for o in obs] == ["Vision->Planner", "Planner->Agent", "Agent->HardwareInterface"]
    assert all(o.origin == "sequential" for o in obs)
    done, summary = discharge_obligations(obs)
    assert summary[VALID] == 3
    assert system_contract(g) == (composed, obs)


def test_single_node_system_contract():
    graph = load_spec(spec_text("single-node.agspec"))[2]
    composed, obs = system_contract(graph)
    own = node_contract(graph, "Echo")
    assert obs == [] and composed.assumption == own.assumption and composed.guarantee == own.guarantee


def test_diamond_rule_applications():
    graph = load_spec(spec_text("diamond.agspec"))[2]
    composed, obs = system_contract(graph)
    assert [o.origin for o in obs] == ["branch", "branch", "join"]
    assert formula_text(composed.guarantee) == "eventually fused(l, r, z)"
    assert discharge_obligations(obs)[1][VALID] == 3


def test_counter_loop_system_contract():
    graph = load_spec(spec_text("counter-loop.agspec"))[2]
    composed, obs = system_contract(graph, unroll=4)
    assert composed.pattern == "loop" and composed.unroll == 4
    assert [o.origin for o in obs] == ["loop"]


def test_multi_node_cycle_rejected():
    graph = load_spec(spec_text("rover.agspec").replace(
        "node Vision {\n  in frame: Image", "node Vision {\n  in frame: Image\n  in fb: Command") +
        "connect HardwareInterface.cmd -> Vision.fb\n")[2]
    with pytest.raises(CompositionError):
        system_contract(graph)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(["rover.agspec", "diamond.agspec", "fanout.agspec", "counter-loop.agspec",
                        "single-node.agspec", "join-fail.agspec"]), st.integers(1, 4))
def test_composed_guarantees_have_exactly_one_eventually(name, unroll):
    composed, obs = system_contract(load_spec(spec_text(name))[2], unroll=unroll)
    assert count_eventually(composed.guarantee) == 1
    for ob in obs:
        assert all(count_eventually(h) == 0 for h in ob.hypotheses)
        assert count_eventually(ob.conclusion) == 0


def test_composed_contract_normalizes_nested_eventually():
    c = ComposedContract(TRUE, Eventually(Eventually(TRUE)), "sequential", ("a",))
    assert c.guarantee == Eventually(TRUE)
    assert alpha_equivalent(c.body, TRUE)
