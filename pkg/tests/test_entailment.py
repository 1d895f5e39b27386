import random

import pytest
from hypothesis import given, settings, strategies as st

from agcontracts.dsl import parse_formula
from agcontracts.entailment import (
    Counterexample, InterpretationStream, Model, ResourceExhausted, Scope, ScopeError, UnsatWithinScope, Valid,
    check_entailment, check_sat, enumerate_interpretations, size_vectors,
)
from agcontracts.logic import (
    FALSE, NAT, Exists, FunctionSymbol, Pred, PredicateSymbol, Signature, Var, base_sort, conj,
    evaluate, set_of, substitute,
)

from helpers import S, FormulaGen, count_interpretations, naive_entails

PLAN, LOC = base_sort("Plan"), base_sort("Location")
ROVER = Signature(
    sorts=[PLAN, LOC],
    functions=[FunctionSymbol("goal", (), LOC), FunctionSymbol("length", (PLAN,), NAT)],
    predicates=[PredicateSymbol("visits", (PLAN, LOC))],
)
A3 = parse_formula("forall p: Plan . p in PlanSet => visits(p, goal)", ROVER, {"PlanSet": set_of(PLAN)})
G2 = parse_formula("forall p: Plan . p in plans => visits(p, goal)", ROVER, {"plans": set_of(PLAN)})
WEAK = parse_formula("exists p: Plan . p in PlanSet and visits(p, goal)", ROVER, {"PlanSet": set_of(PLAN)})
SCOPE2 = Scope(2, 4)


# ------------------------------------------------------------ enumeration

def test_enumeration_counts():
    sig = Signature(sorts=[S], predicates=[PredicateSymbol("P", (S,))])
    assert isinstance(enumerate_interpretations(sig, (), Scope(1)), InterpretationStream)
    assert len(list(enumerate_interpretations(sig, (), Scope(1)))) == 2
    assert len(list(enumerate_interpretations(sig, (), Scope(2)))) == 6
    assert len(list(enumerate_interpretations(Signature(sorts=[S]), (), Scope(3)))) == 3


@pytest.mark.parametrize("scope", [1, 2, 3])
def test_enumeration_count_matches_closed_form(scope):
    sig = Signature(sorts=[S], functions=[FunctionSymbol("f", (S,), S)],
                    predicates=[PredicateSymbol("P", (S,)), PredicateSymbol("R", (S, S))])
    got = list(enumerate_interpretations(sig, (), Scope(scope)))
    assert len(got) == count_interpretations(range(1, scope + 1), preds=[1, 2], funcs=[1])
    keys = {(tuple(sorted(i.sizes.items())), tuple(sorted(i.functions["f"].items())),
             i.predicates["P"], i.predicates["R"]) for i in got}
    assert len(keys) == len(got)
    for interp in got:
        interp.check(sig)


def test_enumeration_with_set_constant_and_limit():
    stream = enumerate_interpretations(Signature(sorts=[S]), [("X", set_of(S))], Scope(2))
    values = [(i.sizes["S"], i.sets["X"]) for i in stream]
    assert values == [(1, frozenset()), (1, frozenset({0})), (2, frozenset()), (2, frozenset({0})),
                      (2, frozenset({1})), (2, frozenset({0, 1}))]
    limited = enumerate_interpretations(Signature(sorts=[S]), [("X", set_of(S))], Scope(2), limit=4)
    assert len(list(limited)) == 4 and limited.truncated
    full = enumerate_interpretations(Signature(sorts=[S]), (), Scope(2), limit=5)
    assert len(list(full)) == 2 and not full.truncated


def test_size_vectors_order_total_size_first():
    assert size_vectors(["A", "B"], Scope(2)) == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert size_vectors(["A", "B"], Scope(3))[:4] == [(1, 1), (1, 2), (2, 1), (1, 3)]


def test_scope_validation():
    with pytest.raises(ScopeError):
        Scope(0)
    with pytest.raises(ScopeError):
        Scope(None).bound("Plan")
    assert Scope(None, 4, {"Plan": 2}).bound("Plan") == 2
    assert Scope(2, 4, {"Plan": 1}).to_json() == {"default": 2, "nat_bound": 4, "sorts": {"Plan": 1}}


# ------------------------------------------------------------ entailment

def test_reflexivity_and_renamed_guarantee():
    assert isinstance(check_entailment([A3], A3, SCOPE2), Valid)
    bound = substitute(G2, {"plans": Var("PlanSet", set_of(PLAN))})
    assert isinstance(check_entailment([bound], A3), Valid)


def test_existential_planner_counterexample():
    result = check_entailment([WEAK], A3, SCOPE2)
    assert isinstance(result, Counterexample)
    interp, assign = result.interpretation, result.assignment
    assert interp.sizes == {"Location": 1, "Plan": 2}
    assert assign["PlanSet"] == frozenset({0, 1})
    assert interp.predicates["visits"] == frozenset({(0, 0)})
    assert evaluate(WEAK, interp, assign) and not evaluate(A3, interp, assign)
    data = result.to_json()
    assert data["domains"]["Plan"] == ["Plan0", "Plan1"]
    assert data["assignment"]["PlanSet"] == ["Plan0", "Plan1"]
    assert "visits = {(Plan0, Location0)}" in str(result)


def test_counterexample_is_size_minimal():
    for scope in (2, 3):
        result = check_entailment([WEAK], A3, Scope(scope))
        assert sum(result.interpretation.sizes.values()) == 3


def test_check_sat_examples():
    assert isinstance(check_sat(FALSE, SCOPE2), UnsatWithinScope)
    model = check_sat(Exists("x", S, parse_formula("x = x", Signature([S]), {"x": S})), Scope(3))
    assert isinstance(model, Model) and model.interpretation.sizes == {"S": 1}
    model = check_sat(parse_formula("x <= 2 and not (x <= 1)", Signature(), {"x": NAT}), Scope(3, 4))
    assert model.assignment == {"x": 2}


def test_budget_exhaustion_is_reported():
    result = check_entailment([WEAK], A3, Scope(3), budget=5)
    assert isinstance(result, ResourceExhausted)
    assert result.budget == 5 and result.examined >= 5


def test_results_are_deterministic():
    assert check_entailment([WEAK], A3, Scope(3)) == check_entailment([WEAK], A3, Scope(3))


def test_unsorted_input_is_rejected():
    with pytest.raises(Exception):
        check_entailment([], Pred("P", (Var("x"),)))


# ---------------------------------------------------------------- oracles

seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=200, deadline=None)
@given(seeds, st.booleans())
def test_check_entailment_agrees_with_naive_oracle(seed, rich):
    hyps, concl = FormulaGen(random.Random(seed), rich).entailment()
    fast = check_entailment(hyps, concl, SCOPE2)
    assert isinstance(fast, Valid) == naive_entails(hyps, concl, SCOPE2)


@settings(max_examples=150, deadline=None)
@given(seeds, st.booleans())
def test_counterexamples_replay(seed, rich):
    hyps, concl = FormulaGen(random.Random(seed), rich).entailment()
    result = check_entailment(hyps, concl, SCOPE2)
    if isinstance(result, Counterexample):
        env = dict(result.assignment)
        assert evaluate(conj(hyps), result.interpretation, env)
        assert not evaluate(concl, result.interpretation, env)
        result.interpretation.check(result.signature)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_monotone_in_scope(seed):
    hyps, concl = FormulaGen(random.Random(seed)).entailment()
    small = check_entailment(hyps, concl, Scope(1, 2))
    if isinstance(small, Counterexample):
        for bigger in (Scope(2, 2), Scope(3, 3)):
            assert isinstance(check_entailment(hyps, concl, bigger), Counterexample)
