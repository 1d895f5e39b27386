"""Refuting an entailment with the small-scope checker.

The planner promises only that *some* plan reaches the goal; the agent
needs *every* plan to.  The checker finds the smallest world where that
breaks.
"""
from agcontracts.dsl import parse_formula
from agcontracts.entailment import Scope, check_entailment
from agcontracts.logic import NAT, FunctionSymbol, PredicateSymbol, Signature, base_sort, set_of

plan, loc = base_sort("Plan"), base_sort("Location")
sig = Signature(sorts=[plan, loc],
                functions=[FunctionSymbol("goal", (), loc), FunctionSymbol("length", (plan,), NAT)],
                predicates=[PredicateSymbol("visits", (plan, loc))])
ctx = {"PlanSet": set_of(plan)}

weak = parse_formula("exists p: Plan . p in PlanSet and visits(p, goal)", sig, ctx)
strong = parse_formula("forall p: Plan . p in PlanSet => visits(p, goal)", sig, ctx)

# %% A promise always implies itself
print(check_entailment([strong], strong, Scope(3)))

# %% The weak promise does not imply the strong one
result = check_entailment([weak], strong, Scope(3))
print(result)
