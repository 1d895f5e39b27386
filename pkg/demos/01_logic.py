"""Formulas, sorts and substitution.

A tour of the term language underneath every contract.
"""
from agcontracts.dsl import parse_formula
from agcontracts.logic import (
    NAT, FunctionSymbol, PredicateSymbol, Signature, Var, alpha_equivalent, base_sort,
    formula_text, free_names, set_of, substitute,
)

# %% A signature for a tiny rover world
plan, loc = base_sort("Plan"), base_sort("Location")
sig = Signature(
    sorts=[plan, loc],
    functions=[FunctionSymbol("goal", (), loc), FunctionSymbol("length", (plan,), NAT)],
    predicates=[PredicateSymbol("visits", (plan, loc))],
)
ctx = {"PlanSet": set_of(plan), "plan": plan}

# %% Parsing sort-checks against the signature
a = parse_formula("forall p: Plan . p in PlanSet => visits(p, goal)", sig, ctx)
print("formula   :", formula_text(a))
print("free vars :", sorted(free_names(a)))

# %% Substitution never captures a bound variable
b = parse_formula("exists p: Plan . p != plan and length(p) <= length(plan)", sig, ctx)
renamed = substitute(b, {"plan": Var("p", plan)})
print("before    :", formula_text(b))
print("after     :", formula_text(renamed))

# %% Bound names do not matter
c = parse_formula("forall q: Plan . q in PlanSet => visits(q, goal)", sig, ctx)
print("a ~ c     :", alpha_equivalent(a, c))
