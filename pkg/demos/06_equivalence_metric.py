"""
Scoring predictions: the equivalence metric
===========================================

A prediction counts as correct when the difference against the reference
simplifies to zero, or failing that, vanishes numerically at enough random
points. Indefinite integrals are only defined up to a constant, so an
explicit flag can grant mod-constant credit. ODE predictions are accepted
whenever they actually solve the equation, whatever the reference says.
"""

from symforge import add, check_equiv_exprs, check_ode_solution, encode, mul, pow_
from symforge.expr import C, Int, X, Y, Sym, cos, sin, sub

cases = [
    ("identical", sin(X), sin(X), False),
    ("pythagorean identity", add(pow_(sin(X), 2), pow_(cos(X), 2)), Int(1), False),
    ("offset, strict", add(X, 1), add(X, 2), False),
    ("offset, mod-constant", add(X, 1), add(X, 2), True),
    ("plain mismatch", mul(2, X), mul(3, X), False),
]
for name, pred, ref, flag in cases:
    verdict = check_equiv_exprs(pred, ref, mod_constant=flag)
    print(f"{name:24s} -> {verdict.outcome.value:24s} ({verdict.detail})")

# ODE scoring substitutes the candidate and its derivatives
ode = sub(mul(X, Sym("y1")), Y)  # x y' - y = 0
for candidate in (mul(C, X), mul(2, X), X, pow_(X, 2)):
    verdict = check_ode_solution(ode, candidate)
    print(f"x*y1 - y = 0, candidate {' '.join(encode(candidate)):12s} -> {verdict.outcome.value}")
