"""
The calculus layer: differentiate, integrate, invert
====================================================

Differentiation is total. Integration is a rule engine that either returns
a verified antiderivative or reports no-rule so callers can skip the
candidate. Leaf isolation inverts an equation along the path to a unique
target symbol; it is the primitive behind ODE dataset construction.
"""

from symforge import add, differentiate, div, encode, integrate_rule_based, isolate_leaf, mul, pow_
from symforge.expr import C, X, Y, asin, cos, exp, sin

print("d/dx asin(x) =", " ".join(encode(differentiate(asin(X)))))
print("d/dx x*sin(x) =", " ".join(encode(differentiate(mul(X, sin(X))))))

# y is treated as y(x): derivative markers chain
print("d/dx y^2 =", " ".join(encode(differentiate(pow_(Y, 2)))))

for integrand in (cos(X), div(1, add(1, pow_(X, 2))), mul(X, exp(X)), exp(pow_(X, 2))):
    prim = integrate_rule_based(integrand)
    shown = " ".join(encode(integrand))
    if prim is None:
        print(f"integral of {shown}: no rule (skip)")
    else:
        print(f"integral of {shown}: {' '.join(encode(prim.antiderivative))}")

# solve y = c * exp(x) for c
result = isolate_leaf(Y, mul(C, exp(X)), "c")
print("c =", " ".join(encode(result.isolated)), f"({result.steps} inversions)")

# a target that appears twice cannot be isolated
print("pow(c, c) invertible:", isolate_leaf(Y, pow_(C, C), "c") is not None)
