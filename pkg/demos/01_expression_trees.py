"""
Expression trees: building, evaluating, simplifying
===================================================

Expressions are immutable trees: operators at internal nodes, integers,
variables, and named constants at the leaves.
"""

from symforge import add, div, evaluate, metrics, mul, pow_, simplify, structural_equal, sub

# the constructor helpers coerce ints and symbol names
e = add(7, mul(3, add(5, 2)))
print("tree:", e)
print("value:", evaluate(e, {}))          # 28.0

# two renderings of the same value are different trees
other = add(mul(3, add(5, 2)), 7)
print("same value, different trees:", not structural_equal(e, other))

# the simplifier folds constants and produces a canonical normal form
print("simplified:", simplify(e))          # Int(28)
print("x*x^2 * x^3:", simplify(mul(mul("x", pow_("x", 2)), pow_("x", 3))))

# rewrites are value-preserving wherever defined
messy = div(sub(mul("x", "x"), mul("x", "x")), add("x", 1))
print("0/(x+1) ->", simplify(messy))

# size accounting: (internal nodes, depth, leaves)
print("metrics of sin-free tree:", metrics(e))
