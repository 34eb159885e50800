"""
Uniform random expression trees
===============================

Tree shapes with a given internal-node count are drawn exactly uniformly
using a precomputed counting table; operators and leaves are then assigned
by a weight profile. Type-dominant profiles concentrate the unary weight on
one function family.
"""

import random
from collections import Counter

from symforge import count_shapes, preset_profile, sample_expression
from symforge.expr import App, subtrees
from symforge.sampling import sample_shape, shape_signature

print("shapes with n internal nodes:", [count_shapes(n) for n in range(8)])

# empirical uniformity at n = 2 (6 shapes)
rng = random.Random(0)
freq = Counter(shape_signature(sample_shape(2, rng)) for _ in range(60_000))
print("n=2 frequencies (should be ~10000 each):", sorted(freq.values()))

# profiles control the operator mix; the unary slots show the family bias
from symforge.expr import UNARY_OPS

for name in ("uniform", "poly", "trig", "log"):
    profile = preset_profile(name, seed=1)
    r = random.Random(1)
    ops = Counter()
    for _ in range(400):
        for node in subtrees(sample_expression(profile, r)):
            if isinstance(node, App) and node.op in UNARY_OPS:
                ops[node.op] += 1
    top = ", ".join(f"{op}:{n}" for op, n in ops.most_common(4))
    print(f"{name:8s} top unary operators: {top}")
