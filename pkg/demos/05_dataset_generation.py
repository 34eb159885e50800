"""
Generating the five datasets
============================

Every generator rejection-samples until `count` verified pairs exist:
  bwd  - differentiate a random function (long problems, short solutions)
  fwd  - integrate a random function with the rule engine (when it can)
  ibp  - combine two functions through the integration-by-parts identity,
         looking the missing integral up in a table of known primitives
  ode1 - plant a constant, solve for it, differentiate it away
  ode2 - same with two constants and two derivative rounds
"""

import random

from symforge import GenStats, generate_samples, preset_profile, seed_table_from_bwd
from symforge.datafiles import dataset_stats

small = preset_profile("uniform").with_ops_range(1, 5)

for task in ("bwd", "fwd", "ode1", "ode2"):
    stats = GenStats()
    pairs = generate_samples(task, small, 50, seed=7, stats=stats)
    rows = [(p.problem, p.solution) for p in pairs]
    doc = dataset_stats(rows)
    print(
        f"{task}: {len(pairs)} pairs, coverage {stats.coverage:.1%}, "
        f"median problem/solution tokens "
        f"{doc['problem_tokens']['median']:.0f}/{doc['solution_tokens']['median']:.0f}"
    )
    sample = pairs[0]
    print("   e.g.", " ".join(sample.problem), " -> ", " ".join(sample.solution))

# ibp needs a table of known integrals; a bwd run seeds it
table = seed_table_from_bwd(small, 2000, random.Random(99))
stats = GenStats()
pairs = generate_samples("ibp", small, 25, seed=7, table=table, stats=stats)
print(f"ibp: {len(pairs)} pairs, coverage {stats.coverage:.1%}, table grew to {len(table)}")
print("   e.g.", " ".join(pairs[0].problem), " -> ", " ".join(pairs[0].solution))
