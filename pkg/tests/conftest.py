import random

import pytest

from symforge.sampling import preset_profile, sample_expression


@pytest.fixture
def rng():
    return random.Random(0xC0FFEE)


def random_expressions(count, seed=1234, profile="uniform", ops=(1, 8)):
    """Deterministic stream of simplifier-ready random expressions."""
    prof = preset_profile(profile).with_ops_range(*ops)
    r = random.Random(seed)
    return [sample_expression(prof, r) for _ in range(count)]


def valid_points(e, r, count=5, lo=-10.0, hi=10.0, attempts=200):
    """Up to `count` points where e evaluates; empty when the domain is
    (practically) empty."""
    from symforge.expr import EvalDomainError, evaluate, free_symbols

    names = sorted(free_symbols(e))
    points = []
    for _ in range(attempts):
        p = {n: r.uniform(lo, hi) for n in names}
        try:
            evaluate(e, p)
        except EvalDomainError:
            continue
        points.append(p)
        if len(points) >= count:
            break
    return points
