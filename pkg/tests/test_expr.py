import math
import random

import pytest

from symforge.expr import (
    ARITY,
    App,
    BINARY_OPS,
    EvalDomainError,
    Int,
    Sym,
    UNARY_OPS,
    UnboundSymbolError,
    X,
    add,
    cos,
    div,
    evaluate,
    exp,
    ln,
    metrics,
    mul,
    neg,
    pow_,
    simplify,
    simplify_ex,
    sin,
    sqrt,
    structural_equal,
    sub,
)

from conftest import random_expressions, valid_points


class TestOperatorAlphabet:
    def test_binary_set(self):
        assert set(BINARY_OPS) == {"add", "sub", "mul", "div", "pow"}

    def test_unary_set(self):
        assert set(UNARY_OPS) == {
            "neg", "exp", "ln", "sqrt", "sin", "cos", "tan", "asin", "acos", "atan",
        }

    def test_arities_match_membership(self):
        assert all(ARITY[op] == 2 for op in BINARY_OPS)
        assert all(ARITY[op] == 1 for op in UNARY_OPS)

    def test_wrong_arity_rejected(self):
        with pytest.raises(ValueError):
            App("add", (X,))
        with pytest.raises(ValueError):
            App("sin", (X, X))
        with pytest.raises(ValueError):
            App("frobnicate", (X,))


class TestEvaluate:
    def test_identity_arithmetic(self):
        assert evaluate(add(X, 1), {"x": 0}) == 1.0

    def test_nested_constant_expression(self):
        inner = mul(3, add(5, 2))
        assert evaluate(inner, {}) == 21.0
        assert evaluate(add(7, inner), {}) == 28.0

    def test_ln_of_negative_is_domain_error(self):
        with pytest.raises(EvalDomainError):
            evaluate(ln(X), {"x": -1})

    @pytest.mark.parametrize(
        "expr,point",
        [
            (sqrt(X), {"x": -2.0}),
            (div(Int(1), X), {"x": 0.0}),
            (pow_(Int(0), Int(-1)), {}),
            (App("asin", (X,)), {"x": 3.0}),
            (exp(Int(10_000)), {}),
        ],
    )
    def test_domain_errors(self, expr, point):
        with pytest.raises(EvalDomainError):
            evaluate(expr, point)

    def test_domain_error_carries_offending_node(self):
        bad = ln(sub(X, 5))
        outer = add(Int(3), bad)
        with pytest.raises(EvalDomainError) as exc_info:
            evaluate(outer, {"x": 0})
        assert exc_info.value.node == bad

    def test_unbound_symbol(self):
        with pytest.raises(UnboundSymbolError):
            evaluate(add(X, Sym("y")), {"x": 1.0})

    def test_constant_symbols(self):
        assert evaluate(Sym("pi"), {}) == pytest.approx(math.pi)
        assert evaluate(Sym("ee"), {}) == pytest.approx(math.e)


class TestStructuralEqual:
    def test_reflexive(self):
        e = mul(add(X, 1), sin(X))
        assert structural_equal(e, e)

    def test_rearranged_constant_trees_differ(self):
        left = add(7, mul(3, add(5, 2)))
        right = add(mul(3, add(5, 2)), 7)
        assert not structural_equal(left, right)

    def test_distinct_shapes_differ(self):
        assert not structural_equal(add(X, 0), X)


class TestMetrics:
    def test_single_leaf(self):
        assert metrics(X) == (0, 0, 1)

    def test_one_unary_node(self):
        assert metrics(sin(X)) == (1, 1, 1)

    def test_small_tree(self):
        assert metrics(add(X, mul(X, X))) == (2, 2, 3)


class TestSimplifyRules:
    def test_x_minus_x(self):
        assert simplify(sub(X, X)) == Int(0)

    def test_constant_folding(self):
        assert simplify(add(7, mul(3, add(5, 2)))) == Int(28)

    def test_additive_identity(self):
        assert simplify(add(X, 0)) == X

    def test_multiplicative_identity(self):
        assert simplify(mul(X, 1)) == X

    def test_multiplication_by_zero(self):
        assert simplify(mul(X, 0)) == Int(0)

    def test_self_division(self):
        assert simplify(div(X, X)) == Int(1)

    def test_power_one(self):
        assert simplify(pow_(X, 1)) == X

    def test_power_zero(self):
        assert simplify(pow_(X, 0)) == Int(1)

    def test_double_negation(self):
        assert simplify(neg(neg(X))) == X

    def test_ln_exp(self):
        assert simplify(ln(exp(X))) == X

    def test_commutative_ordering(self):
        assert simplify(add(X, 1)) == simplify(add(1, X))
        assert simplify(mul(X, Int(3))) == simplify(mul(Int(3), X))

    def test_chain_flattening(self):
        nested = add(add(X, 1), add(2, sin(X)))
        flat = simplify(nested)
        assert flat == simplify(add(Int(3), add(X, sin(X))))

    def test_power_merge(self):
        merged = simplify(mul(pow_(X, 2), pow_(X, 3)))
        assert merged == pow_(X, 5)
        # cross-check numerically against the unsimplified form
        r = random.Random(42)
        original = mul(pow_(X, 2), pow_(X, 3))
        for _ in range(5):
            x0 = r.uniform(0.5, 3.0)
            assert evaluate(merged, {"x": x0}) == pytest.approx(
                evaluate(original, {"x": x0}), rel=1e-12
            )

    def test_like_term_collection(self):
        assert simplify(add(X, X)) == simplify(mul(2, X))
        assert simplify(add(X, neg(X))) == Int(0)

    def test_truncation_flag(self):
        deep = X
        for _ in range(200):
            deep = add(mul(deep, X), sin(deep))
        result = simplify_ex(deep, max_visits=50)
        assert result.truncated
        # a full budget does not truncate
        assert not simplify_ex(add(X, 1)).truncated


class TestSimplifyProperties:
    def test_value_preservation(self):
        r = random.Random(7)
        checked = 0
        for e in random_expressions(1000, seed=77):
            s = simplify(e)
            for p in valid_points(e, r, count=5):
                try:
                    expected = evaluate(e, p)
                    got = evaluate(s, p)
                except EvalDomainError:
                    continue
                assert abs(got - expected) <= 1e-9 * (1 + abs(expected)), (e, s, p)
                checked += 1
        assert checked > 1000  # the corpus was not all domain-empty

    def test_idempotence(self):
        for e in random_expressions(500, seed=99):
            once = simplify(e)
            assert simplify(once) == once, e

    def test_totality_of_metrics_and_equality(self):
        for e in random_expressions(200, seed=3):
            internal, depth, leaves = metrics(e)
            assert internal >= 0 and depth >= 0 and leaves >= 1
            assert structural_equal(e, e)
