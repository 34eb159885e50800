import random

import pytest

from symforge.calculus import differentiate
from symforge.evalkit import (
    EvalReport,
    Outcome,
    check_equiv,
    check_equiv_exprs,
    check_ode_solution,
    score_lines,
    score_pair,
)
from symforge.expr import (
    C,
    C1,
    C2,
    Int,
    Sym,
    X,
    Y,
    add,
    cos,
    div,
    exp,
    ln,
    mul,
    neg,
    pow_,
    simplify,
    sin,
    sub,
)
from symforge.prefix import encode

from conftest import random_expressions


class TestCheckEquiv:
    def test_reflexivity_is_symbolic(self):
        for e in random_expressions(50, seed=61):
            verdict = check_equiv_exprs(e, e)
            assert verdict.outcome is Outcome.EQUIVALENT_SYMBOLIC

    def test_pythagorean_identity_numeric_tier(self):
        lhs = add(pow_(sin(X), 2), pow_(cos(X), 2))
        verdict = check_equiv_exprs(lhs, Int(1))
        assert verdict.is_equivalent()
        assert verdict.outcome in (Outcome.EQUIVALENT_SYMBOLIC, Outcome.EQUIVALENT_NUMERIC)

    def test_constant_offset(self):
        strict = check_equiv_exprs(add(X, 1), add(X, 2), mod_constant=False)
        assert strict.outcome is Outcome.NOT_EQUIVALENT
        loose = check_equiv_exprs(add(X, 1), add(X, 2), mod_constant=True)
        assert loose.outcome is Outcome.EQUIVALENT_MOD_CONSTANT
        assert loose.is_equivalent(mod_constant=True)
        assert not loose.is_equivalent(mod_constant=False)

    def test_mod_constant_only_when_flagged(self):
        verdict = check_equiv_exprs(add(X, 1), add(X, 2), mod_constant=False)
        assert verdict.outcome is not Outcome.EQUIVALENT_MOD_CONSTANT

    def test_undecodable_prediction(self):
        verdict = check_equiv(("add", "x"), encode(X))
        assert verdict.outcome is Outcome.NOT_EQUIVALENT
        assert "decode" in verdict.detail

    def test_undecodable_reference_is_an_error(self):
        with pytest.raises(ValueError):
            check_equiv(encode(X), ("add", "x"))

    def test_token_level_equivalence(self):
        verdict = check_equiv(encode(add(X, 1)), encode(add(1, X)))
        assert verdict.outcome is Outcome.EQUIVALENT_SYMBOLIC

    def test_undecided_on_empty_domain(self):
        # ln(-5 - x^2) evaluates nowhere on the sampling box
        nowhere = ln(sub(Int(-5), pow_(X, 2)))
        verdict = check_equiv_exprs(nowhere, X)
        assert verdict.outcome is Outcome.UNDECIDED

    def test_symmetry_of_outcome_class(self):
        cases = [
            (add(X, 1), add(1, X)),
            (add(pow_(sin(X), 2), pow_(cos(X), 2)), Int(1)),
            (mul(X, 2), mul(X, 3)),
            (exp(ln(X)), X),
        ]
        for a, b in cases:
            forward = check_equiv_exprs(a, b).is_equivalent()
            backward = check_equiv_exprs(b, a).is_equivalent()
            assert forward == backward, (a, b)

    def test_soundness_on_mangled_pairs(self):
        # a simplify-mangled expression is always recognized symbolically
        for e in random_expressions(1000, seed=62):
            assert check_equiv_exprs(simplify(e), e).outcome is Outcome.EQUIVALENT_SYMBOLIC

    def test_soundness_on_perturbed_pairs(self):
        for e in random_expressions(1000, seed=63):
            verdict = check_equiv_exprs(add(e, Int(3)), e)
            # a nonzero offset is never judged equivalent without the flag
            assert not verdict.is_equivalent(), (e, verdict)


class TestCheckOdeSolution:
    def test_scaling_solution(self):
        ode = sub(mul(X, Sym("y1")), Y)
        verdict = check_ode_solution(ode, mul(C, X))
        assert verdict.is_equivalent()

    def test_linear_solution_second_order(self):
        ode = Sym("y2")
        verdict = check_ode_solution(ode, add(mul(C1, X), C2))
        assert verdict.is_equivalent()

    def test_non_solution(self):
        ode = sub(Sym("y1"), Y)
        verdict = check_ode_solution(ode, X)
        assert verdict.outcome is Outcome.NOT_EQUIVALENT

    def test_exponential_solution(self):
        ode = sub(Sym("y1"), Y)
        verdict = check_ode_solution(ode, mul(C, exp(X)))
        assert verdict.is_equivalent()

    def test_candidate_with_marker_rejected(self):
        verdict = check_ode_solution(Sym("y1"), Y)
        assert verdict.outcome is Outcome.NOT_EQUIVALENT


class TestScoring:
    def _rows(self, exprs):
        return [(encode(differentiate(e, "x")), encode(e)) for e in exprs]

    def test_three_of_five(self):
        refs = [(encode(X), encode(mul(Int(k), X))) for k in range(1, 6)]
        preds = [encode(mul(Int(k), X)) for k in (1, 2, 3, 9, 9)]
        report = score_lines("bwd", refs, preds)
        assert report.total == 5
        assert report.correct == 3
        assert report.accuracy == pytest.approx(60.0)

    def test_identical_predictions_score_100(self):
        rows = self._rows([e for e in random_expressions(20, seed=64)])
        preds = [solution for _, solution in rows]
        report = score_lines("bwd", rows, preds)
        assert report.accuracy == pytest.approx(100.0)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length mismatch"):
            score_lines("bwd", [(encode(X), encode(X))], [])

    def test_verdict_counts_sum_to_total(self):
        refs = [(encode(X), encode(mul(Int(k), X))) for k in range(1, 6)]
        preds = [encode(mul(Int(k), X)) for k in (1, 2, 7, 9, 9)]
        report = score_lines("bwd", refs, preds)
        assert sum(report.verdict_counts.values()) == report.total

    def test_ode_scoring_accepts_any_valid_solution(self):
        # problem: x*y1 - y = 0; reference solution c*x, prediction 2*x
        problem = encode(sub(mul(X, Sym("y1")), Y))
        reference = encode(mul(C, X))
        prediction = encode(mul(Int(2), X))
        verdict = score_pair("ode1", problem, reference, prediction)
        assert verdict.is_equivalent()

    def test_report_json_fields(self):
        report = EvalReport(task="bwd", total=4, correct=1, verdict_counts={"not_equivalent": 3, "equivalent_symbolic": 1})
        doc = report.to_dict()
        assert doc["accuracy"] == pytest.approx(25.0)
        assert set(doc) == {"task", "total", "correct", "accuracy", "verdict_counts"}


class TestShiftMatrix:
    def test_matrix_shape(self, tmp_path):
        from symforge.datafiles import write_dataset
        from symforge.evalkit import shift_matrix
        from symforge.taskgen import SamplePair

        tags = ("fwd", "bwd", "ibp")
        rows = self._dataset_rows()
        for tag in tags:
            write_dataset(tmp_path / f"ref_{tag}.tsv", rows)
            (tmp_path / f"pred_{tag}.txt").write_text(
                "\n".join(" ".join(sol) for _, sol in [(p.problem, p.solution) for p in rows]) + "\n"
            )
        cells = [
            (train, test, tmp_path / f"pred_{test}.txt", tmp_path / f"ref_{test}.tsv", "bwd")
            for train in tags
            for test in tags
        ]
        matrix = shift_matrix(cells)
        assert matrix["rows"] == list(tags)
        assert matrix["cols"] == list(tags)
        for train in tags:
            for test in tags:
                assert matrix["cells"][train][test]["accuracy"] == pytest.approx(100.0)

    def _dataset_rows(self):
        from symforge.taskgen import SamplePair

        exprs = random_expressions(5, seed=65)
        return [
            SamplePair("bwd", encode(differentiate(e, "x")), encode(simplify(e)))
            for e in exprs
        ]
