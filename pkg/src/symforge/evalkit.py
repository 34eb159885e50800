"""Equivalence checking of predicted vs. reference expressions.

The unit check simplifies the difference of the two expressions and tests it
against zero, then falls back to numeric agreement at random points, because
a rule-based simplifier cannot decide every zero-equivalence. ODE candidates
are checked by substituting them (and their derivatives) into the equation
and testing the residual against zero the same way.
"""

from __future__ import annotations

import json
import zlib
import random
from dataclasses import dataclass, field
from enum import Enum

from .calculus import differentiate
from .expr import (
    EvalDomainError,
    Expr,
    Int,
    UnboundSymbolError,
    ZERO,
    contains_symbol,
    evaluate,
    free_symbols,
    simplify,
    sub,
    substitute,
)
from .prefix import MalformedSequenceError, TokenSequence, decode, tokens_to_text

REL_TOL = 1e-6
MIN_VALID_POINTS = 5
MAX_POINT_ATTEMPTS = 100
CONSTANT_VARIANCE_TOL = 1e-9
POINT_RANGE = (-10.0, 10.0)
# beyond this magnitude a relative comparison can no longer see O(1)
# offsets, so such points count as invalid (like domain errors)
MAGNITUDE_CEILING = 1e9


class Outcome(Enum):
    EQUIVALENT_SYMBOLIC = "equivalent_symbolic"
    EQUIVALENT_NUMERIC = "equivalent_numeric"
    EQUIVALENT_MOD_CONSTANT = "equivalent_mod_constant"
    NOT_EQUIVALENT = "not_equivalent"
    UNDECIDED = "undecided"


EQUIVALENT_OUTCOMES = (Outcome.EQUIVALENT_SYMBOLIC, Outcome.EQUIVALENT_NUMERIC)


@dataclass(frozen=True)
class EquivVerdict:
    outcome: Outcome
    detail: str = ""

    def is_equivalent(self, mod_constant: bool = False) -> bool:
        if self.outcome in EQUIVALENT_OUTCOMES:
            return True
        return mod_constant and self.outcome is Outcome.EQUIVALENT_MOD_CONSTANT


def _point_rng(*exprs: Expr) -> random.Random:
    # deterministic and symmetric in the argument pair
    texts = sorted(repr(e) for e in exprs)
    return random.Random(zlib.crc32("|".join(texts).encode()))


def check_equiv(
    pred: TokenSequence, ref: TokenSequence, mod_constant: bool = False
) -> EquivVerdict:
    """Verdict for a predicted token sequence against a reference one.

    The reference must decode (dataset guarantee). The prediction may be
    arbitrary model output; undecodable predictions score not_equivalent.
    """
    try:
        ref_expr = decode(tuple(ref))
    except MalformedSequenceError as exc:
        raise ValueError(f"reference does not decode: {exc}") from exc
    try:
        pred_expr = decode(tuple(pred))
    except MalformedSequenceError as exc:
        return EquivVerdict(Outcome.NOT_EQUIVALENT, f"prediction does not decode: {exc}")
    return check_equiv_exprs(pred_expr, ref_expr, mod_constant)


def check_equiv_exprs(pred: Expr, ref: Expr, mod_constant: bool = False) -> EquivVerdict:
    diff = simplify(sub(pred, ref))
    if diff == ZERO:
        return EquivVerdict(Outcome.EQUIVALENT_SYMBOLIC, "difference simplifies to 0")
    if not free_symbols(diff):
        # symbolic disequality: the difference is a nonzero constant
        try:
            offset = evaluate(diff, {})
        except EvalDomainError:
            offset = None
        if offset is not None and abs(offset) > REL_TOL:
            if mod_constant:
                return EquivVerdict(
                    Outcome.EQUIVALENT_MOD_CONSTANT, f"constant offset {offset:.6g}"
                )
            return EquivVerdict(
                Outcome.NOT_EQUIVALENT, f"difference is the constant {offset:.6g}"
            )

    names = sorted(free_symbols(pred) | free_symbols(ref))
    rng = _point_rng(pred, ref)
    lo, hi = POINT_RANGE
    pairs: list[tuple[float, float]] = []
    for _ in range(MAX_POINT_ATTEMPTS):
        point = {n: rng.uniform(lo, hi) for n in names}
        try:
            vp = evaluate(pred, point)
            vr = evaluate(ref, point)
        except (EvalDomainError, UnboundSymbolError):
            continue
        if max(abs(vp), abs(vr)) > MAGNITUDE_CEILING:
            continue
        pairs.append((vp, vr))
        if len(pairs) >= MIN_VALID_POINTS:
            break
    if len(pairs) < MIN_VALID_POINTS:
        return EquivVerdict(Outcome.UNDECIDED, f"only {len(pairs)} valid points")

    if all(abs(vp - vr) <= REL_TOL * (1.0 + max(abs(vp), abs(vr))) for vp, vr in pairs):
        return EquivVerdict(Outcome.EQUIVALENT_NUMERIC, f"agreement at {len(pairs)} points")
    if mod_constant:
        deltas = [vp - vr for vp, vr in pairs]
        mean = sum(deltas) / len(deltas)
        variance = sum((d - mean) ** 2 for d in deltas) / len(deltas)
        if variance <= CONSTANT_VARIANCE_TOL:
            return EquivVerdict(Outcome.EQUIVALENT_MOD_CONSTANT, f"constant offset {mean:.6g}")
    return EquivVerdict(Outcome.NOT_EQUIVALENT, "numeric disagreement")


def check_ode_solution(ode: Expr, candidate: Expr) -> EquivVerdict:
    """Does the candidate (over x and free constants) solve ode = 0?

    The candidate's first and second derivatives stand in for the y1/y2
    markers; the substituted residual is then checked against zero.
    """
    for marker in ("y", "y1", "y2"):
        if contains_symbol(candidate, marker):
            return EquivVerdict(
                Outcome.NOT_EQUIVALENT, f"candidate is not closed-form: contains {marker}"
            )
    d1 = differentiate(candidate, "x")
    d2 = differentiate(d1, "x") if contains_symbol(ode, "y2") else ZERO
    residual = substitute(ode, {"y": candidate, "y1": d1, "y2": d2})
    simplified = simplify(residual)
    if simplified == ZERO:
        return EquivVerdict(Outcome.EQUIVALENT_SYMBOLIC, "residual simplifies to 0")

    names = sorted(free_symbols(residual))
    rng = _point_rng(ode, candidate)
    lo, hi = POINT_RANGE
    valid = 0
    for _ in range(MAX_POINT_ATTEMPTS):
        point = {n: rng.uniform(lo, hi) for n in names}
        try:
            r = evaluate(residual, point)
            # scale the zero-tolerance by the size of what was substituted,
            # since the residual is a difference of those quantities
            scale = 1.0 + abs(evaluate(candidate, point)) + abs(evaluate(d1, point)) + (
                abs(evaluate(d2, point))
            )
        except (EvalDomainError, UnboundSymbolError):
            continue
        if scale > MAGNITUDE_CEILING:
            continue
        if abs(r) > REL_TOL * scale:
            return EquivVerdict(Outcome.NOT_EQUIVALENT, f"residual {r:.3g} at a point")
        valid += 1
        if valid >= MIN_VALID_POINTS:
            return EquivVerdict(Outcome.EQUIVALENT_NUMERIC, f"residual ~0 at {valid} points")
    return EquivVerdict(Outcome.UNDECIDED, f"only {valid} valid points")


# --------------------------------------------------------------------------
# File-level scoring
# --------------------------------------------------------------------------

INTEGRATION_TASKS = ("fwd", "bwd", "ibp")
ODE_TASKS = ("ode1", "ode2")
ALL_TASKS = INTEGRATION_TASKS + ODE_TASKS


@dataclass
class EvalReport:
    task: str
    total: int
    correct: int
    verdict_counts: dict[str, int] = field(default_factory=dict)

    @property
    def accuracy(self) -> float:
        return 100.0 * self.correct / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "total": self.total,
            "correct": self.correct,
            "accuracy": round(self.accuracy, 4),
            "verdict_counts": dict(sorted(self.verdict_counts.items())),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def score_pair(
    task: str, problem: TokenSequence, reference: TokenSequence, prediction: TokenSequence,
    mod_constant: bool = False,
) -> EquivVerdict:
    """One line of scoring. Integration predictions are compared against the
    reference antiderivative; ODE predictions are accepted whenever they
    solve the problem equation, reference aside."""
    if task in INTEGRATION_TASKS:
        return check_equiv(prediction, reference, mod_constant)
    if task in ODE_TASKS:
        ode = decode(tuple(problem))
        try:
            cand = decode(tuple(prediction))
        except MalformedSequenceError as exc:
            return EquivVerdict(Outcome.NOT_EQUIVALENT, f"prediction does not decode: {exc}")
        return check_ode_solution(ode, cand)
    raise ValueError(f"unknown task {task!r}")


def _score_one(job) -> EquivVerdict:
    task, problem, solution, pred, mod_constant = job
    return score_pair(task, problem, solution, pred, mod_constant)


def score_lines(
    task: str,
    refs: list[tuple[TokenSequence, TokenSequence]],
    preds: list[TokenSequence],
    mod_constant: bool = False,
    workers: int = 1,
) -> EvalReport:
    """Per-pair checks are independent, so scoring parallelizes by line;
    aggregation preserves line order and is deterministic either way."""
    if len(refs) != len(preds):
        raise ValueError(f"length mismatch: {len(refs)} references vs {len(preds)} predictions")
    jobs = [
        (task, problem, solution, pred, mod_constant)
        for (problem, solution), pred in zip(refs, preds)
    ]
    if workers > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            verdicts = list(pool.map(_score_one, jobs, chunksize=16))
    else:
        verdicts = [_score_one(job) for job in jobs]
    report = EvalReport(task=task, total=len(refs), correct=0)
    for verdict in verdicts:
        key = verdict.outcome.value
        report.verdict_counts[key] = report.verdict_counts.get(key, 0) + 1
        if verdict.is_equivalent(mod_constant):
            report.correct += 1
    return report


def score_files(
    pred_path, ref_path, task: str, mod_constant: bool = False, workers: int = 1
) -> EvalReport:
    """Score a predictions file (one token sequence per line) against a
    reference dataset file (problem TAB solution per line)."""
    from .datafiles import read_dataset, read_predictions

    refs = read_dataset(ref_path)
    preds = read_predictions(pred_path)
    return score_lines(task, refs, preds, mod_constant, workers=workers)


def shift_matrix(cells) -> dict:
    """Accuracy matrix across (training distribution, test distribution).

    cells: iterable of (train_tag, test_tag, pred_path, ref_path, task).
    Rows are training tags, columns test tags, mirroring the usual
    robustness-table layout.
    """
    rows: list[str] = []
    cols: list[str] = []
    out: dict[str, dict[str, dict]] = {}
    for train_tag, test_tag, pred_path, ref_path, task in cells:
        report = score_files(pred_path, ref_path, task)
        if train_tag not in rows:
            rows.append(train_tag)
        if test_tag not in cols:
            cols.append(test_tag)
        out.setdefault(train_tag, {})[test_tag] = report.to_dict()
    return {"rows": rows, "cols": cols, "cells": out}
