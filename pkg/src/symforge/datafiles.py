"""Dataset files, leakage-free splitting, and corpus statistics.

A dataset file is UTF-8 text, one sample per line: problem tokens joined by
single spaces, a TAB, then solution tokens. A JSON sidecar (<file>.meta.json)
records how the file was generated. Splitting assigns each sample by a
stable hash of its problem's normal form, so the same problem can never land
in two splits, even across regenerated supersets.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .expr import simplify
from .prefix import TokenSequence, decode, encode, text_to_tokens, tokens_to_text
from .taskgen import SamplePair

GENERATOR_VERSION = "symforge-0.1.0"

SPLIT_BUCKETS = 10_000


class DatasetFormatError(ValueError):
    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = path
        self.line_no = line_no
        self.reason = reason


def write_dataset(path, pairs: list[SamplePair], meta: dict | None = None):
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pair in pairs:
            fh.write(tokens_to_text(pair.problem))
            fh.write("\t")
            fh.write(tokens_to_text(pair.solution))
            fh.write("\n")
    if meta is not None:
        meta = dict(meta, generator_version=GENERATOR_VERSION)
        with open(meta_path(path), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json.dumps(meta, sort_keys=True, indent=2) + "\n")


def meta_path(path) -> Path:
    return Path(str(path) + ".meta.json")


def read_dataset(path) -> list[tuple[TokenSequence, TokenSequence]]:
    """Lines as (problem tokens, solution tokens); malformed lines raise
    DatasetFormatError with their line number."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 2:
                raise DatasetFormatError(path, line_no, f"expected 2 fields, got {len(fields)}")
            out.append((text_to_tokens(fields[0]), text_to_tokens(fields[1])))
    return out


def read_predictions(path) -> list[TokenSequence]:
    """One token sequence per line; lines may be arbitrary model output."""
    with open(path, encoding="utf-8") as fh:
        return [text_to_tokens(line.rstrip("\n")) for line in fh]


def normal_form_key(problem: TokenSequence) -> str:
    """Stable dedup/split key: the token text of the problem's normal form."""
    try:
        return tokens_to_text(encode(simplify(decode(tuple(problem)))))
    except ValueError:
        return tokens_to_text(tuple(problem))


def split_bucket(problem: TokenSequence) -> int:
    digest = hashlib.sha256(normal_form_key(problem).encode()).digest()
    return int.from_bytes(digest[:8], "big") % SPLIT_BUCKETS


@dataclass(frozen=True)
class SplitSpec:
    """Train/valid/test fractions; must sum to 1."""

    train: float = 0.8
    valid: float = 0.1
    test: float = 0.1

    def __post_init__(self):
        if min(self.train, self.valid, self.test) < 0:
            raise ValueError("split fractions must be nonnegative")
        if abs(self.train + self.valid + self.test - 1.0) > 1e-9:
            raise ValueError("split fractions must sum to 1")

    def assign(self, problem: TokenSequence) -> str:
        bucket = split_bucket(problem)
        if bucket < self.train * SPLIT_BUCKETS:
            return "train"
        if bucket < (self.train + self.valid) * SPLIT_BUCKETS:
            return "valid"
        return "test"


def split_dataset(
    rows: list[tuple[TokenSequence, TokenSequence]], spec: SplitSpec
) -> dict[str, list[tuple[TokenSequence, TokenSequence]]]:
    out: dict[str, list] = {"train": [], "valid": [], "test": []}
    for problem, solution in rows:
        out[spec.assign(problem)].append((problem, solution))
    return out


def _quantiles(values: list[int]) -> dict[str, float]:
    if not values:
        return {}
    ordered = sorted(values)
    n = len(ordered)

    def q(frac: float) -> float:
        idx = min(n - 1, max(0, round(frac * (n - 1))))
        return float(ordered[idx])

    return {
        "min": float(ordered[0]),
        "p25": q(0.25),
        "median": q(0.5),
        "p75": q(0.75),
        "p90": q(0.9),
        "max": float(ordered[-1]),
        "mean": round(sum(ordered) / n, 3),
    }


def dataset_stats(rows: list[tuple[TokenSequence, TokenSequence]]) -> dict:
    """Count, token-length quantiles for both columns, operator histogram."""
    from .expr import OPERATORS

    op_set = set(OPERATORS)
    histogram: dict[str, int] = {}
    problem_lengths = []
    solution_lengths = []
    for problem, solution in rows:
        problem_lengths.append(len(problem))
        solution_lengths.append(len(solution))
        for tok in problem + solution:
            if tok in op_set:
                histogram[tok] = histogram.get(tok, 0) + 1
    return {
        "count": len(rows),
        "problem_tokens": _quantiles(problem_lengths),
        "solution_tokens": _quantiles(solution_lengths),
        "operator_histogram": dict(sorted(histogram.items())),
    }
