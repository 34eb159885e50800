"""Uniform random generation of unary-binary expression trees.

Shapes with a given number of internal nodes are drawn exactly uniformly by
weighting every placement decision with counts from a precomputed table,
then decorated with operators and leaves according to a weight profile.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field, replace

from .expr import (
    App,
    BINARY_OPS,
    CONSTANT_SYMBOLS,
    Expr,
    Int,
    Sym,
    UNARY_OPS,
)


class ShapeCountTable:
    """counts(e, n): number of ways to place n internal unary/binary nodes
    into a frontier of e empty slots, filling the rest with leaves.

    Recurrence: counts(e, 0) = 1, counts(0, n) = 0 for n > 0, and
    counts(e, n) = counts(e-1, n) + counts(e, n-1) + counts(e+1, n-1),
    the three cases being "leaf the first slot", "unary node there", and
    "binary node there".
    """

    def __init__(self):
        self._table: dict[tuple[int, int], int] = {}

    def counts(self, slots: int, nodes: int) -> int:
        if nodes == 0:
            return 1
        if slots == 0:
            return 0
        key = (slots, nodes)
        cached = self._table.get(key)
        if cached is None:
            cached = (
                self.counts(slots - 1, nodes)
                + self.counts(slots, nodes - 1)
                + self.counts(slots + 1, nodes - 1)
            )
            self._table[key] = cached
        return cached


_SHARED_TABLE = ShapeCountTable()


def count_shapes(n_internal: int) -> int:
    """Number of distinct unary-binary tree shapes with n internal nodes."""
    if n_internal < 0:
        raise ValueError("internal node count must be >= 0")
    return _SHARED_TABLE.counts(1, n_internal)


class SkeletonNode:
    """Mutable tree under construction; children slots hold None until a
    node or leaf is placed. arity 0 marks a leaf."""

    __slots__ = ("arity", "children")

    def __init__(self, arity: int):
        self.arity = arity
        self.children: list["SkeletonNode | None"] = [None] * arity


def sample_shape(n_internal: int, rng: random.Random) -> SkeletonNode:
    """Draw a tree shape uniformly among all shapes with n internal nodes.

    The frontier of empty slots is scanned left to right; the position k of
    the next internal node and its arity a are drawn with probability
    counts(e - k - 1 + a, n - 1) / counts(e, n), which leafs the k slots
    before it.
    """
    root = SkeletonNode(1)
    frontier: list[tuple[SkeletonNode, int]] = [(root, 0)]
    remaining = n_internal
    table = _SHARED_TABLE
    while remaining > 0:
        e = len(frontier)
        total = table.counts(e, remaining)
        draw = rng.randrange(total)
        acc = 0
        placed = None
        for k in range(e):
            for arity in (1, 2):
                weight = table.counts(e - k - 1 + arity, remaining - 1)
                acc += weight
                if draw < acc:
                    placed = (k, arity)
                    break
            if placed:
                break
        assert placed is not None
        k, arity = placed
        for parent, idx in frontier[:k]:
            parent.children[idx] = SkeletonNode(0)
        node = SkeletonNode(arity)
        parent, idx = frontier[k]
        parent.children[idx] = node
        new_slots = [(node, i) for i in range(arity)]
        frontier = new_slots + frontier[k + 1 :]
        remaining -= 1
    for parent, idx in frontier:
        parent.children[idx] = SkeletonNode(0)
    child = root.children[0]
    assert child is not None
    return child


def shape_signature(node: SkeletonNode) -> tuple:
    """Canonical nested-tuple form of a skeleton, for counting and tests."""
    return (node.arity,) + tuple(shape_signature(c) for c in node.children if c is not None)


class ProfileError(ValueError):
    """Raised when a profile cannot decorate a skeleton (e.g. all operator
    weights for a required arity are zero)."""


_EPSILON = 0.05
_TRIG = ("sin", "cos", "tan", "asin", "acos", "atan")
_LOG_EXP = ("exp", "ln")
_NON_POLY_UNARY = ("exp", "ln", "sqrt", "sin", "cos", "tan", "asin", "acos", "atan")


def _uniform_op_weights() -> dict[str, float]:
    return {op: 1.0 for op in BINARY_OPS + UNARY_OPS}


def _dominant_unary_weights(dominant: tuple[str, ...], share: float) -> dict[str, float]:
    others = [op for op in UNARY_OPS if op not in dominant]
    weights = {op: 1.0 for op in BINARY_OPS}
    weights.update({op: share / len(dominant) for op in dominant})
    weights.update({op: (1.0 - share) / len(others) for op in others})
    return weights


@dataclass(frozen=True)
class GenProfile:
    """Controls the sampler: size range, operator and leaf weights, integer
    leaf range, and the RNG seed."""

    name: str = "uniform"
    n_ops_range: tuple[int, int] = (3, 15)
    op_weights: dict[str, float] = field(default_factory=_uniform_op_weights)
    leaf_weights: dict[str, float] = field(default_factory=lambda: {"var": 0.5, "int": 0.4, "const": 0.1})
    int_range: tuple[int, int] = (-5, 5)
    exclude_zero: bool = True
    seed: int = 0

    def with_seed(self, seed: int) -> "GenProfile":
        return replace(self, seed=seed)

    def with_ops_range(self, lo: int, hi: int) -> "GenProfile":
        return replace(self, n_ops_range=(lo, hi))

    def to_json(self) -> str:
        doc = {
            "name": self.name,
            "n_ops_range": list(self.n_ops_range),
            "op_weights": self.op_weights,
            "leaf_weights": self.leaf_weights,
            "int_range": list(self.int_range),
            "exclude_zero": self.exclude_zero,
            "seed": self.seed,
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "GenProfile":
        doc = json.loads(text)
        return cls(
            name=doc["name"],
            n_ops_range=tuple(doc["n_ops_range"]),
            op_weights=doc["op_weights"],
            leaf_weights=doc["leaf_weights"],
            int_range=tuple(doc["int_range"]),
            exclude_zero=doc["exclude_zero"],
            seed=doc["seed"],
        )


def preset_profile(name: str, seed: int = 0) -> GenProfile:
    """Named presets: uniform plus the three type-dominant profiles. The
    dominant presets concentrate >= 0.8 of the unary weight on one function
    family, with a residual share spread over the rest."""
    if name == "uniform":
        return GenProfile(name="uniform", seed=seed)
    if name in ("poly", "poly_dominant"):
        weights = {op: 1.0 for op in BINARY_OPS}
        weights["neg"] = 1.0 - _EPSILON
        weights.update({op: _EPSILON / len(_NON_POLY_UNARY) for op in _NON_POLY_UNARY})
        return GenProfile(name="poly_dominant", op_weights=weights, seed=seed)
    if name in ("trig", "trig_dominant"):
        return GenProfile(
            name="trig_dominant", op_weights=_dominant_unary_weights(_TRIG, 0.9), seed=seed
        )
    if name in ("log", "log_dominant"):
        return GenProfile(
            name="log_dominant", op_weights=_dominant_unary_weights(_LOG_EXP, 0.9), seed=seed
        )
    raise ProfileError(f"unknown profile preset {name!r}")


PRESET_NAMES = ("uniform", "poly", "trig", "log")


def _weighted_pick(rng: random.Random, names: list[str], weights: list[float]) -> str:
    total = sum(weights)
    if total <= 0:
        raise ProfileError("all weights are zero for a required choice")
    r = rng.random() * total
    acc = 0.0
    for name, w in zip(names, weights):
        acc += w
        if r < acc:
            return name
    return names[-1]


def decorate(skeleton: SkeletonNode, profile: GenProfile, rng: random.Random) -> Expr:
    """Assign operators and leaves to a skeleton by the profile's weights."""
    if skeleton.arity == 0:
        return _random_leaf(profile, rng)
    ops = BINARY_OPS if skeleton.arity == 2 else UNARY_OPS
    names = [op for op in ops if profile.op_weights.get(op, 0.0) > 0.0]
    if not names:
        raise ProfileError(f"no positive operator weight for arity {skeleton.arity}")
    op = _weighted_pick(rng, names, [profile.op_weights[n] for n in names])
    args = tuple(decorate(c, profile, rng) for c in skeleton.children if c is not None)
    return App(op, args)


def _random_leaf(profile: GenProfile, rng: random.Random) -> Expr:
    kinds = ["var", "int", "const"]
    kind = _weighted_pick(rng, kinds, [profile.leaf_weights.get(k, 0.0) for k in kinds])
    if kind == "var":
        return Sym("x")
    if kind == "const":
        return Sym(rng.choice(CONSTANT_SYMBOLS))
    lo, hi = profile.int_range
    value = rng.randint(lo, hi)
    while profile.exclude_zero and value == 0:
        value = rng.randint(lo, hi)
    return Int(value)


def sample_expression(profile: GenProfile, rng: random.Random) -> Expr:
    """One decorated random expression with a size drawn from the profile's
    internal-node range."""
    lo, hi = profile.n_ops_range
    n = rng.randint(lo, hi)
    return decorate(sample_shape(n, rng), profile, rng)
