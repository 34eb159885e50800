"""The five dataset generators: FWD, BWD, IBP integration and ODE1/ODE2.

Every generator is rejection sampling around the same loop: draw random
expressions, build a (problem, solution) pair, verify it independently, and
skip anything oversized, constant, duplicated, or unverifiable. Emitted
pairs are always in simplified normal form, which doubles as the dedup key.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Iterator

from .calculus import differentiate, integrate_rule_based, isolate_leaf
from .evalkit import check_equiv_exprs, check_ode_solution
from .expr import (
    App,
    Expr,
    Int,
    Sym,
    ZERO,
    contains_symbol,
    count_symbol,
    mul,
    simplify,
    sub,
    subtrees,
)
from .prefix import TokenSequence, encode
from .sampling import GenProfile, sample_expression

TASKS = ("fwd", "bwd", "ibp", "ode1", "ode2")

TOKEN_CAP = 256

# a generation run is declared pathological when a full window of attempts
# yields under 1% acceptances
EXHAUSTION_WINDOW = 10_000
EXHAUSTION_MIN_RATE = 0.01


@dataclass(frozen=True)
class SamplePair:
    task: str
    problem: TokenSequence
    solution: TokenSequence


@dataclass
class GenStats:
    attempts: int = 0
    accepted: int = 0
    rejections: dict[str, int] = field(default_factory=dict)

    def reject(self, reason: str):
        self.rejections[reason] = self.rejections.get(reason, 0) + 1

    @property
    def coverage(self) -> float:
        return self.accepted / self.attempts if self.attempts else 0.0

    def to_dict(self) -> dict:
        return {
            "attempts": self.attempts,
            "accepted": self.accepted,
            "coverage": round(self.coverage, 6),
            "rejections": dict(sorted(self.rejections.items())),
        }


class GenerationExhausted(RuntimeError):
    """Acceptance rate fell below the exhaustion threshold; the profile (or
    table seeding, for IBP) is pathological for this task."""

    def __init__(self, task: str, stats: GenStats):
        super().__init__(
            f"{task}: acceptance rate {stats.coverage:.4%} below "
            f"{EXHAUSTION_MIN_RATE:.0%} over a {EXHAUSTION_WINDOW}-attempt window"
        )
        self.task = task
        self.stats = stats


def _run(
    task: str,
    count: int,
    stats: GenStats,
    attempt: Callable[[], list[SamplePair]],
) -> Iterator[SamplePair]:
    emitted = 0
    window_attempts = 0
    window_accepted = 0
    while emitted < count:
        stats.attempts += 1
        window_attempts += 1
        produced = attempt()
        if produced:
            window_accepted += 1
        for pair in produced:
            stats.accepted += 1
            emitted += 1
            yield pair
            if emitted >= count:
                return
        if window_attempts >= EXHAUSTION_WINDOW:
            if window_accepted < EXHAUSTION_MIN_RATE * window_attempts:
                raise GenerationExhausted(task, stats)
            window_attempts = 0
            window_accepted = 0


def _fits(e: Expr) -> TokenSequence | None:
    tokens = encode(e)
    return tokens if len(tokens) <= TOKEN_CAP else None


def gen_bwd(
    profile: GenProfile, count: int, rng: random.Random, stats: GenStats | None = None
) -> Iterator[SamplePair]:
    """Differentiate random functions: problem = F', solution = F."""
    stats = stats if stats is not None else GenStats()
    seen: set[TokenSequence] = set()

    def attempt() -> list[SamplePair]:
        solution = simplify(sample_expression(profile, rng))
        if not contains_symbol(solution, "x"):
            stats.reject("no-variable")
            return []
        problem = differentiate(solution, "x")
        if not contains_symbol(problem, "x"):
            stats.reject("constant-derivative")
            return []
        ptoks, stoks = _fits(problem), _fits(solution)
        if ptoks is None or stoks is None:
            stats.reject("token-cap")
            return []
        if ptoks in seen:
            stats.reject("duplicate")
            return []
        seen.add(ptoks)
        return [SamplePair("bwd", ptoks, stoks)]

    return _run("bwd", count, stats, attempt)


def gen_fwd(
    profile: GenProfile, count: int, rng: random.Random, stats: GenStats | None = None
) -> Iterator[SamplePair]:
    """Integrate random functions with the rule engine; unintegrable
    candidates are skipped, and stats.coverage reports the hit rate."""
    stats = stats if stats is not None else GenStats()
    seen: set[TokenSequence] = set()

    def attempt() -> list[SamplePair]:
        problem = simplify(sample_expression(profile, rng))
        if not contains_symbol(problem, "x"):
            stats.reject("no-variable")
            return []
        prim = integrate_rule_based(problem, "x")
        if prim is None:
            stats.reject("no-rule")
            return []
        solution = prim.antiderivative
        verdict = check_equiv_exprs(differentiate(solution, "x"), prim.integrand)
        if not verdict.is_equivalent():
            stats.reject("unverified")
            return []
        ptoks, stoks = _fits(prim.integrand), _fits(solution)
        if ptoks is None or stoks is None:
            stats.reject("token-cap")
            return []
        if ptoks in seen:
            stats.reject("duplicate")
            return []
        seen.add(ptoks)
        return [SamplePair("fwd", ptoks, stoks)]

    return _run("fwd", count, stats, attempt)


class PrimitiveTable:
    """Known integrals keyed by normal-form integrand. Seeded from a BWD
    run and grown by IBP emissions; every insertion is verified."""

    def __init__(self):
        self._entries: dict[Expr, Expr] = {}

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, integrand: Expr) -> bool:
        return integrand in self._entries

    def get(self, integrand: Expr) -> Expr | None:
        return self._entries.get(integrand)

    def insert(self, integrand: Expr, antiderivative: Expr, verify: bool = True) -> bool:
        key = simplify(integrand)
        if key in self._entries:
            return False
        if verify:
            verdict = check_equiv_exprs(differentiate(antiderivative, "x"), key)
            if not verdict.is_equivalent():
                return False
        self._entries[key] = antiderivative
        return True


def seed_table_from_bwd(
    profile: GenProfile, size: int, rng: random.Random
) -> PrimitiveTable:
    """Build a PrimitiveTable from a fresh BWD run (the default seeding)."""
    from .prefix import decode

    table = PrimitiveTable()
    for pair in gen_bwd(profile, size, rng):
        # BWD pairs are primitives by construction; skip re-verification
        table.insert(decode(pair.problem), decode(pair.solution), verify=False)
    return table


def gen_ibp(
    profile: GenProfile,
    count: int,
    rng: random.Random,
    table: PrimitiveTable,
    stats: GenStats | None = None,
) -> Iterator[SamplePair]:
    """Integration by parts: from functions F, G with derivatives f, g,
    whenever the integral of fG is known, the integral of Fg is FG minus it
    (and symmetrically). New pairs feed back into the table."""
    stats = stats if stats is not None else GenStats()
    seen: set[TokenSequence] = set()

    def emit_if_known(
        product: Expr, known_product: Expr, combined: Expr
    ) -> SamplePair | None:
        known = table.get(known_product)
        if known is None:
            return None
        solution = simplify(sub(combined, known))
        verdict = check_equiv_exprs(differentiate(solution, "x"), product)
        if not verdict.is_equivalent():
            stats.reject("unverified")
            return None
        ptoks, stoks = _fits(product), _fits(solution)
        if ptoks is None or stoks is None:
            stats.reject("token-cap")
            return None
        if ptoks in seen:
            stats.reject("duplicate")
            return None
        seen.add(ptoks)
        table.insert(product, solution, verify=False)
        return SamplePair("ibp", ptoks, stoks)

    def attempt() -> list[SamplePair]:
        f_cap = simplify(sample_expression(profile, rng))
        g_cap = simplify(sample_expression(profile, rng))
        if not contains_symbol(f_cap, "x") or not contains_symbol(g_cap, "x"):
            stats.reject("no-variable")
            return []
        f_low = differentiate(f_cap, "x")
        g_low = differentiate(g_cap, "x")
        fg = simplify(mul(f_low, g_cap))  # f G
        gf = simplify(mul(f_cap, g_low))  # F g
        combined = simplify(mul(f_cap, g_cap))  # F G
        out = []
        pair = emit_if_known(gf, fg, combined)
        if pair is not None:
            out.append(pair)
        pair = emit_if_known(fg, gf, combined)
        if pair is not None:
            out.append(pair)
        if not out:
            stats.reject("table-miss")
        return out

    return _run("ibp", count, stats, attempt)


def _leaf_count(e: Expr) -> int:
    return sum(1 for n in subtrees(e) if not isinstance(n, App))


def _replace_leaves(e: Expr, replacements: dict[int, Expr], counter: list[int]) -> Expr:
    if not isinstance(e, App):
        idx = counter[0]
        counter[0] += 1
        return replacements.get(idx, e)
    return App(e.op, tuple(_replace_leaves(a, replacements, counter) for a in e.args))


def _plant_constants(base: Expr, names: list[str], rng: random.Random) -> Expr | None:
    """Replace distinct random leaves by the given constant symbols; None
    when the base has too few leaves or loses its x dependence."""
    n_leaves = _leaf_count(base)
    if n_leaves < len(names):
        return None
    positions = rng.sample(range(n_leaves), len(names))
    replacements = {pos: Sym(name) for pos, name in zip(positions, names)}
    planted = _replace_leaves(base, replacements, [0])
    if not contains_symbol(planted, "x"):
        return None
    for name in names:
        if count_symbol(planted, name) != 1:
            return None
    return planted


def _ode_numerator(e: Expr) -> Expr:
    from .calculus import as_fraction

    num, _den = as_fraction(e)
    return simplify(num)


def gen_ode1(
    profile: GenProfile, count: int, rng: random.Random, stats: GenStats | None = None
) -> Iterator[SamplePair]:
    """First-order equations: plant a constant c into F(x), solve for it as
    c = G(x, y), and differentiate the relation to eliminate it."""
    stats = stats if stats is not None else GenStats()
    seen: set[TokenSequence] = set()

    def attempt() -> list[SamplePair]:
        base = simplify(sample_expression(profile, rng))
        solution = _plant_constants(base, ["c"], rng)
        if solution is None:
            stats.reject("bad-plant")
            return []
        solution = simplify(solution)
        if count_symbol(solution, "c") != 1 or not contains_symbol(solution, "x"):
            stats.reject("bad-plant")
            return []
        iso = isolate_leaf(Sym("y"), solution, "c")
        if iso is None:
            stats.reject("not-invertible")
            return []
        ode = _ode_numerator(differentiate(iso.isolated, "x"))
        if not contains_symbol(ode, "y1") or contains_symbol(ode, "c"):
            stats.reject("degenerate-ode")
            return []
        verdict = check_ode_solution(ode, solution)
        if not verdict.is_equivalent():
            stats.reject("unverified")
            return []
        ptoks, stoks = _fits(ode), _fits(solution)
        if ptoks is None or stoks is None:
            stats.reject("token-cap")
            return []
        if ptoks in seen:
            stats.reject("duplicate")
            return []
        seen.add(ptoks)
        return [SamplePair("ode1", ptoks, stoks)]

    return _run("ode1", count, stats, attempt)


def gen_ode2(
    profile: GenProfile, count: int, rng: random.Random, stats: GenStats | None = None
) -> Iterator[SamplePair]:
    """Second-order equations: plant c1 and c2, eliminate c2 by one
    solve-and-differentiate round, then c1 by another."""
    stats = stats if stats is not None else GenStats()
    seen: set[TokenSequence] = set()

    def attempt() -> list[SamplePair]:
        base = simplify(sample_expression(profile, rng))
        solution = _plant_constants(base, ["c1", "c2"], rng)
        if solution is None:
            stats.reject("bad-plant")
            return []
        solution = simplify(solution)
        if (
            count_symbol(solution, "c1") != 1
            or count_symbol(solution, "c2") != 1
            or not contains_symbol(solution, "x")
        ):
            stats.reject("bad-plant")
            return []
        iso2 = isolate_leaf(Sym("y"), solution, "c2")
        if iso2 is None:
            stats.reject("not-invertible")
            return []
        relation = differentiate(iso2.isolated, "x")
        if count_symbol(relation, "c1") != 1:
            stats.reject("constant-lost")
            return []
        iso1 = isolate_leaf(ZERO, relation, "c1")
        if iso1 is None:
            stats.reject("not-invertible")
            return []
        ode = _ode_numerator(differentiate(iso1.isolated, "x"))
        if not contains_symbol(ode, "y2") or contains_symbol(ode, "c1") or (
            contains_symbol(ode, "c2")
        ):
            stats.reject("degenerate-ode")
            return []
        verdict = check_ode_solution(ode, solution)
        if not verdict.is_equivalent():
            stats.reject("unverified")
            return []
        ptoks, stoks = _fits(ode), _fits(solution)
        if ptoks is None or stoks is None:
            stats.reject("token-cap")
            return []
        if ptoks in seen:
            stats.reject("duplicate")
            return []
        seen.add(ptoks)
        return [SamplePair("ode2", ptoks, stoks)]

    return _run("ode2", count, stats, attempt)


def generate_samples(
    task: str,
    profile: GenProfile,
    count: int,
    seed: int,
    table: PrimitiveTable | None = None,
    stats: GenStats | None = None,
) -> list[SamplePair]:
    """Run one generator to completion with a dedicated RNG."""
    rng = random.Random(seed)
    if task == "bwd":
        return list(gen_bwd(profile, count, rng, stats))
    if task == "fwd":
        return list(gen_fwd(profile, count, rng, stats))
    if task == "ibp":
        if table is None:
            table = PrimitiveTable()
        return list(gen_ibp(profile, count, rng, table, stats))
    if task == "ode1":
        return list(gen_ode1(profile, count, rng, stats))
    if task == "ode2":
        return list(gen_ode2(profile, count, rng, stats))
    raise ValueError(f"unknown task {task!r}")
