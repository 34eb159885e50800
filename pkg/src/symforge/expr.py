"""Expression trees: the data model, numeric evaluation, and a rule-based simplifier.

An expression is an immutable tree whose internal nodes are unary or binary
operators and whose leaves are integers, variables, or named constants.
Trees compare and hash structurally, so they can be used directly as dict
keys and set members.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Mapping, Union

BINARY_OPS = ("add", "sub", "mul", "div", "pow")
UNARY_OPS = ("neg", "exp", "ln", "sqrt", "sin", "cos", "tan", "asin", "acos", "atan")
OPERATORS = BINARY_OPS + UNARY_OPS

ARITY = {name: 2 for name in BINARY_OPS}
ARITY.update({name: 1 for name in UNARY_OPS})

# Leaf symbols. x is the integration variable, y the dependent variable with
# derivative markers y1/y2, c/c1/c2 are free constants of ODE solutions, and
# pi/ee are the usual numeric constants.
VARIABLE_SYMBOLS = ("x", "y", "y1", "y2", "c", "c1", "c2")
CONSTANT_SYMBOLS = ("pi", "ee")
LEAF_SYMBOLS = ("x", "y", "y1", "y2", "c", "c1", "c2", "pi", "ee")

_CONSTANT_VALUES = {"pi": math.pi, "ee": math.e}

_OP_INDEX = {name: i for i, name in enumerate(OPERATORS)}


@dataclass(frozen=True, slots=True)
class Int:
    """Arbitrary-precision integer leaf."""

    value: int


@dataclass(frozen=True, slots=True)
class Sym:
    """Named leaf: a variable, derivative marker, or constant symbol."""

    name: str

    def __post_init__(self):
        if self.name not in LEAF_SYMBOLS:
            raise ValueError(f"unknown leaf symbol {self.name!r}")


@dataclass(frozen=True, slots=True)
class App:
    """Operator application with exactly arity(op) children."""

    op: str
    args: tuple["Expr", ...]

    def __post_init__(self):
        if self.op not in ARITY:
            raise ValueError(f"unknown operator {self.op!r}")
        if len(self.args) != ARITY[self.op]:
            raise ValueError(f"{self.op} expects {ARITY[self.op]} args, got {len(self.args)}")


Expr = Union[Int, Sym, App]
Point = Mapping[str, float]


class EvalDomainError(ArithmeticError):
    """A sub-evaluation left the reals (ln of a non-positive value, division
    by zero, sqrt of a negative, 0 raised to a negative power, asin/acos
    outside [-1, 1], or float overflow). Carries the offending sub-node."""

    def __init__(self, node: Expr, reason: str):
        super().__init__(reason)
        self.node = node
        self.reason = reason


class UnboundSymbolError(LookupError):
    """A free symbol of the expression has no binding in the Point."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name


def _coerce(v) -> Expr:
    if isinstance(v, (Int, Sym, App)):
        return v
    if isinstance(v, int):
        return Int(v)
    if isinstance(v, str):
        return Sym(v)
    raise TypeError(f"cannot build an expression from {v!r}")


# Constructor helpers. They keep call sites short and coerce raw ints and
# symbol names, e.g. add(x, 1) instead of App("add", (Sym("x"), Int(1))).

def add(a, b) -> App:
    return App("add", (_coerce(a), _coerce(b)))


def sub(a, b) -> App:
    return App("sub", (_coerce(a), _coerce(b)))


def mul(a, b) -> App:
    return App("mul", (_coerce(a), _coerce(b)))


def div(a, b) -> App:
    return App("div", (_coerce(a), _coerce(b)))


def pow_(a, b) -> App:
    return App("pow", (_coerce(a), _coerce(b)))


def neg(a) -> App:
    return App("neg", (_coerce(a),))


def exp(a) -> App:
    return App("exp", (_coerce(a),))


def ln(a) -> App:
    return App("ln", (_coerce(a),))


def sqrt(a) -> App:
    return App("sqrt", (_coerce(a),))


def sin(a) -> App:
    return App("sin", (_coerce(a),))


def cos(a) -> App:
    return App("cos", (_coerce(a),))


def tan(a) -> App:
    return App("tan", (_coerce(a),))


def asin(a) -> App:
    return App("asin", (_coerce(a),))


def acos(a) -> App:
    return App("acos", (_coerce(a),))


def atan(a) -> App:
    return App("atan", (_coerce(a),))


X = Sym("x")
Y = Sym("y")
Y1 = Sym("y1")
Y2 = Sym("y2")
C = Sym("c")
C1 = Sym("c1")
C2 = Sym("c2")
PI = Sym("pi")
EE = Sym("ee")

ZERO = Int(0)
ONE = Int(1)


def subtrees(e: Expr) -> Iterator[Expr]:
    """Yield every node of the tree, root first, children left to right."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, App):
            stack.extend(reversed(node.args))


def free_symbols(e: Expr) -> frozenset[str]:
    """Names of variable leaves (constants pi/ee excluded)."""
    return frozenset(
        n.name for n in subtrees(e) if isinstance(n, Sym) and n.name not in _CONSTANT_VALUES
    )


def contains_symbol(e: Expr, name: str) -> bool:
    return any(isinstance(n, Sym) and n.name == name for n in subtrees(e))


def count_symbol(e: Expr, name: str) -> int:
    return sum(1 for n in subtrees(e) if isinstance(n, Sym) and n.name == name)


def substitute(e: Expr, bindings: Mapping[str, Expr]) -> Expr:
    """Replace variable leaves by expressions (capture is not a concern:
    there are no binders)."""
    if isinstance(e, Sym):
        return bindings.get(e.name, e)
    if isinstance(e, Int):
        return e
    return App(e.op, tuple(substitute(a, bindings) for a in e.args))


def structural_equal(a: Expr, b: Expr) -> bool:
    """Node-for-node tree identity. Distinct renderings of the same value
    (e.g. add(x, 0) vs x) compare unequal."""
    return a == b


def metrics(e: Expr) -> tuple[int, int, int]:
    """(internal_node_count, depth, leaf_count); a lone leaf has depth 0."""
    if not isinstance(e, App):
        return (0, 0, 1)
    internal, leaves, depth = 0, 0, 0
    stack = [(e, 0)]
    while stack:
        node, d = stack.pop()
        if isinstance(node, App):
            internal += 1
            for a in node.args:
                stack.append((a, d + 1))
        else:
            leaves += 1
            depth = max(depth, d)
    return (internal, depth, leaves)


# --------------------------------------------------------------------------
# Numeric evaluation
# --------------------------------------------------------------------------

def evaluate(e: Expr, point: Point) -> float:
    """Evaluate at a point binding every free variable symbol.

    Raises EvalDomainError when a sub-evaluation leaves the reals and
    UnboundSymbolError when a free symbol has no binding.
    """
    if isinstance(e, Int):
        try:
            return float(e.value)
        except OverflowError:
            raise EvalDomainError(e, "integer too large for float") from None
    if isinstance(e, Sym):
        if e.name in _CONSTANT_VALUES:
            return _CONSTANT_VALUES[e.name]
        try:
            return float(point[e.name])
        except KeyError:
            raise UnboundSymbolError(e.name) from None

    args = [evaluate(a, point) for a in e.args]
    try:
        v = _apply_numeric(e.op, args)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise EvalDomainError(e, str(exc) or type(exc).__name__) from None
    if math.isnan(v) or math.isinf(v):
        raise EvalDomainError(e, "non-finite result")
    return v


def _apply_numeric(op: str, args: list[float]) -> float:
    if op == "add":
        return args[0] + args[1]
    if op == "sub":
        return args[0] - args[1]
    if op == "mul":
        return args[0] * args[1]
    if op == "div":
        return args[0] / args[1]
    if op == "pow":
        # math.pow rejects negative base with fractional exponent instead of
        # returning a complex number
        return math.pow(args[0], args[1])
    if op == "neg":
        return -args[0]
    if op == "exp":
        return math.exp(args[0])
    if op == "ln":
        return math.log(args[0])
    if op == "sqrt":
        return math.sqrt(args[0])
    if op == "sin":
        return math.sin(args[0])
    if op == "cos":
        return math.cos(args[0])
    if op == "tan":
        return math.tan(args[0])
    if op == "asin":
        return math.asin(args[0])
    if op == "acos":
        return math.acos(args[0])
    if op == "atan":
        return math.atan(args[0])
    raise AssertionError(op)


# --------------------------------------------------------------------------
# Canonical ordering
# --------------------------------------------------------------------------

def sort_key(e: Expr):
    """Total order over expressions: integers, then symbols, then operator
    applications ordered by operator and recursively by arguments."""
    if isinstance(e, Int):
        return (0, e.value)
    if isinstance(e, Sym):
        return (1, e.name)
    return (2, _OP_INDEX[e.op]) + tuple(sort_key(a) for a in e.args)


# --------------------------------------------------------------------------
# Simplifier
# --------------------------------------------------------------------------

DEFAULT_SIMPLIFY_BUDGET = 10_000


@dataclass(frozen=True)
class SimplifyResult:
    expr: Expr
    truncated: bool
    visits: int


class _BudgetExceeded(Exception):
    pass


class _Budget:
    __slots__ = ("remaining", "used")

    def __init__(self, limit: int):
        self.remaining = limit
        self.used = 0

    def spend(self):
        if self.remaining <= 0:
            raise _BudgetExceeded()
        self.remaining -= 1
        self.used += 1


def simplify(e: Expr, max_visits: int = DEFAULT_SIMPLIFY_BUDGET) -> Expr:
    """Rewrite to the normal form: integer folding, identity elements,
    like-term/like-factor collection, canonical operand order, and flattened
    add/mul chains. Total; value-preserving wherever both forms are defined.
    """
    return simplify_ex(e, max_visits).expr


def simplify_ex(e: Expr, max_visits: int = DEFAULT_SIMPLIFY_BUDGET) -> SimplifyResult:
    """simplify plus a truncation flag: when the node-visit ceiling is hit
    the best form reached by the last completed pass is returned."""
    budget = _Budget(max_visits)
    best = e
    truncated = False
    while True:
        try:
            rewritten = _norm(best, budget)
        except _BudgetExceeded:
            truncated = True
            break
        if rewritten == best:
            break
        best = rewritten
    return SimplifyResult(best, truncated, budget.used)


def _norm(e: Expr, budget: _Budget) -> Expr:
    budget.spend()
    if isinstance(e, (Int, Sym)):
        return e
    args = tuple(_norm(a, budget) for a in e.args)
    op = e.op
    if op in ("add", "sub"):
        return _norm_sum(App(op, args), budget)
    if op == "mul":
        return _norm_product(App(op, args), budget)
    if op == "neg":
        return _norm_neg(args[0])
    if op == "div":
        return _norm_div(args[0], args[1], budget)
    if op == "pow":
        return _norm_pow(args[0], args[1], budget)
    return _norm_unary(op, args[0])


def _norm_neg(a: Expr) -> Expr:
    if isinstance(a, Int):
        return Int(-a.value)
    if isinstance(a, App) and a.op == "neg":
        return a.args[0]
    return App("neg", (a,))


_ODD_UNARY = {"sin", "tan", "asin", "atan"}


def _norm_unary(op: str, a: Expr) -> Expr:
    if op == "exp":
        if a == ZERO:
            return ONE
        if isinstance(a, App) and a.op == "ln":
            return a.args[0]
    elif op == "ln":
        if a == ONE:
            return ZERO
        if a == EE:
            return ONE
        if isinstance(a, App) and a.op == "exp":
            return a.args[0]
    elif op == "sqrt":
        if isinstance(a, Int) and a.value >= 0:
            r = math.isqrt(a.value)
            if r * r == a.value:
                return Int(r)
    elif op == "cos":
        if a == ZERO:
            return ONE
        if isinstance(a, App) and a.op == "neg":
            return App("cos", (a.args[0],))
    if op in _ODD_UNARY:
        if a == ZERO:
            return ZERO
        if isinstance(a, App) and a.op == "neg":
            return _norm_neg(App(op, (a.args[0],)))
    if op == "acos" and a == ONE:
        return ZERO
    return App(op, (a,))


def _norm_div(a: Expr, b: Expr, budget: _Budget) -> Expr:
    if a == ZERO:
        return ZERO
    if a == b:
        return ONE
    if b == ONE:
        return a
    if b == Int(-1):
        return _norm_neg(a)
    if isinstance(a, Int) and isinstance(b, Int) and b.value != 0 and a.value % b.value == 0:
        return Int(a.value // b.value)
    # flatten quotient towers: (a/b)/c -> a/(b*c), a/(b/c) -> (a*c)/b
    if isinstance(a, App) and a.op == "div":
        return _norm_div(a.args[0], _norm_product(App("mul", (a.args[1], b)), budget), budget)
    if isinstance(b, App) and b.op == "div":
        return _norm_div(_norm_product(App("mul", (a, b.args[1])), budget), b.args[0], budget)
    # shared sign: (-a)/(-b) -> a/b
    if isinstance(a, App) and a.op == "neg" and isinstance(b, App) and b.op == "neg":
        return _norm_div(a.args[0], b.args[0], budget)
    return App("div", (a, b))


def _norm_pow(base: Expr, expo: Expr, budget: _Budget) -> Expr:
    if expo == ONE:
        return base
    if expo == ZERO:
        return ONE
    if base == ONE:
        return ONE
    if isinstance(expo, Int):
        n = expo.value
        if isinstance(base, Int):
            if n >= 0:
                return Int(base.value**n)
            if base.value != 0:
                return _norm_div(ONE, Int(base.value ** (-n)), budget)
            return App("pow", (base, expo))  # 0^negative: leave for evaluate to reject
        if base == ZERO and n > 0:
            return ZERO
        if isinstance(base, App) and base.op == "neg":
            unsigned = _norm_pow(base.args[0], expo, budget)
            return _norm_neg(unsigned) if n % 2 else unsigned
        if isinstance(base, App) and base.op == "pow" and isinstance(base.args[1], Int):
            return _norm_pow(base.args[0], Int(base.args[1].value * n), budget)
        if isinstance(base, App) and base.op == "mul":
            powered = App("mul", tuple(App("pow", (f, expo)) for f in base.args))
            return _norm(powered, budget)
    return App("pow", (base, expo))


def _sum_chain(e: Expr, sign: int, const: list[int], terms: dict[Expr, int]):
    """Accumulate the additive chain rooted at e into const + {key: coeff}."""
    if isinstance(e, App) and e.op == "add":
        _sum_chain(e.args[0], sign, const, terms)
        _sum_chain(e.args[1], sign, const, terms)
        return
    if isinstance(e, App) and e.op == "sub":
        _sum_chain(e.args[0], sign, const, terms)
        _sum_chain(e.args[1], -sign, const, terms)
        return
    if isinstance(e, App) and e.op == "neg":
        _sum_chain(e.args[0], -sign, const, terms)
        return
    if isinstance(e, Int):
        const[0] += sign * e.value
        return
    coeff, key = _split_coefficient(e)
    terms[key] = terms.get(key, 0) + sign * coeff


def _split_coefficient(e: Expr) -> tuple[int, Expr]:
    """Split a (normalized) term into (integer coefficient, residual key)."""
    if isinstance(e, App) and e.op == "mul":
        factors = _flat_mul_factors(e)
        coeff = 1
        rest = []
        for f in factors:
            if isinstance(f, Int):
                coeff *= f.value
            else:
                rest.append(f)
        if not rest:
            return coeff, ONE
        if len(rest) == 1:
            return coeff, rest[0]
        return coeff, _rebuild_chain("mul", rest)
    return 1, e


def _flat_mul_factors(e: Expr) -> list[Expr]:
    if isinstance(e, App) and e.op == "mul":
        return _flat_mul_factors(e.args[0]) + _flat_mul_factors(e.args[1])
    return [e]


def _rebuild_chain(op: str, items: list[Expr]) -> Expr:
    out = items[0]
    for item in items[1:]:
        out = App(op, (out, item))
    return out


def _norm_sum(e: App, budget: _Budget) -> Expr:
    const = [0]
    terms: dict[Expr, int] = {}
    _sum_chain(e, 1, const, terms)

    positive: list[Expr] = []
    negative: list[Expr] = []
    for key in sorted(terms, key=sort_key):
        coeff = terms[key]
        if coeff == 0:
            continue
        built = _coeff_times(abs(coeff), key, budget)
        (positive if coeff > 0 else negative).append(built)
    if const[0] > 0:
        positive.insert(0, Int(const[0]))
    elif const[0] < 0:
        negative.insert(0, Int(-const[0]))

    if not positive and not negative:
        return ZERO
    if positive:
        out = _rebuild_chain("add", positive)
    else:
        out = _norm_neg(negative.pop(0))
    for n in negative:
        out = App("sub", (out, n))
    return out


def _coeff_times(coeff: int, key: Expr, budget: _Budget) -> Expr:
    if key == ONE:
        return Int(coeff)
    if coeff == 1:
        return key
    return _norm_product(App("mul", (Int(coeff), key)), budget)


def _norm_product(e: App, budget: _Budget) -> Expr:
    factors = _flat_mul_factors(e)
    coeff = 1
    sign = 1
    bases: list[Expr] = []  # insertion-ordered distinct bases
    expos: dict[Expr, list[Expr]] = {}
    for f in factors:
        while isinstance(f, App) and f.op == "neg":
            sign = -sign
            f = f.args[0]
        if isinstance(f, Int):
            coeff *= f.value
            continue
        if isinstance(f, App) and f.op == "pow":
            base, expo = f.args
        else:
            base, expo = f, ONE
        if base not in expos:
            bases.append(base)
            expos[base] = []
        expos[base].append(expo)
    if coeff == 0:
        return ZERO

    built: list[Expr] = []
    for base in sorted(bases, key=sort_key):
        exps = expos[base]
        total = exps[0] if len(exps) == 1 else _norm(_rebuild_chain("add", exps), budget)
        f = _norm_pow(base, total, budget)
        if f == ONE:
            continue
        if isinstance(f, Int):
            coeff *= f.value
            continue
        built.append(f)

    coeff *= sign
    if not built:
        return Int(coeff)
    if abs(coeff) != 1:
        built.insert(0, Int(abs(coeff)))
    out = _rebuild_chain("mul", built)
    return _norm_neg(out) if coeff < 0 else out
