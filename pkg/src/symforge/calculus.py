"""Symbolic differentiation, rule-based integration, and equation inversion.

Differentiation is total over the operator alphabet. Integration is a
pattern engine: it covers polynomials, the classic inverse-trig and
logarithmic forms, linear substitution, and shallow integration by parts;
anything else reports no-rule so the caller can skip the candidate.
Inversion walks the unique root-to-leaf path of a target symbol, applying
exact inverses, and is the primitive behind ODE dataset construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import (
    App,
    Expr,
    Int,
    ONE,
    Sym,
    X,
    ZERO,
    add,
    acos,
    asin,
    atan,
    contains_symbol,
    cos,
    count_symbol,
    div,
    exp,
    ln,
    mul,
    neg,
    pow_,
    simplify,
    sin,
    sqrt,
    sub,
    tan,
)

# d/dx treats the dependent variable as y(x); its derivative markers chain
# one step further.
_CHAIN_X = {"y": Sym("y1"), "y1": Sym("y2")}


def differentiate(e: Expr, var: str = "x") -> Expr:
    """Symbolic derivative with respect to a variable leaf, simplified."""
    if var not in ("x", "y", "c", "c1", "c2"):
        raise ValueError(f"cannot differentiate with respect to {var!r}")
    return simplify(_diff(e, var))


def _diff(e: Expr, var: str) -> Expr:
    if isinstance(e, Int):
        return ZERO
    if isinstance(e, App) and not _depends(e, var):
        # constant subtree: skip the chain rule, which would otherwise
        # manufacture 0/0 forms at domain boundaries like acos(1)
        return ZERO
    if isinstance(e, Sym):
        if e.name == var:
            return ONE
        if var == "x" and e.name in _CHAIN_X:
            return _CHAIN_X[e.name]
        if var == "x" and e.name == "y2":
            raise ValueError("derivative order above 2 is not representable")
        return ZERO

    op = e.op
    a = e.args[0]
    if op == "add":
        return add(_diff(a, var), _diff(e.args[1], var))
    if op == "sub":
        return sub(_diff(a, var), _diff(e.args[1], var))
    if op == "neg":
        return neg(_diff(a, var))
    if op == "mul":
        b = e.args[1]
        return add(mul(_diff(a, var), b), mul(a, _diff(b, var)))
    if op == "div":
        b = e.args[1]
        num = sub(mul(_diff(a, var), b), mul(a, _diff(b, var)))
        return div(num, pow_(b, 2))
    if op == "pow":
        return _diff_pow(a, e.args[1], var)
    if op == "exp":
        return mul(_diff(a, var), e)
    if op == "ln":
        return div(_diff(a, var), a)
    if op == "sqrt":
        return div(_diff(a, var), mul(2, e))
    if op == "sin":
        return mul(_diff(a, var), cos(a))
    if op == "cos":
        return neg(mul(_diff(a, var), sin(a)))
    if op == "tan":
        return div(_diff(a, var), pow_(cos(a), 2))
    if op == "asin":
        return div(_diff(a, var), sqrt(sub(1, pow_(a, 2))))
    if op == "acos":
        return neg(div(_diff(a, var), sqrt(sub(1, pow_(a, 2)))))
    if op == "atan":
        return div(_diff(a, var), add(1, pow_(a, 2)))
    raise AssertionError(op)


def _depends(e: Expr, var: str) -> bool:
    if var == "x":
        return contains_symbol(e, "x") or contains_symbol(e, "y") or \
            contains_symbol(e, "y1") or contains_symbol(e, "y2")
    return contains_symbol(e, var)


def _diff_pow(base: Expr, expo: Expr, var: str) -> Expr:
    base_dep = _depends(base, var)
    expo_dep = _depends(expo, var)
    if not base_dep and not expo_dep:
        return ZERO
    if not expo_dep:
        # constant exponent: e * base^(e-1) * base'
        return mul(mul(expo, pow_(base, sub(expo, 1))), _diff(base, var))
    # general exponent via base^e = exp(e * ln base)
    whole = App("pow", (base, expo))
    inner = add(mul(_diff(expo, var), ln(base)), div(mul(expo, _diff(base, var)), base))
    return mul(whole, inner)


@dataclass(frozen=True)
class Primitive:
    """An (integrand, antiderivative) pair: d/dx antiderivative = integrand."""

    integrand: Expr
    antiderivative: Expr


def integrate_rule_based(e: Expr, var: str = "x") -> Primitive | None:
    """Antiderivative by pattern rules, or None when no rule applies.

    None is a skip signal for generation, not a failure: plenty of sampled
    integrands (e.g. exp(x^2)) have no closed form at all.
    """
    if var != "x":
        raise ValueError("integration variable must be x")
    integrand = simplify(e)
    anti = _integ(integrand, depth=2)
    if anti is None:
        return None
    return Primitive(integrand, simplify(anti))


def _x_free(e: Expr) -> bool:
    return not contains_symbol(e, "x")


def _linear_parts(e: Expr) -> tuple[Expr, Expr] | None:
    """Match a*x + b with x-free a, b (a may be implicit 1, b implicit 0)."""
    poly = _as_polynomial(e)
    if poly is None or max(poly, default=0) > 1:
        return None
    a = poly.get(1, ZERO)
    if simplify(a) == ZERO:
        return None
    return (a, poly.get(0, ZERO))


def _as_polynomial(e: Expr) -> dict[int, Expr] | None:
    """Decompose into {degree: coefficient} with x-free coefficients, or
    None when e is not polynomial in x."""
    if _x_free(e):
        return {0: e}
    if e == X:
        return {1: ONE}
    if not isinstance(e, App):
        return None
    if e.op == "add" or e.op == "sub":
        lhs = _as_polynomial(e.args[0])
        rhs = _as_polynomial(e.args[1])
        if lhs is None or rhs is None:
            return None
        out = dict(lhs)
        for d, c in rhs.items():
            term = c if e.op == "add" else neg(c)
            out[d] = add(out[d], term) if d in out else term
        return out
    if e.op == "neg":
        inner = _as_polynomial(e.args[0])
        if inner is None:
            return None
        return {d: neg(c) for d, c in inner.items()}
    if e.op == "mul":
        lhs = _as_polynomial(e.args[0])
        rhs = _as_polynomial(e.args[1])
        if lhs is None or rhs is None:
            return None
        out: dict[int, Expr] = {}
        for d1, c1 in lhs.items():
            for d2, c2 in rhs.items():
                piece = mul(c1, c2)
                d = d1 + d2
                out[d] = add(out[d], piece) if d in out else piece
        return out
    if e.op == "pow" and isinstance(e.args[1], Int) and e.args[1].value >= 0:
        inner = _as_polynomial(e.args[0])
        if inner is None:
            return None
        out = {0: ONE}
        for _ in range(e.args[1].value):
            nxt: dict[int, Expr] = {}
            for d1, c1 in out.items():
                for d2, c2 in inner.items():
                    piece = mul(c1, c2)
                    d = d1 + d2
                    nxt[d] = add(nxt[d], piece) if d in nxt else piece
            out = nxt
            if max(out) > 40:  # runaway degree guard
                return None
        return out
    if e.op == "div" and _x_free(e.args[1]):
        inner = _as_polynomial(e.args[0])
        if inner is None:
            return None
        return {d: div(c, e.args[1]) for d, c in inner.items()}
    return None


def _integ(e: Expr, depth: int) -> Expr | None:
    if _x_free(e):
        return mul(e, X)
    if e == X:
        return div(pow_(X, 2), 2)
    if not isinstance(e, App):
        return None
    op = e.op

    if op == "add" or op == "sub":
        lhs = _integ(simplify(e.args[0]), depth)
        rhs = _integ(simplify(e.args[1]), depth)
        if lhs is None or rhs is None:
            return None
        return App(op, (lhs, rhs))
    if op == "neg":
        inner = _integ(simplify(e.args[0]), depth)
        return None if inner is None else neg(inner)

    if op == "mul":
        return _integ_product(e, depth)
    if op == "div":
        return _integ_quotient(e.args[0], e.args[1], depth)
    if op == "pow":
        return _integ_power(e.args[0], e.args[1], depth)
    return _integ_unary(op, e.args[0])


def _integ_product(e: App, depth: int) -> Expr | None:
    factors = _flatten_mul(e)
    const = [f for f in factors if _x_free(f)]
    dep = [f for f in factors if not _x_free(f)]
    if const:
        rest = dep[0] if len(dep) == 1 else _build_mul(dep)
        inner = _integ(simplify(rest), depth)
        if inner is None:
            return None
        return mul(_build_mul(const), inner)
    if len(dep) == 1:
        return _integ(dep[0], depth)
    # polynomial products expand and integrate termwise
    poly = _as_polynomial(e)
    if poly is not None:
        return _integ_polynomial(poly)
    if depth > 0 and len(dep) == 2:
        return _integ_by_parts(dep[0], dep[1], depth)
    return None


def _flatten_mul(e: Expr) -> list[Expr]:
    if isinstance(e, App) and e.op == "mul":
        return _flatten_mul(e.args[0]) + _flatten_mul(e.args[1])
    return [e]


def _build_mul(factors: list[Expr]) -> Expr:
    out = factors[0]
    for f in factors[1:]:
        out = mul(out, f)
    return out


def _integ_polynomial(poly: dict[int, Expr]) -> Expr:
    terms = []
    for d in sorted(poly):
        c = simplify(poly[d])
        if c == ZERO:
            continue
        terms.append(div(mul(c, pow_(X, d + 1)), d + 1))
    if not terms:
        return ZERO
    out = terms[0]
    for t in terms[1:]:
        out = add(out, t)
    return out


def _integ_quotient(num: Expr, den: Expr, depth: int) -> Expr | None:
    if _x_free(den):
        inner = _integ(simplify(num), depth)
        return None if inner is None else div(inner, den)
    if not _x_free(num):
        # try to peel x-free parts of the numerator
        simplified = simplify(div(num, den))
        if isinstance(simplified, App) and simplified.op == "div" and (
            simplified.args != (num, den)
        ):
            return _integ(simplified, depth - 1) if depth > 0 else None
        return None
    recip = _integ_reciprocal(den)
    if recip is None:
        return None
    return mul(num, recip)


def _integ_reciprocal(den: Expr) -> Expr | None:
    """Integral of 1/den for the supported denominator shapes."""
    lin = _linear_parts(den)
    if lin is not None:
        a, _ = lin
        return div(ln(den), a)
    if isinstance(den, App) and den.op == "pow" and isinstance(den.args[1], Int):
        n = den.args[1].value
        lin = _linear_parts(den.args[0])
        if lin is not None and n not in (0, 1):
            a, _ = lin
            # 1/(ax+b)^n -> (ax+b)^(1-n) / (a (1-n))
            return div(pow_(den.args[0], 1 - n), mul(a, 1 - n))
    # 1/(1 + x^2) -> atan(x), including scaled forms 1/(k + k x^2)
    quad = _as_polynomial(den)
    if quad is not None and max(quad, default=0) == 2 and 1 not in quad:
        c0 = simplify(quad.get(0, ZERO))
        c2 = simplify(quad[2])
        if c0 == c2 and c0 != ZERO:
            return div(atan(X), c0)
    if isinstance(den, App) and den.op == "sqrt":
        inner = _as_polynomial(den.args[0])
        if inner is not None and max(inner, default=0) == 2 and 1 not in inner:
            c0 = simplify(inner.get(0, ZERO))
            c2 = simplify(inner[2])
            if c0 == ONE and c2 == Int(-1):
                return asin(X)
    return None


def _integ_power(base: Expr, expo: Expr, depth: int) -> Expr | None:
    if _x_free(expo):
        lin = _linear_parts(base)
        if lin is not None:
            a, _ = lin
            if expo == Int(-1):
                return div(ln(base), a)
            # (ax+b)^e -> (ax+b)^(e+1) / (a (e+1))
            bump = simplify(add(expo, 1))
            if bump == ZERO:
                return div(ln(base), a)
            return div(pow_(base, bump), mul(a, bump))
        if isinstance(expo, Int) and expo.value < 0:
            return _integ_reciprocal(simplify(pow_(base, Int(-expo.value))))
        poly = _as_polynomial(App("pow", (base, expo)))
        if poly is not None:
            return _integ_polynomial(poly)
    return None


_UNARY_TABLE = {
    # u = a*x + b throughout; value is the antiderivative of op(u) in u
    "exp": lambda u: exp(u),
    "sin": lambda u: neg(cos(u)),
    "cos": lambda u: sin(u),
    "tan": lambda u: neg(ln(cos(u))),
    "ln": lambda u: sub(mul(u, ln(u)), u),
    "sqrt": lambda u: div(mul(2, mul(u, sqrt(u))), 3),
}


def _integ_unary(op: str, arg: Expr) -> Expr | None:
    rule = _UNARY_TABLE.get(op)
    if rule is None:
        return None
    lin = _linear_parts(arg)
    if lin is None:
        return None
    a, _ = lin
    return div(rule(arg), a)


def _integ_by_parts(f: Expr, g: Expr, depth: int) -> Expr | None:
    """x^n * h(linear) patterns, reduced recursively: integral(u v') =
    u V - integral(u' V)."""
    for u, v in ((f, g), (g, f)):
        n = _monomial_degree(u)
        if n is None or n > depth:
            continue
        if not (isinstance(v, App) and v.op in ("exp", "sin", "cos")):
            continue
        big_v = _integ_unary(v.op, v.args[0])
        if big_v is None:
            continue
        du = simplify(differentiate(u, "x"))
        rest = _integ(simplify(mul(du, big_v)), depth - 1)
        if rest is None:
            return None
        return sub(mul(u, big_v), rest)
    return None


def _monomial_degree(e: Expr) -> int | None:
    """Degree when e is exactly x^n (n >= 1), else None."""
    if e == X:
        return 1
    if isinstance(e, App) and e.op == "pow" and e.args[0] == X and isinstance(e.args[1], Int):
        if e.args[1].value >= 1:
            return e.args[1].value
    return None


def _mul2(a: Expr, b: Expr) -> Expr:
    if a == ONE:
        return b
    if b == ONE:
        return a
    return mul(a, b)


def as_fraction(e: Expr) -> tuple[Expr, Expr]:
    """Rewrite as a single quotient (numerator, denominator) by combining
    sub-fractions over common denominators. Zero-testing the numerator is
    equivalent to zero-testing the expression wherever it is defined, which
    is what ODE emission relies on when it clears denominators."""
    if isinstance(e, (Int, Sym)):
        return e, ONE
    op = e.op
    if op in ("add", "sub"):
        na, da = as_fraction(e.args[0])
        nb, db = as_fraction(e.args[1])
        if da == db:
            return App(op, (na, nb)), da
        combine = add if op == "add" else sub
        return combine(_mul2(na, db), _mul2(nb, da)), _mul2(da, db)
    if op == "neg":
        na, da = as_fraction(e.args[0])
        return neg(na), da
    if op == "mul":
        na, da = as_fraction(e.args[0])
        nb, db = as_fraction(e.args[1])
        return _mul2(na, nb), _mul2(da, db)
    if op == "div":
        na, da = as_fraction(e.args[0])
        nb, db = as_fraction(e.args[1])
        return _mul2(na, db), _mul2(da, nb)
    if op == "pow" and isinstance(e.args[1], Int):
        n = e.args[1].value
        na, da = as_fraction(e.args[0])
        if da == ONE and n >= 0:
            return pow_(na, n), ONE
        if n >= 0:
            return pow_(na, n), pow_(da, n)
        return pow_(da, -n), pow_(na, -n)
    return e, ONE


@dataclass(frozen=True)
class IsolationResult:
    """Outcome of solving an equation for a leaf symbol: the target-free
    right-hand side and the number of inversion steps applied."""

    isolated: Expr
    steps: int


_INVERSE_UNARY = {
    "exp": ln,
    "ln": exp,
    "sqrt": lambda v: pow_(v, 2),
    "sin": asin,
    "asin": sin,
    "cos": acos,
    "acos": cos,
    "tan": atan,
    "atan": tan,
    "neg": neg,
}


def isolate_leaf(lhs: Expr, rhs: Expr, target: str) -> IsolationResult | None:
    """Solve lhs = rhs for the target symbol, which must occur exactly once
    in rhs and not at all in lhs. Returns None when a step on the
    root-to-target path has no usable inverse (caller resamples).
    Inverse-trig steps use principal branches; callers verify numerically.
    """
    if count_symbol(rhs, target) != 1 or contains_symbol(lhs, target):
        return None
    steps = 0
    side, path = lhs, rhs
    while True:
        if isinstance(path, Sym) and path.name == target:
            return IsolationResult(simplify(side), steps)
        if not isinstance(path, App):
            return None
        steps += 1
        if path.op in _INVERSE_UNARY:
            side = _INVERSE_UNARY[path.op](side)
            path = path.args[0]
            continue
        a, b = path.args
        in_first = contains_symbol(a, target)
        if path.op == "add":
            side, path = sub(side, b if in_first else a), (a if in_first else b)
        elif path.op == "sub":
            if in_first:
                side, path = add(side, b), a
            else:
                side, path = sub(a, side), b
        elif path.op == "mul":
            side, path = div(side, b if in_first else a), (a if in_first else b)
        elif path.op == "div":
            if in_first:
                side, path = mul(side, b), a
            else:
                side, path = div(a, side), b
        elif path.op == "pow":
            result = _invert_pow(side, a, b, in_first)
            if result is None:
                return None
            side, path = result
        else:
            return None


def _constantish(e: Expr) -> bool:
    return not any(contains_symbol(e, v) for v in ("x", "y", "y1", "y2"))


def _invert_pow(side: Expr, base: Expr, expo: Expr, in_base: bool) -> tuple[Expr, Expr] | None:
    if in_base:
        if expo == ONE:
            return side, base
        if expo == Int(-1):
            return div(1, side), base
        if _constantish(expo) and expo != ZERO:
            # constant exponent: take the q-th root on the principal branch
            return pow_(side, div(1, expo)), base
        return None
    # target inside the exponent: b^t = s  ->  t = ln(s)/ln(b)
    return div(ln(side), ln(base)), expo
