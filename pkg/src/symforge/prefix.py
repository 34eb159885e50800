"""Prefix-order token serialization of expression trees, plus the vocabulary.

A tree serializes root-first, children left to right. Fixed arities make the
form unambiguous without parentheses. Integers expand digit-wise behind an
explicit sign token (INT+ / INT-), most significant digit first, so the token
alphabet stays finite.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import ARITY, App, Expr, Int, LEAF_SYMBOLS, OPERATORS, Sym

TokenSequence = tuple[str, ...]

SIGN_TOKENS = ("INT+", "INT-")
DIGIT_TOKENS = tuple(str(d) for d in range(10))
RESERVED_TOKENS = ("PAD", "BOS", "EOS", "UNK")

PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3


class MalformedSequenceError(ValueError):
    """A token sequence that is not the prefix encoding of any expression."""

    def __init__(self, position: int, reason: str):
        super().__init__(f"position {position}: {reason}")
        self.position = position
        self.reason = reason


def encode(e: Expr) -> TokenSequence:
    out: list[str] = []
    _encode_into(e, out)
    return tuple(out)


def _encode_into(e: Expr, out: list[str]):
    if isinstance(e, Int):
        out.append("INT+" if e.value >= 0 else "INT-")
        out.extend(str(abs(e.value)))
    elif isinstance(e, Sym):
        out.append(e.name)
    else:
        out.append(e.op)
        for a in e.args:
            _encode_into(a, out)


def decode(tokens: TokenSequence) -> Expr:
    """Inverse of encode; raises MalformedSequenceError on anything that is
    not exactly an encoded expression (model outputs may be garbage)."""
    expr, pos = _parse(tuple(tokens), 0)
    if pos != len(tokens):
        raise MalformedSequenceError(pos, "trailing tokens after a complete expression")
    return expr


def is_decodable(tokens: TokenSequence) -> bool:
    try:
        decode(tokens)
        return True
    except MalformedSequenceError:
        return False


def _parse(tokens: TokenSequence, pos: int) -> tuple[Expr, int]:
    if pos >= len(tokens):
        raise MalformedSequenceError(pos, "unexpected end of sequence (missing operand)")
    tok = tokens[pos]
    if tok in ARITY:
        args = []
        cursor = pos + 1
        for _ in range(ARITY[tok]):
            arg, cursor = _parse(tokens, cursor)
            args.append(arg)
        return App(tok, tuple(args)), cursor
    if tok in _LEAF_SET:
        return Sym(tok), pos + 1
    if tok in SIGN_TOKENS:
        return _parse_integer(tokens, pos)
    if tok in _DIGIT_SET:
        raise MalformedSequenceError(pos, "digit without a leading sign token")
    raise MalformedSequenceError(pos, f"unknown token {tok!r}")


def _parse_integer(tokens: TokenSequence, pos: int) -> tuple[Expr, int]:
    sign = 1 if tokens[pos] == "INT+" else -1
    cursor = pos + 1
    digits: list[str] = []
    while cursor < len(tokens) and tokens[cursor] in _DIGIT_SET:
        digits.append(tokens[cursor])
        cursor += 1
    if not digits:
        raise MalformedSequenceError(pos, "sign token with no digits")
    if len(digits) > 1 and digits[0] == "0":
        raise MalformedSequenceError(pos + 1, "leading zero in integer literal")
    value = int("".join(digits))
    if sign < 0 and value == 0:
        raise MalformedSequenceError(pos, "negative zero literal")
    return Int(sign * value), cursor


_LEAF_SET = frozenset(LEAF_SYMBOLS)
_DIGIT_SET = frozenset(DIGIT_TOKENS)


@dataclass(frozen=True)
class Vocabulary:
    """Dense, stable token <-> id bijection; reserved ids occupy 0-3."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        ids = {tok: i for i, tok in enumerate(self.tokens)}
        if len(ids) != len(self.tokens):
            raise ValueError("duplicate token in vocabulary")
        object.__setattr__(self, "_ids", ids)

    def __len__(self) -> int:
        return len(self.tokens)

    def id(self, token: str) -> int:
        ids = self._ids  # type: ignore[attr-defined]
        return ids.get(token, UNK_ID)

    def token(self, token_id: int) -> str:
        return self.tokens[token_id]

    def encode_ids(self, tokens: TokenSequence) -> list[int]:
        return [self.id(t) for t in tokens]

    def decode_ids(self, ids) -> TokenSequence:
        return tuple(self.tokens[i] for i in ids)

    def save(self, path):
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(self.tokens) + "\n")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        with open(path, encoding="ascii") as fh:
            return cls(tuple(line.strip() for line in fh if line.strip()))


def build_vocabulary() -> Vocabulary:
    """Deterministic layout: reserved, operators in declared order, leaf
    symbols, sign tokens, digits."""
    return Vocabulary(RESERVED_TOKENS + OPERATORS + LEAF_SYMBOLS + SIGN_TOKENS + DIGIT_TOKENS)


def tokens_to_text(tokens: TokenSequence) -> str:
    return " ".join(tokens)


def text_to_tokens(text: str) -> TokenSequence:
    return tuple(text.split())
