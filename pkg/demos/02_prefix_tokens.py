"""
Prefix token form: the seq2seq wire format
==========================================

Trees serialize root-first with digit-wise integers, so a finite vocabulary
covers every expression. Decoding is exact and rejects anything that is not
the encoding of a tree (important: model outputs can be garbage).
"""

from symforge import MalformedSequenceError, add, build_vocabulary, decode, encode, mul

e = add(7, mul(3, add(5, 2)))
tokens = encode(e)
print("tokens:", " ".join(tokens))
print("round trip ok:", decode(tokens) == e)

# malformed sequences report the position and reason
for bad in [("add", "x"), ("INT+",), ("x", "x")]:
    try:
        decode(bad)
    except MalformedSequenceError as exc:
        print(f"rejected {bad}: {exc}")

# the vocabulary is dense and stable: reserved ids, operators, leaves,
# signs, digits
vocab = build_vocabulary()
print("vocabulary size:", len(vocab))
print("first tokens:", vocab.tokens[:8])
print("ids of", tokens[:4], "->", vocab.encode_ids(tokens[:4]))
