"""Independent re-implementation of the hash3 embedder.

Prints the cosines frozen in tests/test_retrieval.cpp.
"""
import math
import sys


def fnv1a64(data: bytes) -> int:
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def embed(text: str, dim: int = 256):
    v = [0.0] * dim
    raw = text.encode().lower()
    for i in range(len(raw) - 2):
        h = fnv1a64(raw[i:i + 3])
        v[h % dim] += -1.0 if h >> 63 else 1.0
    n = math.sqrt(sum(x * x for x in v))
    if n == 0:
        v = [0.0] * dim
        v[0] = 1.0
        return v
    return [x / n for x in v]


def cos(a, b):
    return sum(x * y for x, y in zip(a, b))


if __name__ == "__main__":
    pairs = [("aspirin", "aspirin dose"), ("aspirin", "zzzz qqqq")]
    if len(sys.argv) > 1:
        pairs = [tuple(sys.argv[1:3])]
    for a, b in pairs:
        print(f"{a!r} vs {b!r}: {cos(embed(a), embed(b)):.12f}")
