#!/usr/bin/env python3
"""Standalone reference computations used to freeze expected values in the C++ tests.

Reimplements, without sharing any code with the library:
  * the SplitMix64 random source and its rejection-sampled uniform index draw,
  * partial Fisher-Yates sampling without replacement,
  * the offline hash embedder (FNV-1a 64 over lowercase tokens, 256 buckets) and cosine,
  * the distinct-n and repeated-bigram counts.
Run it to print the values the tests assert.
"""
import math

MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed):
        self.state = seed & MASK

    def next(self):
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
        return z ^ (z >> 31)

    def uniform(self, n):
        threshold = (1 << 64) % n
        while True:
            x = self.next()
            if x >= threshold:
                return x % n

    def sample(self, n, k):
        idx = list(range(n))
        for i in range(k):
            j = i + self.uniform(n - i)
            idx[i], idx[j] = idx[j], idx[i]
        return idx[:k]


def tokenize(text):
    out, cur = [], bytearray()
    for b in text.encode("utf-8"):
        if b < 0x80 and chr(b).isspace():
            if cur:
                out.append(bytes(cur)); cur = bytearray()
        elif b >= 0x80 or chr(b).isalnum():
            cur.append(ord(chr(b).lower()) if b < 0x80 else b)
        else:
            if cur:
                out.append(bytes(cur)); cur = bytearray()
            out.append(bytes([b]))
    if cur:
        out.append(bytes(cur))
    return out


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h ^= b
        h = (h * 0x100000001B3) & MASK
    return h


def embed(text, dim=256):
    v = [0.0] * dim
    for t in tokenize(text):
        v[fnv1a64(t) % dim] += 1.0
    n = math.sqrt(sum(x * x for x in v))
    return [x / n for x in v]


def cosine(a, b):
    return sum(x * y for x, y in zip(a, b))


if __name__ == "__main__":
    r = SplitMix64(7)
    print("seed7 first outputs", [hex(r.next()) for _ in range(3)])
    r = SplitMix64(7)
    print("init seed 7, 4 slots over 10 styles:", [r.uniform(10) for _ in range(4)])
    r = SplitMix64(3)
    print("mutation seed 3 over 5 strategies:", r.uniform(5))
    # tournament: scores [0.9,0.1,0.5] ids p0,p1,p2, k=2
    for seed in (1, 2, 5, 11):
        r = SplitMix64(seed)
        drawn = r.sample(3, 2)
        scores = [0.9, 0.1, 0.5]
        win = max(drawn, key=lambda i: (scores[i], -i))
        print(f"tournament seed {seed}: drawn {drawn} winner p{win}")
    print("bucket 5", fnv1a64(b"5") % 256, "five", fnv1a64(b"five") % 256, "apples", fnv1a64(b"apples") % 256)
    print("cos('5 apples','five apples') = %.17g" % cosine(embed("5 apples"), embed("five apples")))
    for a, b in (("red green", "blue yellow"), ("cat", "dog")):
        print(a, "|", b, [fnv1a64(t) % 256 for t in tokenize(a)], [fnv1a64(t) % 256 for t in tokenize(b)],
              cosine(embed(a), embed(b)))
