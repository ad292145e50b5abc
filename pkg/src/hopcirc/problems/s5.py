"""Word problem over the symmetric group on five points."""
from __future__ import annotations

import itertools
import re
from functools import reduce
from typing import Sequence

from .instance import ProblemInstance
from .rng import SplitMix64

__all__ = ["Perm", "IDENTITY", "ELEMENTS", "compose", "compose_word", "compose_balanced",
           "inverse", "parse_cycles", "perm_token", "parse_token", "gen_s5_word",
           "oracle_s5", "make_s5_word"]

Perm = tuple[int, ...]
IDENTITY: Perm = (1, 2, 3, 4, 5)
ELEMENTS: tuple[Perm, ...] = tuple(itertools.permutations(range(1, 6)))


def _check(p: Sequence[int]) -> Perm:
    p = tuple(int(x) for x in p)
    if sorted(p) != [1, 2, 3, 4, 5]:
        raise ValueError(f"{p} is not a permutation of 1..5")
    return p


def compose(f: Perm, g: Perm) -> Perm:
    """``f`` first, then ``g``: ``x -> g(f(x))``."""
    return tuple(g[f[x] - 1] for x in range(5))


def inverse(f: Perm) -> Perm:
    out = [0] * 5
    for i, y in enumerate(f):
        out[y - 1] = i + 1
    return tuple(out)


def compose_word(word: Sequence[Perm]) -> Perm:
    """Left-to-right fold: the first element acts first."""
    return reduce(compose, word, IDENTITY)


def compose_balanced(word: Sequence[Perm]) -> Perm:
    """Same product by pairwise halving (associativity check)."""
    if not word:
        return IDENTITY
    level = list(word)
    while len(level) > 1:
        nxt = [compose(level[i], level[i + 1]) for i in range(0, len(level) - 1, 2)]
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    return level[0]


def parse_cycles(text: str) -> Perm:
    """Cycle notation such as ``"(1 2)(3 5 4)"``; ``"()"`` is the identity."""
    img = list(IDENTITY)
    for body in re.findall(r"\(([^)]*)\)", text):
        pts = [int(x) for x in body.replace(",", " ").split()]
        for a, b in zip(pts, pts[1:] + pts[:1]):
            img[a - 1] = b
    return _check(img)


def perm_token(p: Perm) -> str:
    """One-line notation as a single token, e.g. ``"21345"``."""
    return "".join(map(str, p))


def parse_token(tok: str) -> Perm:
    return _check([int(c) for c in tok])


def oracle_s5(inst: ProblemInstance) -> bool:
    word = [_check(p) for p in inst.payload["word"]]
    return compose_word(word) == IDENTITY


def make_s5_word(word: Sequence[Sequence[int]], seed: int = 0) -> ProblemInstance:
    w = [_check(p) for p in word]
    inst = ProblemInstance("s5_word", {"word": [list(p) for p in w]}, False,
                           [perm_token(p) for p in w], seed)
    inst.label = oracle_s5(inst)
    return inst


def gen_s5_word(length: int, make_identity: bool, seed: int) -> ProblemInstance:
    """Random word whose product is (or is not) the identity.

    Identity words are a random word followed by its inverse word; an odd
    length gets one identity element in the middle. A length-1 identity word
    is just the identity.
    """
    if length < 1:
        raise ValueError("length must be at least 1")
    rng = SplitMix64(seed)
    if make_identity:
        half = [rng.choice(ELEMENTS) for _ in range(length // 2)]
        middle = [IDENTITY] if length % 2 else []
        word = half + middle + [inverse(p) for p in reversed(half)]
    else:
        word = [rng.choice(ELEMENTS) for _ in range(length)]
        while compose_word(word) == IDENTITY:
            word[-1] = rng.choice(ELEMENTS)
    inst = make_s5_word(word, seed)
    if inst.label != make_identity:
        raise AssertionError("generator produced the wrong label")
    return inst
