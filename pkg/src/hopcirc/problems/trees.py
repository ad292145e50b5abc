"""Rooted colored trees: generation, canonical forms and isomorphism oracles."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from .instance import ProblemInstance
from .rng import SplitMix64

__all__ = ["Tree", "encode_tree_string", "decode_tree_string", "ahu_canonical",
           "oracle_tree_iso", "brute_force_iso", "gen_tree_pair", "random_tree",
           "all_rooted_trees", "tree_tokens", "make_tree_pair"]


@dataclass(frozen=True)
class Tree:
    """Ordered rooted tree on nodes ``0..n-1`` with a color per node."""

    colors: tuple[int, ...]
    children: tuple[tuple[int, ...], ...]
    root: int = 0

    def __post_init__(self) -> None:
        n = len(self.colors)
        if n == 0 or len(self.children) != n:
            raise ValueError("a tree needs at least one node and a child list per node")
        seen = [False] * n
        seen[self.root] = True
        stack = [self.root]
        count = 1
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                if not 0 <= c < n or seen[c]:
                    raise ValueError("child lists do not form a tree")
                seen[c] = True
                count += 1
                stack.append(c)
        if count != n:
            raise ValueError("tree is not connected from the root")
        if any(not 1 <= c <= n for c in self.colors):
            raise ValueError("colors must lie in [1, node count]")

    @property
    def n(self) -> int:
        return len(self.colors)

    def parents(self) -> list[Optional[int]]:
        par: list[Optional[int]] = [None] * self.n
        for v, kids in enumerate(self.children):
            for c in kids:
                par[c] = v
        return par

    def depths(self) -> list[int]:
        dep = [0] * self.n
        stack = [self.root]
        while stack:
            v = stack.pop()
            for c in self.children[v]:
                dep[c] = dep[v] + 1
                stack.append(c)
        return dep

    def to_dict(self) -> dict:
        return {"root": self.root, "colors": list(self.colors),
                "children": [list(k) for k in self.children]}

    @classmethod
    def from_dict(cls, data: dict) -> "Tree":
        return cls(tuple(data["colors"]), tuple(tuple(k) for k in data["children"]),
                   int(data.get("root", 0)))

    @classmethod
    def from_parents(cls, parents: list[Optional[int]], colors=None) -> "Tree":
        n = len(parents)
        kids: list[list[int]] = [[] for _ in range(n)]
        root = None
        for v, p in enumerate(parents):
            if p is None:
                root = v
            else:
                kids[p].append(v)
        if root is None:
            raise ValueError("no root")
        colors = tuple(colors) if colors is not None else (1,) * n
        return cls(colors, tuple(tuple(k) for k in kids), root)


# string form ----------------------------------------------------------------

def encode_tree_string(t: Tree) -> str:
    """Preorder ``(color child ... child)``, children in stored order."""
    out: list[str] = []

    def walk(v: int) -> None:
        out.append("(" + str(t.colors[v]))
        for c in t.children[v]:
            walk(c)
        out.append(")")

    walk(t.root)
    return "".join(out)


def decode_tree_string(s: str) -> Tree:
    """Inverse of :func:`encode_tree_string`; nodes are numbered in preorder."""
    colors: list[int] = []
    kids: list[list[int]] = []
    pos = 0

    def node() -> int:
        nonlocal pos
        if pos >= len(s) or s[pos] != "(":
            raise ValueError(f"expected '(' at {pos}")
        pos += 1
        start = pos
        while pos < len(s) and s[pos].isdigit():
            pos += 1
        if start == pos:
            raise ValueError(f"expected a color at {start}")
        v = len(colors)
        colors.append(int(s[start:pos]))
        kids.append([])
        while pos < len(s) and s[pos] == "(":
            kids[v].append(node())
        if pos >= len(s) or s[pos] != ")":
            raise ValueError(f"expected ')' at {pos}")
        pos += 1
        return v

    node()
    if pos != len(s):
        raise ValueError("trailing characters after tree")
    return Tree(tuple(colors), tuple(tuple(k) for k in kids), 0)


def tree_tokens(t1: Tree, t2: Tree) -> list[str]:
    out: list[str] = []
    for i, t in enumerate((t1, t2)):
        if i:
            out.append("|")
        s = encode_tree_string(t)
        j = 0
        while j < len(s):
            if s[j].isdigit():
                k = j
                while k < len(s) and s[k].isdigit():
                    k += 1
                out.append(s[j:k])
                j = k
            else:
                out.append(s[j])
                j += 1
    return out


# oracles --------------------------------------------------------------------

def ahu_canonical(t: Tree) -> str:
    """Order-independent canonical string: colors in labels, sorted child codes."""
    order = []
    stack = [t.root]
    while stack:
        v = stack.pop()
        order.append(v)
        stack.extend(t.children[v])
    code: dict[int, str] = {}
    for v in reversed(order):
        code[v] = "(" + str(t.colors[v]) + "".join(sorted(code[c] for c in t.children[v])) + ")"
    return code[t.root]


def _iso(t1: Tree, t2: Tree) -> bool:
    return t1.n == t2.n and ahu_canonical(t1) == ahu_canonical(t2)


def brute_force_iso(t1: Tree, t2: Tree) -> bool:
    """Search for a root-, color- and parent-preserving bijection by backtracking."""
    if t1.n != t2.n:
        return False
    n = t1.n
    p1, p2 = t1.parents(), t2.parents()
    d1, d2 = t1.depths(), t2.depths()
    order = sorted(range(n), key=lambda v: d1[v])
    used = [False] * n
    image = [-1] * n

    def extend(k: int) -> bool:
        if k == n:
            return True
        v = order[k]
        for w in range(n):
            if used[w] or d2[w] != d1[v] or t2.colors[w] != t1.colors[v]:
                continue
            if len(t2.children[w]) != len(t1.children[v]):
                continue
            if p1[v] is None:
                if p2[w] is not None:
                    continue
            elif p2[w] != image[p1[v]]:
                continue
            used[w] = True
            image[v] = w
            if extend(k + 1):
                return True
            used[w] = False
            image[v] = -1
        return False

    return extend(0)


def oracle_tree_iso(inst: ProblemInstance) -> bool:
    t1 = Tree.from_dict(inst.payload["t1"])
    t2 = Tree.from_dict(inst.payload["t2"])
    return _iso(t1, t2)


# generation -----------------------------------------------------------------

def random_tree(n: int, rng: SplitMix64, colored: bool = False) -> Tree:
    """Random recursive tree: node i attaches to a uniform earlier node."""
    parents: list[Optional[int]] = [None] + [rng.below(i) for i in range(1, n)]
    colors = [rng.randint(1, n) for _ in range(n)] if colored else [1] * n
    return Tree.from_parents(parents, colors)


def _shuffled_copy(t: Tree, rng: SplitMix64) -> Tree:
    """Isomorphic copy: random node ids and random child order."""
    perm = rng.permutation(t.n)
    kids: list[tuple[int, ...]] = [()] * t.n
    colors = [0] * t.n
    for v in range(t.n):
        ks = [perm[c] for c in t.children[v]]
        rng.shuffle(ks)
        kids[perm[v]] = tuple(ks)
        colors[perm[v]] = t.colors[v]
    return Tree(tuple(colors), tuple(kids), perm[t.root])


def _rewired(t: Tree, rng: SplitMix64, colored: bool) -> Tree:
    par = t.parents()
    n = t.n
    colors = list(t.colors)
    if colored and rng.coin():
        colors[rng.below(n)] = rng.randint(1, n)
        return Tree.from_parents(par, colors)
    if n < 3:
        return t
    v = rng.randint(1, n - 1) if t.root == 0 else rng.choice([x for x in range(n) if x != t.root])
    # nodes in v's subtree cannot become its parent
    banned = set()
    stack = [v]
    while stack:
        x = stack.pop()
        banned.add(x)
        stack.extend(t.children[x])
    options = [x for x in range(n) if x not in banned and x != par[v]]
    if not options:
        return t
    par = list(par)
    par[v] = rng.choice(options)
    return Tree.from_parents(par, colors)


def make_tree_pair(t1: Tree, t2: Tree, seed: int = 0) -> ProblemInstance:
    inst = ProblemInstance("tree_iso", {"t1": t1.to_dict(), "t2": t2.to_dict()}, False,
                           tree_tokens(t1, t2), seed)
    inst.label = oracle_tree_iso(inst)
    return inst


def gen_tree_pair(n_nodes: int, make_isomorphic: bool, colored: bool, seed: int,
                  max_tries: int = 500) -> ProblemInstance:
    """Two rooted trees that are (or are not) isomorphic.

    Non-isomorphic pairs come from rewiring one edge (or recoloring a node)
    of a shuffled copy until the oracle confirms the difference. Raises
    ValueError when no non-isomorphic partner exists (e.g. one node).
    """
    if n_nodes < 1:
        raise ValueError("need at least one node")
    rng = SplitMix64(seed)
    t1 = random_tree(n_nodes, rng, colored)
    t2 = _shuffled_copy(t1, rng)
    if not make_isomorphic:
        for _ in range(max_tries):
            cand = _shuffled_copy(_rewired(t1, rng, colored), rng)
            if not _iso(t1, cand):
                t2 = cand
                break
        else:
            raise ValueError(f"no non-isomorphic partner found for n={n_nodes}")
    inst = make_tree_pair(t1, t2, seed)
    if inst.label != make_isomorphic:
        raise AssertionError("generator produced the wrong label")
    return inst


def all_rooted_trees(n: int) -> Iterator[Tree]:
    """Every unlabeled rooted tree on ``n`` nodes once, by level sequences."""
    if n < 1:
        return
    levels = list(range(1, n + 1))
    while True:
        parents: list[Optional[int]] = [None] * n
        last_at: dict[int, int] = {}
        for i, lv in enumerate(levels):
            if lv > 1:
                parents[i] = last_at[lv - 1]
            last_at[lv] = i
        yield Tree.from_parents(parents)
        p = max((i for i in range(n) if levels[i] > 2), default=None)
        if p is None:
            return
        q = max(i for i in range(p) if levels[i] == levels[p] - 1)
        for i in range(p, n):
            levels[i] = levels[i - (p - q)]
