"""Connectivity on disjoint unions of cycles."""
from __future__ import annotations

from collections import deque

from .instance import ProblemInstance
from .rng import SplitMix64

__all__ = ["gen_connectivity", "make_connectivity", "oracle_connectivity",
           "bfs_connected", "connectivity_tokens", "UnionFind"]


class UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}
        self.rank = {x: 0 for x in items}

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1


def _vertices(payload) -> list[int]:
    return list(range(1, payload["n"] + 1))


def oracle_connectivity(inst: ProblemInstance) -> bool:
    """Union-find over the edge list."""
    pl = inst.payload
    uf = UnionFind(_vertices(pl))
    for u, v in pl["edges"]:
        uf.union(u, v)
    u, v = pl["query"]
    return uf.find(u) == uf.find(v)


def bfs_connected(inst: ProblemInstance) -> bool:
    """Breadth-first search from the first query vertex."""
    pl = inst.payload
    adj: dict[int, list[int]] = {x: [] for x in _vertices(pl)}
    for u, v in pl["edges"]:
        adj[u].append(v)
        adj[v].append(u)
    s, t = pl["query"]
    seen = {s}
    todo = deque([s])
    while todo:
        x = todo.popleft()
        if x == t:
            return True
        for y in adj[x]:
            if y not in seen:
                seen.add(y)
                todo.append(y)
    return t in seen


def connectivity_tokens(edges, query) -> list[str]:
    out: list[str] = []
    for u, v in edges:
        out += ["edge", str(u), str(v)]
    out += ["query", str(query[0]), str(query[1])]
    return out


def make_connectivity(n: int, edges, query, seed: int = 0) -> ProblemInstance:
    """Instance from explicit edges; checks the every-degree-is-2 invariant."""
    degree = {x: 0 for x in range(1, n + 1)}
    for u, v in edges:
        if u == v or u not in degree or v not in degree:
            raise ValueError(f"bad edge ({u}, {v})")
        degree[u] += 1
        degree[v] += 1
    if any(k != 2 for k in degree.values()):
        raise ValueError("every vertex must have degree 2 (disjoint union of cycles)")
    if query[0] not in degree or query[1] not in degree:
        raise ValueError("query vertices out of range")
    edges = [list(e) for e in edges]
    inst = ProblemInstance("connectivity", {"n": n, "edges": edges, "query": list(query)},
                           False, connectivity_tokens(edges, query), seed)
    inst.label = oracle_connectivity(inst)
    return inst


def _cycle_lengths(rng: SplitMix64, n: int) -> list[int]:
    out = []
    left = n
    while left:
        if left < 6:
            size = left
        else:
            size = rng.randint(3, left - 3)
        out.append(size)
        left -= size
    return out


def gen_connectivity(n_vertices: int, seed: int) -> ProblemInstance:
    """Random disjoint union of cycles (each of length >= 3) plus a query pair.

    When there are at least two cycles the query lies within one cycle with
    probability 1/2.
    """
    if n_vertices < 3:
        raise ValueError("need at least 3 vertices")
    rng = SplitMix64(seed)
    order = [x + 1 for x in rng.permutation(n_vertices)]
    cycles = []
    pos = 0
    for size in _cycle_lengths(rng, n_vertices):
        cycles.append(order[pos:pos + size])
        pos += size
    edges = [(c[i], c[(i + 1) % len(c)]) for c in cycles for i in range(len(c))]
    if len(cycles) == 1 or rng.coin():
        cyc = rng.choice(cycles)
        i = rng.below(len(cyc))
        j = rng.below(len(cyc) - 1)
        j += j >= i
        query = (cyc[i], cyc[j])
    else:
        a = rng.below(len(cycles))
        b = rng.below(len(cycles) - 1)
        b += b >= a
        query = (rng.choice(cycles[a]), rng.choice(cycles[b]))
    return make_connectivity(n_vertices, edges, query, seed)
