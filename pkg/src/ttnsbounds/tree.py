"""Rooted tree graphs with per-vertex local dimensions.

Vertices are labelled ``1..N``. In canonical form the root is ``N`` and labels
decrease with growing graph distance from the root, so that every child has a
smaller label than its parent. Edge ``i`` (``1 <= i < N``) connects vertex
``i`` to its parent and is identified with that child vertex.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import CycleDetected, Disconnected, DuplicateEdge, EdgeOutOfRange, TtnsError


@dataclass(frozen=True)
class TreeGraph:
    n: int
    root: int
    parent: dict[int, int]
    children: dict[int, tuple[int, ...]]
    dims: tuple[int, ...]
    # labeling[old - 1] = new label; identity when built directly
    labeling: tuple[int, ...] = field(default=(), compare=False)

    def dim(self, v: int) -> int:
        return self.dims[v - 1]

    @property
    def vertices(self) -> range:
        return range(1, self.n + 1)

    @property
    def edges(self) -> range:
        """Edge ids, i.e. all non-root vertices in ascending order."""
        return range(1, self.n)

    def depth(self, v: int) -> int:
        d = 0
        while v != self.root:
            v = self.parent[v]
            d += 1
        return d

    def edge_list(self) -> list[tuple[int, int]]:
        return [(self.parent[i], i) for i in self.edges]

    def subsystem_dim(self, vertices: Iterable[int]) -> int:
        return int(np.prod([self.dim(v) for v in vertices], dtype=np.int64))

    def available_dim(self, edge: int) -> int:
        """min of the Hilbert-space dimensions on both sides of ``edge``."""
        left = branch(self, edge)
        right = complement(self, left)
        return min(self.subsystem_dim(left), self.subsystem_dim(right))

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "dims": list(self.dims),
            "edges": [list(e) for e in self.edge_list()],
            "root": self.root,
            "labeling": list(self.labeling or range(1, self.n + 1)),
        }


def _bfs_dist(adj: dict[int, list[int]], start: int) -> dict[int, int]:
    dist = {start: 0}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                queue.append(w)
    return dist


def _find_cycle(n: int, edges: Sequence[tuple[int, int]]) -> list[int] | None:
    """Return the vertices of some cycle, or None if the edge set is a forest."""
    parent = list(range(n + 1))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    adj: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            # path a..b in the forest built so far closes the cycle
            prev = {a: None}
            queue = deque([a])
            while queue:
                v = queue.popleft()
                for w in adj[v]:
                    if w not in prev:
                        prev[w] = v
                        queue.append(w)
            path = [b]
            while path[-1] != a:
                path.append(prev[path[-1]])
            return sorted(path)
        parent[ra] = rb
        adj[a].append(b)
        adj[b].append(a)
    return None


def _center(adj: dict[int, list[int]]) -> int:
    best, best_ecc = None, None
    for v in sorted(adj):
        ecc = max(_bfs_dist(adj, v).values())
        if best_ecc is None or ecc < best_ecc:
            best, best_ecc = v, ecc
    return best


def from_edge_list(
    edges: Sequence[Sequence[int]],
    dims: Sequence[int],
    root_hint: int | None = None,
) -> tuple[TreeGraph, dict[int, int]]:
    """Build a canonical tree from undirected edges on labels ``1..N``.

    Returns the tree and the old-to-new label map. Without ``root_hint`` the
    root is a graph center (lowest label on ties). Equal-distance vertices keep
    their original relative order.
    """
    n = len(dims)
    if n < 1:
        raise TtnsError("a tree needs at least one vertex")
    if any(int(d) < 1 for d in dims):
        raise TtnsError(f"local dimensions must be >= 1, got {list(dims)}")
    pairs: list[tuple[int, int]] = []
    seen: set[frozenset] = set()
    for e in edges:
        a, b = int(e[0]), int(e[1])
        for v in (a, b):
            if not 1 <= v <= n:
                raise EdgeOutOfRange(f"edge ({a}, {b}) names vertex {v} outside 1..{n}")
        if a == b:
            raise CycleDetected(f"self-loop at vertex {a}")
        key = frozenset((a, b))
        if key in seen:
            raise DuplicateEdge(f"edge ({a}, {b}) appears more than once")
        seen.add(key)
        pairs.append((a, b))

    cycle = _find_cycle(n, pairs)
    if cycle is not None:
        raise CycleDetected(f"cycle through vertices {cycle}")

    adj: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for a, b in pairs:
        adj[a].append(b)
        adj[b].append(a)
    reached = _bfs_dist(adj, 1)
    if len(reached) != n:
        missing = sorted(set(adj) - set(reached))
        raise Disconnected(f"vertices {missing} are not connected to vertex 1")

    if root_hint is None:
        root = _center(adj)
    else:
        root = int(root_hint)
        if not 1 <= root <= n:
            raise EdgeOutOfRange(f"root_hint {root} outside 1..{n}")

    dist = _bfs_dist(adj, root)
    order = sorted(range(1, n + 1), key=lambda v: (-dist[v], v))
    new = {old: k + 1 for k, old in enumerate(order)}

    parent: dict[int, int] = {}
    for a, b in pairs:
        if dist[a] < dist[b]:
            a, b = b, a
        # a is farther from the root, so b is its parent
        parent[new[a]] = new[b]
    children: dict[int, list[int]] = {v: [] for v in range(1, n + 1)}
    for c, p in parent.items():
        children[p].append(c)
    tree = TreeGraph(
        n=n,
        root=n,
        parent=dict(sorted(parent.items())),
        children={v: tuple(sorted(cs)) for v, cs in children.items()},
        dims=tuple(int(dims[old - 1]) for old in order),
        labeling=tuple(new[v] for v in range(1, n + 1)),
    )
    return tree, new


def canonicalize(tree: TreeGraph) -> tuple[TreeGraph, dict[int, int]]:
    """Re-canonicalize keeping the current root; identity on canonical trees."""
    return from_edge_list(tree.edge_list(), tree.dims, root_hint=tree.root)


def branch(tree: TreeGraph, edge: int) -> list[int]:
    """Vertex ``edge`` and all its descendants, ascending."""
    if not 1 <= edge < tree.n:
        raise EdgeOutOfRange(f"edge {edge} outside 1..{tree.n - 1}")
    out = []
    stack = [edge]
    while stack:
        v = stack.pop()
        out.append(v)
        stack.extend(tree.children[v])
    return sorted(out)


def complement(tree: TreeGraph, part: Iterable[int]) -> list[int]:
    part = set(part)
    return [v for v in tree.vertices if v not in part]


def is_linear(tree: TreeGraph) -> bool:
    return all(len(cs) <= 1 for cs in tree.children.values())


def chain(dims: Sequence[int]) -> TreeGraph:
    """Linear tree rooted at its last site: vertex ``i > 1`` has child ``i - 1``."""
    n = len(dims)
    edges = [(i, i + 1) for i in range(1, n)]
    tree, _ = from_edge_list(edges, dims, root_hint=n)
    return tree


def cayley_tree(n: int, z: int = 3, d: int = 2) -> TreeGraph:
    """First ``n`` vertices of a Bethe lattice with coordination ``z``, filled breadth first."""
    edges = []
    queue = deque([1])
    nxt = 2
    while nxt <= n:
        v = queue.popleft()
        n_children = z if v == 1 else z - 1
        for _ in range(n_children):
            if nxt > n:
                break
            edges.append((v, nxt))
            queue.append(nxt)
            nxt += 1
    tree, _ = from_edge_list(edges, [d] * n, root_hint=1)
    return tree


def random_tree(n: int, rng: np.random.Generator, dims: Sequence[int] | None = None,
                root_hint: int | None = None) -> TreeGraph:
    """Random labelled tree by random attachment followed by a label shuffle."""
    dims = [2] * n if dims is None else list(dims)
    perm = rng.permutation(n) + 1
    edges = [(int(perm[k]), int(perm[rng.integers(k)])) for k in range(1, n)]
    tree, _ = from_edge_list(edges, dims, root_hint=root_hint)
    return tree


def tree_from_dict(data: dict) -> TreeGraph:
    dims = [int(d) for d in data["dims"]]
    if "n" in data and int(data["n"]) != len(dims):
        raise TtnsError(f"'n' = {data['n']} but {len(dims)} dims given")
    tree, _ = from_edge_list([tuple(e) for e in data.get("edges", [])], dims, data.get("root"))
    return tree


def load_tree(path: str | Path) -> TreeGraph:
    with open(path) as fh:
        return tree_from_dict(json.load(fh))


def save_tree(tree: TreeGraph, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(tree.to_dict(), fh, indent=1, sort_keys=True)
