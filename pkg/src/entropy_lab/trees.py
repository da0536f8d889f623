"""Finite rooted trees with depth layerings.

Vertices are dense integers in BFS order: the root is 0, ``parent[i] < i``
for every non-root vertex, and depths are non-decreasing along ids.  This
makes every depth level a contiguous id range, so layer slicing is O(1)
and iteration order is reproducible.

Trees are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

MAX_VERTICES_DEFAULT = 1 << 22


class Tree:
    """A finite rooted tree given by a parent array in BFS order.

    Parameters
    ----------
    parent : sequence of int
        ``parent[0] == -1`` for the root; ``0 <= parent[i] < i`` otherwise.
        Vertex depths must be non-decreasing in id (BFS order).
    max_vertices : int, optional
        Construction cap; experiments stay in memory at desk scale.

    Attributes
    ----------
    parent : ndarray of int64
    depth : ndarray of int32
        ``depth[v]`` = edge distance from the root.
    height : int
        Maximum depth.
    """

    __slots__ = ("parent", "depth", "height", "n", "_level_start",
                 "_child_ptr", "_child_ids")

    def __init__(self, parent, max_vertices: int = MAX_VERTICES_DEFAULT):
        parent = np.asarray(parent, dtype=np.int64)
        if parent.ndim != 1 or parent.size == 0:
            raise ValueError("parent must be a non-empty 1-d array")
        n = parent.size
        if n > max_vertices:
            raise ValueError(f"tree has {n} vertices, cap is {max_vertices}")
        if parent[0] != -1:
            raise ValueError("parent[0] must be -1 (root)")
        if n > 1:
            body = parent[1:]
            if np.any(body < 0) or np.any(body >= np.arange(1, n)):
                raise ValueError("need 0 <= parent[i] < i for non-root vertices")
        self.parent = parent
        self.n = int(n)

        # pointer doubling: after round r, ptr is the 2^r-th ancestor and
        # d counts the ancestors covered, converging to the depth
        d = (parent >= 0).astype(np.int64)
        ptr = parent.copy()
        while np.any(ptr > 0):
            hop = ptr >= 0
            d[hop] += d[ptr[hop]]
            nxt = np.full(n, -1, dtype=np.int64)
            nxt[hop] = ptr[ptr[hop]]
            ptr = nxt
        depth = d.astype(np.int32)
        if np.any(np.diff(depth) < 0):
            raise ValueError("vertex ids must be in BFS order (depths non-decreasing)")
        self.depth = depth
        self.height = int(depth[-1])

        # level d occupies ids [_level_start[d], _level_start[d+1])
        counts = np.bincount(depth, minlength=self.height + 1)
        self._level_start = np.concatenate(([0], np.cumsum(counts)))

        # children in CSR form, sorted by id within each parent
        order = np.argsort(parent[1:], kind="stable") + 1 if n > 1 else np.array([], dtype=np.int64)
        self._child_ids = order.astype(np.int64)
        cc = np.bincount(parent[1:], minlength=n) if n > 1 else np.zeros(n, dtype=np.int64)
        self._child_ptr = np.concatenate(([0], np.cumsum(cc)))

        parent.setflags(write=False)
        depth.setflags(write=False)

    # -- basic structure ------------------------------------------------

    def children(self, v: int) -> np.ndarray:
        return self._child_ids[self._child_ptr[v]:self._child_ptr[v + 1]]

    def n_children(self) -> np.ndarray:
        return np.diff(self._child_ptr)

    def branching(self) -> int:
        """max_v card V_1(v), the branching bound k."""
        return int(self.n_children().max()) if self.n > 1 else 0

    def level_slice(self, d: int) -> slice:
        """Ids of the vertices at depth d, as a contiguous slice."""
        if d < 0 or d > self.height:
            return slice(0, 0)
        return slice(int(self._level_start[d]), int(self._level_start[d + 1]))

    def level(self, d: int) -> np.ndarray:
        s = self.level_slice(d)
        return np.arange(s.start, s.stop, dtype=np.int64)

    def descendants_at_distance(self, v: int, l: int) -> np.ndarray:
        """The set V_l(v): descendants of v at edge distance exactly l."""
        if l < 0:
            raise ValueError("distance must be >= 0")
        frontier = np.array([v], dtype=np.int64)
        for _ in range(l):
            if frontier.size == 0:
                break
            pieces = [self._child_ids[self._child_ptr[u]:self._child_ptr[u + 1]]
                      for u in frontier]
            frontier = np.concatenate(pieces) if pieces else np.array([], dtype=np.int64)
        return np.sort(frontier)

    def subtree(self, v: int) -> np.ndarray:
        """All descendants of v, v included, in increasing id order."""
        out = [np.array([v], dtype=np.int64)]
        frontier = out[0]
        while frontier.size:
            pieces = [self._child_ids[self._child_ptr[u]:self._child_ptr[u + 1]]
                      for u in frontier]
            frontier = np.concatenate(pieces) if pieces else np.array([], dtype=np.int64)
            if frontier.size:
                out.append(frontier)
        return np.sort(np.concatenate(out))

    # -- serialization ---------------------------------------------------

    def to_json(self, u=None, w=None) -> str:
        doc = {"parent": self.parent.tolist()}
        if u is not None:
            doc["u"] = np.asarray(u, dtype=float).tolist()
        if w is not None:
            doc["w"] = np.asarray(w, dtype=float).tolist()
        return json.dumps(doc)

    @staticmethod
    def from_json(text: str):
        """Parse the JSON tree format; returns (tree, u, w) with u, w optional."""
        doc = json.loads(text)
        tree = Tree(doc["parent"])
        u = np.asarray(doc["u"], dtype=float) if "u" in doc else None
        w = np.asarray(doc["w"], dtype=float) if "w" in doc else None
        for name, arr in (("u", u), ("w", w)):
            if arr is not None and arr.size != tree.n:
                raise ValueError(f"{name} has {arr.size} entries for {tree.n} vertices")
        return tree, u, w

    def __repr__(self):
        return f"Tree(n={self.n}, height={self.height})"


def build_tree(parent, max_vertices: int = MAX_VERTICES_DEFAULT) -> Tree:
    return Tree(parent, max_vertices=max_vertices)


def path_tree(n: int) -> Tree:
    return Tree(np.arange(-1, n - 1))


def full_tree(arity: int, height: int) -> Tree:
    """Complete rooted tree where every vertex has `arity` children."""
    sizes = [arity ** d for d in range(height + 1)]
    parent = [-1]
    first_of_level = [0]
    for d in range(1, height + 1):
        first_of_level.append(len(parent))
        prev_first = first_of_level[d - 1]
        for i in range(sizes[d]):
            parent.append(prev_first + i // arity)
    return Tree(np.array(parent, dtype=np.int64))


def random_tree(n: int, max_children: int, seed: int) -> Tree:
    """Random tree on n vertices with branching at most max_children.

    Grown level by level so the ids come out in BFS order: every frontier
    vertex draws a child count uniformly from {0, ..., max_children}, the
    last draw of a level is forced to 1 when the whole level came up empty
    but vertices remain, and the level is truncated once the budget is hit.
    """
    if n < 1:
        raise ValueError("need at least one vertex")
    if max_children < 1:
        raise ValueError("max_children must be >= 1")
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0x74726e64]))
    parent = np.full(n, -1, dtype=np.int64)
    size = 1
    frontier = np.array([0], dtype=np.int64)
    while size < n:
        counts = rng.integers(0, max_children + 1, size=frontier.size)
        if counts.sum() == 0:
            counts[-1] = 1
        room = n - size
        csum = np.cumsum(counts)
        over = csum > room
        if over.any():
            first = int(np.argmax(over))
            counts[first] = room - (csum[first] - counts[first])
            counts[first + 1:] = 0
        total = int(counts.sum())
        kids = np.arange(size, size + total, dtype=np.int64)
        parent[kids] = np.repeat(frontier, counts)
        frontier = kids
        size += total
    return Tree(parent)


# -- layerings ----------------------------------------------------------


@dataclass(frozen=True)
class Layering:
    """Grouping of depth levels into layers Gamma_t.

    rule "linear": layer t collects depths with 2^(t-1) <= m_* j < 2^t
    (power-type profiles); rule "doubly-exponential": 2^(2^(t-1)) <= m_* j
    < 2^(2^t) (log-type profiles).  The root j = 0 sits in layer t0 = 0,
    as do the depths below the first breakpoint.
    """

    rule: str
    m_star: int = 1
    t0: int = 0

    def __post_init__(self):
        if self.rule not in ("linear", "doubly-exponential"):
            raise ValueError(f"unknown layering rule {self.rule!r}")
        if self.m_star < 1:
            raise ValueError("m_star must be a positive integer")

    def layer_of_depth(self, j) -> np.ndarray:
        j = np.asarray(j, dtype=np.int64)
        mj = self.m_star * j
        t = np.zeros_like(mj)
        pos = mj >= 1
        if self.rule == "linear":
            t[pos] = np.floor(np.log2(mj[pos])).astype(np.int64) + 1
        else:
            big = mj >= 2
            lg = np.zeros_like(mj, dtype=float)
            lg[big] = np.log2(mj[big].astype(float))
            t[big] = np.floor(np.log2(lg[big])).astype(np.int64) + 1
        return np.maximum(t, self.t0)

    def depth_range(self, t: int) -> tuple[int, int]:
        """Half-open depth interval [j_lo, j_hi) forming layer t."""
        if t < self.t0:
            raise ValueError(f"layer {t} below t0={self.t0}")
        if self.rule == "linear":
            lo_m = 0 if t == 0 else 2 ** (t - 1)
            hi_m = 2 ** t
        else:
            lo_m = 0 if t == 0 else 2 ** (2 ** (t - 1))
            hi_m = 2 ** (2 ** t)
        # depths j with lo_m <= m_* j < hi_m
        lo = -(-lo_m // self.m_star)
        hi = -(-hi_m // self.m_star)
        return int(lo), int(hi)


@dataclass
class SubtreePartition:
    """A partition of a vertex set into connected subtrees.

    parts[i] is an increasing id array whose minimum is roots[i]; the parts
    are disjoint and cover `universe` (all vertices for tree partitions, a
    single layer's vertices for layer components).
    """

    roots: np.ndarray
    parts: list
    universe: np.ndarray
    meta: dict = field(default_factory=dict)

    def n_parts(self) -> int:
        return len(self.parts)

    def validate(self, tree: Tree) -> None:
        seen = np.concatenate(self.parts) if self.parts else np.array([], dtype=np.int64)
        if seen.size != np.unique(seen).size:
            raise AssertionError("parts overlap")
        if not np.array_equal(np.sort(seen), np.sort(self.universe)):
            raise AssertionError("parts do not cover the universe")
        for r, part in zip(self.roots, self.parts):
            members = set(int(x) for x in part)
            if int(r) not in members:
                raise AssertionError("root not inside its part")
            for v in part:
                v = int(v)
                if v != int(r) and int(tree.parent[v]) not in members:
                    raise AssertionError(
                        f"part rooted at {int(r)} is not connected at vertex {v}")

    def to_json(self) -> str:
        return json.dumps([
            {"root": int(r), "vertices": p.tolist()}
            for r, p in zip(self.roots, self.parts)
        ])


def layer_components(tree: Tree, layering: Layering, t: int) -> SubtreePartition:
    """Connected components of a layer, each rooted in V_min(Gamma_t).

    The components of layer t are the maximal connected subtrees of the
    induced forest; their roots are exactly the layer vertices whose parent
    lies outside the layer.
    """
    if t < layering.t0:
        raise ValueError(f"layer {t} below t0={layering.t0}")
    lo, hi = layering.depth_range(t)
    lo_s = tree.level_slice(min(lo, tree.height + 1)).start if lo <= tree.height else tree.n
    hi_s = tree.level_slice(hi - 1).stop if hi - 1 <= tree.height else tree.n
    universe = np.arange(lo_s, hi_s, dtype=np.int64)
    if universe.size == 0:
        return SubtreePartition(np.array([], dtype=np.int64), [], universe)

    comp = np.full(tree.n, -1, dtype=np.int64)
    roots = []
    groups: list[list[int]] = []
    for v in universe:
        p = int(tree.parent[v])
        if v != 0 and p >= lo_s and comp[p] >= 0:
            c = comp[p]
        else:
            c = len(roots)
            roots.append(int(v))
        comp[v] = c
        if c == len(groups):
            groups.append([])
        groups[c].append(int(v))
    parts = [np.asarray(g, dtype=np.int64) for g in groups]
    return SubtreePartition(np.asarray(roots, dtype=np.int64), parts, universe)
