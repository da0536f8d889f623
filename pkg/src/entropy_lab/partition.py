"""Balanced partitions of weighted trees and dyadic refinement families.

A tree with an additive nonnegative vertex weight is split into at most
(k+2) n connected subtrees such that every part with two or more vertices
carries at most (k+2)/n of the total weight (k bounds the branching).
Stacking such partitions at dyadically coarsening granularities, with each
level a merge of the previous one, gives a laminar family whose
cross-level intersection counts stay bounded.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .trees import SubtreePartition, Tree


@dataclass(frozen=True)
class VertexWeight:
    """Additive vertex weight: Phi(W) = sum of phi over W, all phi >= 0."""

    phi: np.ndarray

    def __post_init__(self):
        phi = np.asarray(self.phi, dtype=float)
        if phi.ndim != 1:
            raise ValueError("phi must be a flat per-vertex array")
        if not np.all(np.isfinite(phi)) or np.any(phi < 0):
            raise ValueError("phi values must be finite and >= 0")
        object.__setattr__(self, "phi", phi)

    @classmethod
    def uniform(cls, n: int) -> "VertexWeight":
        return cls(np.ones(n))

    @classmethod
    def from_map(cls, n: int, mapping: dict) -> "VertexWeight":
        phi = np.zeros(n)
        for v, val in mapping.items():
            phi[int(v)] = val
        return cls(phi)

    def total(self) -> float:
        return float(self.phi.sum())

    def __len__(self) -> int:
        return self.phi.shape[0]


def _check_inputs(tree: Tree, weights: VertexWeight, n: int, k: int):
    if n < 1 or int(n) != n:
        raise ValueError("granularity n must be a positive integer")
    if k < 1 or int(k) != k:
        raise ValueError("branching bound k must be a positive integer")
    if len(weights) != tree.n:
        raise ValueError("weight array length does not match the tree")
    counts = tree.n_children()
    worst = int(np.argmax(counts))
    if counts[worst] > k:
        raise ValueError(
            f"branching bound violated: vertex {worst} has "
            f"{int(counts[worst])} children > k={k}")
    if weights.total() <= 0:
        raise ValueError("all-zero weights: total must be positive")


def balanced_partition(tree: Tree, weights: VertexWeight, n: int,
                       k: int) -> SubtreePartition:
    """Split the tree into at most (k+2) n connected parts, every
    multi-vertex part carrying weight at most (k+2) Phi(total) / n.

    Post-order sweep with threshold tau = Phi(total)/n: each vertex
    accumulates its own phi plus the still-pending weight of its children.
    When the accumulated mass first reaches tau (ties cut), the vertex
    closes a part consisting of itself and all pending child bundles; a
    vertex whose own phi already exceeds tau instead becomes a singleton
    part and releases each pending child bundle as a part of its own.
    Every such event retires at least tau of mass, so there are at most n
    events, each producing at most k+1 parts.
    """
    _check_inputs(tree, weights, n, k)
    phi = weights.phi
    total = weights.total()
    tau = total / n
    if n == 1:
        return SubtreePartition(
            np.array([0], dtype=np.int64),
            [np.arange(tree.n, dtype=np.int64)],
            np.arange(tree.n, dtype=np.int64),
            {"C": float(k + 2), "threshold": tau, "n": 1, "k": int(k)})

    marked = np.zeros(tree.n, dtype=bool)
    res = np.zeros(tree.n)
    for v in range(tree.n - 1, -1, -1):
        pend = [c for c in tree.children(v) if not marked[c]]
        mass = phi[v] + sum(res[c] for c in pend)
        if mass >= tau:
            marked[v] = True
            if phi[v] > tau:
                # heavy singleton: pending bundles become parts of their own
                for c in pend:
                    marked[c] = True
        else:
            res[v] = mass
    marked[0] = True  # the leftover bundle at the root is the final part

    # every vertex belongs to the part closed at its nearest marked ancestor
    top = np.zeros(tree.n, dtype=np.int64)
    for v in range(1, tree.n):
        top[v] = v if marked[v] else top[tree.parent[v]]

    roots = np.flatnonzero(marked)
    order = np.argsort(top, kind="stable")
    bounds = np.searchsorted(top[order], roots)
    parts = [np.sort(order[a:b]) for a, b in
             zip(bounds, np.append(bounds[1:], tree.n))]
    part = SubtreePartition(roots, parts, np.arange(tree.n, dtype=np.int64),
                            {"C": float(k + 2), "threshold": tau,
                             "n": int(n), "k": int(k)})
    return part


# -- dyadic families ---------------------------------------------------------


@dataclass
class PartitionFamily:
    """Laminar stack of partitions, level l holding roughly 2^{-l} n0 parts.

    levels[0] is the finest partition; each later level merges groups of
    parts of the previous one, so containment across levels is structural.
    meta reports the achieved constants: "C" (part-count factor), "cross"
    (largest merge group, which bounds how many level-l parts a level-(l+1)
    part meets), and whether the group cap was relaxed at the final step.
    """

    levels: list
    n0: int
    meta: dict = field(default_factory=dict)

    def n_levels(self) -> int:
        return len(self.levels)

    def validate(self, tree: Tree) -> None:
        big_c = self.meta.get("C", math.inf)
        cross = self.meta.get("cross", math.inf)
        for l, level in enumerate(self.levels):
            level.validate(tree)
            if level.n_parts() > big_c * self.n0 * 2.0 ** (-l) + 1e-9:
                raise AssertionError(
                    f"level {l} has {level.n_parts()} parts, above the "
                    f"reported C * 2^-l * n0")
        top = self.levels[-1]
        if top.n_parts() != 1 or top.parts[0].size != tree.n:
            raise AssertionError("top level is not the whole tree")
        for l in range(len(self.levels) - 1):
            fine, coarse = self.levels[l], self.levels[l + 1]
            owner = np.full(tree.n, -1, dtype=np.int64)
            for i, p in enumerate(coarse.parts):
                owner[p] = i
            hits = np.zeros(coarse.n_parts(), dtype=np.int64)
            for p in fine.parts:
                owners = np.unique(owner[p])
                if owners.size != 1:
                    raise AssertionError(
                        f"level {l} part crosses level {l + 1} parts")
                hits[owners[0]] += 1
            if hits.max() > cross:
                raise AssertionError(
                    f"a level-{l + 1} part meets {int(hits.max())} level-{l} "
                    f"parts, above the reported cross constant")

    def to_json(self) -> str:
        return json.dumps({
            "n0": int(self.n0),
            "meta": {k: (v if not isinstance(v, float) else float(v))
                     for k, v in self.meta.items()},
            "levels": [json.loads(level.to_json()) for level in self.levels],
        })


def _coarsen_once(tree: Tree, prev: SubtreePartition, cap: int):
    """Merge groups of adjacent parts (connected in the quotient tree).

    Post-order greedy: a part with pending children absorbs up to cap-1 of
    them into one group.  Returns (groups as lists of prev-part indices,
    largest group size).
    """
    n_parts = prev.n_parts()
    part_of = np.full(tree.n, -1, dtype=np.int64)
    for i, p in enumerate(prev.parts):
        part_of[p] = i
    q_parent = np.full(n_parts, -1, dtype=np.int64)
    for i, r in enumerate(prev.roots):
        if int(r) != 0:
            q_parent[i] = part_of[tree.parent[int(r)]]
    q_children = [[] for _ in range(n_parts)]
    for i, qp in enumerate(q_parent):
        if qp >= 0:
            q_children[qp].append(i)

    root_depth = tree.depth[prev.roots]
    order = np.argsort(-root_depth, kind="stable")
    group_of = np.full(n_parts, -1, dtype=np.int64)
    groups = []
    for i in order:
        pend = [c for c in q_children[i] if group_of[c] < 0]
        if not pend:
            continue
        take = pend[:cap - 1]
        gid = len(groups)
        groups.append([int(i)] + [int(c) for c in take])
        group_of[i] = gid
        for c in take:
            group_of[c] = gid
    for i in range(n_parts):
        if group_of[i] < 0:
            groups.append([i])
    return groups, max(len(g) for g in groups)


def _merge_level(tree: Tree, prev: SubtreePartition, groups) -> SubtreePartition:
    roots = []
    parts = []
    for g in groups:
        verts = np.sort(np.concatenate([prev.parts[i] for i in g]))
        roots.append(int(verts[0]))
        parts.append(verts)
    order = np.argsort(roots)
    return SubtreePartition(np.asarray(roots, dtype=np.int64)[order],
                            [parts[i] for i in order],
                            prev.universe, {})


def dyadic_family(tree: Tree, weights: VertexWeight, n0: int,
                  k: int) -> PartitionFamily:
    """Laminar family of partitions at granularities n0, n0/2, ..., 1.

    Level 0 is balanced_partition(tree, weights, n0, k); level l+1 merges
    groups of at most k+2 adjacent level-l parts.  The final level must be
    the whole tree; if the capped merge cannot reach a single part there
    (quotients with huge hubs), the last step merges everything and the
    relaxation is reported in the metadata.
    """
    _check_inputs(tree, weights, n0, k)
    base = balanced_partition(tree, weights, n0, k)
    levels = [base]
    n_levels = int(math.floor(math.log2(n0))) if n0 > 1 else 0
    cap = k + 2
    cross = 1
    relaxed = False
    for l in range(1, n_levels + 1):
        prev = levels[-1]
        groups, gmax = _coarsen_once(tree, prev, cap)
        if l == n_levels and len(groups) > 1:
            # the top level must be the whole tree; merging everything at
            # the last step is a cap relaxation only when the group is big
            groups = [list(range(prev.n_parts()))]
            gmax = prev.n_parts()
            relaxed = gmax > cap
        levels.append(_merge_level(tree, prev, groups))
        cross = max(cross, gmax)

    achieved = max(
        level.n_parts() / (n0 * 2.0 ** (-l)) for l, level in enumerate(levels))
    big_c = max(float(k + 2), float(math.ceil(achieved)))
    for l, level in enumerate(levels):
        level.meta.update({"level": l, "count": level.n_parts()})
    fam = PartitionFamily(levels, int(n0),
                          {"C": big_c, "cross": int(cross), "k": int(k),
                           "relaxed": bool(relaxed)})
    return fam
