import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_lab import Layering, Tree, full_tree, layer_components, path_tree, random_tree


def random_parent(n, branching, rng):
    """BFS-ordered parent array with bounded branching (test helper)."""
    parent = [-1]
    depth = [0]
    counts = [0]
    frontier = [0]
    while len(parent) < n:
        nxt = []
        for v in frontier:
            room = branching - counts[v]
            if room <= 0 or len(parent) >= n:
                continue
            k = int(rng.integers(1, room + 1))
            for _ in range(min(k, n - len(parent))):
                counts[v] += 1
                counts.append(0)
                parent.append(v)
                depth.append(depth[v] + 1)
                nxt.append(len(parent) - 1)
        if not nxt:
            # forced: extend from the last vertex to keep growing
            v = len(parent) - 1
            counts[v] += 1
            counts.append(0)
            parent.append(v)
            depth.append(depth[v] + 1)
            nxt = [len(parent) - 1]
        frontier = nxt
    return np.asarray(parent, dtype=np.int64)


class TestConstruction:
    def test_single_vertex(self):
        t = Tree([-1])
        assert t.n == 1 and t.height == 0 and t.branching() == 0

    def test_path_depths(self):
        t = path_tree(5)
        assert t.height == 4
        assert t.depth.tolist() == [0, 1, 2, 3, 4]

    def test_rejects_bad_root(self):
        with pytest.raises(ValueError):
            Tree([0, 0])

    def test_rejects_forward_parent(self):
        with pytest.raises(ValueError):
            Tree([-1, 2, 1])

    def test_rejects_non_bfs(self):
        # vertex 3 at depth 1 after vertex 2 at depth 2: depths decrease
        with pytest.raises(ValueError):
            Tree([-1, 0, 1, 0])

    def test_vertex_cap(self):
        with pytest.raises(ValueError):
            Tree(np.arange(-1, 99), max_vertices=50)

    def test_full_binary_counts(self):
        t = full_tree(2, 4)
        assert t.n == 31
        assert [t.level(d).size for d in range(5)] == [1, 2, 4, 8, 16]
        assert t.branching() == 2


class TestStructureOps:
    def test_children_sorted(self):
        t = full_tree(3, 2)
        assert t.children(0).tolist() == [1, 2, 3]

    def test_descendants_at_distance_binary(self):
        t = full_tree(2, 4)
        for l in range(5):
            assert t.descendants_at_distance(0, l).size == 2 ** l

    def test_descendants_sum_over_layer(self):
        # summed over vertices of a level, card V_l equals the target level size
        t = full_tree(2, 5)
        for d in range(3):
            for l in range(1, 3):
                total = sum(t.descendants_at_distance(int(v), l).size
                            for v in t.level(d))
                assert total == t.level(d + l).size

    def test_subtree_of_path(self):
        t = path_tree(6)
        assert t.subtree(3).tolist() == [3, 4, 5]

    def test_json_roundtrip(self):
        t = full_tree(2, 3)
        u = np.linspace(1, 2, t.n)
        w = np.linspace(2, 3, t.n)
        t2, u2, w2 = Tree.from_json(t.to_json(u=u, w=w))
        assert np.array_equal(t2.parent, t.parent)
        assert np.allclose(u2, u) and np.allclose(w2, w)

    def test_json_length_mismatch(self):
        with pytest.raises(ValueError):
            Tree.from_json(json.dumps({"parent": [-1, 0], "u": [1.0]}))

    @given(st.integers(2, 120), st.integers(1, 4), st.integers(0, 10 ** 6))
    @settings(max_examples=40, deadline=None)
    def test_random_tree_edges_reproduce(self, n, b, seed):
        parent = random_parent(n, b, np.random.default_rng(seed))
        t = Tree(parent)
        # rebuild edge set from children lists
        edges = {(int(t.parent[v]), v) for v in range(1, t.n)}
        edges2 = {(v, int(c)) for v in range(t.n) for c in t.children(v)}
        assert edges == edges2
        assert t.branching() <= b or n <= 2


class TestLayering:
    def test_linear_buckets(self):
        lay = Layering("linear", m_star=1)
        js = np.arange(0, 17)
        ts = lay.layer_of_depth(js)
        assert ts.tolist() == [0, 1, 2, 2, 3, 3, 3, 3, 4, 4, 4, 4, 4, 4, 4, 4, 5]

    def test_linear_depth_range_consistent(self):
        lay = Layering("linear", m_star=1)
        for t in range(6):
            lo, hi = lay.depth_range(t)
            for j in range(lo, hi):
                assert int(lay.layer_of_depth(j)) == t

    def test_doubly_exponential_buckets(self):
        lay = Layering("doubly-exponential", m_star=1)
        assert int(lay.layer_of_depth(1)) == 0
        assert int(lay.layer_of_depth(2)) == 1
        assert int(lay.layer_of_depth(3)) == 1
        assert int(lay.layer_of_depth(4)) == 2
        assert int(lay.layer_of_depth(15)) == 2
        assert int(lay.layer_of_depth(16)) == 3
        assert int(lay.layer_of_depth(255)) == 3
        assert int(lay.layer_of_depth(256)) == 4

    def test_doubly_exponential_range(self):
        lay = Layering("doubly-exponential", m_star=1)
        assert lay.depth_range(3) == (16, 256)

    def test_m_star_scaling(self):
        lay = Layering("linear", m_star=4)
        # m_* j = 4 j; layer of j=1 is floor(log2 4)+1 = 3
        assert int(lay.layer_of_depth(1)) == 3

    def test_bad_rule(self):
        with pytest.raises(ValueError):
            Layering("cubic")


class TestLayerComponents:
    def test_path_single_component(self):
        t = path_tree(7)
        lay = Layering("linear", m_star=1)
        part = layer_components(t, lay, 2)
        assert part.n_parts() == 1
        assert part.parts[0].tolist() == [2, 3]
        part.validate(t)

    def test_binary_depth4_layer2(self):
        # components rooted at each depth-2 vertex, restricted to depths {2,3}
        t = full_tree(2, 4)
        lay = Layering("linear", m_star=1)
        part = layer_components(t, lay, 2)
        assert part.n_parts() == 4
        assert sorted(int(r) for r in part.roots) == t.level(2).tolist()
        part.validate(t)

    def test_roots_have_parent_outside(self):
        t = full_tree(3, 4)
        lay = Layering("linear", m_star=1)
        lo, hi = lay.depth_range(2)
        part = layer_components(t, lay, 2)
        for r in part.roots:
            assert lo <= int(t.depth[r]) < hi
            assert int(t.depth[t.parent[r]]) < lo

    def test_below_t0_raises(self):
        t = path_tree(4)
        lay = Layering("linear", m_star=1, t0=1)
        with pytest.raises(ValueError):
            layer_components(t, lay, 0)

    def test_empty_layer_empty_partition(self):
        t = path_tree(3)  # height 2
        lay = Layering("linear", m_star=1)
        part = layer_components(t, lay, 4)
        assert part.n_parts() == 0 and part.universe.size == 0

    @given(st.integers(2, 150), st.integers(1, 3), st.integers(0, 10 ** 6))
    @settings(max_examples=30, deadline=None)
    def test_components_cover_layer(self, n, b, seed):
        parent = random_parent(n, b, np.random.default_rng(seed))
        t = Tree(parent)
        lay = Layering("linear", m_star=1)
        tmax = int(lay.layer_of_depth(t.height))
        for tt in range(tmax + 1):
            part = layer_components(t, lay, tt)
            part.validate(t)
            lo, hi = lay.depth_range(tt)
            size = sum(t.level(d).size for d in range(lo, min(hi, t.height + 1)))
            assert part.universe.size == size


class TestRandomTree:
    def test_size_branching_and_order(self):
        for seed in range(6):
            t = random_tree(500, 3, seed)
            assert t.n == 500
            assert t.branching() <= 3
            assert np.all(np.diff(t.depth) >= 0)

    def test_deterministic(self):
        a = random_tree(200, 2, seed=9)
        b = random_tree(200, 2, seed=9)
        assert np.array_equal(a.parent, b.parent)
        assert not np.array_equal(a.parent, random_tree(200, 2, seed=10).parent)

    def test_single_vertex_and_chain(self):
        assert random_tree(1, 3, 0).n == 1
        # max_children=1 can only produce a path
        t = random_tree(40, 1, 5)
        assert t.height == 39

    def test_bad_args(self):
        with pytest.raises(ValueError):
            random_tree(0, 3, 0)
        with pytest.raises(ValueError):
            random_tree(5, 0, 0)
