import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from entropy_lab.hset import (
    HProfile,
    TauFn,
    check_hset_census,
    generate_hset_tree,
    h_eval,
    h_level_target,
    schedule,
    schedule_from_profile,
    slowly_varying_check,
    validate_critical,
)


def bfs_census(tree, v, l):
    """Independent descendant count: walk parent pointers upward."""
    count = 0
    dv = int(tree.depth[v])
    for w in range(tree.n):
        if int(tree.depth[w]) != dv + l:
            continue
        a = w
        for _ in range(l):
            a = int(tree.parent[a])
        if a == v:
            count += 1
    return count


class TestHEval:
    def test_lipschitz_manifold(self):
        for k in (1, 2, 3):
            h = HProfile(theta=float(k))
            assert h_eval(h, 0.5) == pytest.approx(0.5 ** k, rel=1e-14)

    def test_koch(self):
        h = HProfile(theta=math.log(4) / math.log(3))
        assert h_eval(h, 1.0 / 3.0) == pytest.approx(0.25, rel=1e-12)

    def test_flat_profile(self):
        h = HProfile(theta=0.0, gamma=0.0)
        ts = np.linspace(1e-9, 1.0, 50)
        assert np.allclose(h_eval(h, ts), 1.0)

    def test_domain(self):
        h = HProfile(theta=1.0)
        with pytest.raises(ValueError):
            h_eval(h, 0.0)
        with pytest.raises(ValueError):
            h_eval(h, 1.5)

    def test_log_factor_no_singularity_at_one(self):
        h = HProfile(theta=0.0, gamma=-1.0)
        assert np.isfinite(h_eval(h, 1.0)) and h_eval(h, 1.0) > 0

    def test_catalog_enforced(self):
        with pytest.raises(ValueError):
            HProfile(theta=1.0, tau=(lambda x: x))
        with pytest.raises(ValueError):
            TauFn("cubic")


class TestGenerate:
    def test_binary_exact(self):
        h = HProfile(theta=1.0)
        t = generate_hset_tree(h, m_star=1, depth=6, seed=3)
        assert t.n == 127
        assert np.all(t.n_children()[: 63] == 2)
        for l in range(7):
            assert t.level(l).size == 2 ** l
        # per-vertex: card V_l(xi) = 2^l exactly
        rng = np.random.default_rng(0)
        for _ in range(20):
            v = int(rng.integers(0, 63))
            l = int(rng.integers(1, 6 - t.depth[v] + 1))
            assert t.descendants_at_distance(v, l).size == 2 ** l

    def test_depth_zero(self):
        t = generate_hset_tree(HProfile(theta=1.0), 1, 0, seed=0)
        assert t.n == 1

    def test_log_profile_layer_sizes(self):
        # theta=0, gamma=-1: level sizes track ln(e+2^j)/ln(e+1) ~ m_* j
        h = HProfile(theta=0.0, gamma=-1.0)
        depth = 48
        t = generate_hset_tree(h, m_star=1, depth=depth, seed=11)
        targets = h_level_target(h, 1, np.arange(depth + 1))
        for j in range(depth + 1):
            assert abs(t.level(j).size - targets[j]) <= 2.0
        # grows roughly linearly in depth
        assert 0.3 * depth <= t.level(depth).size <= 2.0 * depth

    def test_census_two_sided(self):
        h = HProfile(theta=0.0, gamma=-1.0, c3=4.0)
        t = generate_hset_tree(h, m_star=1, depth=40, seed=5)
        rep = check_hset_census(t, h, 1, seed=7, max_samples=300)
        assert rep["n_checked"] == 300
        assert rep["c_hat"] <= h.c3

    def test_census_binary_is_tight(self):
        h = HProfile(theta=1.0)
        t = generate_hset_tree(h, 1, 8, seed=0)
        rep = check_hset_census(t, h, 1, seed=1, max_samples=100)
        assert rep["c_hat"] == pytest.approx(1.0, abs=1e-9)

    def test_determinism(self):
        h = HProfile(theta=0.0, gamma=-1.0)
        a = generate_hset_tree(h, 1, 30, seed=42)
        b = generate_hset_tree(h, 1, 30, seed=42)
        assert np.array_equal(a.parent, b.parent)

    def test_infeasible_profile(self):
        # gamma > 0 with theta = 0 makes the target layer shrink
        h = HProfile(theta=0.0, gamma=0.5)
        with pytest.raises(ValueError, match="infeasible"):
            generate_hset_tree(h, 1, 10, seed=0)

    def test_telescoping(self):
        h = HProfile(theta=0.0, gamma=-1.0)
        t = generate_hset_tree(h, 1, 24, seed=9)
        # exhaustive census constant
        c_hat = 1.0
        for v in range(t.n):
            dv = int(t.depth[v])
            for l in range(1, t.height - dv + 1):
                card = t.descendants_at_distance(v, l).size
                tgt = float(h_level_target(h, 1, l, dv))
                c_hat = max(c_hat, card / tgt, tgt / card)
        rng = np.random.default_rng(2)
        for _ in range(25):
            v = int(rng.integers(0, t.level_slice(8).stop))
            j = int(t.depth[v])
            j1 = int(rng.integers(j + 1, 20))
            j2 = int(rng.integers(j1 + 1, 25))
            mid = t.descendants_at_distance(v, j1 - j)
            far = t.descendants_at_distance(v, j2 - j).size
            per_mid = [t.descendants_at_distance(int(m), j2 - j1).size for m in mid]
            prod = mid.size * max(per_mid)
            assert far == sum(per_mid)  # exact tree identity
            assert prod / c_hat ** 2 <= far <= prod

    def test_sampled_vertex_census_matches_oracle(self):
        h = HProfile(theta=0.0, gamma=-1.0)
        t = generate_hset_tree(h, 1, 14, seed=4)
        rng = np.random.default_rng(1)
        for _ in range(10):
            v = int(rng.integers(0, t.n))
            l = int(rng.integers(0, t.height - t.depth[v] + 1))
            assert t.descendants_at_distance(v, l).size == bfs_census(t, v, l)


class TestSchedule:
    def test_doubling_example(self):
        sch = schedule(1.0, lambda lx: 0.0, 1.0, 16)
        assert sch.t_star_n == 2
        assert sch.t_star_star_n == 4

    def test_n2(self):
        sch = schedule(1.0, lambda lx: 0.0, 1.0, 2)
        assert sch.t_star_n == 0
        assert sch.t_star_star_n == 1

    def test_two_t_star_tracks_log(self):
        sch = schedule(1.0, lambda lx: 0.0, 1.0, 4)
        lo, hi = np.inf, 0.0
        for n in np.unique(np.logspace(math.log10(4), 6, 60).astype(int)):
            r = 2.0 ** sch.t_star(int(n)) / math.log2(n)
            lo, hi = min(lo, r), max(hi, r)
        assert 0.5 <= lo and hi <= 2.0

    @given(st.floats(0.25, 4.0), st.integers(2, 10 ** 6))
    @settings(max_examples=50, deadline=None)
    def test_minimality(self, gs, n):
        sch = schedule(gs, lambda lx: 0.0, 1.0, n)
        t1, t2 = sch.t_star_n, sch.t_star_star_n
        assert sch.nu_bar_log2(t1) >= math.log2(n)
        if t1 > 0:
            assert sch.nu_bar_log2(t1 - 1) < math.log2(n)
        assert sch.nu_bar_log2(t2) >= n
        if t2 > 0:
            assert sch.nu_bar_log2(t2 - 1) < n

    def test_m_t(self):
        sch = schedule(1.0, lambda lx: 0.0, 1.0, 16)
        assert sch.m_t(3) == 8

    def test_small_n_rejected(self):
        sch = schedule(1.0, lambda lx: 0.0, 1.0, 16)
        with pytest.raises(ValueError):
            sch.t_star(1)

    def test_from_profile_power(self):
        sch = schedule_from_profile(HProfile(theta=1.0), c3=1.0)
        assert sch.t_star(16) == 2 and sch.t_star_star(16) == 4

    def test_from_profile_log(self):
        sch = schedule_from_profile(HProfile(theta=0.0, gamma=-1.0), c3=1.0)
        # nu_bar_log2(t) = 2 * 2^t
        assert sch.t_star_star(10) == 3


class TestSlowlyVarying:
    def test_const_passes_all_eps(self):
        for eps in (1e-3, 0.1, 1.0):
            rep = slowly_varying_check(TauFn("const"), eps)
            assert rep["pass"] and rep["worst_ratio"] == pytest.approx(1.0)

    def test_log_passes(self):
        rep = slowly_varying_check(TauFn("log-power", nu=1.0), 0.1)
        assert rep["pass"]

    def test_linear_fails(self):
        rep = slowly_varying_check(lambda t: np.asarray(t, dtype=float), 0.1)
        assert not rep["pass"]
        assert rep["worst_ratio"] > 1e3

    def test_eps_positive(self):
        with pytest.raises(ValueError):
            slowly_varying_check(TauFn("const"), 0.0)


class TestValidateCritical:
    def test_power_supercritical(self):
        rep = validate_critical(dict(p=2, q=4, theta=1.0, gamma=0.0, kappa=1.0,
                                     alpha_u=0.125, alpha_w=0.125, m_star=1))
        assert rep.label == "critical-power" and rep.valid

    def test_log_critical(self):
        rep = validate_critical(dict(p=2, q=4, theta=0.0, gamma=-1.0, kappa=1.0,
                                     lambda_u=0.125, lambda_w=0.125, m_star=1))
        assert rep.label == "critical-log" and rep.valid

    def test_boundary_kappa_strictness(self):
        # kappa = theta/q with alpha_w = (1-gamma)/q exactly: invalid
        p, q, theta, gamma = 2.0, 4.0, 1.0, 0.0
        aw = (1.0 - gamma) / q
        rep = validate_critical(dict(p=p, q=q, theta=theta, gamma=gamma,
                                     kappa=theta / q, alpha_u=1.0 / p - aw,
                                     alpha_w=aw, m_star=1))
        assert rep.label == "invalid"

    def test_boundary_kappa_valid(self):
        p, q, theta, gamma = 2.0, 4.0, 1.0, 0.0
        aw = 0.3  # > (1-gamma)/q = 0.25
        rep = validate_critical(dict(p=p, q=q, theta=theta, gamma=gamma,
                                     kappa=theta / q, alpha_u=1.0 / p - aw,
                                     alpha_w=aw, m_star=1))
        assert rep.label == "critical-power"

    def test_non_critical_sum(self):
        rep = validate_critical(dict(p=2, q=4, theta=1.0, gamma=0.0, kappa=1.0,
                                     alpha_u=0.5, alpha_w=0.125, m_star=1))
        assert rep.label == "non-critical"

    def test_kappa_below_theta_over_q(self):
        rep = validate_critical(dict(p=2, q=4, theta=1.0, gamma=0.0, kappa=0.1,
                                     alpha_u=0.125, alpha_w=0.125, m_star=1))
        assert rep.label == "invalid"

    def test_p_above_q_invalid(self):
        rep = validate_critical(dict(p=4, q=2, theta=1.0, gamma=0.0, kappa=1.0,
                                     alpha_u=0.125, alpha_w=0.125, m_star=1))
        assert rep.label == "invalid"

    def test_report_carries_conditions(self):
        rep = validate_critical(dict(p=2, q=4, theta=0.0, gamma=1.0, kappa=1.0,
                                     lambda_u=0.125, lambda_w=0.125, m_star=1))
        assert rep.label == "invalid"
        names = [c["name"] for c in rep.conditions if not c["holds"]]
        assert "gamma <= 0" in names
