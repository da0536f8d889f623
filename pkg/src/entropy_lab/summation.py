"""Two-weighted summation operators on trees and their l_p -> l_q norms.

S f(xi) = w(xi) * sum_{xi' <= xi} u(xi') f(xi'), the sum running along the
root path.  The module provides the operator itself, critical weight
schemes, a norm oracle (certified lower bound by multiplicative ascent,
certified upper bound by row-wise Hoelder), and the explicit Hardy-type
norm bounds for subtrees rooted at a given depth.

The regime is 1 < p <= q < infinity throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .hset import HProfile, validate_critical
from .trees import Tree

_TAIL_REL = 1e-12
_TAIL_CAP = 10 ** 6


def _check_pq(p: float, q: float):
    if not (1.0 < p <= q < math.inf):
        raise ValueError(f"need 1 < p <= q < inf, got p={p}, q={q}")


def _conj(p: float) -> float:
    return p / (p - 1.0)


# -- weight schemes -------------------------------------------------------


@dataclass(frozen=True)
class WeightScheme:
    """Per-depth weight pair (u_j, w_j).

    kind "power-critical":
        u_j = 2^{kappa m_* j} (m_* j + 1)^{-alpha_u}
        w_j = 2^{-kappa m_* j} (m_* j + 1)^{-alpha_w}
    kind "log-critical" (guarded logarithm L_j = ln(e + m_* j), which equals
    the +1-shifted log up to the guard and is never singular, depth 0
    included):
        u_j = 2^{kappa m_* j} (m_* j + 1)^{alpha}  L_j^{-lambda_u}
        w_j = 2^{-kappa m_* j} (m_* j + 1)^{-alpha} L_j^{-lambda_w}
    kind "explicit": arrays given directly.
    """

    kind: str
    kappa: float = 0.0
    m_star: int = 1
    alpha_u: float = 0.0
    alpha_w: float = 0.0
    alpha: float = 0.0
    lambda_u: float = 0.0
    lambda_w: float = 0.0
    u: tuple = ()
    w: tuple = ()

    def __post_init__(self):
        if self.kind not in ("power-critical", "log-critical", "explicit"):
            raise ValueError(f"unknown weight scheme kind {self.kind!r}")
        if self.kind != "explicit":
            if self.m_star < 1:
                raise ValueError("m_star must be a positive integer")
        else:
            if len(self.u) == 0 or len(self.u) != len(self.w):
                raise ValueError("explicit scheme needs equal-length u, w")
            if np.any(np.asarray(self.u) <= 0) or np.any(np.asarray(self.w) <= 0):
                raise ValueError("weights must be strictly positive")

    def params(self, h: HProfile | None = None, p=None, q=None) -> dict:
        """Parameter pack for validate_critical."""
        d = dict(p=p, q=q, kappa=self.kappa, m_star=self.m_star,
                 theta=h.theta if h else 0.0, gamma=h.gamma if h else 0.0)
        if self.kind == "power-critical":
            d.update(alpha_u=self.alpha_u, alpha_w=self.alpha_w)
        elif self.kind == "log-critical":
            d.update(lambda_u=self.lambda_u, lambda_w=self.lambda_w)
        return d


def make_weights(scheme: WeightScheme, depth: int):
    """Per-depth weight arrays (u_0..u_depth, w_0..w_depth)."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if scheme.kind == "explicit":
        if len(scheme.u) < depth + 1:
            raise ValueError("explicit scheme shorter than requested depth")
        return (np.asarray(scheme.u[:depth + 1], dtype=float),
                np.asarray(scheme.w[:depth + 1], dtype=float))
    j = np.arange(depth + 1, dtype=float)
    mj = scheme.m_star * j
    expo = np.exp2(scheme.kappa * mj)
    if scheme.kind == "power-critical":
        u = expo * (mj + 1.0) ** (-scheme.alpha_u)
        w = (mj + 1.0) ** (-scheme.alpha_w) / expo
    else:
        big_l = np.log(np.e + mj)
        u = expo * (mj + 1.0) ** scheme.alpha * big_l ** (-scheme.lambda_u)
        w = (mj + 1.0) ** (-scheme.alpha) * big_l ** (-scheme.lambda_w) / expo
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(w))
            and np.all(u > 0) and np.all(w > 0)):
        raise ValueError("weight scheme produced nonpositive or infinite values")
    return u, w


def weights_for_tree(scheme: WeightScheme, tree: Tree, start_depth: int = 0,
                     gauge: bool = True):
    """Per-vertex weights for a subtree rooted at absolute depth start_depth.

    With gauge=True the exponential factor is anchored at the start depth
    (u scaled by 2^{-kappa m_* start_depth}, w by its reciprocal).  The
    kernel w(xi) u(xi') is unchanged, so norms and entropy numbers are
    identical, but entries stay inside float64 range for deep subtrees.
    """
    if scheme.kind == "explicit":
        u_d, w_d = make_weights(scheme, start_depth + tree.height)
        return u_d[start_depth + tree.depth], w_d[start_depth + tree.depth]
    d = start_depth + tree.depth.astype(float)
    mj = scheme.m_star * d
    anchor = scheme.m_star * float(start_depth) if gauge else 0.0
    expo = np.exp2(scheme.kappa * (mj - anchor))
    if scheme.kind == "power-critical":
        u = expo * (mj + 1.0) ** (-scheme.alpha_u)
        w = (mj + 1.0) ** (-scheme.alpha_w) / expo
    else:
        big_l = np.log(np.e + mj)
        u = expo * (mj + 1.0) ** scheme.alpha * big_l ** (-scheme.lambda_u)
        w = (mj + 1.0) ** (-scheme.alpha) * big_l ** (-scheme.lambda_w) / expo
    if not (np.all(np.isfinite(u)) and np.all(np.isfinite(w))):
        raise ValueError("weights overflow; use gauge=True for deep subtrees")
    return u, w


# -- the operator ---------------------------------------------------------


def _as_columns(f, n):
    f = np.asarray(f, dtype=float)
    if f.shape[0] != n:
        raise ValueError(f"vector has leading dimension {f.shape[0]}, tree has {n}")
    return f


def _scale_rows(vec, x):
    vec = np.asarray(vec, dtype=float)
    return vec[:, None] * x if x.ndim == 2 else vec * x


def apply(tree: Tree, u, w, f):
    """g(xi) = w(xi) * prefix sum of u*f along the root path; O(|V|).

    f may be a vector or a (|V|, r) block of columns processed together.
    """
    f = _as_columns(f, tree.n)
    z = _scale_rows(u, f)
    acc = np.empty_like(z)
    acc[0] = z[0]
    for d in range(1, tree.height + 1):
        sl = tree.level_slice(d)
        acc[sl] = acc[tree.parent[sl]] + z[sl]
    return _scale_rows(w, acc)


def _scatter_add(acc, idx, vals):
    """acc[idx] += vals with duplicate indices accumulated.

    BFS construction leaves each level's parent ids sorted, in which case
    segment sums via reduceat are much faster than np.add.at.
    """
    if idx.size == 0:
        return
    if np.all(idx[1:] >= idx[:-1]):
        starts = np.flatnonzero(np.concatenate(([True], idx[1:] != idx[:-1])))
        acc[idx[starts]] += np.add.reduceat(vals, starts, axis=0)
    else:
        np.add.at(acc, idx, vals)


def apply_adjoint(tree: Tree, u, w, g):
    """(S^T g)(xi') = u(xi') * sum over descendants xi >= xi' of w(xi) g(xi)."""
    g = _as_columns(g, tree.n)
    acc = _scale_rows(w, g).copy()
    for d in range(tree.height, 0, -1):
        sl = tree.level_slice(d)
        _scatter_add(acc, tree.parent[sl], acc[sl])
    return _scale_rows(u, acc)


def operator_matrix(tree: Tree, u, w) -> np.ndarray:
    """Dense matrix of S (row xi, column xi'); for small trees and tests."""
    cols = apply(tree, u, w, np.eye(tree.n))
    return cols


# -- norm oracle ------------------------------------------------------------


@dataclass
class NormEstimate:
    lower: float
    upper: float
    witness: np.ndarray
    meta: dict = field(default_factory=dict)


def _lp_norm(x, p, axis=0):
    return np.sum(np.abs(x) ** p, axis=axis) ** (1.0 / p)


def _row_hoelder_upper(tree: Tree, u, w, p: float, q: float) -> float:
    """(sum_xi ||row_xi||_{p'}^q)^{1/q} without forming the matrix."""
    pp = _conj(p)
    cum = np.empty(tree.n)
    up = np.asarray(u, dtype=float) ** pp
    cum[0] = up[0]
    for d in range(1, tree.height + 1):
        sl = tree.level_slice(d)
        cum[sl] = cum[tree.parent[sl]] + up[sl]
    return float(np.sum(np.asarray(w) ** q * cum ** (q / pp)) ** (1.0 / q))


def _simplex_grid_upper(tree: Tree, u, w, p: float, q: float,
                        hoelder: float, max_points: int = 200_000) -> float:
    """Tightened upper bound for |V| <= 12 by sign-free grid maximization.

    For the nonnegative kernel the norm is attained at f >= 0, so f = g^{1/p}
    with g on the probability simplex.  Any such g has a grid point within
    l1 distance V/N, and |a^{1/p} - b^{1/p}|^p <= |a - b| turns that into an
    l_p mesh of (V/N)^{1/p}; the Hoelder bound is a Lipschitz constant.
    """
    from itertools import combinations

    n = tree.n
    nn = 1
    while math.comb(nn + n, n - 1) <= max_points:
        nn += 1
    mat = operator_matrix(tree, u, w)
    # compositions of nn into n parts via stars and bars, as one array
    bars = np.array(list(combinations(range(nn + n - 1), n - 1)), dtype=np.int64)
    edges = np.hstack([np.full((bars.shape[0], 1), -1), bars,
                       np.full((bars.shape[0], 1), nn + n - 1)])
    g = np.diff(edges, axis=1) - 1
    f = (g / nn) ** (1.0 / p)
    best = float(np.max(_lp_norm(mat @ f.T, q, axis=0)))
    return float(best + hoelder * (n / nn) ** (1.0 / p))


def norm_oracle(tree: Tree, u, w, p: float, q: float,
                cfg: dict | None = None) -> NormEstimate:
    """Certified two-sided estimate of ||S||_{l_p -> l_q}.

    Lower bound: multiplicative fixed-point ascent (the power-method
    generalization f <- (S^T (Sf)^{q-1})^{p'-1}), restarted from a uniform
    vector plus seeded random starts.  Every iterate is a feasible point,
    so the best Rayleigh-type ratio is a certified lower bound even when
    the ascent is not provably globally optimal.

    Upper bound: row-wise Hoelder, tightened by a simplex-grid search for
    trees with at most 12 vertices; the smaller certified value is returned.
    """
    cfg = dict(cfg or {})
    restarts = int(cfg.pop("restarts", 16))
    tol = float(cfg.pop("tol", 1e-10))
    max_iter = int(cfg.pop("max_iter", 10_000))
    seed = int(cfg.pop("seed", 0))
    if cfg:
        raise ValueError(f"unknown cfg keys: {sorted(cfg)}")
    _check_pq(p, q)
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    if u.shape != (tree.n,) or w.shape != (tree.n,):
        raise ValueError("u, w must be per-vertex arrays")
    if np.any(u <= 0) or np.any(w <= 0):
        raise ValueError("weights must be strictly positive")

    if tree.n == 1:
        v = float(u[0] * w[0])
        return NormEstimate(v, v, np.ones(1), {"iterations": 0, "seed": seed})

    pp = _conj(p)
    cols = max(1, restarts)
    f0 = np.empty((tree.n, cols))
    f0[:, 0] = 1.0
    for r in range(1, cols):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x6f7261, r]))
        f0[:, r] = np.abs(rng.standard_normal(tree.n)) + 1e-12
    f = f0 / _lp_norm(f0, p, axis=0)

    vals = np.zeros(cols)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        g = apply(tree, u, w, f)
        new_vals = _lp_norm(g, q, axis=0)
        done = np.all(np.abs(new_vals - vals) <= tol * np.maximum(new_vals, 1e-300))
        vals = new_vals
        if done:
            break
        z = apply_adjoint(tree, u, w, g ** (q - 1.0))
        f = z ** (pp - 1.0)
        f = f / _lp_norm(f, p, axis=0)

    best = int(np.argmax(vals))
    witness = f[:, best].copy()
    lower = float(_lp_norm(apply(tree, u, w, witness), q) / _lp_norm(witness, p))

    upper = _row_hoelder_upper(tree, u, w, p, q)
    if tree.n <= 12:
        upper = min(upper, _simplex_grid_upper(tree, u, w, p, q, upper))
    upper = max(upper, lower)
    return NormEstimate(lower, upper, witness,
                        {"iterations": iterations, "seed": seed,
                         "restarts": restarts})


# -- Hardy-type analytic bounds ---------------------------------------------


def hardy_bound(depth_profile, scheme: WeightScheme, h: HProfile,
                p: float, q: float, j: int) -> float:
    """Explicit norm bound for the summation operator on a subtree rooted
    at depth j, under the critical-case hypotheses.

    kappa > theta/q: the bound is sup_{s >= j} u_s w_s, which for the
    power-critical scheme in Hardy normalization (unshifted powers
    (m_* s)^{-alpha}) is (m_* j)^{1/q - 1/p} exactly.

    kappa = theta/q: sup over s >= j of
        (sum_{i=j}^s (m_* i)^{-p' alpha_u} 2^{p' kappa m_* i})^{1/p'}
        * (tail series)^{1/q},
    evaluated in gauge-anchored form (the 2^{+-kappa m_* s} factors cancel
    analytically); the tail series extends until the increment drops below
    1e-12 of the running value, capped at 1e6 terms.

    depth_profile (layer cardinalities) only widens the sup scan window to
    the profile's end; the series themselves are analytic in h.

    Raises ValueError naming the failing Assumption condition when the
    scheme is not a valid critical pack.
    """
    _check_pq(p, q)
    if j < 1:
        raise ValueError("start depth j must be >= 1 (Hardy normalization)")
    rep = validate_critical(scheme.params(h=h, p=p, q=q))
    if not rep.valid:
        failing = [c["name"] for c in rep.conditions if not c["holds"]]
        raise ValueError(
            f"scheme is not a critical pack (label {rep.label}; "
            f"failing: {failing or ['sum identity']})")

    m = scheme.m_star
    scan_hi = max(8 * j, j + 128)
    if depth_profile is not None:
        scan_hi = max(scan_hi, len(depth_profile))

    supercritical = (scheme.kind == "log-critical"
                     or scheme.kappa > h.theta / q + 1e-12)
    if supercritical:
        s = np.arange(j, scan_hi + 1, dtype=float)
        if scheme.kind == "power-critical":
            uw = (m * s) ** (-(scheme.alpha_u + scheme.alpha_w))
        else:
            uw = np.log(np.e + m * s) ** (-(scheme.lambda_u + scheme.lambda_w))
        return float(np.max(uw))

    # boundary case kappa = theta/q
    pp = _conj(p)
    au, aw = scheme.alpha_u, scheme.alpha_w
    gam, tau = h.gamma, h.tau
    kap = scheme.kappa

    # tail series sum_{i>=s} (m i)^{-q aw - gam} / tau(m i); stop once the
    # increment falls below _TAIL_REL of the running sum, cap _TAIL_CAP terms
    i = np.arange(j, j + _TAIL_CAP, dtype=float)
    terms = (m * i) ** (-q * aw - gam) / np.asarray(tau(m * i), dtype=float)
    csum = np.cumsum(terms)
    stop = np.nonzero(terms[1:] < _TAIL_REL * csum[:-1])[0]
    n_terms = int(stop[0]) + 2 if stop.size else _TAIL_CAP
    total = float(csum[n_terms - 1])
    # suffix sums for every candidate s in the scan window
    idx_hi = min(scan_hi - j, n_terms - 1)
    suffix = total - np.concatenate(([0.0], csum[:idx_hi]))

    best = 0.0
    prefix = 0.0
    decay = 2.0 ** (-pp * kap * m)
    for si, s in enumerate(range(j, j + idx_hi + 1)):
        # anchored prefix sum_{i=j}^s (m i)^{-p' au} 2^{p' kappa m (i - s)},
        # grown by one term per step of s
        prefix = prefix * decay + (m * s) ** (-pp * au)
        tail = (m * s) ** gam * float(tau(m * s)) * float(suffix[si])
        best = max(best, prefix ** (1.0 / pp) * tail ** (1.0 / q))
    return float(best)
