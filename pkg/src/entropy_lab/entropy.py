"""Entropy-number estimators and the bound-combination calculus.

Estimators come in three kinds: certified lower bounds from point packings
(M points pairwise more than 2 eps apart defeat any covering by 2^{k-1}
eps-balls), certified upper bounds from explicit net coverings, and
heuristic values from greedy covering of sampled images.  Closed-form
reference curves for identity and diagonal embeddings (the stitched
piecewise curve in k, and the 1/phi(2^n) value for log-type weights)
provide the leaves of composite bounds; the combination rules

    e_{k+l-1}(S+T) <= e_k(S) + e_l(T)
    e_k(ST)       <= ||S|| e_k(T)
    e_{n+floor(log2 N)+1}  <=  sup-member bound + approximation error

are tracked as an explicit expression tree with exact index bookkeeping.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

_KINDS = ("certified_lower", "certified_upper", "heuristic")
_SAMPLED_K_CAP = 24
_DEFAULT_SAMPLES = 2 ** 14


@dataclass(frozen=True)
class EntropyEstimate:
    k: int
    value: float
    kind: str
    method: str
    seed: int | None = None
    wall_time_ms: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("index k must be >= 1")
        if not (self.value >= 0):
            raise ValueError("value must be nonnegative")
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}")

    def csv_row(self):
        return [self.method, self.k, repr(float(self.value)), self.kind,
                "" if self.seed is None else self.seed,
                round(self.wall_time_ms, 3)]


def estimates_to_csv(estimates, path=None) -> str:
    """CSV export (method, k, value, kind, seed, wall_time_ms)."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["method", "k", "value", "kind", "seed", "wall_time_ms"])
    for est in estimates:
        writer.writerow(est.csv_row())
    text = buf.getvalue()
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text


# -- closed-form reference curves -------------------------------------------


def _check_pq_wide(p: float, q: float):
    if not (1.0 <= p <= q):
        raise ValueError(f"need 1 <= p <= q, got p={p}, q={q}")


def schuett(nu: int, k: int, p: float, q: float) -> float:
    """Stitched reference curve for e_k(id: l_p^nu -> l_q^nu), p <= q.

    Middle branch (log(1 + nu/k) / k)^{1/p - 1/q} taken verbatim with the
    natural logarithm; the flat branch (k below log2 nu) and the
    exponential branch (k above nu) are scaled to meet it, so the curve is
    continuous in k with exact equality at both seams.
    """
    _check_pq_wide(p, q)
    if nu < 1 or k < 1:
        raise ValueError("nu and k must be >= 1")
    alpha = 1.0 / p - (0.0 if math.isinf(q) else 1.0 / q)

    def middle(kk: float) -> float:
        return (math.log(1.0 + nu / kk) / kk) ** alpha

    k_left = math.ceil(math.log2(nu)) if nu > 1 else 0
    if k <= k_left:
        return middle(k_left)
    if k <= nu:
        return middle(k)
    return middle(nu) * 2.0 ** ((nu - k) / nu)


def kuhn_value(n: int, p: float, q: float, phi) -> float:
    """1 / phi(2^n) for a nondecreasing log-type weight phi.

    phi must grow at most like ((1 + log t) / (1 + log s))^{1/p - 1/q}
    between any two arguments t >= s >= 1 up to a bounded constant; the
    condition is validated on a logarithmic grid (reported constant capped
    at 10) and requires p < q, since the exponent degenerates at p = q.
    """
    _check_pq_wide(p, q)
    if p == q:
        raise ValueError("p = q degenerates the growth exponent")
    if n < 0:
        raise ValueError("index n must be >= 0")
    alpha = 1.0 / p - (0.0 if math.isinf(q) else 1.0 / q)
    hi = max(6.0, (n + 1) * math.log10(2.0))
    ts = np.logspace(0.0, hi, 30)
    vals = np.array([float(phi(t)) for t in ts])
    if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
        raise ValueError("phi must be positive and finite on [1, 2^n]")
    if np.any(vals[1:] < vals[:-1] * (1 - 1e-12)):
        raise ValueError("phi must be nondecreasing")
    logs = 1.0 + np.log(ts)
    ratio = (vals[None, :] / vals[:, None]) / (logs[None, :] /
                                               logs[:, None]) ** alpha
    c_hat = float(np.max(np.triu(ratio)))
    if c_hat > 10.0:
        raise ValueError(
            f"phi grows too fast: grid constant {c_hat:.3g} exceeds 10")
    return 1.0 / float(phi(2.0 ** n))


def volumetric_lower(nu: int, p: float, q: float, k: int,
                     diag=None) -> EntropyEstimate:
    """Volume-comparison lower bound for a diagonal operator on l_p^nu.

    Any covering of D(B_p) by 2^{k-1} l_q-balls of radius eps satisfies
    2^{k-1} eps^nu vol(B_q) >= |det D| vol(B_p), which rearranges to the
    returned value.  Square case only.
    """
    _check_pq_wide(p, q)
    if nu < 1 or k < 1:
        raise ValueError("nu and k must be >= 1")
    if diag is not None:
        diag = np.asarray(diag, dtype=float)
        if diag.shape != (nu,):
            raise ValueError("non-square request: diag must have length nu")
        if np.any(diag == 0):
            return EntropyEstimate(k, 0.0, "certified_lower", "volumetric")
        log_det = float(np.sum(np.log(np.abs(diag))))
    else:
        log_det = 0.0

    def log_vol(r: float) -> float:
        inv = 0.0 if math.isinf(r) else 1.0 / r
        return nu * (math.log(2.0) + gammaln(1.0 + inv)) - gammaln(1.0 + nu * inv)

    log_val = (log_det + log_vol(p) - log_vol(q)) / nu \
        - (k - 1) / nu * math.log(2.0)
    return EntropyEstimate(k, math.exp(log_val), "certified_lower",
                           "volumetric")


# -- sampling and the farthest-point engine ----------------------------------


def sample_lp_sphere(nu: int, p: float, n_samples: int, seed: int,
                     tag: int = 0x6c7073) -> np.ndarray:
    """Uniform (cone measure) samples on the l_p unit sphere.

    Coordinates are drawn from the generalized Gaussian density
    proportional to exp(-|x|^p) (gamma trick) and normalized; for p = inf
    the coordinates are uniform on [-1, 1].  Counter-based generator keyed
    by (seed, tag) for reproducibility.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, tag])))
    if math.isinf(p):
        x = rng.uniform(-1.0, 1.0, (n_samples, nu))
        norms = np.max(np.abs(x), axis=1)
    else:
        mags = rng.gamma(1.0 / p, 1.0, (n_samples, nu)) ** (1.0 / p)
        signs = rng.integers(0, 2, (n_samples, nu)) * 2 - 1
        x = mags * signs
        norms = np.sum(np.abs(x) ** p, axis=1) ** (1.0 / p)
    norms[norms == 0] = 1.0
    return x / norms[:, None]


def sample_lp_ball(nu: int, p: float, n_samples: int, seed: int,
                   tag: int = 0x6c7062) -> np.ndarray:
    """Uniform samples in the l_p unit ball: cone-measure sphere points
    scaled by U^{1/nu} radial factors."""
    sphere = sample_lp_sphere(nu, p, n_samples, seed, tag=tag)
    rng = np.random.Generator(np.random.Philox(
        np.random.SeedSequence([seed, tag, 1])))
    radial = rng.uniform(0.0, 1.0, n_samples) ** (1.0 / nu)
    return sphere * radial[:, None]


def _lq_dist(points: np.ndarray, center: np.ndarray, q: float) -> np.ndarray:
    diff = np.abs(points - center)
    if math.isinf(q):
        return np.max(diff, axis=1)
    if q == 2.0:
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))
    if q == 4.0:
        diff *= diff
        return np.einsum("ij,ij->i", diff, diff) ** 0.25
    return np.sum(diff ** q, axis=1) ** (1.0 / q)


def _farthest_point_run(points: np.ndarray, q: float, n_select: int,
                        start: int):
    """Select n_select points by farthest-point traversal from `start`.

    Returns (selected indices, radii), where radii[i] is the distance of
    selection i+1 from the previous centers (nonincreasing), and the final
    covering radius can be read off a last _lq_dist pass by the caller.
    Ties pick the lowest sample index.
    """
    dist = _lq_dist(points, points[start], q)
    selected = [start]
    radii = []
    for _ in range(1, n_select):
        c = int(np.argmax(dist))
        radii.append(float(dist[c]))
        selected.append(c)
        np.minimum(dist, _lq_dist(points, points[c], q), out=dist)
    return selected, radii, dist


def packing_lower(matrix, p: float, q: float, k: int,
                  samples: int = _DEFAULT_SAMPLES, seed: int = 0,
                  _points=None) -> EntropyEstimate:
    """Certified lower bound for e_k from a farthest-point packing.

    Images of l_p-ball samples are packed greedily; M = 2^{k-1} + 1
    points pairwise >= delta apart force every covering by 2^{k-1} balls
    to use radius >= delta/2, so delta/2 is certified.  Ball rather than
    sphere samples: any image point is a valid packing witness, and in
    low dimension the interior carries separations the sphere cannot
    (dimension 1 has a two-point sphere).
    """
    matrix = np.asarray(matrix, dtype=float)
    if k < 1:
        raise ValueError("index k must be >= 1")
    if k > _SAMPLED_K_CAP:
        raise ValueError(f"k capped at {_SAMPLED_K_CAP} for sampled methods")
    method = f"packing(samples={samples})"
    m_pts = 2 ** (k - 1) + 1
    if m_pts > samples:
        return EntropyEstimate(k, 0.0, "certified_lower",
                               method + "[insufficient samples]", seed)
    if _points is None:
        x = sample_lp_ball(matrix.shape[1], p, samples, seed)
        _points = x @ matrix.T
    if not np.any(_points):
        return EntropyEstimate(k, 0.0, "certified_lower", method, seed)
    _, radii, _ = _farthest_point_run(_points, q, m_pts, start=0)
    return EntropyEstimate(k, radii[-1] / 2.0, "certified_lower", method, seed)


def packing_profile(matrix, p: float, q: float, ks,
                    samples: int = _DEFAULT_SAMPLES,
                    seed: int = 0) -> list:
    """packing_lower over many k from one farthest-point run.

    The traversal is identical for every k (it only gets truncated), so
    the results match independent packing_lower calls bit for bit.
    """
    matrix = np.asarray(matrix, dtype=float)
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("indices must be >= 1")
    if ks[-1] > _SAMPLED_K_CAP:
        raise ValueError(f"k capped at {_SAMPLED_K_CAP} for sampled methods")
    method = f"packing(samples={samples})"
    x = sample_lp_ball(matrix.shape[1], p, samples, seed)
    points = x @ matrix.T
    feasible = [k for k in ks if 2 ** (k - 1) + 1 <= samples]
    out = []
    if feasible and np.any(points):
        m_max = 2 ** (feasible[-1] - 1) + 1
        _, radii, _ = _farthest_point_run(points, q, m_max, start=0)
        for k in feasible:
            out.append(EntropyEstimate(k, radii[2 ** (k - 1) - 1] / 2.0,
                                       "certified_lower", method, seed))
    elif feasible:
        out = [EntropyEstimate(k, 0.0, "certified_lower", method, seed)
               for k in feasible]
    for k in ks:
        if 2 ** (k - 1) + 1 > samples:
            out.append(EntropyEstimate(k, 0.0, "certified_lower",
                                       method + "[insufficient samples]",
                                       seed))
    return sorted(out, key=lambda e: e.k)


def _greedy_cover_radius(points: np.ndarray, q: float, n_centers: int) -> float:
    """Covering radius of a greedy center set: first center nearest the
    centroid, the rest by farthest-point descent."""
    if n_centers >= points.shape[0]:
        return 0.0
    centroid = points.mean(axis=0)
    start = int(np.argmin(_lq_dist(points, centroid, q)))
    _, _, dist = _farthest_point_run(points, q, n_centers, start=start)
    return float(np.max(dist))


def matrix_norm_upper(matrix, p: float, q: float) -> float:
    """Row-wise Hoelder upper bound for ||A||_{l_p -> l_q}."""
    matrix = np.asarray(matrix, dtype=float)
    if p == 1.0:
        row = np.max(np.abs(matrix), axis=1)
    else:
        pp = p / (p - 1.0)
        row = np.sum(np.abs(matrix) ** pp, axis=1) ** (1.0 / pp)
    if math.isinf(q):
        return float(np.max(row)) if row.size else 0.0
    return float(np.sum(row ** q) ** (1.0 / q))


def net_upper(matrix, p: float, q: float, k: int, eta: float,
              max_net: int = 4_000_000) -> EntropyEstimate:
    """Certified upper bound for e_k via a deterministic eta-net.

    A cubic lattice of mesh 2 eta / m^{1/p} has a point within l_p
    distance eta of every point of the unit ball; its image is covered
    greedily by 2^{k-1} centers and the leftover eta ||A|| slack makes the
    radius valid for the whole ball.  Domain dimension is gated at 6.
    """
    matrix = np.asarray(matrix, dtype=float)
    m = matrix.shape[1]
    if m > 6:
        raise ValueError("net_upper is gated to domain dimension <= 6")
    if k < 1:
        raise ValueError("index k must be >= 1")
    if not (0 < eta < 10):
        raise ValueError("eta must be a small positive resolution")
    step = 2.0 * eta / m ** (1.0 / p) if not math.isinf(p) else 2.0 * eta
    half = int(math.ceil((1.0 + step) / step))
    axis = step * np.arange(-half, half + 1)
    if (2 * half + 1) ** m > max_net:
        raise ValueError("eta too small for this dimension (net too large)")
    grid = np.stack(np.meshgrid(*([axis] * m), indexing="ij"), axis=-1)
    grid = grid.reshape(-1, m)
    if math.isinf(p):
        norms = np.max(np.abs(grid), axis=1)
    else:
        norms = np.sum(np.abs(grid) ** p, axis=1) ** (1.0 / p)
    net = grid[norms <= 1.0 + eta]
    images = net @ matrix.T
    radius = _greedy_cover_radius(images, q, 2 ** (k - 1))
    value = radius + eta * matrix_norm_upper(matrix, p, q)
    return EntropyEstimate(k, value, "certified_upper", f"net(eta={eta:g})")


def greedy_cover_estimate(matrix, p: float, q: float, k: int,
                          samples: int = _DEFAULT_SAMPLES,
                          seed: int = 0) -> EntropyEstimate:
    """Heuristic: greedy 2^{k-1}-center covering radius of the image of
    sampled ball points.

    Estimates the covering radius restricted to the sample, hence labeled
    heuristic; it always dominates the packing half-separation computed
    from the same sample set.
    """
    matrix = np.asarray(matrix, dtype=float)
    if k < 1:
        raise ValueError("index k must be >= 1")
    if k > _SAMPLED_K_CAP:
        raise ValueError(f"k capped at {_SAMPLED_K_CAP} for sampled methods")
    x = sample_lp_ball(matrix.shape[1], p, samples, seed)
    points = x @ matrix.T
    radius = _greedy_cover_radius(points, q, 2 ** (k - 1))
    return EntropyEstimate(k, radius, "heuristic",
                           f"greedy-cover(samples={samples})", seed)


def cover_profile(matrix, p: float, q: float, ks,
                  samples: int = _DEFAULT_SAMPLES, seed: int = 0) -> list:
    """greedy_cover_estimate over many k from one farthest-point run.

    The greedy center sequence is nested, so the covering radius with
    2^{k-1} centers for every requested k falls out of a single traversal;
    the values match independent greedy_cover_estimate calls bit for bit.
    """
    matrix = np.asarray(matrix, dtype=float)
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("indices must be >= 1")
    if ks[-1] > _SAMPLED_K_CAP:
        raise ValueError(f"k capped at {_SAMPLED_K_CAP} for sampled methods")
    method = f"greedy-cover(samples={samples})"
    x = sample_lp_ball(matrix.shape[1], p, samples, seed)
    points = x @ matrix.T
    n_pts = points.shape[0]
    feasible = [k for k in ks if 2 ** (k - 1) < n_pts]
    values = {k: 0.0 for k in ks}
    if feasible:
        centroid = points.mean(axis=0)
        start = int(np.argmin(_lq_dist(points, centroid, q)))
        run_to = 2 ** (feasible[-1] - 1) + 1
        _, radii, _ = _farthest_point_run(points, q, run_to, start=start)
        for k in feasible:
            values[k] = radii[2 ** (k - 1) - 1]
    return [EntropyEstimate(k, values[k], "heuristic", method, seed)
            for k in ks]


# -- combination calculus ----------------------------------------------------


def _require_upper(est: EntropyEstimate, rule: str):
    if est.kind == "certified_lower":
        raise ValueError(f"{rule} combines upper bounds, got a lower bound")


def combine_sum(a: EntropyEstimate, b: EntropyEstimate) -> EntropyEstimate:
    """e_{k+l-1}(S+T) <= e_k(S) + e_l(T)."""
    _require_upper(a, "combine_sum")
    _require_upper(b, "combine_sum")
    kind = ("certified_upper"
            if a.kind == b.kind == "certified_upper" else "heuristic")
    return EntropyEstimate(a.k + b.k - 1, a.value + b.value, kind,
                           f"sum[{a.method} + {b.method}]")


def combine_scale(norm: float, est: EntropyEstimate) -> EntropyEstimate:
    """e_k(ST) <= ||S|| e_k(T)."""
    if not (norm >= 0):
        raise ValueError("operator norm must be nonnegative")
    _require_upper(est, "combine_scale")
    return EntropyEstimate(est.k, norm * est.value, est.kind,
                           f"scale[{norm:g} * {est.method}]", est.seed)


def lifshits_combine(n: int, family_size: int, per_member,
                     approx_error: float) -> EntropyEstimate:
    """Selection bound over a family of size N:
    e_{n + floor(log2 N) + 1} <= (per-member bound at index n) + error."""
    if family_size < 1:
        raise ValueError("family_size must be >= 1")
    if not (approx_error >= 0):
        raise ValueError("approximation error must be nonnegative")
    if isinstance(per_member, EntropyEstimate):
        _require_upper(per_member, "lifshits_combine")
        if per_member.k != n:
            raise ValueError(
                f"per-member bound is at index {per_member.k}, not n={n}")
        value, kind = per_member.value, per_member.kind
    else:
        value, kind = float(per_member), "certified_upper"
        if value < 0:
            raise ValueError("per-member bound must be nonnegative")
    index = n + int(math.floor(math.log2(family_size))) + 1
    return EntropyEstimate(index, value + approx_error, kind,
                           f"lifshits[N={family_size}]")


# -- expression trees ---------------------------------------------------------


@dataclass(frozen=True)
class BoundExpr:
    """Expression tree over entropy estimates and norm constants.

    ops: "leaf" (estimate), "norm" (scalar), "schuett" / "kuhn" (reference
    leaves, value precomputed), "sum", "scale", "lifshits".  evaluate() is
    deterministic and routes every combination through the calculus
    functions, so index bookkeeping is exact by construction.
    """

    op: str
    children: tuple = ()
    payload: dict = field(default_factory=dict)

    @staticmethod
    def leaf(est: EntropyEstimate) -> "BoundExpr":
        return BoundExpr("leaf", payload={"estimate": est})

    @staticmethod
    def norm(value: float) -> "BoundExpr":
        if not (value >= 0):
            raise ValueError("norm constant must be nonnegative")
        return BoundExpr("norm", payload={"value": float(value)})

    @staticmethod
    def schuett_leaf(nu: int, k: int, p: float, q: float) -> "BoundExpr":
        return BoundExpr("schuett", payload={
            "nu": int(nu), "k": int(k), "p": p, "q": q,
            "value": schuett(nu, k, p, q)})

    @staticmethod
    def kuhn_leaf(n: int, p: float, q: float, phi) -> "BoundExpr":
        return BoundExpr("kuhn", payload={
            "n": int(n), "p": p, "q": q, "value": kuhn_value(n, p, q, phi)})

    @staticmethod
    def sum_of(*exprs: "BoundExpr") -> "BoundExpr":
        if not exprs:
            raise ValueError("sum_of needs at least one term")
        out = exprs[0]
        for e in exprs[1:]:
            out = BoundExpr("sum", (out, e))
        return out

    @staticmethod
    def scaled(norm_expr: "BoundExpr", entropy_expr: "BoundExpr") -> "BoundExpr":
        if norm_expr.op != "norm":
            raise ValueError("first child of scale must be a norm constant")
        return BoundExpr("scale", (norm_expr, entropy_expr))

    @staticmethod
    def lifshits(n: int, family_size: int, per_member: "BoundExpr",
                 approx_error: float) -> "BoundExpr":
        return BoundExpr("lifshits", (per_member,), {
            "n": int(n), "family_size": int(family_size),
            "approx_error": float(approx_error)})

    def evaluate(self) -> EntropyEstimate:
        if self.op == "leaf":
            return self.payload["estimate"]
        if self.op == "norm":
            raise ValueError("a bare norm constant is not an entropy bound")
        if self.op == "schuett":
            pl = self.payload
            return EntropyEstimate(pl["k"], pl["value"], "certified_upper",
                                   f"schuett(nu={pl['nu']},stitched)")
        if self.op == "kuhn":
            pl = self.payload
            return EntropyEstimate(max(pl["n"], 1), pl["value"],
                                   "certified_upper", "kuhn(1/phi(2^n))")
        if self.op == "sum":
            a, b = self.children
            return combine_sum(a.evaluate(), b.evaluate())
        if self.op == "scale":
            norm_node, child = self.children
            return combine_scale(norm_node.payload["value"], child.evaluate())
        if self.op == "lifshits":
            (child,) = self.children
            pl = self.payload
            return lifshits_combine(pl["n"], pl["family_size"],
                                    child.evaluate(), pl["approx_error"])
        raise ValueError(f"unknown op {self.op!r}")

    def to_dict(self) -> dict:
        pl = {}
        for key, val in self.payload.items():
            if isinstance(val, EntropyEstimate):
                pl[key] = {"k": val.k, "value": val.value, "kind": val.kind,
                           "method": val.method, "seed": val.seed}
            else:
                pl[key] = val
        return {"op": self.op, "payload": pl,
                "children": [c.to_dict() for c in self.children]}
