"""Assembled entropy-number certificates for weighted summation operators.

The operator is cut along the depth layering: everything up to the scale
where the cumulative dimension first reaches n forms one head block with
budget n, each following layer gets the geometrically decaying budgets
k_{t,l} = ceil(n 2^{-eps (t - t_* + l)}), and all layers past the scale
where the dimension reaches 2^n are swept into an analytic norm tail.
Each kept block contributes ||block||_{q->q} times the reference curve of
the identity embedding in its dimension; the blocks are folded with the
additive combination rule, so the final index K(n) is exact and satisfies
K(n) - 1 <= C(eps) n with C(eps) = 1 + (1 - 2^{-eps})^{-2}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .entropy import BoundExpr, EntropyEstimate
from .hset import HProfile, schedule_from_profile, validate_critical
from .summation import WeightScheme, apply, hardy_bound, weights_for_tree
from .trees import Layering, Tree


def _block_norm_upper(tree: Tree, u, w, q: float, lo: int, hi: int) -> float:
    """Row-wise Hoelder bound for the l_q -> l_q norm of the summation
    kernel restricted to input depths in [lo, hi)."""
    qq = q / (q - 1.0)
    mask = (tree.depth >= lo) & (tree.depth < hi)
    uq = np.zeros(tree.n)
    uq[mask] = u[mask] ** qq
    cum = apply(tree, uq, np.ones(tree.n), np.ones(tree.n))
    live = cum > 0
    if not np.any(live):
        return 0.0
    total = np.sum(w[live] ** q * cum[live] ** (q / qq))
    return float(total ** (1.0 / q))


@dataclass
class Certificate:
    """Evaluated bound B(n) at index K(n), with its expression tree.

    budgets holds the raw (t, l, k_{t,l}) triples actually spent; their
    (k - 1)-sum equals k_total - 1 exactly.  c_budget is the achieved
    (k_total - 1)/n, c_guarantee the analytic ceiling it must stay under.
    """

    bound: EntropyEstimate
    k_total: int
    expr: BoundExpr
    budgets: list
    c_budget: float
    c_guarantee: float
    meta: dict

    def to_json(self) -> dict:
        return {
            "bound_value": self.bound.value,
            "k_total": self.k_total,
            "c_budget": self.c_budget,
            "c_guarantee": self.c_guarantee,
            "budgets": [list(b) for b in self.budgets],
            "meta": self.meta,
            "expr": self.expr.to_dict(),
        }


def entropy_certificate(tree: Tree, scheme: WeightScheme, h: HProfile,
                        n: int, p: float, q: float,
                        eps: float = 0.1) -> Certificate:
    """Certified upper bound B(n) for e_{K(n)} of the truncated operator.

    Requires a scheme/profile pair passing the critical validation and
    n >= 2 large enough that the tail scale t_**(n) lies beyond the first
    layer.  The tail term is the analytic norm bound for the subtree below
    the truncation depth, or 0 when the tree does not reach it.
    """
    if not (1.0 < p <= q < math.inf):
        raise ValueError(f"need 1 < p <= q < inf, got p={p}, q={q}")
    if eps <= 0:
        raise ValueError("eps must be positive")
    rep = validate_critical(scheme.params(h=h, p=p, q=q))
    if not rep.valid:
        failing = [c["name"] for c in rep.conditions if not c["holds"]]
        raise ValueError(
            f"scheme is not a critical pack (label {rep.label}; "
            f"failing: {failing})")
    if n < 2:
        raise ValueError("n too small: need n >= 2")
    sched = schedule_from_profile(h, m_star=scheme.m_star)
    t_star = sched.t_star(n)
    t_stop = sched.t_star_star(n)
    if t_stop < 1:
        raise ValueError(
            f"n too small: t_**({n}) = 0, nothing is kept past layer t0")

    rule = "linear" if h.theta > 0 else "doubly-exponential"
    lay = Layering(rule, m_star=scheme.m_star)
    j_tail = lay.depth_range(t_stop)[0]
    u, w = weights_for_tree(scheme, tree)
    depth_counts = np.bincount(tree.depth, minlength=tree.height + 1)

    head_t = min(t_star, t_stop - 1)
    blocks = [(head_t, 0, lay.depth_range(head_t)[1])]
    for t in range(head_t + 1, t_stop):
        lo, hi = lay.depth_range(t)
        blocks.append((t, lo, hi))

    leaves = []
    budgets = []
    layer_meta = []
    for t, lo, hi in blocks:
        hi_clip = min(hi, tree.height + 1)
        if lo >= hi_clip:
            continue
        dim = int(depth_counts[lo:hi_clip].sum())
        if dim == 0:
            continue
        if t == head_t:
            spent = [(t, 0, n)]
        else:
            spent = []
            l = 0
            while True:
                k_tl = math.ceil(n * 2.0 ** (-eps * (t - t_star + l)))
                spent.append((t, l, k_tl))
                l += 1
                if math.ceil(n * 2.0 ** (-eps * (t - t_star + l))) < 2:
                    break
        k_block = 1 + sum(k - 1 for _, _, k in spent)
        budgets.extend(spent)
        norm_t = _block_norm_upper(tree, u, w, q, lo, hi_clip)
        leaves.append(BoundExpr.scaled(
            BoundExpr.norm(norm_t),
            BoundExpr.schuett_leaf(dim, k_block, p, q)))
        layer_meta.append({"t": t, "lo": lo, "hi": hi_clip, "dim": dim,
                           "k_budget": k_block, "norm": norm_t})

    tail_value = 0.0
    if tree.height >= j_tail:
        tail_value = hardy_bound(None, scheme, h, p, q, j_tail)
        leaves.append(BoundExpr.leaf(EntropyEstimate(
            1, tail_value, "certified_upper", f"hardy-tail(j={j_tail})")))
    expr = BoundExpr.sum_of(*leaves)
    bound = expr.evaluate()

    spent_total = sum(k - 1 for _, _, k in budgets)
    if bound.k - 1 != spent_total:
        raise AssertionError("index bookkeeping drifted from the budget list")
    c_budget = spent_total / n
    c_guarantee = 1.0 + (1.0 - 2.0 ** (-eps)) ** -2
    if c_budget > c_guarantee + 1e-9:
        raise AssertionError("budget identity violated")
    meta = {"n": n, "p": p, "q": q, "eps": eps, "t_star": t_star,
            "t_stop": t_stop, "j_tail": j_tail, "tail_value": tail_value,
            "layers": layer_meta}
    return Certificate(bound, bound.k, expr, budgets, c_budget,
                       c_guarantee, meta)
