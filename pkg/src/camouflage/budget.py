"""Budget-constrained camouflage within a single time step.

Attacker j aims its object at appearance y_j and spends b_j; it succeeds
with probability min(b_j / C_j, 1) where C_j = d(x_j, y_j) + epsilon, and a
failed attempt leaves the truthful appearance. For fixed targets the
expected post-attack value is multilinear in the success probabilities
p_j, which live in the polytope {p in [0,1]^m : sum_j C_j p_j <= B}.

Exact solution for m <= 2: if the budget is slack, moving any fractional
coordinate in its non-increasing direction never hurts, so some optimum has
every coordinate at 0 or 1 or lies on the budget plane. On that plane with
two fractional coordinates the objective is a quadratic along the edge,
whose stationary point is checked explicitly. For m = 3 the two-dimensional
face is searched numerically.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .scheme import CamouflageScheme

VERTEX_LIMIT = 3
_TOL = 1e-12


@dataclass(frozen=True)
class BudgetModel:
    budget: float
    epsilon: float = 0.5

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.budget < 0:
            raise ValueError("budget must be non-negative")

    def cost(self, obj, appearance) -> float:
        return obj.cost_distance(appearance) + self.epsilon

    def success_probability(self, spend: float, cost: float) -> float:
        return min(spend / cost, 1.0)


def saturation_budget(scheme: CamouflageScheme, model: BudgetModel) -> float:
    """Budget above which every target combination succeeds surely."""
    return sum(max(model.cost(o, y) for y in o.appearances) for o in scheme.objects)


@dataclass(frozen=True)
class BudgetDecision:
    targets: tuple
    spend: tuple[float, ...]
    probabilities: tuple[float, ...]
    value: float


@dataclass
class LayerSolution:
    """Per pre-attack state: targets (object-domain indices), p and value."""

    targets: np.ndarray  # (N, m) int
    probs: np.ndarray  # (N, m)
    spend: np.ndarray  # (N, m)
    value: np.ndarray  # (N,)


def _masks(k: int) -> np.ndarray:
    return np.array(list(itertools.product((0, 1), repeat=k)), dtype=bool).reshape(2**k, k)


def _weights(p: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Outcome probabilities; p has shape (..., k), result (..., 2**k)."""
    p = p[..., None, :]
    return np.where(masks, p, 1.0 - p).prod(axis=-1)


class _Assignment:
    def __init__(self, targets, truth, dims, costs):
        self.targets = targets
        self.active = [j for j, (y, x) in enumerate(zip(targets, truth)) if y != x]
        self.costs = np.array([costs[j][targets[j]] for j in self.active])
        k = len(self.active)
        self.masks = _masks(k)
        idx = []
        for mask in self.masks:
            app = list(truth)
            for bit, j in zip(mask, self.active):
                if bit:
                    app[j] = targets[j]
            idx.append(np.ravel_multi_index(app, dims))
        self.columns = np.array(idx)

    def full_probs(self, p_active: np.ndarray, m: int) -> np.ndarray:
        out = np.zeros(p_active.shape[:-1] + (m,))
        out[..., self.active] = p_active
        return out


def _fixed_points(costs: np.ndarray, B: float) -> list[np.ndarray]:
    """Points with every coordinate in {0,1} or a single budget-tight one."""
    k = len(costs)
    pts = []
    for free in [None] + list(range(k)):
        others = [j for j in range(k) if j != free]
        for bits in itertools.product((0.0, 1.0), repeat=len(others)):
            p = np.zeros(k)
            p[others] = bits
            used = float(costs[others] @ np.array(bits)) if others else 0.0
            if free is None:
                if used <= B + 1e-9:
                    pts.append(p)
            else:
                q = (B - used) / costs[free]
                if 0.0 < q < 1.0:
                    p[free] = q
                    pts.append(p)
    return pts


def _edge_candidates(vals, costs, B, masks):
    """Stationary points on budget-tight edges with two fractional coordinates."""
    k = len(costs)
    out = []
    for a, b in itertools.combinations(range(k), 2):
        others = [j for j in range(k) if j not in (a, b)]
        for bits in itertools.product((0.0, 1.0), repeat=len(others)):
            R = B - (float(costs[others] @ np.array(bits)) if others else 0.0)
            lo = max(0.0, (R - costs[b]) / costs[a])
            hi = min(1.0, R / costs[a])
            if hi - lo <= 1e-12:
                continue

            def point(pa):
                pa = np.asarray(pa, dtype=float)
                p = np.zeros(pa.shape + (k,))
                p[..., others] = bits
                p[..., a] = pa
                p[..., b] = (R - costs[a] * pa) / costs[b]
                return p

            xs = np.array([lo, 0.5 * (lo + hi), hi])
            f = np.einsum("nw,xw->nx", vals, _weights(point(xs), masks))
            # exact quadratic through three points
            h = 0.5 * (hi - lo)
            alpha = (f[:, 0] - 2 * f[:, 1] + f[:, 2]) / (2 * h * h)
            beta = (f[:, 2] - f[:, 0]) / (2 * h)
            with np.errstate(divide="ignore", invalid="ignore"):
                star = np.where(alpha > 0, xs[1] - beta / (2 * alpha), xs[1])
            star = np.clip(star, lo, hi)
            p = point(star)
            value = np.einsum("nw,nw->n", vals, _weights(p, masks))
            out.append((p, value))
    return out


def _face_candidates(vals, costs, B, masks):
    """Numerical search on the budget plane with three fractional coordinates."""
    if len(costs) != 3 or B >= costs.sum() or B <= 0:
        return []
    N = vals.shape[0]
    best_p = np.zeros((N, 3))
    best_v = np.full(N, np.inf)
    cons = ({"type": "eq", "fun": lambda p: costs @ p - B},)
    starts = [np.full(3, B / costs.sum())] + [
        np.clip(np.eye(3)[j] * B / costs[j], 0, 1) for j in range(3)
    ]
    for n in range(N):
        fun = lambda p, v=vals[n]: float(v @ _weights(p, masks))
        for x0 in starts:
            res = minimize(fun, x0, bounds=[(0, 1)] * 3, constraints=cons, method="SLSQP")
            if res.success and res.fun < best_v[n]:
                best_v[n], best_p[n] = res.fun, res.x
    return [(best_p, np.where(np.isfinite(best_v), best_v, np.inf))]


def _grid_points(costs: np.ndarray, B: float, resolution: int) -> np.ndarray:
    k = len(costs)
    if k == 0:
        return np.zeros((1, 0))
    steps = np.arange(resolution + 1)
    grid = np.array(list(itertools.product(steps, repeat=k)))
    grid = grid[grid.sum(axis=1) <= resolution]
    spend = grid * (B / resolution)
    return np.minimum(spend / costs, 1.0)


def solve_layer(
    post: np.ndarray,
    scheme: CamouflageScheme,
    model: BudgetModel,
    method: str = "vertex",
    resolution: int = 100,
) -> LayerSolution:
    """Solve the within-step problem for every pre-attack state at once.

    ``post`` has shape (N, K): post-attack values for N pre-attack states and
    K appearance configurations in enumeration order.
    """
    m = scheme.num_objects
    if method == "vertex" and m > VERTEX_LIMIT:
        raise ValueError(
            f"{m} attackers exceeds the exact-solver limit {VERTEX_LIMIT}; use method='grid'"
        )
    if method not in ("vertex", "grid"):
        raise ValueError(f"unknown method {method!r}")
    post = np.asarray(post, dtype=float)
    N = post.shape[0]
    dims = tuple(len(o.appearances) for o in scheme.objects)
    truth = tuple(o.appearances.index(o.true_status) for o in scheme.objects)
    costs = [[model.cost(o, y) for y in o.appearances] for o in scheme.objects]
    B = float(model.budget)

    best_v = np.full(N, np.inf)
    best_t = np.tile(np.array(truth), (N, 1))
    best_p = np.zeros((N, m))

    def offer(assign, p_active, value):
        nonlocal best_v
        better = value < best_v - _TOL
        if not better.any():
            return
        best_v = np.where(better, value, best_v)
        full = assign.full_probs(np.broadcast_to(p_active, (N, len(assign.active))), m)
        best_p[better] = full[better]
        best_t[better] = np.array(assign.targets)

    for targets in itertools.product(*(range(d) for d in dims)):
        assign = _Assignment(targets, truth, dims, costs)
        vals = post[:, assign.columns]
        if method == "grid":
            pts = _grid_points(assign.costs, B, resolution)
            f = vals @ _weights(pts, assign.masks).T
            arg = f.argmin(axis=1)
            offer(assign, pts[arg], f[np.arange(N), arg])
            continue
        for p in _fixed_points(assign.costs, B):
            offer(assign, p, vals @ _weights(p, assign.masks))
        if len(assign.active) >= 2:
            for p, value in _edge_candidates(vals, assign.costs, B, assign.masks):
                offer(assign, p, value)
        if len(assign.active) == 3:
            for p, value in _face_candidates(vals, assign.costs, B, assign.masks):
                offer(assign, p, value)

    # zero-probability attempts are reported as leaving the truth in place
    idle = best_p <= 0.0
    best_t = np.where(idle, np.array(truth), best_t)
    best_p = np.where(idle, 0.0, best_p)
    cost_arr = np.array(
        [[costs[j][best_t[n, j]] for j in range(m)] for n in range(N)]
    ).reshape(N, m)
    spend = np.where(best_t == np.array(truth), 0.0, best_p * cost_arr)
    return LayerSolution(best_t, best_p, spend, best_v)


def within_step_optimize(
    post_layer: np.ndarray,
    s_a,
    scheme: CamouflageScheme,
    model: BudgetModel,
    method: str = "vertex",
    resolution: int = 100,
) -> BudgetDecision:
    """Best targets and allocation at joint state ``s_a``.

    ``post_layer`` is indexed ``[*s_a, y]``; a 1-D array of length K is also
    accepted, in which case ``s_a`` is ignored.
    """
    post_layer = np.asarray(post_layer, dtype=float)
    row = post_layer if post_layer.ndim == 1 else post_layer[tuple(s_a)]
    sol = solve_layer(row[None], scheme, model, method, resolution)
    targets = tuple(o.appearances[k] for o, k in zip(scheme.objects, sol.targets[0]))
    return BudgetDecision(
        targets,
        tuple(float(x) for x in sol.spend[0]),
        tuple(float(x) for x in sol.probs[0]),
        float(sol.value[0]),
    )
