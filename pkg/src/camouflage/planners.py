"""Attacker-side dynamic programming over half-step value layers.

``ValueTable.pre[t]`` holds V_t over joint true states for t = 0..T and
``ValueTable.post[t - 1]`` holds V_{t-0.5} over (joint state, appearance
index). Recipients act on what they perceive but are paid by the true
environment.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .budget import BudgetModel, solve_layer
from .mdp import (
    PolicyFamily,
    StageMDP,
    apply_agent_kernel,
    check_distribution,
    step_reward,
)
from .scheme import CamouflageScheme, Perception, PerceptionTables, perception_domain, tabulate

# (own_state, config_index) seen by one agent
Delusion = tuple[int, int]


@dataclass
class ValueTable:
    pre: np.ndarray
    post: np.ndarray | None = None

    @property
    def horizon(self) -> int:
        return self.pre.shape[0] - 1

    def initial_value(self, init: np.ndarray) -> float:
        return float((self.pre[0] * init).sum())


def _kernel(mdp: StageMDP, policy: PolicyFamily, t: int, own: np.ndarray, cfg: np.ndarray):
    """Row-stochastic kernel for an agent whose perception at each true state
    s is (own[s], cfg[s]) during step t."""
    S = mdp.num_states
    actions = policy.actions[cfg, t - 1, own]
    return mdp.transitions[t - 1][np.arange(S), actions]


def _true_reward(mdp: StageMDP, t: int) -> np.ndarray:
    return mdp.rewards[mdp.true_index, t - 1]


def _broadcast(vec: np.ndarray, axis: int, n: int) -> np.ndarray:
    shape = [1] * n
    shape[axis] = vec.shape[0]
    return vec.reshape(shape)


def post_move_update(
    mdp: StageMDP,
    policy: PolicyFamily,
    scheme: CamouflageScheme | PerceptionTables,
    V_t: np.ndarray,
    stage: int | None = None,
) -> np.ndarray:
    """V_{t-0.5}(s, y) from V_t for every appearance index y.

    ``stage`` defaults to the last step T.
    """
    V_t = np.asarray(V_t, dtype=float)
    n = V_t.ndim
    t = mdp.horizon if stage is None else stage
    if V_t.shape != (mdp.num_states,) * n:
        raise ValueError(f"V_t shape {V_t.shape} does not cover all joint states")
    tables = scheme if isinstance(scheme, PerceptionTables) else tabulate(scheme, mdp, n)
    R = _true_reward(mdp, t)
    out = np.empty(V_t.shape + (len(tables.appearances),))
    for y in range(len(tables.appearances)):
        W = V_t
        gained = 0.0
        for i in range(n):
            M = _kernel(mdp, policy, t, tables.own[y, i], tables.config[y, i])
            W = apply_agent_kernel(W, M, i)
            gained = gained + _broadcast(step_reward(M, R), i, n)
        out[..., y] = W + gained
    return out


# --------------------------------------------------------------------- plans


class CamouflagePlan:
    """Shared appearance index per (step, joint state)."""

    def __init__(self, choice: np.ndarray, tables: PerceptionTables):
        self.choice = choice
        self.tables = tables

    def appearance(self, t: int, s) -> tuple:
        return self.tables.appearances[self.choice[t - 1][tuple(s)]]

    def mixture(self, t: int, s) -> list[tuple[float, list[Delusion]]]:
        y = self.choice[t - 1][tuple(s)]
        return [(1.0, _delusions(self.tables, y, s))]


class PerceptionPlan:
    """Per-agent delusions per (step, joint state).

    ``own[t-1][s][i]`` and ``config[t-1][s][i]`` describe what agent i is
    made to perceive at joint state s during step t.
    """

    def __init__(self, own: np.ndarray, config: np.ndarray, env_configs=None):
        self.own = own
        self.config = config
        self.env_configs = env_configs

    def delusions(self, t: int, s) -> list[Perception]:
        s = tuple(s)
        cfgs = self.env_configs
        return [
            Perception(int(o), cfgs[c] if cfgs else int(c))
            for o, c in zip(self.own[t - 1][s], self.config[t - 1][s])
        ]

    def mixture(self, t: int, s):
        s = tuple(s)
        return [(1.0, list(zip(self.own[t - 1][s].tolist(), self.config[t - 1][s].tolist())))]


class BudgetPlan:
    """Targets, success probabilities and spends per (step, joint state)."""

    def __init__(self, targets, probs, spend, tables: PerceptionTables, scheme: CamouflageScheme):
        self.targets = targets
        self.probs = probs
        self.spend = spend
        self.tables = tables
        self.scheme = scheme
        self._dims = tuple(len(o.appearances) for o in scheme.objects)
        self._truth = [o.appearances.index(o.true_status) for o in scheme.objects]

    def decision(self, t: int, s):
        s = tuple(s)
        tg = self.targets[t - 1][s]
        return (
            tuple(o.appearances[k] for o, k in zip(self.scheme.objects, tg)),
            tuple(self.spend[t - 1][s].tolist()),
            tuple(self.probs[t - 1][s].tolist()),
        )

    def outcomes(self, t: int, s) -> list[tuple[float, int]]:
        """(probability, appearance index) for every success pattern."""
        s = tuple(s)
        tg = self.targets[t - 1][s]
        p = self.probs[t - 1][s]
        out = []
        for bits in itertools.product((0, 1), repeat=len(tg)):
            w = 1.0
            app = list(self._truth)
            for j, bit in enumerate(bits):
                w *= p[j] if bit else 1.0 - p[j]
                if bit:
                    app[j] = tg[j]
            if w > 0.0:
                out.append((w, int(np.ravel_multi_index(app, self._dims))))
        return out

    def mixture(self, t: int, s):
        return [(w, _delusions(self.tables, y, s)) for w, y in self.outcomes(t, s)]


def _delusions(tables: PerceptionTables, y: int, s) -> list[Delusion]:
    return [
        (int(tables.own[y, i, si]), int(tables.config[y, i, si])) for i, si in enumerate(s)
    ]


# ------------------------------------------------------------------ planners


def no_attack_values(mdp: StageMDP, policy: PolicyFamily, n: int) -> ValueTable:
    """Recipients' total reward-to-go with truthful perception."""
    S, T = mdp.num_states, mdp.horizon
    pre = np.zeros((T + 1,) + (S,) * n)
    c = mdp.true_index
    for t in range(T, 0, -1):
        M = _kernel(mdp, policy, t, np.arange(S), np.full(S, c))
        r = step_reward(M, _true_reward(mdp, t))
        W = pre[t]
        for i in range(n):
            W = apply_agent_kernel(W, M, i) + _broadcast(r, i, n)
        pre[t - 1] = W
    return ValueTable(pre)


def plan_camouflage(
    mdp: StageMDP, policy: PolicyFamily, scheme: CamouflageScheme, n: int
) -> tuple[CamouflagePlan, ValueTable]:
    tables = tabulate(scheme, mdp, n)
    if not tables.appearances:
        raise ValueError("scheme has no appearance configurations")
    S, T = mdp.num_states, mdp.horizon
    pre = np.zeros((T + 1,) + (S,) * n)
    post = np.zeros((T,) + (S,) * n + (len(tables.appearances),))
    choice = np.zeros((T,) + (S,) * n, dtype=np.int64)
    for t in range(T, 0, -1):
        post[t - 1] = post_move_update(mdp, policy, tables, pre[t], t)
        choice[t - 1] = post[t - 1].argmin(axis=-1)
        pre[t - 1] = post[t - 1].min(axis=-1)
    return CamouflagePlan(choice, tables), ValueTable(pre, post)


DomainFn = Callable[[int, int], Sequence[Perception]]


def default_domain(scheme: CamouflageScheme, mdp: StageMDP, widen: bool = False) -> DomainFn:
    cache: dict = {}

    def domain(agent: int, own_state: int):
        key = (agent, own_state)
        if key not in cache:
            cache[key] = perception_domain(scheme, mdp, own_state, agent, widen)
        return cache[key]

    return domain


def _resolve_domain(mdp, n, domain, scheme, widen):
    if domain is None:
        if scheme is None:
            raise ValueError("need either a perception domain or a scheme")
        domain = default_domain(scheme, mdp, widen)
    S = mdp.num_states
    table = {}
    for i in range(n):
        for s in range(S):
            opts = [(int(p.own_state), mdp.config_index(p.env_config)) for p in domain(i, s)]
            if not opts:
                raise ValueError(f"empty perception domain for agent {i} at state {s}")
            table[i, s] = opts
    return table


def plan_state_perception(
    mdp: StageMDP,
    policy: PolicyFamily,
    n: int,
    perception_domain: DomainFn | None = None,
    *,
    scheme: CamouflageScheme | None = None,
    widen: bool = False,
    joint: bool = False,
) -> tuple[PerceptionPlan, ValueTable]:
    """Optimal free state-perception attack.

    Agents move independently and rewards add up, so the minimisation
    splits into one single-agent problem per recipient. ``joint=True`` runs
    the unsplit minimisation over all delusion tuples instead, for checking.
    """
    domains = _resolve_domain(mdp, n, perception_domain, scheme, widen)
    if joint:
        return _spa_joint(mdp, policy, n, domains)
    S, T = mdp.num_states, mdp.horizon
    own = np.zeros((T,) + (S,) * n + (n,), dtype=np.int64)
    cfg = np.zeros_like(own)
    pre = np.zeros((T + 1,) + (S,) * n)
    single = np.zeros((n, T + 1, S))
    for i in range(n):
        for t in range(T, 0, -1):
            R = _true_reward(mdp, t)
            P = mdp.transitions[t - 1]
            future = single[i, t]
            for s in range(S):
                opts = domains[i, s]
                vals = [
                    P[s, policy.actions[c, t - 1, o]] @ (R[s] + future) for o, c in opts
                ]
                k = int(np.argmin(vals))
                single[i, t - 1, s] = vals[k]
                index = (t - 1,) + (slice(None),) * i + (s,) + (Ellipsis,)
                own[index + (i,)] = opts[k][0]
                cfg[index + (i,)] = opts[k][1]
    for t in range(T + 1):
        total = np.zeros((S,) * n)
        for i in range(n):
            total = total + _broadcast(single[i, t], i, n)
        pre[t] = total
    return PerceptionPlan(own, cfg, mdp.env_configs), ValueTable(pre)


def _spa_joint(mdp, policy, n, domains):
    S, T = mdp.num_states, mdp.horizon
    own = np.zeros((T,) + (S,) * n + (n,), dtype=np.int64)
    cfg = np.zeros_like(own)
    pre = np.zeros((T + 1,) + (S,) * n)
    for t in range(T, 0, -1):
        R = _true_reward(mdp, t)
        P = mdp.transitions[t - 1]
        for s in np.ndindex(*(S,) * n):
            best, arg = np.inf, None
            for combo in itertools.product(*(domains[i, si] for i, si in enumerate(s))):
                rows = [P[si, policy.actions[c, t - 1, o]] for si, (o, c) in zip(s, combo)]
                value = sum(row @ R[si] for row, si in zip(rows, s))
                W = pre[t]
                for row in rows:
                    W = np.tensordot(row, W, axes=([0], [0]))
                value += float(W)
                if value < best - 1e-12:
                    best, arg = value, combo
            pre[t - 1][s] = best
            own[(t - 1,) + s] = [o for o, _ in arg]
            cfg[(t - 1,) + s] = [c for _, c in arg]
    return PerceptionPlan(own, cfg, mdp.env_configs), ValueTable(pre)


def plan_budgeted_camouflage(
    mdp: StageMDP,
    policy: PolicyFamily,
    scheme: CamouflageScheme,
    budget_model: BudgetModel,
    n: int,
    method: str = "vertex",
    resolution: int = 100,
) -> tuple[BudgetPlan, ValueTable]:
    """Between-step DP alternating with the within-step budget problem.

    The budget refills every step.
    """
    tables = tabulate(scheme, mdp, n)
    S, T, m = mdp.num_states, mdp.horizon, scheme.num_objects
    K = len(tables.appearances)
    shape = (S,) * n
    pre = np.zeros((T + 1,) + shape)
    post = np.zeros((T,) + shape + (K,))
    targets = np.zeros((T,) + shape + (m,), dtype=np.int64)
    probs = np.zeros((T,) + shape + (m,))
    spend = np.zeros_like(probs)
    for t in range(T, 0, -1):
        post[t - 1] = post_move_update(mdp, policy, tables, pre[t], t)
        sol = solve_layer(post[t - 1].reshape(-1, K), scheme, budget_model, method, resolution)
        pre[t - 1] = sol.value.reshape(shape)
        targets[t - 1] = sol.targets.reshape(shape + (m,))
        probs[t - 1] = sol.probs.reshape(shape + (m,))
        spend[t - 1] = sol.spend.reshape(shape + (m,))
    return BudgetPlan(targets, probs, spend, tables, scheme), ValueTable(pre, post)


def identity_plan(mdp: StageMDP, scheme: CamouflageScheme, n: int) -> CamouflagePlan:
    tables = tabulate(scheme, mdp, n)
    choice = np.full((mdp.horizon,) + (mdp.num_states,) * n, tables.identity, dtype=np.int64)
    return CamouflagePlan(choice, tables)


# ---------------------------------------------------------------- evaluation


def evaluate_plan(
    mdp: StageMDP,
    policy: PolicyFamily,
    scheme: CamouflageScheme | None,
    plan,
    init: np.ndarray,
) -> np.ndarray:
    """Exact cumulative expected total reward, time indices 0..T.

    ``scheme`` is accepted for symmetry with the planners; the plan already
    carries its perception tables.
    """
    init = np.asarray(init, dtype=float)
    check_distribution(init)
    n, S, T = init.ndim, mdp.num_states, mdp.horizon
    traj = np.zeros(T + 1)
    dist = init
    for t in range(1, T + 1):
        P = mdp.transitions[t - 1]
        R = _true_reward(mdp, t)
        nxt = np.zeros_like(dist)
        gained = 0.0
        for s in zip(*np.nonzero(dist)):
            mass = dist[s]
            for w, delusions in plan.mixture(t, s):
                rows = [P[si, policy.actions[c, t - 1, o]] for si, (o, c) in zip(s, delusions)]
                gained += mass * w * sum(row @ R[si] for row, si in zip(rows, s))
                out = np.ones(())
                for row in rows:
                    out = np.multiply.outer(out, row)
                nxt += mass * w * out
        dist = nxt
        traj[t] = traj[t - 1] + gained
    return traj


@dataclass(frozen=True)
class RolloutResult:
    mean: float
    stderr: float
    episodes: int


def simulate_rollouts(
    mdp: StageMDP,
    policy: PolicyFamily,
    scheme: CamouflageScheme | None,
    plan,
    init: np.ndarray,
    episodes: int,
    seed: int = 0,
) -> RolloutResult:
    """Monte Carlo estimate of the plan's total reward."""
    if episodes < 1:
        raise ValueError("episodes must be >= 1")
    init = np.asarray(init, dtype=float)
    check_distribution(init)
    rng = np.random.default_rng(seed)
    n, S, T = init.ndim, mdp.num_states, mdp.horizon
    flat = rng.choice(init.size, size=episodes, p=init.ravel() / init.sum())
    states = np.stack(np.unravel_index(flat, init.shape), axis=1)
    totals = np.zeros(episodes)
    for t in range(1, T + 1):
        P = mdp.transitions[t - 1]
        R = _true_reward(mdp, t)
        nxt = np.empty_like(states)
        keys = np.ravel_multi_index(states.T, init.shape)
        order = np.argsort(keys, kind="stable")
        uniq, starts = np.unique(keys[order], return_index=True)
        bounds = list(starts[1:]) + [episodes]
        for key, lo, hi in zip(uniq, starts, bounds):
            idx = order[lo:hi]
            s = tuple(int(v) for v in np.unravel_index(key, init.shape))
            mix = plan.mixture(t, s)
            pick = rng.choice(len(mix), size=len(idx), p=[w for w, _ in mix]) if len(mix) > 1 else np.zeros(len(idx), int)
            for k, (_, delusions) in enumerate(mix):
                sub = idx[pick == k]
                if not len(sub):
                    continue
                for i, (si, (o, c)) in enumerate(zip(s, delusions)):
                    row = P[si, policy.actions[c, t - 1, o]]
                    cdf = np.cumsum(row)
                    draw = np.searchsorted(cdf, rng.random(len(sub)) * cdf[-1], side="right")
                    draw = np.minimum(draw, S - 1)
                    nxt[sub, i] = draw
                    totals[sub] += R[si, draw]
        states = nxt
    se = float(totals.std(ddof=1) / np.sqrt(episodes)) if episodes > 1 else 0.0
    return RolloutResult(float(totals.mean()), se, episodes)


@dataclass
class ModeResults:
    """Trajectories and value tables keyed by mode name."""

    trajectories: dict
    values: dict
    plans: dict


def run_modes(
    mdp: StageMDP,
    scheme: CamouflageScheme,
    n: int,
    init: np.ndarray,
    modes=("none", "camouflage", "spa"),
    budgets=(),
    epsilon: float = 0.5,
    widen_spa: bool = False,
    policy: PolicyFamily | None = None,
) -> ModeResults:
    """Plan and evaluate each requested attack mode on one instance.

    Budgeted runs are stored under ``budget_<B>``.
    """
    from .mdp import expected_reward_no_attack, solve_policy_family

    policy = solve_policy_family(mdp) if policy is None else policy
    traj, values, plans = {}, {}, {}
    if "none" in modes:
        traj["none"] = expected_reward_no_attack(mdp, n, init, policy)
        values["none"] = no_attack_values(mdp, policy, n)
    if "camouflage" in modes:
        plan, vt = plan_camouflage(mdp, policy, scheme, n)
        traj["camouflage"] = evaluate_plan(mdp, policy, scheme, plan, init)
        values["camouflage"], plans["camouflage"] = vt, plan
    if "spa" in modes:
        plan, vt = plan_state_perception(mdp, policy, n, scheme=scheme, widen=widen_spa)
        traj["spa"] = evaluate_plan(mdp, policy, scheme, plan, init)
        values["spa"], plans["spa"] = vt, plan
    if "budgeted" in modes:
        for B in budgets:
            key = f"budget_{B:g}"
            plan, vt = plan_budgeted_camouflage(mdp, policy, scheme, BudgetModel(B, epsilon), n)
            traj[key] = evaluate_plan(mdp, policy, scheme, plan, init)
            values[key], plans[key] = vt, plan
    return ModeResults(traj, values, plans)
