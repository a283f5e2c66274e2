"""Brute-force evaluators for certifying the planners on tiny instances.

Nothing here reuses planner code: attack values come from an explicit
game-tree search over every attack choice at every history, and the budget
value from a dense grid over allocations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class OracleBudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class OracleBudget:
    max_states: int = 3
    max_agents: int = 2
    max_horizon: int = 2
    max_appearances: int = 4
    max_resolution: int = 400
    max_nodes: int = 5_000_000

    def check_tree(self, S, n, T, choices):
        if S > self.max_states or n > self.max_agents or T > self.max_horizon:
            raise OracleBudgetExceeded(f"instance S={S}, n={n}, T={T} exceeds oracle caps")
        nodes = (choices * S**n) ** T
        if nodes > self.max_nodes:
            raise OracleBudgetExceeded(f"~{nodes} tree nodes exceeds {self.max_nodes}")


def _agent_choices(mdp, scheme, n, mode, widen):
    """Per joint state, the list of per-agent (own, config) delusion tuples."""
    apps = list(itertools.product(*(o.appearances for o in scheme.objects)))
    S = mdp.num_states

    def percept(app, i, s):
        p = scheme.perception(app, i, s)
        return (p.own_state, mdp.env_configs.index(p.env_config))

    def choices(state):
        if mode == "camouflage":
            return [tuple(percept(app, i, s) for i, s in enumerate(state)) for app in apps]
        per_agent = []
        for i, s in enumerate(state):
            if widen:
                opts = [(d, c) for d in range(S) for c in range(len(mdp.env_configs))]
            else:
                opts = []
                for app in apps:
                    p = percept(app, i, s)
                    if p not in opts:
                        opts.append(p)
            per_agent.append(opts)
        return list(itertools.product(*per_agent))

    return choices, len(apps)


def brute_force_attack_value(
    mdp, policy, scheme, n, mode="camouflage", init=None, widen=False, budget=OracleBudget()
) -> float:
    """Minimum expected total reward over all attack strategies.

    The search minimises at every node of the history tree, which covers
    every history-dependent choice rule and hence every Markov one.
    """
    if mode not in ("camouflage", "spa"):
        raise ValueError(f"unknown mode {mode!r}")
    S, T = mdp.num_states, mdp.horizon
    choices, K = _agent_choices(mdp, scheme, n, mode, widen)
    width = K if mode == "camouflage" else max(len(choices((s,) * n)) for s in range(S))
    budget.check_tree(S, n, T, width)
    true_c = mdp.env_configs.index(mdp.true_config)

    def value(t, state):
        if t == T:
            return 0.0
        P = mdp.transitions[t]
        R = mdp.rewards[true_c, t]
        best = None
        for delusions in choices(state):
            rows = []
            for s, (d, c) in zip(state, delusions):
                a = int(policy.actions[c, t, d])
                rows.append(P[s, a])
            total = 0.0
            for nxt in itertools.product(range(S), repeat=n):
                prob = 1.0
                for row, s2 in zip(rows, nxt):
                    prob *= row[s2]
                if prob == 0.0:
                    continue
                gained = sum(R[s, s2] for s, s2 in zip(state, nxt))
                total += prob * (gained + value(t + 1, nxt))
            if best is None or total < best:
                best = total
        return best

    if init is None:
        init = np.full((S,) * n, 1.0 / S**n)
    return float(
        sum(init[s] * value(0, s) for s in itertools.product(range(S), repeat=n) if init[s] > 0)
    )


def brute_force_budget_value(
    post_values, scheme, budget_model, resolution=100, budget=OracleBudget()
) -> float:
    """Grid minimum of the within-step objective at one pre-attack state.

    ``post_values`` lists the post-attack value of every appearance
    configuration in lexicographic order of the objects' appearance domains.
    """
    m = scheme.num_objects
    if m > 3 or resolution < 10 or resolution > budget.max_resolution:
        raise OracleBudgetExceeded("budget oracle needs m <= 3 and 10 <= resolution <= cap")
    post_values = np.asarray(post_values, dtype=float).ravel()
    domains = [o.appearances for o in scheme.objects]
    truth = [o.true_status for o in scheme.objects]
    B = float(budget_model.budget)
    eps = float(budget_model.epsilon)
    dims = [len(d) for d in domains]

    def flat(app):
        idx = 0
        for y, dom, size in zip(app, domains, dims):
            idx = idx * size + dom.index(y)
        return idx

    steps = [k for k in itertools.product(range(resolution + 1), repeat=m) if sum(k) <= resolution]
    best = np.inf
    for targets in itertools.product(*domains):
        costs = [o.cost_distance(y) + eps for o, y in zip(scheme.objects, targets)]
        for k in steps:
            p = [min(kj * B / resolution / c, 1.0) for kj, c in zip(k, costs)]
            total = 0.0
            for bits in itertools.product((0, 1), repeat=m):
                w = 1.0
                app = []
                for j, bit in enumerate(bits):
                    w *= p[j] if bit else 1.0 - p[j]
                    app.append(targets[j] if bit else truth[j])
                if w:
                    total += w * post_values[flat(app)]
            best = min(best, total)
    return float(best)


def random_instance(rng, max_states=3, min_states=2, max_actions=3, max_agents=2, max_horizon=2, max_appearances=4, configs=1):
    """Small random MDP with a table-driven shared-observation scheme.

    Returns (mdp, scheme, n). Appearance 0 is the truth.
    """
    from .mdp import StageMDP
    from .scheme import table_scheme

    S = int(rng.integers(min_states, max_states + 1))
    A = int(rng.integers(2, max_actions + 1))
    n = int(rng.integers(1, max_agents + 1))
    T = int(rng.integers(1, max_horizon + 1))
    K = int(rng.integers(1, max_appearances + 1))
    P = rng.dirichlet(np.ones(S), size=(T, S, A))
    # sparsify some rows to get deterministic moves too
    hard = rng.random((T, S, A)) < 0.3
    P[hard] = np.eye(S)[rng.integers(0, S, size=hard.sum())]
    R = rng.integers(0, 6, size=(configs, T, S, S)).astype(float)
    mdp = StageMDP(P, R, tuple(range(configs)), 0)
    own = rng.integers(0, S, size=(K, S))
    own[0] = np.arange(S)
    cfg = rng.integers(0, configs, size=(K, S))
    cfg[0] = 0
    return mdp, table_scheme(own, cfg, tuple(range(configs))), n


def random_budget_instance(rng, max_objects=2, max_domain=3):
    """Scheme of integer-valued objects plus random post-attack values."""
    from .scheme import CamouflageObject, CamouflageScheme, Perception

    m = int(rng.integers(1, max_objects + 1))
    objects = []
    for j in range(m):
        size = int(rng.integers(2, max_domain + 1))
        objects.append(
            CamouflageObject(f"o{j}", int(rng.integers(0, size)), tuple(range(size)), lambda x, y: abs(x - y))
        )
    scheme = CamouflageScheme(tuple(objects), lambda app, i, s: Perception(s, 0))
    K = int(np.prod([len(o.appearances) for o in objects]))
    values = rng.uniform(0, 20, size=K)
    return scheme, values
