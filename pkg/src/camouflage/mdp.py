"""Tabular finite-horizon MDP shared by all recipient agents.

Time indices run 0..T. Step ``t`` (1 <= t <= T) moves the recipients from
index ``t-1`` to index ``t`` using ``transitions[t-1]`` and pays
``rewards[c, t-1]`` for environment configuration ``c``. Joint states of
``n`` recipients are represented as numpy arrays of shape ``(S,) * n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Sequence

import numpy as np

ROW_SUM_TOL = 1e-9


class InvalidMDPError(ValueError):
    """Raised when an operation receives an MDP that fails validation."""

    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("invalid MDP: " + "; ".join(report.problems))


@dataclass(frozen=True)
class ValidationReport:
    problems: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.problems

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True, eq=False)
class StageMDP:
    """Stage-indexed tabular MDP.

    ``transitions`` has shape (T, S, A, S); ``rewards`` has shape
    (C, T, S, S) indexed by environment configuration, stage, previous state
    and next state. ``action_mask`` (S, A) marks the actions recipients are
    allowed to plan with; masked actions still have a transition row so a
    deluded agent that picks one is well defined.
    """

    transitions: np.ndarray
    rewards: np.ndarray
    env_configs: tuple[Hashable, ...] = (0,)
    true_config: Hashable = 0
    action_mask: np.ndarray | None = None
    _config_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "transitions", np.asarray(self.transitions, dtype=float))
        object.__setattr__(self, "rewards", np.asarray(self.rewards, dtype=float))
        object.__setattr__(self, "env_configs", tuple(self.env_configs))
        if self.action_mask is not None:
            object.__setattr__(self, "action_mask", np.asarray(self.action_mask, dtype=bool))
        object.__setattr__(
            self, "_config_index", {c: i for i, c in enumerate(self.env_configs)}
        )

    @property
    def horizon(self) -> int:
        return self.transitions.shape[0]

    @property
    def num_states(self) -> int:
        return self.transitions.shape[1]

    @property
    def num_actions(self) -> int:
        return self.transitions.shape[2]

    @property
    def num_configs(self) -> int:
        return len(self.env_configs)

    def config_index(self, config: Hashable) -> int:
        try:
            return self._config_index[config]
        except KeyError:
            raise KeyError(f"unknown environment configuration {config!r}") from None

    @property
    def true_index(self) -> int:
        return self.config_index(self.true_config)

    def allowed(self) -> np.ndarray:
        if self.action_mask is None:
            return np.ones((self.num_states, self.num_actions), dtype=bool)
        return self.action_mask

    def truncated(self, horizon: int) -> "StageMDP":
        """Same dynamics restricted to the first ``horizon`` steps."""
        if not 0 <= horizon <= self.horizon:
            raise ValueError(f"horizon {horizon} outside 0..{self.horizon}")
        return StageMDP(
            self.transitions[:horizon],
            self.rewards[:, :horizon],
            self.env_configs,
            self.true_config,
            self.action_mask,
        )

    def with_true_config(self, config: Hashable) -> "StageMDP":
        self.config_index(config)
        return StageMDP(
            self.transitions, self.rewards, self.env_configs, config, self.action_mask
        )

    @classmethod
    def stationary(cls, P, R, horizon: int, **kwargs) -> "StageMDP":
        """Build from a single (S, A, S) kernel and (C, S, S) or (S, S) rewards."""
        P = np.asarray(P, dtype=float)
        R = np.asarray(R, dtype=float)
        if R.ndim == 2:
            R = R[None]
        trans = np.broadcast_to(P, (horizon,) + P.shape).copy()
        rew = np.broadcast_to(R[:, None], (R.shape[0], horizon) + R.shape[1:]).copy()
        return cls(trans, rew, **kwargs)


@dataclass(frozen=True)
class PolicyFamily:
    """Recipients' optimal policies, one per environment configuration.

    ``actions[c, t, s]`` is the action at time index t (0..T-1) for own
    state s when the environment is believed to be configuration c.
    ``values[c, t, s]`` is the optimal reward-to-go, with ``values[:, T] == 0``.
    """

    actions: np.ndarray
    values: np.ndarray

    @property
    def horizon(self) -> int:
        return self.actions.shape[1]


def validate_mdp(mdp: StageMDP) -> ValidationReport:
    problems = []
    P, R = mdp.transitions, mdp.rewards
    if P.ndim != 4 or P.shape[1] != P.shape[3]:
        return ValidationReport((f"transitions must have shape (T,S,A,S), got {P.shape}",))
    T, S, A, _ = P.shape
    if S < 1 or A < 1:
        problems.append("need at least one state and one action")
    if R.shape != (mdp.num_configs, T, S, S):
        problems.append(f"rewards shape {R.shape} != {(mdp.num_configs, T, S, S)}")
    if not np.all(np.isfinite(P)):
        problems.append("transition table contains non-finite entries")
    for t, s, a in np.argwhere(((P < 0) | (P > 1)).any(axis=3)):
        problems.append(f"probability out of [0,1] at (t={t + 1}, s={s}, a={a})")
    sums = P.sum(axis=3)
    for t, s, a in zip(*np.nonzero(np.abs(sums - 1.0) > ROW_SUM_TOL)):
        problems.append(
            f"transition row (t={t + 1}, s={s}, a={a}) sums to {sums[t, s, a]:.12g}"
        )
    if R.size and not np.all(np.isfinite(R)):
        problems.append("reward table contains non-finite entries")
    if len(set(mdp.env_configs)) != len(mdp.env_configs):
        problems.append("duplicate environment configurations")
    if mdp.true_config not in mdp._config_index:
        problems.append(f"true configuration {mdp.true_config!r} not in env_configs")
    if mdp.action_mask is not None:
        if mdp.action_mask.shape != (S, A):
            problems.append(f"action_mask shape {mdp.action_mask.shape} != {(S, A)}")
        elif not mdp.action_mask.any(axis=1).all():
            problems.append("some state has no allowed action")
    return ValidationReport(tuple(problems))


def _require_valid(mdp: StageMDP) -> None:
    report = validate_mdp(mdp)
    if not report:
        raise InvalidMDPError(report)


def solve_policy_family(mdp: StageMDP) -> PolicyFamily:
    """Backward induction for every environment configuration.

    Ties go to the lowest action index among allowed actions.
    """
    _require_valid(mdp)
    T, S, A = mdp.horizon, mdp.num_states, mdp.num_actions
    C = mdp.num_configs
    allowed = mdp.allowed()
    actions = np.zeros((C, T, S), dtype=np.int64)
    values = np.zeros((C, T + 1, S))
    for t in range(T - 1, -1, -1):
        P = mdp.transitions[t]
        # Q[c, s, a] = sum_s' P[s, a, s'] (R_c[s, s'] + V_c[s'])
        Q = np.einsum("sap,csp->csa", P, mdp.rewards[:, t]) + np.einsum(
            "sap,cp->csa", P, values[:, t + 1]
        )
        Q = np.where(allowed[None], Q, -np.inf)
        best = Q.max(axis=2, keepdims=True)
        # lowest index among values equal to the max up to rounding noise
        ties = Q >= best - 1e-12 * np.maximum(1.0, np.abs(best))
        actions[:, t] = ties.argmax(axis=2)
        values[:, t] = np.take_along_axis(Q, actions[:, t, :, None], axis=2)[..., 0]
    return PolicyFamily(actions, values)


def uniform_joint(num_states: int, n: int) -> np.ndarray:
    return np.full((num_states,) * n, 1.0 / num_states**n)


def point_joint(num_states: int, state: Sequence[int]) -> np.ndarray:
    dist = np.zeros((num_states,) * len(state))
    dist[tuple(state)] = 1.0
    return dist


def product_joint(marginals: Sequence[np.ndarray]) -> np.ndarray:
    out = np.ones(())
    for m in marginals:
        out = np.multiply.outer(out, np.asarray(m, dtype=float))
    return out


def check_distribution(dist: np.ndarray) -> None:
    total = dist.sum()
    if abs(total - 1.0) > ROW_SUM_TOL or np.any(dist < -ROW_SUM_TOL):
        raise ValueError(f"joint distribution must be non-negative and sum to 1, got {total!r}")


def apply_agent_kernel(values: np.ndarray, kernel: np.ndarray, agent: int) -> np.ndarray:
    """Contract axis ``agent`` of a joint array with ``kernel[s, s']``.

    Returns W with W[..., s_i, ...] = sum_s' kernel[s_i, s'] values[..., s', ...].
    """
    out = np.tensordot(kernel, values, axes=([1], [agent]))
    return np.moveaxis(out, 0, agent)


def push_kernel(dist: np.ndarray, kernel: np.ndarray, agent: int) -> np.ndarray:
    """Forward version: D'[..., s', ...] = sum_s D[..., s, ...] kernel[s, s']."""
    out = np.tensordot(dist, kernel, axes=([agent], [0]))
    return np.moveaxis(out, -1, agent)


def push_forward(
    dist: np.ndarray,
    action_selector: Callable[[int, int], int],
    mdp: StageMDP,
    stage: int,
) -> np.ndarray:
    """Propagate a joint distribution through step ``stage`` (1-based).

    Agents move independently; ``action_selector(agent, own_state)`` gives
    each agent's action.
    """
    dist = np.asarray(dist, dtype=float)
    check_distribution(dist)
    if not 1 <= stage <= mdp.horizon:
        raise ValueError(f"stage {stage} outside 1..{mdp.horizon}")
    P = mdp.transitions[stage - 1]
    S = mdp.num_states
    for i in range(dist.ndim):
        kernel = P[np.arange(S), [action_selector(i, s) for s in range(S)]]
        dist = push_kernel(dist, kernel, i)
    return dist


def step_reward(kernel: np.ndarray, reward: np.ndarray) -> np.ndarray:
    """Expected one-step reward per own state under a row-stochastic kernel."""
    return (kernel * reward).sum(axis=1)


def expected_reward_no_attack(
    mdp: StageMDP,
    n: int,
    init: np.ndarray,
    policy: PolicyFamily | None = None,
    horizon: int | None = None,
) -> np.ndarray:
    """Cumulative expected total reward of ``n`` unattacked recipients.

    Entry t is the expected reward collected by all recipients up to time
    index t; entry 0 is 0.
    """
    _require_valid(mdp)
    init = np.asarray(init, dtype=float)
    if init.shape != (mdp.num_states,) * n:
        raise ValueError(f"init shape {init.shape} != {(mdp.num_states,) * n}")
    check_distribution(init)
    T = mdp.horizon if horizon is None else horizon
    if policy is None:
        policy = solve_policy_family(mdp)
    c = mdp.true_index
    S = mdp.num_states
    traj = np.zeros(T + 1)
    dist = init
    for t in range(1, T + 1):
        kernel = mdp.transitions[t - 1][np.arange(S), policy.actions[c, t - 1]]
        r = step_reward(kernel, mdp.rewards[c, t - 1])
        gained = 0.0
        for i in range(n):
            marginal = dist.sum(axis=tuple(j for j in range(n) if j != i))
            gained += marginal @ r
            dist = push_kernel(dist, kernel, i)
        traj[t] = traj[t - 1] + gained
    return traj
