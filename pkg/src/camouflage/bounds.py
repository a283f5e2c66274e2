"""Gap between shared (camouflage) and free (state-perception) minimisation.

For functions f_1..f_n over one finite domain, forcing a common argument
costs at most min_j sum_{i != j} (f_i(x*_j) - f_i(x*_i)). Applied per time
step with f_i the one-step expected reward of recipient i under a given
appearance, this bounds how much weaker camouflage is than a free
state-perception attack.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .mdp import PolicyFamily, StageMDP
from .scheme import CamouflageScheme, check_shared_observation, tabulate


class HypothesisError(ValueError):
    """The instance does not satisfy the identical-observation hypotheses."""


@dataclass(frozen=True)
class GapReport:
    o1: float  # constrained (shared argument) optimum
    o2: float  # unconstrained optimum
    bound: float
    holds: bool
    constants: tuple  # C_j for the lemma, row sums excluding diagonal for C_ij
    witness: int  # index j attaining the bound
    minimizers: tuple

    def as_dict(self) -> dict:
        return asdict(self)


def _report(o1, o2, constants, minimizers) -> GapReport:
    constants = np.asarray(constants, dtype=float)
    j = int(np.argmin(constants))
    bound = float(constants[j])
    slack = 1e-9 * max(1.0, abs(o1), abs(o2))
    holds = o2 <= o1 + slack and o1 <= o2 + bound + slack
    return GapReport(float(o1), float(o2), bound, bool(holds), tuple(constants.tolist()), j, tuple(minimizers))


def lemma1_gap(functions) -> GapReport:
    """``functions`` is an (n, D) array: f_i evaluated on a shared domain."""
    f = np.asarray(functions, dtype=float)
    if f.ndim != 2 or f.shape[1] == 0:
        raise ValueError("functions must be a non-empty (n, domain) table")
    o1 = f.sum(axis=0).min()
    xs = f.argmin(axis=1)
    o2 = f[np.arange(len(f)), xs].sum()
    own = f[np.arange(len(f)), xs]
    # C_j = sum_{i != j} f_i(x*_j) - f_i(x*_i)
    C = [float((f[:, xs[j]] - own).sum() - (f[j, xs[j]] - own[j])) for j in range(len(f))]
    return _report(o1, o2, C, xs.tolist())


def one_step_rewards(
    mdp: StageMDP, policy: PolicyFamily, scheme: CamouflageScheme, stage: int, actual
) -> np.ndarray:
    """f[i, y]: expected reward of agent i in step ``stage`` under appearance y."""
    actual = tuple(int(s) for s in actual)
    n = len(actual)
    tables = tabulate(scheme, mdp, n)
    P = mdp.transitions[stage - 1]
    R = mdp.rewards[mdp.true_index, stage - 1]
    f = np.empty((n, len(tables.appearances)))
    for i, s in enumerate(actual):
        for y in range(len(tables.appearances)):
            a = policy.actions[tables.config[y, i, s], stage - 1, tables.own[y, i, s]]
            f[i, y] = P[s, a] @ R[s]
    return f


def _require_hypotheses(mdp, scheme, n):
    problems = check_shared_observation(scheme, mdp, n)
    if problems:
        raise HypothesisError("; ".join(problems))


def cij_matrix(mdp, policy, scheme, stage, actual) -> np.ndarray:
    """C[i, j] = f_i(x*_j) - f_i(x*_i), tightest constants for the bound."""
    _require_hypotheses(mdp, scheme, len(actual))
    f = one_step_rewards(mdp, policy, scheme, stage, actual)
    xs = f.argmin(axis=1)
    own = f[np.arange(len(f)), xs]
    return f[:, xs] - own[:, None]


def theorem1_check(mdp, policy, scheme, stage, actual) -> GapReport:
    """Camouflage vs free perception for one step at one joint state."""
    _require_hypotheses(mdp, scheme, len(actual))
    f = one_step_rewards(mdp, policy, scheme, stage, actual)
    C = cij_matrix(mdp, policy, scheme, stage, actual)
    tr_ca = f.sum(axis=0).min()
    xs = f.argmin(axis=1)
    tr_spa = f[np.arange(len(f)), xs].sum()
    col_sums = [float(C[:, j].sum() - C[j, j]) for j in range(C.shape[1])]
    return _report(tr_ca, tr_spa, col_sums, xs.tolist())


def theorem1_sweep(mdp, policy, scheme, n) -> list[tuple[int, tuple, GapReport]]:
    """theorem1_check at every stage and joint state."""
    out = []
    for t in range(1, mdp.horizon + 1):
        for s in np.ndindex(*(mdp.num_states,) * n):
            out.append((t, s, theorem1_check(mdp, policy, scheme, t, s)))
    return out
