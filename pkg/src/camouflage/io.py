"""JSON serialization of MDPs, value tables and plans.

MDP document::

    {
      "num_states": S, "num_actions": A, "horizon": T,
      "transitions": [t][s][a][s'],
      "rewards": {"<config>": [s_prev][s_next]  or  [t][s_prev][s_next]},
      "true_config": <config>,            # optional, defaults to the first key
      "action_mask": [s][a]               # optional booleans
    }

Configuration identifiers are JSON values (numbers or nested lists);
reward keys hold their JSON text, e.g. ``"[[1, 1], [2, 1]]"``.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .mdp import InvalidMDPError, StageMDP, validate_mdp


def _freeze(value):
    if isinstance(value, list):
        return tuple(_freeze(v) for v in value)
    return value


def _thaw(value):
    if isinstance(value, tuple):
        return [_thaw(v) for v in value]
    if isinstance(value, np.integer):
        return int(value)
    return value


def config_key(config) -> str:
    return json.dumps(_thaw(config))


def mdp_to_dict(mdp: StageMDP) -> dict:
    R = mdp.rewards
    stationary = R.shape[1] > 0 and np.all(R == R[:, :1])
    rewards = {
        config_key(c): (R[k, 0] if stationary else R[k]).tolist()
        for k, c in enumerate(mdp.env_configs)
    }
    doc = {
        "num_states": mdp.num_states,
        "num_actions": mdp.num_actions,
        "horizon": mdp.horizon,
        "transitions": mdp.transitions.tolist(),
        "rewards": rewards,
        "true_config": _thaw(mdp.true_config),
    }
    if mdp.action_mask is not None:
        doc["action_mask"] = mdp.action_mask.tolist()
    return doc


def mdp_from_dict(doc: dict) -> StageMDP:
    for key in ("num_states", "num_actions", "horizon", "transitions", "rewards"):
        if key not in doc:
            raise ValueError(f"MDP document missing field {key!r}")
    S, A, T = int(doc["num_states"]), int(doc["num_actions"]), int(doc["horizon"])
    P = np.asarray(doc["transitions"], dtype=float)
    if P.shape != (T, S, A, S):
        raise ValueError(f"transitions shape {P.shape} != {(T, S, A, S)}")
    configs, tables = [], []
    for key, table in doc["rewards"].items():
        configs.append(_freeze(json.loads(key)))
        table = np.asarray(table, dtype=float)
        if table.shape == (S, S):
            table = np.broadcast_to(table, (T, S, S))
        if table.shape != (T, S, S):
            raise ValueError(f"reward table for {key} has shape {table.shape}")
        tables.append(table)
    true_config = _freeze(doc.get("true_config", configs[0]))
    mask = doc.get("action_mask")
    mdp = StageMDP(
        P,
        np.stack(tables) if tables else np.zeros((0, T, S, S)),
        configs,
        true_config,
        None if mask is None else np.asarray(mask, dtype=bool),
    )
    report = validate_mdp(mdp)
    if not report:
        raise InvalidMDPError(report)
    return mdp


def save_mdp(mdp: StageMDP, path) -> None:
    Path(path).write_text(json.dumps(mdp_to_dict(mdp)))


def load_mdp(path) -> StageMDP:
    return mdp_from_dict(json.loads(Path(path).read_text()))


def value_table_to_dict(values) -> dict:
    out = {"pre": values.pre.tolist()}
    if values.post is not None:
        out["post"] = values.post.tolist()
    return out


def plan_to_dict(plan) -> dict:
    """Readable plan: one entry per (step, joint state)."""
    from .planners import BudgetPlan, CamouflagePlan, PerceptionPlan

    entries = []
    if isinstance(plan, CamouflagePlan):
        T = plan.choice.shape[0]
        for t in range(1, T + 1):
            for s in np.ndindex(*plan.choice.shape[1:]):
                entries.append({"t": t, "state": list(s), "appearance": _thaw(plan.appearance(t, s))})
        kind = "camouflage"
    elif isinstance(plan, PerceptionPlan):
        T = plan.own.shape[0]
        for t in range(1, T + 1):
            for s in np.ndindex(*plan.own.shape[1:-1]):
                entries.append({
                    "t": t,
                    "state": list(s),
                    "delusions": [[p.own_state, _thaw(p.env_config)] for p in plan.delusions(t, s)],
                })
        kind = "state_perception"
    elif isinstance(plan, BudgetPlan):
        T = plan.targets.shape[0]
        for t in range(1, T + 1):
            for s in np.ndindex(*plan.targets.shape[1:-1]):
                targets, spend, probs = plan.decision(t, s)
                entries.append({
                    "t": t,
                    "state": list(s),
                    "targets": _thaw(targets),
                    "spend": list(spend),
                    "success_probability": list(probs),
                })
        kind = "budgeted"
    else:
        raise TypeError(f"unsupported plan type {type(plan).__name__}")
    return {"kind": kind, "entries": entries}
