"""Config-driven experiment runner and certification suite."""
from __future__ import annotations

import csv
import io
import json
import logging
import os
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
import yaml

from . import bounds, environments, oracle
from .budget import BudgetModel, solve_layer
from .environments import ChessboardSpec, RingSpec
from .io import mdp_from_dict
from .mdp import point_joint, solve_policy_family, uniform_joint
from .planners import (
    identity_plan,
    plan_camouflage,
    plan_state_perception,
    run_modes,
    simulate_rollouts,
)
from .scheme import table_scheme

log = logging.getLogger(__name__)

MODES = ("none", "camouflage", "spa", "budgeted")
COLUMN = {"none": "no_attack", "camouflage": "camouflage", "spa": "state_perception"}
OUT_ENV = "CAMOUFLAGE_OUT"
ORDER_TOL = 1e-9


class ConfigError(ValueError):
    def __init__(self, errors: list[str]):
        self.errors = errors
        super().__init__("invalid experiment config: " + "; ".join(errors))


@dataclass
class ExperimentConfig:
    environment: str | None = None
    overrides: dict = field(default_factory=dict)
    instance: dict | None = None
    n: int | None = None
    horizon: int | None = None
    init: object = "uniform"
    modes: list = field(default_factory=lambda: ["none", "camouflage", "spa"])
    budgets: list = field(default_factory=list)
    epsilon: float = 0.5
    epsilon_sensitivity: list = field(default_factory=list)
    widen_spa: bool = False
    sweep_attackers: bool | None = None
    orientation_report: bool = True
    reference_ratios: dict = field(default_factory=dict)
    bounds: bool = False
    episodes: int = 0
    seed: int = 0
    output_dir: str = "out"
    certify_instances: int = 50

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        errors = []
        known = set(cls.__dataclass_fields__)
        for key in doc:
            if key not in known:
                errors.append(f"{key}: unknown field")
        cfg = cls(**{k: v for k, v in doc.items() if k in known})
        if cfg.environment is None and cfg.instance is None:
            errors.append("environment: a preset name or an inline instance is required")
        if cfg.environment is not None and cfg.environment not in environments.PRESETS:
            errors.append(
                f"environment: unknown preset {cfg.environment!r}, "
                f"expected one of {sorted(environments.PRESETS)}"
            )
        if cfg.environment is not None:
            _, _, extra = environments.PRESETS.get(cfg.environment, (None, None, {}))
            if cfg.n is None:
                cfg.n = extra.get("n")
            if cfg.sweep_attackers is None:
                cfg.sweep_attackers = extra.get("sweep_attackers", False)
        if cfg.n is None or not isinstance(cfg.n, int) or cfg.n < 1:
            errors.append("n: must be a positive integer")
        if cfg.horizon is not None and (not isinstance(cfg.horizon, int) or cfg.horizon < 0):
            errors.append("horizon: must be a non-negative integer")
        bad = [m for m in cfg.modes if m not in MODES]
        if bad:
            errors.append(f"modes: unknown {bad}, expected subset of {list(MODES)}")
        if any(not isinstance(b, (int, float)) or b < 0 for b in cfg.budgets):
            errors.append("budgets: must be non-negative numbers")
        if "budgeted" in cfg.modes and not cfg.budgets:
            errors.append("budgets: required when 'budgeted' mode is enabled")
        if cfg.epsilon <= 0 or any(e <= 0 for e in cfg.epsilon_sensitivity):
            errors.append("epsilon: must be positive")
        if cfg.episodes < 0:
            errors.append("episodes: must be non-negative")
        if errors:
            raise ConfigError(errors)
        cfg.sweep_attackers = bool(cfg.sweep_attackers)
        return cfg


def load_config(path) -> ExperimentConfig:
    doc = yaml.safe_load(Path(path).read_text()) or {}
    if not isinstance(doc, dict):
        raise ConfigError(["<root>: expected a mapping"])
    return ExperimentConfig.from_dict(doc)


# ----------------------------------------------------------------- instances


def _spec(cfg: ExperimentConfig, **extra):
    overrides = dict(cfg.overrides)
    if cfg.horizon is not None:
        overrides["horizon"] = cfg.horizon
    overrides.update(extra)
    return environments.make_spec(cfg.environment, overrides)


def _inline_instance(cfg: ExperimentConfig):
    mdp = mdp_from_dict(cfg.instance["mdp"])
    if cfg.horizon is not None:
        mdp = mdp.truncated(cfg.horizon)
    sch = cfg.instance.get("scheme", {"kind": "table", "own": [list(range(mdp.num_states))]})
    if sch.get("kind") != "table":
        raise ConfigError([f"instance.scheme.kind: inline schemes must be 'table', got {sch.get('kind')!r}"])
    scheme = table_scheme(sch["own"], sch.get("config"), mdp.env_configs)
    return mdp, scheme


def _instances(cfg: ExperimentConfig):
    """(label, mdp, scheme) for every instance the run averages over."""
    if cfg.instance is not None:
        mdp, scheme = _inline_instance(cfg)
        return [("inline", mdp, scheme)]
    spec = _spec(cfg)
    if isinstance(spec, ChessboardSpec) and cfg.sweep_attackers:
        return [
            (json.dumps(p), *environments.build_chessboard(replace(spec, attackers=tuple(p))))
            for p in environments.placements(spec)
        ]
    return [("preset", *environments.build(spec))]


def _init(cfg: ExperimentConfig, S: int, n: int) -> np.ndarray:
    if cfg.init == "uniform":
        return uniform_joint(S, n)
    if isinstance(cfg.init, dict) and "point" in cfg.init:
        return point_joint(S, cfg.init["point"])
    if isinstance(cfg.init, dict) and "explicit" in cfg.init:
        dist = np.asarray(cfg.init["explicit"], dtype=float)
        if dist.shape != (S,) * n:
            raise ConfigError([f"init.explicit: shape {dist.shape} != {(S,) * n}"])
        return dist
    raise ConfigError([f"init: expected 'uniform', {{point: ...}} or {{explicit: ...}}, got {cfg.init!r}"])


# ---------------------------------------------------------------------- run


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class RunResult:
    trajectories: dict
    ratios: dict
    checks: list
    files: dict
    manifest: dict

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _fmt(x) -> str:
    return f"{x:.9g}"


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    path.write_text(buf.getvalue())


def _ordering_check(values: dict, label: str) -> list[Check]:
    checks = []
    pairs = [("spa", "camouflage"), ("camouflage", "none")]
    for lo, hi in pairs:
        if lo in values and hi in values:
            gap = float((values[lo].pre - values[hi].pre).max())
            checks.append(Check(f"ordering {lo}<={hi} [{label}]", gap <= ORDER_TOL, f"max excess {gap:.3g}"))
    budget_keys = sorted((k for k in values if k.startswith("budget_")), key=lambda k: float(k[7:]))
    for a, b in zip(budget_keys, budget_keys[1:]):
        gap = float((values[b].pre - values[a].pre).max())
        checks.append(Check(f"budget monotone {a}>={b} [{label}]", gap <= ORDER_TOL, f"max excess {gap:.3g}"))
    return checks


def _sweep(cfg, instances, modes, budgets, epsilon, n):
    total, checks = {}, []
    for label, mdp, scheme in instances:
        init = _init(cfg, mdp.num_states, n)
        res = run_modes(mdp, scheme, n, init, modes, budgets, epsilon, cfg.widen_spa)
        checks += _ordering_check(res.values, label)
        for key, traj in res.trajectories.items():
            total[key] = total.get(key, 0.0) + traj
    return {k: v / len(instances) for k, v in total.items()}, checks


def _ratios(traj: dict) -> dict:
    base = traj["none"][-1] if "none" in traj else None
    return {k: (float(v[-1] / base) if base else float("nan")) for k, v in traj.items()}


def run_experiment(cfg: ExperimentConfig, out_dir=None, seed=None, episodes=None) -> RunResult:
    started = time.time()
    out = Path(out_dir or os.environ.get(OUT_ENV) or cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = cfg.seed if seed is None else seed
    episodes = cfg.episodes if episodes is None else episodes
    n = cfg.n
    modes = list(cfg.modes)
    if cfg.budgets and "budgeted" not in modes:
        modes.append("budgeted")
    instances = _instances(cfg)
    traj, checks = _sweep(cfg, instances, modes, cfg.budgets, cfg.epsilon, n)
    files = {}

    columns = [k for k in ("none", "camouflage", "spa") if k in traj]
    columns += [k for k in traj if k.startswith("budget_")]
    T = len(next(iter(traj.values()))) - 1
    header = ["time_index"] + [COLUMN.get(k, k) for k in columns]
    _write_csv(out / "trajectories.csv", header, [[t] + [traj[k][t] for k in columns] for t in range(T + 1)])
    files["trajectories"] = str(out / "trajectories.csv")

    ratios = _ratios(traj)
    _write_csv(
        out / "summary.csv",
        ["mode", "final_value", "ratio_vs_no_attack"],
        [[COLUMN.get(k, k), float(traj[k][-1]), ratios[k]] for k in columns],
    )
    files["summary"] = str(out / "summary.csv")

    # trajectory-level ordering
    for lo, hi in (("spa", "camouflage"), ("camouflage", "none")):
        if lo in traj and hi in traj:
            gap = float((traj[lo] - traj[hi]).max())
            checks.append(Check(f"trajectory {lo}<={hi}", gap <= ORDER_TOL, f"max excess {gap:.3g}"))

    manifest_extra = {}
    if cfg.epsilon_sensitivity and cfg.budgets:
        rows = []
        for eps in cfg.epsilon_sensitivity:
            sens, _ = _sweep(cfg, instances, ["camouflage", "budgeted"], cfg.budgets, eps, n)
            for B in cfg.budgets:
                key = f"budget_{B:g}"
                rows.append([eps, B, float(sens[key][-1]), float(sens["camouflage"][-1]),
                             float(sens[key][-1] - sens["camouflage"][-1])])
        _write_csv(out / "epsilon_sensitivity.csv",
                   ["epsilon", "budget", "final_value", "unconstrained_final", "gap"], rows)
        files["epsilon_sensitivity"] = str(out / "epsilon_sensitivity.csv")

    if cfg.orientation_report and cfg.environment and isinstance(_spec(cfg), RingSpec):
        manifest_extra["orientation"] = _orientation_report(cfg, out, files)

    if cfg.bounds:
        rows, failures = [], 0
        for label, mdp, scheme in instances:
            policy = solve_policy_family(mdp)
            for t, s, rep in bounds.theorem1_sweep(mdp, policy, scheme, n):
                rows.append([label, t, " ".join(map(str, s)), rep.o1, rep.o2, rep.bound, rep.holds])
                failures += not rep.holds
        _write_csv(out / "bounds.csv", ["instance", "stage", "state", "tr_camouflage", "tr_state_perception", "bound", "holds"], rows)
        files["bounds"] = str(out / "bounds.csv")
        checks.append(Check("theorem1 bound", failures == 0, f"{failures} violations of {len(rows)}"))

    if episodes:
        rows = []
        for label, mdp, scheme in instances[:1]:
            init = _init(cfg, mdp.num_states, n)
            policy = solve_policy_family(mdp)
            res = run_modes(mdp, scheme, n, init, [m for m in modes if m != "budgeted"],
                            widen_spa=cfg.widen_spa, policy=policy)
            for key in res.trajectories:
                plan = res.plans.get(key) or identity_plan(mdp, scheme, n)
                mc = simulate_rollouts(mdp, policy, scheme, plan, init, episodes, seed)
                exact = float(res.trajectories[key][-1])
                err = abs(mc.mean - exact)
                z = err / mc.stderr if mc.stderr > 0 else (0.0 if err <= 1e-9 else np.inf)
                rows.append([label, COLUMN.get(key, key), exact, mc.mean, mc.stderr, z])
                checks.append(Check(f"rollouts {key} [{label}]", z <= 4.0, f"z={z:.2f}"))
        _write_csv(out / "rollouts.csv", ["instance", "mode", "exact", "mc_mean", "mc_stderr", "z"], rows)
        files["rollouts"] = str(out / "rollouts.csv")

    manifest = {
        "config": asdict(cfg),
        "resolved": {
            "output_dir": str(out),
            "seed": seed,
            "episodes": episodes,
            "modes": modes,
            "instances": [label for label, _, _ in instances],
            "spec": _describe_spec(cfg),
        },
        "ratios": ratios,
        "checks": [asdict(c) for c in checks],
        "elapsed_seconds": round(time.time() - started, 3),
        **manifest_extra,
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True, default=str))
    files["manifest"] = str(out / "manifest.json")
    return RunResult(traj, ratios, checks, files, manifest)


def _describe_spec(cfg):
    if cfg.environment is None:
        return "inline"
    return {k: v for k, v in asdict(_spec(cfg)).items()}


def _orientation_report(cfg, out: Path, files: dict) -> dict:
    """Ratios for every reward-orientation/rotation-sign combination."""
    rows, settings = [], []
    for orient in environments.REWARD_ORIENTATIONS:
        for sign in (1, -1):
            spec = _spec(cfg, reward_orientation=orient, rotation_sign=sign)
            mdp, scheme = environments.build_ring(spec)
            init = _init(cfg, mdp.num_states, cfg.n)
            res = run_modes(mdp, scheme, cfg.n, init, ["none", "camouflage", "spa"], widen_spa=cfg.widen_spa)
            r = _ratios(res.trajectories)
            rows.append([orient, sign, r["camouflage"], r["spa"]])
            settings.append({"reward_orientation": orient, "rotation_sign": sign,
                             "camouflage": r["camouflage"], "spa": r["spa"]})
    _write_csv(out / "orientation.csv", ["reward_orientation", "rotation_sign", "camouflage_ratio", "spa_ratio"], rows)
    files["orientation"] = str(out / "orientation.csv")
    report = {"settings": settings}
    ref = cfg.reference_ratios
    if ref:
        def dist(s):
            return max(abs(s[k] - ref[k]) for k in ref if k in s)
        closest = min(settings, key=dist)
        report["reference"] = ref
        report["closest"] = {**closest, "max_abs_deviation": dist(closest)}
    return report


# ------------------------------------------------------------------ certify


def certify(cfg: ExperimentConfig, seed=None) -> list[Check]:
    """Oracle agreement, ordering, budget and bound properties on small instances."""
    seed = cfg.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    checks = []
    worst_ca = worst_spa = 0.0
    order_bad = 0
    for k in range(cfg.certify_instances):
        mdp, scheme, n = oracle.random_instance(rng, configs=1 + k % 2)
        policy = solve_policy_family(mdp)
        init = uniform_joint(mdp.num_states, n)
        _, ca = plan_camouflage(mdp, policy, scheme, n)
        _, spa = plan_state_perception(mdp, policy, n, scheme=scheme)
        bf_ca = oracle.brute_force_attack_value(mdp, policy, scheme, n, "camouflage", init)
        bf_spa = oracle.brute_force_attack_value(mdp, policy, scheme, n, "spa", init)
        worst_ca = max(worst_ca, abs(ca.initial_value(init) - bf_ca))
        worst_spa = max(worst_spa, abs(spa.initial_value(init) - bf_spa))
        order_bad += int((spa.pre > ca.pre + ORDER_TOL).any())
        for _, _, rep in bounds.theorem1_sweep(mdp, policy, scheme, n):
            if not rep.holds:
                checks.append(Check("theorem1 bound", False, f"instance {k}: {rep}"))
    checks.append(Check("oracle camouflage", worst_ca <= 1e-9, f"max |diff| {worst_ca:.3g}"))
    checks.append(Check("oracle state perception", worst_spa <= 1e-9, f"max |diff| {worst_spa:.3g}"))
    checks.append(Check("ordering spa<=camouflage", order_bad == 0, f"{order_bad} instances violate"))
    if not any(c.name == "theorem1 bound" for c in checks):
        checks.append(Check("theorem1 bound", True, f"{cfg.certify_instances} instances"))

    worst = -np.inf
    for _ in range(cfg.certify_instances):
        scheme, values = oracle.random_budget_instance(rng)
        model = BudgetModel(float(rng.uniform(0, 4)), cfg.epsilon)
        exact = solve_layer(values[None], scheme, model).value[0]
        grid = oracle.brute_force_budget_value(values, scheme, model, resolution=40)
        worst = max(worst, exact - grid)
    checks.append(Check("budget solver <= grid", worst <= 1e-9, f"max excess {worst:.3g}"))

    lemma_bad = 0
    for _ in range(cfg.certify_instances):
        f = rng.normal(size=(int(rng.integers(1, 5)), int(rng.integers(1, 7))))
        lemma_bad += not bounds.lemma1_gap(f).holds
    checks.append(Check("lemma1 gap", lemma_bad == 0, f"{lemma_bad} violations"))

    if cfg.environment is not None:
        result_checks = []
        for label, mdp, scheme in _instances(cfg):
            init = _init(cfg, mdp.num_states, cfg.n)
            res = run_modes(mdp, scheme, cfg.n, init, ["none", "camouflage", "spa"], widen_spa=cfg.widen_spa)
            result_checks += _ordering_check(res.values, label)
        checks.append(Check("preset ordering", all(c.passed for c in result_checks),
                            "; ".join(c.detail for c in result_checks if not c.passed)))
    return checks
