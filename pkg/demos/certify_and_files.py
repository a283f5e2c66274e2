"""Cross-check the planners against brute force and round-trip MDPs to JSON."""
import tempfile
from pathlib import Path

import numpy as np

from camouflage import solve_policy_family, uniform_joint
from camouflage.harness import ExperimentConfig, certify, run_experiment
from camouflage.io import load_mdp, save_mdp
from camouflage.oracle import brute_force_attack_value, random_instance
from camouflage.planners import plan_camouflage

rng = np.random.default_rng(0)
mdp, scheme, n = random_instance(rng)
policy = solve_policy_family(mdp)
init = uniform_joint(mdp.num_states, n)
_, values = plan_camouflage(mdp, policy, scheme, n)
print("planner", values.initial_value(init), "brute force",
      brute_force_attack_value(mdp, policy, scheme, n, "camouflage", init))

with tempfile.TemporaryDirectory() as tmp:
    save_mdp(mdp, Path(tmp) / "instance.json")
    print("reloaded horizon", load_mdp(Path(tmp) / "instance.json").horizon)

    cfg = ExperimentConfig.from_dict({"environment": "ring-v1", "budgets": [1, 2], "certify_instances": 20})
    result = run_experiment(cfg, out_dir=tmp)
    print((Path(tmp) / "trajectories.csv").read_text())
    for check in certify(cfg):
        print("PASS" if check.passed else "FAIL", check.name, check.detail)
