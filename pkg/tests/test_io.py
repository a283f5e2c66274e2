import json

import numpy as np
import pytest

from camouflage import build_chessboard, build_ring, ChessboardSpec
from camouflage.io import load_mdp, mdp_from_dict, mdp_to_dict, plan_to_dict, save_mdp, value_table_to_dict
from camouflage.mdp import InvalidMDPError, solve_policy_family
from camouflage.planners import plan_budgeted_camouflage, plan_camouflage, plan_state_perception
from camouflage.budget import BudgetModel


@pytest.mark.parametrize("build", [lambda: build_ring()[0], lambda: build_chessboard(ChessboardSpec(q=2, attackers=((0, 0),)))[0]])
def test_roundtrip(tmp_path, build):
    mdp = build()
    save_mdp(mdp, tmp_path / "m.json")
    back = load_mdp(tmp_path / "m.json")
    np.testing.assert_array_equal(back.transitions, mdp.transitions)
    np.testing.assert_array_equal(back.rewards, mdp.rewards)
    assert back.env_configs == mdp.env_configs and back.true_config == mdp.true_config
    assert (back.allowed() == mdp.allowed()).all()


def test_bad_probabilities_rejected_on_load():
    doc = mdp_to_dict(build_ring()[0])
    doc["transitions"][0][0][0] = [0.5, 0.5, 0.5]
    with pytest.raises(InvalidMDPError, match="t=1, s=0, a=0"):
        mdp_from_dict(doc)
    doc = mdp_to_dict(build_ring()[0])
    del doc["rewards"]
    with pytest.raises(ValueError, match="rewards"):
        mdp_from_dict(doc)


def test_plans_export_to_json():
    mdp, scheme = build_ring()
    pol = solve_policy_family(mdp)
    for plan, vt in (
        plan_camouflage(mdp, pol, scheme, 2),
        plan_state_perception(mdp, pol, 2, scheme=scheme),
        plan_budgeted_camouflage(mdp, pol, scheme, BudgetModel(1.0), 2),
    ):
        doc = plan_to_dict(plan)
        assert len(doc["entries"]) == 5 * 9
        json.dumps(doc)
        json.dumps(value_table_to_dict(vt))
