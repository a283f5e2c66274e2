"""Planner values against independent brute-force search."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from camouflage import ChessboardSpec, RingSpec, build_chessboard, build_ring
from camouflage.budget import BudgetModel, solve_layer
from camouflage.mdp import solve_policy_family, uniform_joint
from camouflage.oracle import (
    OracleBudget,
    OracleBudgetExceeded,
    brute_force_attack_value,
    brute_force_budget_value,
    random_budget_instance,
    random_instance,
)
from camouflage.planners import plan_camouflage, plan_state_perception

BIG = OracleBudget(max_states=4, max_horizon=3, max_nodes=10**8)

# frozen from brute_force_attack_value (uniform start, two recipients)
RING_T2 = (6.283822222222221, 5.6133333333333315)
RING_T3 = (9.415912888888885, 8.593066666666665)
CHESS_2X2_T2 = (13.0, 12.0)


def planner_values(mdp, scheme, n, init):
    pol = solve_policy_family(mdp)
    _, ca = plan_camouflage(mdp, pol, scheme, n)
    _, spa = plan_state_perception(mdp, pol, n, scheme=scheme)
    return ca.initial_value(init), spa.initial_value(init)


@pytest.mark.parametrize("T,expected", [(2, RING_T2), (3, RING_T3)])
def test_ring_frozen_oracle_values(T, expected):
    mdp, scheme = build_ring(RingSpec(horizon=T))
    np.testing.assert_allclose(planner_values(mdp, scheme, 2, uniform_joint(3, 2)), expected, atol=1e-9)


def test_chessboard_frozen_oracle_values():
    mdp, scheme = build_chessboard(ChessboardSpec(q=2, attackers=((0, 0),), horizon=2))
    np.testing.assert_allclose(planner_values(mdp, scheme, 2, uniform_joint(4, 2)), CHESS_2X2_T2, atol=1e-9)


def test_oracle_recomputes_frozen_ring_value():
    mdp, scheme = build_ring(RingSpec(horizon=2))
    pol = solve_policy_family(mdp)
    got = brute_force_attack_value(mdp, pol, scheme, 2, "camouflage", uniform_joint(3, 2))
    assert got == pytest.approx(RING_T2[0], abs=1e-12)


@given(st.integers(0, 100_000))
def test_random_instances_match_oracle(seed):
    mdp, scheme, n = random_instance(np.random.default_rng(seed), configs=1 + seed % 2)
    pol = solve_policy_family(mdp)
    init = uniform_joint(mdp.num_states, n)
    ca, spa = planner_values(mdp, scheme, n, init)
    assert ca == pytest.approx(brute_force_attack_value(mdp, pol, scheme, n, "camouflage", init), abs=1e-9)
    assert spa == pytest.approx(brute_force_attack_value(mdp, pol, scheme, n, "spa", init), abs=1e-9)
    _, wide = plan_state_perception(mdp, pol, n, scheme=scheme, widen=True)
    assert wide.initial_value(init) == pytest.approx(
        brute_force_attack_value(mdp, pol, scheme, n, "spa", init, widen=True), abs=1e-9
    )


def test_oracle_refuses_large_instances():
    mdp, scheme = build_chessboard()
    pol = solve_policy_family(mdp)
    with pytest.raises(OracleBudgetExceeded):
        brute_force_attack_value(mdp, pol, scheme, 3)
    with pytest.raises(OracleBudgetExceeded):
        brute_force_budget_value(np.zeros(2), scheme, BudgetModel(1.0), resolution=1000)


@given(st.integers(0, 100_000))
def test_budget_solver_vs_grid_oracle(seed):
    rng = np.random.default_rng(seed)
    scheme, vals = random_budget_instance(rng)
    model = BudgetModel(float(rng.uniform(0, 4)))
    exact = solve_layer(vals[None], scheme, model).value[0]
    assert exact <= brute_force_budget_value(vals, scheme, model, resolution=40) + 1e-9
