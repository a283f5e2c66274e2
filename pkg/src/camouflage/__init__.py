"""Camouflage and state-perception attacks on multi-agent tabular MDPs."""
from .bounds import GapReport, HypothesisError, cij_matrix, lemma1_gap, theorem1_check, theorem1_sweep
from .budget import BudgetModel, saturation_budget, solve_layer, within_step_optimize
from .environments import (
    ChessboardSpec,
    RingSpec,
    attacker_position_sweep,
    build_chessboard,
    build_ring,
)
from .mdp import (
    InvalidMDPError,
    PolicyFamily,
    StageMDP,
    expected_reward_no_attack,
    point_joint,
    solve_policy_family,
    uniform_joint,
    validate_mdp,
)
from .oracle import brute_force_attack_value, brute_force_budget_value
from .planners import (
    ValueTable,
    evaluate_plan,
    plan_budgeted_camouflage,
    plan_camouflage,
    plan_state_perception,
    run_modes,
    simulate_rollouts,
)
from .scheme import CamouflageObject, CamouflageScheme, Perception, enumerate_appearances, perceive

__all__ = [name for name in dir() if not name.startswith("_")]
