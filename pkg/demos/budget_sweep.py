"""Camouflage that costs money: each attacker pays for a chance to succeed.

Spending b on a disguise at distance d succeeds with probability
min(b / (d + eps), 1). Larger per-step budgets approach the unconstrained
camouflage attack and eventually match it.
"""
from camouflage import BudgetModel, ChessboardSpec, build_chessboard, solve_policy_family, uniform_joint
from camouflage.budget import saturation_budget
from camouflage.planners import plan_budgeted_camouflage, run_modes

mdp, scheme = build_chessboard(ChessboardSpec())
init = uniform_joint(9, 3)
budgets = (1, 2, 3, 4, 6, 12)

for eps in (0.1, 0.5, 1.0):
    res = run_modes(mdp, scheme, 3, init, ("none", "camouflage", "budgeted"), budgets, eps)
    base = res.trajectories["none"][-1]
    row = " ".join(f"{res.trajectories[f'budget_{B}'][-1] / base:.3f}" for B in budgets)
    print(f"eps={eps}: B={budgets} -> {row}  (unconstrained {res.trajectories['camouflage'][-1] / base:.3f})")

print("budget that guarantees success everywhere:", saturation_budget(scheme, BudgetModel(0, 0.5)))

# inspect one decision: where do the attackers aim, and how much do they spend?
policy = solve_policy_family(mdp)
plan, _ = plan_budgeted_camouflage(mdp, policy, scheme, BudgetModel(2.0), 3)
targets, spend, probs = plan.decision(1, (0, 4, 8))
print("B=2 at joint state (0, 4, 8):", targets, "spend", spend, "success", probs)
