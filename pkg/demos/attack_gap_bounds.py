"""How much weaker is a shared disguise than individually tailored delusions?

For one step, forcing every recipient to see the same appearance costs the
attacker at most min_j sum_{i != j} C_ij, where C_ij is how much worse
recipient i fares under j's favourite appearance than under its own.
"""
import numpy as np

from camouflage import build_ring, lemma1_gap, solve_policy_family, theorem1_check, theorem1_sweep

# the underlying inequality on plain tables
f = np.array([[0.0, 3.0, 1.0], [2.0, 1.0, 0.5]])
print(lemma1_gap(f))

mdp, scheme = build_ring()
policy = solve_policy_family(mdp)
rep = theorem1_check(mdp, policy, scheme, stage=1, actual=(0, 2))
print(f"ring step 1 at (0, 2): spa {rep.o2:.3f} <= camouflage {rep.o1:.3f} <= {rep.o2 + rep.bound:.3f}")

reports = theorem1_sweep(mdp, policy, scheme, n=2)
tight = max(reports, key=lambda r: r[2].o1 - r[2].o2)
print(f"all {len(reports)} checks hold: {all(r.holds for _, _, r in reports)}; "
      f"largest gap at stage {tight[0]}, state {tight[1]}: {tight[2].o1 - tight[2].o2:.3f} "
      f"of allowed {tight[2].bound:.3f}")
