"""Two recipients on a three-position ring, with and without a rotating signpost.

The signpost's orientation is the camouflaged object: rotating it by k makes
every recipient believe it is k positions further along. We plan the optimal
shared rotation, the optimal free per-recipient delusion, and compare both
against the unattacked total reward.
"""
import numpy as np

from camouflage import RingSpec, build_ring, solve_policy_family, uniform_joint
from camouflage.planners import plan_camouflage, run_modes, simulate_rollouts

mdp, scheme = build_ring(RingSpec())
policy = solve_policy_family(mdp)
init = uniform_joint(mdp.num_states, 2)

# the recipients' own plan at the first step, per perceived position
print("recipient actions at step 1:", [("left", "right", "stay")[a] for a in policy.actions[0, 0]])

res = run_modes(mdp, scheme, 2, init)
base = res.trajectories["none"][-1]
for mode, traj in res.trajectories.items():
    print(f"{mode:>10s}: total {traj[-1]:7.3f}  ratio {traj[-1] / base:.3f}")

# which rotation does the attacker show first, for each joint position?
plan, _ = plan_camouflage(mdp, policy, scheme, 2)
for s in np.ndindex(3, 3):
    print(f"  joint state {s}: rotate by {plan.appearance(1, s)[0]}")

# the exact expectation agrees with sampling
mc = simulate_rollouts(mdp, policy, scheme, plan, init, episodes=20_000, seed=0)
print(f"camouflage exact {res.trajectories['camouflage'][-1]:.3f}, "
      f"sampled {mc.mean:.3f} ± {mc.stderr:.3f}")

# table orientation is ambiguous; look at both readings
for orient in ("rows-destination", "rows-origin"):
    m, sch = build_ring(RingSpec(reward_orientation=orient))
    t = run_modes(m, sch, 2, init).trajectories
    print(f"{orient}: camouflage {t['camouflage'][-1] / t['none'][-1]:.3f}, "
          f"spa {t['spa'][-1] / t['none'][-1]:.3f}")
