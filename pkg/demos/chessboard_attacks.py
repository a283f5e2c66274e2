"""Recipients on a board try to avoid static attackers whose positions they
only know by sight. Camouflage moves where the attackers *appear* to be.
"""
import time

from camouflage import ChessboardSpec, attacker_position_sweep, build_chessboard, uniform_joint
from camouflage.planners import run_modes

# 3x3 board, two attackers, three recipients: 729 joint states
spec = ChessboardSpec()
mdp, scheme = build_chessboard(spec)
print(f"{mdp.num_states} cells, {mdp.num_configs} apparent attacker layouts")
start = time.perf_counter()
res = run_modes(mdp, scheme, 3, uniform_joint(mdp.num_states, 3))
print(f"planned in {time.perf_counter() - start:.1f}s")
base = res.trajectories["none"][-1]
for mode, traj in res.trajectories.items():
    print(f"{mode:>10s}: ratio {traj[-1] / base:.3f}")

# boundary handling matters: clamped moves let recipients 'bump' the wall
clamp, sch = build_chessboard(ChessboardSpec(boundary="clamp"))
t = run_modes(clamp, sch, 3, uniform_joint(9, 3)).trajectories
print(f"with clamped walls: camouflage {t['camouflage'][-1] / t['none'][-1]:.3f}")

# 2x2 board, one attacker, averaged over every placement
avg = attacker_position_sweep(ChessboardSpec(q=2, attackers=((0, 0),)), n=2)
print("2x2 sweep:", {k: round(float(v[-1] / avg["none"][-1]), 3) for k, v in avg.items()})
