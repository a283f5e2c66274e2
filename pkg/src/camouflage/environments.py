"""Ring and chessboard instances plus attacker-placement sweeps."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

import numpy as np

from .mdp import StageMDP, uniform_joint
from .scheme import CamouflageObject, CamouflageScheme, Perception

RING_REWARDS = (
    (3.0, 10.6, 1.0),
    (10.0, 1.0, 0.0),
    (1.0, 0.0, 11.6),
)
RING_ACTIONS = ("left", "right", "stay")
REWARD_ORIENTATIONS = ("rows-destination", "rows-origin")


@dataclass(frozen=True)
class RingSpec:
    """Three-position ring.

    ``reward_orientation`` says how to read ``reward_table``: with
    "rows-destination" entry [i][j] pays a move from j to i, with
    "rows-origin" it pays a move from i to j. ``rotation_sign`` fixes which
    way a camouflage rotation shifts the perceived position.
    """

    reward_table: tuple = RING_REWARDS
    reward_orientation: str = "rows-destination"
    rotation_sign: int = 1
    horizon: int = 5
    move_intended: float = 0.8
    stay_prob: float = 0.8
    num_positions: int = 3

    def validate(self) -> None:
        table = np.asarray(self.reward_table, dtype=float)
        N = self.num_positions
        if table.shape != (N, N) or not np.all(np.isfinite(table)):
            raise ValueError(f"reward table must be a finite {N}x{N} array")
        if self.reward_orientation not in REWARD_ORIENTATIONS:
            raise ValueError(f"reward_orientation must be one of {REWARD_ORIENTATIONS}")
        if self.rotation_sign not in (1, -1):
            raise ValueError("rotation_sign must be +1 or -1")
        for p in (self.move_intended, self.stay_prob):
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"probability {p} outside [0, 1]")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")

    def reward_matrix(self) -> np.ndarray:
        """R[prev, next]."""
        table = np.asarray(self.reward_table, dtype=float)
        return table.T.copy() if self.reward_orientation == "rows-destination" else table.copy()


def ring_kernel(spec: RingSpec) -> np.ndarray:
    N = spec.num_positions
    P = np.zeros((N, 3, N))
    back = 1.0 - spec.move_intended
    side = (1.0 - spec.stay_prob) / 2
    for s in range(N):
        left, right = (s - 1) % N, (s + 1) % N
        P[s, 0, left] += spec.move_intended
        P[s, 0, right] += back
        P[s, 1, right] += spec.move_intended
        P[s, 1, left] += back
        P[s, 2, s] += spec.stay_prob
        P[s, 2, left] += side
        P[s, 2, right] += side
    return P


def build_ring(spec: RingSpec = RingSpec()) -> tuple[StageMDP, CamouflageScheme]:
    spec.validate()
    N = spec.num_positions
    mdp = StageMDP.stationary(ring_kernel(spec), spec.reward_matrix(), spec.horizon)
    sign = spec.rotation_sign

    def h(app, agent, s):
        return Perception((s + sign * app[0]) % N, 0)

    def circular(x, y):
        d = abs(x - y) % N
        return float(min(d, N - d))

    orientation = CamouflageObject("orientation", 0, tuple(range(N)), circular)
    scheme = CamouflageScheme(
        (orientation,), h, True, "ring-rotation", {"rotation_sign": sign}
    )
    return mdp, scheme


CHESS_MOVES = {"up": (-1, 0), "down": (1, 0), "left": (0, -1), "right": (0, 1)}
BOUNDARY_MODES = ("forbid", "clamp")


@dataclass(frozen=True)
class ChessboardSpec:
    """Square board with static attackers.

    ``boundary="forbid"`` removes off-board moves from the recipients'
    choices; ``"clamp"`` keeps them and leaves the recipient in place.
    Either way the transition row of an off-board move is a self-loop.
    ``action_order`` fixes action indices and thus tie-breaking.
    """

    q: int = 3
    attackers: tuple = ((1, 1), (2, 1))
    base_reward: float = 5.0
    bonus_cell: tuple = (0, 1)
    bonus_reward: float = 10.0
    attacker_reward: float = 1.0
    horizon: int = 5
    boundary: str = "forbid"
    action_order: tuple = ("up", "down", "right", "left")

    def __post_init__(self):
        object.__setattr__(self, "attackers", tuple(tuple(a) for a in self.attackers))
        object.__setattr__(self, "bonus_cell", tuple(self.bonus_cell))
        object.__setattr__(self, "action_order", tuple(self.action_order))

    def cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(self.q) for c in range(self.q)]

    def index(self, cell) -> int:
        return cell[0] * self.q + cell[1]

    def validate(self) -> None:
        if self.q < 1:
            raise ValueError("q must be positive")
        for a in self.attackers:
            if not (0 <= a[0] < self.q and 0 <= a[1] < self.q):
                raise ValueError(f"attacker {a} outside the {self.q}x{self.q} board")
        if len(set(self.attackers)) != len(self.attackers):
            raise ValueError("attacker positions must be distinct")
        if self.boundary not in BOUNDARY_MODES:
            raise ValueError(f"boundary must be one of {BOUNDARY_MODES}")
        if sorted(self.action_order) != sorted(CHESS_MOVES):
            raise ValueError(f"action_order must be a permutation of {sorted(CHESS_MOVES)}")
        if self.horizon < 0:
            raise ValueError("horizon must be non-negative")

    def cell_rewards(self, placement) -> np.ndarray:
        """Reward for entering each cell when attackers sit at ``placement``."""
        w = np.full(self.q * self.q, float(self.base_reward))
        if 0 <= self.bonus_cell[0] < self.q and 0 <= self.bonus_cell[1] < self.q:
            w[self.index(self.bonus_cell)] = self.bonus_reward
        for cell in placement:
            w[self.index(cell)] = self.attacker_reward
        return w


def build_chessboard(spec: ChessboardSpec = ChessboardSpec()) -> tuple[StageMDP, CamouflageScheme]:
    spec.validate()
    q = spec.q
    S = q * q
    P = np.zeros((S, 4, S))
    mask = np.ones((S, 4), dtype=bool)
    for r, c in spec.cells():
        s = r * q + c
        for a, name in enumerate(spec.action_order):
            dr, dc = CHESS_MOVES[name]
            rr, cc = r + dr, c + dc
            if 0 <= rr < q and 0 <= cc < q:
                P[s, a, rr * q + cc] = 1.0
            else:
                P[s, a, s] = 1.0
                mask[s, a] = spec.boundary == "clamp"
    cells = spec.cells()
    m = len(spec.attackers)
    configs = list(itertools.product(cells, repeat=m))
    R = np.stack([np.broadcast_to(spec.cell_rewards(cfg), (S, S)) for cfg in configs])
    mdp = StageMDP.stationary(
        P,
        R,
        spec.horizon,
        env_configs=configs,
        true_config=spec.attackers,
        action_mask=None if spec.boundary == "clamp" else mask,
    )

    def manhattan(x, y):
        return float(abs(x[0] - y[0]) + abs(x[1] - y[1]))

    objects = tuple(
        CamouflageObject(f"attacker{j}", pos, tuple(cells), manhattan)
        for j, pos in enumerate(spec.attackers)
    )

    def h(app, agent, s):
        return Perception(s, tuple(app))

    return mdp, CamouflageScheme(objects, h, True, "attacker-position", {"q": q})


def placements(spec: ChessboardSpec) -> list[tuple]:
    """All unordered sets of distinct attacker cells, as sorted tuples."""
    return list(itertools.combinations(spec.cells(), len(spec.attackers)))


def attacker_position_sweep(
    spec: ChessboardSpec,
    n: int,
    modes=("none", "camouflage", "spa"),
    placement_set=None,
    init=None,
    **run_kwargs,
) -> dict[str, np.ndarray]:
    """Run the selected planners for every attacker placement and average.

    Returns one averaged cumulative-reward trajectory per mode name.
    """
    from .planners import run_modes

    placement_set = placements(spec) if placement_set is None else placement_set
    if not placement_set:
        raise ValueError("no attacker placements to sweep")
    total: dict[str, np.ndarray] = {}
    for placement in placement_set:
        mdp, scheme = build_chessboard(replace(spec, attackers=tuple(placement)))
        start = uniform_joint(mdp.num_states, n) if init is None else init
        result = run_modes(mdp, scheme, n, start, modes, **run_kwargs)
        for name, traj in result.trajectories.items():
            total[name] = total.get(name, 0.0) + traj
    return {k: v / len(placement_set) for k, v in total.items()}


PRESETS = {
    "ring-v1": ("ring", {}, {"n": 2}),
    "chessboard-3x3-v1": ("chessboard", {"q": 3, "attackers": ((1, 1), (2, 1))}, {"n": 3}),
    "chessboard-2x2-v1": (
        "chessboard",
        {"q": 2, "attackers": ((0, 0),)},
        {"n": 2, "sweep_attackers": True},
    ),
}


def make_spec(preset: str, overrides: dict | None = None):
    """Resolve a named preset plus overrides into a Ring/Chessboard spec."""
    try:
        kind, base, _ = PRESETS[preset]
    except KeyError:
        raise KeyError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}") from None
    params = {**base, **(overrides or {})}
    if kind == "ring":
        if "reward_table" in params:
            params["reward_table"] = tuple(tuple(row) for row in params["reward_table"])
        return RingSpec(**params)
    if "attackers" in params:
        params["attackers"] = tuple(tuple(a) for a in params["attackers"])
    return ChessboardSpec(**params)


def build(spec) -> tuple[StageMDP, CamouflageScheme]:
    if isinstance(spec, RingSpec):
        return build_ring(spec)
    return build_chessboard(spec)
