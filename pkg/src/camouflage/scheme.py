"""Camouflageable objects and the perception map seen by recipients."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Hashable, NamedTuple, Sequence

import numpy as np

from .mdp import StageMDP


class Perception(NamedTuple):
    own_state: int
    env_config: Hashable


@dataclass(frozen=True)
class CamouflageObject:
    """An object whose appearance the attackers control.

    ``true_status`` must be one of ``appearances`` so that leaving the
    object as it is stays possible. ``distance`` measures how far an
    appearance is from the true status and prices budgeted camouflage.
    """

    name: str
    true_status: Hashable
    appearances: tuple
    distance: Callable[[Hashable, Hashable], float] | None = None

    def __post_init__(self):
        object.__setattr__(self, "appearances", tuple(self.appearances))
        if self.true_status not in self.appearances:
            raise ValueError(
                f"object {self.name!r}: true status {self.true_status!r} "
                "is not among its appearances"
            )

    def cost_distance(self, appearance) -> float:
        if appearance == self.true_status:
            return 0.0
        if self.distance is None:
            return 1.0
        return float(self.distance(self.true_status, appearance))


PerceptionMap = Callable[[tuple, int, int], Perception]


@dataclass(frozen=True, eq=False)
class CamouflageScheme:
    """Objects plus the perception map ``h(appearance, agent, own_state)``.

    The map receives the agent's own actual state only; both the ring and
    the chessboard perception maps have this form.
    """

    objects: tuple[CamouflageObject, ...]
    perception: PerceptionMap
    shared_observation: bool = True
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "objects", tuple(self.objects))

    @property
    def num_objects(self) -> int:
        return len(self.objects)


def enumerate_appearances(scheme: CamouflageScheme) -> list[tuple]:
    """Cartesian product of appearance domains, in lexicographic order."""
    return list(itertools.product(*(o.appearances for o in scheme.objects)))


def identity_appearance(scheme: CamouflageScheme) -> tuple:
    return tuple(o.true_status for o in scheme.objects)


def identity_index(scheme: CamouflageScheme) -> int:
    return enumerate_appearances(scheme).index(identity_appearance(scheme))


def _check_appearance(scheme: CamouflageScheme, appearance: tuple) -> None:
    if len(appearance) != scheme.num_objects or any(
        y not in o.appearances for y, o in zip(appearance, scheme.objects)
    ):
        raise ValueError(f"appearance {appearance!r} is outside the scheme's domains")


def perceive(
    scheme: CamouflageScheme,
    appearance: Sequence,
    actual: Sequence[int],
    agent: int,
) -> Perception:
    appearance = tuple(appearance)
    _check_appearance(scheme, appearance)
    if not 0 <= agent < len(actual):
        raise IndexError(f"agent {agent} outside joint state of length {len(actual)}")
    return scheme.perception(appearance, agent, int(actual[agent]))


@dataclass(frozen=True)
class PerceptionTables:
    """Perceptions tabulated over appearances, agents and own states.

    ``own[y, i, s]`` and ``config[y, i, s]`` (a config index into the MDP)
    give what agent i at own state s perceives under appearance index y.
    """

    appearances: list[tuple]
    identity: int
    own: np.ndarray
    config: np.ndarray


def tabulate(scheme: CamouflageScheme, mdp: StageMDP, n: int) -> PerceptionTables:
    apps = enumerate_appearances(scheme)
    S = mdp.num_states
    own = np.empty((len(apps), n, S), dtype=np.int64)
    cfg = np.empty_like(own)
    for y, app in enumerate(apps):
        for i in range(n):
            for s in range(S):
                p = scheme.perception(app, i, s)
                if not 0 <= p.own_state < S:
                    raise ValueError(f"perceived state {p.own_state} outside [0, {S})")
                own[y, i, s] = p.own_state
                cfg[y, i, s] = mdp.config_index(p.env_config)
    return PerceptionTables(apps, apps.index(identity_appearance(scheme)), own, cfg)


def perception_domain(
    scheme: CamouflageScheme, mdp: StageMDP, own_state: int, agent: int = 0, widen: bool = False
) -> list[Perception]:
    """Delusions a free state-perception attacker may impose.

    By default this is everything camouflage itself can make the agent
    perceive. ``widen=True`` allows any own state with any configuration.
    """
    if widen:
        return [
            Perception(s, c) for s in range(mdp.num_states) for c in mdp.env_configs
        ]
    seen: dict[Perception, None] = {}
    for app in enumerate_appearances(scheme):
        seen.setdefault(scheme.perception(app, agent, own_state), None)
    return list(seen)


def check_shared_observation(scheme: CamouflageScheme, mdp: StageMDP, n: int) -> list[str]:
    """Violations of the identical-observation hypothesis, empty if none."""
    problems = []
    if not scheme.shared_observation:
        problems.append("scheme is not declared shared_observation")
    tables = tabulate(scheme, mdp, n)
    for i in range(1, n):
        if not (
            np.array_equal(tables.own[:, i], tables.own[:, 0])
            and np.array_equal(tables.config[:, i], tables.config[:, 0])
        ):
            problems.append(f"agent {i} perceives differently from agent 0")
    return problems


def table_scheme(own_table, config_table=None, env_configs=(0,)) -> CamouflageScheme:
    """Scheme with one object whose appearance k selects rows of lookup tables.

    ``own_table[k][s]`` is the perceived own state and ``config_table[k][s]``
    the index of the perceived configuration within ``env_configs``.
    Appearance 0 is the truth and must be the identity.
    """
    own_table = np.asarray(own_table, dtype=np.int64)
    K, S = own_table.shape
    if config_table is None:
        config_table = np.zeros_like(own_table)
    config_table = np.asarray(config_table, dtype=np.int64)
    if not np.array_equal(own_table[0], np.arange(S)):
        raise ValueError("appearance 0 must leave own states unchanged")
    env_configs = tuple(env_configs)

    def h(app, agent, s):
        k = app[0]
        return Perception(int(own_table[k, s]), env_configs[config_table[k, s]])

    obj = CamouflageObject("table", 0, tuple(range(K)), lambda x, y: abs(x - y))
    return CamouflageScheme(
        (obj,), h, True, "table", {"own": own_table.tolist(), "config": config_table.tolist()}
    )
