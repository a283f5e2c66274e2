import numpy as np
import pytest

from camouflage import build_chessboard, build_ring
from camouflage.environments import ChessboardSpec
from camouflage.scheme import (
    CamouflageObject,
    check_shared_observation,
    enumerate_appearances,
    identity_index,
    perceive,
    perception_domain,
    table_scheme,
    tabulate,
)


def test_true_status_must_be_an_appearance():
    with pytest.raises(ValueError):
        CamouflageObject("x", 5, (0, 1))


def test_cost_distance_zero_for_truth_and_default_metric():
    obj = CamouflageObject("x", 0, (0, 1, 2))
    assert obj.cost_distance(0) == 0.0
    assert obj.cost_distance(2) == 1.0


def test_ring_perception_rotates_own_state():
    _, scheme = build_ring()
    assert perceive(scheme, (0,), (2, 1), 0).own_state == 2
    assert perceive(scheme, (1,), (2, 1), 0).own_state == 0
    assert perceive(scheme, (2,), (2, 1), 1).own_state == 0
    with pytest.raises(ValueError):
        perceive(scheme, (3,), (0, 0), 0)


def test_chessboard_enumeration_and_identity():
    mdp, scheme = build_chessboard()
    apps = enumerate_appearances(scheme)
    assert len(apps) == 81
    assert apps[identity_index(scheme)] == ((1, 1), (2, 1))
    tables = tabulate(scheme, mdp, 3)
    assert tables.own.shape == (81, 3, 9)
    assert (tables.own == np.arange(9)).all()


def test_perception_domain_default_and_widened():
    mdp, scheme = build_ring()
    assert sorted(p.own_state for p in perception_domain(scheme, mdp, 1)) == [0, 1, 2]
    assert len(perception_domain(scheme, mdp, 1, widen=True)) == 3


def test_shared_observation_check():
    mdp, scheme = build_ring()
    assert check_shared_observation(scheme, mdp, 2) == []
    from dataclasses import replace
    assert check_shared_observation(replace(scheme, shared_observation=False), mdp, 2)


def test_table_scheme_requires_identity_row():
    with pytest.raises(ValueError):
        table_scheme([[1, 0], [0, 1]])
