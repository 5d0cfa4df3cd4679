import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racgen.core import is_executable, step
from racgen.oracle import brute_count_trajectories
from racgen.trajectory import (
    NoTrajectory,
    ReplayMismatch,
    TooLarge,
    Trajectory,
    count_trajectories,
    replay_actions,
    sample_trajectory,
)
from racgen.worlds import generic_world, sample_world

from fixtures import small_blocks


@pytest.mark.parametrize("kind", ["blocks", "logistics", "dwr"])
def test_sampled_trajectory_is_valid(kind):
    w = sample_world(kind, "N1", 9)
    t = sample_trajectory(w, 4, rng_seed=2)
    assert t.length == 4 and len(t.states) == 5
    for i, a in enumerate(t.actions):
        assert is_executable(w.grounded, t.states[i], a)
        assert step(w.grounded, t.states[i], a) == t.states[i + 1]
    t.validate()


def test_sampling_is_deterministic():
    w = sample_world("logistics", "N2", 1)
    assert sample_trajectory(w, 3, 5).actions == sample_trajectory(w, 3, 5).actions


def test_dead_end_raises():
    w = generic_world("fluent: 1\naction: 1\n1 executable_if -1\n1 causes 1\n", [])
    assert sample_trajectory(w, 1, 0).length == 1
    with pytest.raises(NoTrajectory):
        sample_trajectory(w, 2, 0)


def test_zero_length():
    w = small_blocks(2)
    t = sample_trajectory(w, 0, 0)
    assert t.length == 0 and t.states == (w.s0,)


def test_replay_detects_tampering():
    w = small_blocks(3)
    t = sample_trajectory(w, 2, 1)
    bad = Trajectory(w, (t.states[0], t.states[0], t.states[2]), t.actions)
    with pytest.raises(ReplayMismatch):
        bad.validate()
    assert replay_actions(w, [str(a) for a in t.actions]).states == t.states


def test_count_guard():
    with pytest.raises(TooLarge):
        count_trajectories(sample_world("blocks", "N3", 0), 5, limit=1000)


def test_json_embeds_states():
    t = sample_trajectory(small_blocks(2), 1, 0)
    doc = t.to_json(embed_states=True)
    assert len(doc["states"]) == 2 and len(doc["actions"]) == 1


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["blocks", "logistics", "dwr", "generic"]), st.integers(0, 10 ** 6), st.integers(0, 2))
def test_count_matches_oracle(kind, seed, n):
    if kind == "blocks":
        w = small_blocks(3)
    else:
        from racgen.oracle import small_groundings

        w = small_groundings().get(kind) or sample_world("generic", "N1", seed)
    assert count_trajectories(w, n) == brute_count_trajectories(w.grounded, w.s0, n)
