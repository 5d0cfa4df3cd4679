"""Valid action sequences over a world.

Sampling picks uniformly among the executable actions at each step, which
is not uniform over whole trajectories.  Dead ends are handled by
depth-first backtracking under a node-visit budget.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Sequence

from .core import Atom, GroundedDomain, RacError, State, executable_actions, is_executable, step
from .textfmt import parse_atom
from .worlds import WorldInstance

DEFAULT_BUDGET = 100


class NoTrajectory(RacError):
    pass


class TooLarge(RacError):
    pass


class ReplayMismatch(RacError):
    pass


@dataclass(frozen=True)
class Trajectory:
    world: WorldInstance
    states: tuple[State, ...]
    actions: tuple[Atom, ...]

    @property
    def length(self) -> int:
        return len(self.actions)

    @property
    def domain(self) -> GroundedDomain:
        return self.world.grounded

    def state(self, t: int) -> State:
        return self.states[t]

    def to_json(self, embed_states: bool = False) -> dict:
        doc = {"world": self.world.canonical_hash, "actions": [str(a) for a in self.actions]}
        if embed_states:
            doc["states"] = [[str(a) for a in s.sorted_atoms()] for s in self.states]
        return doc

    def validate(self) -> None:
        """Replay the actions from s0 and compare with the stored states."""
        replay = replay_actions(self.world, self.actions)
        if replay.states != self.states:
            raise ReplayMismatch("stored states differ from replay")


def replay_actions(world: WorldInstance, actions: Sequence[Atom | str]) -> Trajectory:
    d = world.grounded
    states = [world.s0]
    acts = []
    for a in actions:
        a = parse_atom(a) if isinstance(a, str) else a
        states.append(step(d, states[-1], a))
        acts.append(a)
    return Trajectory(world, tuple(states), tuple(acts))


def enumerate_executable(d: GroundedDomain, s: State, skip_noops: bool = False) -> list[Atom]:
    acts = executable_actions(d, s)
    if skip_noops:
        acts = [a for a in acts if step(d, s, a) != s]
    return acts


def sample_trajectory(
    world: WorldInstance,
    n: int,
    rng_seed: int,
    budget: int = DEFAULT_BUDGET,
    skip_noops: bool = False,
) -> Trajectory:
    if n < 0:
        raise ValueError("trajectory length must be non-negative")
    d = world.grounded
    rng = random.Random(rng_seed)
    visits = 0

    def extend(states: list[State], acts: list[Atom]) -> bool:
        nonlocal visits
        if len(acts) == n:
            return True
        options = enumerate_executable(d, states[-1], skip_noops)
        rng.shuffle(options)
        for a in options:
            visits += 1
            if visits > budget:
                return False
            states.append(step(d, states[-1], a))
            acts.append(a)
            if extend(states, acts):
                return True
            states.pop()
            acts.pop()
        return False

    states, acts = [world.s0], []
    if not extend(states, acts):
        raise NoTrajectory(f"no length-{n} trajectory found within {budget} node visits")
    return Trajectory(world, tuple(states), tuple(acts))


def count_trajectories(world: WorldInstance | tuple[GroundedDomain, State], n: int, limit: int = 10 ** 6) -> int:
    """Exact number of executable action sequences of length ``n``."""
    d, s0 = (world.grounded, world.s0) if isinstance(world, WorldInstance) else world
    if n < 0:
        raise ValueError("n must be non-negative")
    if len(d.actions) ** n > limit:
        raise TooLarge(f"{len(d.actions)}^{n} exceeds {limit}")

    def count(s: State, k: int) -> int:
        if k == 0:
            return 1
        return sum(count(step(d, s, a), k - 1) for a in d.actions if is_executable(d, s, a))

    return count(s0, n)
