"""Blocks World: the move encoding and the four-operator gripper encoding.

The move encoding is the one rendered to text.  The gripper encoding
(pickup/putdown/stack/unstack with holding/handempty) is kept to cross-check
the first: every move corresponds to a two-step gripper plan.
"""
from functools import lru_cache

from ..schema import SchemaDomain
from ..textfmt import parse_schema

BLOCKS_MOVE = """\
% Blocks World, one-step move encoding. X, Y, Z are pairwise distinct blocks.
type: block
fluent: on(X:block, Y:block) where X != Y
fluent: ontable(X:block)
fluent: clear(X:block)
action: move(X:block, Y:block) where X != Y
action: move(X:block, table)
move(X,Y) executable_if clear(X), clear(Y)
move(X,table) executable_if clear(X)
move(X,Y) causes on(X,Y), -clear(Y)
move(X,Y) causes clear(Z) if on(X,Z) for Z:block where Z != X, Z != Y
move(X,Y) causes -on(X,Z) if on(X,Z) for Z:block where Z != X, Z != Y
move(X,Y) causes -ontable(X) if ontable(X)
move(X,table) causes ontable(X)
move(X,table) causes clear(Z) if on(X,Z) for Z:block where Z != X
move(X,table) causes -on(X,Z) if on(X,Z) for Z:block where Z != X
"""

BLOCKS_STRIPS = """\
% Blocks World with a gripper.
type: block
fluent: on(X:block, Y:block) where X != Y
fluent: ontable(X:block), clear(X:block), holding(X:block), handempty
action: pickup(X:block), putdown(X:block)
action: stack(X:block, Y:block) where X != Y
action: unstack(X:block, Y:block) where X != Y
pickup(X) executable_if handempty, clear(X), ontable(X)
putdown(X) executable_if holding(X)
stack(X,Y) executable_if holding(X), clear(Y)
unstack(X,Y) executable_if handempty, on(X,Y), clear(X)
pickup(X) causes -ontable(X), -handempty, holding(X)
putdown(X) causes -holding(X), clear(X), ontable(X), handempty
stack(X,Y) causes clear(X), -clear(Y), -holding(X), handempty, on(X,Y)
unstack(X,Y) causes -clear(X), clear(Y), holding(X), -handempty, -on(X,Y)
"""


@lru_cache(maxsize=None)
def build_blocks_move() -> SchemaDomain:
    return parse_schema(BLOCKS_MOVE, "blocks")


@lru_cache(maxsize=None)
def build_blocks_strips() -> SchemaDomain:
    return parse_schema(BLOCKS_STRIPS, "blocks_strips")
