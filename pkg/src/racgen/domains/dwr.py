"""Dock-Workers Robots.

Robots move between adjacent free locations; cranes move containers between
piles and robots at their own location.  ``unless`` laws are the default
definitions of ``unloaded`` and ``empty``: they hold when no instance of the
blocking atom does.
"""
from functools import lru_cache

from ..schema import SchemaDomain
from ..textfmt import parse_schema

DWR = """\
% Dock-Workers Robots.
type: location, robot, crane, pile, container
rigid: adjacent(location, location), attached(pile, location), belong(crane, location)
fluent: occupied(L:location)
fluent: at(R:robot, L:location)
fluent: loaded(R:robot, C:container)
fluent: unloaded(R:robot)
fluent: holding(K:crane, C:container)
fluent: empty(K:crane)
fluent: in(C:container, P:pile)
fluent: on(C1:container, C2:container) where C1 != C2
fluent: top(C:container, P:pile)
static occupied(L) if at(R,L)
static -at(R,L1) if at(R,L) where L != L1
static -unloaded(R) if loaded(R,C)
static unloaded(R) unless loaded(R,C)
static -empty(K) if holding(K,C)
static empty(K) unless holding(K,C)
static -top(C,P) if holding(K,C)
static -top(C,P) if loaded(R,C)
static -top(C2,P) if on(C,C2) where C != C2
static in(C,P) if on(C2,C), in(C2,P) where C != C2
static in(C,P) if top(C,P)
static -in(C,P) if in(C,P2) where P != P2
static -in(C,P) if holding(K,C)
static -in(C,P) if loaded(R,C)
action: move(R:robot, L:location, L1:location) where adjacent(L,L1)
move(R,L,L1) executable_if at(R,L), -occupied(L1)
move(R,L,L1) causes at(R,L1), -occupied(L)
action: take(C:container, K:crane, P:pile) for L:location where attached(P,L), belong(K,L)
take(C,K,P) executable_if empty(K), top(C,P)
take(C,K,P) causes holding(K,C)
take(C,K,P) causes top(C2,P) if on(C,C2) where C != C2
take(C,K,P) causes -on(C,C2) if on(C,C2) where C != C2
action: putdown(C:container, K:crane, P:pile) for L:location where attached(P,L), belong(K,L)
putdown(C,K,P) executable_if holding(K,C)
putdown(C,K,P) causes top(C,P), empty(K), -holding(K,C)
putdown(C,K,P) causes on(C,C2) if top(C2,P) where C != C2
action: load(C:container, K:crane, R:robot)
load(C,K,R) executable_if unloaded(R), at(R,L), holding(K,C) where belong(K,L)
load(C,K,R) causes loaded(R,C), empty(K), -holding(K,C)
action: unload(C:container, K:crane, R:robot)
unload(C,K,R) executable_if loaded(R,C), at(R,L), empty(K) where belong(K,L)
unload(C,K,R) causes unloaded(R), holding(K,C), -loaded(R,C)
"""


@lru_cache(maxsize=None)
def build_dwr() -> SchemaDomain:
    return parse_schema(DWR, "dwr")
