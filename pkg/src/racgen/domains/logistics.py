"""Logistics: packages moved by trucks (within a city) and airplanes (between airports).

``drive_truck`` carries no city argument; only same-city location pairs are
instantiated, which is where the city would have been bound.
"""
from functools import lru_cache

from ..schema import SchemaDomain
from ..textfmt import parse_schema

LOGISTICS = """\
% Logistics.
type: locatable, vehicle, location, city
type: package < locatable
type: truck < vehicle, locatable
type: airplane < vehicle, locatable
rigid: in_city(location, city), airport(location)
fluent: at(O:locatable, L:location)
fluent: in(P:package, V:vehicle)
fluent: outside(P:package)
action: load_truck(P:package, T:truck, L:location)
action: load_airplane(P:package, A:airplane, L:location)
action: unload_truck(P:package, T:truck, L:location)
action: unload_airplane(P:package, A:airplane, L:location)
action: drive_truck(T:truck, L1:location, L2:location) for C:city where L1 != L2, in_city(L1,C), in_city(L2,C)
action: fly_airplane(A:airplane, L1:location, L2:location) where L1 != L2, airport(L1), airport(L2)
load_truck(P,T,L) executable_if at(P,L), at(T,L), outside(P)
load_airplane(P,A,L) executable_if at(P,L), at(A,L), outside(P)
unload_truck(P,T,L) executable_if at(T,L), in(P,T)
unload_airplane(P,A,L) executable_if at(A,L), in(P,A)
drive_truck(T,L1,L2) executable_if at(T,L1)
fly_airplane(A,L1,L2) executable_if at(A,L1)
load_truck(P,T,L) causes in(P,T) if at(P,L)
load_airplane(P,A,L) causes in(P,A)
unload_truck(P,T,L) causes -in(P,T), outside(P)
unload_airplane(P,A,L) causes -in(P,A), outside(P)
drive_truck(T,L1,L2) causes at(T,L2)
fly_airplane(A,L1,L2) causes at(A,L2)
% same-timestep derivations
static -at(O,L1) if at(O,L) where L != L1
static at(P,L) if at(V,L), in(P,V) for V:vehicle
static -outside(P) if in(P,V)
"""


@lru_cache(maxsize=None)
def build_logistics() -> SchemaDomain:
    return parse_schema(LOGISTICS, "logistics")
