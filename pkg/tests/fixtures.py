"""Hand-built worlds shared by several test modules."""
from __future__ import annotations

import itertools

from racgen.core import atom
from racgen.textfmt import parse_atom
from racgen.worlds import blocks_world, generic_world, make_world

GENERIC_EXAMPLE = """\
fluent: 1, 2, 3, 4, 5, 6, 7, 8
action: 1, 2, 3, 4, 5, 6, 7, 8
6 causes -6 if -7
2 causes -8
4 causes -8
8 causes 3 if 7, 8
1 causes -1
7 causes -8 if 1, -5
3 causes 8
5 causes 2
4 executable_if 3
3 executable_if 8
2 executable_if -8
"""


def generic_example():
    return generic_world(GENERIC_EXAMPLE, [parse_atom(x) for x in ("7", "1", "6", "8")])


def logistics_example():
    cities = {
        "delhi": ["market", "industry"],
        "uttarpradesh": ["ground", "fishery"],
        "rajasthan": ["airfield", "depot"],
        "jammu": ["seaport"],
        "kerala": ["forestry"],
    }
    rigid = [atom("in_city", loc, c) for c, locs in cities.items() for loc in locs]
    rigid += [atom("airport", a) for a in ("market", "seaport", "industry", "ground")]
    init = [
        atom("at", "bricks", "market"),
        atom("at", "mirror", "industry"),
        atom("at", "ashok", "market"),
        atom("at", "tata", "industry"),
        atom("at", "computers", "ground"),
        atom("at", "general", "ground"),
        atom("at", "dreamliner", "market"),
        atom("at", "boeing", "seaport"),
        atom("at", "cirrus", "industry"),
    ]
    objects = {
        "city": list(cities),
        "location": [loc for locs in cities.values() for loc in locs],
        "package": ["bricks", "mirror", "computers"],
        "truck": ["ashok", "tata", "general"],
        "airplane": ["dreamliner", "boeing", "cirrus"],
    }
    return make_world("logistics", objects, init, rigid)


def dwr_university():
    objects = {
        "location": ["teaching_building", "office", "library"],
        "robot": ["bob", "jame"],
        "crane": ["mary", "patricia", "jennifer"],
        "pile": ["pile_10", "pile_1", "p4"],
        "container": ["container1", "container2"],
    }
    rigid = [
        atom("belong", "mary", "teaching_building"),
        atom("belong", "patricia", "library"),
        atom("belong", "jennifer", "office"),
        atom("attached", "pile_10", "teaching_building"),
        atom("attached", "pile_1", "library"),
        atom("attached", "p4", "office"),
    ]
    for a, b in (("teaching_building", "library"), ("library", "office")):
        rigid += [atom("adjacent", a, b), atom("adjacent", b, a)]
    init = [
        atom("at", "bob", "library"),
        atom("at", "jame", "teaching_building"),
        atom("top", "container1", "pile_1"),
        atom("top", "container2", "p4"),
    ]
    return make_world("dwr", objects, init, rigid)


def dwr_harbor():
    objects = {
        "location": ["fishery", "airfield"],
        "robot": ["robot-3", "r10"],
        "crane": ["crane-9", "crane-7"],
        "pile": ["pile-9", "pile-12"],
        "container": ["seashell", "moccasin"],
    }
    rigid = [
        atom("adjacent", "fishery", "airfield"),
        atom("adjacent", "airfield", "fishery"),
        atom("attached", "pile-9", "fishery"),
        atom("attached", "pile-12", "airfield"),
        atom("belong", "crane-9", "fishery"),
        atom("belong", "crane-7", "airfield"),
    ]
    init = [
        atom("at", "robot-3", "airfield"),
        atom("at", "r10", "fishery"),
        atom("in", "moccasin", "pile-12"),
        atom("on", "seashell", "moccasin"),
        atom("top", "seashell", "pile-12"),
    ]
    return make_world("dwr", objects, init, rigid)


def tower_configurations(blocks):
    """Every arrangement of ``blocks`` into towers, each tower bottom to top."""
    seen = set()
    for perm in itertools.permutations(blocks):
        n = len(perm)
        for cuts in itertools.product((False, True), repeat=max(0, n - 1)):
            towers, cur = [], [perm[0]]
            for b, cut in zip(perm[1:], cuts):
                if cut:
                    towers.append(tuple(cur))
                    cur = [b]
                else:
                    cur.append(b)
            towers.append(tuple(cur))
            key = frozenset(towers)
            if key not in seen:
                seen.add(key)
                yield sorted(towers)


def small_blocks(n=3):
    return blocks_world([[f"b{i}" for i in range(n)]])
