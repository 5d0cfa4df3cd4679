"""Random initial worlds per domain and complexity level.

A world is an object universe, its rigid facts and a complete initial state
over the grounded domain.  Its hash covers the sorted objects, rigid facts
and true atoms (plus the laws, for generic worlds), so it does not depend on
the order facts were produced in.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
import random
import re
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from importlib import resources
from typing import Iterable, Sequence

from .core import Atom, GroundedDomain, RacError, State, atom, initial_state
from .schema import ObjectUniverse, ground
from .domains import BUILDERS
from .synth import GenericParams, synth_generic
from .textfmt import format_grounded, parse_atom, parse_grounded

log = logging.getLogger(__name__)

DOMAIN_KINDS = ("blocks", "logistics", "dwr", "generic")
GENERIC_BANDS = ((1, 4), (5, 7), (8, 10), (11, 15), (16, 20))


class InvalidLevel(RacError):
    pass


@dataclass(frozen=True)
class ComplexityLevel:
    kind: str  # "novel_world" or "action_depth"
    index: int

    def __post_init__(self) -> None:
        if self.kind not in ("novel_world", "action_depth"):
            raise InvalidLevel(f"unknown level kind {self.kind!r}")
        if not 1 <= self.index <= 5:
            raise InvalidLevel(f"level index {self.index} outside 1..5")

    @classmethod
    def parse(cls, text: str) -> "ComplexityLevel":
        m = re.fullmatch(r"([NnAa])([1-5])", text.strip())
        if not m:
            raise InvalidLevel(f"expected N1..N5 or A1..A5, got {text!r}")
        kind = "novel_world" if m.group(1).upper() == "N" else "action_depth"
        return cls(kind, int(m.group(2)))

    def __str__(self) -> str:
        return ("N" if self.kind == "novel_world" else "A") + str(self.index)

    @property
    def band(self) -> int:
        """Object count for the BLD domains: 2..6."""
        return self.index + 1


@dataclass(frozen=True)
class WorldConfig:
    max_tower_height: int = 4
    logistics_locations_per_city: tuple[int, int] = (1, 2)
    dwr_extra_edge_prob: float = 0.3
    generic_m_pre: int = 3
    generic_m_effects: int = 3
    generic_m_c_effect: int = 2


DEFAULT_CONFIG = WorldConfig()


@lru_cache(maxsize=None)
def lexicons() -> dict[str, tuple[str, ...]]:
    raw = json.loads(resources.files("racgen").joinpath("data/lexicons.json").read_text("utf-8"))
    return {k: tuple(v) for k, v in raw.items()}


@dataclass
class WorldInstance:
    domain_kind: str
    objects: dict[str, tuple[str, ...]]
    rigid: frozenset[Atom]
    grounded: GroundedDomain
    s0: State
    canonical_hash: str = ""
    # Declared initial facts before closure; rendering uses s0.
    initially: frozenset[Atom] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if not self.canonical_hash:
            self.canonical_hash = world_hash(self)

    @property
    def universe(self) -> ObjectUniverse:
        return ObjectUniverse(self.objects, self.rigid)

    def objects_of(self, t: str) -> tuple[str, ...]:
        cache = self._members
        if t not in cache:
            subs = subtypes(self.domain_kind, t)
            cache[t] = tuple(sorted(o for leaf, names in self.objects.items() if leaf in subs for o in names))
        return cache[t]

    @cached_property
    def _members(self) -> dict[str, tuple[str, ...]]:
        return {}

    def type_of(self, name: str) -> str | None:
        return self._type_index.get(name)

    @cached_property
    def _type_index(self) -> dict[str, str]:
        return {o: t for t, names in self.objects.items() for o in names}

    def to_json(self) -> dict:
        doc = {
            "domain": self.domain_kind,
            "objects": {t: list(v) for t, v in sorted(self.objects.items())},
            "rigid": sorted(str(a) for a in self.rigid),
            "initially": sorted(str(a) for a in self.s0.true_atoms),
            "hash": self.canonical_hash,
        }
        if self.domain_kind == "generic":
            doc["domain_text"] = format_grounded(self.grounded)
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "WorldInstance":
        kind = doc["domain"]
        objects = {t: tuple(v) for t, v in doc.get("objects", {}).items()}
        rigid = frozenset(parse_atom(s) for s in doc.get("rigid", []))
        init = frozenset(parse_atom(s) for s in doc.get("initially", []))
        if kind == "generic":
            d, _ = parse_grounded(doc["domain_text"])
        elif kind in BUILDERS:
            d = ground(BUILDERS[kind](), ObjectUniverse(objects, rigid), allow_empty=True)
        else:
            raise InvalidLevel(f"unknown domain {kind!r}")
        w = cls(kind, objects, rigid, d, initial_state(d, init), initially=init)
        if doc.get("hash") and doc["hash"] != w.canonical_hash:
            raise RacError(f"world hash mismatch: stored {doc['hash']}, computed {w.canonical_hash}")
        return w

    def to_domain_text(self) -> str:
        return format_grounded(self.grounded, self.s0.true_atoms)


@lru_cache(maxsize=None)
def subtypes(kind: str, t: str) -> frozenset[str]:
    """All declared types of ``kind`` that are ``t`` or below it."""
    if kind not in BUILDERS:
        return frozenset()
    schema = BUILDERS[kind]()
    return frozenset(x for x in schema.type_names if schema.is_subtype(x, t))


def world_hash(w: WorldInstance) -> str:
    h = hashlib.sha256()
    h.update(w.domain_kind.encode())
    for t in sorted(w.objects):
        h.update(f"\n{t}:" .encode() + ",".join(sorted(w.objects[t])).encode())
    h.update(b"\nrigid:" + ",".join(sorted(str(a) for a in w.rigid)).encode())
    h.update(b"\ns0:" + ",".join(sorted(str(a) for a in w.s0.true_atoms)).encode())
    if w.domain_kind == "generic":
        h.update(b"\nlaws:" + format_grounded(w.grounded).encode())
    return h.hexdigest()[:32]


def make_world(
    kind: str,
    objects: dict[str, Sequence[str]],
    initially: Iterable[Atom],
    rigid: Iterable[Atom] = (),
) -> WorldInstance:
    """Ground a BLD domain over ``objects`` and settle ``initially`` into s0."""
    objects = {t: tuple(v) for t, v in objects.items()}
    rigid = frozenset(rigid)
    d = ground(BUILDERS[kind](), ObjectUniverse(objects, rigid), allow_empty=True)
    init = frozenset(initially)
    return WorldInstance(kind, objects, rigid, d, initial_state(d, init), initially=init)


def sample_world(
    kind: str,
    level: ComplexityLevel | str,
    rng_seed: int,
    config: WorldConfig = DEFAULT_CONFIG,
) -> WorldInstance:
    if isinstance(level, str):
        level = ComplexityLevel.parse(level)
    if level.kind != "novel_world":
        raise InvalidLevel(f"worlds are sampled at novel-world levels, got {level}")
    rng = random.Random(rng_seed)
    if kind == "blocks":
        return _blocks(rng, level.band, config)
    if kind == "logistics":
        return _logistics(rng, level.band, config)
    if kind == "dwr":
        return _dwr(rng, level.band, config)
    if kind == "generic":
        return _generic(rng, level.index, config)
    raise InvalidLevel(f"unknown domain {kind!r}")


def blocks_world(towers: Sequence[Sequence[str]]) -> WorldInstance:
    """Blocks world from towers listed bottom to top."""
    init: list[Atom] = []
    for tower in towers:
        init.append(atom("ontable", tower[0]))
        init.extend(atom("on", upper, lower) for lower, upper in zip(tower, tower[1:]))
        init.append(atom("clear", tower[-1]))
    return make_world("blocks", {"block": tuple(b for t in towers for b in t)}, init)


def _blocks(rng: random.Random, n_towers: int, cfg: WorldConfig) -> WorldInstance:
    heights = [rng.randint(1, cfg.max_tower_height) for _ in range(n_towers)]
    names = rng.sample(lexicons()["block"], sum(heights))
    towers, i = [], 0
    for h in heights:
        towers.append(names[i:i + h])
        i += h
    return blocks_world(towers)


def _logistics(rng: random.Random, v: int, cfg: WorldConfig) -> WorldInstance:
    lex = lexicons()
    cities = rng.sample(lex["city"], v)
    lo, hi = cfg.logistics_locations_per_city
    sizes = [rng.randint(lo, hi) for _ in cities]
    locations = rng.sample(lex["location"], sum(sizes))
    rigid: list[Atom] = []
    i = 0
    for c, k in zip(cities, sizes):
        rigid.extend(atom("in_city", loc, c) for loc in locations[i:i + k])
        i += k
    n_airports = min(len(locations), max(2, math.ceil(len(locations) / 2)))
    airports = sorted(rng.sample(locations, n_airports))
    rigid.extend(atom("airport", a) for a in airports)
    trucks = rng.sample(lex["truck"], v)
    planes = rng.sample(lex["airplane"], v)
    packages = rng.sample(lex["package"], v)
    init = [atom("at", t, rng.choice(locations)) for t in trucks]
    init += [atom("at", p, rng.choice(airports)) for p in planes]
    for p in packages:
        init += [atom("at", p, rng.choice(locations)), atom("outside", p)]
    objects = {
        "city": cities,
        "location": locations,
        "truck": trucks,
        "airplane": planes,
        "package": packages,
    }
    return make_world("logistics", objects, init, rigid)


def _dwr(rng: random.Random, v: int, cfg: WorldConfig) -> WorldInstance:
    lex = lexicons()
    locations = rng.sample(lex["dwr_location"], v)
    cranes = rng.sample(lex["crane"], v)
    robots = rng.sample(lex["robot"], v)
    piles = rng.sample(lex["pile"], v)
    containers = rng.sample(lex["container"], v)
    rigid: set[Atom] = set()
    order = locations[:]
    rng.shuffle(order)
    for i in range(1, len(order)):
        j = rng.randrange(i)
        rigid |= {atom("adjacent", order[i], order[j]), atom("adjacent", order[j], order[i])}
    for i, a in enumerate(locations):
        for b in locations[i + 1:]:
            if atom("adjacent", a, b) not in rigid and rng.random() < cfg.dwr_extra_edge_prob:
                rigid |= {atom("adjacent", a, b), atom("adjacent", b, a)}
    for p, loc in zip(piles, locations):
        rigid.add(atom("attached", p, loc))
    for k, loc in zip(cranes, locations):
        rigid.add(atom("belong", k, loc))
    init: list[Atom] = []
    for r, loc in zip(robots, rng.sample(locations, len(robots))):
        init.append(atom("at", r, loc))
    stacks: dict[str, list[str]] = {p: [] for p in piles}
    for c in containers:
        stacks[rng.choice(piles)].append(c)
    for p, stack in stacks.items():  # bottom to top
        for c in stack:
            init.append(atom("in", c, p))
        for lower, upper in zip(stack, stack[1:]):
            init.append(atom("on", upper, lower))
        if stack:
            init.append(atom("top", stack[-1], p))
    objects = {"location": locations, "crane": cranes, "robot": robots, "pile": piles, "container": containers}
    return make_world("dwr", objects, init, rigid)


def _generic(rng: random.Random, index: int, cfg: WorldConfig) -> WorldInstance:
    lo, hi = GENERIC_BANDS[index - 1]
    p = GenericParams(
        n_fluents=rng.randint(lo, hi),
        n_actions=rng.randint(lo, hi),
        m_pre=cfg.generic_m_pre,
        m_effects=cfg.generic_m_effects,
        m_c_effect=cfg.generic_m_c_effect,
        seed=rng.getrandbits(64),
    )
    d = synth_generic(p)
    init = frozenset(f for f in d.sorted_fluents if rng.random() < 0.5)
    return WorldInstance("generic", {}, frozenset(), d, State(init), initially=init)


def generic_world(domain_text: str, initially: Iterable[Atom]) -> WorldInstance:
    d, _ = parse_grounded(domain_text)
    init = frozenset(initially)
    return WorldInstance("generic", {}, frozenset(), d, initial_state(d, init), initially=init)


def partition_worlds(
    worlds: Sequence[WorldInstance], test_fraction: float, seed: int = 0
) -> tuple[list[WorldInstance], list[WorldInstance]]:
    """Split worlds by hash into disjoint train and test lists."""
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError("test_fraction must lie in [0, 1]")
    unique: dict[str, WorldInstance] = {}
    for w in worlds:
        if w.canonical_hash in unique:
            log.warning("dropping duplicate world %s", w.canonical_hash)
            continue
        unique[w.canonical_hash] = w
    train, test = partition_hashes(unique, test_fraction, seed)
    return [unique[k] for k in train], [unique[k] for k in test]


def partition_hashes(hashes: Iterable[str], test_fraction: float, seed: int = 0) -> tuple[list[str], list[str]]:
    """Sort, shuffle under ``seed`` and cut off ``round(n * test_fraction)`` for test."""
    if not 0.0 <= test_fraction <= 1.0:
        raise ValueError("test_fraction must lie in [0, 1]")
    keys = sorted(set(hashes))
    random.Random(seed).shuffle(keys)
    n_test = round(len(keys) * test_fraction)
    return keys[n_test:], keys[:n_test]
