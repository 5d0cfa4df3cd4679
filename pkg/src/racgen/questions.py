"""Abstract questions over trajectories and their ground-truth answers.

A query names a time step and one of four operations: whether a literal
holds, whether an action is executable, how many objects satisfy a
catalogued condition, or which object fills the masked argument of a true
relation.  ``evaluate`` is the single source of truth for answers.
"""
from __future__ import annotations

import random
from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

from .core import Atom, Literal, RacError, State, is_executable
from .textfmt import parse_atom, parse_literal
from .trajectory import Trajectory
from .worlds import WorldInstance, subtypes

YES, NO, NONE = "yes", "no", "none"
MASK = "?"


class MalformedQuery(RacError):
    pass


class InsufficientFacts(RacError):
    pass


@dataclass(frozen=True)
class Query:
    op: str  # holds | executable | count | mask
    t: int
    literal: Literal | None = None
    action: Atom | None = None
    condition: str | None = None
    args: tuple[str, ...] = ()
    pattern: Atom | None = None
    filler_type: str | None = None

    @property
    def mask_position(self) -> int:
        if self.pattern is None or self.pattern.args.count(MASK) != 1:
            raise MalformedQuery("mask pattern needs exactly one masked argument")
        return self.pattern.args.index(MASK)

    def to_json(self) -> dict:
        doc: dict = {"op": self.op, "t": self.t}
        if self.op == "holds":
            doc["literal"] = str(self.literal)
        elif self.op == "executable":
            doc["action"] = str(self.action)
        elif self.op == "count":
            doc["condition"] = self.condition
            doc["args"] = list(self.args)
        elif self.op == "mask":
            doc["predicate"] = self.pattern.predicate
            doc["args"] = list(self.pattern.args)
            doc["filler_type"] = self.filler_type
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Query":
        try:
            op, t = doc["op"], int(doc["t"])
            if op == "holds":
                return cls(op, t, literal=parse_literal(doc["literal"]))
            if op == "executable":
                return cls(op, t, action=parse_atom(doc["action"]))
            if op == "count":
                return cls(op, t, condition=doc["condition"], args=tuple(doc.get("args", ())))
            if op == "mask":
                return cls(op, t, pattern=Atom(doc["predicate"], tuple(doc["args"])), filler_type=doc["filler_type"])
        except (KeyError, TypeError, ValueError, RacError) as exc:
            raise MalformedQuery(f"bad query {doc!r}: {exc}") from exc
        raise MalformedQuery(f"unknown query op {doc.get('op')!r}")


@dataclass(frozen=True)
class AbstractQuestion:
    kind: str  # verify | counting | others
    query: Query
    answer: str

    def to_json(self) -> dict:
        return {"kind": self.kind, "query": self.query.to_json(), "answer": self.answer}


# Counting conditions ---------------------------------------------------------


@dataclass(frozen=True)
class Condition:
    name: str
    param_types: tuple[str, ...]
    count: Callable[[WorldInstance, State, tuple[str, ...]], int]


def _true_count(pred: str, arity: int, fixed: dict[int, int] | None = None, types: dict[int, str] | None = None):
    """Count true atoms of ``pred``; ``fixed`` maps arg position to a query parameter index."""
    fixed = fixed or {}
    types = types or {}

    def count(w: WorldInstance, s: State, params: tuple[str, ...]) -> int:
        n = 0
        for a in s.true_atoms:
            if a.predicate != pred or len(a.args) != arity:
                continue
            if any(a.args[pos] != params[i] for pos, i in fixed.items()):
                continue
            if any(w.type_of(a.args[pos]) not in _leaf_types(w, t) for pos, t in types.items()):
                continue
            n += 1
        return n

    return count


def _leaf_types(w: WorldInstance, t: str) -> frozenset[str]:
    return subtypes(w.domain_kind, t)


def _not_count(pred: str, objtype: str):
    def count(w: WorldInstance, s: State, params: tuple[str, ...]) -> int:
        return sum(1 for o in w.objects_of(objtype) if Atom(pred, (o,)) not in s.true_atoms)

    return count


def _executable_count(w: WorldInstance, s: State, params: tuple[str, ...]) -> int:
    d = w.grounded
    return sum(1 for a in d.actions if is_executable(d, s, a))


def _towers(w: WorldInstance, s: State) -> list[int]:
    above = {a.args[1]: a.args[0] for a in s.true_atoms if a.predicate == "on"}
    heights = []
    for a in s.true_atoms:
        if a.predicate == "ontable":
            h, b = 1, a.args[0]
            while b in above:
                b = above[b]
                h += 1
            heights.append(h)
    return heights


CATALOGS: dict[str, dict[str, Condition]] = {
    "blocks": {
        c.name: c
        for c in [
            Condition("blocks_on_table", (), _true_count("ontable", 1)),
            Condition("clear_blocks", (), _true_count("clear", 1)),
            Condition("stacks_of_two_or_more", (), lambda w, s, p: sum(1 for h in _towers(w, s) if h >= 2)),
            Condition("tallest_stack", (), lambda w, s, p: max(_towers(w, s), default=0)),
            Condition("executable_actions", (), _executable_count),
        ]
    },
    "logistics": {
        c.name: c
        for c in [
            Condition("packages_at", ("location",), _true_count("at", 2, {1: 0}, {0: "package"})),
            Condition("trucks_at", ("location",), _true_count("at", 2, {1: 0}, {0: "truck"})),
            Condition("airplanes_at", ("location",), _true_count("at", 2, {1: 0}, {0: "airplane"})),
            Condition("packages_in", ("vehicle",), _true_count("in", 2, {1: 0})),
            Condition("executable_actions", (), _executable_count),
        ]
    },
    "dwr": {
        c.name: c
        for c in [
            Condition("cranes_empty", (), _true_count("empty", 1)),
            Condition("cranes_not_empty", (), _not_count("empty", "crane")),
            Condition("containers_in", ("pile",), _true_count("in", 2, {1: 0})),
            Condition("locations_occupied", (), _true_count("occupied", 1)),
            Condition("robots_unloaded", (), _true_count("unloaded", 1)),
            Condition("robots_loaded", (), _not_count("unloaded", "robot")),
            Condition("executable_actions", (), _executable_count),
        ]
    },
    "generic": {
        c.name: c
        for c in [
            Condition("fluents_true", (), lambda w, s, p: len(s.true_atoms)),
            Condition("executable_actions", (), _executable_count),
        ]
    },
}


# Verify and mask vocabularies -----------------------------------------------


@dataclass(frozen=True)
class VerifySpec:
    # predicate -> whether a negated form can be asked
    fluents: dict[str, bool]


VERIFY: dict[str, VerifySpec] = {
    "blocks": VerifySpec({"on": True, "ontable": True, "clear": True}),
    "logistics": VerifySpec({"at": False, "in": True}),
    "dwr": VerifySpec(
        {
            "at": False,
            "loaded": False,
            "unloaded": True,
            "empty": True,
            "holding": False,
            "top": False,
            "in": False,
            "occupied": True,
        }
    ),
    "generic": VerifySpec({}),  # every numbered fluent, negatable
}


@dataclass(frozen=True)
class MaskSpec:
    predicate: str
    position: int
    arg_types: tuple[str, ...]
    none_ok: bool

    @property
    def filler_type(self) -> str:
        return self.arg_types[self.position]

    @property
    def key(self) -> str:
        return f"{self.predicate}:{self.position}:{self.filler_type}"


MASKS: dict[str, list[MaskSpec]] = {
    "blocks": [
        MaskSpec("on", 0, ("block", "block"), True),
        MaskSpec("on", 1, ("block", "block"), False),
    ],
    "logistics": [
        MaskSpec("at", 1, ("truck", "location"), False),
        MaskSpec("at", 1, ("airplane", "location"), False),
        MaskSpec("at", 1, ("package", "location"), False),
        MaskSpec("at", 0, ("package", "location"), True),
        MaskSpec("at", 0, ("truck", "location"), True),
        MaskSpec("in", 1, ("package", "vehicle"), True),
        MaskSpec("in", 0, ("package", "vehicle"), True),
    ],
    "dwr": [
        MaskSpec("at", 1, ("robot", "location"), False),
        MaskSpec("at", 0, ("robot", "location"), True),
        MaskSpec("in", 1, ("container", "pile"), True),
        MaskSpec("top", 0, ("container", "pile"), True),
        MaskSpec("loaded", 1, ("robot", "container"), True),
        MaskSpec("holding", 1, ("crane", "container"), True),
        MaskSpec("on", 1, ("container", "container"), False),
    ],
    "generic": [],
}


def mask_spec_for(domain: str, q: Query) -> MaskSpec:
    pos = q.mask_position
    for m in MASKS.get(domain, []):
        if m.predicate == q.pattern.predicate and m.position == pos and m.filler_type == q.filler_type:
            return m
    raise MalformedQuery(f"no mask relation {q.pattern.predicate}:{pos}:{q.filler_type} in {domain}")


# Evaluation -------------------------------------------------------------------


def _fillers(w: WorldInstance, s: State, pattern: Atom, filler_type: str) -> list[str]:
    pos = pattern.args.index(MASK)
    out = []
    for o in w.objects_of(filler_type):
        args = list(pattern.args)
        args[pos] = o
        if Atom(pattern.predicate, tuple(args)) in s.true_atoms:
            out.append(o)
    return out


def evaluate(query: Query, traj: Trajectory) -> str:
    if not 0 <= query.t <= traj.length:
        raise MalformedQuery(f"time {query.t} outside 0..{traj.length}")
    w, s = traj.world, traj.state(query.t)
    d = w.grounded
    if query.op == "holds":
        if query.literal is None or query.literal.atom not in d.fluents:
            raise MalformedQuery(f"{query.literal} is not a fluent literal of this world")
        return YES if s.holds(query.literal) else NO
    if query.op == "executable":
        if query.action is None or not d.has_action(query.action):
            raise MalformedQuery(f"{query.action} is not an action of this world")
        return YES if is_executable(d, s, query.action) else NO
    if query.op == "count":
        cond = CATALOGS.get(w.domain_kind, {}).get(query.condition or "")
        if cond is None:
            raise MalformedQuery(f"unknown condition {query.condition!r} for {w.domain_kind}")
        if len(query.args) != len(cond.param_types):
            raise MalformedQuery(f"{cond.name} takes {len(cond.param_types)} arguments")
        return str(cond.count(w, s, query.args))
    if query.op == "mask":
        mask_spec_for(w.domain_kind, query)
        found = _fillers(w, s, query.pattern, query.filler_type)
        if len(found) > 1:
            raise MalformedQuery(f"{query.pattern} has {len(found)} fillers")
        return found[0] if found else NONE
    raise MalformedQuery(f"unknown op {query.op!r}")


# Generation ---------------------------------------------------------------------


@dataclass(frozen=True)
class QuestionConfig:
    final_weight: float = 0.5  # probability mass on t = n
    exec_fraction: float = 0.5  # share of executability verify questions
    max_attempts: int = 200


DEFAULT_QCONFIG = QuestionConfig()


def sample_time(traj: Trajectory, rng: random.Random, cfg: QuestionConfig = DEFAULT_QCONFIG) -> int:
    if rng.random() < cfg.final_weight:
        return traj.length
    return rng.randint(0, traj.length)


def _verifiable(w: WorldInstance, pred: str) -> tuple[bool, bool]:
    """(askable, negatable) for a fluent predicate."""
    if w.domain_kind == "generic":
        return True, True
    spec = VERIFY[w.domain_kind].fluents
    return pred in spec, spec.get(pred, False)


def _true_literal(w: WorldInstance, s: State, rng: random.Random) -> Literal | None:
    d = w.grounded
    candidates = [f for f in d.sorted_fluents if _verifiable(w, f.predicate)[0]]
    if not candidates:
        return None
    want_negative = rng.random() < 0.5
    if want_negative:
        neg = [f for f in candidates if f not in s.true_atoms and _verifiable(w, f.predicate)[1]]
        if neg:
            return Literal(rng.choice(neg), False)
    pos = [f for f in candidates if f in s.true_atoms]
    if pos:
        return Literal(rng.choice(pos), True)
    neg = [f for f in candidates if f not in s.true_atoms and _verifiable(w, f.predicate)[1]]
    return Literal(rng.choice(neg), False) if neg else None


def _replacements(w: WorldInstance, a: Atom, universe: Sequence[Atom]) -> list[Atom]:
    """Atoms of ``universe`` differing from ``a`` in exactly one same-typed argument."""
    out = []
    for b in universe:
        if b.predicate != a.predicate or len(b.args) != len(a.args) or b == a:
            continue
        diff = [i for i, (x, y) in enumerate(zip(a.args, b.args)) if x != y]
        if len(diff) == 1 and w.type_of(a.args[diff[0]]) == w.type_of(b.args[diff[0]]):
            out.append(b)
    return out


def _generic_replacements(a: Atom, universe: Sequence[Atom]) -> list[Atom]:
    return [b for b in universe if b != a]


def _false_literal(w: WorldInstance, s: State, rng: random.Random) -> Literal | None:
    """Make a false assertion by negating or by swapping one object of a true one."""
    for _ in range(20):
        base = _true_literal(w, s, rng)
        if base is None:
            return None
        negatable = _verifiable(w, base.atom.predicate)[1]
        if negatable and rng.random() < 0.5:
            return base.complement()
        universe = w.grounded.sorted_fluents
        if w.domain_kind == "generic":
            swaps = _generic_replacements(base.atom, universe)
        else:
            swaps = _replacements(w, base.atom, universe)
        swaps = [b for b in swaps if not s.holds(Literal(b, base.positive))]
        if swaps:
            return Literal(rng.choice(swaps), base.positive)
        if negatable:
            return base.complement()
    return None


def _false_action(w: WorldInstance, s: State, rng: random.Random) -> Atom | None:
    d = w.grounded
    ok = [a for a in d.actions if is_executable(d, s, a)]
    if ok:
        base = rng.choice(ok)
        if w.domain_kind == "generic":
            swaps = _generic_replacements(base, d.actions)
        else:
            swaps = _replacements(w, base, d.actions)
        swaps = [b for b in swaps if not is_executable(d, s, b)]
        if swaps:
            return rng.choice(swaps)
    bad = [a for a in d.actions if not is_executable(d, s, a)]
    return rng.choice(bad) if bad else None


def _one_verify(traj: Trajectory, want: bool, rng: random.Random, cfg: QuestionConfig) -> Query | None:
    w = traj.world
    d = w.grounded
    t = sample_time(traj, rng, cfg)
    s = traj.state(t)
    if rng.random() < cfg.exec_fraction:
        if want:
            ok = [a for a in d.actions if is_executable(d, s, a)]
            a = rng.choice(ok) if ok else None
        else:
            a = _false_action(w, s, rng)
        return Query("executable", t, action=a) if a is not None else None
    lit = _true_literal(w, s, rng) if want else _false_literal(w, s, rng)
    return Query("holds", t, literal=lit) if lit is not None else None


def gen_verify(traj: Trajectory, k: int, rng: random.Random, cfg: QuestionConfig = DEFAULT_QCONFIG) -> list[AbstractQuestion]:
    """``k/2`` yes and ``k/2`` no questions, without repeats."""
    if k % 2:
        raise ValueError("verify batches must have an even size")
    out: list[AbstractQuestion] = []
    seen: set[Query] = set()
    for want in [True, False] * (k // 2):
        for _ in range(cfg.max_attempts):
            q = _one_verify(traj, want, rng, cfg)
            if q is None or q in seen:
                continue
            ans = evaluate(q, traj)
            if ans != (YES if want else NO):  # pragma: no cover - guarded by construction
                raise RacError(f"verify generator produced {ans} for a {want} question")
            seen.add(q)
            out.append(AbstractQuestion("verify", q, ans))
            break
        else:
            raise InsufficientFacts(f"could not produce {k} distinct verify questions")
    return out


def gen_counting(
    traj: Trajectory,
    k: int,
    rng: random.Random,
    catalog: dict[str, Condition] | None = None,
    cfg: QuestionConfig = DEFAULT_QCONFIG,
) -> list[AbstractQuestion]:
    w = traj.world
    catalog = catalog if catalog is not None else CATALOGS[w.domain_kind]
    if not catalog:
        raise InsufficientFacts(f"no counting conditions for {w.domain_kind}")
    names = sorted(catalog)
    out: list[AbstractQuestion] = []
    seen: set[Query] = set()
    for _ in range(k):
        for _attempt in range(cfg.max_attempts):
            cond = catalog[rng.choice(names)]
            args = []
            for t in cond.param_types:
                objs = w.objects_of(t)
                if not objs:
                    break
                args.append(rng.choice(objs))
            else:
                q = Query("count", sample_time(traj, rng, cfg), condition=cond.name, args=tuple(args))
                if q in seen:
                    continue
                seen.add(q)
                out.append(AbstractQuestion("counting", q, evaluate(q, traj)))
                break
        else:
            raise InsufficientFacts(f"could not produce {k} distinct counting questions")
    return out


def _mask_candidates(w: WorldInstance, s: State, t: int) -> list[Query]:
    out = []
    for m in MASKS[w.domain_kind]:
        given = [i for i in range(len(m.arg_types)) if i != m.position]
        pools = [w.objects_of(m.arg_types[i]) for i in given]
        if not all(pools):
            continue
        # one query per true atom (answerable) plus, for none_ok, per unfilled given object
        keys: set[tuple[str, ...]] = set()
        for a in s.true_atoms:
            if a.predicate == m.predicate and len(a.args) == len(m.arg_types):
                if w.type_of(a.args[m.position]) in _leaf_types(w, m.filler_type):
                    keys.add(tuple(a.args[i] for i in given))
        if m.none_ok:
            for o in pools[0] if len(given) == 1 else ():
                keys.add((o,))
        for key in sorted(keys):
            if any(w.type_of(o) not in _leaf_types(w, m.arg_types[i]) for o, i in zip(key, given)):
                continue
            args = [MASK] * len(m.arg_types)
            for o, i in zip(key, given):
                args[i] = o
            out.append(Query("mask", t, pattern=Atom(m.predicate, tuple(args)), filler_type=m.filler_type))
    return out


def gen_others(traj: Trajectory, k: int, rng: random.Random, cfg: QuestionConfig = DEFAULT_QCONFIG) -> list[AbstractQuestion]:
    """Masked-argument questions with a unique filler (or ``none`` where allowed)."""
    w = traj.world
    if not MASKS.get(w.domain_kind):
        raise InsufficientFacts(f"{w.domain_kind} has no relation to mask")
    out: list[AbstractQuestion] = []
    seen: set[Query] = set()
    cache: dict[int, list[Query]] = {}
    for _ in range(k):
        for _attempt in range(cfg.max_attempts):
            t = sample_time(traj, rng, cfg)
            if t not in cache:
                cache[t] = _mask_candidates(w, traj.state(t), t)
            if not cache[t]:
                continue
            q = rng.choice(cache[t])
            if q in seen:
                continue
            found = _fillers(w, traj.state(t), q.pattern, q.filler_type)
            if len(found) != 1 and not (not found and mask_spec_for(w.domain_kind, q).none_ok):
                continue
            seen.add(q)
            out.append(AbstractQuestion("others", q, evaluate(q, traj)))
            break
        else:
            raise InsufficientFacts(f"could not produce {k} distinct others questions")
    return out


def label_balance(questions: Sequence[AbstractQuestion]) -> float:
    c = Counter(q.answer for q in questions if q.kind == "verify")
    total = c[YES] + c[NO]
    return c[YES] / total if total else 0.0
