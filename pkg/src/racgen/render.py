"""English rendering of worlds, action sequences and questions.

Templates live in a JSON pool of ``{domain, kind, slots, templates}``
records (``data/templates.json`` by default, or the file named by
``RACGEN_TEMPLATES``).  Every sentence that states a fact records a span
pointing back at the fact it came from.
"""
from __future__ import annotations

import json
import math
import os
import random
import string
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .core import Atom, Literal, RacError
from .questions import MASK, AbstractQuestion, Query, mask_spec_for
from .trajectory import Trajectory
from .worlds import WorldInstance, lexicons

ORDINALS = ("first", "second", "third", "fourth", "fifth", "sixth", "seventh", "eighth", "ninth", "tenth")
DEFAULT_TOKEN_CAP = 512


class MissingTemplate(RacError):
    pass


class TemplateError(RacError):
    pass


@dataclass(frozen=True)
class TemplateRecord:
    domain: str
    kind: str
    slots: tuple[str, ...]
    templates: tuple[str, ...]


def _placeholders(template: str) -> set[str]:
    return {name for _, name, _, _ in string.Formatter().parse(template) if name}


class TemplatePool:
    def __init__(self, records: Iterable[TemplateRecord]):
        self._by_key: dict[tuple[str, str], TemplateRecord] = {}
        for r in records:
            if not r.templates:
                raise TemplateError(f"empty template list for {r.domain}/{r.kind}")
            for t in r.templates:
                extra = _placeholders(t) - set(r.slots)
                if extra:
                    raise TemplateError(f"{r.domain}/{r.kind}: template uses undeclared slots {sorted(extra)}")
            self._by_key[(r.domain, r.kind)] = r

    @classmethod
    def load(cls, path: str | os.PathLike | None = None) -> "TemplatePool":
        path = path or os.environ.get("RACGEN_TEMPLATES")
        if path:
            text = Path(path).read_text("utf-8")
        else:
            text = resources.files("racgen").joinpath("data/templates.json").read_text("utf-8")
        try:
            raw = json.loads(text)
            records = [
                TemplateRecord(r["domain"], r["kind"], tuple(r.get("slots", ())), tuple(r["templates"])) for r in raw
            ]
        except (ValueError, KeyError, TypeError) as exc:
            raise TemplateError(f"malformed template pool: {exc}") from exc
        return cls(records)

    def find(self, domain: str, *kinds: str) -> TemplateRecord | None:
        for kind in kinds:
            for dom in (domain, "*"):
                r = self._by_key.get((dom, kind))
                if r is not None:
                    return r
        return None

    def get(self, domain: str, *kinds: str) -> TemplateRecord:
        r = self.find(domain, *kinds)
        if r is None:
            raise MissingTemplate(f"no template for {domain}/{' or '.join(kinds)}")
        return r

    def sizes(self) -> dict[str, int]:
        return {f"{d}/{k}": len(r.templates) for (d, k), r in sorted(self._by_key.items())}


_default_pool: TemplatePool | None = None


def default_pool() -> TemplatePool:
    global _default_pool
    if _default_pool is None:
        _default_pool = TemplatePool.load()
    return _default_pool


@dataclass(frozen=True)
class Span:
    start: int
    end: int
    fact: str


@dataclass
class Rendered:
    text: str = ""
    spans: list[Span] = field(default_factory=list)
    template_ids: list[str] = field(default_factory=list)

    def add(self, sentence: str, facts: Sequence[str] = (), template_id: str | None = None,
            inner: Sequence[tuple[int, int, str]] = ()) -> None:
        if self.text:
            self.text += " "
        start = len(self.text)
        self.text += sentence
        for f in facts:
            self.spans.append(Span(start, start + len(sentence), f))
        for s, e, f in inner:
            self.spans.append(Span(start + s, start + e, f))
        if template_id:
            self.template_ids.append(template_id)

    def extend(self, other: "Rendered") -> None:
        if not other.text:
            return
        offset = len(self.text) + (1 if self.text else 0)
        self.text += (" " if self.text else "") + other.text
        self.spans.extend(Span(s.start + offset, s.end + offset, s.fact) for s in other.spans)
        self.template_ids.extend(other.template_ids)


def _fill(r: TemplateRecord, rng: random.Random, bindings: dict[str, str],
          allowed: Sequence[int] | None = None) -> tuple[str, str]:
    choices = list(allowed) if allowed is not None else list(range(len(r.templates)))
    i = rng.choice(choices)
    try:
        text = r.templates[i].format(**bindings)
    except KeyError as exc:
        raise MissingTemplate(f"{r.domain}/{r.kind}: no binding for slot {exc}") from exc
    return text, f"{r.domain}/{r.kind}#{i}"


def _bind(r: TemplateRecord, args: Sequence[str]) -> dict[str, str]:
    return dict(zip(r.slots, args))


def _join(names: Sequence[str]) -> str:
    return ", ".join(names)


# Keys ---------------------------------------------------------------------------


def _action_key(w: WorldInstance, a: Atom) -> str:
    if w.domain_kind == "generic":
        return "generic"
    if w.domain_kind == "blocks" and a.predicate == "move" and a.args[-1] == "table":
        return "move_table"
    return a.predicate


def _typed_kinds(w: WorldInstance, prefix: str, a: Atom) -> list[str]:
    kinds = []
    if a.args:
        t = w.type_of(a.args[0])
        if t:
            kinds.append(f"{prefix}:{a.predicate}:{t}")
    kinds.append(f"{prefix}:{a.predicate}")
    return kinds


# World -------------------------------------------------------------------------


def render_world(w: WorldInstance, include_rules: bool, rng: random.Random, pool: TemplatePool | None = None) -> Rendered:
    pool = pool or default_pool()
    if w.domain_kind == "generic":
        return _render_generic_world(w, rng, pool)
    out = Rendered()
    for t in sorted(w.objects):
        names = w.objects[t]
        if not names:
            continue
        r = pool.get(w.domain_kind, f"objects:{t}")
        text, tid = _fill(r, rng, {"list": _join(names)})
        inner = []
        for name in names:
            pos = text.find(name)
            if pos >= 0:
                inner.append((pos, pos + len(name), f"{t}({name})"))
        out.add(text, (), tid, inner)
    for a in sorted(w.rigid):
        r = pool.get(w.domain_kind, f"rigid:{a.predicate}")
        text, tid = _fill(r, rng, _bind(r, a.args))
        out.add(text, [str(a)], tid)
    for a in w.s0.sorted_atoms():
        r = pool.get(w.domain_kind, *_typed_kinds(w, "fact", a))
        text, tid = _fill(r, rng, _bind(r, a.args))
        out.add(text, [str(a)], tid)
    if include_rules:
        r = pool.get(w.domain_kind, "rules")
        text, tid = _fill(r, rng, {})
        out.add(text, (), tid)
    return out


def _num(a: Atom) -> str:
    return a.predicate


def _lit(lit: Literal) -> str:
    return ("" if lit.positive else "-") + _num(lit.atom)


def _numeric(atoms: Iterable[Atom]) -> list[Atom]:
    return sorted(atoms, key=lambda a: (len(a.predicate), a.predicate))


def _render_generic_world(w: WorldInstance, rng: random.Random, pool: TemplatePool) -> Rendered:
    d = w.grounded
    out = Rendered()
    true = w.s0.sorted_atoms()
    rng.shuffle(true)
    if true:
        r = pool.get("generic", "fact:true_fluents")
        names = [_num(a) for a in true]
        text, tid = _fill(r, rng, {"list": _join(names)})
        start = text.find(names[0])
        inner, pos = [], start
        for a, name in zip(true, names):
            inner.append((pos, pos + len(name), str(a)))
            pos += len(name) + 2
        out.add(text, (), tid, inner)
    else:
        text, tid = _fill(pool.get("generic", "fact:no_true_fluents"), rng, {})
        out.add(text, (), tid)
    # the laws are the world for generic domains, so they are always rendered
    header = pool.get("generic", "law:header")
    text, tid = _fill(header, rng, {
        "actions": _join([_num(a) for a in _numeric(d.actions)]),
        "fluents": _join([_num(f) for f in _numeric(d.fluents)]),
    })
    out.add(text, (), tid)
    for law in d.effect_laws:
        if law.conditions:
            r = pool.get("generic", "law:effect_if")
            conds = _join([_lit(c) for c in sorted(law.conditions, key=lambda c: (len(c.atom.predicate), c.atom.predicate))])
            text, tid = _fill(r, rng, {"action": _num(law.action), "effect": _lit(law.effect), "conditions": conds})
        else:
            r = pool.get("generic", "law:effect")
            text, tid = _fill(r, rng, {"action": _num(law.action), "effect": _lit(law.effect)})
        out.add(text, [f"effect({_num(law.action)},{law.effect})"], tid)
    for law in d.executability_laws:
        r = pool.get("generic", "law:precondition")
        conds = _join([_lit(c) for c in sorted(law.conditions, key=lambda c: (len(c.atom.predicate), c.atom.predicate))])
        text, tid = _fill(r, rng, {"action": _num(law.action), "conditions": conds})
        out.add(text, [f"precondition({_num(law.action)})"], tid)
    return out


# Actions -----------------------------------------------------------------------


def _action_bindings(w: WorldInstance, r: TemplateRecord, a: Atom, agent: str) -> dict[str, str]:
    if w.domain_kind == "generic":
        return {"action": _num(a), "agent": agent}
    b = _bind(r, a.args)
    b["agent"] = agent
    return b


def render_actions(traj: Trajectory, rng: random.Random, pool: TemplatePool | None = None,
                   agent: str | None = None) -> Rendered:
    pool = pool or default_pool()
    w = traj.world
    agent = agent or rng.choice(lexicons()["agent"])
    out = Rendered()
    for i, a in enumerate(traj.actions):
        r = pool.get(w.domain_kind, f"action:{_action_key(w, a)}")
        text, tid = _fill(r, rng, _action_bindings(w, r, a, agent))
        out.add(text, [f"occurs({a},{i})"], tid)
    return out


def _clause(w: WorldInstance, a: Atom, rng: random.Random, pool: TemplatePool) -> tuple[str, str]:
    r = pool.get(w.domain_kind, f"clause:{_action_key(w, a)}")
    return _fill(r, rng, _action_bindings(w, r, a, ""))


def render_time(traj: Trajectory, t: int, rng: random.Random, pool: TemplatePool | None = None) -> tuple[str, list[str]]:
    pool = pool or default_pool()
    w, n = traj.world, traj.length
    if t == 0:
        text, tid = _fill(pool.get(w.domain_kind, "time:initial"), rng, {})
        return text, [tid]
    a = traj.actions[t - 1]
    unambiguous = traj.actions.count(a) == 1
    ordinal = ORDINALS[t - 1] if t <= len(ORDINALS) else f"{t}th"
    options = []
    if t == n:
        options.append("final")
    options.append("after" if unambiguous else "ordinal")
    pick = rng.choice(options)
    if pick == "final":
        text, tid = _fill(pool.get(w.domain_kind, "time:final"), rng, {})
        return text, [tid]
    if pick == "ordinal":
        text, tid = _fill(pool.get(w.domain_kind, "time:ordinal"), rng, {"ordinal": ordinal})
        return text, [tid]
    clause, cid = _clause(w, a, rng, pool)
    text, tid = _fill(pool.get(w.domain_kind, "time:after"), rng, {"clause": clause, "ordinal": ordinal})
    return text, [tid] + ([cid] if clause in text else [])


# Questions ---------------------------------------------------------------------


def _question_record(w: WorldInstance, q: Query, pool: TemplatePool) -> tuple[TemplateRecord, dict[str, str]]:
    kind = w.domain_kind
    if q.op == "holds":
        lit = q.literal
        sign = "" if lit.positive else "-"
        if kind == "generic":
            return pool.get(kind, f"verify:{sign}fluent"), {"fluent": _num(lit.atom)}
        r = pool.get(kind, *_typed_kinds(w, "verify", Atom(sign + lit.atom.predicate, lit.atom.args)))
        return r, _bind(r, lit.atom.args)
    if q.op == "executable":
        r = pool.get(kind, f"verify_exec:{_action_key(w, q.action)}")
        if kind == "generic":
            return r, {"action": _num(q.action)}
        return r, _bind(r, q.action.args)
    if q.op == "count":
        r = pool.get(kind, f"count:{q.condition}")
        return r, _bind(r, q.args)
    if q.op == "mask":
        spec = mask_spec_for(kind, q)
        given = [o for o in q.pattern.args if o != MASK]
        kinds = [f"mask:{spec.key}"]
        if given:
            t = w.type_of(given[0])
            if t:
                kinds.insert(0, f"mask:{spec.key}:{t}")
        r = pool.get(kind, *kinds)
        return r, _bind(r, given)
    raise MissingTemplate(f"no template kind for op {q.op!r}")


def render_question(q: AbstractQuestion, traj: Trajectory, rng: random.Random,
                    pool: TemplatePool | None = None) -> tuple[str, list[str]]:
    pool = pool or default_pool()
    w = traj.world
    r, bindings = _question_record(w, q.query, pool)
    timed = [i for i, t in enumerate(r.templates) if "{time}" in t]
    allowed = list(range(len(r.templates))) if q.query.t == traj.length else timed
    if not allowed:
        raise MissingTemplate(f"{r.domain}/{r.kind} has no template taking a time phrase")
    i = rng.choice(allowed)
    ids = []
    if "{time}" in r.templates[i]:
        bindings["time"], ids = render_time(traj, q.query.t, rng, pool)
    text, tid = _fill(r, rng, bindings, [i])
    return text, [tid] + ids


@dataclass(frozen=True)
class BudgetResult:
    ok: bool
    count: int


def token_budget_check(paragraph: str, question: str, cap: float | None = DEFAULT_TOKEN_CAP) -> BudgetResult:
    """Whitespace-token count of paragraph plus question against ``cap``."""
    count = len(paragraph.split()) + len(question.split())
    if cap is None or math.isinf(cap):
        return BudgetResult(True, count)
    return BudgetResult(count <= cap, count)
