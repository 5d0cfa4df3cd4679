"""Set-based generic representation of ground domains.

Each action becomes ``action/1``, ``precondition/3`` and ``effect/3`` facts;
literal sets (preconditions, effect conditions, static-law bodies) are
``member/2`` facts over a named set.  Negative literals print with a leading
``-``.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .core import (
    Atom,
    EffectLaw,
    ExecutabilityLaw,
    GroundedDomain,
    Literal,
    State,
    StaticLaw,
)


class SetId(NamedTuple):
    kind: str  # "pre", "c" or "s"
    owner: Atom | None
    index: int

    def __str__(self) -> str:
        if self.kind == "s":
            return f"s({self.index})"
        if self.kind == "pre" and self.index == 0:
            return f"pre({self.owner})"
        return f"{self.kind}({self.owner},{self.index})"


class Fact(NamedTuple):
    predicate: str
    args: tuple

    def __str__(self) -> str:
        return f"{self.predicate}({','.join(str(a) for a in self.args)})."


@dataclass
class GenericFactSet:
    facts: list[Fact] = field(default_factory=list)
    header: list[Fact] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.facts)

    def count(self, predicate: str) -> int:
        return sum(1 for f in self.facts if f.predicate == predicate)

    def to_text(self) -> str:
        lines = [str(f) for f in self.header] + [str(f) for f in self.facts]
        return "\n".join(lines) + "\n"

    def validate(self) -> list[str]:
        """Referential checks: effects/preconditions name declared actions, members declared sets."""
        problems = []
        actions = {f.args[0] for f in self.facts if f.predicate == "action"}
        sets: set[SetId] = set()
        for f in self.facts:
            if f.predicate in ("precondition", "effect"):
                if f.args[0] not in actions:
                    problems.append(f"{f} names an undeclared action")
                if f.predicate == "precondition":
                    sets.add(f.args[1])
                else:
                    sets.add(SetId("c", f.args[1].owner, f.args[1].index))
            elif f.predicate == "static_law":
                sets.add(f.args[0])
        for f in self.facts:
            if f.predicate == "member" and f.args[0] not in sets:
                problems.append(f"{f} refers to an undeclared set")
        return problems


class EffectId(NamedTuple):
    owner: Atom
    index: int

    def __str__(self) -> str:
        return f"e({self.owner},{self.index})"


def to_generic(d: GroundedDomain, s0: State | None = None, source: str | None = None) -> GenericFactSet:
    out = GenericFactSet()
    if source is not None:
        out.header.append(Fact("source_domain", (source,)))
    facts = out.facts
    for f in d.sorted_fluents:
        facts.append(Fact("fluent", (f,)))
    for a in d.actions:
        facts.append(Fact("action", (a,)))
        pres = sorted(d.preconditions_for(a), key=lambda c: sorted(c))
        if not pres:
            pres = [frozenset()]
        for i, conds in enumerate(pres):
            sid = SetId("pre", a, 0 if len(pres) == 1 else i + 1)
            facts.append(Fact("precondition", (a, sid, len(conds))))
            facts.extend(Fact("member", (sid, lit)) for lit in _sorted(conds))
        laws = sorted(d.effect_laws_for(a), key=lambda law: (law.effect, _sorted(law.conditions)))
        for n, law in enumerate(laws, 1):
            facts.append(Fact("effect", (a, EffectId(a, n), law.effect)))
            facts.extend(Fact("member", (SetId("c", a, n), lit)) for lit in _sorted(law.conditions))
    statics = sorted(d.static_laws, key=lambda law: (law.consequent, _sorted(law.antecedents)))
    for n, law in enumerate(statics, 1):
        sid = SetId("s", None, n)
        facts.append(Fact("static_law", (sid, law.consequent)))
        facts.extend(Fact("member", (sid, lit)) for lit in _sorted(law.antecedents))
    if s0 is not None:
        facts.extend(Fact("initially", (f,)) for f in s0.sorted_atoms())
    return out


def _sorted(lits: Iterable[Literal]) -> list[Literal]:
    return sorted(lits, key=lambda lit: (lit.atom, not lit.positive))


def from_generic(fs: GenericFactSet) -> tuple[GroundedDomain, State]:
    """Interpret a fact set as a ground domain and initial state."""
    fluents, actions, initially = [], [], []
    members: dict[SetId, list[Literal]] = defaultdict(list)
    pre_sets: list[tuple[Atom, SetId]] = []
    effects: list[tuple[Atom, EffectId, Literal]] = []
    statics: list[tuple[SetId, Literal]] = []
    for f in fs.facts:
        p = f.predicate
        if p == "fluent":
            fluents.append(f.args[0])
        elif p == "action":
            actions.append(f.args[0])
        elif p == "precondition":
            pre_sets.append((f.args[0], f.args[1]))
        elif p == "member":
            members[f.args[0]].append(f.args[1])
        elif p == "effect":
            effects.append(f.args)
        elif p == "static_law":
            statics.append(f.args)
        elif p == "initially":
            initially.append(f.args[0])
    exec_laws = [ExecutabilityLaw(a, frozenset(members[sid])) for a, sid in pre_sets]
    effect_laws = [
        EffectLaw(a, lit, frozenset(members[SetId("c", eid.owner, eid.index)])) for a, eid, lit in effects
    ]
    static_laws = [StaticLaw(lit, frozenset(members[sid])) for sid, lit in statics]
    d = GroundedDomain(fluents, actions, effect_laws, exec_laws, static_laws)
    return d, State(frozenset(initially))


# Generic counterparts of the BLD question kinds, keyed by (domain, BLD template key).
QUESTION_TRANSLATIONS = {
    ("blocks", "verify_fluent"): "Will the fluent {fluent} be true {time}?",
    ("blocks", "verify_exec"): "Can action {action} be executed {time}?",
    ("logistics", "verify_exec"): "Can action {action} be executed in the initial state?",
    ("logistics", "verify_fluent"): "Will the fluent {fluent} be true {time}?",
    ("dwr", "verify_exec"): "Is it possible to execute action {action} in the current state?",
    ("dwr", "verify_fluent"): "Will the fluent {fluent} be true {time}?",
    ("*", "count_true"): "How many fluents would be true {time}?",
}


def numbered(d: GroundedDomain, s0: State) -> tuple[GroundedDomain, State, dict[str, Atom]]:
    """Rename fluents and actions to numbers, as in synthesized generic domains.

    Fluents and actions are numbered separately in sorted order from 1.  The
    returned map takes ``"f<n>"`` / ``"a<n>"`` back to the original atom.
    Static laws are kept, so the result may fall outside the synthesized
    class even though it renders the same way.
    """
    fmap = {f: Atom(str(i), ()) for i, f in enumerate(d.sorted_fluents, 1)}
    amap = {a: Atom(str(i), ()) for i, a in enumerate(d.actions, 1)}

    def lits(ls: Iterable[Literal]) -> frozenset[Literal]:
        return frozenset(Literal(fmap[lit.atom], lit.positive) for lit in ls)

    out = GroundedDomain(
        fmap.values(),
        amap.values(),
        [EffectLaw(amap[law.action], Literal(fmap[law.effect.atom], law.effect.positive), lits(law.conditions))
         for law in d.effect_laws],
        [ExecutabilityLaw(amap[law.action], lits(law.conditions)) for law in d.executability_laws],
        [StaticLaw(Literal(fmap[law.consequent.atom], law.consequent.positive), lits(law.antecedents))
         for law in d.static_laws],
    )
    back = {f"f{n.predicate}": f for f, n in fmap.items()}
    back.update({f"a{n.predicate}": a for a, n in amap.items()})
    return out, State(frozenset(fmap[a] for a in s0.true_atoms)), back
