"""Random generic domains: numbered fluents and actions with consistent laws.

Fluents and actions are nullary atoms whose names are their numbers, so a
synthesized law prints as ``6 causes -6 if -7``.  Each action gets one
precondition set and between one and ``m_effects`` effects; two effects of
one action may only have complementary literals when their conditions are
incompatible.  Candidates failing the two ratio constraints are resampled.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from typing import NamedTuple

from .core import (
    Atom,
    EffectLaw,
    ExecutabilityLaw,
    GroundedDomain,
    Literal,
    RacError,
    has_complementary_pair,
)

RATIO_TOTAL = "total"  # total effects <= 3 * conditional effects
RATIO_PAIRS = "pairs"  # total effects <= 3 * distinct (action, condition-size>0) pairs


class Unsatisfiable(RacError):
    pass


class ExhaustedRetries(RacError):
    pass


@dataclass(frozen=True)
class GenericParams:
    n_fluents: int
    n_actions: int
    m_pre: int = 3
    m_effects: int = 3
    m_c_effect: int = 2
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_fluents < 1 or self.n_actions < 1 or self.m_effects < 1:
            raise ValueError("n_fluents, n_actions and m_effects must be >= 1")
        if self.m_pre < 0 or self.m_c_effect < 0:
            raise ValueError("m_pre and m_c_effect must be >= 0")


def fluent(i: int) -> Atom:
    return Atom(str(i), ())


def action(i: int) -> Atom:
    return Atom(str(i), ())


def number(a: Atom) -> int:
    return int(a.predicate)


def incompatible(c1: frozenset[Literal], c2: frozenset[Literal]) -> bool:
    return any(lit.complement() in c2 for lit in c1)


def _random_lits(rng: random.Random, n_fluents: int, k: int) -> frozenset[Literal]:
    picked = rng.sample(range(1, n_fluents + 1), k)
    return frozenset(Literal(fluent(i), rng.random() < 0.5) for i in picked)


def _sample_effects(rng: random.Random, p: GenericParams, a: Atom) -> list[EffectLaw] | None:
    laws: list[EffectLaw] = []
    for _ in range(rng.randint(1, p.m_effects)):
        for _attempt in range(20):
            k = rng.randint(0, min(p.m_c_effect, p.n_fluents))
            cond = _random_lits(rng, p.n_fluents, k)
            lit = Literal(fluent(rng.randint(1, p.n_fluents)), rng.random() < 0.5)
            law = EffectLaw(a, lit, cond)
            if law in laws:
                continue
            if all(
                other.effect != lit.complement() or incompatible(other.conditions, cond) for other in laws
            ):
                laws.append(law)
                break
        else:
            return None
    return laws


def synth_generic(p: GenericParams, max_retries: int = 1000, ratio: str = RATIO_TOTAL) -> GroundedDomain:
    if p.m_pre == 0:
        raise Unsatisfiable("m_pre=0 leaves no action with a nonempty precondition")
    if p.m_c_effect == 0:
        raise Unsatisfiable("m_c_effect=0 leaves no conditional effect")
    rng = random.Random(p.seed)
    fluents = [fluent(i) for i in range(1, p.n_fluents + 1)]
    actions = [action(i) for i in range(1, p.n_actions + 1)]
    for _ in range(max_retries):
        exec_laws, effect_laws = [], []
        ok = True
        for a in actions:
            k = rng.randint(0, min(p.m_pre, p.n_fluents))
            if k:
                exec_laws.append(ExecutabilityLaw(a, _random_lits(rng, p.n_fluents, k)))
            laws = _sample_effects(rng, p, a)
            if laws is None:
                ok = False
                break
            effect_laws.extend(laws)
        if not ok:
            continue
        d = GroundedDomain(fluents, actions, effect_laws, exec_laws)
        if not _ratio_violations(d, ratio):
            return d
    raise ExhaustedRetries(f"no domain satisfying the ratio constraints after {max_retries} attempts")


class Violation(NamedTuple):
    constraint: str
    action: Atom | None
    detail: str

    def __str__(self) -> str:
        where = f" at action {self.action}" if self.action is not None else ""
        return f"{self.constraint}{where}: {self.detail}"


def _ratio_violations(d: GroundedDomain, ratio: str) -> list[Violation]:
    out = []
    t = sum(1 for a in d.actions if any(d.preconditions_for(a)))
    if len(d.actions) > 3 * t:
        out.append(Violation("actions > T*3", None, f"{len(d.actions)} actions, {t} with nonempty preconditions"))
    total = len(d.effect_laws)
    if ratio == RATIO_TOTAL:
        c = sum(1 for law in d.effect_laws if law.conditions)
    elif ratio == RATIO_PAIRS:
        c = len({(law.action, len(law.conditions)) for law in d.effect_laws if law.conditions})
    else:
        raise ValueError(f"unknown ratio mode {ratio!r}")
    if total > 3 * c:
        out.append(Violation("effects > C*3", None, f"{total} effects, {c} conditional"))
    return out


def validate_generic(d: GroundedDomain, p: GenericParams | None = None, ratio: str = RATIO_TOTAL) -> list[Violation]:
    """Every generic-domain constraint ``d`` breaks; empty when well formed."""
    out: list[Violation] = []
    if d.static_laws:
        out.append(Violation("no static laws", None, f"{len(d.static_laws)} static laws present"))
    for a in d.actions:
        pres = d.preconditions_for(a)
        if len(pres) > 1:
            out.append(Violation("one precondition set", a, f"{len(pres)} precondition sets"))
        for pre in pres:
            if has_complementary_pair(pre):
                out.append(Violation("consistent precondition", a, "complementary pair"))
            if p is not None and len(pre) > p.m_pre:
                out.append(Violation("precondition size", a, f"{len(pre)} > {p.m_pre}"))
        laws = d.effect_laws_for(a)
        if not laws:
            out.append(Violation("at least one effect", a, "no effects"))
        if p is not None and len(laws) > p.m_effects:
            out.append(Violation("effect count", a, f"{len(laws)} > {p.m_effects}"))
        for i, law in enumerate(laws):
            if has_complementary_pair(law.conditions):
                out.append(Violation("consistent condition", a, f"effect {law.effect}"))
            if p is not None and len(law.conditions) > p.m_c_effect:
                out.append(Violation("condition size", a, f"effect {law.effect} has {len(law.conditions)}"))
            for other in laws[i + 1:]:
                if other.effect == law.effect.complement() and not incompatible(law.conditions, other.conditions):
                    kind = (
                        "conflicting unconditional effects"
                        if not law.conditions and not other.conditions
                        else "conflicting effects"
                    )
                    out.append(Violation(kind, a, f"{law.effect} vs {other.effect}"))
    out.extend(_ratio_violations(d, ratio))
    return out
