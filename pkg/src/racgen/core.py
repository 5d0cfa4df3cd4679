"""Ground action-language model and single-step transition semantics.

A domain is a set of fluent atoms, ground actions and three kinds of laws:
effect laws (``a causes l if c``), executability laws (``a executable_if c``)
and static laws (``l if c``).  States are complete: an atom not in the true
set is false.
"""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

MAX_ARITY = 3


class RacError(Exception):
    """Base class for all engine errors."""


class UnknownAction(RacError):
    pass


class UnknownFluent(RacError):
    pass


class NotExecutable(RacError):
    pass


class ConflictingEffects(RacError):
    pass


class InconsistentClosure(RacError):
    pass


class InconsistentSuccessor(RacError):
    pass


class InconsistentInitialState(RacError):
    pass


class MalformedLaw(RacError):
    pass


class Atom(NamedTuple):
    """A ground atom ``predicate(args...)``; also used for ground actions."""

    predicate: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(self.args)})"


def atom(predicate: str, *args: str) -> Atom:
    return Atom(predicate, tuple(args))


class Literal(NamedTuple):
    atom: Atom
    positive: bool = True

    def complement(self) -> "Literal":
        return Literal(self.atom, not self.positive)

    def __neg__(self) -> "Literal":
        return self.complement()

    def __str__(self) -> str:
        return str(self.atom) if self.positive else f"-{self.atom}"


def pos(predicate: str, *args: str) -> Literal:
    return Literal(Atom(predicate, tuple(args)), True)


def neg(predicate: str, *args: str) -> Literal:
    return Literal(Atom(predicate, tuple(args)), False)


def has_complementary_pair(literals: Iterable[Literal]) -> bool:
    seen: dict[Atom, bool] = {}
    for lit in literals:
        prev = seen.setdefault(lit.atom, lit.positive)
        if prev != lit.positive:
            return True
    return False


@dataclass(frozen=True)
class State:
    """Complete truth assignment, stored as the set of true atoms."""

    true_atoms: frozenset[Atom] = frozenset()

    def __contains__(self, a: Atom) -> bool:
        return a in self.true_atoms

    def holds(self, lit: Literal) -> bool:
        return (lit.atom in self.true_atoms) == lit.positive

    def holds_all(self, lits: Iterable[Literal]) -> bool:
        true = self.true_atoms
        return all((lit.atom in true) == lit.positive for lit in lits)

    def sorted_atoms(self) -> list[Atom]:
        return sorted(self.true_atoms)

    def __len__(self) -> int:
        return len(self.true_atoms)

    def __repr__(self) -> str:
        return "State({" + ", ".join(map(str, self.sorted_atoms())) + "})"


class EffectLaw(NamedTuple):
    action: Atom
    effect: Literal
    conditions: frozenset[Literal] = frozenset()


class ExecutabilityLaw(NamedTuple):
    action: Atom
    conditions: frozenset[Literal] = frozenset()


class StaticLaw(NamedTuple):
    consequent: Literal
    antecedents: frozenset[Literal]


@dataclass(frozen=True)
class Transition:
    """Successor state plus the bookkeeping of how it was reached."""

    state: State
    effects: frozenset[Literal]
    derived: frozenset[Literal]
    blocked: frozenset[Atom] = field(default=frozenset())


class GroundedDomain:
    """Immutable ground domain with law indexes built once at construction."""

    def __init__(
        self,
        fluents: Iterable[Atom],
        actions: Iterable[Atom],
        effect_laws: Iterable[EffectLaw] = (),
        executability_laws: Iterable[ExecutabilityLaw] = (),
        static_laws: Iterable[StaticLaw] = (),
    ):
        self.fluents: frozenset[Atom] = frozenset(fluents)
        self.actions: tuple[Atom, ...] = tuple(sorted(set(actions)))
        self.effect_laws: tuple[EffectLaw, ...] = tuple(effect_laws)
        self.executability_laws: tuple[ExecutabilityLaw, ...] = tuple(executability_laws)
        self.static_laws: tuple[StaticLaw, ...] = tuple(static_laws)
        self._action_set = frozenset(self.actions)
        self._validate()

        effects: dict[Atom, list[EffectLaw]] = defaultdict(list)
        for law in self.effect_laws:
            effects[law.action].append(law)
        self._effects = {a: tuple(v) for a, v in effects.items()}
        execs: dict[Atom, list[frozenset[Literal]]] = defaultdict(list)
        for law in self.executability_laws:
            execs[law.action].append(law.conditions)
        self._exec = {a: tuple(v) for a, v in execs.items()}
        by_antecedent: dict[Literal, list[int]] = defaultdict(list)
        for i, law in enumerate(self.static_laws):
            for lit in law.antecedents:
                by_antecedent[lit].append(i)
        self._static_index = {k: tuple(v) for k, v in by_antecedent.items()}
        self.sorted_fluents: tuple[Atom, ...] = tuple(sorted(self.fluents))

    def _validate(self) -> None:
        def check_lits(lits: Iterable[Literal], where: str) -> None:
            for lit in lits:
                if lit.atom not in self.fluents:
                    raise UnknownFluent(f"{where}: {lit} is not a declared fluent")

        for a in self.actions:
            if len(a.args) > MAX_ARITY:
                raise MalformedLaw(f"action {a} exceeds arity {MAX_ARITY}")
        for f in self.fluents:
            if len(f.args) > MAX_ARITY:
                raise MalformedLaw(f"fluent {f} exceeds arity {MAX_ARITY}")
        for law in self.effect_laws:
            if law.action not in self._action_set:
                raise UnknownAction(f"effect law for undeclared action {law.action}")
            check_lits([law.effect, *law.conditions], f"effect law of {law.action}")
            if has_complementary_pair(law.conditions):
                raise MalformedLaw(f"effect law of {law.action} has contradictory conditions")
        for law in self.executability_laws:
            if law.action not in self._action_set:
                raise UnknownAction(f"executability law for undeclared action {law.action}")
            check_lits(law.conditions, f"executability law of {law.action}")
            if has_complementary_pair(law.conditions):
                raise MalformedLaw(f"executability law of {law.action} has contradictory conditions")
        for law in self.static_laws:
            if not law.antecedents:
                raise MalformedLaw(f"static law for {law.consequent} has no antecedents")
            check_lits([law.consequent, *law.antecedents], "static law")
            if has_complementary_pair(law.antecedents):
                raise MalformedLaw(f"static law for {law.consequent} has contradictory antecedents")

    def has_action(self, a: Atom) -> bool:
        return a in self._action_set

    def effect_laws_for(self, a: Atom) -> tuple[EffectLaw, ...]:
        return self._effects.get(a, ())

    def preconditions_for(self, a: Atom) -> tuple[frozenset[Literal], ...]:
        return self._exec.get(a, ())

    def static_laws_with(self, lit: Literal) -> tuple[int, ...]:
        return self._static_index.get(lit, ())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GroundedDomain):
            return NotImplemented
        return (
            self.fluents == other.fluents
            and self.actions == other.actions
            and set(self.effect_laws) == set(other.effect_laws)
            and set(self.executability_laws) == set(other.executability_laws)
            and set(self.static_laws) == set(other.static_laws)
        )

    def __hash__(self) -> int:
        return hash((self.fluents, self.actions))

    def __repr__(self) -> str:
        return (
            f"GroundedDomain({len(self.fluents)} fluents, {len(self.actions)} actions, "
            f"{len(self.effect_laws)} effect / {len(self.executability_laws)} executability / "
            f"{len(self.static_laws)} static laws)"
        )


def _check_action(d: GroundedDomain, a: Atom) -> None:
    if not d.has_action(a):
        raise UnknownAction(str(a))


def is_executable(d: GroundedDomain, s: State, a: Atom) -> bool:
    """True iff some executability law for ``a`` holds in ``s`` (or there is none)."""
    _check_action(d, a)
    laws = d.preconditions_for(a)
    if not laws:
        return True
    return any(s.holds_all(conds) for conds in laws)


def direct_effects(d: GroundedDomain, s: State, a: Atom) -> frozenset[Literal]:
    _check_action(d, a)
    out = {law.effect for law in d.effect_laws_for(a) if s.holds_all(law.conditions)}
    if has_complementary_pair(out):
        bad = sorted(str(lit) for lit in out if lit.complement() in out)
        raise ConflictingEffects(f"{a} has conflicting effects {bad}")
    return frozenset(out)


def _chain(d: GroundedDomain, seed: Iterable[Literal]) -> tuple[set[Literal], set[Literal]]:
    """Forward-chain static laws from ``seed``.

    A literal is satisfied only when present, so negative antecedents are read
    three-valued.  Complementary literals are kept; callers decide.  Returns the
    closure and the set of literals produced by a firing law.
    """
    lits = set(seed)
    fired: set[Literal] = set()
    laws = d.static_laws
    if not laws:
        return lits, fired
    remaining = [len(law.antecedents) for law in laws]
    agenda = list(lits)
    while agenda:
        lit = agenda.pop()
        for i in d.static_laws_with(lit):
            remaining[i] -= 1
            if remaining[i] == 0:
                cons = laws[i].consequent
                fired.add(cons)
                if cons not in lits:
                    lits.add(cons)
                    agenda.append(cons)
    return lits, fired


def close_static(d: GroundedDomain, base: Iterable[Literal]) -> frozenset[Literal]:
    """Least fixpoint of the static laws over ``base``."""
    base = set(base)
    if has_complementary_pair(base):
        raise InconsistentClosure("base set already contains a complementary pair")
    lits, _ = _chain(d, base)
    if has_complementary_pair(lits):
        bad = sorted(str(lit) for lit in lits if lit.positive and lit.complement() in lits)
        raise InconsistentClosure(f"static closure derives both values of {bad}")
    return frozenset(lits)


def violated_static_laws(d: GroundedDomain, s: State) -> list[StaticLaw]:
    return [law for law in d.static_laws if s.holds_all(law.antecedents) and not s.holds(law.consequent)]


def _settle(d: GroundedDomain, fixed: frozenset[Literal], prior: State, error: type[RacError]) -> Transition:
    """Combine fixed literals, static closure and inertia from ``prior``.

    Every atom not fixed starts out carrying its ``prior`` value.  When the
    closure derives the complement of a carried value, inertia for that atom
    is blocked and the pass restarts; a derived literal contradicting a fixed
    one, or two derivations that no blocking can separate, is an error.
    """
    if has_complementary_pair(fixed):
        raise error("fixed literals contain a complementary pair")
    fixed_atoms = {lit.atom for lit in fixed}
    prior_true = prior.true_atoms

    if not d.static_laws:
        true = {a for a in prior_true if a not in fixed_atoms}
        true.update(lit.atom for lit in fixed if lit.positive)
        return Transition(State(frozenset(true)), fixed, frozenset())

    blocked: set[Atom] = set()
    for _ in range(len(d.fluents) + 1):
        carried = {
            Literal(f, f in prior_true)
            for f in d.sorted_fluents
            if f not in fixed_atoms and f not in blocked
        }
        lits, fired = _chain(d, fixed | carried)
        conflicts = {lit.atom for lit in lits if lit.positive and lit.complement() in lits}
        if not conflicts:
            break
        newly = {a for a in conflicts if a not in fixed_atoms and a not in blocked}
        if not newly:
            raise error(f"static laws derive both values of {sorted(map(str, conflicts))}")
        blocked |= newly
    else:  # pragma: no cover - the blocked set grows every pass
        raise error("inertia blocking did not converge")

    decided = {lit.atom for lit in lits}
    true = {lit.atom for lit in lits if lit.positive}
    # blocked atoms that nothing derives keep their prior value
    true.update(a for a in blocked if a not in decided and a in prior_true)
    state = State(frozenset(true))
    bad = violated_static_laws(d, state)
    if bad:
        raise error(f"successor violates static law {bad[0].consequent} if {sorted(map(str, bad[0].antecedents))}")
    derived = frozenset(lit for lit in fired if lit not in fixed)
    return Transition(state, fixed, derived, frozenset(blocked))


def step_trace(d: GroundedDomain, s: State, a: Atom) -> Transition:
    if not is_executable(d, s, a):
        raise NotExecutable(str(a))
    return _settle(d, direct_effects(d, s, a), s, InconsistentSuccessor)


def step(d: GroundedDomain, s: State, a: Atom) -> State:
    """Successor of ``s`` under ``a``: direct effects, static closure, inertia."""
    return step_trace(d, s, a).state


def initial_state(d: GroundedDomain, initially: Iterable[Atom]) -> State:
    """Complete state from the declared true atoms, closed-world elsewhere."""
    initially = frozenset(initially)
    unknown = [a for a in initially if a not in d.fluents]
    if unknown:
        raise UnknownFluent(f"initially mentions undeclared fluents {sorted(map(str, unknown))}")
    fixed = frozenset(Literal(a, True) for a in initially)
    return _settle(d, fixed, State(), InconsistentInitialState).state


def executable_actions(d: GroundedDomain, s: State) -> list[Atom]:
    return [a for a in d.actions if is_executable(d, s, a)]
