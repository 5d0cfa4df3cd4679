"""Brute-force reference semantics for small ground domains.

Successors are found by enumerating every complete state over the fluent
atoms and keeping those that (i) satisfy every applicable direct effect,
(ii) satisfy every static law, and (iii) change an atom only when the new
value is a direct effect or the consequent of a static law whose antecedents
hold in the candidate.  None of this goes through the engine's ``step``;
the engine is called afterwards only to report agreement.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import Atom, GroundedDomain, Literal, RacError, State, atom, step

MAX_ORACLE_FLUENTS = 12


class TooManyFluents(RacError):
    pass


class TooLarge(RacError):
    pass


@dataclass
class SuccessorReport:
    candidates_checked: int
    supported_successors: list[State]
    agrees_with_engine: bool | None = None
    engine_error: str | None = None

    @property
    def unique(self) -> bool:
        return len(self.supported_successors) == 1


def _holds(true: frozenset[Atom], lits) -> bool:
    return all((lit.atom in true) == lit.positive for lit in lits)


def oracle_executable(d: GroundedDomain, s: State, a: Atom) -> bool:
    laws = [law for law in d.executability_laws if law.action == a]
    return not laws or any(_holds(s.true_atoms, law.conditions) for law in laws)


class _Table:
    """All 2^|F| states of a domain as a boolean matrix, plus static-law firing masks."""

    def __init__(self, d: GroundedDomain):
        n = len(d.fluents)
        if n > MAX_ORACLE_FLUENTS:
            raise TooManyFluents(f"{n} fluent atoms > {MAX_ORACLE_FLUENTS}")
        self.atoms = sorted(d.fluents)
        self.col = {a: i for i, a in enumerate(self.atoms)}
        rows = np.arange(2 ** n, dtype=np.int64)
        self.states = ((rows[:, None] >> np.arange(n)) & 1).astype(bool)
        self.n = n
        sup_true = np.zeros((2 ** n, n), dtype=bool)
        sup_false = np.zeros((2 ** n, n), dtype=bool)
        statics_ok = np.ones(2 ** n, dtype=bool)
        for law in d.static_laws:
            fire = self.mask(law.antecedents)
            j = self.col[law.consequent.atom]
            cons = self.states[:, j] if law.consequent.positive else ~self.states[:, j]
            statics_ok &= ~fire | cons
            if law.consequent.positive:
                sup_true[:, j] |= fire
            else:
                sup_false[:, j] |= fire
        self.sup_true, self.sup_false, self.statics_ok = sup_true, sup_false, statics_ok

    def mask(self, lits) -> np.ndarray:
        m = np.ones(len(self.states), dtype=bool)
        for lit in lits:
            col = self.states[:, self.col[lit.atom]]
            m &= col if lit.positive else ~col
        return m

    def row_state(self, i: int) -> State:
        return State(frozenset(a for a, v in zip(self.atoms, self.states[i]) if v))


_tables: dict[int, tuple[GroundedDomain, _Table]] = {}


def _table(d: GroundedDomain) -> _Table:
    hit = _tables.get(id(d))
    if hit is not None and hit[0] is d:
        return hit[1]
    t = _Table(d)
    if len(_tables) > 64:
        _tables.clear()
    _tables[id(d)] = (d, t)
    return t


def supported_successors(d: GroundedDomain, s: State, a: Atom) -> tuple[int, list[State]]:
    t = _table(d)
    effects: set[Literal] = set()
    for law in d.effect_laws:
        if law.action == a and _holds(s.true_atoms, law.conditions):
            effects.add(law.effect)
    keep = t.statics_ok & t.mask(effects)
    prior = np.array([a_ in s.true_atoms for a_ in t.atoms], dtype=bool)
    eff_true = np.zeros(t.n, dtype=bool)
    eff_false = np.zeros(t.n, dtype=bool)
    for lit in effects:
        (eff_true if lit.positive else eff_false)[t.col[lit.atom]] = True
    changed = t.states != prior[None, :]
    supported = np.where(t.states, eff_true[None, :] | t.sup_true, eff_false[None, :] | t.sup_false)
    keep &= np.all(~changed | supported, axis=1)
    return len(t.states), [t.row_state(i) for i in np.flatnonzero(keep)]


def brute_successors(
    d: GroundedDomain,
    s: State,
    a: Atom,
    engine: Callable[[GroundedDomain, State, Atom], State] | None = None,
) -> SuccessorReport:
    if not oracle_executable(d, s, a):
        raise RacError(f"{a} is not executable")
    checked, found = supported_successors(d, s, a)
    report = SuccessorReport(checked, found)
    if engine is not None:
        try:
            out = engine(d, s, a)
        except RacError as exc:
            report.agrees_with_engine = False
            report.engine_error = f"{type(exc).__name__}: {exc}"
        else:
            report.agrees_with_engine = len(found) == 1 and found[0] == out
    return report


def brute_count_trajectories(d: GroundedDomain, s0: State, n: int, limit: int = 10 ** 5) -> int:
    """Count length-``n`` executable action sequences using oracle successors only."""
    if n < 0:
        raise ValueError("n must be non-negative")
    if len(d.actions) ** n > limit:
        raise TooLarge(f"{len(d.actions)}^{n} exceeds {limit}")
    memo: dict[tuple[frozenset[Atom], int], int] = {}

    def count(s: State, k: int) -> int:
        if k == 0:
            return 1
        key = (s.true_atoms, k)
        if key in memo:
            return memo[key]
        total = 0
        for a in d.actions:
            if not oracle_executable(d, s, a):
                continue
            _, succ = supported_successors(d, s, a)
            if len(succ) != 1:
                raise RacError(f"{a} from {s} has {len(succ)} supported successors")
            total += count(succ[0], k - 1)
        memo[key] = total
        return total

    return count(s0, n)


# Agreement suite ----------------------------------------------------------------


def small_groundings() -> dict[str, "WorldInstance"]:
    """One world per BLD domain whose grounding stays within the oracle cap."""
    from .worlds import blocks_world, make_world

    logistics = make_world(
        "logistics",
        {"city": ["c1"], "location": ["l1", "l2"], "truck": ["t1"], "airplane": ["a1"], "package": ["p1"]},
        [atom("at", "t1", "l1"), atom("at", "a1", "l2"), atom("at", "p1", "l1"), atom("outside", "p1")],
        [atom("in_city", "l1", "c1"), atom("in_city", "l2", "c1"), atom("airport", "l1"), atom("airport", "l2")],
    )
    dwr = make_world(
        "dwr",
        {"location": ["x1", "x2"], "robot": ["r1"], "crane": ["k1"], "pile": ["p1"], "container": ["c1"]},
        [atom("at", "r1", "x1"), atom("in", "c1", "p1"), atom("top", "c1", "p1")],
        [atom("adjacent", "x1", "x2"), atom("adjacent", "x2", "x1"), atom("attached", "p1", "x1"), atom("belong", "k1", "x1")],
    )
    return {"blocks": blocks_world([["b1", "b2"], ["b3"]]), "logistics": logistics, "dwr": dwr}


@dataclass
class SuiteReport:
    trials: int = 0
    agreements: int = 0
    by_domain: dict[str, list[int]] = field(default_factory=dict)
    failures: list[dict] = field(default_factory=list)

    @property
    def rate(self) -> float | None:
        return self.agreements / self.trials if self.trials else None

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "agreements": self.agreements,
            "rate": self.rate,
            "by_domain": {k: {"trials": v[0], "agreements": v[1]} for k, v in sorted(self.by_domain.items())},
            "failures": self.failures[:20],
        }


def _walk(d: GroundedDomain, s: State, rng: random.Random, steps: int) -> State:
    for _ in range(steps):
        options = [a for a in d.actions if oracle_executable(d, s, a)]
        if not options:
            break
        s = step(d, s, rng.choice(options))
    return s


def agreement_suite(trials: int, max_fluents: int = 8, seed: int = 0, bld_share: float = 0.25) -> SuiteReport:
    """Compare the engine's ``step`` with the unique supported successor.

    Three quarters of the trials (by default) use freshly synthesized generic
    domains with up to ``max_fluents`` fluents, from any state.  The rest use
    the small BLD groundings from states reached by a random walk; arbitrary
    assignments there can be physically impossible (a package inside two
    vehicles) and have no successor under either semantics.
    """
    from .synth import GenericParams, synth_generic

    if max_fluents > MAX_ORACLE_FLUENTS:
        raise TooManyFluents(f"{max_fluents} fluents > {MAX_ORACLE_FLUENTS}")
    if max_fluents < 1:
        raise ValueError("max_fluents must be >= 1")
    rng = random.Random(seed)
    bld = small_groundings()
    report = SuiteReport()
    while report.trials < trials:
        if rng.random() < bld_share:
            kind = rng.choice(sorted(bld))
            w = bld[kind]
            d = w.grounded
            s = _walk(d, w.s0, rng, rng.randint(0, 6))
        else:
            kind = "generic"
            p = GenericParams(rng.randint(1, max_fluents), rng.randint(1, 5), seed=rng.getrandbits(32))
            d = synth_generic(p)
            s = State(frozenset(a for a in d.sorted_fluents if rng.random() < 0.5))
        options = [a for a in d.actions if oracle_executable(d, s, a)]
        if not options:
            continue
        a = rng.choice(options)
        r = brute_successors(d, s, a, engine=step)
        counts = report.by_domain.setdefault(kind, [0, 0])
        report.trials += 1
        counts[0] += 1
        if r.agrees_with_engine:
            report.agreements += 1
            counts[1] += 1
        else:
            report.failures.append({
                "domain": kind,
                "state": [str(x) for x in s.sorted_atoms()],
                "action": str(a),
                "supported": len(r.supported_successors),
                "engine_error": r.engine_error,
            })
    return report
