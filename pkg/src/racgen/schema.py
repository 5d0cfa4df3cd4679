"""Typed law schemas and grounding over an object universe.

Schema arguments starting with an uppercase letter are variables; anything
else is a constant.  Variable types come from explicit ``for`` bindings, the
action declaration a law is attached to, or the argument positions of the
fluent and rigid signatures the variable occurs in (most specific wins).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

from .core import (
    Atom,
    EffectLaw,
    ExecutabilityLaw,
    GroundedDomain,
    Literal,
    RacError,
    StaticLaw,
)


class SchemaError(RacError):
    pass


class UnknownType(SchemaError):
    pass


class EmptyUniverse(SchemaError):
    pass


def is_var(term: str) -> bool:
    return bool(term) and (term[0].isupper() or term[0] == "_")


def atom_vars(a: Atom) -> list[str]:
    return [t for t in a.args if is_var(t)]


@dataclass(frozen=True)
class Guard:
    """Grounding filter: variable inequalities plus required rigid facts."""

    neq: tuple[tuple[str, str], ...] = ()
    rigid: tuple[Literal, ...] = ()

    def variables(self) -> set[str]:
        out = {v for pair in self.neq for v in pair if is_var(v)}
        for lit in self.rigid:
            out.update(atom_vars(lit.atom))
        return out

    def __bool__(self) -> bool:
        return bool(self.neq or self.rigid)


@dataclass(frozen=True)
class Declaration:
    """A fluent or action schema such as ``on(X:block, Y:block) where X != Y``."""

    pattern: Atom
    types: tuple[tuple[str, str], ...] = ()
    guard: Guard = Guard()

    def type_map(self) -> dict[str, str]:
        return dict(self.types)


@dataclass(frozen=True)
class LawSchema:
    kind: str  # "effect", "executable" or "static"
    heads: tuple[Literal, ...] = ()
    body: tuple[Literal, ...] = ()
    action: Atom | None = None
    unless: tuple[Atom, ...] = ()
    types: tuple[tuple[str, str], ...] = ()
    guard: Guard = Guard()

    def variables(self) -> set[str]:
        out: set[str] = set()
        if self.action is not None:
            out.update(atom_vars(self.action))
        for lit in (*self.heads, *self.body):
            out.update(atom_vars(lit.atom))
        for a in self.unless:
            out.update(atom_vars(a))
        out.update(self.guard.variables())
        return out

    def outer_variables(self) -> set[str]:
        """Variables bound per ground law (``unless``-only ones are expanded)."""
        out: set[str] = set()
        if self.action is not None:
            out.update(atom_vars(self.action))
        for lit in (*self.heads, *self.body):
            out.update(atom_vars(lit.atom))
        return out


@dataclass(frozen=True)
class SchemaDomain:
    name: str
    object_types: tuple[tuple[str, tuple[str, ...]], ...]  # (type, supertypes)
    rigid_signatures: tuple[Atom, ...] = ()
    fluent_schemas: tuple[Declaration, ...] = ()
    action_schemas: tuple[Declaration, ...] = ()
    law_schemas: tuple[LawSchema, ...] = ()

    @property
    def type_names(self) -> list[str]:
        return [t for t, _ in self.object_types]

    def supertypes(self) -> dict[str, tuple[str, ...]]:
        return dict(self.object_types)

    def ancestors(self, t: str) -> set[str]:
        sup = self.supertypes()
        seen = {t}
        stack = [t]
        while stack:
            for parent in sup.get(stack.pop(), ()):
                if parent not in seen:
                    seen.add(parent)
                    stack.append(parent)
        return seen

    def is_subtype(self, t: str, parent: str) -> bool:
        return parent in self.ancestors(t)

    def signature_types(self) -> dict[tuple[str, int], list[str]]:
        """Argument types of fluent and rigid predicates keyed by (name, arity)."""
        out: dict[tuple[str, int], list[str]] = {}
        for decl in self.fluent_schemas:
            tm = decl.type_map()
            key = (decl.pattern.predicate, len(decl.pattern.args))
            out[key] = [tm.get(t, "") if is_var(t) else "" for t in decl.pattern.args]
        for sig in self.rigid_signatures:
            out[(sig.predicate, len(sig.args))] = list(sig.args)
        return out

    def rigid_predicates(self) -> set[tuple[str, int]]:
        return {(s.predicate, len(s.args)) for s in self.rigid_signatures}

    def action_declaration(self, pattern: Atom) -> Declaration | None:
        """The declaration whose pattern equals ``pattern`` up to variable renaming."""
        for decl in self.action_schemas:
            if _same_shape(decl.pattern, pattern):
                return decl
        return None


def _same_shape(a: Atom, b: Atom) -> bool:
    if a.predicate != b.predicate or len(a.args) != len(b.args):
        return False
    for x, y in zip(a.args, b.args):
        if is_var(x) != is_var(y) or (not is_var(x) and x != y):
            return False
    ren = {x: y for x, y in zip(a.args, b.args) if is_var(x)}
    return len(set(ren.values())) == len(ren)


@dataclass(frozen=True)
class ObjectUniverse:
    """Typed objects plus the rigid (time-independent) facts of an instance."""

    objects: Mapping[str, tuple[str, ...]]
    rigid: frozenset[Atom] = field(default_factory=frozenset)

    def members(self, schema: SchemaDomain, t: str) -> tuple[str, ...]:
        out: list[str] = []
        for leaf, names in self.objects.items():
            if schema.is_subtype(leaf, t):
                out.extend(names)
        return tuple(sorted(set(out)))


def _substitute(a: Atom, theta: Mapping[str, str]) -> Atom:
    return Atom(a.predicate, tuple(theta.get(t, t) for t in a.args))


def _substitute_lit(lit: Literal, theta: Mapping[str, str]) -> Literal:
    return Literal(_substitute(lit.atom, theta), lit.positive)


def _infer_types(
    schema: SchemaDomain,
    variables: Iterable[str],
    explicit: Mapping[str, str],
    atoms: Iterable[Atom],
    where: str,
) -> dict[str, str]:
    sigs = schema.signature_types()
    seen: dict[str, list[str]] = {}
    for a in atoms:
        types = sigs.get((a.predicate, len(a.args)))
        if types is None:
            continue
        for arg, t in zip(a.args, types):
            if is_var(arg) and t:
                seen.setdefault(arg, []).append(t)
    out: dict[str, str] = {}
    for v in variables:
        if v in explicit:
            out[v] = explicit[v]
            continue
        cands = seen.get(v)
        if not cands:
            raise SchemaError(f"{where}: cannot infer a type for variable {v}")
        best = [c for c in cands if all(schema.is_subtype(c, o) for o in cands)]
        if not best:
            raise SchemaError(f"{where}: incompatible types {sorted(set(cands))} for {v}")
        out[v] = best[0]
    return out


class _Grounder:
    def __init__(self, schema: SchemaDomain, universe: ObjectUniverse, allow_empty: bool):
        self.schema = schema
        self.universe = universe
        self.allow_empty = allow_empty
        declared = set(schema.type_names)
        for t, sups in schema.object_types:
            for s in sups:
                if s not in declared:
                    raise UnknownType(f"type {t} has undeclared supertype {s}")
        for t in universe.objects:
            if t not in declared:
                raise UnknownType(f"universe uses undeclared type {t}")
        self._members: dict[str, tuple[str, ...]] = {}
        self.rigid_preds = schema.rigid_predicates()

    def members(self, t: str) -> tuple[str, ...]:
        if t not in self._members:
            if t not in set(self.schema.type_names):
                raise UnknownType(t)
            objs = self.universe.members(self.schema, t)
            if not objs and not self.allow_empty:
                raise EmptyUniverse(f"no objects of type {t}")
            self._members[t] = objs
        return self._members[t]

    def guard_ok(self, guard: Guard, theta: Mapping[str, str]) -> bool:
        for x, y in guard.neq:
            if theta.get(x, x) == theta.get(y, y):
                return False
        rigid = self.universe.rigid
        for lit in guard.rigid:
            if (_substitute(lit.atom, theta) in rigid) != lit.positive:
                return False
        return True

    def substitutions(
        self,
        variables: list[str],
        types: Mapping[str, str],
        guard: Guard,
        base: Mapping[str, str] | None = None,
    ) -> Iterator[dict[str, str]]:
        base = dict(base or {})
        pools = [self.members(types[v]) for v in variables]
        # constraints are checked as soon as all of their variables are bound
        checks: list[list[tuple[str, str] | Literal]] = [[] for _ in variables]
        pos = {v: i for i, v in enumerate(variables)}

        def last_index(vs: Iterable[str]) -> int:
            idx = [pos[v] for v in vs if v in pos]
            return max(idx) if idx else -1

        early: list[tuple[str, str] | Literal] = []
        for pair in guard.neq:
            i = last_index(v for v in pair if is_var(v))
            (checks[i] if i >= 0 else early).append(pair)
        for lit in guard.rigid:
            i = last_index(atom_vars(lit.atom))
            (checks[i] if i >= 0 else early).append(lit)

        def ok(items: list, theta: dict[str, str]) -> bool:
            neq = tuple(x for x in items if not isinstance(x, Literal))
            rig = tuple(x for x in items if isinstance(x, Literal))
            return self.guard_ok(Guard(neq, rig), theta)

        if early and not ok(early, base):
            return

        theta = dict(base)

        def rec(i: int) -> Iterator[dict[str, str]]:
            if i == len(variables):
                yield dict(theta)
                return
            v = variables[i]
            for obj in pools[i]:
                theta[v] = obj
                if ok(checks[i], theta):
                    yield from rec(i + 1)
            theta.pop(v, None)

        yield from rec(0)

    def ground_decls(self, decls: Iterable[Declaration], kind: str) -> list[Atom]:
        out: list[Atom] = []
        for decl in decls:
            explicit = decl.type_map()
            vars_ = sorted(set(atom_vars(decl.pattern)) | decl.guard.variables())
            types = _infer_types(
                self.schema, vars_, explicit,
                [lit.atom for lit in decl.guard.rigid], f"{kind} {decl.pattern}",
            )
            for theta in self.substitutions(vars_, types, decl.guard):
                out.append(_substitute(decl.pattern, theta))
        return out

    def law_types(self, law: LawSchema) -> dict[str, str]:
        explicit = dict(law.types)
        if law.action is not None:
            decl = self.schema.action_declaration(law.action)
            if decl is None:
                raise SchemaError(f"law refers to undeclared action schema {law.action}")
            dtypes = decl.type_map()
            for mine, theirs in zip(law.action.args, decl.pattern.args):
                if is_var(mine) and theirs in dtypes:
                    explicit.setdefault(mine, dtypes[theirs])
        atoms = [lit.atom for lit in (*law.heads, *law.body)] + list(law.unless)
        atoms += [lit.atom for lit in law.guard.rigid]
        return _infer_types(self.schema, sorted(law.variables()), explicit, atoms, f"law {law}")


def ground(schema: SchemaDomain, universe: ObjectUniverse, allow_empty: bool = False) -> GroundedDomain:
    """Instantiate every schema over all type-respecting substitutions."""
    g = _Grounder(schema, universe, allow_empty)
    fluents = set(g.ground_decls(schema.fluent_schemas, "fluent"))
    actions = set(g.ground_decls(schema.action_schemas, "action"))
    effect_laws: list[EffectLaw] = []
    exec_laws: list[ExecutabilityLaw] = []
    static_laws: list[StaticLaw] = []

    for law in schema.law_schemas:
        types = g.law_types(law)
        outer = sorted(law.outer_variables())
        inner = sorted({v for a in law.unless for v in atom_vars(a)} - set(outer))
        exist = sorted(law.guard.variables() - set(outer) - set(inner))
        touches_inner = lambda vs: bool(set(vs) & set(inner))  # noqa: E731
        outer_guard = Guard(
            tuple(p for p in law.guard.neq if not touches_inner(p)),
            tuple(lit for lit in law.guard.rigid if not touches_inner(atom_vars(lit.atom))),
        )
        inner_guard = Guard(
            tuple(p for p in law.guard.neq if touches_inner(p)),
            tuple(lit for lit in law.guard.rigid if touches_inner(atom_vars(lit.atom))),
        )
        for theta in g.substitutions(outer, types, Guard() if exist else outer_guard):
            if exist:
                witness = next(g.substitutions(exist, types, outer_guard, theta), None)
                if witness is None:
                    continue
            act = _substitute(law.action, theta) if law.action is not None else None
            if act is not None and act not in actions:
                continue
            body = [_substitute_lit(lit, theta) for lit in law.body]
            if inner:
                for sub in g.substitutions(inner, types, inner_guard, theta):
                    body.extend(Literal(_substitute(a, sub), False) for a in law.unless)
                if not body:
                    # nothing can block the default: no ground law
                    continue
            conds = frozenset(body)
            if law.kind == "executable":
                exec_laws.append(ExecutabilityLaw(act, conds))
                continue
            for head in law.heads:
                h = _substitute_lit(head, theta)
                if law.kind == "effect":
                    effect_laws.append(EffectLaw(act, h, conds))
                else:
                    static_laws.append(StaticLaw(h, conds))

    return GroundedDomain(
        fluents, actions,
        _dedupe(effect_laws), _dedupe(exec_laws), _dedupe(static_laws),
    )


def _dedupe(items: list) -> list:
    return list(dict.fromkeys(items))


def ground_action_count(schema: SchemaDomain, universe: ObjectUniverse) -> int:
    g = _Grounder(schema, universe, allow_empty=True)
    return len(set(g.ground_decls(schema.action_schemas, "action")))

