"""Line-oriented textual domain format.

Two dialects share one syntax.  The schema dialect has typed variables::

    type: block
    fluent: on(X:block, Y:block) where X != Y
    action: move(X:block, table)
    move(X,table) executable_if clear(X)
    move(X,table) causes clear(Z) if on(X,Z) where Z != X
    static unloaded(R) unless loaded(R,C)

The ground dialect lists ground atoms and laws, plus an optional
``initially:`` line.  ``-`` (or ``¬``) marks a negative literal and ``%``
starts a comment.  See ``docs/domain-format.md`` for the full grammar.
"""
from __future__ import annotations

import re
from collections import defaultdict
from typing import Iterable

from .core import (
    Atom,
    EffectLaw,
    ExecutabilityLaw,
    GroundedDomain,
    Literal,
    RacError,
    StaticLaw,
)
from .schema import Declaration, Guard, LawSchema, SchemaDomain, is_var


class DomainSyntaxError(RacError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


_NAME = r"[A-Za-z0-9_][A-Za-z0-9_\-']*"
_ATOM_RE = re.compile(rf"^({_NAME})\s*(?:\((.*)\))?$")
_KEYWORDS = ("executable_if", "causes", "if", "unless", "for", "where")


def split_top(text: str, sep: str = ",") -> list[str]:
    """Split on ``sep`` outside parentheses, dropping empty pieces."""
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise DomainSyntaxError(f"unbalanced ')' in {text!r}")
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    if depth != 0:
        raise DomainSyntaxError(f"unbalanced '(' in {text!r}")
    parts.append("".join(cur))
    return [p.strip() for p in parts if p.strip()]


def parse_atom(text: str) -> Atom:
    text = text.strip()
    m = _ATOM_RE.match(text)
    if not m:
        raise DomainSyntaxError(f"malformed atom {text!r}")
    name, args = m.group(1), m.group(2)
    if args is None:
        return Atom(name, ())
    parsed = tuple(a.strip() for a in args.split(","))
    for a in parsed:
        if not re.fullmatch(_NAME, a):
            raise DomainSyntaxError(f"malformed argument {a!r} in {text!r}")
    return Atom(name, parsed)


def parse_literal(text: str) -> Literal:
    text = text.strip()
    if text.startswith(("-", "¬")):
        return Literal(parse_atom(text[1:]), False)
    if text.startswith("neg(") and text.endswith(")"):
        return Literal(parse_atom(text[4:-1]), False)
    return Literal(parse_atom(text), True)


def _typed_atom(text: str) -> tuple[Atom, list[tuple[str, str]]]:
    """Parse ``move(X:block, table)`` into the pattern and its variable types."""
    m = _ATOM_RE.match(text.strip())
    if not m:
        raise DomainSyntaxError(f"malformed declaration {text!r}")
    name, args = m.group(1), m.group(2)
    if args is None:
        return Atom(name, ()), []
    terms, types = [], []
    for raw in args.split(","):
        raw = raw.strip()
        if ":" in raw:
            var, typ = (x.strip() for x in raw.split(":", 1))
            types.append((var, typ))
            terms.append(var)
        else:
            terms.append(raw)
    return Atom(name, tuple(terms)), types


def _clauses(text: str) -> dict[str, str]:
    """Cut a statement at top-level keywords into {keyword: text}."""
    out: dict[str, str] = {}
    depth = 0
    tokens = re.split(r"(\s+|\(|\))", text)
    current = ""
    buf: list[str] = []
    for tok in tokens:
        if tok == "(":
            depth += 1
        elif tok == ")":
            depth -= 1
        if depth == 0 and tok in _KEYWORDS:
            if tok in out or tok == current:
                raise DomainSyntaxError(f"keyword {tok!r} repeated in {text!r}")
            out[current] = "".join(buf).strip()
            current, buf = tok, []
            continue
        buf.append(tok)
    out[current] = "".join(buf).strip()
    return out


def _parse_guard(text: str | None) -> Guard:
    if not text:
        return Guard()
    neq, rigid = [], []
    for part in split_top(text):
        if "!=" in part:
            x, y = (t.strip() for t in part.split("!=", 1))
            neq.append((x, y))
        else:
            rigid.append(parse_literal(part))
    return Guard(tuple(neq), tuple(rigid))


def _parse_types(text: str | None) -> tuple[tuple[str, str], ...]:
    if not text:
        return ()
    out = []
    for part in split_top(text):
        if ":" not in part:
            raise DomainSyntaxError(f"expected Var:type in {part!r}")
        v, t = (x.strip() for x in part.split(":", 1))
        out.append((v, t))
    return tuple(out)


def _strip_comment(line: str) -> str:
    return line.split("%", 1)[0].strip()


# ---------------------------------------------------------------- schema

def parse_schema(text: str, name: str = "domain") -> SchemaDomain:
    types: list[tuple[str, tuple[str, ...]]] = []
    rigid: list[Atom] = []
    fluents: list[Declaration] = []
    actions: list[Declaration] = []
    laws: list[LawSchema] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        if raw.lstrip().startswith("%% name:"):
            name = raw.split(":", 1)[1].strip()
            continue
        line = _strip_comment(raw)
        if not line:
            continue
        try:
            head, _, rest = line.partition(":")
            key = head.strip()
            if key == "type" and _:
                if "<" in rest:
                    t, sups = rest.split("<", 1)
                    types.append((t.strip(), tuple(s.strip() for s in sups.split(",") if s.strip())))
                else:
                    types.extend((t.strip(), ()) for t in rest.split(",") if t.strip())
            elif key == "rigid" and _:
                rigid.extend(parse_atom(p) for p in split_top(rest))
            elif key in ("fluent", "action") and _:
                target = fluents if key == "fluent" else actions
                target.extend(_parse_declarations(rest))
            else:
                laws.append(_parse_law(line))
        except DomainSyntaxError as exc:
            raise DomainSyntaxError(str(exc), lineno) from None
    return SchemaDomain(name, tuple(types), tuple(rigid), tuple(fluents), tuple(actions), tuple(laws))


def _parse_declarations(rest: str) -> list[Declaration]:
    cl = _clauses(rest)
    decls = split_top(cl[""])
    if len(decls) > 1 and (cl.get("where") or cl.get("for")):
        raise DomainSyntaxError("a declaration with 'for'/'where' must stand alone on its line")
    out = []
    extra = _parse_types(cl.get("for"))
    for d in decls:
        pattern, tys = _typed_atom(d)
        out.append(Declaration(pattern, tuple(tys) + extra, _parse_guard(cl.get("where"))))
    return out


def _parse_law(line: str) -> LawSchema:
    if line.startswith("static "):
        cl = _clauses(line[len("static "):])
        heads = tuple(parse_literal(p) for p in split_top(cl[""]))
        if not heads:
            raise DomainSyntaxError("static law without a consequent")
        body = tuple(parse_literal(p) for p in split_top(cl.get("if", "")))
        unless = tuple(parse_atom(p) for p in split_top(cl.get("unless", "")))
        if not body and not unless:
            raise DomainSyntaxError("static law needs an 'if' or 'unless' part")
        return LawSchema("static", heads, body, None, unless,
                         _parse_types(cl.get("for")), _parse_guard(cl.get("where")))
    cl = _clauses(line)
    if "executable_if" in cl:
        act = parse_atom(cl[""])
        body = tuple(parse_literal(p) for p in split_top(cl["executable_if"]))
        return LawSchema("executable", (), body, act, (),
                         _parse_types(cl.get("for")), _parse_guard(cl.get("where")))
    if "causes" in cl:
        act = parse_atom(cl[""])
        heads = tuple(parse_literal(p) for p in split_top(cl["causes"]))
        if not heads:
            raise DomainSyntaxError("effect law without an effect literal")
        body = tuple(parse_literal(p) for p in split_top(cl.get("if", "")))
        return LawSchema("effect", heads, body, act, (),
                         _parse_types(cl.get("for")), _parse_guard(cl.get("where")))
    raise DomainSyntaxError(f"unrecognised statement {line!r}")


def _fmt_lits(lits: Iterable[Literal]) -> str:
    return ", ".join(str(lit) for lit in lits)


def _fmt_decl(decl: Declaration) -> str:
    tmap = decl.type_map()
    if decl.pattern.args:
        args = ", ".join(f"{a}:{tmap[a]}" if a in tmap else a for a in decl.pattern.args)
        text = f"{decl.pattern.predicate}({args})"
    else:
        text = decl.pattern.predicate
    in_pattern = set(decl.pattern.args)
    extra = [(v, t) for v, t in decl.types if v not in in_pattern]
    if extra:
        text += " for " + ", ".join(f"{v}:{t}" for v, t in extra)
    return text + _fmt_guard(decl.guard)


def _fmt_guard(guard: Guard) -> str:
    parts = [f"{x} != {y}" for x, y in guard.neq] + [str(lit) for lit in guard.rigid]
    return " where " + ", ".join(parts) if parts else ""


def format_schema(schema: SchemaDomain) -> str:
    lines = [f"%% name: {schema.name}"]
    for t, sups in schema.object_types:
        lines.append(f"type: {t} < {', '.join(sups)}" if sups else f"type: {t}")
    if schema.rigid_signatures:
        lines.append("rigid: " + ", ".join(str(s) for s in schema.rigid_signatures))
    for decl in schema.fluent_schemas:
        lines.append("fluent: " + _fmt_decl(decl))
    for decl in schema.action_schemas:
        lines.append("action: " + _fmt_decl(decl))
    for law in schema.law_schemas:
        if law.kind == "static":
            text = "static " + _fmt_lits(law.heads)
        elif law.kind == "executable":
            text = f"{law.action} executable_if"
        else:
            text = f"{law.action} causes {_fmt_lits(law.heads)}"
        if law.kind == "executable":
            text += " " + _fmt_lits(law.body)
        elif law.body:
            text += " if " + _fmt_lits(law.body)
        if law.unless:
            text += " unless " + ", ".join(str(a) for a in law.unless)
        if law.types:
            text += " for " + ", ".join(f"{v}:{t}" for v, t in law.types)
        text += _fmt_guard(law.guard)
        lines.append(text)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- ground

def _sorted_lits(lits: Iterable[Literal]) -> list[Literal]:
    return sorted(lits, key=lambda lit: (lit.atom, not lit.positive))


def format_grounded(d: GroundedDomain, initially: Iterable[Atom] | None = None) -> str:
    """Print a ground domain; ``parse_grounded`` of the output is the identity."""
    lines: list[str] = []
    by_pred: dict[str, list[Atom]] = defaultdict(list)
    for f in d.sorted_fluents:
        by_pred[f.predicate].append(f)
    for pred in sorted(by_pred):
        lines.append("fluent: " + ", ".join(map(str, by_pred[pred])))
    by_pred = defaultdict(list)
    for a in d.actions:
        by_pred[a.predicate].append(a)
    for pred in sorted(by_pred):
        lines.append("action: " + ", ".join(map(str, by_pred[pred])))
    for law in sorted(d.executability_laws, key=lambda x: (x.action, _sorted_lits(x.conditions))):
        lines.append(f"{law.action} executable_if {_fmt_lits(_sorted_lits(law.conditions))}".rstrip())
    for law in sorted(d.effect_laws, key=lambda x: (x.action, x.effect, _sorted_lits(x.conditions))):
        text = f"{law.action} causes {law.effect}"
        if law.conditions:
            text += " if " + _fmt_lits(_sorted_lits(law.conditions))
        lines.append(text)
    for law in sorted(d.static_laws, key=lambda x: (x.consequent, _sorted_lits(x.antecedents))):
        lines.append(f"static {law.consequent} if {_fmt_lits(_sorted_lits(law.antecedents))}")
    if initially is not None:
        lines.append("initially: " + ", ".join(map(str, sorted(initially))))
    return "\n".join(lines) + "\n"


def parse_grounded(text: str) -> tuple[GroundedDomain, frozenset[Atom] | None]:
    fluents: list[Atom] = []
    actions: list[Atom] = []
    effects: list[EffectLaw] = []
    execs: list[ExecutabilityLaw] = []
    statics: list[StaticLaw] = []
    initially: set[Atom] | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line:
            continue
        try:
            key, colon, rest = line.partition(":")
            key = key.strip()
            if colon and key in ("fluent", "action", "initially"):
                atoms = [parse_atom(p) for p in split_top(rest)]
                for a in atoms:
                    if any(is_var(t) for t in a.args) and key != "initially":
                        raise DomainSyntaxError(f"variable in ground {key} {a}")
                if key == "fluent":
                    fluents.extend(atoms)
                elif key == "action":
                    actions.extend(atoms)
                else:
                    initially = (initially or set()) | set(atoms)
                continue
            law = _parse_law(line)
            if law.types or law.guard or law.unless:
                raise DomainSyntaxError("for/where/unless are only allowed in schemas")
            if law.kind == "static":
                statics.extend(StaticLaw(h, frozenset(law.body)) for h in law.heads)
            elif law.kind == "executable":
                execs.append(ExecutabilityLaw(law.action, frozenset(law.body)))
            else:
                effects.extend(EffectLaw(law.action, h, frozenset(law.body)) for h in law.heads)
        except DomainSyntaxError as exc:
            raise DomainSyntaxError(str(exc), lineno) from None
    d = GroundedDomain(fluents, actions, effects, execs, statics)
    return d, (frozenset(initially) if initially is not None else None)
