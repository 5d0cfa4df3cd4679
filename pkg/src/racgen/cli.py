"""Command-line entry point: ``racgen <subcommand> ...``.

Exit codes: 0 ok, 1 usage error, 2 generation error, 3 validation mismatch.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .core import RacError
from .dataset import SplitSpec, build_dataset, validate_dataset, write_jsonl, write_stats
from .generic import QUESTION_TRANSLATIONS, to_generic
from .oracle import MAX_ORACLE_FLUENTS, agreement_suite
from .worlds import DOMAIN_KINDS, ComplexityLevel, InvalidLevel, WorldInstance, sample_world

EXIT_OK, EXIT_USAGE, EXIT_GENERATION, EXIT_MISMATCH = 0, 1, 2, 3


class UsageError(Exception):
    pass


class UnsupportedDomain(RacError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse exits with 2 by default
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _level(prefix: str):
    def parse(text: str) -> str:
        try:
            lv = ComplexityLevel.parse(text)
        except InvalidLevel as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if str(lv)[0] != prefix:
            raise argparse.ArgumentTypeError(f"expected {prefix}1..{prefix}5, got {text!r}")
        return str(lv)
    return parse


def _cap(text: str) -> float | None:
    if text.lower() in ("none", "inf", "0"):
        return None
    try:
        return float(int(text))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"token cap must be an integer or 'none', got {text!r}") from exc


def _tag(exc: BaseException) -> str:
    return f"{type(exc).__module__}: {type(exc).__name__}: {exc}"


# generate -----------------------------------------------------------------------


def cmd_generate(args: argparse.Namespace) -> int:
    others = args.others if args.others is not None else (0 if args.domain == "generic" else 30000)
    try:
        spec = SplitSpec(
            domain=args.domain,
            verify=args.verify,
            counting=args.counting,
            others=others,
            level=args.level,
            depth=args.depth,
            with_rules=args.with_rules,
            test_fraction=args.test_fraction,
            seed=args.seed,
            workers=args.workers,
            token_cap=args.token_cap,
            over_budget=args.over_budget,
            embed_states=args.embed_states,
            templates=args.templates or os.environ.get("RACGEN_TEMPLATES"),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    result = build_dataset(spec)
    paths = {"train": out / "train.jsonl", "test": out / "test.jsonl"}
    write_jsonl(paths["train"], result.train)
    write_jsonl(paths["test"], result.test)
    stats_path = out / "stats.json"
    write_stats(stats_path, result.stats)
    for side in ("train", "test"):
        s = result.stats["splits"][side]
        bal = s["label_balance"]
        print(f"{side}: {s['examples']} examples from {s['worlds']} worlds; counts {s['counts']}; "
              f"verify balance {'n/a' if bal is None else f'{bal:.3f}'}; over budget {s['over_budget']}")
    print(f"wrote {paths['train']}, {paths['test']}, {stats_path}")
    if args.figures:
        from .report import write_report

        for p in write_report(stats_path, paths):
            print(f"wrote {p}")
    return EXIT_OK


# validate -----------------------------------------------------------------------


def cmd_validate(args: argparse.Namespace) -> int:
    status = EXIT_OK
    for path in args.paths:
        if not Path(path).is_file():
            raise UsageError(f"no such file: {path}")
        rep = validate_dataset(path)
        for line in rep.external:
            print(f"{path}:{line}: external: skipped")
        for line, want, got in rep.mismatches:
            print(f"{path}:{line}: mismatch: stored {want!r}, re-evaluated {got!r}")
        for line, msg in rep.errors:
            print(f"{path}:{line}: error: {msg}")
        print(f"{path}: {rep.checked} checked, {len(rep.mismatches)} mismatches, "
              f"{len(rep.external)} external, {len(rep.errors)} errors")
        if not rep.ok:
            status = EXIT_MISMATCH
    return status


# translate ---------------------------------------------------------------------


def _load_world(args: argparse.Namespace) -> WorldInstance:
    if args.world:
        doc = json.loads(Path(args.world).read_text("utf-8"))
        if isinstance(doc, dict) and "meta" in doc and "world" in doc["meta"]:
            doc = doc["meta"]["world"]  # a dataset line written with --embed-states
        return WorldInstance.from_json(doc)
    if args.domain and args.level:
        return sample_world(args.domain, args.level, args.seed)
    raise UsageError("give a world JSON file or --domain and --level")


def cmd_translate(args: argparse.Namespace) -> int:
    w = _load_world(args)
    if w.domain_kind not in ("blocks", "logistics", "dwr"):
        raise UnsupportedDomain(f"translate expects a blocks, logistics or dwr world, got {w.domain_kind}")
    fs = to_generic(w.grounded, w.s0, source=w.domain_kind)
    problems = fs.validate()
    if problems:
        raise RacError("translated fact set is inconsistent: " + "; ".join(problems[:5]))
    translations = {
        key: text for (dom, key), text in sorted(QUESTION_TRANSLATIONS.items()) if dom in (w.domain_kind, "*")
    }
    if args.out:
        out = Path(args.out)
        out.write_text(fs.to_text(), encoding="utf-8")
        tr = out.with_suffix(".questions.json")
        tr.write_text(json.dumps(translations, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {len(fs)} facts to {out} and question translations to {tr}")
    else:
        sys.stdout.write(fs.to_text())
        print(f"% {len(fs)} facts")
        for key, text in translations.items():
            print(f"% {key}: {text}")
    return EXIT_OK


# world -------------------------------------------------------------------------


def cmd_world(args: argparse.Namespace) -> int:
    w = sample_world(args.domain, args.level, args.seed)
    text = json.dumps(w.to_json(), indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote world {w.canonical_hash} to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# oracle-check ------------------------------------------------------------------


def cmd_oracle_check(args: argparse.Namespace) -> int:
    if args.fluents > MAX_ORACLE_FLUENTS:
        raise UsageError(f"TooManyFluents: --fluents {args.fluents} exceeds the oracle cap of {MAX_ORACLE_FLUENTS}")
    if args.fluents < 1 or args.trials < 0:
        raise UsageError("--fluents must be >= 1 and --trials >= 0")
    report = agreement_suite(args.trials, args.fluents, seed=args.seed).to_json()
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    rate = report["rate"]
    print(f"agreement rate: {'n/a' if rate is None else f'{rate:.4f}'} over {report['trials']} trials",
          file=sys.stderr)
    return EXIT_OK if rate in (None, 1.0) else EXIT_MISMATCH


# report ------------------------------------------------------------------------


def cmd_report(args: argparse.Namespace) -> int:
    from .report import print_rows, summary_rows, write_report

    stats = Path(args.stats)
    if not stats.is_file():
        raise UsageError(f"no such file: {stats}")
    datasets = {}
    for side in ("train", "test"):
        p = getattr(args, side) or stats.parent / f"{side}.jsonl"
        if Path(p).is_file():
            datasets[side] = p
    for p in write_report(stats, datasets or None, figures=not args.no_figures):
        print(f"wrote {p}")
    print(print_rows(summary_rows(json.loads(stats.read_text("utf-8")))))
    return EXIT_OK


# parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="racgen", description="Reasoning-about-actions QA dataset generator.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="build train/test JSONL files and a stats report")
    g.add_argument("--domain", choices=DOMAIN_KINDS, default="blocks")
    g.add_argument("--level", type=_level("N"), default="N1", help="world size band, N1..N5")
    g.add_argument("--depth", type=_level("A"), default="A1", help="trajectory length band, A1..A5")
    g.add_argument("--verify", type=int, default=40000)
    g.add_argument("--counting", type=int, default=30000)
    g.add_argument("--others", type=int, default=None, help="default 30000 (0 for generic)")
    g.add_argument("--with-rules", action="store_true", help="append the domain's rule block to paragraphs")
    g.add_argument("--test-fraction", type=float, default=0.2)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--token-cap", type=_cap, default=512.0, help="whitespace tokens; 'none' disables")
    g.add_argument("--over-budget", choices=("flag", "drop"), default="flag")
    g.add_argument("--embed-states", action="store_true", help="store worlds and states in each example")
    g.add_argument("--templates", help="template pool JSON (default: $RACGEN_TEMPLATES or the bundled pool)")
    g.add_argument("--out", default=".", help="output directory")
    g.add_argument("--figures", action="store_true", help="also render the report figures")
    g.set_defaults(func=cmd_generate)

    v = sub.add_parser("validate", help="re-evaluate every example's abstract query")
    v.add_argument("paths", nargs="+")
    v.set_defaults(func=cmd_validate)

    t = sub.add_parser("translate", help="translate a blocks/logistics/dwr world into generic facts")
    t.add_argument("world", nargs="?", help="world JSON (as written by `racgen world`)")
    t.add_argument("--domain", choices=DOMAIN_KINDS)
    t.add_argument("--level", type=_level("N"))
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--out")
    t.set_defaults(func=cmd_translate)

    w = sub.add_parser("world", help="sample one world and print it as JSON")
    w.add_argument("--domain", choices=DOMAIN_KINDS, required=True)
    w.add_argument("--level", type=_level("N"), default="N1")
    w.add_argument("--seed", type=int, default=0)
    w.add_argument("--out")
    w.set_defaults(func=cmd_world)

    o = sub.add_parser("oracle-check", help="compare the engine with the brute-force oracle")
    o.add_argument("--trials", type=int, default=1000)
    o.add_argument("--fluents", type=int, default=8, help=f"max generic fluents (<= {MAX_ORACLE_FLUENTS})")
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--out")
    o.set_defaults(func=cmd_oracle_check)

    r = sub.add_parser("report", help="figures and a TSV summary for a stats JSON")
    r.add_argument("stats")
    r.add_argument("--train")
    r.add_argument("--test")
    r.add_argument("--no-figures", action="store_true")
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"racgen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RacError, OSError, ValueError) as exc:
        print(f"racgen: {_tag(exc)}", file=sys.stderr)
        return EXIT_GENERATION


if __name__ == "__main__":
    sys.exit(main())
