"""Train/test QA splits: generation, JSONL serialization and re-evaluation.

Every random choice derives from the master seed: world ``i`` is sampled
from ``derive(seed, "world", i)``, its trajectory from ``derive(seed,
"traj", i)`` and its questions and paraphrases from further children of the
same path.  An example stores the world and trajectory seeds, so it can be
re-evaluated without storing states.

Worlds are consumed in index order in fixed-size batches.  Each batch is
deduplicated against everything seen so far and split between train and
test by hash, so the two sides never share a world.  Per-world question
sets are truncated to the outstanding counts, and output is sorted by
world hash and then by the per-world sequence number.
"""
from __future__ import annotations

import json
import logging
import math
import multiprocessing
import re
from collections import Counter
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .core import RacError
from .questions import (
    DEFAULT_QCONFIG,
    NO,
    NONE,
    YES,
    AbstractQuestion,
    InsufficientFacts,
    MalformedQuery,
    Query,
    evaluate,
    gen_counting,
    gen_others,
    gen_verify,
)
from .render import DEFAULT_TOKEN_CAP, TemplatePool, default_pool, render_actions, render_question, render_world, token_budget_check
from .seeds import derive, rng_for
from .synth import ExhaustedRetries
from .trajectory import NoTrajectory, Trajectory, replay_actions, sample_trajectory
from .worlds import DEFAULT_CONFIG, DOMAIN_KINDS, ComplexityLevel, WorldInstance, partition_hashes, sample_world

log = logging.getLogger(__name__)

QTYPES = ("verify", "counting", "others")
OVER_BUDGET_MODES = ("flag", "drop")
_NAME = re.compile(r"[A-Za-z0-9][A-Za-z0-9_\-]*")


class InsufficientWorlds(RacError):
    pass


class DatasetError(RacError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(DatasetError):
    pass


class SchemaViolation(DatasetError):
    pass


@dataclass(frozen=True)
class SplitSpec:
    domain: str = "blocks"
    verify: int = 40000
    counting: int = 30000
    others: int = 30000
    level: str = "N1"
    depth: str = "A1"
    with_rules: bool = False
    test_fraction: float = 0.2
    seed: int = 0
    workers: int = 1
    token_cap: float | None = DEFAULT_TOKEN_CAP
    over_budget: str = "flag"
    per_world: tuple[int, int, int] = (4, 3, 3)
    batch_size: int = 64
    max_worlds: int | None = None
    embed_states: bool = False
    templates: str | None = None

    def __post_init__(self) -> None:
        if self.domain not in DOMAIN_KINDS:
            raise ValueError(f"unknown domain {self.domain!r}")
        if min(self.verify, self.counting, self.others) < 0:
            raise ValueError("question counts must be non-negative")
        if self.verify % 2:
            raise ValueError("verify count must be even for exact label balance")
        if self.domain == "generic" and self.others:
            raise ValueError("generic worlds have no relation to mask; set others to 0")
        if self.level_obj.kind != "novel_world":
            raise ValueError(f"level must be N1..N5, got {self.level}")
        if self.depth_obj.kind != "action_depth":
            raise ValueError(f"depth must be A1..A5, got {self.depth}")
        if not 0.0 <= self.test_fraction < 1.0:
            raise ValueError("test_fraction must lie in [0, 1)")
        if self.over_budget not in OVER_BUDGET_MODES:
            raise ValueError(f"over_budget must be one of {OVER_BUDGET_MODES}")
        if self.per_world[0] % 2 or min(self.per_world) < 0 or not any(self.per_world):
            raise ValueError("per_world quotas must be non-negative with an even verify share")
        if self.workers < 1 or self.batch_size < 1:
            raise ValueError("workers and batch_size must be >= 1")

    @property
    def level_obj(self) -> ComplexityLevel:
        return ComplexityLevel.parse(self.level)

    @property
    def depth_obj(self) -> ComplexityLevel:
        return ComplexityLevel.parse(self.depth)

    @property
    def n(self) -> int:
        return self.depth_obj.index

    def train_counts(self) -> dict[str, int]:
        return {"verify": self.verify, "counting": self.counting, "others": self.others}

    def test_counts(self) -> dict[str, int]:
        """Test counts keep the per-world density of the train side."""
        r = self.test_fraction / (1.0 - self.test_fraction)
        v = round(self.verify * r)
        return {"verify": v - v % 2, "counting": round(self.counting * r), "others": round(self.others * r)}

    def to_json(self) -> dict:
        doc = asdict(self)
        doc["per_world"] = list(self.per_world)
        if doc["token_cap"] is not None and math.isinf(doc["token_cap"]):
            doc["token_cap"] = None
        return doc


@dataclass
class QAExample:
    paragraph: str
    question: str
    answer: str
    meta: dict = field(default_factory=dict)

    @property
    def qtype(self) -> str:
        return self.meta.get("qtype", "")

    def to_json(self) -> dict:
        return {"paragraph": self.paragraph, "question": self.question, "answer": self.answer, "meta": self.meta}

    def to_line(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, ensure_ascii=False)


def answer_in_vocabulary(qtype: str, answer: str) -> bool:
    if qtype == "verify":
        return answer in (YES, NO)
    if qtype == "counting":
        return answer.isdigit()
    if qtype == "others":
        return answer == NONE or bool(_NAME.fullmatch(answer))
    return False


# Per-world generation ----------------------------------------------------------


@dataclass
class WorldResult:
    index: int
    world_hash: str | None
    examples: list[QAExample]
    skipped: str | None = None


def _pool(spec: SplitSpec) -> TemplatePool:
    return TemplatePool.load(spec.templates) if spec.templates else default_pool()


_pools: dict[str | None, TemplatePool] = {}


def _cached_pool(spec: SplitSpec) -> TemplatePool:
    if spec.templates not in _pools:
        _pools[spec.templates] = _pool(spec)
    return _pools[spec.templates]


def generate_world_examples(spec: SplitSpec, index: int) -> WorldResult:
    """All examples world ``index`` contributes, before truncation to the counts."""
    world_seed = derive(spec.seed, "world", index)
    traj_seed = derive(spec.seed, "traj", index)
    try:
        w = sample_world(spec.domain, spec.level_obj, world_seed)
        traj = sample_trajectory(w, spec.n, traj_seed)
    except NoTrajectory:
        return WorldResult(index, None, [], "no_trajectory")
    except ExhaustedRetries:
        return WorldResult(index, None, [], "synthesis_failed")
    qrng = rng_for(spec.seed, "questions", index)
    quota = dict(zip(QTYPES, spec.per_world))
    questions: list[AbstractQuestion] = []
    gens = {"verify": gen_verify, "counting": gen_counting, "others": gen_others}
    for kind in QTYPES:
        k = quota[kind] if getattr(spec, kind) else 0
        if not k:
            continue
        try:
            questions.extend(gens[kind](traj, k, qrng))
        except InsufficientFacts:
            log.debug("world %d: no %s questions", index, kind)
    if not questions:
        return WorldResult(index, w.canonical_hash, [], "no_questions")
    pool = _cached_pool(spec)
    rrng = rng_for(spec.seed, "render", index)
    para = render_world(w, spec.with_rules, rrng, pool)
    para.extend(render_actions(traj, rrng, pool))
    examples = []
    for seq, q in enumerate(questions):
        text, tids = render_question(q, traj, rrng, pool)
        budget = token_budget_check(para.text, text, spec.token_cap)
        meta = {
            "domain": spec.domain,
            "level": spec.level,
            "depth": spec.n,
            "qtype": q.kind,
            "with_rules": spec.with_rules,
            "world_hash": w.canonical_hash,
            "world_seed": world_seed,
            "traj_seed": traj_seed,
            "world_index": index,
            "seq": seq,
            "template_ids": tids,
            "abstract_query": q.query.to_json(),
            "tokens": budget.count,
            "over_budget": not budget.ok,
        }
        if spec.embed_states:
            meta["world"] = w.to_json()
            meta["trajectory"] = traj.to_json(embed_states=True)
        examples.append(QAExample(para.text, text, q.answer, meta))
    return WorldResult(index, w.canonical_hash, examples)


_worker_spec: SplitSpec | None = None


def _init_worker(spec: SplitSpec) -> None:
    global _worker_spec
    _worker_spec = spec


def _worker(index: int) -> WorldResult:
    assert _worker_spec is not None
    return generate_world_examples(_worker_spec, index)


# Split assembly ---------------------------------------------------------------


def _take(examples: Sequence[QAExample], need: dict[str, int], drop_over: bool) -> list[QAExample]:
    """Truncate one world's examples to what ``need`` still allows."""
    kept: list[QAExample] = []
    verify = [e for e in examples if e.qtype == "verify"]
    # verify questions come as alternating yes/no pairs; keep or drop whole pairs
    for i in range(0, len(verify) - 1, 2):
        pair = verify[i:i + 2]
        if need["verify"] < 2:
            break
        if drop_over and any(e.meta["over_budget"] for e in pair):
            continue
        kept.extend(pair)
        need["verify"] -= 2
    for e in examples:
        if e.qtype == "verify" or need[e.qtype] <= 0:
            continue
        if drop_over and e.meta["over_budget"]:
            continue
        kept.append(e)
        need[e.qtype] -= 1
    return kept


@dataclass
class BuildResult:
    train: list[QAExample]
    test: list[QAExample]
    stats: dict


def _results(spec: SplitSpec, start: int, stop: int, pool) -> Iterator[WorldResult]:
    if pool is None:
        for i in range(start, stop):
            yield generate_world_examples(spec, i)
    else:
        yield from pool.imap(_worker, range(start, stop), chunksize=max(1, (stop - start) // (4 * spec.workers)))


def build_dataset(spec: SplitSpec) -> BuildResult:
    need = {"train": spec.train_counts(), "test": spec.test_counts()}
    total = sum(need["train"].values()) + sum(need["test"].values())
    per_world = sum(spec.per_world)
    max_worlds = spec.max_worlds if spec.max_worlds is not None else 50 * (total // max(1, per_world) + 1) + 1000
    out: dict[str, list[QAExample]] = {"train": [], "test": []}
    worlds: dict[str, int] = {"train": 0, "test": 0}
    skipped: Counter[str] = Counter()
    seen: set[str] = set()
    pool = None
    if spec.workers > 1:
        pool = multiprocessing.get_context("fork").Pool(spec.workers, initializer=_init_worker, initargs=(spec,))
    try:
        index, batch_no = 0, 0
        while any(v > 0 for side in need.values() for v in side.values()):
            if index >= max_worlds:
                missing = {s: {k: v for k, v in c.items() if v > 0} for s, c in need.items()}
                raise InsufficientWorlds(
                    f"{spec.domain} {spec.level}: still missing {missing} after {index} worlds"
                )
            stop = min(index + spec.batch_size, max_worlds)
            batch: dict[str, WorldResult] = {}
            for r in _results(spec, index, stop, pool):
                if r.skipped:
                    skipped[r.skipped] += 1
                elif r.world_hash in seen or r.world_hash in batch:
                    skipped["duplicate"] += 1
                else:
                    batch[r.world_hash] = r
            seen.update(batch)
            train_h, test_h = partition_hashes(batch, spec.test_fraction, derive(spec.seed, "partition", batch_no))
            for side, hashes in (("train", train_h), ("test", test_h)):
                # consume in world-index order so truncation does not depend on the shuffle
                for r in sorted((batch[h] for h in hashes), key=lambda r: r.index):
                    if not any(v > 0 for v in need[side].values()):
                        skipped["side_full"] += 1
                        continue
                    kept = _take(r.examples, need[side], spec.over_budget == "drop")
                    if kept:
                        out[side].extend(kept)
                        worlds[side] += 1
            index, batch_no = stop, batch_no + 1
    finally:
        if pool is not None:
            pool.close()
            pool.join()
    for side in out:
        out[side].sort(key=lambda e: (e.meta["world_hash"], e.meta["seq"]))
    stats = dataset_stats(spec, out, worlds, skipped, index)
    return BuildResult(out["train"], out["test"], stats)


# Statistics -------------------------------------------------------------------


def split_stats(examples: Sequence[QAExample]) -> dict:
    counts = Counter(e.qtype for e in examples)
    verify = Counter(e.answer for e in examples if e.qtype == "verify")
    hist: dict[str, dict[str, int]] = {}
    for e in examples:
        hist.setdefault(e.qtype, Counter())[e.answer] += 1
    n_verify = verify[YES] + verify[NO]
    lengths = [len(e.paragraph.split()) for e in examples]
    return {
        "examples": len(examples),
        "worlds": len({e.meta.get("world_hash") for e in examples}),
        "counts": {k: counts.get(k, 0) for k in QTYPES},
        "label_balance": verify[YES] / n_verify if n_verify else None,
        "answer_histogram": {k: dict(sorted(v.items())) for k, v in sorted(hist.items())},
        "answer_vocabulary": sorted({e.answer for e in examples}),
        "mean_paragraph_tokens": sum(lengths) / len(lengths) if lengths else 0.0,
        "over_budget": sum(1 for e in examples if e.meta.get("over_budget")),
    }


def dataset_stats(spec: SplitSpec, splits: dict[str, list[QAExample]], worlds: dict[str, int],
                  skipped: Counter, worlds_sampled: int) -> dict:
    return {
        "config": {
            "split": spec.to_json(),
            "world": asdict(DEFAULT_CONFIG),
            "questions": asdict(DEFAULT_QCONFIG),
            "test_counts": spec.test_counts(),
        },
        "template_pool_sizes": _cached_pool(spec).sizes(),
        "worlds_sampled": worlds_sampled,
        "worlds_used": dict(worlds),
        "worlds_skipped": dict(sorted(skipped.items())),
        "splits": {side: split_stats(ex) for side, ex in splits.items()},
    }


# Serialization -----------------------------------------------------------------


def write_jsonl(path: str | Path, examples: Iterable[QAExample]) -> int:
    n = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for e in examples:
            fh.write(e.to_line() + "\n")
            n += 1
    return n


def write_stats(path: str | Path, stats: dict) -> None:
    Path(path).write_text(json.dumps(stats, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _check_example(doc: object, line: int) -> QAExample:
    if not isinstance(doc, dict):
        raise SchemaViolation(line, "expected a JSON object")
    for key in ("paragraph", "question", "answer"):
        if not isinstance(doc.get(key), str):
            raise SchemaViolation(line, f"missing or non-string field {key!r}")
    meta = doc.get("meta", {})
    if not isinstance(meta, dict):
        raise SchemaViolation(line, "meta must be an object")
    qtype = meta.get("qtype")
    if qtype not in QTYPES:
        raise SchemaViolation(line, f"unknown qtype {qtype!r}")
    if not answer_in_vocabulary(qtype, doc["answer"]):
        raise SchemaViolation(line, f"answer {doc['answer']!r} not in the {qtype} vocabulary")
    if "abstract_query" in meta:
        try:
            Query.from_json(meta["abstract_query"])
        except MalformedQuery as exc:
            raise SchemaViolation(line, str(exc)) from exc
    return QAExample(doc["paragraph"], doc["question"], doc["answer"], meta)


def iter_dataset(path: str | Path) -> Iterator[tuple[int, QAExample]]:
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(line_no, f"invalid JSON: {exc.msg}") from exc
            yield line_no, _check_example(doc, line_no)


def read_dataset(path: str | Path, reevaluate: bool = True) -> list[QAExample]:
    """Load a JSONL file, re-checking the schema and (optionally) every answer."""
    out = []
    cache = TrajectoryCache()
    for line_no, e in iter_dataset(path):
        if reevaluate and "abstract_query" in e.meta:
            got = reevaluate_example(e, cache)
            if got != e.answer:
                raise SchemaViolation(line_no, f"answer {e.answer!r} but query evaluates to {got!r}")
        out.append(e)
    return out


# Re-evaluation -----------------------------------------------------------------


class TrajectoryCache:
    """Regenerated trajectories keyed by their seeds (or embedded content)."""

    def __init__(self, size: int = 256):
        self._size = size
        self._data: dict[tuple, Trajectory] = {}

    def get(self, meta: dict) -> Trajectory:
        if "world" in meta and "trajectory" in meta:
            key = ("embedded", json.dumps(meta["world"], sort_keys=True), tuple(meta["trajectory"]["actions"]))
        else:
            key = (meta["domain"], meta["level"], meta["depth"], meta["world_seed"], meta["traj_seed"])
        if key not in self._data:
            if len(self._data) >= self._size:
                self._data.pop(next(iter(self._data)))
            self._data[key] = regenerate_trajectory(meta)
        return self._data[key]


def regenerate_trajectory(meta: dict) -> Trajectory:
    if "world" in meta and "trajectory" in meta:
        w = WorldInstance.from_json(meta["world"])
        traj = replay_actions(w, meta["trajectory"]["actions"])
        return traj
    w = sample_world(meta["domain"], meta["level"], int(meta["world_seed"]))
    if meta.get("world_hash") and w.canonical_hash != meta["world_hash"]:
        raise RacError(f"regenerated world hash {w.canonical_hash} differs from {meta['world_hash']}")
    return sample_trajectory(w, int(meta["depth"]), int(meta["traj_seed"]))


def reevaluate_example(e: QAExample, cache: TrajectoryCache | None = None) -> str:
    traj = (cache or TrajectoryCache()).get(e.meta)
    return evaluate(Query.from_json(e.meta["abstract_query"]), traj)


@dataclass
class ValidationReport:
    checked: int = 0
    external: list[int] = field(default_factory=list)
    mismatches: list[tuple[int, str, str]] = field(default_factory=list)
    errors: list[tuple[int, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.errors


def validate_dataset(path: str | Path) -> ValidationReport:
    """Re-evaluate every example carrying an abstract query; report, never raise."""
    report = ValidationReport()
    cache = TrajectoryCache()
    try:
        for line_no, e in iter_dataset(path):
            if "abstract_query" not in e.meta:
                report.external.append(line_no)
                continue
            try:
                got = reevaluate_example(e, cache)
            except (RacError, KeyError, ValueError) as exc:
                report.errors.append((line_no, str(exc)))
                continue
            report.checked += 1
            if got != e.answer:
                report.mismatches.append((line_no, e.answer, got))
    except DatasetError as exc:
        report.errors.append((exc.line, str(exc)))
    return report
