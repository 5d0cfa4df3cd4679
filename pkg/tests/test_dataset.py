import json

import pytest

from racgen.dataset import (
    InsufficientWorlds,
    ParseError,
    QAExample,
    SchemaViolation,
    SplitSpec,
    build_dataset,
    read_dataset,
    validate_dataset,
    write_jsonl,
)
from racgen.questions import Query
from racgen.textfmt import parse_literal
from racgen.trajectory import replay_actions

from fixtures import dwr_university


def small(domain="blocks", **kw):
    base = dict(domain=domain, verify=20, counting=10, others=0 if domain == "generic" else 10, seed=3)
    base.update(kw)
    return SplitSpec(**base)


def test_spec_validation():
    with pytest.raises(ValueError):
        SplitSpec(verify=3)
    with pytest.raises(ValueError):
        SplitSpec(domain="generic")  # default others > 0
    with pytest.raises(ValueError):
        SplitSpec(level="A1")
    with pytest.raises(ValueError):
        SplitSpec(depth="N1")
    assert SplitSpec().train_counts() == {"verify": 40000, "counting": 30000, "others": 30000}


def test_test_counts_keep_verify_even():
    spec = SplitSpec(verify=18, counting=7, others=5, test_fraction=0.2)
    assert spec.test_counts()["verify"] % 2 == 0


@pytest.mark.parametrize("domain", ["blocks", "logistics", "dwr", "generic"])
def test_counts_met_exactly_and_disjoint(domain):
    spec = small(domain)
    r = build_dataset(spec)
    for side, want in (("train", spec.train_counts()), ("test", spec.test_counts())):
        assert r.stats["splits"][side]["counts"] == want
    assert not {e.meta["world_hash"] for e in r.train} & {e.meta["world_hash"] for e in r.test}
    assert r.stats["splits"]["train"]["label_balance"] == 0.5


def test_two_worlds_minimal_spec():
    spec = SplitSpec(verify=2, counting=1, others=1, test_fraction=0.5, max_worlds=2, seed=1)
    r = build_dataset(spec)
    assert len(r.train) == 4 and len(r.test) == 4
    assert not {e.meta["world_hash"] for e in r.train} & {e.meta["world_hash"] for e in r.test}


def test_insufficient_worlds():
    with pytest.raises(InsufficientWorlds):
        build_dataset(SplitSpec(verify=200, counting=0, others=0, max_worlds=3))


def test_output_sorted_by_world_then_sequence():
    r = build_dataset(small())
    keys = [(e.meta["world_hash"], e.meta["seq"]) for e in r.train]
    assert keys == sorted(keys)


def test_byte_identical_rebuild(tmp_path):
    for name in ("a", "b"):
        r = build_dataset(small("dwr"))
        write_jsonl(tmp_path / f"{name}.jsonl", r.train + r.test)
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_workers_do_not_change_output():
    a = build_dataset(small("logistics", workers=1, batch_size=8))
    b = build_dataset(small("logistics", workers=2, batch_size=8))
    assert [e.to_line() for e in a.train] == [e.to_line() for e in b.train]


def test_round_trip_and_validation(tmp_path):
    r = build_dataset(small("dwr"))
    p = tmp_path / "train.jsonl"
    write_jsonl(p, r.train)
    assert read_dataset(p) == r.train
    rep = validate_dataset(p)
    assert rep.ok and rep.checked == len(r.train)


def test_corrupted_answer_reported_at_its_line(tmp_path):
    r = build_dataset(small())
    lines = [e.to_line() for e in r.train]
    i = next(k for k, e in enumerate(r.train) if e.qtype == "verify")
    doc = json.loads(lines[i])
    doc["answer"] = "no" if doc["answer"] == "yes" else "yes"
    lines[i] = json.dumps(doc)
    p = tmp_path / "bad.jsonl"
    p.write_text("\n".join(lines) + "\n")
    rep = validate_dataset(p)
    assert [m[0] for m in rep.mismatches] == [i + 1]
    with pytest.raises(SchemaViolation) as err:
        read_dataset(p)
    assert err.value.line == i + 1


def test_truncated_line(tmp_path):
    r = build_dataset(small())
    p = tmp_path / "t.jsonl"
    text = "\n".join(e.to_line() for e in r.train[:3])
    p.write_text(text[:-20] + "\n")
    with pytest.raises(ParseError) as err:
        read_dataset(p)
    assert err.value.line == 3


def test_answer_vocabulary_enforced(tmp_path):
    p = tmp_path / "v.jsonl"
    p.write_text(json.dumps({"paragraph": "x", "question": "y", "answer": "maybe", "meta": {"qtype": "verify"}}) + "\n")
    with pytest.raises(SchemaViolation):
        read_dataset(p)


def test_external_hand_written_examples(tmp_path):
    """Hand-authored lines load; with an embedded world they re-evaluate, without a query they are external."""
    w = dwr_university()
    t = replay_actions(w, ["take(container1,patricia,pile_1)"])
    q = Query("holds", 1, literal=parse_literal("empty(patricia)"))
    evaluated = QAExample(
        "We have three locations in university ...",
        "Is Patricia empty?",
        "no",
        {"qtype": "verify", "domain": "dwr", "abstract_query": q.to_json(), "world": w.to_json(), "trajectory": t.to_json()},
    )
    external = QAExample("Bob moves to library.", "how many containers are in pile_1?", "1", {"qtype": "counting"})
    p = tmp_path / "hand.jsonl"
    write_jsonl(p, [evaluated, external])
    assert len(read_dataset(p)) == 2
    rep = validate_dataset(p)
    assert rep.checked == 1 and rep.external == [2] and rep.ok


def test_drop_mode_removes_over_budget():
    r = build_dataset(small(token_cap=60, over_budget="drop", verify=10, counting=5, others=5))
    assert all(not e.meta["over_budget"] for e in r.train + r.test)
    assert r.stats["splits"]["train"]["label_balance"] == 0.5


def test_flag_mode_counts_over_budget():
    r = build_dataset(small(token_cap=10))
    assert r.stats["splits"]["train"]["over_budget"] == len(r.train)


def test_embed_states():
    r = build_dataset(small(embed_states=True, verify=2, counting=1, others=1))
    e = r.train[0]
    assert "world" in e.meta and "states" in e.meta["trajectory"]


def test_stats_echo_config():
    spec = small()
    stats = build_dataset(spec).stats
    assert stats["config"]["split"]["seed"] == spec.seed
    assert stats["config"]["split"]["token_cap"] == 512
    assert stats["template_pool_sizes"]
    s = stats["splits"]["train"]
    assert set(s) >= {"answer_histogram", "mean_paragraph_tokens", "over_budget", "label_balance", "answer_vocabulary"}


@pytest.mark.parametrize("domain", ["blocks", "generic"])
def test_output_independent_of_hash_seed(domain, tmp_path):
    import os
    import subprocess
    import sys

    others = "0" if domain == "generic" else "6"
    outs = []
    for h in ("1", "2"):
        out = tmp_path / h
        subprocess.run(
            [sys.executable, "-m", "racgen.cli", "generate", "--domain", domain, "--level", "N2",
             "--verify", "10", "--counting", "6", "--others", others, "--seed", "5", "--out", str(out)],
            check=True, capture_output=True, env={**os.environ, "PYTHONHASHSEED": h},
        )
        outs.append((out / "train.jsonl").read_bytes())
    assert outs[0] == outs[1]
