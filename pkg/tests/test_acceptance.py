"""Acceptance criteria 1 to 9, each printing one PASS/FAIL line.

Tolerances are pinned here; the criterion 9 run is the slowest (about 1.5 min
on one core).
"""
import json
import random
import time

import pytest

from racgen.cli import main
from racgen.core import ConflictingEffects, State, atom, executable_actions, step
from racgen.dataset import SplitSpec, build_dataset, write_stats
from racgen.generic import to_generic
from racgen.oracle import agreement_suite, brute_count_trajectories, small_groundings
from racgen.questions import YES, Query, evaluate, gen_counting, gen_others, gen_verify
from racgen.render import render_actions, render_question, render_world
from racgen.synth import GenericParams, synth_generic, validate_generic
from racgen.textfmt import parse_literal
from racgen.trajectory import count_trajectories, replay_actions, sample_trajectory
from racgen.worlds import GENERIC_BANDS, blocks_world, make_world

from acceptance_log import record
from fixtures import dwr_university, generic_example, logistics_example, tower_configurations

WORKED_EXAMPLE_SECONDS = 1.0
ORACLE_TRIALS, ORACLE_FLUENTS, ORACLE_SECONDS = 1000, 8, 300.0
BIJECTION_WORLDS, BIJECTION_MAX_N = 50, 3
SYNTH_DOMAINS, SYNTH_STEPS = 10 ** 4, 10 ** 5
FACT_RANGE = (1200, 1800)
BIG_WORLD_SECONDS = 20.0
FULL_SCALE_SECONDS = 30 * 60.0


def _timed(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def test_criterion_1_worked_examples():
    def generic():
        t = replay_actions(generic_example(), ["6"])
        return (evaluate(Query("holds", 1, literal=parse_literal("1")), t),
                evaluate(Query("count", 1, condition="fluents_true"), t))

    def logistics():
        t = replay_actions(logistics_example(), ["drive_truck(tata,industry,market)"])
        return (evaluate(Query("count", 1, condition="trucks_at", args=("market",)), t),
                evaluate(Query("mask", 1, pattern=atom("at", "?", "seaport"), filler_type="package"), t))

    def university():
        t = replay_actions(dwr_university(), ["take(container1,patricia,pile_1)"])
        return (evaluate(Query("holds", 1, literal=parse_literal("empty(patricia)")), t),
                evaluate(Query("count", 0, condition="containers_in", args=("pile_1",)), t))

    cases = [(generic, (YES, "4")), (logistics, ("2", "none")), (university, ("no", "1"))]
    results = [_timed(fn) + (want,) for fn, want in cases]
    ok = all(got == want and dt < WORKED_EXAMPLE_SECONDS for got, dt, want in results)
    record(1, ok, "worked examples " + ", ".join(f"{got} in {dt:.3f}s" for got, dt, _ in results))
    assert ok


def test_criterion_2_oracle_equivalence():
    rep, dt = _timed(lambda: agreement_suite(ORACLE_TRIALS, ORACLE_FLUENTS, seed=0))
    ok = rep.trials == ORACLE_TRIALS and rep.rate == 1.0 and dt <= ORACLE_SECONDS
    record(2, ok, f"agreement {rep.agreements}/{rep.trials} by domain {rep.by_domain} in {dt:.1f}s")
    assert ok, rep.failures


def _small_worlds():
    """Worlds whose grounding fits the brute-force oracle."""
    rng = random.Random(0)
    small = small_groundings()
    worlds = [blocks_world(t) for t in tower_configurations(["b1", "b2", "b3"])]
    worlds += [small["logistics"], small["dwr"]]
    while len(worlds) < BIJECTION_WORLDS:
        d = synth_generic(GenericParams(rng.randint(2, 8), rng.randint(2, 5), seed=rng.getrandbits(32)))
        worlds.append((d, State(frozenset(f for f in d.sorted_fluents if rng.random() < 0.5))))
    return worlds[:BIJECTION_WORLDS]


def test_criterion_3_trajectory_bijection():
    checked = agree = 0
    for i, w in enumerate(_small_worlds()):
        d, s0 = w if isinstance(w, tuple) else (w.grounded, w.s0)
        n = 1 + i % BIJECTION_MAX_N
        while len(d.actions) ** n > 10 ** 5:
            n -= 1
        checked += 1
        agree += count_trajectories((d, s0), n) == brute_count_trajectories(d, s0, n)
    ok = checked == BIJECTION_WORLDS and agree == checked
    record(3, ok, f"trajectory counts agree on {agree}/{checked} worlds")
    assert ok


def test_criterion_4_synthesis_constraints():
    rng = random.Random(0)
    violations = conflicts = steps = 0
    domains = []
    for i in range(SYNTH_DOMAINS):
        lo, hi = GENERIC_BANDS[i % 5]
        p = GenericParams(rng.randint(lo, hi), rng.randint(lo, hi), seed=rng.getrandbits(64))
        d = synth_generic(p)
        violations += bool(validate_generic(d, p))
        domains.append(d)
    per_domain = SYNTH_STEPS // SYNTH_DOMAINS
    for d in domains:
        s = State(frozenset(f for f in d.sorted_fluents if rng.random() < 0.5))
        done = 0
        while done < per_domain:
            options = executable_actions(d, s)
            if not options:
                s = State(frozenset(f for f in d.sorted_fluents if rng.random() < 0.5))
                continue
            try:
                s = step(d, s, rng.choice(options))
            except ConflictingEffects:
                conflicts += 1
            done += 1
        steps += done
    ok = violations == 0 and conflicts == 0 and steps == SYNTH_STEPS
    record(4, ok, f"{violations} invalid of {SYNTH_DOMAINS} domains, {conflicts} conflicts in {steps} steps")
    assert ok


@pytest.mark.parametrize("domain", ["blocks", "logistics", "dwr", "generic"])
def test_criterion_5_dataset_contracts(domain, tmp_path, capsys):
    others = 0 if domain == "generic" else 300
    argv = ["generate", "--domain", domain, "--verify", "400", "--counting", str(600 - others),
            "--others", str(others), "--seed", "11"]
    codes = [main(argv + ["--out", str(tmp_path / run)]) for run in ("a", "b")]
    a, b = tmp_path / "a", tmp_path / "b"
    identical = all((a / f).read_bytes() == (b / f).read_bytes() for f in ("train.jsonl", "test.jsonl", "stats.json"))
    valid = main(["validate", str(a / "train.jsonl"), str(a / "test.jsonl")])
    capsys.readouterr()
    stats = json.loads((a / "stats.json").read_text())
    hashes = {
        side: {json.loads(line)["meta"]["world_hash"] for line in (a / f"{side}.jsonl").read_text().splitlines()}
        for side in ("train", "test")
    }
    balance = [stats["splits"][side]["label_balance"] for side in ("train", "test")]
    n_train = stats["splits"]["train"]["examples"]
    ok = (codes == [0, 0] and valid == 0 and identical and balance == [0.5, 0.5]
          and not hashes["train"] & hashes["test"] and n_train == 1000)
    record(5, ok, f"{domain}: {n_train} train, balance {balance}, overlap {len(hashes['train'] & hashes['test'])}, "
                  f"validate exit {valid}, rerun identical {identical}")
    assert ok


def _projection(s: State) -> frozenset:
    return frozenset(a for a in s.true_atoms if a.predicate in ("on", "ontable", "clear"))


def _strips_matches(blocks, init, target) -> bool:
    w = make_world("blocks_strips", {"block": blocks}, list(init) + [atom("handempty")])
    d = w.grounded
    for a1 in executable_actions(d, w.s0):
        s1 = step(d, w.s0, a1)
        for a2 in executable_actions(d, s1):
            s2 = step(d, s1, a2)
            if atom("handempty") in s2.true_atoms and _projection(s2) == target:
                return True
    return False


def test_criterion_6_cross_encoding():
    configs = moves = matched = 0
    for n in range(1, 5):
        blocks = [f"b{i}" for i in range(n)]
        for towers in tower_configurations(blocks):
            configs += 1
            w = blocks_world(towers)
            for a in executable_actions(w.grounded, w.s0):
                moves += 1
                target = _projection(step(w.grounded, w.s0, a))
                matched += _strips_matches(blocks, w.s0.true_atoms, target)
    ok = moves > 0 and matched == moves
    record(6, ok, f"{matched}/{moves} moves matched over {configs} configurations")
    assert ok


def test_criterion_7_translation_scale():
    w = blocks_world([["a", "b", "c"], ["d"], ["e", "f", "g"]])
    n = len(to_generic(w.grounded, w.s0, source="blocks"))
    ok = FACT_RANGE[0] <= n <= FACT_RANGE[1]
    record(7, ok, f"{n} facts for 7 blocks (3,1,3), range {FACT_RANGE}")
    assert ok


def test_criterion_8_big_world_throughput():
    def run():
        towers = [[f"blk{t}_{h}" for h in range(5)] for t in range(4)]
        traj = sample_trajectory(blocks_world(towers), 5, 0)
        rng = random.Random(0)
        qs = gen_verify(traj, 4, rng) + gen_counting(traj, 3, rng) + gen_others(traj, 3, rng)
        para = render_world(traj.world, False, rng)
        para.extend(render_actions(traj, rng))
        return traj, [render_question(q, traj, rng) for q in qs]

    (traj, qs), dt = _timed(run)
    ok = traj.length == 5 and len(qs) == 10 and dt <= BIG_WORLD_SECONDS
    record(8, ok, f"20-block world, length-5 trajectory, {len(qs)} questions in {dt:.2f}s")
    assert ok


def test_criterion_9_full_scale(tmp_path):
    spec = SplitSpec(domain="blocks", level="N1", depth="A1", workers=4)
    result, dt = _timed(lambda: build_dataset(spec))
    write_stats(tmp_path / "stats.json", result.stats)
    counts = result.stats["splits"]["train"]["counts"]
    ok = counts == spec.train_counts() and (tmp_path / "stats.json").stat().st_size > 0 and dt <= FULL_SCALE_SECONDS
    record(9, ok, f"{len(result.train)} train + {len(result.test)} test examples in {dt:.0f}s, stats written")
    assert ok
