import csv

from racgen.dataset import SplitSpec, build_dataset, write_jsonl, write_stats
from racgen.report import summary_rows, write_report


def test_report_files(tmp_path):
    r = build_dataset(SplitSpec(domain="logistics", verify=10, counting=6, others=6, seed=2))
    stats = tmp_path / "stats.json"
    write_stats(stats, r.stats)
    write_jsonl(tmp_path / "train.jsonl", r.train)
    written = write_report(stats, {"train": tmp_path / "train.jsonl"})
    names = {p.name for p in written}
    assert "stats_summary.tsv" in names
    assert "stats_train_counting_answers.png" in names
    assert "stats_paragraph_tokens.png" in names
    for p in written:
        assert p.stat().st_size > 0
        if p.suffix == ".png":
            assert p.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    rows = list(csv.DictReader(open(tmp_path / "stats_summary.tsv"), delimiter="\t"))
    verify = [row for row in rows if row["split"] == "train" and row["qtype"] == "verify"][0]
    assert verify["examples"] == "10" and verify["label_balance"] == "0.5000"


def test_tsv_only(tmp_path):
    r = build_dataset(SplitSpec(domain="blocks", verify=2, counting=1, others=1, seed=2))
    stats = tmp_path / "s.json"
    write_stats(stats, r.stats)
    written = write_report(stats, figures=False)
    assert [p.name for p in written] == ["s_summary.tsv"]
    assert len(summary_rows(r.stats)) == 6
