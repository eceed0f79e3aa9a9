import json
import random

import pytest

from melogrid.cli import main, run_tests
from melogrid.corpus import Corpus, save_melodies
from melogrid.melody import Melody
from melogrid.metrics import METRIC_NAMES

from synth import random_melody

REFERENCE = Melody("ref", 480, [
    (0, 480, 62), (480, 120, 64), (600, 240, 65), (840, 120, 67),
    (960, 480, 65), (1440, 240, 60), (1680, 720, 62)])


@pytest.fixture
def melodies(tmp_path):
    rng = random.Random(1)
    ms = [random_melody(rng, 2, pid=f"m{i:02d}") for i in range(20)]
    ms.append(Melody("waltz", 480, [(0, 480, 60)], "3/4"))
    path = tmp_path / "all.jsonl"
    save_melodies(Corpus(ms), path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def tsv(text):
    return [line.split("\t") for line in text.splitlines()]


class TestPrepare:
    def test_counts_and_files(self, tmp_path, melodies, capsys):
        code, out, _ = run(capsys, "prepare", melodies, tmp_path / "out", "--seed", 3)
        assert code == 0
        counts = dict((k, int(v)) for k, v in tsv(out)[1:])
        assert counts == {"records": 21, "invalid": 0, "valid": 21, "filtered": 1,
                          "kept": 20, "train": 18, "test": 2}
        assert json.loads((tmp_path / "out" / "config.json").read_text())["seed"] == 3
        assert len((tmp_path / "out" / "train.jsonl").read_text().splitlines()) == 18

    def test_deterministic(self, tmp_path, melodies, capsys):
        for d in ("a", "b"):
            run(capsys, "prepare", melodies, tmp_path / d)
        for name in ("train.jsonl", "test.jsonl"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_bad_record_sets_exit_status(self, tmp_path, capsys):
        p = tmp_path / "in.jsonl"
        p.write_text('{"id":"a","tpqn":480,"notes":[[0,480,60]]}\n{"id":\n')
        code, out, err = run(capsys, "prepare", p, tmp_path / "out")
        assert code == 1 and ":2:" in err
        assert ["kept", "1"] in tsv(out)


class TestEncodeDecode:
    def test_reference_melody(self, tmp_path, capsys):
        save_melodies([REFERENCE], tmp_path / "f.jsonl")
        code, out, _ = run(capsys, "encode", tmp_path / "f.jsonl", "--pr", 4, "--pc", "multiple")
        assert code == 0
        assert out.split()[:6] == ["POS0", "p62", "d4", "POS1", "p64", "d1"]
        assert len(out.split()) == 22

    def test_files_and_sidecar(self, tmp_path, capsys):
        save_melodies([REFERENCE], tmp_path / "f.jsonl")
        tok, ids = tmp_path / "f.tok", tmp_path / "f.ids"
        assert run(capsys, "encode", tmp_path / "f.jsonl", tok, "--ids", ids, "--pr", 0)[0] == 0
        assert tok.read_text() == "p62 d4 p64 d1 p65 d2 p67 d1 p65 d4 p60 d2 p62 d6\n"
        assert len(ids.read_text().split()) == 14
        meta = json.loads((tmp_path / "f.tok.config.json").read_text())
        assert meta["pr"] == 0 and meta["dr"] == 4
        code, out, _ = run(capsys, "decode", tok, "--pr", 0)
        rec = json.loads(out)
        assert rec["tpqn"] == 4
        assert rec["notes"] == [[0, 4, 62], [4, 1, 64], [5, 2, 65], [7, 1, 67],
                                [8, 4, 65], [12, 2, 60], [14, 6, 62]]

    def test_decode_reports_bad_lines(self, tmp_path, capsys):
        p = tmp_path / "bad.tok"
        p.write_text("p60 d4\nd4 p60 d4\nzzz\n")
        code, out, err = run(capsys, "decode", p, "--pr", 0)
        assert code == 1
        assert len(out.splitlines()) == 1
        assert "bad.tok:2:" in err and "bad.tok:3:" in err

    def test_max_len(self, tmp_path, capsys):
        save_melodies([REFERENCE], tmp_path / "f.jsonl")
        _, out, _ = run(capsys, "encode", tmp_path / "f.jsonl", "--pr", 0, "--max-len", 5)
        assert out == "p62 d4 p64 d1\n"

    def test_bad_config(self, tmp_path, capsys):
        save_melodies([REFERENCE], tmp_path / "f.jsonl")
        code, _, err = run(capsys, "encode", tmp_path / "f.jsonl", "--pr", 3)
        assert code == 1 and err


class TestMetrics:
    def test_single_bar_gc_empty(self, tmp_path, capsys, caplog):
        save_melodies([Melody("c", 480, [(i * 480, 480, p) for i, p in enumerate([60, 64, 67, 72])])],
                      tmp_path / "c.jsonl")
        code, out, err = run(capsys, "metrics", tmp_path / "c.jsonl")
        header, row = tsv(out)
        assert header == ["id", *METRIC_NAMES]
        values = dict(zip(header, row))
        assert values["gc"] == "" and float(values["sc"]) == 1.0 and float(values["mai"]) == 4.0
        assert "gc undefined for 1 of 1" in caplog.text

    def test_token_input_matches_melody_input(self, tmp_path, capsys):
        save_melodies([REFERENCE], tmp_path / "f.jsonl")
        run(capsys, "encode", tmp_path / "f.jsonl", tmp_path / "f.tok")
        _, a, _ = run(capsys, "metrics", tmp_path / "f.jsonl")
        _, b, _ = run(capsys, "metrics", tmp_path / "f.tok")
        assert tsv(a)[1][1:] == tsv(b)[1][1:]


class TestCompare:
    def test_nine_rows(self, tmp_path, melodies, capsys):
        code, out, _ = run(capsys, "compare", melodies, melodies)
        rows = tsv(out)
        assert rows[0] == ["metric", "oa", "w1", "n_model", "n_reference"]
        assert [r[0] for r in rows[1:]] == list(METRIC_NAMES)
        assert all(float(r[2]) == 0 for r in rows[1:])

    def test_metric_tables(self, tmp_path, melodies, capsys):
        run(capsys, "metrics", melodies, tmp_path / "m.tsv")
        _, direct, _ = run(capsys, "compare", melodies, melodies)
        _, tables, _ = run(capsys, "compare", tmp_path / "m.tsv", tmp_path / "m.tsv")
        assert direct == tables


def oa_table(path, values):
    lines = ["metric\toa\tw1\tn_model\tn_reference"]
    lines += [f"{m}\t{values.get(m, 0.5)!r}\t0.1\t10\t10" for m in METRIC_NAMES]
    path.write_text("\n".join(lines) + "\n")
    return path


class TestSignificance:
    def test_identical_groups_skip(self, tmp_path, capsys, caplog):
        paths = [oa_table(tmp_path / f"r{i}.tsv", {}) for i in range(6)]
        code, out, err = run(capsys, "test", "-a", *paths, "-b", *paths)
        assert code == 0 and len(tsv(out)) == 1
        assert "skipping mai" in caplog.text

    def test_planted_shift(self, tmp_path, capsys):
        rng = random.Random(4)
        a, b = [], []
        for i in range(10):
            base = {m: rng.uniform(0.6, 0.9) for m in METRIC_NAMES}
            noise = {m: v + rng.uniform(-0.01, 0.01) for m, v in base.items()}
            noise["mai"] = base["mai"] - 0.15
            a.append(oa_table(tmp_path / f"a{i}.tsv", base))
            b.append(oa_table(tmp_path / f"b{i}.tsv", noise))
        code, out, _ = run(capsys, "test", "-a", *a, "-b", *b, "--format", "table")
        lines = out.splitlines()
        assert lines[0].split() == ["metric", "statistic", "p", "adjusted_alpha", "rejected"]
        rows = {line.split()[0]: line.split() for line in lines[1:]}
        assert rows["mai"][-1] == "true" and rows["mai"][3] == "0.00556"
        assert sum(r[-1] == "true" for r in rows.values()) == 1

    def test_group_sizes_must_match(self, tmp_path, capsys):
        p = oa_table(tmp_path / "r.tsv", {})
        assert run(capsys, "test", "-a", p, p, "-b", p)[0] == 2

    def test_run_tests_ttest(self):
        rng = random.Random(5)
        a = [{m: rng.random() for m in METRIC_NAMES} for _ in range(8)]
        b = [{m: v + 0.2 + rng.uniform(-0.02, 0.02) for m, v in r.items()} for r in a]
        out = run_tests(a, b, method="ttest")
        assert len(out) == 9 and all(o.rejected for o in out)


def test_vocab_dump(capsys):
    code, out, _ = run(capsys, "vocab", "--pr", 4, "--pc", "multiple")
    lines = out.splitlines()
    assert lines[0] == "0\tPAD" and lines[1] == "1\tPOS0"
    assert lines[-1].endswith("\td16")
