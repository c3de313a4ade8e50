import subprocess
import sys

import pytest

from fairmatch.cli import main
from fairmatch.distribution import MatchingDistribution, parse_distribution, serialize_distribution
from helpers import KITE_TEXT, KITE_TAIL_TEXT


@pytest.fixture
def files(tmp_path):
    (tmp_path / "kite.txt").write_text(KITE_TEXT)
    (tmp_path / "kite_tail.txt").write_text(KITE_TAIL_TEXT)
    return tmp_path


def run(capsys, *args):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_decompose_kite_tail(files, capsys):
    code, out, _ = run(capsys, "decompose", files / "kite_tail.txt")
    assert code == 0
    assert [ln.split()[1] for ln in out.splitlines() if ln.startswith("lambda")] == ["1/2", "2/3", "1/1"]


def test_probabilities_match_decomposition(files, capsys):
    code, out, _ = run(capsys, "probabilities", files / "kite_tail.txt")
    assert code == 0
    assert [ln.split("\t")[1] for ln in out.splitlines()] == ["1/1", "2/3", "2/3", "2/3", "1/2", "1/2"]


def test_probabilities_other_mechanisms(files, capsys):
    _, out, _ = run(capsys, "probabilities", files / "kite.txt", "--mechanism", "ps")
    assert [ln.split("\t")[1] for ln in out.splitlines()] == ["1/1", "3/5", "1/2", "3/5"]
    _, out, _ = run(capsys, "probabilities", files / "kite.txt", "--mechanism", "rp-exhaustive")
    assert [ln.split("\t")[1] for ln in out.splitlines()] == ["1/1", "2/3", "2/3", "2/3"]
    code, _, err = run(capsys, "probabilities", files / "kite.txt", "--mechanism", "rp-mc:100")
    assert code == 0 and err.startswith("seed ")
    assert run(capsys, "probabilities", files / "kite.txt", "--mechanism", "xx")[0] == 2


def test_distribution_then_verify(files, capsys):
    code, out, _ = run(capsys, "distribution", files / "kite_tail.txt", "-o", files / "dist.txt")
    assert code == 0 and out == ""
    assert run(capsys, "verify", files / "kite_tail.txt", files / "dist.txt")[:2] == (0, "ok\n")
    dist = parse_distribution((files / "dist.txt").read_text())
    weights = [w for w, _ in dist.entries]
    shifted = weights[1:] + weights[:1]
    assert shifted != weights
    (files / "bad.txt").write_text(serialize_distribution(
        MatchingDistribution(zip(shifted, dist.support))))
    code, _, err = run(capsys, "verify", files / "kite_tail.txt", files / "bad.txt")
    assert code == 1 and "coverage" in err


def test_verify_decomposition(files, capsys):
    run(capsys, "decompose", files / "kite_tail.txt", "-o", files / "dec.txt")
    assert run(capsys, "verify", files / "kite_tail.txt", files / "dec.txt", "--oracle")[0] == 0
    text = (files / "dec.txt").read_text().replace("lambda 2/3", "lambda 3/5")
    (files / "bad.txt").write_text(text)
    code, _, err = run(capsys, "verify", files / "kite_tail.txt", files / "bad.txt")
    assert code == 1 and "tightness" in err
    (files / "junk.txt").write_text("hello\n")
    assert run(capsys, "verify", files / "kite_tail.txt", files / "junk.txt")[0] == 2
    (files / "junk.txt").write_text("blocks x\n")
    assert run(capsys, "verify", files / "kite_tail.txt", files / "junk.txt")[0] == 2


def test_compare_kite(files, capsys):
    code, out, _ = run(capsys, "compare", files / "kite.txt")
    assert code == 0
    header, *rows = [ln.split("\t") for ln in out.splitlines()]
    table = {r[0]: dict(zip(header, r)) for r in rows}
    assert set(table) == {"mf", "ps", "rp-exhaustive"}
    assert table["mf"]["N1"] == "0.75" and table["ps"]["N1"] == "0.675"
    assert table["mf"]["varlog"] == "0.0308254"


def test_seeded_runs_are_identical(files, capsys):
    a = run(capsys, "compare", files / "kite_tail.txt", "--mechanisms", "mf,rp-mc:500", "--seed", "4")
    b = run(capsys, "compare", files / "kite_tail.txt", "--mechanisms", "mf,rp-mc:500", "--seed", "4")
    assert a == b and a[0] == 0
    c = run(capsys, "sample", files / "kite_tail.txt", "--seed", "9", "-n", "5")
    d = run(capsys, "sample", files / "kite_tail.txt", "--seed", "9", "-n", "5")
    assert c == d and c[1].count("matching") == 5


def test_sample_output(files, capsys):
    code, out, _ = run(capsys, "sample", files / "kite.txt", "--seed", "1")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "matching 1" and len(lines) == 4


def test_bad_input_exit_code(files, capsys):
    (files / "bad.txt").write_text("1 x\n")
    code, _, err = run(capsys, "decompose", files / "bad.txt")
    assert code == 2 and "line 1" in err
    assert run(capsys, "decompose", files / "missing.txt")[0] == 2
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "bench", "--synthetic", "1,2")[0] == 2


def test_bench_small(capsys):
    code, out, _ = run(capsys, "bench", "--synthetic", "200,100,800", "--seed", "1")
    assert code == 0
    keys = [ln.split("\t")[0] for ln in out.splitlines()]
    assert keys == ["generate", "decompose", "distribution", "total", "blocks", "support", "peak_rss_mb"]


def test_console_entry_point(files):
    res = subprocess.run([sys.executable, "-m", "fairmatch.cli", "decompose", str(files / "kite.txt")],
                         capture_output=True, text=True, check=True)
    assert res.stdout.startswith("blocks 2\n")
