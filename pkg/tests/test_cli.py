import json

import pytest

from hypcross.blocksum import BlockSum
from hypcross.cli import main
from hypcross.gridpath import sample, write_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cross_enum_json(capsys):
    code, out, _ = run(capsys, "cross", "enum", "--d", "2", "--gamma", "1,1", "--n", "2", "--format", "json")
    assert code == 0
    assert json.loads(out) == [[0, 0], [0, 1], [0, 2], [1, 0], [1, 1], [2, 0]]


def test_kernel_norm_and_eval(capsys):
    code, out, _ = run(capsys, "kernel", "norm", "--s", "3", "--p", "2")
    assert code == 0
    assert float(out.splitlines()[1].split(",")[0]) == pytest.approx(2.0, rel=1e-9)
    code, out, _ = run(capsys, "kernel", "norm", "--s", "3", "--p", "inf", "--format", "json")
    assert json.loads(out)["value"] == 6.0
    code, out, _ = run(capsys, "kernel", "eval", "--s", "3", "--x", "0,0.25")
    assert code == 0 and out.splitlines()[1] == "0,6"


def test_theorem2_single_block_csv(capsys):
    code, out, _ = run(capsys, "rates", "theorem2", "--r", "1.5", "--theta", "1", "--q", "2", "--nmin", "4", "--nmax", "12")
    assert code == 0
    ratios = [float(line.split(",")[3]) for line in out.splitlines()[1:]]
    assert len(ratios) == 9 and max(ratios) / min(ratios) <= 1.02


def test_exit_codes(capsys):
    code, _, err = run(capsys, "rates", "theorem1", "--r", "1,1", "--theta", "1", "--nmin", "4", "--nmax", "5")
    assert code == 2 and "r_1 > 1" in err
    code, _, _ = run(capsys, "cross", "enum", "--d", "2", "--bogus")
    assert code == 2
    code, _, _ = run(capsys, "verify", "lemma1", "--d", "2", "--smin", "1", "--smax", "4")
    assert code == 3
    code, _, _ = run(capsys, "verify", "lemma1", "--d", "2", "--smax", "6")
    assert code == 0
    code, _, _ = run(capsys, "verify", "lemma2", "--d", "2", "--smin", "2", "--smax", "6", "--p", "1")
    assert code == 0


def test_lacunary_commands(capsys):
    code, out, _ = run(capsys, "verify", "lemma-v", "--d", "2", "--nmin", "5", "--nmax", "12")
    assert code == 0 and out.startswith("n,ratio")
    code, _, _ = run(capsys, "verify", "lemma-g", "--d", "2", "--gamma", "1,2", "--alt-gamma", "1,1.5",
                     "--nmin", "5", "--nmax", "12")
    assert code == 0
    code, _, _ = run(capsys, "verify", "lemma-g", "--d", "2", "--gamma", "1,2", "--nmin", "5", "--nmax", "6")
    assert code == 2


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# theorem 2, single block\nr = 1.5\ntheta = 1   # summation index\nq = 2\nnmin = 4\nnmax = 9\n")
    code, out, _ = run(capsys, "rates", "theorem2", "--config", str(cfg), "--nmax", "6")
    assert code == 0
    assert [line.split(",")[0] for line in out.splitlines()[1:]] == ["4", "5", "6"]
    cfg.write_text("nope = 1\n")
    code, _, _ = run(capsys, "cross", "enum", "--config", str(cfg), "--d", "1", "--n", "1")
    assert code == 2


def test_output_file_is_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        assert main(["rates", "theorem2", "--r", "2,2", "--theta", "inf", "--q", "2", "--nmin", "4",
                     "--nmax", "7", "--output", str(p)]) == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_grid_decompose(tmp_path, capsys):
    g = sample(BlockSum.from_terms(1, {(3,): 1.0, (1,): 0.5}), 8.0, 256)
    write_grid(g, tmp_path / "g.json")
    code, out, _ = run(capsys, "grid", "decompose", "--input", str(tmp_path / "g.json"), "--n", "2",
                       "--format", "json", "--projected", str(tmp_path / "p.json"))
    assert code == 0
    doc = json.loads(out)
    assert doc["residual_l2"] > 0 and "periodization" in doc["note"]
    assert (tmp_path / "p.bin").exists()
    code, _, _ = run(capsys, "grid", "decompose", "--input", str(tmp_path / "missing.json"), "--n", "2")
    assert code == 2
