import json
import subprocess
import sys

import pytest

from cmech.cli import main, read_data


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def shell(cmd, **kw):
    return subprocess.run(cmd, shell=True, capture_output=True, text=True, **kw)


def test_generate_golden_mean(tmp_path, capsys):
    path = tmp_path / "gm.txt"
    code, _, err = run(capsys, "generate", "--process", "golden-mean", "-n", "1000", "--seed", "7", "-o", str(path))
    text = path.read_text().strip()
    assert code == 0 and len(text) == 1000 and "11" not in text
    assert "length: 1000" in err and "seed: 7" in err


def test_generate_period2(capsys):
    code, out, _ = run(capsys, "generate", "--process", "period2", "-n", "4", "--seed", "1")
    assert code == 0 and out.strip() in ("0101", "1010")


def test_generate_tokens_format(capsys):
    code, out, _ = run(capsys, "generate", "--process", "fair-coin", "-n", "5", "--format", "tokens")
    assert code == 0 and len(out.split()) == 5


def test_generate_zero_length_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["generate", "--process", "fair-coin", "-n", "0"])
    assert info.value.code == 2


def test_unknown_process_is_data_error(capsys):
    code, _, err = run(capsys, "derive", "--process", "no-such", "-K", "1", "-L", "1")
    assert code == 4 and "InvalidSpec" in err


def test_analyze_examples(capsys):
    code, out, _ = run(capsys, "analyze", "--process", "fair-coin", "--L-max", "4")
    rows = [line.split() for line in out.splitlines()[1:]]
    assert code == 0
    assert [r[1] for r in rows] == ["1.000000", "2.000000", "3.000000", "4.000000"]
    assert {r[3] for r in rows} == {"0.000000"}

    _, out, _ = run(capsys, "analyze", "--process", "golden-mean", "--L-max", "1")
    assert out.splitlines()[1].split()[1:4:2] == ["0.918296", "0.251629"]

    _, out, _ = run(capsys, "analyze", "--process", "period2", "--L-max", "3")
    rows = [line.split() for line in out.splitlines()[1:]]
    assert [r[1] for r in rows] == ["1.000000"] * 3 and rows[0][3] == "1.000000"


def test_analyze_data_file(tmp_path, capsys):
    path = tmp_path / "d.txt"
    path.write_text("01" * 500)
    code, out, _ = run(capsys, "analyze", "--data", str(path), "--L-max", "2")
    assert code == 0 and out.splitlines()[1].split()[1] == "1.000000"


def test_analyze_guard_exit_code(capsys, monkeypatch):
    monkeypatch.setenv("EM_BLOCK_GUARD", "8")
    code, _, err = run(capsys, "analyze", "--process", "fair-coin", "--L-max", "4")
    assert code == 3 and "BlockTooLarge" in err


def test_derive_golden_mean(tmp_path, capsys):
    path = tmp_path / "m.json"
    code, out, _ = run(capsys, "derive", "--process", "golden-mean", "-K", "3", "-L", "3", "-o", str(path))
    assert code == 0
    assert "states: 2" in out and "C_mu: 0.918296" in out
    doc = json.loads(path.read_text())
    assert doc["states"] == ["A", "B"]


def test_derive_json_to_stdout(capsys):
    code, out, err = run(capsys, "derive", "--process", "period2", "-K", "1", "-L", "1", "-o", "-")
    assert code == 0 and json.loads(out)["horizon"] == {"K": 1, "L": 1}
    assert "states: 2" in err


def test_derive_nondeterministic_exit_code(capsys):
    code, _, err = run(capsys, "derive", "--process", "even-process", "-K", "1", "-L", "2")
    assert code == 5 and "increase K" in err


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--process", "period2", "-K", "1", "-L", "2")
    assert code == 0 and out.rstrip().endswith("all checks hold")


def test_verify_guard(capsys):
    code, _, _ = run(capsys, "verify", "--process", "fair-coin", "-K", "4", "-L", "1")
    assert code == 3


def test_export_period2(tmp_path, capsys):
    machine = tmp_path / "m.txt"
    dot = tmp_path / "out.dot"
    run(capsys, "derive", "--process", "period2", "-K", "1", "-L", "1", "-o", str(machine))
    code, _, _ = run(capsys, "export", "--machine", str(machine), "--dot", str(dot))
    text = dot.read_text()
    assert code == 0
    assert text.count("pi=") == 2 and text.count("->") == 2


def test_read_data_formats(tmp_path):
    p = tmp_path / "x"
    p.write_text("a b b a\n")
    alpha, w = read_data(str(p))
    assert alpha.symbols == ("a", "b") and w == (0, 1, 1, 0)
    p.write_text("up down up\n")
    alpha, w = read_data(str(p))
    assert alpha.symbols == ("down", "up") and w == (1, 0, 1)
    p.write_text("0110\n")
    assert read_data(str(p), "chars")[1] == (0, 1, 1, 0)
    p.write_text("  \n")
    with pytest.raises(Exception):
        read_data(str(p))


def test_reconstruct_too_short(tmp_path, capsys):
    p = tmp_path / "x"
    p.write_text("0101")
    code, _, err = run(capsys, "reconstruct", "--data", str(p), "-K", "3", "-L", "3")
    assert code == 4 and "SequenceTooShort" in err


def test_bad_alpha_is_usage_error():
    with pytest.raises(SystemExit) as info:
        main(["reconstruct", "--data", "-", "-K", "1", "-L", "1", "--alpha", "1.5"])
    assert info.value.code == 2


def test_pipe_composition():
    cmd = (
        f"{sys.executable} -m cmech generate --process golden-mean -n 100000 --seed 3 | "
        f"{sys.executable} -m cmech reconstruct --data - -K 3 -L 3"
    )
    res = shell(cmd)
    assert res.returncode == 0, res.stderr
    assert "states: 2" in res.stdout
    cmu = float(next(line for line in res.stdout.splitlines() if line.startswith("C_mu")).split()[1])
    assert abs(cmu - 0.918296) < 0.05


def test_outputs_are_byte_identical(tmp_path):
    cmds = [
        "generate --process even-process -n 5000 --seed 9",
        "derive --process golden-mean -K 3 -L 3 -o -",
        "verify --process golden-mean -K 2 -L 2",
    ]
    for c in cmds:
        a = shell(f"{sys.executable} -m cmech {c}")
        b = shell(f"{sys.executable} -m cmech {c}")
        assert a.returncode == 0 and a.stdout == b.stdout
