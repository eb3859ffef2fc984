import json

from picdescent.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_h1(capsys):
    code, out, _ = run(capsys, "h1", "--group", "gl2z3", "--module", "units3")
    assert code == 0 and "H^1 = Z/12" in out


def test_h1_failed_expectation(capsys):
    code, out, err = run(capsys, "h1", "--module", "units3", "--expect", "6")
    assert code == 1
    assert "[FAIL]" in out
    assert err.strip().splitlines()[-1].startswith("FAILED: ")
    assert json.loads(err.strip().splitlines()[-1][len("FAILED: "):]) == ["H^1 order"]


def test_group_cohomology(capsys):
    code, out, _ = run(capsys, "group-cohomology", "--group", "gl2z2", "--module", "z4_gl2z2",
                       "--s-max", "2")
    assert code == 0
    assert out.splitlines() == ["H^0 = Z/4", "H^1 = Z/2", "H^2 = Z/2"]
    code, out, _ = run(capsys, "group-cohomology", "--group", "gl2z2", "--method", "modp",
                       "--p", "3", "--s-max", "2")
    assert code == 0 and "dim H^2(G, F_3) = 0" in out


def test_lhs(capsys):
    code, out, _ = run(capsys, "lhs", "--module", "units2", "--s-max", "4")
    assert code == 0
    assert "H^1(G, M) = Z/6" in out and "(sgn)" in out


def test_cech(capsys):
    code, out, _ = run(capsys, "cech", "--weights", "1,1,1", "--window=-4:1")
    assert code == 0 and "[PASS]" in out


def test_pic(capsys):
    code, out, _ = run(capsys, "pic", "--case", "ko")
    assert code == 0
    assert "Z/8 certified" in out and "relative Picard group: order 4, Z/4" in out


def test_ss_run(capsys):
    code, out, _ = run(capsys, "ss-run", "--case", "ko", "--window", "6,-2,3")
    assert code == 0 and "d_3" in out


def test_chart(capsys, tmp_path):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run(capsys, "chart", "--case", "ko", "--page", "2", "--out", str(a))[0] == 0
    assert run(capsys, "chart", "--case", "ko", "--page", "2", "--out", str(b))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_usage_errors(capsys):
    assert run(capsys, "ss-run", "--case", "ko", "--window", "3,4,1")[0] == 2
    assert run(capsys, "pic", "--case", "nope")[0] == 2
    assert run(capsys, "chart", "--case", "ko", "--page", "40")[0] == 2
    assert run(capsys)[0] == 2


def test_verify_all_subset(capsys, tmp_path):
    out_file = tmp_path / "report.json"
    code, out, _ = run(capsys, "verify-all", "--only", "1,5", "--out", str(out_file))
    assert code == 0
    assert out.splitlines()[0].startswith("PASS criterion 1:")
    doc = json.loads(out_file.read_text())
    assert [d["criterion"] for d in doc] == [1, 5] and all(d["passed"] for d in doc)
