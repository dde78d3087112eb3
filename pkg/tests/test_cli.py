import io
import subprocess
import sys

import pytest

from tqf.cli import main
from tqf.gaps import alpha_of, read_csv

from oracles import modular_ternary_isotropic


def run(capsys, *argv):
    code = main(["-q", *map(str, argv)])
    out, err = capsys.readouterr()
    return code, out, err


def result_fields(out):
    line = [x for x in out.splitlines() if x.startswith("RESULT ")][-1]
    return dict(kv.split("=", 1) for kv in line.split()[1:])


def test_companion(capsys):
    code, out, _ = run(capsys, "companion", 7)
    assert code == 0 and "⟨1,2,7⟩ anisotropic exactly at {7}" in out
    code, out, _ = run(capsys, "companion", 2)
    assert code == 0 and "⟨1,1,2⟩" in out
    code, out, _ = run(capsys, "companion", 17)
    assert "q=3" in out and "⟨1,3,17⟩" in out


def test_companion_composite(capsys):
    code, _, err = run(capsys, "companion", 15)
    assert code == 2 and "not prime" in err


def test_gaps_universal_form(capsys):
    code, out, _ = run(capsys, "gaps", 1, 1, 3, "--bound", 10**6)
    assert code == 0 and "0 gaps, alpha=0" in out
    assert result_fields(out)["gaps"] == "0"


def test_gaps_three_squares(capsys, tmp_path):
    csv_path = tmp_path / "g.csv"
    code, out, _ = run(capsys, "gaps", 1, 1, 1, "--bound", 100, "--csv", csv_path)
    assert code == 0 and "12 gaps" in out
    rows = read_csv(io.StringIO(csv_path.read_text()))
    assert [int(r["n"]) for r in rows] == list(range(7, 100, 8))
    fields = result_fields(out)
    assert int(fields["gaps"]) == len(rows)
    assert float(fields["alpha"]) == pytest.approx(alpha_of(len(rows), 2), rel=1e-5)


def test_gaps_form_with_one_two_five(capsys):
    # the place set is pinned by the modular oracle: anisotropic at 2 only
    assert [p for p in (2, 3, 5) if not modular_ternary_isotropic(1, 1, 5, p)] == [2]
    code, out, _ = run(capsys, "gaps", 1, 1, 5, "--bound", 100)
    assert code == 0 and result_fields(out)["p"] == "2"


def test_gaps_not_single_place(capsys):
    code, _, err = run(capsys, "gaps", 1, 1, 21, "--bound", 100)
    assert code == 3 and "[2, 3, 7]" in err


def test_gaps_unwritable_csv(capsys, tmp_path):
    code, _, err = run(capsys, "gaps", 1, 1, 1, "--bound", 100, "--csv", tmp_path / "missing" / "g.csv")
    assert code == 2 and "not writable" in err


@pytest.mark.parametrize(
    "argv, code",
    [
        (("verify", 1, 2, 101, "--k", 101, "--l", 98, "--bound", 10**7), 0),
        (("verify", 1, 1, 2, "--k", 2, "--l", 1, "--bound", 10**6), 0),
        (("verify", 1, 1, 1, "--k", 8, "--l", 7, "--bound", 1000), 1),
    ],
)
def test_verify_exit_codes(capsys, argv, code):
    got, out, _ = run(capsys, *argv)
    assert got == code


def test_verify_lists_gaps(capsys):
    _, out, _ = run(capsys, "verify", 1, 1, 1, "--k", 8, "--l", 7, "--bound", 1000)
    lines = out.splitlines()
    assert lines[0].startswith("125 elements")
    assert [int(x) for x in lines[1:101]] == list(range(7, 800, 8))
    assert result_fields(out)["gaps"] == "125"


def test_search(capsys, tmp_path):
    code, out, _ = run(capsys, "search", "--pmin", 2, "--pmax", 5, "--bound", 10**5, "--workers", 1)
    assert code == 0
    assert "candidate p=5 l=1 form=⟨1,5,10⟩" in out
    assert result_fields(out) == {"pairs": "7", "survivors": "14", "bound": "100000"}


def test_search_no_survivors(capsys):
    code, out, _ = run(capsys, "search", "--pmin", 11, "--pmax", 13, "--bound", 10**5, "--workers", 1)
    assert code == 0 and "0 survivors" in out


def test_search_workers_do_not_change_checkpoint(capsys, tmp_path):
    paths = []
    for workers in (1, 3):
        path = tmp_path / f"w{workers}.jsonl"
        code, out, _ = run(capsys, "search", "--pmin", 2, "--pmax", 11, "--bound", 10**4, "--workers", workers, "--checkpoint", path)
        assert code == 0
        paths.append((path.read_bytes(), out))
    assert paths[0] == paths[1]


def test_search_bad_range(capsys):
    code, _, _ = run(capsys, "search", "--pmin", 11, "--pmax", 5)
    assert code == 2


def test_scan(capsys, tmp_path):
    csv_path = tmp_path / "s.csv"
    code, out, _ = run(capsys, "scan", "--family", "1,2,p", "--pmin", 97, "--pmax", 97, "--workers", 1)
    assert code == 0 and "0 admissible primes" in out
    code, out, _ = run(capsys, "scan", "--family", "1,2,p", "--pmin", 90, "--pmax", 110,
                       "--multiplier", 120000, "--csv", csv_path, "--workers", 1)
    assert "candidate p=101 l=98" in out
    rows = read_csv(io.StringIO(csv_path.read_text()))
    fields = result_fields(out)
    assert int(fields["rows"]) == len(rows)
    assert int(fields["m_le_1"]) == sum(int(r["m"]) <= 1 for r in rows)
    assert {r["family"] for r in rows} == {"1,2,p"}


def test_scan_bad_family(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["scan", "--family", "1,4,p", "--pmin", "5", "--pmax", "7"])
    assert exc.value.code == 2


def test_alpha(capsys, tmp_path):
    csv_path = tmp_path / "a.csv"
    code, out, _ = run(capsys, "alpha", "--pmin", 31, "--pmax", 37, "--disc-mult", 10,
                       "--gap-mult", 2000, "--csv", csv_path, "--workers", 1)
    assert code == 0
    rows = read_csv(io.StringIO(csv_path.read_text()))
    fields = result_fields(out)
    assert int(fields["forms"]) == len(rows) > 0
    assert int(fields["total_gaps"]) == sum(int(r["gap_count"]) for r in rows)
    assert fields["log"] == "natural"


def test_alpha_empty_range(capsys, tmp_path):
    csv_path = tmp_path / "a.csv"
    code, out, _ = run(capsys, "alpha", "--pmin", 32, "--pmax", 36, "--csv", csv_path, "--workers", 1)
    assert code == 0
    assert csv_path.read_text() == "a,b,c,p,bound,gap_count,alpha,spinor_safe\n"


def test_unknown_flag_is_an_error():
    with pytest.raises(SystemExit) as exc:
        main(["verify", "1", "1", "1", "--k", "3", "--l", "1", "--bound", "10", "--frobnicate"])
    assert exc.value.code == 2


def test_memory_budget_flag(capsys, monkeypatch):
    monkeypatch.setenv("TQF_MEMORY_BUDGET", str(1 << 30))  # restored after the test
    code, _, err = run(capsys, "--memory-budget", 1000, "gaps", 1, 1, 1, "--bound", 10**6)
    assert code == 2 and "budget" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "tqf", "companion", "11"], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0 and "⟨1,1,11⟩" in proc.stdout
