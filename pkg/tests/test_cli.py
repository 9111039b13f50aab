import csv
import io
import json

import pytest

from factorsim.cli import main


@pytest.fixture(autouse=True)
def cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv("FACTORSIM_CACHE_DIR", str(tmp_path / "cache"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_ensemble_j1(capsys):
    code, out, err = run(capsys, "ensemble", "--j", "1")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert [r[:2] for r in rows[1:]] == [["2", "2"], ["2", "3"]]
    assert "j=1 size=2" in err


def test_ensemble_json_and_file(capsys, tmp_path):
    code, out, _ = run(capsys, "ensemble", "--j", "2", "--format", "json")
    doc = json.loads(out)
    assert code == 0 and doc["size"] == len(doc["rows"])
    target = tmp_path / "e.csv"
    code, out, _ = run(capsys, "ensemble", "--j", "2", "-o", str(target))
    assert code == 0 and out == "" and target.read_text().startswith("x,")


@pytest.mark.parametrize("num,expect", [(1129 * 3, None), (1, None)])
def test_invert_no_solution(capsys, num, expect):
    code, out, err = run(capsys, "invert", "--N", "4012009", "--numerator", str(num))
    assert code == 1 and out == "" and "no solution" in err


@pytest.mark.parametrize(
    "N,num,pair",
    [(4021993, 171 * 548, "1019 3947"), (4012009, 304 * 304, "2003 2003")],
)
def test_invert(capsys, N, num, pair):
    code, out, _ = run(capsys, "invert", "--N", str(N), "--numerator", str(num))
    assert (code, out.strip()) == (0, pair)


def test_invert_bad_numerator(capsys):
    code, _, err = run(capsys, "invert", "--j", "304", "--numerator", "0")
    assert code == 2 and err.startswith("error:")


def test_predict_header(capsys):
    code, out, _ = run(capsys, "predict", "--j", "62")
    lines = out.splitlines()
    assert code == 0
    assert lines[0].startswith("# N=85849 j=62 alpha1=") and "zeros=30" in lines[0]
    assert lines[1] == "x,pi_exact,pi_sim,R,Li"
    assert int(lines[-1].split(",")[0]) <= 29.3


def test_predict_anchors(capsys):
    code, out, _ = run(capsys, "predict", "--N", "4012009", "--p1", "2", "--p2", "5", "--x-max", "50")
    assert code == 0 and "p1=2 p2=5" in out.splitlines()[0]


def test_predict_deterministic(capsys):
    first = run(capsys, "predict", "--j", "62")
    second = run(capsys, "predict", "--j", "62")
    assert first == second


def test_predict_domain_error(capsys):
    code, _, err = run(capsys, "predict", "--j", "62", "--x-max", "1000")
    assert code == 2 and "sqrt(N)" in err


def test_fit_json(capsys):
    code, out, _ = run(capsys, "fit", "--j", "304", "--format", "json")
    doc = json.loads(out)
    assert code == 0
    assert doc["alpha1"] == pytest.approx(2.2904, abs=1e-3)
    assert doc["alpha2"] == pytest.approx(1.2418, abs=1e-3)


def test_budget_guard(capsys):
    code, _, err = run(capsys, "ensemble", "--j", "304", "--budget", "100")
    assert code == 2 and "budget" in err


def test_small_n(capsys):
    code, _, _ = run(capsys, "stats", "--N", "3")
    assert code == 2


def test_j_n_exclusive(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["stats", "--j", "3", "--N", "100"])
    assert exc.value.code == 2


def test_stats_and_spectrum(capsys):
    code, out, _ = run(capsys, "stats", "--j", "62")
    assert code == 0 and out.startswith("# j=62 size=")
    code, out, _ = run(capsys, "spectrum", "--j", "62")
    assert code == 0 and out.splitlines()[0] == "x,y,numerator,denominator,E,u,E_regular,kappa"


def test_scan_and_qc(capsys):
    code, out, err = run(capsys, "scan", "--j", "62", "--grid", "200")
    assert code in (0, 1) and out.startswith("E_root,") and "roots=" in err
    code, out, _ = run(capsys, "qc", "--j", "62", "--E", "0.5", "--format", "json")
    assert code == 0 and "re_ratio" in json.loads(out)
