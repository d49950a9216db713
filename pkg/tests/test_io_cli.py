import io
import json
import time

import numpy as np
import pytest

from rankwn.cli import main, run
from rankwn.errors import EmptyInput, ParseError, TiesWarning
from rankwn.harness import McCell, McTable
from rankwn.io import ResultDocument, format_csv, jitter, load_csv, parse_csv, write_csv
from rankwn.maxtest import TestOutcome
from rankwn.ranks import SeriesPanel


def cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code, doc = run(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue(), doc


def write_panel(path, data, names=None):
    write_csv(SeriesPanel(data, names), path)
    return str(path)


def test_parse_small_panel():
    panel = parse_csv("1,2\n3,4\n5,6")
    assert (panel.n, panel.p) == (3, 2) and panel.names is None


def test_parse_header_and_blank_lines():
    panel = parse_csv("a,b\n\n1,2\n3,4\n", has_header=True)
    assert panel.names == ("a", "b") and panel.n == 2


def test_parse_errors():
    with pytest.raises(ParseError) as exc:
        parse_csv("1,2\n3,abc\n")
    assert (exc.value.line, exc.value.column) == (2, 2)
    with pytest.raises(ParseError) as exc:
        parse_csv("1,2\n3\n")
    assert exc.value.line == 2 and exc.value.column is None
    with pytest.raises(ParseError):
        parse_csv("1,nan\n")
    with pytest.raises(EmptyInput):
        parse_csv("\n\n")
    with pytest.raises(EmptyInput):
        parse_csv("x,y\n", has_header=True)


def test_ties_warning_and_jitter():
    with pytest.warns(TiesWarning):
        panel = parse_csv("1,2\n1,3\n2,4\n")
    smoothed = jitter(panel, seed=0)
    assert not smoothed.has_ties()
    assert np.max(np.abs(smoothed.data - panel.data)) < 1e-8


def test_csv_round_trip(tmp_path, rng):
    data = rng.standard_normal((15, 4)) * 10.0 ** rng.integers(-8, 8, size=(15, 4))
    panel = SeriesPanel(data, ["w", "x", "y", "z"])
    path = tmp_path / "p.csv"
    write_csv(panel, path)
    back = load_csv(path, has_header=True)
    assert np.array_equal(back.data, panel.data) and back.names == panel.names
    assert format_csv(back) == format_csv(panel)


def test_result_document_round_trip():
    outcome = TestOutcome(1.5, 4.8, 0.3, False, (1, 2, 1), "d", 0.05, argmax_names=("a", "b", 1), extra={"N": 4})
    doc = ResultDocument("test", {"method": "d", "seed": 3}, outcome, ["w"], 0.25)
    back = ResultDocument.from_json(doc.to_json())
    assert back == doc
    table = McTable([McCell("i", "rho", 100, 30, 2, None, None, 5, 100)], {"base_seed": 1})
    tdoc = ResultDocument("table", {"mode": "size"}, table, [], 1.0)
    assert ResultDocument.from_json(tdoc.to_json()).to_dict() == tdoc.to_dict()
    assert json.loads(doc.to_json())["schema_version"] == "1"


def test_cli_exit_codes_stable_across_formats(tmp_path, rng):
    iid = write_panel(tmp_path / "iid.csv", rng.standard_normal((100, 5)))
    data = rng.standard_normal((100, 5))
    data[1:, 3] = data[:-1, 1]
    planted = write_panel(tmp_path / "planted.csv", data, ["a", "b", "c", "d", "e"])
    for path, header, expected in ((iid, [], 0), (planted, ["--header"], 1)):
        codes = {cli("test", "--input", path, *header, "--method", "rho", "--K", "1", fmt)[0] for fmt in ("--json", "--csv")}
        assert codes == {expected}


def test_cli_planted_pair_named(tmp_path, rng):
    data = rng.standard_normal((200, 10))
    data[1:, 6] = data[:-1, 2]
    names = [f"s{i}" for i in range(1, 11)]
    path = write_panel(tmp_path / "planted.csv", data, names)
    code, out, _, doc = cli("test", "--input", path, "--header", "--method", "rho", "--K", "2", "--seed", "1")
    assert code == 1
    result = json.loads(out)["outcome"]
    assert result["reject"] is True and result["argmax_names"] == ["s3", "s7", 1]


def test_cli_usage_errors(tmp_path, rng):
    path = write_panel(tmp_path / "x.csv", rng.standard_normal((40, 3)))
    bad = [
        ("test", "--input", path, "--method", "rho", "--K", "1", "--alpha", "1.5"),
        ("test", "--input", path, "--method", "pearson", "--K", "1"),
        ("test", "--input", path, "--method", "rho", "--K", "1", "--L", "2"),
        ("test", "--input", str(tmp_path / "missing.csv"), "--method", "rho", "--K", "1"),
        ("test", "--input", path, "--method", "rho"),
        ("simulate", "--mode", "size", "--models", "i", "--methods", "rho", "--reps", "10"),
        ("simulate", "--mode", "power", "--models", "I", "--methods", "rho", "--rho", "0.1:x:3"),
        ("simulate", "--mode", "size", "--models", "I", "--methods", "rho", "--n", "40", "--p", "3", "--reps", "100"),
    ]
    for argv in bad:
        code, out, err, doc = cli(*argv)
        assert code == 2 and doc is None and "error" in err, argv


def test_cli_lstat_and_seed_echo(tmp_path, rng):
    path = write_panel(tmp_path / "x.csv", rng.standard_normal((40, 3)))
    args = ("test", "--input", path, "--method", "lstat", "--K", "1", "--L", "2", "--perms", "100")
    code, out, _, doc = cli(*args, "--seed", "5", "--statistic", "d")
    again = cli(*args, "--seed", "5", "--statistic", "d")[3]
    assert doc.outcome == again.outcome and doc.outcome.calibration == "permutation"
    assert doc.command["seed"] == 5
    fresh = cli(*args)[3]
    assert isinstance(fresh.command["seed"], int)


def test_cli_ties_reported(tmp_path):
    path = tmp_path / "t.csv"
    data = np.random.default_rng(1).standard_normal((30, 2))
    data[3, 0] = data[7, 0]
    write_panel(path, data)
    code, out, err, doc = cli("test", "--input", str(path), "--method", "tau", "--K", "1")
    assert doc.warnings and "tied" in err
    code, out, err, doc = cli("test", "--input", str(path), "--method", "tau", "--K", "1", "--jitter", "--seed", "2")
    assert not doc.warnings


def test_cli_simulate_tables(tmp_path):
    code, out, _, doc = cli(
        "simulate", "--mode", "size", "--models", "i", "--methods", "d,taustar", "--n", "40", "--p", "5",
        "--K", "1", "--reps", "100", "--seed", "3", "--csv",
    )
    assert code == 0 and len(out.strip().splitlines()) == 3
    panel_path = tmp_path / "panel.csv"
    code, out, _, doc = cli(
        "simulate", "--mode", "power", "--models", "I", "--methods", "taustar", "--n", "40", "--p", "5",
        "--K", "1", "--reps", "100", "--rho", "0.1:0.9:5", "--seed", "3", "--csv", "--emit-panel", str(panel_path),
    )
    rows = out.strip().splitlines()[1:]
    assert code == 0 and len(rows) == 5
    assert [float(r.split(",")[5]) for r in rows] == pytest.approx([0.1, 0.3, 0.5, 0.7, 0.9])
    assert load_csv(panel_path).data.shape == (40, 5)


def test_cli_iid_taustar_rarely_rejects(tmp_path):
    accepted = 0
    for seed in range(100):
        data = np.random.default_rng(900 + seed).standard_normal((200, 10))
        path = write_panel(tmp_path / f"iid{seed}.csv", data)
        code = cli("test", "--input", path, "--method", "taustar", "--K", "2", "--seed", str(seed))[0]
        accepted += code == 0
    assert accepted >= 93


def test_cli_smoke_all_methods(tmp_path, rng, monkeypatch):
    start = time.perf_counter()
    path = write_panel(tmp_path / "s.csv", rng.standard_normal((100, 10)))
    out_path = tmp_path / "out.json"
    monkeypatch.setenv("WN_THREADS", "1")
    for method in ("rho", "tau", "d", "r", "taustar", "xi"):
        code, *_ = cli("test", "--input", path, "--method", method, "--K", "1", "--seed", "0", "--out", str(out_path))
        assert code in (0, 1)
        assert ResultDocument.from_json(out_path.read_text()).outcome.method == method
    code, *_ = cli("test", "--input", path, "--method", "lstat", "--K", "1", "--perms", "100", "--threads", "1", "--csv")
    assert code in (0, 1)
    code, *_ = cli(
        "simulate", "--mode", "size", "--models", "iv", "--methods", "rho,xi", "--n", "100", "--p", "10",
        "--K", "1", "--reps", "100", "--lstat-method", "taustar", "--L", "1,2", "--perms", "100", "--seed", "1",
    )
    assert code == 0
    assert main(["test", "--input", path, "--method", "rho", "--K", "1", "--seed", "0", "--out", str(out_path)]) in (0, 1)
    assert time.perf_counter() - start < 60
