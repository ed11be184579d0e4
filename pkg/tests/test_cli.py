"""Command line interface: subcommands, output formats and exit codes."""

import csv
import io
import json

import pytest

from rwcalc import ConvergenceTable
from rwcalc.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_construct(capsys):
    code, out, _ = run(capsys, "construct", "--level", "2", "--seed", "0x2a")
    assert code == 0
    table = rows(out)
    assert len(table) == 17 and table[0] == {"t": "0", "value": "0"}
    assert run(capsys, "construct", "--level", "2", "--seed", "42")[1] == out


def test_embed_and_integrate(capsys):
    code, out, _ = run(capsys, "embed", "--level", "2", "--fine-level", "5")
    assert code == 0 and len(rows(out)) == 17
    code, out, _ = run(capsys, "integrate", "--function", "identity", "--level", "3")
    assert code == 0
    last = rows(out)[-1]
    b, t = float(last["value"]), float(last["t"])
    assert float(last["ito"]) == pytest.approx((b * b - t) / 2, abs=1e-12)


def test_localtime_json(capsys):
    code, out, _ = run(capsys, "localtime", "--level", "2", "--grid-t", "4", "--format", "json")
    assert code == 0
    data = json.loads(out)
    assert set(data[0]) == {"t", "x", "up", "down"}


def test_identities(capsys):
    code, out, _ = run(capsys, "identities", "--cases", "20", "--max-n", "100")
    assert code == 0
    assert all(float(r["max_relative_residual"]) <= 1e-9 for r in rows(out))


def test_isometry_and_martingale(capsys):
    code, out, _ = run(capsys, "isometry", "--level", "2", "--replications", "10")
    assert code == 0 and float(rows(out)[0]["replications"]) == 10
    code, out, err = run(capsys, "martingale", "--kind", "vol", "--h", "0:1,0.5:2", "--level", "3",
                         "--fine-level", "6")
    assert code == 0 and "sup" in err
    assert run(capsys, "martingale", "--kind", "vol", "--level", "3", "--fine-level", "6")[0] == 2
    assert run(capsys, "martingale", "--level", "5", "--fine-level", "6")[0] == 2


def test_converge_writes_file(capsys, tmp_path):
    target = tmp_path / "table.csv"
    code, _, err = run(capsys, "converge", "--experiment", "qv", "--levels", "3..5", "--fine-level", "8",
                       "--replications", "2", "--seed", "9", "--out", str(target))
    assert code == 0 and "log2-slope" in err
    table = ConvergenceTable.from_csv(target.read_text())
    assert len(table) == 6
    again = tmp_path / "again.csv"
    run(capsys, "converge", "--experiment", "qv", "--levels", "3..5", "--fine-level", "8",
        "--replications", "2", "--seed", "9", "--out", str(again), "--threads", "2")
    assert again.read_bytes() == target.read_bytes()


@pytest.mark.parametrize("argv", [
    ["bogus"],
    ["construct"],
    ["construct", "--level", "-1"],
    ["converge", "--experiment", "unknown"],
    ["converge", "--experiment", "qv", "--levels", "4..9", "--fine-level", "9"],
    ["integrate", "--function", "nope", "--level", "2"],
    ["construct", "--level", "2", "--seed", "-5"],
])
def test_invalid_input_exits_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_budget_exhaustion_exits_3(capsys):
    assert run(capsys, "construct", "--level", "6", "--step-cap", "100")[0] == 3
    assert run(capsys, "embed", "--level", "2", "--fine-level", "6", "--step-cap", "100")[0] == 3
