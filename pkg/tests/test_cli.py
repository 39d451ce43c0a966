import json
import math
import subprocess
import sys

import numpy as np
import pytest

from cnode import SweepTable
from cnode.cli import main, parse_range
from cnode.exceptions import InvalidInputError


@pytest.fixture
def i2(tmp_path):
    path = tmp_path / "I2.csv"
    np.savetxt(path, np.eye(2), delimiter=",")
    return str(path)


@pytest.fixture
def diag21(tmp_path):
    path = tmp_path / "diag21.csv"
    np.savetxt(path, np.diag([2.0, 1.0]), delimiter=",")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range():
    np.testing.assert_allclose(parse_range("1:10:0.5"), np.arange(1, 10.25, 0.5))
    assert parse_range("1:10:0.5").size == 19
    assert parse_range("0:20:0.25").size == 81
    np.testing.assert_array_equal(parse_range("1,2,4"), [1, 2, 4])
    for bad in ("1:2", "2:1:0.5", "1:2:0", "a,b"):
        with pytest.raises(InvalidInputError):
            parse_range(bad)


def test_vgc_identity_sweep(capsys, i2):
    code, out, _ = run(capsys, "vgc", "--matrix", i2, "--noise", "1", "--snr", "1:10:0.5")
    assert code == 0
    tab = SweepTable.parse_csv(out)
    assert len(tab) == 19
    snr, node = tab.column("snr"), tab.column("node")
    # snr = 1 is the feasibility edge: both eigenvalues sit on the threshold.
    assert node[0] == 0.0 and tab.rows[0]["jump_adjacent"] is True
    np.testing.assert_allclose(node[1:], 2 / snr[1:], rtol=1e-15)
    np.testing.assert_allclose(tab.column("dC_dsnr_numeric")[1:], node[1:] / 2, rtol=1e-6)
    np.testing.assert_allclose(tab.column("node") - tab.column("mmse")
                               - tab.column("fisher_term"), 0.0, atol=1e-12)


def test_vgc_budget(capsys, diag21):
    code, out, _ = run(capsys, "vgc", "--matrix", diag21, "--noise", "1", "--budget", "2")
    assert code == 0
    row = SweepTable.parse_csv(out).rows[0]
    assert abs(row["water_level"] - 1.625) <= 1e-10
    assert row["power_0"] + row["power_1"] == pytest.approx(2.0)


def test_vgc_infeasible_rows(capsys, i2):
    code, out, _ = run(capsys, "vgc", "--matrix", i2, "--noise", "1", "--snr", "0.5:0.9:0.1")
    assert code == 0
    tab = SweepTable.parse_csv(out)
    assert len(tab) == 5
    assert all(r["infeasible"] is True for r in tab.rows)
    assert np.all(tab.column("capacity") == 0)


def test_vgc_json_matrix_and_db(capsys, tmp_path):
    path = tmp_path / "h.json"
    path.write_text(json.dumps({"matrix": [[1, 1], [0, 1]], "noise_variance": 0.5}))
    code, out, _ = run(capsys, "vgc", "--matrix", str(path), "--snr-db", "0:10:5",
                       "--format", "json")
    assert code == 0
    tab = SweepTable.parse_json(out)
    assert tab.axis_name == "snr_db"
    np.testing.assert_allclose(tab.column("snr"), [1, 10 ** 0.5, 10])


def test_ltv_closed_form_columns(capsys):
    code, out, _ = run(capsys, "ltv", "--gaussian", "1.0", "--r", "1", "--snr", "2.718281828459045",
                       "--closed-form")
    assert code == 0
    row = SweepTable.parse_csv(out).rows[0]
    assert row["node"] == pytest.approx(0.18393972058572117, rel=1e-8)
    assert row["mmse"] == pytest.approx(0.06766764161830635, rel=1e-8)
    assert row["node_relerr"] < 1e-8 and row["mmse_relerr"] < 1e-8
    assert row["gap"] > 0


def test_ltv_gamma_invariance(capsys):
    rows = []
    for g in ("1.0", "2.0"):
        code, out, _ = run(capsys, "ltv", "--gaussian", g, "--r", "1", "--snr", "2,5")
        assert code == 0
        rows.append(SweepTable.parse_csv(out))
    for col in ("capacity", "node", "mmse"):
        np.testing.assert_allclose(rows[0].column(col), rows[1].column(col), rtol=1e-7)


def test_szego(capsys):
    code, out, _ = run(capsys, "szego", "--gaussian", "1.0", "--snr", "2.71828",
                       "--r", "1,2,4")
    assert code == 0
    tab = SweepTable.parse_csv(out)
    np.testing.assert_allclose(tab.column("K_check_normalized"), 0.5, rtol=1e-4)
    gap = tab.column("gap_normalized")
    assert gap[-1] <= gap[0]


def test_simulate_json_report(capsys, i2, tmp_path):
    dump = tmp_path / "e.csv"
    code, out, _ = run(capsys, "simulate", "--matrix", i2, "--noise", "1", "--snr", "2",
                       "--trials", "100000", "--seed", "7", "--dump-samples", str(dump))
    assert code == 0
    rep = json.loads(out)
    var = np.array(rep["empirical_error_variances"])
    se = np.array(rep["error_variance_stderr"])
    assert np.all(np.abs(var - 1.0) <= 3 * se)
    assert abs(rep["empirical_mmse"] - 0.5) <= 3 * rep["empirical_mmse_stderr"]
    assert rep["config"]["seed"] == 7
    assert np.loadtxt(dump, delimiter=",", skiprows=1).shape == (100000, 2)


def test_simulate_deterministic(capsys, i2):
    args = ("simulate", "--matrix", i2, "--noise", "1", "--snr", "2", "--trials", "2000")
    assert run(capsys, *args)[1] == run(capsys, *args)[1]


def test_output_file_round_trip(capsys, i2, tmp_path):
    path = tmp_path / "sweep.csv"
    code, out, err = run(capsys, "vgc", "--matrix", i2, "--noise", "1", "--snr", "2:4:1",
                         "--output", str(path))
    assert code == 0 and out == ""
    assert "wrote 3 row(s)" in err
    tab = SweepTable.from_csv(path)
    assert tab.to_csv() == path.read_text()
    code, _, err = run(capsys, "vgc", "--matrix", i2, "--noise", "1", "--snr", "2:4:1",
                       "--output", str(path), "--quiet")
    assert err == ""


def test_config_precedence(capsys, i2, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"noise": 4.0, "vgc": {"snr": "2,3", "format": "json"}}))
    code, out, _ = run(capsys, "vgc", "--matrix", i2, "--config", str(cfg))
    assert code == 0
    tab = SweepTable.parse_json(out)
    np.testing.assert_array_equal(tab.column("snr"), [2, 3])
    code, out, _ = run(capsys, "vgc", "--matrix", i2, "--config", str(cfg), "--snr", "5",
                       "--format", "csv")
    assert SweepTable.parse_csv(out).column("snr").tolist() == [5.0]


def _error(err):
    return json.loads(err.strip().splitlines()[0])


def test_usage_error_exit_code(capsys, i2):
    with pytest.raises(SystemExit) as exc:
        main(["vgc", "--bogus"])
    assert exc.value.code == 2
    assert _error(capsys.readouterr().err)["exit_code"] == 2


@pytest.mark.parametrize("argv", [
    ["vgc", "--noise", "1", "--snr", "2"],
    ["ltv", "--gaussian", "1.0"],
    ["ltv", "--gaussian", "1.0", "--snr", "2", "--snr-db", "3"],
    ["ltv", "--gaussian", "1.0", "--snr", "2", "--tol", "0.5"],
    ["szego", "--gaussian", "1.0", "--snr", "2", "--r", "1,64"],
])
def test_invalid_input_exit_code(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert _error(err)["exit_code"] == 2


def test_missing_matrix_file(capsys, tmp_path):
    code, _, err = run(capsys, "vgc", "--matrix", str(tmp_path / "nope.csv"), "--noise", "1",
                       "--snr", "2")
    assert code == 2


def test_convergence_exit_code(capsys):
    code, _, err = run(capsys, "ltv", "--gaussian", "1.0", "--snr", "1000", "--tol", "1e-12",
                       "--max-refinement", "1")
    assert code == 3
    assert _error(err)["error"] == "ConvergenceError"


def test_ltv_row_at_e(capsys):
    code, out, _ = run(capsys, "ltv", "--gaussian", "1.0", "--r", "1", "--snr",
                       repr(math.e))
    row = SweepTable.parse_csv(out).rows[0]
    assert row["node"] == pytest.approx(0.5 / math.e, rel=1e-8)
    assert row["mmse"] == pytest.approx(0.5 / math.e ** 2, rel=1e-8)


def test_console_script(i2):
    proc = subprocess.run([sys.executable, "-m", "cnode.cli", "vgc", "--matrix", i2,
                           "--noise", "1", "--snr", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("snr,")
