import csv
import io
import json

import pytest

from hpcfail import budget, cli, refined_model
from hpcfail.config import bundled_fixtures, load_config, resolve_config_path
from hpcfail.errors import InvariantViolation
from hpcfail.tabular import csv_text


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_config(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def test_convert(capsys):
    assert run(capsys, "convert", "--fit", "200") == (0, "mttf_hours=5000000\n", "")
    assert run(capsys, "convert", "--mttf", "5000000")[1] == "fit=200\n"


def test_convert_zero_rate(capsys):
    code, _, err = run(capsys, "convert", "--fit", "0")
    assert code == 3
    assert "hpcfail: error:" in err


def test_cap_solve(capsys):
    assert run(capsys, "cap", "solve", "--config", "scenario1", "--unknown", "hard_cap") == (0, "25 FIT\n", "")


def test_cap_solve_infeasible_exit_2(capsys, tmp_path):
    data = json.loads(resolve_config_path("scenario1").read_text())
    data["caps"]["sys_cap"] = 1_000_000
    code, out, err = run(capsys, "cap", "solve", "--config", write_config(tmp_path, data), "--unknown", "hard_cap")
    assert (code, out) == (2, "")
    assert "exceed" in err or "budget" in err


def test_cap_constraint(capsys):
    assert run(capsys, "cap", "constraint", "--config", "component_caps")[1] == "dram + 2*storage = 50\n"
    code, out, _ = run(capsys, "cap", "constraint", "--config", "component_caps", "--json")
    assert code == 0
    assert json.loads(out) == budget.derive_constraint(cli._cap_problem(load_config("component_caps"))).to_dict()


def test_cap_constraint_scenario2(capsys):
    code, out, _ = run(capsys, "cap", "constraint", "--config", "scenario2")
    assert code == 0
    assert out.strip().endswith("= 100")


def test_refined_commands(capsys):
    assert run(capsys, "refined", "constraint", "--config", "scenario3")[1] == (
        "400*node + 12*chassis_offnode + cabinet_offnode = 100000\n"
    )
    assert run(capsys, "refined", "rate", "--config", "scenario3")[1] == "5000000 FIT\n"
    assert run(capsys, "refined", "solve", "--config", "scenario3")[1] == "250 FIT\n"
    assert run(capsys, "refined", "solve", "--config", "scenario3", "--chassis", "500", "--cabinet", "500")[1] == (
        "233.75 FIT\n"
    )
    assert run(capsys, "refined", "solve", "--config", "scenario3", "--chassis", "1e5")[0] == 2


def test_aggregate(capsys):
    code, out, _ = run(capsys, "aggregate", "--config", "scenario3")
    assert code == 0
    lines = dict(line.split("=") for line in out.splitlines())
    assert lines["total_nodes"] == "100000"
    assert lines["system_fit"] == "25000000"


def test_aggregate_needs_rates(capsys):
    code, _, err = run(capsys, "aggregate", "--config", "scenario1")
    assert code == 3
    assert "rates" in err


def test_sweep_type_matches_library(capsys, tmp_path):
    out_path = tmp_path / "surface.csv"
    args = ["sweep", "type", "--config", "scenario1", "--soft-range", "0:50:10", "--hard-range", "0:20:5"]
    assert run(capsys, *args, "--out", str(out_path)) == (0, "", "")
    cfg = load_config("scenario1")
    rows = budget.sweep_system_rate(
        cfg.topology, cfg.si[0], cfg.si[1], budget.Grid.parse("0:50:10"), budget.Grid.parse("0:20:5")
    )
    expected = csv_text(budget.SWEEP_HEADER, rows)
    assert out_path.read_text() == expected
    assert run(capsys, *args)[1].replace("\r\n", "\n") == expected.replace("\r\n", "\n")


def test_sweep_type_default_grid(capsys):
    code, out, _ = run(capsys, "sweep", "type", "--config", "scenario1")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert tuple(rows[0]) == budget.SWEEP_HEADER
    assert len(rows) == 1 + 51 * 51
    assert rows[-1] == ["500", "500", "30000000"]


def test_sweep_refined(capsys, tmp_path):
    out_path = tmp_path / "refined.csv"
    args = ["sweep", "refined", "--config", "scenario3", "--chassis-range", "0:10000:5000", "--cabinet-range", "0:0:1"]
    assert run(capsys, *args, "--out", str(out_path))[0] == 0
    rows = list(csv.reader(out_path.open()))
    assert tuple(rows[0]) == refined_model.SWEEP_HEADER
    assert rows[1:] == [["0", "0", "250", "ok"], ["5000", "0", "100", "ok"], ["10000", "0", "", "infeasible"]]


def test_bad_grid_exit_3(capsys):
    code, _, err = run(capsys, "sweep", "type", "--config", "scenario1", "--soft-range", "10:0:1")
    assert code == 3
    assert "soft-range" in err


def test_ingest(capsys):
    code, out, _ = run(capsys, "ingest", "--config", "mira_table1")
    assert code == 0
    values = {k: float(v) for k, v in (line.split("=") for line in out.splitlines())}
    assert values["off_node_share"] == pytest.approx(0.3947, abs=1e-4)
    assert values["node_fit"] == pytest.approx(5.395)
    code, out, _ = run(capsys, "ingest", "--config", "mira_table1", "--json")
    assert json.loads(out) == values


def test_ingest_table_only(capsys):
    table = load_config("mira_table1").categories.table_path
    code, out, _ = run(capsys, "ingest", "--table", str(table))
    assert code == 0
    assert "node_fit" not in out
    assert run(capsys, "ingest")[0] == 3


def test_ingest_unmapped_component(capsys, tmp_path):
    table = tmp_path / "t.csv"
    table.write_text("component,share,location\nflux capacitor,0.5,off_node\n")
    code, _, err = run(capsys, "ingest", "--table", str(table))
    assert code == 3
    assert "flux capacitor" in err


def test_efficiency(capsys):
    assert run(capsys, "efficiency", "--config", "exascale_15")[1] == "0.2000\n"
    assert run(capsys, "efficiency", "--config", "exascale_15", "--percent")[1] == "20.00%\n"
    assert run(capsys, "efficiency", "--config", "efficiency_13_14")[1] == (
        "without_failures: 0.1400\nwith_failures: 0.1800\n"
    )


def test_simulate_rates(capsys):
    args = ["simulate", "rates", "--config", "scenario3", "--trials", "200", "--seed", "3"]
    code, out, _ = run(capsys, *args)
    report = json.loads(out)
    assert code == 0
    assert report["analytic"] == 5e6
    assert set(report) == {"trials", "mean", "stderr", "analytic", "relative_error"}
    assert run(capsys, *args, "--workers", "4")[1] == out


def test_simulate_cr(capsys):
    base = ["simulate", "cr", "--config", "exascale_15", "--trials", "10", "--seed", "1"]
    report = json.loads(run(capsys, *base, "--arrivals", "deterministic")[1])
    assert report["mean"] == 0.2
    assert report["relative_error"] == 0
    assert run(capsys, *base, "--case", "nope")[0] == 3
    assert run(capsys, "simulate", "cr", "--config", "efficiency_13_14", "--trials", "1", "--seed", "1")[0] == 3


def test_simulate_requires_seed(capsys):
    code, _, err = run(capsys, "simulate", "rates", "--config", "scenario3", "--trials", "10")
    assert code == 3
    assert "--seed" in err


def test_unknown_key_exit_3(capsys, tmp_path):
    path = write_config(tmp_path, {"caps": {"sys_capp": 1}})
    code, _, err = run(capsys, "cap", "solve", "--config", path, "--unknown", "hard_cap")
    assert code == 3
    assert "sys_capp" in err


def test_invariant_violation_exit_4(capsys, monkeypatch):
    def broken(args):
        raise InvariantViolation("chain broken")

    monkeypatch.setattr(cli, "cmd_efficiency", broken)
    code, _, err = run(capsys, "efficiency", "--config", "exascale_15")
    assert code == 4
    assert "chain broken" in err


def test_list_fixtures(capsys):
    assert run(capsys, "--list-fixtures")[1].split() == bundled_fixtures()


def test_no_command_exit_3(capsys):
    assert run(capsys)[0] == 3
