import json

import pytest
from click.testing import CliRunner

from wmwpower import _backend
from wmwpower.cli import cli, parse_distribution
from wmwpower.errors import ParameterError
from wmwpower.report import parse_csv


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, *args):
    return runner.invoke(cli, list(args), catch_exceptions=False)


def test_power_p_json(runner):
    res = invoke(runner, "power-p", "--family", "normal", "--p", "0.8", "--m", "15", "--n", "15",
                 "--seed", "42", "--format", "json")
    assert res.exit_code == 0, res.output
    rec = json.loads(res.output)
    assert abs(rec["power"] - 0.85) <= 0.01
    assert rec["s"] == 100_000
    assert rec["test"] == "exact"
    assert rec["ci99_lo"] <= rec["power"] <= rec["ci99_hi"]
    assert rec["backend"] == _backend.active.NAME


def test_power_p_text(runner):
    res = invoke(runner, "power-p", "--family", "exp", "--p", "0.8", "--m", "6", "--n", "6",
                 "--reps", "5000")
    assert res.exit_code == 0
    assert "empirical power" in res.output
    assert "99% Wald CI" in res.output


def test_power_p_bad_p_is_usage_error(runner):
    res = invoke(runner, "power-p", "--family", "normal", "--p", "1.2", "--m", "6", "--n", "6")
    assert res.exit_code == 2
    assert "1.2" in res.output


def test_power_p_rejects_k_for_exponential(runner):
    res = invoke(runner, "power-p", "--family", "exp", "--p", "0.8", "--k", "2", "--m", "6", "--n", "6")
    assert res.exit_code == 2


def test_power_d(runner):
    res = invoke(runner, "power-d", "--f", "normal(0,1)", "--g", "normal(mu=1.19, sd=1)",
                 "--m", "6", "--n", "6", "--reps", "20000", "--format", "json")
    assert res.exit_code == 0
    rec = json.loads(res.output)
    assert abs(rec["p"] - 0.8) < 1e-3
    assert abs(rec["odds"] - 4.0) < 0.02


def test_power_d_empirical_files(runner, tmp_path):
    fpath = tmp_path / "f.txt"
    gpath = tmp_path / "g.txt"
    fpath.write_text("1.0\n2.0\n3.0\n")
    gpath.write_text("3.5\n4.5\n")
    res = invoke(runner, "power-d", "--f", "empirical", "--g", "empirical", "--f-data", str(fpath),
                 "--g-data", str(gpath), "--m", "4", "--n", "4", "--reps", "1000", "--format", "json")
    assert res.exit_code == 0, res.output
    rec = json.loads(res.output)
    assert rec["p"] == 1.0


def test_power_d_tie_exits_3(runner, tmp_path):
    path = tmp_path / "obs.txt"
    path.write_text("1\n2\n3\n")
    res = invoke(runner, "power-d", "--f", "empirical", "--g", "empirical", "--data", str(path),
                 "--m", "5", "--n", "5", "--reps", "1000")
    assert res.exit_code == 3
    assert "tie" in res.output


def test_power_d_data_parse_error(runner, tmp_path):
    path = tmp_path / "obs.txt"
    path.write_text("1\nx\n3\n")
    res = invoke(runner, "power-d", "--f", "normal(0,1)", "--g", "empirical", "--data", str(path),
                 "--m", "5", "--n", "5")
    assert res.exit_code == 2
    assert "line(s) 2" in res.output


def test_shieh_command(runner):
    res = invoke(runner, "shieh", "--family", "shifted-exp", "--p", "0.9", "--m", "12", "--n", "6",
                 "--format", "json")
    assert res.exit_code == 0
    rec = json.loads(res.output)
    assert round(rec["power"], 2) == 0.93
    assert rec["p2"] != rec["p3"]


def test_noether_power_and_sample_size(runner):
    res = invoke(runner, "noether", "--p", "0.8", "--m", "15", "--n", "15", "--format", "json")
    assert round(json.loads(res.output)["power"], 2) == 0.81
    res = invoke(runner, "noether", "--p", "0.9", "--target-power", "0.8", "--format", "json")
    assert json.loads(res.output)["N"] == 17


def test_noether_sample_size_at_null_exits_3(runner):
    res = invoke(runner, "noether", "--p", "0.5", "--target-power", "0.8")
    assert res.exit_code == 3


def test_noether_needs_sizes(runner):
    assert invoke(runner, "noether", "--p", "0.7").exit_code == 2


def test_sweep_csv_json_round_trip(runner):
    base = ["sweep", "--size", "6", "--design", "6x12", "--p", "0.7", "--p", "0.9",
            "--method", "shieh", "--method", "noether", "--family", "normal", "--family", "exp"]
    csv_res = invoke(runner, *base, "--format", "csv")
    json_res = invoke(runner, *base, "--format", "json")
    assert csv_res.exit_code == json_res.exit_code == 0
    assert parse_csv(csv_res.output) == json.loads(json_res.output)
    rows = json.loads(json_res.output)
    # shieh for two families plus noether, at two designs and two p values
    assert len(rows) == (2 + 1) * 2 * 2
    assert {r["family"] for r in rows if r["method"] == "shieh"} == {"normal", "shifted_exponential"}


def test_sweep_empty_method_list(runner):
    res = invoke(runner, "sweep", "--size", "6", "--methods", " , ")
    assert res.exit_code == 2
    assert "empty" in res.output
    res = invoke(runner, "sweep", "--size", "6")
    assert res.exit_code == 2


def test_sweep_rejects_preset_with_grid(runner):
    assert invoke(runner, "sweep", "--preset", "fig2", "--size", "6").exit_code == 2


def test_sweep_fig2_decreasing_in_k(runner, tmp_path):
    out = tmp_path / "fig2.csv"
    res = invoke(runner, "sweep", "--preset", "fig2", "--reps", "20000", "--seed", "7",
                 "--output", str(out))
    assert res.exit_code == 0
    rows = parse_csv(out.read_text())
    assert all(r["status"] == "ok" for r in rows)
    power = {(r["m"], r["k"], r["p"]): r["power"] for r in rows}
    for k in (1.0, 2.0, 3.0):
        assert power[(6, k, 0.9)] > power[(6, k + 1, 0.9)]


def test_sweep_output_is_lf_only(runner):
    res = invoke(runner, "sweep", "--size", "6", "--method", "noether", "--p", "0.6")
    assert "\r" not in res.output
    assert res.output.splitlines()[0].startswith("m,n,alpha,p,k,family,method,power")


def test_backend_command(runner):
    res = invoke(runner, "backend")
    assert res.output.strip() in {"python", "compiled"}


def test_parse_distribution():
    assert parse_distribution("normal(0, 2)").params == (0.0, 2.0)
    assert parse_distribution("exp(rate=2)").params == (2.0,)
    assert parse_distribution("laplace(0, 1)").family == "double_exponential"
    assert parse_distribution("weibull(shape=2, scale=1)").family == "weibull"
    for bad in ("normal(0)", "normal(a, 1)", "beta(1, 2, 3)", "cauchy(0,1)", "exp(mean=2)"):
        with pytest.raises(ParameterError):
            parse_distribution(bad)
