import json

import pytest

from swdpwr.cli import main

EPT = "numofclusters t1 t2 t3 t4 t5\n6 0 1 1 1 1\n6 0 0 1 1 1\n6 0 0 0 1 1\n6 0 0 0 0 1\n"
D8X3 = "4 0 1 1\n4 0 0 1\n"
D12X3 = "6 0 1 1\n6 0 0 1\n"


@pytest.fixture
def ept_file(tmp_path):
    path = tmp_path / "ept.txt"
    path.write_text(EPT)
    return str(path)


@pytest.fixture
def d43_file(tmp_path):
    path = tmp_path / "d43.txt"
    path.write_text(D8X3)
    return str(path)


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestPower:
    def test_ept_text_output(self, capsys, ept_file):
        code, out, err = run(capsys, [
            "power", "--design", ept_file, "--k", "162", "--family", "binomial",
            "--model", "marginal", "--link", "log", "--type", "cross-sectional",
            "--meanresponse-start", "0.05", "--meanresponse-end0", "0.049",
            "--meanresponse-end1", "0.035", "--alpha0", "0.0047", "--alpha1", "0.0047",
        ])
        assert code == 0
        assert "This cross-sectional study has total sample size of 19440" in out
        assert "Power for this scenario is 0.812" in out
        assert out.rstrip().endswith("Power = 0.812")
        assert "Baseline (mu): -2.996" in out
        assert "Treatment effect (beta): -0.336" in out
        assert "Time effect (gamma J): -0.020" in out

    def test_json_matches_text_numbers(self, capsys, ept_file):
        argv = [
            "power", "--design", ept_file, "--k", "162", "--family", "binomial",
            "--model", "marginal", "--link", "log", "--type", "cross-sectional",
            "--meanresponse-start", "0.05", "--meanresponse-end0", "0.049",
            "--meanresponse-end1", "0.035", "--alpha0", "0.0047", "--alpha1", "0.0047",
        ]
        code, text_out, _ = run(capsys, argv)
        code2, json_out, _ = run(capsys, argv + ["--output", "json"])
        assert code == code2 == 0
        payload = json.loads(json_out)
        from swdpwr.engine import format_power

        assert f"Power for this scenario is {format_power(payload['power'])}" in text_out
        assert payload["total_sample_size"] == 19440
        assert payload["mu"] == pytest.approx(-2.9957, abs=1e-4)

    def test_gaussian_no_time_effects(self, capsys, d43_file):
        code, out, _ = run(capsys, [
            "power", "--design", d43_file, "--k", "24", "--family", "gaussian",
            "--model", "marginal", "--type", "cohort", "--effectsize-beta", "0.2",
            "--sigma2", "0.095", "--alpha0", "0.03", "--alpha1", "0.015", "--alpha2", "0.2",
        ])
        assert code == 0
        assert "Power for this scenario is 1" in out

    def test_validation_error_exit_2(self, capsys, d43_file):
        code, out, err = run(capsys, [
            "power", "--design", d43_file, "--k", "100", "--family", "binomial",
            "--model", "marginal", "--type", "cohort",
            "--meanresponse-start", "0.1", "--effectsize-beta", "0.5",
            "--alpha0", "1.1",
        ])
        assert code == 2
        assert "must be between 0 and 1" in err
        assert out == ""

    def test_unknown_flag_exit_2(self, capsys, d43_file):
        code, _, _ = run(capsys, ["power", "--design", d43_file, "--nope", "1"])
        assert code == 2

    def test_missing_design_file(self, capsys):
        code, _, err = run(capsys, ["power", "--design", "/nonexistent.txt", "--k", "5"])
        assert code == 2

    def test_warnings_go_to_stderr(self, capsys, d43_file):
        code, out, err = run(capsys, [
            "power", "--design", d43_file, "--k", "20", "--family", "binomial",
            "--model", "conditional", "--type", "cohort",
            "--meanresponse-start", "0.1", "--meanresponse-end0", "0.15",
            "--effectsize-beta", "0.2", "--alpha0", "0.05", "--alpha1", "0.05",
        ])
        assert code == 0
        assert "W-TYPE" in err
        assert "Power for this scenario is" in out

    def test_env_quad_nodes_and_flag_priority(self, capsys, d43_file, monkeypatch):
        argv = [
            "power", "--design", d43_file, "--k", "20", "--family", "binomial",
            "--model", "conditional", "--link", "logit", "--type", "cross-sectional",
            "--meanresponse-start", "0.1", "--meanresponse-end0", "0.15",
            "--effectsize-beta", "0.3", "--alpha0", "0.05", "--alpha1", "0.05",
            "--output", "json",
        ]
        monkeypatch.setenv("SWDPWR_QUAD_NODES", "4")
        _, out_env, _ = run(capsys, argv)
        monkeypatch.setenv("SWDPWR_QUAD_NODES", "60")
        _, out_flag, _ = run(capsys, argv + ["--quad-nodes", "30"])
        monkeypatch.delenv("SWDPWR_QUAD_NODES")
        _, out_default, _ = run(capsys, argv)
        p_env = json.loads(out_env)["power"]
        p_flag = json.loads(out_flag)["power"]
        p_default = json.loads(out_default)["power"]
        assert p_flag == p_default  # flag 30 == default 30
        assert p_env != pytest.approx(p_default, abs=0)  # 4-node rule is visibly different


class TestSweep:
    def test_csv_output(self, capsys, d43_file):
        code, out, _ = run(capsys, [
            "sweep", "--design", d43_file, "--k", "24", "--family", "gaussian",
            "--model", "marginal", "--type", "cohort", "--effectsize-beta", "0.2",
            "--sigma2", "0.095", "--alpha0", "0.03", "--alpha1", "0.015", "--alpha2", "0.2",
            "--param", "K", "--grid", "10,20,40",
        ])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "param,value,power,var_beta,beta,error_code,error_message"
        assert len(lines) == 4
        variances = [float(l.split(",")[3]) for l in lines[1:]]
        assert variances[0] > variances[1] > variances[2]

    def test_error_rows_inline(self, capsys, d43_file):
        code, out, _ = run(capsys, [
            "sweep", "--design", d43_file, "--k", "24", "--family", "gaussian",
            "--model", "marginal", "--type", "cohort", "--effectsize-beta", "0.2",
            "--sigma2", "0.095", "--alpha0", "0.03", "--alpha1", "0.015", "--alpha2", "0.2",
            "--param", "alpha0", "--grid", "0.03,1.2",
        ])
        assert code == 0
        lines = out.strip().splitlines()
        assert "E-ICC-RANGE" in lines[2]

    def test_from_to_steps(self, capsys, d43_file):
        code, out, _ = run(capsys, [
            "sweep", "--design", d43_file, "--k", "24", "--family", "gaussian",
            "--model", "marginal", "--type", "cohort", "--effectsize-beta", "0.2",
            "--sigma2", "0.095", "--alpha0", "0.03", "--alpha1", "0.015", "--alpha2", "0.2",
            "--param", "typeIerror", "--from", "0.01", "--to", "0.05", "--steps", "3",
            "--output", "json",
        ])
        assert code == 0
        points = json.loads(out)
        assert [pt["value"] for pt in points] == pytest.approx([0.01, 0.03, 0.05])


class TestValidateAndOracle:
    def test_validate_ok(self, capsys, d43_file):
        code, out, _ = run(capsys, [
            "validate", "--design", d43_file, "--k", "24", "--family", "gaussian",
            "--model", "marginal", "--type", "cohort", "--effectsize-beta", "0.2",
            "--sigma2", "0.095", "--alpha0", "0.03", "--alpha1", "0.015", "--alpha2", "0.2",
        ])
        assert code == 0
        assert out.strip() == "ok"

    def test_validate_error(self, capsys, d43_file):
        code, _, err = run(capsys, [
            "validate", "--design", d43_file, "--k", "24", "--family", "gaussian",
            "--model", "marginal", "--type", "cohort", "--effectsize-beta", "0.2",
            "--sigma2", "0.095", "--alpha0", "0.015", "--alpha1", "0.2", "--alpha2", "0.1",
        ])
        assert code == 2
        assert "E-PD" in err

    def test_oracle_csv(self, capsys, d43_file):
        code, out, _ = run(capsys, [
            "oracle", "--design", d43_file, "--k", "24", "--family", "gaussian",
            "--model", "marginal", "--type", "cohort", "--effectsize-beta", "0.2",
            "--sigma2", "0.095", "--alpha0", "0.03", "--alpha1", "0.015", "--alpha2", "0.2",
            "--replicates", "2000",
        ])
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0] == "check,quantity,analytic,oracle,abs_diff"
        checks = {l.split(",")[0] for l in lines[1:]}
        assert "dense-variance" in checks and "mc-continuous" in checks
