"""End-to-end tests for the command line driver."""

import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from diffscale.cli import RunConfig, main


@pytest.fixture
def runner():
    return CliRunner()


def invoke(runner, args, **kwargs):
    return runner.invoke(main, args, catch_exceptions=False, **kwargs)


class TestRunConfig:
    def test_json_roundtrip_drops_nulls(self):
        cfg = RunConfig(command="zscan", system="markov", params={"p": 0.25}, depth=5)
        data = json.loads(cfg.to_json())
        assert "k0" not in data
        assert RunConfig.from_json(cfg.to_json()) == cfg

    def test_stray_fields_rejected(self):
        with pytest.raises(Exception, match="unknown config fields"):
            RunConfig.from_json('{"command": "zscan", "bogus": 1}')

    def test_command_field_required(self):
        with pytest.raises(Exception, match="lacks a 'command'"):
            RunConfig.from_json('{"system": "fibonacci"}')


class TestGenerate:
    def test_substitution_patch(self, runner, tmp_path):
        out = tmp_path / "fib.csv"
        res = invoke(runner, ["generate", "--system", "fibonacci",
                              "--radius", "30", "-o", str(out)])
        assert res.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("position,type")
        assert len(lines) > 20
        assert (tmp_path / "fib.csv.run.json").exists()

    def test_stochastic_realisation(self, runner, tmp_path):
        out = tmp_path / "pts.csv"
        res = invoke(runner, ["generate", "--system", "poisson",
                              "--radius", "50", "--seed", "3", "-o", str(out)])
        assert res.exit_code == 0
        assert out.read_text().splitlines()[0] == "position,weight"
        side = json.loads((tmp_path / "pts.csv.run.json").read_text())
        assert side["command"] == "generate"
        assert side["system"] == "poisson"
        assert side["seed"] == 3

    def test_unknown_system(self, runner):
        res = runner.invoke(main, ["generate", "--system", "penrose"])
        assert res.exit_code == 2
        assert "unknown system" in res.output

    def test_density_only_model_cannot_generate(self, runner):
        res = runner.invoke(main, ["generate", "--system", "rmt", "--beta", "2"])
        assert res.exit_code == 2

    def test_bad_model_parameters(self, runner):
        res = runner.invoke(main, ["generate", "--system", "markov",
                                   "--p", "1", "--q", "1"])
        assert res.exit_code == 2


class TestZscan:
    def test_fibonacci_csv(self, runner, tmp_path):
        out = tmp_path / "scan.csv"
        res = invoke(runner, ["zscan", "--system", "fibonacci", "--depth", "4",
                              "-o", str(out)])
        assert res.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "k,Z,log_k,log_Z"
        assert len(lines) == 6
        ks = [float(l.split(",")[0]) for l in lines[1:]]
        tau = (1 + math.sqrt(5)) / 2
        assert np.allclose(ks, 0.4 / tau ** np.arange(5))

    def test_named_ratios(self, runner, tmp_path):
        res = invoke(runner, ["zscan", "--system", "fibonacci", "--depth", "4",
                              "--ratio", "golden", "-o", str(tmp_path / "a.csv")])
        assert res.exit_code == 0
        res = invoke(runner, ["zscan", "--system", "fibonacci", "--depth", "4",
                              "--ratio", "natural", "-o", str(tmp_path / "b.csv")])
        assert res.exit_code == 0
        # identical grid, identical bytes
        assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()

    def test_natural_ratio_needs_a_system_scale(self, runner):
        res = runner.invoke(main, ["zscan", "--system", "markov", "--ratio", "natural"])
        assert res.exit_code == 2
        assert "natural" in res.output

    def test_garbled_ratio(self, runner):
        res = runner.invoke(main, ["zscan", "--system", "markov", "--ratio", "fast"])
        assert res.exit_code == 2
        assert "ratio must be a number" in res.output

    def test_stochastic_json(self, runner, tmp_path):
        out = tmp_path / "scan.json"
        res = invoke(runner, ["zscan", "--system", "markov", "--p", "0.25",
                              "--q", "0.25", "--depth", "5", "--format", "json",
                              "-o", str(out)])
        assert res.exit_code == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {"producer", "k", "log_k", "log_Z"}
        assert len(doc["k"]) == 6

    def test_tm_grid_must_be_dyadic(self, runner):
        res = runner.invoke(main, ["zscan", "--system", "tm", "--k0", "0.3"])
        assert res.exit_code == 2
        assert "2^-n" in res.output

    def test_tm_ratio_locked(self, runner):
        res = runner.invoke(main, ["zscan", "--system", "tm", "--ratio", "3"])
        assert res.exit_code == 2

    def test_tm_scan_runs(self, runner, tmp_path):
        out = tmp_path / "tm.csv"
        res = invoke(runner, ["zscan", "--system", "tm", "--depth", "4", "-o", str(out)])
        assert res.exit_code == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 6

    def test_gtm_ratio_locked_to_base(self, runner):
        res = runner.invoke(main, ["zscan", "--system", "gtm", "--p", "3",
                                   "--q", "1", "--ratio", "2"])
        assert res.exit_code == 2
        assert "ratio 4" in res.output

    def test_squarefree_json(self, runner, tmp_path):
        out = tmp_path / "sf.json"
        res = invoke(runner, ["zscan", "--system", "squarefree", "--S", "64",
                              "--kmin", "0.01", "--kmax", "0.1", "--points", "5",
                              "--format", "json", "-o", str(out)])
        assert res.exit_code == 0
        doc = json.loads(out.read_text())
        assert set(doc) == {"k", "S", "Z", "R"}
        assert doc["S"] == 64
        assert len(doc["k"]) == 5

    def test_squarefree_grid_validated(self, runner):
        res = runner.invoke(main, ["zscan", "--system", "squarefree",
                                   "--kmin", "0.1", "--kmax", "0.01"])
        assert res.exit_code == 2


class TestFit:
    def scan_csv(self, runner, tmp_path):
        out = tmp_path / "scan.csv"
        invoke(runner, ["zscan", "--system", "poisson", "--depth", "6", "-o", str(out)])
        return out

    def test_power_fit_from_csv(self, runner, tmp_path):
        src = self.scan_csv(runner, tmp_path)
        out = tmp_path / "fit.json"
        res = invoke(runner, ["fit", "--input", str(src), "--predicted", "1.0",
                              "--tol", "1e-6", "--no-figures", "-o", str(out)])
        assert res.exit_code == 0
        assert "pass" in res.output
        doc = json.loads(out.read_text())
        row = doc["fits"][0]
        assert abs(row["exponent"] - 1.0) < 1e-9
        assert row["passed"] is True
        assert row["producer"] == "scan"

    def test_figure_rendered_next_to_report(self, runner, tmp_path):
        src = self.scan_csv(runner, tmp_path)
        out = tmp_path / "fit.json"
        res = invoke(runner, ["fit", "--input", str(src), "-o", str(out)])
        assert res.exit_code == 0
        png = tmp_path / "fit.png"
        assert png.exists()
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_log_quadratic_fit(self, runner, tmp_path):
        src = tmp_path / "quad.csv"
        ks = 0.5 / 2.0 ** np.arange(10)
        a, b, c = -1.0 / math.log(2), 3.0, 0.2
        with open(src, "w") as fh:
            fh.write("k,log_Z\n")
            for k in ks:
                x = math.log(k)
                fh.write(f"{k},{a * x * x + b * x + c}\n")
        out = tmp_path / "fit.json"
        res = invoke(runner, ["fit", "--input", str(src), "--model", "log-quadratic",
                              "--no-figures", "-o", str(out)])
        assert res.exit_code == 0
        row = json.loads(out.read_text())["fits"][0]
        assert abs(row["A"] - a) < 1e-9

    def test_input_required_without_catalogue(self, runner):
        res = runner.invoke(main, ["fit", "--no-figures"])
        assert res.exit_code == 2
        assert "needs --input" in res.output

    def test_missing_file(self, runner, tmp_path):
        res = runner.invoke(main, ["fit", "--input", str(tmp_path / "gone.csv"),
                                   "--no-figures"])
        assert res.exit_code == 2

    def test_csv_without_k_column(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("x,y\n1,2\n")
        res = runner.invoke(main, ["fit", "--input", str(bad), "--no-figures"])
        assert res.exit_code == 2
        assert "no 'k' column" in res.output

    def test_csv_rejects_nonpositive_Z(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("k,Z\n0.4,1.0\n0.2,0.0\n0.1,0.1\n")
        res = runner.invoke(main, ["fit", "--input", str(bad), "--no-figures"])
        assert res.exit_code == 2
        assert "line 3" in res.output

    def test_csv_rejects_upward_scan(self, runner, tmp_path):
        bad = tmp_path / "bad.csv"
        with open(bad, "w") as fh:
            fh.write("k,Z\n")
            for i, k in enumerate(0.4 / 2.0 ** np.arange(8)):
                fh.write(f"{k},{2.0**i}\n")
        res = runner.invoke(main, ["fit", "--input", str(bad), "--no-figures"])
        assert res.exit_code == 2
        assert "increases along the scan" in res.output

    def test_catalogue_battery(self, runner, tmp_path):
        out = tmp_path / "cat.json"
        res = invoke(runner, ["fit", "--catalogue", "--no-figures", "-o", str(out)])
        assert res.exit_code == 0
        rows = json.loads(out.read_text())["fits"]
        assert len(rows) == 11
        by_name = {r["producer"]: r for r in rows}
        assert by_name["fibonacci"]["kind"] == "power"
        assert by_name["gtm(5,1)"]["kind"] == "cocycle"
        assert by_name["thue_morse"]["kind"] == "log-quadratic"
        verdicts = [r["passed"] for r in rows]
        assert verdicts.count(None) == 1 and all(v for v in verdicts if v is not None)


class TestLyapunov:
    def test_report_payload(self, runner, tmp_path):
        out = tmp_path / "fib.json"
        res = invoke(runner, ["lyapunov", "--system", "fibonacci",
                              "--depth", "12", "-o", str(out)])
        assert res.exit_code == 0
        doc = json.loads(out.read_text())
        assert {"rule", "lambda", "lyapunov_spectrum", "shifted_spectrum",
                "predicted_exponent", "measured_exponent"} <= set(doc)
        loglam = math.log(doc["lambda"])
        assert np.allclose(
            doc["shifted_spectrum"],
            [x - loglam for x in doc["lyapunov_spectrum"]],
        )
        assert doc["predicted_exponent"] == 4.0

    def test_stochastic_systems_have_no_cocycle(self, runner):
        res = runner.invoke(main, ["lyapunov", "--system", "poisson"])
        assert res.exit_code == 2
        assert "no substitution cocycle" in res.output


class TestMc:
    def test_markov_comparison(self, runner, tmp_path):
        out = tmp_path / "mc.csv"
        res = invoke(runner, ["mc", "--system", "markov", "--p", "0.25", "--q", "0.25",
                              "--R", "2000", "--kmin", "0.2", "--kmax", "0.4",
                              "--points", "3", "--no-figures", "-o", str(out)])
        assert res.exit_code == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "k,Z_analytic,Z_empirical"
        assert len(lines) == 4
        for line in lines[1:]:
            _, za, ze = map(float, line.split(","))
            assert abs(ze - za) / za < 0.5

    def test_rudin_shapiro_uses_identity_curve(self, runner, tmp_path):
        out = tmp_path / "rs.json"
        res = invoke(runner, ["mc", "--system", "rudin_shapiro", "--R", "4096",
                              "--points", "3", "--format", "json",
                              "--no-figures", "-o", str(out)])
        assert res.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["k"] == doc["Z_analytic"]

    def test_figure_written(self, runner, tmp_path):
        out = tmp_path / "mc.csv"
        res = invoke(runner, ["mc", "--system", "poisson", "--R", "500",
                              "--points", "3", "-o", str(out)])
        assert res.exit_code == 0
        assert (tmp_path / "mc.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_under_resolved_bins_fail_numerically(self, runner, tmp_path):
        res = runner.invoke(main, ["mc", "--system", "poisson", "--R", "500",
                                   "--points", "3", "--bins", "3", "--no-figures",
                                   "-o", str(tmp_path / "x.csv")])
        assert res.exit_code == 3

    def test_density_only_model_rejected(self, runner):
        res = runner.invoke(main, ["mc", "--system", "rmt", "--beta", "2"])
        assert res.exit_code == 2

    def test_grid_validated(self, runner):
        res = runner.invoke(main, ["mc", "--system", "poisson",
                                   "--kmin", "0.4", "--kmax", "0.1"])
        assert res.exit_code == 2


class TestTmBounds:
    def test_bracket_payload(self, runner, tmp_path):
        out = tmp_path / "tm.json"
        res = invoke(runner, ["tm-bounds", "--n", "6", "-o", str(out)])
        assert res.exit_code == 0
        doc = json.loads(out.read_text())
        assert doc["n"] == 6
        assert doc["lower"] <= doc["improved_lower"] <= doc["F_est"] <= doc["upper"]

    def test_depth_validated(self, runner):
        res = runner.invoke(main, ["tm-bounds", "--n", "1"])
        assert res.exit_code == 2


class TestRepro:
    def test_replays_byte_identical(self, runner, tmp_path):
        out = tmp_path / "scan.json"
        invoke(runner, ["zscan", "--system", "markov", "--p", "0.3", "--q", "0.6",
                        "--depth", "5", "--format", "json", "-o", str(out)])
        replay = tmp_path / "replay.json"
        res = invoke(runner, ["repro", str(tmp_path / "scan.json.run.json"),
                              "-o", str(replay)])
        assert res.exit_code == 0
        assert replay.read_bytes() == out.read_bytes()

    def test_replay_covers_sampled_runs(self, runner, tmp_path):
        out = tmp_path / "pts.csv"
        invoke(runner, ["generate", "--system", "markov", "--radius", "200",
                        "--seed", "11", "-o", str(out)])
        replay = tmp_path / "again.csv"
        res = invoke(runner, ["repro", str(tmp_path / "pts.csv.run.json"),
                              "-o", str(replay)])
        assert res.exit_code == 0
        assert replay.read_bytes() == out.read_bytes()

    def test_stray_config_fields(self, runner, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"command": "zscan", "system": "poisson", "turbo": true}')
        res = runner.invoke(main, ["repro", str(cfg)])
        assert res.exit_code == 2
        assert "unknown config fields" in res.output

    def test_unknown_command_in_config(self, runner, tmp_path):
        cfg = tmp_path / "bad.json"
        cfg.write_text('{"command": "explode"}')
        res = runner.invoke(main, ["repro", str(cfg)])
        assert res.exit_code == 2

    def test_missing_config_file(self, runner, tmp_path):
        res = runner.invoke(main, ["repro", str(tmp_path / "gone.json")])
        assert res.exit_code == 2


class TestOutdir:
    def test_relative_outputs_redirected(self, runner, tmp_path):
        res = invoke(runner, ["zscan", "--system", "poisson", "--depth", "4",
                              "-o", "here.csv"],
                     env={"DIFFSCALE_OUTDIR": str(tmp_path)})
        assert res.exit_code == 0
        assert (tmp_path / "here.csv").exists()
        assert (tmp_path / "here.csv.run.json").exists()

    def test_absolute_output_wins(self, runner, tmp_path):
        target = tmp_path / "abs" / "scan.csv"
        res = invoke(runner, ["zscan", "--system", "poisson", "--depth", "4",
                              "-o", str(target)],
                     env={"DIFFSCALE_OUTDIR": str(tmp_path / "elsewhere")})
        assert res.exit_code == 0
        assert target.exists()
        assert not (tmp_path / "elsewhere").exists()
