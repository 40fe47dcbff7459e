import json

import numpy as np
import pytest

from patternlab.cli import main, parse_tau_grid


@pytest.fixture()
def tiny_scenario_file(tmp_path):
    path = tmp_path / "scenario.json"
    path.write_text(
        json.dumps(
            {
                "kind": "mcar_gaussian",
                "d": 2,
                "beta0": 0.5,
                "beta": [1.0, 2.0],
                "sigma": 0.2,
                "mu": [0.0, 0.0],
                "cov": [[1.0, 0.3], [0.3, 1.0]],
                "missingness": {"kind": "homogeneous_bernoulli", "d": 2, "epsilon": 0.3},
            }
        )
    )
    return path


class TestParseTauGrid:
    def test_log_grid(self):
        grid = parse_tau_grid("0.001:1:log40")
        assert len(grid) == 40
        assert grid[0] == pytest.approx(0.001)
        assert grid[-1] == pytest.approx(1.0)
        ratios = np.diff(np.log(grid))
        assert np.allclose(ratios, ratios[0])

    def test_lin_grid_and_list(self):
        assert len(parse_tau_grid("0.1:0.5:lin5")) == 5
        assert parse_tau_grid("0.1,0.2") == [0.1, 0.2]

    def test_bad_grids(self):
        from patternlab.cli import ConfigError

        for bad in ("0.1:0.5", "0:1:log10", "1:0.5:log10", "abc", ""):
            with pytest.raises(ConfigError):
                parse_tau_grid(bad)


class TestPipeline:
    def test_gen_fit_eval(self, tmp_path, tiny_scenario_file, capsys):
        data = tmp_path / "data.json"
        model = tmp_path / "model.json"
        assert main(["gen", "--scenario", str(tiny_scenario_file), "--n", "400", "--seed", "7", "--out", str(data)]) == 0
        payload = json.loads(data.read_text())
        assert payload["n"] == 400 and payload["d"] == 2
        assert len(payload["values"]) == 400
        masked_cells = [
            (i, j) for i, row in enumerate(payload["mask"]) for j, c in enumerate(row) if c == "1"
        ]
        assert masked_cells, "expected some masked cells"
        i, j = masked_cells[0]
        assert payload["values"][i][j] is None

        assert main(["fit", "--data", str(data), "--estimator", "pbp", "--tau", "d_over_n", "--out", str(model)]) == 0
        stored = json.loads(model.read_text())
        assert set(stored) == {"tau", "clip", "models"}
        assert stored["tau"] == pytest.approx(2 / 400)

        code = main(["eval", "--model", str(model), "--scenario", str(tiny_scenario_file), "--n-test", "2000", "--seed", "9"])
        assert code == 0
        out = capsys.readouterr().out.strip().splitlines()[-1]
        result = json.loads(out)
        assert result["excess_risk"] >= 0.0
        assert result["n_test"] == 2000

    @pytest.mark.parametrize("estimator", ["cst_impute_lr", "iterative_impute_lr"])
    def test_fit_eval_impute_models(self, tmp_path, tiny_scenario_file, estimator, capsys):
        data = tmp_path / "data.json"
        model = tmp_path / "model.json"
        main(["gen", "--scenario", str(tiny_scenario_file), "--n", "300", "--seed", "3", "--out", str(data)])
        assert main(["fit", "--data", str(data), "--estimator", estimator, "--rounds", "2", "--out", str(model)]) == 0
        assert main(["eval", "--model", str(model), "--scenario", str(tiny_scenario_file), "--n-test", "1000", "--seed", "4"]) == 0
        result = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
        assert np.isfinite(result["excess_risk"])

    def test_fixed_tau_fit(self, tmp_path, tiny_scenario_file):
        data = tmp_path / "data.json"
        model = tmp_path / "model.json"
        main(["gen", "--scenario", str(tiny_scenario_file), "--n", "200", "--seed", "5", "--out", str(data)])
        assert main(["fit", "--data", str(data), "--estimator", "pbp", "--tau", "0.25", "--out", str(model)]) == 0
        assert json.loads(model.read_text())["tau"] == 0.25


class TestComplexityCommand:
    def test_preset_curves(self, tmp_path):
        out = tmp_path / "cp.csv"
        code = main(
            ["complexity", "--preset", "bern_pA,bern_pB,bern_pC,bern_pD", "--tau-grid", "0.001:1:log40", "--out", str(out)]
        )
        assert code == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("dist,tau,cp_exact,hartley,shannon")
        assert len(lines) == 1 + 4 * 40
        names = {line.split(",")[0] for line in lines[1:]}
        assert names == {"bern_pA", "bern_pB", "bern_pC", "bern_pD"}

    def test_explicit_file(self, tmp_path):
        dist_file = tmp_path / "dist.json"
        dist_file.write_text(json.dumps({"d": 2, "patterns": [{"mask": "00", "p": 0.5}, {"mask": "11", "p": 0.5}]}))
        out = tmp_path / "cp.csv"
        assert main(["complexity", "--dist", str(dist_file), "--tau-grid", "0.1,0.2", "--out", str(out)]) == 0
        assert len(out.read_text().splitlines()) == 3

    def test_scenario_preset_rejected(self, tmp_path):
        assert main(["complexity", "--preset", "mcar_a", "--out", str(tmp_path / "x.csv")]) == 2


class TestBenchCommand:
    def test_bench_runs_and_is_deterministic(self, tmp_path, tiny_scenario_file):
        config = {
            "scenario": json.loads(tiny_scenario_file.read_text()),
            "estimators": [
                {"kind": "pbp", "tau": "d_over_n"},
                {"kind": "pbp", "tau": "one_over_n"},
                {"kind": "cst_impute_lr"},
            ],
            "n_grid": [80, 160],
            "repetitions": 2,
            "n_test": 200,
            "seed": 99,
            "record_timings": False,
        }
        cfg = tmp_path / "bench.json"
        cfg.write_text(json.dumps(config))
        out1, out2 = tmp_path / "r1.csv", tmp_path / "r2.csv"
        assert main(["bench", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["bench", "--config", str(cfg), "--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()
        lines = out1.read_text().splitlines()
        assert lines[0] == "scenario,estimator,n,repetition,seed,excess_risk,fit_seconds,predict_seconds"
        assert len(lines) == 1 + 3 * 2 * 2


class TestExitCodes:
    def test_missing_file_is_config_error(self, tmp_path):
        assert main(["bench", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o.csv")]) == 2

    def test_invalid_json_is_config_error(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        assert main(["gen", "--scenario", str(bad), "--n", "10", "--seed", "1", "--out", str(tmp_path / "d.json")]) == 2

    def test_bad_tau_grid_is_config_error(self, tmp_path):
        assert main(["complexity", "--preset", "bern_pA", "--tau-grid", "junk", "--out", str(tmp_path / "x.csv")]) == 2

    def test_unknown_preset_is_config_error(self, tmp_path):
        assert main(["complexity", "--preset", "bern_pZ", "--out", str(tmp_path / "x.csv")]) == 2

    def test_numeric_failure_exit_code(self, tmp_path, capsys):
        scenario = {
            "kind": "self_masking",
            "d": 2,
            "beta0": 0.0,
            "beta": [1.0, 1.0],
            "sigma": 0.1,
            "mu": [0.0, 0.0],
            "cov": [[1.0, 0.0], [0.0, 1.0]],
            "mask_center": [0.0, 0.0],
            "mask_scale": [1.0, 1.0],
        }
        sfile = tmp_path / "sm.json"
        sfile.write_text(json.dumps(scenario))
        data = tmp_path / "d.json"
        model = tmp_path / "m.json"
        assert main(["gen", "--scenario", str(sfile), "--n", "200", "--seed", "1", "--out", str(data)]) == 0
        assert main(["fit", "--data", str(data), "--estimator", "pbp", "--tau", "0.0", "--out", str(model)]) == 0
        # no exact optimum exists for this mechanism: numeric failure
        assert main(["eval", "--model", str(model), "--scenario", str(sfile), "--n-test", "500", "--seed", "2"]) == 3
