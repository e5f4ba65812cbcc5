"""Command-line surface: formats, determinism, exit codes."""

import json

import pytest

SUBCOMMANDS = (
    "simulate",
    "exact",
    "continuous",
    "classify",
    "martingale",
    "fit",
    "distance",
    "figures",
    "report",
)


def _rows(csv_text):
    lines = [ln for ln in csv_text.strip().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


class TestFraming:
    @pytest.mark.parametrize("sub", SUBCOMMANDS)
    def test_help_exits_clean(self, cli_runner, sub):
        code, out, _ = cli_runner([sub, "--help"])
        assert code == 0
        assert sub in out

    def test_version(self, cli_runner):
        code, out, _ = cli_runner(["--version"])
        assert code == 0

    def test_unknown_flag_is_a_usage_error(self, cli_runner):
        code, _, err = cli_runner(["simulate", "--frobnicate"])
        assert code == 2

    def test_unknown_subcommand(self, cli_runner):
        code, _, _ = cli_runner(["transmogrify"])
        assert code == 2

    def test_csv_has_meta_comments_and_one_header(self, cli_runner):
        code, out, _ = cli_runner(
            ["simulate", "--kind", "discrete", "--n", "50", "--grid", "10,50",
             "--seed", "3", "--format", "csv"]
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("# ulamadd ")
        assert lines[1].startswith("# config ")
        header, rows = _rows(out)
        assert header == ["n", "x", "s"]
        assert len(rows) == 2

    def test_json_meta_block(self, cli_runner):
        code, out, _ = cli_runner(
            ["simulate", "--kind", "discrete", "--n", "50", "--grid", "10,50",
             "--seed", "3", "--format", "json"]
        )
        payload = json.loads(out)
        assert payload["meta"]["tool"] == "ulamadd"
        assert payload["meta"]["command"] == "simulate"
        assert payload["data"]["columns"] == ["n", "x", "s"]

    def test_runs_are_byte_identical(self, cli_runner, tmp_path):
        argv = ["simulate", "--kind", "discrete", "--n", "200", "--grid",
                "100,200", "--seed", "9", "--format", "json"]
        _, out1, _ = cli_runner(argv)
        _, out2, _ = cli_runner(argv)
        assert out1 == out2
        target = tmp_path / "run.json"
        code, out3, _ = cli_runner(argv + ["--out", str(target)])
        assert code == 0
        assert target.read_text() == out1


class TestSimulate:
    def test_discrete_rows_track_the_grid(self, cli_runner):
        code, out, _ = cli_runner(
            ["simulate", "--kind", "discrete", "--init", "1,2", "--n", "100",
             "--grid", "10,50,100", "--seed", "1", "--format", "csv"]
        )
        assert code == 0
        _, rows = _rows(out)
        assert [int(r[0]) for r in rows] == [10, 50, 100]
        for r in rows:
            assert float(r[1]) > 0 and float(r[2]) >= float(r[1])

    def test_continuized_kind(self, cli_runner):
        code, out, _ = cli_runner(
            ["simulate", "--kind", "continuized", "--t-max", "50", "--grid",
             "10,50", "--seed", "2", "--format", "csv"]
        )
        assert code == 0
        header, rows = _rows(out)
        assert header[0] == "t"
        assert len(rows) == 2

    def test_lazy_needs_valid_p(self, cli_runner):
        code, _, err = cli_runner(
            ["simulate", "--kind", "discrete", "--p", "1.5", "--n", "10",
             "--grid", "10", "--seed", "0"]
        )
        assert code in (1, 2)


class TestExact:
    def test_second_moment_headline_number(self, cli_runner):
        code, out, _ = cli_runner(
            ["exact", "--moment", "2", "--n", "100000", "--grid", "100000",
             "--format", "csv"]
        )
        assert code == 0
        _, rows = _rows(out)
        scaled = float(rows[-1][2])
        assert scaled == pytest.approx(1.8376622845152568, rel=1e-9)

    def test_higher_moments_need_base_setup(self, cli_runner):
        code, _, err = cli_runner(
            ["exact", "--moment", "3", "--p", "0.5", "--n", "100", "--grid", "100"]
        )
        assert code == 2
        assert err.strip() != ""


class TestContinuous:
    def test_second_moment_scaled_column_increases(self, cli_runner):
        code, out, _ = cli_runner(
            ["continuous", "--moment", "2", "--grid", "10,100,400",
             "--format", "csv"]
        )
        assert code == 0
        _, rows = _rows(out)
        scaled = [float(r[2]) for r in rows]
        assert scaled == sorted(scaled)

    def test_product_profile(self, cli_runner):
        code, out, _ = cli_runner(
            ["continuous", "--moment", "2", "--product", "--theta", "0.5",
             "--grid", "100,200", "--format", "csv"]
        )
        assert code == 0
        header, rows = _rows(out)
        assert header[0] == "s"
        assert len(rows) == 2


class TestClassify:
    def test_oscillatory_example(self, cli_runner):
        code, out, _ = cli_runner(
            ["classify", "--alpha", "2", "--beta", "1", "--A", "0.5",
             "--B", "-1", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        report = payload["data"]
        assert report["oscillatory"] is True
        res = sorted(s["im"] for s in report["sigma"])
        assert res[1] == pytest.approx(3**0.5 / 2, abs=1e-12)
        assert report["sigma"][0]["re"] == pytest.approx(-1.5, abs=1e-12)
        assert report["region_label"] == "oscillatory-decaying"


class TestMartingale:
    def test_base_series(self, cli_runner):
        code, out, _ = cli_runner(
            ["martingale", "--variant", "base", "--n", "100", "--grid",
             "10,100", "--seed", "4", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["meta"]["config"]["expected_limit"] == 0.5
        assert payload["data"]["columns"] == ["n", "m"]

    def test_continuized_series(self, cli_runner):
        code, out, _ = cli_runner(
            ["martingale", "--variant", "continuized", "--t-max", "50",
             "--grid", "10,50", "--seed", "4", "--format", "csv"]
        )
        assert code == 0
        header, rows = _rows(out)
        assert header == ["t", "m"]
        assert all(float(r[1]) > 0 for r in rows)


class TestFit:
    def test_happy_path_round_trips(self, cli_runner):
        code, out, _ = cli_runner(
            ["fit", "--mu1", "1.0", "--mu2", "1.3", "--mu3", "2.4",
             "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        fit = payload["data"]
        assert fit["gamma_shape"] > 0
        assert 0 < fit["gamma_scale"] < 1.0 / 3.0
        assert fit["fitted_moments"][1] == pytest.approx(1.3, rel=1e-10)

    def test_infeasible_inputs_are_a_diagnostic_failure(self, cli_runner):
        code, out, err = cli_runner(
            ["fit", "--mu1", "1.0", "--mu2", "1.2", "--mu3", "1.5",
             "--format", "json"]
        )
        assert code == 1
        payload = json.loads(out)
        assert "error" in payload
        assert payload["error"]["type"] == "ValueError"


class TestDistance:
    def test_small_ladder(self, cli_runner):
        code, out, _ = cli_runner(
            ["distance", "--target", "gamma2", "--n", "100,400", "--reps",
             "400", "--seed", "0", "--format", "csv"]
        )
        assert code == 0
        header, rows = _rows(out)
        assert header == ["n", "distance"]
        assert all(float(r[1]) > 0 for r in rows)


class TestFigures:
    def test_lazy_constant_grid(self, cli_runner):
        code, out, _ = cli_runner(["figures", "--which", "2", "--format", "json"])
        assert code == 0
        payload = json.loads(out)
        cols = payload["data"]["columns"]
        rows = payload["data"]["rows"]
        k_idx = cols.index("k_over_p2")
        ks = [r[k_idx] for r in rows]
        assert all(k >= 1.5 for k in ks)
        # decreasing toward the p = 1 endpoint
        assert ks == sorted(ks, reverse=True)
        assert payload["meta"]["config"]["endpoint_exact"] == pytest.approx(
            1.838038955187489, rel=1e-10
        )

    def test_product_drop_profile(self, cli_runner):
        code, out, _ = cli_runner(
            ["figures", "--which", "3", "--n-list", "200", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        cols = payload["data"]["columns"]
        rows = payload["data"]["rows"]
        ratio = [r[cols.index("c_over_n2")] for r in rows]
        assert all(v > 0 for v in ratio)

    def test_region_map(self, cli_runner):
        code, out, _ = cli_runner(
            ["figures", "--which", "4", "--step", "0.5", "--format", "json"]
        )
        assert code == 0
        payload = json.loads(out)
        labels = {
            r[payload["data"]["columns"].index("region_label")]
            for r in payload["data"]["rows"]
        }
        assert "real-growing" in labels

    def test_unknown_figure_number(self, cli_runner):
        code, _, _ = cli_runner(["figures", "--which", "9"])
        assert code == 2


class TestReport:
    def test_battery_summary(self, cli_runner):
        code, out, _ = cli_runner(["report", "--format", "json"])
        assert code == 0
        payload = json.loads(out)
        data = payload["data"]
        assert data["constants"]["K_discrete_base"] == pytest.approx(
            1.838038955187489, rel=1e-12
        )
        assert data["second_moment"]["rel_err"] == pytest.approx(0.0, abs=0.01)
        assert data["p_adding_endpoint"]["rel_err"] == pytest.approx(0.0, abs=1e-5)
        assert data["martingale_ensemble"]["mean"] == pytest.approx(0.5, abs=0.02)
        assert data["loggamma_example"]["fourth_moment"] == pytest.approx(
            4.2099300555729071, rel=1e-10
        )
