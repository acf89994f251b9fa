import csv
import json

import pytest

import parsmc.cli as cli
from parsmc.errors import AllWeightsZeroError


def run_cli(argv, capsys):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBenchCommand:
    def test_bench_writes_csv_and_table(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        code, stdout, _ = run_cli([
            "bench", "--n", "64,128", "--t", "3", "--trials", "2",
            "--algo", "cpu_systematic,par_cutpoint", "--seed", "1",
            "--lanes", "2", "--out", str(out)], capsys)
        assert code == 0
        assert "wrote 8 records" in stdout
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 8
        assert {r["algorithm"] for r in rows} == {"cpu_systematic", "par_cutpoint"}

    def test_bench_json_format(self, tmp_path, capsys):
        out = tmp_path / "bench.json"
        code, _, _ = run_cli([
            "bench", "--n", "64", "--t", "2", "--trials", "1",
            "--algo", "cpu_naive", "--format", "json", "--out", str(out)], capsys)
        assert code == 0
        assert json.loads(out.read_text())[0]["n"] == 64

    def test_config_error_exit_code(self, capsys):
        # par_cutpoint with a non power-of-two count is a config error
        code, _, err = run_cli([
            "bench", "--n", "100", "--algo", "par_cutpoint", "--t", "2",
            "--trials", "1"], capsys)
        assert code == cli.EXIT_CONFIG == 2
        assert "configuration error" in err

    def test_unknown_algorithm_is_config_error(self, capsys):
        code, _, err = run_cli([
            "bench", "--n", "64", "--algo", "gpu_magic", "--t", "2",
            "--trials", "1"], capsys)
        assert code == 2

    def test_degeneracy_exit_code(self, capsys, monkeypatch):
        def boom(*args, **kwargs):
            raise AllWeightsZeroError(step=7)

        monkeypatch.setattr(cli, "run_particle_learning", boom)
        monkeypatch.setattr("parsmc.bench.run_particle_learning", boom)
        code, _, err = run_cli(["bench", "--n", "64", "--t", "2", "--trials", "1",
                                "--algo", "par_cutpoint"], capsys)
        assert code == cli.EXIT_DEGENERATE == 3
        assert "degeneracy" in err

    def test_argparse_rejects_bad_flag_values(self, capsys):
        with pytest.raises(SystemExit) as exc:
            cli.main(["bench", "--precision", "quad"])
        assert exc.value.code == 2


class TestFilterCommand:
    def test_prints_posterior_summaries(self, capsys):
        code, stdout, _ = run_cli([
            "filter", "--n", "256", "--t", "20", "--seed", "2", "--lanes", "2"], capsys)
        assert code == 0
        assert "posterior sigma2" in stdout and "posterior tau2" in stdout
        assert "99% interval" in stdout
        assert "phase breakdown" in stdout

    def test_no_learn_mode(self, capsys):
        code, stdout, _ = run_cli([
            "filter", "--n", "256", "--t", "10", "--no-learn"], capsys)
        assert code == 0
        assert "posterior sigma2" not in stdout
        assert "filtered state" in stdout

    def test_sequential_algorithm(self, capsys):
        code, stdout, _ = run_cli([
            "filter", "--n", "200", "--t", "5", "--algo", "cpu_sorted"], capsys)
        assert code == 0


class TestRatioAndScaling:
    @pytest.fixture()
    def bench_csv(self, tmp_path, capsys):
        out = tmp_path / "bench.csv"
        code, _, _ = run_cli([
            "bench", "--n", "64,128,256", "--t", "2", "--trials", "2",
            "--algo", "cpu_systematic,par_cutpoint", "--task", "filter",
            "--out", str(out)], capsys)
        assert code == 0
        return out

    def test_ratio_matches_hand_division(self, bench_csv, capsys):
        code, stdout, _ = run_cli(["ratio", "--in", str(bench_csv), "--format", "json"], capsys)
        assert code == 0
        rows = json.loads(stdout)
        from parsmc.bench import aggregate_records, load_csv

        aggs = {(a.algorithm, a.n): a.total_ns for a in aggregate_records(load_csv(str(bench_csv)))}
        for row in rows:
            want = aggs[(row["numerator"], row["n"])] / aggs[(row["denominator"], row["n"])]
            assert row["ratio"] == pytest.approx(want, rel=1e-12)

    def test_scaling_report_json(self, bench_csv, capsys):
        code, stdout, _ = run_cli(["scaling", "--in", str(bench_csv), "--format", "json"], capsys)
        assert code == 0
        report = json.loads(stdout)
        assert set(report["algorithms"]) == {"cpu_systematic", "par_cutpoint"}
        for entry in report["algorithms"].values():
            assert "total" in entry["slopes"]

    def test_scaling_text_output(self, bench_csv, capsys):
        code, stdout, _ = run_cli(["scaling", "--in", str(bench_csv)], capsys)
        assert code == 0
        assert "slopes:" in stdout

    def test_scaling_insufficient_points(self, tmp_path, capsys):
        out = tmp_path / "tiny.csv"
        code, _, _ = run_cli([
            "bench", "--n", "64", "--t", "2", "--trials", "1",
            "--algo", "cpu_systematic", "--task", "filter", "--out", str(out)], capsys)
        assert code == 0
        code, _, err = run_cli(["scaling", "--in", str(out)], capsys)
        assert code == 2

    def test_missing_input_file(self, capsys):
        code, _, err = run_cli(["ratio", "--in", "/no/such.csv"], capsys)
        assert code == 2
