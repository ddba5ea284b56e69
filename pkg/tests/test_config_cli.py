import subprocess
import sys

import numpy as np
import pytest

from gfdmce.cli import EXIT_CONFIG, EXIT_NUMERIC, EXIT_OK, main
from gfdmce.config import ConfigError, load_config, parse_config_text, parse_snr_grid
from gfdmce.modem import FilterKind
from gfdmce.montecarlo import read_csv

SMALL_CONFIG = """\
# tiny sweep for tests
K = 4
M = 8
L = 4
filter = dirichlet
schemes = conventional, proposed, genie, ofdm
snr_db = 0:20:10
N_h = 3
N_d = 2
Es = 1
seed = 7
"""


class TestParseConfig:
    def test_small(self):
        cfg = parse_config_text(SMALL_CONFIG)
        spec = cfg.spec
        assert (spec.K, spec.M, spec.L, spec.n_h, spec.n_d, spec.seed) == (4, 8, 4, 3, 2, 7)
        assert spec.snr_db == (0.0, 10.0, 20.0)
        assert spec.schemes == ("conventional", "proposed", "genie", "ofdm")
        assert cfg.out_path is None and cfg.workers == 1

    def test_keys_case_insensitive(self):
        spec = parse_config_text("k = 4\nm = 8\nl = 4\nn_h = 2\nES = 2").spec
        assert (spec.K, spec.n_h, spec.es) == (4, 2, 2.0)

    def test_seed_override(self):
        assert parse_config_text(SMALL_CONFIG, seed=99).spec.seed == 99

    def test_filters_and_alpha(self):
        spec = parse_config_text("K=4\nM=8\nL=4\nfilter = dirichlet, rc\nalpha = 0.5").spec
        assert [f.kind for f in spec.filters] == [FilterKind.DIRICHLET, FilterKind.RAISED_COSINE]
        assert spec.filters[1].rolloff == 0.5

    def test_default_alpha(self):
        spec = parse_config_text("K=4\nM=8\nL=4\nfilter = rc").spec
        assert spec.filters[0].rolloff == 0.9

    def test_snr_list(self):
        assert parse_snr_grid("0, 5, 12.5") == (0.0, 5.0, 12.5)

    def test_snr_range_inclusive(self):
        assert parse_snr_grid("0:40:5") == tuple(float(s) for s in range(0, 41, 5))

    @pytest.mark.parametrize("text", [
        "M = 8",                              # missing K
        "K = 4\nM = 8\ncolour = red",         # unknown key
        "K = four\nM = 8",                    # not an integer
        "K = 4\nM = 8\nL = 4\nfilter = sinc",
        "K = 4\nM = 8\nL = 4\nsnr_db = 10, 0",
        "K = 4\nM = 8\nL = 4\nsnr_db = 0:10:0",
        "K = 4\nM = 8\nL = 4\nsnr_db = a:b:c",
        "K = 4\nM = 8\nL = 4\nN_h = 0",
        "K = 4\nM = 8\nL = 4\nworkers = 0",
        "K = 4\nM = 8\nL = 4\nalpha = 2\nfilter = rc",
        "K = 4\nM = 8\nL = 2",                # channel order beyond the CP
        "K = 4\nM = 8\nL = 4\nK = 5",         # duplicate key
    ])
    def test_errors(self, text):
        with pytest.raises(ConfigError):
            parse_config_text(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.cfg")


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "small.cfg"
    path.write_text(SMALL_CONFIG)
    return path


class TestCli:
    def test_run_writes_csv(self, config_file, tmp_path):
        out = tmp_path / "out.csv"
        assert main(["run", "--config", str(config_file), "--out", str(out)]) == EXIT_OK
        rows = read_csv(out)
        assert len(rows) == 4 * 3
        assert {r["scheme"] for r in rows} == {"conventional", "proposed", "genie", "ofdm"}

    def test_run_stdout(self, config_file, capsys):
        assert main(["run", "--config", str(config_file)]) == EXIT_OK
        assert capsys.readouterr().out.startswith("scheme,filter,K,M,snr_db")

    def test_out_path_from_config(self, tmp_path):
        out = tmp_path / "from_cfg.csv"
        cfg = tmp_path / "c.cfg"
        cfg.write_text(SMALL_CONFIG + f"out_path = {out}\n")
        assert main(["run", "--config", str(cfg)]) == EXIT_OK
        assert out.exists()

    def test_seed_flag_changes_output(self, config_file, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        main(["run", "--config", str(config_file), "--out", str(a), "--seed", "1"])
        main(["run", "--config", str(config_file), "--out", str(b), "--seed", "2"])
        assert a.read_bytes() != b.read_bytes()

    def test_bad_config_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("K = 4\n")
        assert main(["run", "--config", str(cfg)]) == EXIT_CONFIG
        assert "config error" in capsys.readouterr().err

    def test_missing_config_exit_code(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == EXIT_CONFIG

    @pytest.mark.parametrize("argv", [[], ["run"], ["run", "--config", "x", "--seed", "-1"],
                                      ["plot", "--in", "a.csv", "--out", "b.svg", "--metric", "ber"]])
    def test_usage_errors(self, argv):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_CONFIG

    def test_numerical_failure_exit_code(self, config_file, monkeypatch, capsys):
        import gfdmce.cli as cli

        def explode(spec, workers=1):
            raise np.linalg.LinAlgError("matrix is numerically singular")

        monkeypatch.setattr(cli, "monte_carlo", explode)
        assert main(["run", "--config", str(config_file)]) == EXIT_NUMERIC
        assert "numerical failure" in capsys.readouterr().err

    def test_plot(self, config_file, tmp_path):
        csv_path, svg = tmp_path / "out.csv", tmp_path / "mse.svg"
        main(["run", "--config", str(config_file), "--out", str(csv_path)])
        assert main(["plot", "--in", str(csv_path), "--out", str(svg), "--metric", "mse"]) == EXIT_OK
        text = svg.read_text()
        assert text.lstrip().startswith("<?xml") and "<svg" in text
        assert main(["plot", "--in", str(csv_path), "--out", str(tmp_path / "s.svg"),
                     "--metric", "ser"]) == EXIT_OK

    def test_plot_missing_input(self, tmp_path):
        assert main(["plot", "--in", str(tmp_path / "none.csv"),
                     "--out", str(tmp_path / "x.svg")]) == EXIT_CONFIG

    def test_validate_small(self, config_file, capsys):
        code = main(["validate", "--config", str(config_file), "--samples", "20000"])
        out = capsys.readouterr().out
        assert "[PASS] unitarity dirichlet" in out
        assert "[PASS] precancellation" in out
        assert "covariance oracle" in out
        assert code == EXIT_OK

    def test_module_entry_point(self, config_file):
        proc = subprocess.run([sys.executable, "-m", "gfdmce", "run", "--config", str(config_file)],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == 0
        assert proc.stdout.splitlines()[0] == "scheme,filter,K,M,snr_db,mse,ser,pilot_energy_avg,trials"
