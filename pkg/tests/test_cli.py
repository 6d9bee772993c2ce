import numpy as np

from gapcert.cli import EXIT_CODES, main

from conftest import dense_chain_hamiltonian, dense_gap, singlet_4x4


def run(args):
    return main(args)


class TestGapCommand:
    def test_two_site_chain(self, capsys):
        code = run(["gap", "--model", "heisenberg_fm", "--length", "2"])
        out = capsys.readouterr().out
        assert code == 0
        assert "gap 1" in out
        assert "kernel dim 3" in out

    def test_ten_site_matches_oracle_csv(self, tmp_path, capsys):
        csv = tmp_path / "gap.csv"
        code = run(["gap", "--model", "heisenberg_fm", "--length", "10", "--out-csv", str(csv)])
        assert code == 0
        rows = csv.read_text().splitlines()
        assert rows[0] == "region_size,hilbert_dim,kernel_dim,gap"
        gap = float(rows[1].split(",")[3])
        oracle = dense_gap(dense_chain_hamiltonian(10, singlet_4x4()))
        assert abs(gap - oracle) <= 1e-9 * oracle

    def test_oversized_region_exit_code(self, capsys):
        code = run(["gap", "--model", "heisenberg_fm", "--length", "40"])
        err = capsys.readouterr().err
        assert code == EXIT_CODES["too_large"]
        assert "region too large" in err

    def test_missing_geometry_is_config_error(self, capsys):
        code = run(["gap", "--model", "heisenberg_fm"])
        assert code == EXIT_CODES["config"]


class TestDLCheckCommand:
    def test_commuting_toy_passes_with_flag(self, capsys, tmp_path):
        js = tmp_path / "dl.json"
        code = run(
            ["dl-check", "--model", "commuting_toy", "--length", "12", "--t", "4",
             "--out-json", str(js)]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "[PASS]" in out
        assert "g=0 -> conservative g=1" in out
        assert js.exists()

    def test_fm_chain_emits_overlap_triple(self, capsys):
        code = run(
            ["dl-check", "--model", "heisenberg_fm", "--length", "12", "--t", "2",
             "--k-min", "6", "--s", "1"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "overlap[0]" in out
        assert "lhs" in out and "mid" in out

    def test_small_t_rejected(self, capsys):
        code = run(["dl-check", "--model", "heisenberg_fm", "--length", "10", "--t", "1"])
        assert code == EXIT_CODES["config"]

    def test_conservative_g_flag(self, capsys):
        code = run(
            ["dl-check", "--model", "commuting_toy", "--length", "10", "--t", "4",
             "--conservative-g"]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "[support-overlap g]" in out

    def test_json_overlap_triples(self, tmp_path):
        import json

        js = tmp_path / "dl.json"
        code = run(
            ["dl-check", "--model", "commuting_toy", "--length", "12", "--t", "2",
             "--k-min", "6", "--s", "1", "--out-json", str(js)]
        )
        assert code == 0
        payload = json.loads(js.read_text())
        assert "overlap_0" in payload
        assert set(payload["overlap_0"]) >= {"lhs", "mid", "rhs"}


class TestCertifyCommand:
    def test_commuting_toy_positive_bound(self, capsys, tmp_path):
        csv = tmp_path / "cert.csv"
        code = run(
            ["certify", "--model", "commuting_toy", "--length", "13",
             "--k-min", "6", "--k-max", "6", "--s-rule", "power:1.25",
             "--out-csv", str(csv)]
        )
        out = capsys.readouterr().out
        assert code == 0
        assert "certified lower bound" in out
        bound = float(out.split("certified lower bound:")[1].split()[0])
        assert bound > 0.0
        header = csv.read_text().splitlines()[0]
        assert header == "k,l_k,region_size,hilbert_dim,gap,delta_k,factor,running_lower_bound"

    def test_fm_chain_not_certifiable(self, capsys):
        code = run(
            ["certify", "--model", "heisenberg_fm", "--length", "13",
             "--k-min", "6", "--k-max", "6", "--s", "1"]
        )
        out = capsys.readouterr().out
        assert code == EXIT_CODES["not_certifiable"]
        assert "delta_k=" in out  # the trend is shown
        assert "not certifiable" in out

    def test_empty_k_range_usage_error(self, capsys):
        code = run(
            ["certify", "--model", "commuting_toy", "--length", "12",
             "--k-min", "7", "--k-max", "6"]
        )
        assert code == EXIT_CODES["config"]


class TestScalingCommand:
    def test_fm_sweep_exponent(self, capsys, tmp_path):
        csv = tmp_path / "scale.csv"
        code = run(
            ["scaling", "--model", "heisenberg_fm", "--sizes", "4:10",
             "--out-csv", str(csv)]
        )
        out = capsys.readouterr().out
        assert code == 0
        exponent = float(out.split("exponent")[1].split()[0])
        assert -2.3 <= exponent <= -1.7
        assert "inverse-square-compatible" in out

    def test_aklt_gapped(self, capsys):
        code = run(["scaling", "--model", "aklt", "--sizes", "4,5,6,7,8"])
        out = capsys.readouterr().out
        assert code == 0
        assert "gapped" in out

    def test_single_point_insufficient(self, capsys):
        code = run(["scaling", "--model", "heisenberg_fm", "--sizes", "4"])
        assert code == EXIT_CODES["not_certifiable"]
        assert "insufficient data" in capsys.readouterr().err

    def test_byte_identical_reruns(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        for path in (a, b):
            assert run(
                ["scaling", "--model", "heisenberg_fm", "--sizes", "4:8",
                 "--out-csv", str(path), "--seed", "99"]
            ) == 0
        assert a.read_bytes() == b.read_bytes()


class TestOtherCommands:
    def test_coloring_reports(self, capsys):
        code = run(["coloring", "--model", "heisenberg_fm", "--grid", "3x3"])
        out = capsys.readouterr().out
        assert code == 0
        assert "layers L = 4" in out
        assert "commutation degree" in out

    def test_validate_graph_file(self, capsys, tmp_path):
        from gapcert.fileio import format_graph
        from gapcert.lattice import grid_graph

        path = tmp_path / "g.txt"
        path.write_text(format_graph(grid_graph(3, 3)))
        code = run(["validate", "--graph-file", str(path), "--model", "commuting_toy"])
        out = capsys.readouterr().out
        assert code == 0
        assert "embedding: ok" in out
        assert "frustration-free on the full region: True" in out

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text("schema_version 1\nmodel heisenberg_fm\nlength 2\n")
        code = run(["gap", "--config", str(cfg), "--length", "3"])
        out = capsys.readouterr().out
        assert code == 0
        assert "region size 3" in out

    def test_projector_cache_round_trip(self, tmp_path, monkeypatch):
        from gapcert.lattice import chain_graph
        from gapcert.models import heisenberg_fm
        from gapcert.operators import hamiltonian, kernel_basis

        monkeypatch.setenv("GAPCERT_CACHE", str(tmp_path / "cache"))
        H = hamiltonian(heisenberg_fm(chain_graph(6)), tuple(range(6)))
        first = kernel_basis(H)
        cached = list((tmp_path / "cache").glob("kernel-*.npy"))
        assert len(cached) == 1
        second = kernel_basis(H)
        assert np.array_equal(first, second)
