import csv
import io
import math

import numpy as np
import pytest

from conftest import FIXTURES
from dhtbound.cli import (
    PRESETS,
    RunConfig,
    emit_plot_data,
    main,
    preset_grid,
    run_discrete,
    run_gaussian_sweep,
    sweep_columns,
    write_csv,
)
from dhtbound.errors import ValidationError
from dhtbound.scenario_io import load_scenario


def read_csv(path):
    return list(csv.DictReader(open(path)))


def run_cli(args, tmp_path, name="out.csv"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out


class TestGaussianSweep:
    def test_fig2_preset(self, tmp_path):
        code, out = run_cli(["--preset", "fig2"], tmp_path)
        assert code == 0
        rows = read_csv(out)
        assert len(rows) == 60
        for r in rows:
            rho0, rw, new = float(r["rho0"]), float(r["rw_bound"]), float(r["new_bound"])
            assert 0.7 < rho0 < 1
            assert new <= rw
            if rho0 >= math.sqrt(0.7):
                assert new == rw and r["active_branch"] == "rw"
            assert float(r["new_bound_norm"]) == pytest.approx(new / (rho0 - 0.7) ** 2, rel=1e-10)

    def test_fig3_preset_flags_centralized(self, tmp_path):
        code, out = run_cli(["--preset", "fig3"], tmp_path)
        rows = read_csv(out)
        assert code == 0 and len(rows) == 60
        assert all(r["centralized_large"] == "1" for r in rows)
        assert all(float(r["rho1"]) == 0.25 and float(r["R"]) == 0.2 for r in rows)

    def test_two_point_sweep(self, tmp_path):
        code, out = run_cli(["--rho1", "0.5", "--rate", "0.3", "--rho0-range", "0.6:0.9:2"], tmp_path)
        assert code == 0 and len(read_csv(out)) == 2

    def test_sweep_outside_region_rejected_before_evaluation(self, tmp_path):
        code, out = run_cli(["--rho1", "0.7", "--rate", "0.5", "--rho0-range", "0.6:0.9:5"], tmp_path)
        assert code == 2 and not out.exists()

    @pytest.mark.parametrize("text", ["0.8:0.9", "0.8:0.9:1", "a:b:c"])
    def test_bad_range(self, text, tmp_path):
        assert run_cli(["--rho1", "0.7", "--rate", "0.5", "--rho0-range", text], tmp_path)[0] == 2

    def test_deterministic_bytes(self, tmp_path):
        _, a = run_cli(["--preset", "fig2", "--seed", "0"], tmp_path, "a.csv")
        _, b = run_cli(["--preset", "fig2", "--seed", "0"], tmp_path, "b.csv")
        assert a.read_bytes() == b.read_bytes()

    def test_bits_are_nats_over_ln2(self, tmp_path):
        base = ["--rho1", "0.7", "--rate", "0.5", "--rho0-range", "0.75:0.95:7"]
        _, n = run_cli(base, tmp_path, "n.csv")
        _, b = run_cli([*base, "--units", "bits"], tmp_path, "b.csv")
        for rn, rb in zip(read_csv(n), read_csv(b)):
            for c in ("rw_bound", "new_bound", "centralized"):
                assert float(rb[c]) == pytest.approx(float(rn[c]) / math.log(2), rel=1e-11)
            assert rb["rho"] == rn["rho"]

    def test_twelve_significant_digits(self, tmp_path):
        _, out = run_cli(["--rho1", "0.7", "--rate", "0.5", "--rho0-range", "0.75:0.95:3"], tmp_path)
        v = read_csv(out)[0]["rw_bound"]
        assert len(v.replace(".", "").replace("-", "").lstrip("0").split("e")[0]) <= 12

    def test_bounds_selection(self, tmp_path):
        _, out = run_cli(["--preset", "fig2", "--bounds", "new"], tmp_path)
        assert "rw_bound" not in read_csv(out)[0] and "new_bound" in read_csv(out)[0]
        assert run_cli(["--preset", "fig2", "--bounds", "sha"], tmp_path)[0] == 2

    def test_point_mode(self, tmp_path):
        code, out = run_cli(["--mode", "gaussian-point", "--rho1", "0.7", "--rho0", "0.75", "--rate", "0.5"], tmp_path)
        r = read_csv(out)[0]
        assert code == 0
        assert float(r["new_bound"]) == pytest.approx(0.007570, abs=1e-5)
        assert r["active_branch"] == "new" and r["binding"] == "Y"

    def test_rows_in_sweep_order(self):
        cfg = RunConfig(rho1=0.3, rate=0.4, rho0=list(np.linspace(0.35, 0.99, 50)))
        rows = run_gaussian_sweep(cfg)
        assert [r["rho0"] for r in rows] == cfg.rho0

    def test_presets_documented_parameters(self):
        assert PRESETS["fig2"]["rho1"] == 0.7 and PRESETS["fig2"]["rate"] == 0.5
        assert PRESETS["fig3"]["rho1"] == 0.25 and PRESETS["fig3"]["rate"] == 0.2
        g = preset_grid(0.7, 60)
        assert len(g) == 60 and g[0] > 0.7 and g[-1] < 1


class TestPlotData:
    def sweep(self, normalize):
        cfg = RunConfig(rho1=0.7, rate=0.5, rho0=preset_grid(0.7, 60), normalize=normalize,
                        bounds=("rw", "new", "centralized"))
        return write_csv(run_gaussian_sweep(cfg), sweep_columns(cfg.bounds, normalize))

    def test_five_numeric_columns(self):
        text = emit_plot_data(self.sweep(True), True, "fig2")
        data = [ln for ln in text.splitlines() if not ln.startswith("#")]
        assert len(data) == 60
        assert all(len(ln.split()) == 5 for ln in data)
        np.array([[float(x) for x in ln.split()] for ln in data])
        assert text.startswith("# columns: rho0 rho rw new centralized")

    def test_normalize_changes_only_normalized_columns(self):
        raw = list(csv.DictReader(io.StringIO(self.sweep(False))))
        norm = list(csv.DictReader(io.StringIO(self.sweep(True))))
        for a, b in zip(raw, norm):
            for k, v in a.items():
                assert b[k] == v
            assert set(b) - set(a) == {"rw_bound_norm", "new_bound_norm", "centralized_norm"}

    def test_empty_csv_rejected(self):
        with pytest.raises(ValidationError):
            emit_plot_data("rho0,rho\n", False)

    def test_cli_writes_identical_files(self, tmp_path):
        for name in ("a", "b"):
            assert main(["--preset", "fig2", "--out", str(tmp_path / f"{name}.csv"),
                         "--plot-data", str(tmp_path / f"{name}.dat")]) == 0
        assert (tmp_path / "a.dat").read_bytes() == (tmp_path / "b.dat").read_bytes()


class TestDiscrete:
    def test_equal_laws_all_zero(self, tmp_path):
        code, out = run_cli(["--mode", "discrete", "--scenario", str(FIXTURES / "equal_laws.json")], tmp_path)
        assert code == 0
        rows = read_csv(out)
        assert rows and all(r["status"] == "ok" for r in rows)
        assert all(abs(float(r["value"])) <= 1e-9 for r in rows)

    def test_independence_fixture(self):
        loaded = load_scenario(FIXTURES / "independence.json")
        rep = run_discrete(RunConfig(mode="discrete"), loaded)
        rw = rep.value("rw", "const")
        assert math.isfinite(rw)
        assert rep.value("ac") <= rw + 1e-6
        # the copy receiver is outside R: reported, not fatal
        bad = [r for r in rep.rows if r["bound"] == "rw" and r["aux"] == "copy"]
        assert bad[0]["status"] == "invalid" and "not in R" in bad[0]["detail"]

    def test_per_receiver_minimum(self):
        loaded = load_scenario(FIXTURES / "independence.json")
        rep = run_discrete(RunConfig(mode="discrete", bounds=("g", "addsub")), loaded)
        for b in ("g", "addsub"):
            assert rep.value(b, "min") == min(rep.value(b, "const"), rep.value(b, "copy"))

    def test_chain_and_augmentation(self, tmp_path):
        code, out = run_cli(["--mode", "discrete", "--scenario", str(FIXTURES / "aux_chain.json"),
                             "--bounds", "centralized,chain,jaug", "--oracle"], tmp_path)
        rows = {(r["bound"], r["aux"]): r for r in read_csv(out)}
        assert code == 0
        assert float(rows[("jaug", "jx")]["value"]) == pytest.approx(float(rows[("centralized", "-")]["value"]), abs=1e-6)
        assert rows[("chain", "two")]["status"] == "ok"

    def test_bits(self):
        loaded = load_scenario(FIXTURES / "minimal.json")
        nats = run_discrete(RunConfig(mode="discrete", bounds=("centralized",)), loaded)
        bits = run_discrete(RunConfig(mode="discrete", bounds=("centralized",), units="bits"), loaded)
        assert bits.value("centralized") == nats.value("centralized") / math.log(2)

    def test_exit_codes(self, tmp_path):
        assert main(["--mode", "discrete", "--scenario", str(FIXTURES / "bad_row.json")]) == 2
        assert main(["--mode", "discrete", "--scenario", str(FIXTURES / "broken.json")]) == 2
        assert main(["--mode", "discrete"]) == 2
        assert main(["--mode", "discrete", "--scenario", str(FIXTURES / "minimal.json"), "--terminal", "x"]) == 2

    def test_evaluation_error_exit_code(self, tmp_path, capsys):
        # identity channels under both laws with Q_X on a single symbol: every
        # admissible Qhat_X makes both divergences infinite
        import json

        doc = json.loads((FIXTURES / "minimal.json").read_text())
        doc["p_xy"] = [[0.5, 0.0], [0.0, 0.5]]
        doc["q_xy"] = [[0.5, 0.0], [0.0, 0.5]]
        doc["aux"] = {"id": {"p_z_given_x": [[1, 0], [0, 1]], "q_z_given_x": [[0.5, 0.5], [0.5, 0.5]]}}
        path = tmp_path / "s.json"
        path.write_text(json.dumps(doc))
        code = main(["--mode", "discrete", "--scenario", str(path), "--bounds", "g"])
        err = capsys.readouterr().err
        assert code in (0, 3)
        if code == 3:
            assert "g_bound[id]" in err
