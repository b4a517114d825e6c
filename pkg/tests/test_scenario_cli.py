import csv
import hashlib
import json
import textwrap

import pytest

from hsphom import cli
from hsphom.runner import run_scenario
from hsphom.scenario import ScenarioError, load_scenario, shipped_scenarios, validate_scenario

SHIPPED = ["fig2_purity", "fig4_g2", "fig6_dip"]

DIP = """\
name: t_dip
outputs: [hom_dip]
statistics:
  alpha_sq: 0.05
  pair_probability: 0.05
  transmission: 0.5
hom:
  bandwidth_ghz: 80.0
  delays_ps: {start: -5, stop: 5, count: 3}
"""


def write(tmp_path, text, name="s.scenario"):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return p


def test_shipped_listed():
    assert set(SHIPPED) <= set(shipped_scenarios())


@pytest.mark.parametrize("name", SHIPPED)
def test_shipped_validate_clean(name):
    assert validate_scenario(name) == []


class TestDiagnostics:
    def test_negative_bandwidth(self, tmp_path):
        p = write(tmp_path, DIP.replace("bandwidth_ghz: 80.0", "bandwidth_ghz: -80.0"))
        diags = validate_scenario(p)
        assert len(diags) == 1
        assert diags[0].key == "hom.bandwidth_ghz"
        assert diags[0].line == 8
        assert "> 0" in diags[0].message or "positive" in diags[0].message

    def test_unknown_preset_lists_available(self, tmp_path):
        text = """\
        name: t
        outputs: [jsa_dump]
        pump: {center_wavelength_nm: 780}
        crystal: {preset: bulk-ppln}
        """
        diags = validate_scenario(write(tmp_path, text))
        assert len(diags) == 1
        assert "paper-like" in diags[0].message and "toy-constant-index" in diags[0].message

    def test_unknown_key(self, tmp_path):
        diags = validate_scenario(write(tmp_path, DIP.replace("  transmission", "  transmision")))
        keys = [d.key for d in diags]
        assert "statistics.transmision" in keys

    def test_sweep_variable_must_be_declared(self, tmp_path):
        text = DIP + "sweep:\n  variable: statistics.n_seed\n  values: [1, 2]\n"
        diags = validate_scenario(write(tmp_path, text))
        assert any(d.key == "sweep.variable" for d in diags)

    def test_yaml_error_has_line(self, tmp_path):
        diags = validate_scenario(write(tmp_path, "name: x\noutputs: [hom_dip\nstatistics: {}\n"))
        assert len(diags) == 1 and diags[0].line is not None
        assert "parse error" in diags[0].message

    def test_duplicate_key(self, tmp_path):
        diags = validate_scenario(write(tmp_path, DIP + "name: again\n"))
        assert any("duplicate" in d.message for d in diags)

    def test_load_raises(self, tmp_path):
        with pytest.raises(ScenarioError):
            load_scenario(write(tmp_path, DIP.replace("80.0", "zero")))

    def test_str_names_line_and_key(self, tmp_path):
        d = validate_scenario(write(tmp_path, DIP.replace("80.0", "-1")))[0]
        assert str(d).startswith("line 8: hom.bandwidth_ghz:")


class TestCli:
    def test_validate_ok(self, capsys):
        assert cli.main(["validate", "fig4_g2"]) == 0
        assert capsys.readouterr().out.strip() == "ok"

    def test_presets(self, capsys):
        assert cli.main(["presets", "list"]) == 0
        out = capsys.readouterr().out
        assert "paper-like" in out and "fig2_purity" in out

    def test_config_error_exit_2(self, tmp_path, capsys):
        p = write(tmp_path, DIP.replace("bandwidth_ghz: 80.0", "bandwidth_ghz: -80.0"))
        assert cli.main(["run", str(p), "--out-dir", str(tmp_path / "o")]) == 2
        assert "hom.bandwidth_ghz" in capsys.readouterr().err
        assert cli.main(["validate", str(p)]) == 2

    def test_physics_error_exit_3(self, tmp_path, capsys):
        p = write(tmp_path, DIP.replace("pair_probability: 0.05", "pair_probability: 0.9").replace("0.5\n", "0.2\n"))
        assert cli.main(["run", str(p), "--out-dir", str(tmp_path / "o")]) == 3
        assert "physics error in module photstat" in capsys.readouterr().err

    def test_io_error_exit_4(self, tmp_path):
        p = write(tmp_path, DIP)
        blocker = tmp_path / "file"
        blocker.write_text("")
        assert cli.main(["run", str(p), "--out-dir", str(blocker)]) == 4

    def test_bad_grid_points(self, tmp_path):
        assert cli.main(["run", "fig2_purity", "--grid-points", "2", "--out-dir", str(tmp_path)]) == 2


class TestRun:
    def test_manifest(self, tmp_path):
        out = tmp_path / "o"
        assert cli.main(["run", "fig6_dip", "--out-dir", str(out), "--seed-metadata", "tag-7"]) == 0
        m = json.loads((out / "manifest.json").read_text())
        assert m["scenario_name"] == "fig6_dip"
        assert m["parameters_echo"]["seed_metadata"] == "tag-7"
        paths = [o["path"] for o in m["outputs"]]
        assert "hom_dip_pair_probability_0.05.csv" in paths and "hom_dip_pair_probability_0.01.csv" in paths
        for o in m["outputs"]:
            assert hashlib.sha256((out / o["path"]).read_bytes()).hexdigest() == o["sha256"]

    def test_fig6_depth_ordering(self, tmp_path):
        run_scenario("fig6_dip", tmp_path)

        def depth(tag):
            with open(tmp_path / f"hom_dip_pair_probability_{tag}.csv") as fh:
                rows = list(csv.DictReader(fh))
            return 1 - min(float(r["coincidence_normalized"]) for r in rows)

        assert depth("0.01") > depth("0.05")
        assert depth("0.05") == pytest.approx(0.4672290720311486, abs=1e-9)

    def test_fig4_curve(self, tmp_path):
        run_scenario("fig4_g2", tmp_path)
        with open(tmp_path / "dfg_g2_curve.csv") as fh:
            rows = [(float(r["n_seed"]), float(r["g2"])) for r in csv.DictReader(fh)]
        assert len(rows) == 201
        assert rows[0] == (0.0, 1.2)
        assert rows[60] == (30.0, pytest.approx(1 + 1 / 35, abs=1e-12))

    def test_fig2_shape(self, tmp_path):
        run_scenario("fig2_purity", tmp_path)
        with open(tmp_path / "purity_sweep.csv") as fh:
            rows = list(csv.DictReader(fh))
        purity = [float(r["purity"]) for r in rows]
        assert rows[2]["width_nm"] == "0.20000000000000001"
        assert purity[0] > 0.95
        assert all(b <= a + 1e-3 for a, b in zip(purity, purity[1:]))
        summary = json.loads((tmp_path / "purity_sweep_summary.json").read_text())
        # 10 nm still clips the idler marginal, so the tail sits just above
        assert summary["unfiltered_purity"] - 1e-3 <= purity[-1] <= 1.2 * summary["unfiltered_purity"]

    def test_grid_override_echoed(self, tmp_path):
        run_scenario("fig2_purity", tmp_path, grid_points=384)
        m = json.loads((tmp_path / "manifest.json").read_text())
        assert m["parameters_echo"]["grid"]["points"] == 384

    def test_filter_below_grid_step_is_physics_error(self, tmp_path, capsys):
        # at 128 points the 0.1 nm filter falls between grid points
        assert cli.main(["run", "fig2_purity", "--grid-points", "128", "--out-dir", str(tmp_path)]) == 3
        assert "removes all amplitude" in capsys.readouterr().err

    def test_jsa_dump(self, tmp_path):
        text = """\
        name: dump
        outputs: [jsa_dump]
        pump: {center_wavelength_nm: 780}
        crystal: {preset: paper-like}
        grid: {points: 32}
        """
        report = run_scenario(write(tmp_path, text), tmp_path / "o")
        names = sorted(p.name for p in report.outputs)
        assert names == ["jsa.bin", "jsa.csv", "manifest.json"]
        assert (tmp_path / "o" / "jsa.bin").stat().st_size == 48 + 32 * 32 * 16
