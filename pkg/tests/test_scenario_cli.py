import csv
import io
import json

import numpy as np
import pytest

from afoutage import cli
from afoutage.interference import field_mean
from afoutage.montecarlo import McSpec
from afoutage.scenario import (
    CSV_COLUMNS,
    PRESET_NAMES,
    ConfigError,
    FixedFieldSpec,
    Scenario,
    calibrate_hop,
    csv_text,
    db_to_linear,
    evaluate_method,
    figure_methods,
    figure_preset,
    linear_to_db,
    load_scenarios,
    with_mc,
)


def small_fixed(**kw):
    base = dict(scenario_id="t/fixed", track="fixed", signal_m=(2, 3), interferer_m=(2, 3),
                sinr_db=15.0, inr_db=0.0, thresholds_db=(-10.0, 0.0, 10.0),
                mc=McSpec(5_000, seed=3, batch=2_000))
    base.update(kw)
    return Scenario(**base)


def parse(text):
    return list(csv.DictReader(io.StringIO(text)))


@pytest.mark.parametrize("name", PRESET_NAMES)
def test_presets_round_trip(name):
    for scn in figure_preset(name):
        again = Scenario.from_json(scn.to_json())
        assert again == scn
        assert again.to_json() == scn.to_json()


def test_calibration_example():
    omega, noise = calibrate_hop(2.0, 10.0, 1.0)
    assert noise == pytest.approx(2.0)
    assert omega == pytest.approx(40.0)


@pytest.mark.parametrize("sinr_db, inr_db", [(15.0, 0.0), (20.0, 20.0), (-3.0, 7.5)])
def test_calibration_round_trip(sinr_db, inr_db):
    ey = 0.37
    sinr, inr = db_to_linear(sinr_db), db_to_linear(inr_db)
    omega, noise = calibrate_hop(ey, sinr, inr)
    assert omega / (noise + ey) == pytest.approx(sinr, rel=1e-12)
    assert ey / noise == pytest.approx(inr, rel=1e-12)


def test_calibration_rejects_bad_input():
    for args in [(0.0, 1.0, 1.0), (1.0, 0.0, 1.0), (1.0, 1.0, -1.0)]:
        with pytest.raises(ConfigError):
            calibrate_hop(*args)


def test_db_helpers():
    assert linear_to_db(db_to_linear(7.3)) == pytest.approx(7.3, rel=1e-14)


def test_hop_calibration_uses_ratios():
    scn = small_fixed()
    sr, rd = scn.link().hop_sr, scn.link().hop_rd
    ey = field_mean(scn.interference_field(0))
    assert sr.signal_omega / (sr.noise_power + ey) == pytest.approx(db_to_linear(15.0))
    assert rd.signal_omega / (rd.noise_power + ey) == pytest.approx(db_to_linear(5.0))
    assert ey / sr.noise_power == pytest.approx(1.0)


def test_preset_contents():
    fig2 = figure_preset("fig2")
    assert [s.signal_m for s in fig2] == [(1, 1), (2, 3), (4, 5)]
    assert all(s.sinr_db == 15.0 and s.inr_db == 0.0 and s.track == "random" for s in fig2)
    assert all(s.field.lambda_mean == 50.0 and s.field.disc_radius == 10.0 for s in fig2)
    assert all(s.pathloss_beta == 5.0 for s in figure_preset("fig5"))
    assert all(s.field.disc_radius == 20.0 for s in figure_preset("fig6"))
    fig11 = figure_preset("fig11")
    assert [s.inr_db for s in fig11] == [10.0, 15.0, 20.0]
    assert all(s.sinr_db == 10.0 and s.signal_m == (2, 3) for s in fig11)
    fig7 = figure_preset("fig7")
    assert all(s.track == "fixed" and isinstance(s.field, FixedFieldSpec) for s in fig7)
    assert [s.interferer_m for s in fig7] == [(1, 1), (2, 3), (6, 7)]
    assert "closed_form_dominant" in figure_methods("fig11")
    with pytest.raises(ConfigError):
        figure_preset("fig99")


def test_rates_and_thresholds_are_exclusive():
    d = small_fixed().to_dict()
    d["rates"] = [0.5, 1.0]
    with pytest.raises(ConfigError):
        Scenario.from_dict(d)
    del d["thresholds_db"]
    scn = Scenario.from_dict(d)
    assert scn.thresholds == pytest.approx([1.0, 3.0])
    with pytest.raises(ConfigError):
        small_fixed(thresholds_db=None)


@pytest.mark.parametrize("patch", [
    {"colour": "red"}, {"track": "hybrid"}, {"signal_m": [0, 1]}, {"thresholds_db": [3.0, 1.0]},
    {"field": {"lambda_mean": 3.0}}, {"relays": 0},
])
def test_bad_configs_rejected(patch):
    d = small_fixed().to_dict()
    d.update(patch)
    with pytest.raises(ConfigError):
        Scenario.from_dict(d)


def test_csv_is_sorted_and_deterministic():
    scns = [small_fixed(scenario_id="t/b"), small_fixed(scenario_id="t/a")]
    methods = ["mc", "lower_bound", "fixed_exact"]
    text = csv_text(scns, methods)
    assert text == csv_text(scns, methods)
    rows = parse(text)
    assert list(rows[0]) == list(CSV_COLUMNS)
    keys = [(r["scenario_id"], r["method"], float(r["gamma_th_db"])) for r in rows]
    assert keys == sorted(keys)
    assert len(rows) == 2 * 3 * 3


def test_lower_bound_below_exact_rowwise():
    scn = small_fixed()
    lb = evaluate_method(scn, "lower_bound").values
    ex = evaluate_method(scn, "fixed_exact").values
    assert np.all(lb <= ex + 1e-9)


def test_wrong_track_method_is_captured():
    res = evaluate_method(small_fixed(), "gga_exact")
    assert res.values is None and "fixed_exact" in res.error
    assert evaluate_method(small_fixed(), "nope").error


def test_with_mc_overrides():
    scn = with_mc(small_fixed(), trials=10, seed=9)
    assert scn.mc.trials == 10 and scn.mc.seed == 9 and scn.mc.batch == 2_000


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "cfg.json"
    path.write_text(small_fixed().to_json())
    return path


def test_load_scenarios_accepts_list(tmp_path):
    path = tmp_path / "many.json"
    path.write_text(json.dumps([small_fixed().to_dict(), small_fixed(scenario_id="x").to_dict()]))
    assert [s.scenario_id for s in load_scenarios(str(path))] == ["t/fixed", "x"]


def test_cli_outage_writes_csv(config_file, tmp_path):
    out = tmp_path / "o.csv"
    assert cli.main(["outage", "--config", str(config_file), "--methods",
                     "fixed_exact,lower_bound", "--out", str(out)]) == 0
    rows = parse(out.read_text())
    assert {r["method"] for r in rows} == {"fixed_exact", "lower_bound"}


def test_cli_mc_is_byte_identical(config_file, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert cli.main(["mc", "--config", str(config_file), "--trials", "4000",
                         "--seed", "11", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_cli_default_output_dir(config_file, tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    assert cli.main(["outage", "--config", str(config_file)]) == 0
    assert (tmp_path / "env" / "t_fixed.csv").exists()


def test_cli_figure(tmp_path):
    assert cli.main(["figure", "fig11", "--out", str(tmp_path), "--trials", "2000"]) == 0
    rows = parse((tmp_path / "fig11.csv").read_text())
    assert {r["method"] for r in rows} == {"fixed_exact", "closed_form_dominant", "mc"}
    assert len({r["scenario_id"] for r in rows}) == 3


def test_cli_total_failure_exit_code(config_file, tmp_path):
    assert cli.main(["outage", "--config", str(config_file), "--methods", "gga_exact",
                     "--out", str(tmp_path / "f.csv")]) == 1


def test_cli_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert cli.main(["validate", "--config", str(bad)]) == 2
    assert cli.main(["validate", "--config", str(tmp_path / "missing.json")]) == 2
    assert cli.main(["outage", "--config", str(bad), "--methods", "bogus"]) == 2
    assert "error" in capsys.readouterr().err


def test_cli_validate_and_fit(config_file, tmp_path, capsys):
    assert cli.main(["validate", "--config", str(config_file)]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["sr"]["signal_m"] == 2
    rnd = tmp_path / "rnd.json"
    rnd.write_text(figure_preset("fig2")[0].to_json())
    assert cli.main(["fit-gga", "--config", str(rnd)]) == 0
    fits = json.loads(capsys.readouterr().out)
    assert len(fits) == 2 and all(f["converged"] for f in fits)
    assert cli.main(["fit-gga", "--config", str(config_file)]) == 1
