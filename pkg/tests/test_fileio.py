import pytest

from rss_muodd.errors import InvalidConfigurationError, NoSafeDistanceError
from rss_muodd.fileio import (
    ParseError,
    load_evidence_log,
    load_odd_config,
    load_scenario,
    load_table_config,
    parse_scenario,
)
from rss_muodd.units import G


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_scenario_file(configs):
    s = load_scenario(configs / "figure4_special.yaml")
    assert s.params.a_min_brake == pytest.approx(0.4 * G)
    assert s.initial_gap == 5.0 and s.dt == pytest.approx(0.01)


def test_scenario_bare_number_reports_position(tmp_path):
    path = write(tmp_path, "s.yaml", 'v_r: "25 m/s"\nv_f: 25\n')
    with pytest.raises(ParseError) as exc:
        load_scenario(path)
    assert (exc.value.line, exc.value.column) == (2, 6)
    assert "bare number" in str(exc.value)


def test_scenario_missing_key(tmp_path):
    with pytest.raises(ParseError, match="missing required key"):
        load_scenario(write(tmp_path, "s.yaml", 'v_r: "1 m/s"\n'))


def test_scenario_yaml_syntax_error(tmp_path):
    with pytest.raises(ParseError) as exc:
        load_scenario(write(tmp_path, "s.yaml", "v_r: [1\n"))
    assert exc.value.line is not None


def test_scenario_environment_block():
    data = {
        "v_r": "20 m/s", "v_f": "20 m/s", "rho": "0.5 s", "a_max_accel": "0.1 g",
        "environment": {"rear": {"mu": 0.1}, "front": {"mu": 0.9}},
    }
    s = parse_scenario(data)
    assert (s.params.a_min_brake, s.params.a_max_brake) == pytest.approx((0.981, 8.829))


def test_scenario_cannot_hold(configs):
    with pytest.raises(NoSafeDistanceError):
        load_scenario(configs / "ice_downhill.yaml")


def test_odd_configs_load(configs):
    urban = load_odd_config(configs / "urban_children.yaml")
    assert list(urban.mu_odds) == ["urban_day", "urban_children", "very_low_speed", "defensive_stop"]
    assert urban.odd("defensive_stop").d_min_worst is None
    winter = load_odd_config(configs / "winter_road.yaml")
    assert winter.prior.weights == {"dry": 0.8, "ice": 0.2}


def test_odd_config_without_defensive(tmp_path, configs):
    text = (configs / "urban_children.yaml").read_text().replace("defensive_id: defensive_stop", "")
    with pytest.raises(ParseError, match="defensive"):
        load_odd_config(write(tmp_path, "c.yaml", text))


def test_odd_config_unknown_target(tmp_path, configs):
    text = (configs / "winter_road.yaml").read_text().replace("ice: ice_capable}", "ice: lava}")
    with pytest.raises(ParseError, match="lava"):
        load_odd_config(write(tmp_path, "c.yaml", text))


def test_table_config(configs):
    spec = load_table_config(configs / "figure4_table.yaml")
    assert len(spec.row_bins) == 6 and len(spec.col_bins) == 7
    assert spec.fixed["v_r"].lo == 25.0


def test_evidence_log(tmp_path, configs):
    log = load_evidence_log(configs / "figure5_log.jsonl")
    assert [r["key"] for r in log] == ["time_of_day", "children_nearby", "ball_detected"]
    path = write(tmp_path, "l.jsonl", '{"t": "2 s", "key": "a", "value": 1}\n\n{"t": 1, "key": "b"\n')
    with pytest.raises(ParseError) as exc:
        load_evidence_log(path)
    assert exc.value.line == 3


def test_overlapping_table_bins(tmp_path):
    text = (
        "row_bins: [['0 g', '0.3 g'], ['0.2 g', '0.5 g']]\n"
        "col_bins: [['0.1 g', '0.2 g']]\n"
        "fixed: {v_r: '25 m/s', v_f: '25 m/s', rho: '0.5 s', a_max_accel: '0.3 g'}\n"
    )
    spec = load_table_config(write(tmp_path, "t.yaml", text))
    from rss_muodd.odd import build_partition_table

    with pytest.raises(InvalidConfigurationError):
        build_partition_table(spec.row_bins, spec.col_bins, spec.fixed)
