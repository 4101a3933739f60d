import pytest

from helpernet import ConfigurationError, default_scenario, load_scenario, save_scenario
from helpernet.scenario import scenario_from_mapping, scenario_to_mapping, with_access, with_sizes


def test_defaults_reproduce_the_reference_setup():
    scenario = default_scenario()
    table = scenario.success_table()
    assert table.p_su == pytest.approx(0.903, abs=1e-3)
    assert table.p_du_given_s == pytest.approx(0.029, abs=1e-3)
    profile = scenario.hit_profile()
    assert profile.q_u == pytest.approx(0.865, abs=1e-3)
    assert profile.p_hd == pytest.approx(0.206, abs=1e-3)
    assert profile.p_hs == pytest.approx(0.221, abs=1e-3)


def test_empty_file_is_all_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    assert load_scenario(path) == default_scenario()


def test_partial_file_merges_with_defaults(tmp_path):
    path = tmp_path / "partial.yaml"
    path.write_text("catalog:\n  zipf_shape: 1.2\naccess:\n  alpha: 0.4\n")
    scenario = load_scenario(path)
    assert scenario.catalog.zipf_shape == 1.2
    assert scenario.catalog.file_count == 10_000
    assert scenario.access.alpha == 0.4
    assert scenario.access.q_s == 0.9


def test_round_trip_field_for_field(tmp_path):
    original = scenario_from_mapping(
        {
            "phy": {"noise_power_w": 2e-11, "fading_v_per_link": {"S_D": 0.3}},
            "catalog": {"file_count": 5000, "zipf_shape": 0.8},
            "caches": {"m_u": 100, "m_d": 500, "m_s": 900},
            "access": {"q_s": 0.123456789, "arrival_rate": 0.31},
            "modes": {"mu_mode": "corrected", "request_mode": "zipf-exact"},
        }
    )
    path = tmp_path / "scenario.yaml"
    save_scenario(original, path)
    assert load_scenario(path) == original


def test_negative_distance_names_the_link():
    with pytest.raises(ConfigurationError, match="S_U"):
        scenario_from_mapping({"phy": {"distance_m": {"S_U": -5.0}}})


def test_unknown_fields_are_named():
    with pytest.raises(ConfigurationError, match="phy.nois_power_w"):
        scenario_from_mapping({"phy": {"nois_power_w": 1e-11}})
    with pytest.raises(ConfigurationError, match="access.qS"):
        scenario_from_mapping({"access": {"qS": 0.5}})
    with pytest.raises(ConfigurationError, match="turbo"):
        scenario_from_mapping({"turbo": {}})


def test_out_of_range_values_are_rejected():
    with pytest.raises(ConfigurationError, match="access"):
        scenario_from_mapping({"access": {"q_s": 1.5}})
    with pytest.raises(ConfigurationError, match="modes.mu_mode"):
        scenario_from_mapping({"modes": {"mu_mode": "exact"}})
    with pytest.raises(ConfigurationError, match="file_count"):
        scenario_from_mapping({"catalog": {"file_count": 2.5}})


def test_cache_overflow_is_rejected():
    with pytest.raises(ConfigurationError, match="exceeds"):
        scenario_from_mapping({"caches": {"m_u": 9000}})


def test_mapping_round_trip_without_files():
    scenario = default_scenario()
    assert scenario_from_mapping(scenario_to_mapping(scenario)) == scenario


def test_with_helpers():
    scenario = default_scenario()
    assert with_access(scenario, alpha=0.2).access.alpha == 0.2
    assert with_sizes(scenario, m_d=0).sizes.m_d == 0
    with pytest.raises(ConfigurationError):
        with_sizes(scenario, m_u=9500)


def test_invalid_yaml_is_a_configuration_error(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("phy: [unclosed\n")
    with pytest.raises(ConfigurationError):
        load_scenario(path)


def test_sim_scenario_carries_pmf_only_for_zipf_exact():
    scenario = default_scenario()
    assert scenario.sim_scenario().pmf is None
    zipf = scenario_from_mapping({"modes": {"request_mode": "zipf-exact"}})
    scen = zipf.sim_scenario()
    assert scen.pmf is not None and scen.placement is not None
