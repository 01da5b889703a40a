""" Tests of settings loading and validation """


# global imports
import json
import logging
from pathlib import Path
import pytest

# local imports
from src.backend.model import MBIT
from src.backend.settings import Settings
from src.errors.errors import InvalidFileFormat, ReadFileError, ValidationError


DEFAULT_SETTINGS = Path(__file__).resolve().parent.parent / "settings.json"


@pytest.fixture
def settings_data():
    return json.loads(DEFAULT_SETTINGS.read_text(encoding="utf-8"))


@pytest.fixture
def write_settings(tmp_path):
    def write(data, name="settings.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return write


def test_default_settings_file_is_valid():
    settings = Settings.from_json(str(DEFAULT_SETTINGS))
    assert settings["scenario"] == "single"
    cfg = settings.to_scenario_config()
    assert cfg.num_nodes == settings["num_nodes"]
    assert cfg.seeds == tuple(settings["seeds"])


def test_ranges_are_converted_to_bits(settings_data, write_settings):
    settings_data["distributions"]["data_length_mbits"] = [2, 4]
    cfg = Settings.from_json(write_settings(settings_data)).to_scenario_config()
    assert cfg.data_length_range == (2 * MBIT, 4 * MBIT)
    assert cfg.compute_power_range == (0.5, 1.0)


@pytest.mark.parametrize("key", ["scenario", "seeds", "distributions", "wmmse"])
def test_missing_key(settings_data, write_settings, key):
    del settings_data[key]
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data))


@pytest.mark.parametrize("key, value", [
    ("num_nodes", 6.5), ("num_nodes", True), ("seeds", [1, "2"]), ("methods", "greedy"), ("power_budget", "5"),
    ("strict_properness", 0),
])
def test_wrong_type(settings_data, write_settings, key, value):
    settings_data[key] = value
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data))


@pytest.mark.parametrize("key, value", [
    ("scenario", "sweep_everything"), ("methods", ["greedy", "optimal"]), ("methods", ["greedy", "greedy"]),
    ("num_nodes", 1), ("antennas", 0), ("power_budget", -1.0), ("seeds", [-3]), ("sweep_values", [-1]),
    ("report", "worst"), ("report", 1),
])
def test_unsupported_value(settings_data, write_settings, key, value):
    settings_data[key] = value
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data))


@pytest.mark.parametrize("scenario, values", [
    ("subchannels_sweep", [0, 1]), ("iterations", [0, 5]), ("nodes_sweep", [1]), ("nodes_sweep", [0, 4]),
    ("links_sweep", [-1, 0]),
])
def test_sweep_values_below_minimum(settings_data, write_settings, scenario, values):
    settings_data.update(scenario=scenario, sweep_values=values)
    with pytest.raises(ValidationError, match="should be >="):
        Settings.from_json(write_settings(settings_data))


@pytest.mark.parametrize("scenario, values", [
    ("subchannels_sweep", [1, 2]), ("iterations", [1]), ("nodes_sweep", [2, 4]), ("links_sweep", [0, 1]),
])
def test_sweep_values_at_minimum(settings_data, write_settings, scenario, values):
    settings_data.update(scenario=scenario, sweep_values=values)
    cfg = Settings.from_json(write_settings(settings_data)).to_scenario_config()
    assert cfg.sweep_values == tuple(values)


def test_report_mode_reaches_config(settings_data, write_settings):
    assert Settings.from_json(write_settings(settings_data)).to_scenario_config().report == "best"
    settings_data["report"] = "mean"
    assert Settings.from_json(write_settings(settings_data)).to_scenario_config().report == "mean"


@pytest.mark.parametrize("value", [[5, 1], [0, 1], [1], "1-20"])
def test_bad_distribution_range(settings_data, write_settings, value):
    settings_data["distributions"]["compute_speed_mbps"] = value
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data))


def test_bad_wmmse_section(settings_data, write_settings):
    settings_data["wmmse"]["tolerance"] = 0.0
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data))


def test_strict_properness_rejects(settings_data, write_settings):
    settings_data.update(num_nodes=12, antennas=1, strict_properness=True)
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data))


def test_improper_configuration_warns(settings_data, write_settings, caplog):
    settings_data.update(num_nodes=12, antennas=1)
    with caplog.at_level(logging.WARNING):
        Settings.from_json(write_settings(settings_data))
    assert "isn't proper" in caplog.text


def test_overrides_replace_file_values(write_settings, settings_data):
    settings = Settings.from_json(write_settings(settings_data),
                                  {"num_nodes": 8, "seeds": [0, 1], "methods": None})
    assert settings["num_nodes"] == 8
    assert settings["seeds"] == [0, 1]
    assert settings["methods"] == settings_data["methods"]


def test_unknown_override(write_settings, settings_data):
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data), {"temperature": 20})


def test_overrides_are_validated(write_settings, settings_data):
    with pytest.raises(ValidationError):
        Settings.from_json(write_settings(settings_data), {"subchannels": 0})


def test_wrong_file_format(write_settings, settings_data):
    with pytest.raises(InvalidFileFormat):
        Settings.from_json(write_settings(settings_data, name="settings.txt"))


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        Settings.from_json(str(tmp_path / "absent.json"))


@pytest.mark.parametrize("content", ["{not json", "[1, 2, 3]"])
def test_unreadable_file(tmp_path, content):
    path = tmp_path / "broken.json"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(ReadFileError):
        Settings.from_json(str(path))


def test_write_and_load_back(tmp_path, settings_data):
    settings = Settings(str(tmp_path / "copy.json"), settings_data)
    settings.write_settings_file()
    assert Settings.from_json(str(tmp_path / "copy.json")) == settings_data
