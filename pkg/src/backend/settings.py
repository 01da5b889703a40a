""" Module with various settings related functions and classes """

# global imports
import os
import json
import logging
from enum import Enum
from pathlib import Path
from typing import TYPE_CHECKING, Any, Dict, Optional, Sequence

# local imports
from .optimizer import ReportModes
from .validation import check_members, check_positive, check_positive_int, check_range, is_proper
from ..errors.errors import InvalidFileFormat, ReadFileError, ValidationError

if TYPE_CHECKING:
    from .harness import ScenarioConfig


logger = logging.getLogger(__name__)


class SupportedScenarios(Enum):
    """
    Class for enumeration of supported experiment scenarios.
    """
    links_sweep = "links_sweep"
    iterations = "iterations"
    subchannels_sweep = "subchannels_sweep"
    nodes_sweep = "nodes_sweep"
    single = "single"


class SupportedMethods(Enum):
    """
    Class for enumeration of supported solution methods.
    """
    exact = "exact"
    greedy = "greedy"
    random = "random"
    local = "local"


# necessary settings keys and their types
KEYS = {
    "scenario": "str", "num_nodes": "int", "antennas": "int", "subchannels": "int", "power_budget": "float",
    "bandwidth": "float", "noise_power": "float", "seeds": ["int"], "methods": ["str"], "restarts": "int",
    "alternations": "int", "report": "str", "sweep_values": ["int"], "distributions": "dict", "output_path": "str",
    "strict_properness": "bool", "record_wall_time": "bool", "workers": "int", "wmmse": "dict",
}
DISTRIBUTION_KEYS = ("data_length_mbits", "compute_speed_mbps", "compute_power_w")
WMMSE_KEYS = {"tolerance": "float", "max_iterations": "int", "bisection_tolerance": "float", "mse_floor": "float",
              "rate_floor": "float"}

# smallest value of the swept variable of every scenario
SWEEP_MINIMUM = {
    SupportedScenarios.links_sweep.value: 0,
    SupportedScenarios.iterations.value: 1,
    SupportedScenarios.subchannels_sweep.value: 1,
    SupportedScenarios.nodes_sweep.value: 2,
    SupportedScenarios.single.value: 0,
}


def check_sweep_values(scenario: str, values: Sequence[int]) -> None:
    """
    Check that every sweep point is a usable value of the scenario's swept variable.

    :param scenario: Scenario name.
    :param values: Sweep points.
    :return: None or raise an exception.
    """
    minimum = SWEEP_MINIMUM.get(scenario, 0)
    for value in values:
        if value < minimum:
            raise ValidationError(f"Sweep values of scenario '{scenario}' should be >= {minimum}, got {value}.")


def _has_type(value: Any, type_name: str) -> bool:
    """Check a JSON value against a type name, ints count as floats, bools count only as bools."""
    if type_name == "float":
        return isinstance(value, (int, float)) and not isinstance(value, bool)
    if type_name == "int":
        return isinstance(value, int) and not isinstance(value, bool)
    return type(value).__name__ == type_name


class Settings(dict):
    """
    Class of experiment settings.
    Used to load, override, write and validate settings.

    methods:
        from_json: Method for loading and validating of settings from json file.
        apply_overrides: Method for replacing file values by command line values.
        validate_settings_dict: Method for validation of settings values inside settings object.
        write_settings_file: Method for writing values from settings dict to settings file.
        load_settings_file: Method for loading values from settings file to settings dict.
        to_scenario_config: Method for conversion into an immutable scenario configuration.

    """

    @classmethod
    def from_json(cls, settings_file_path: str, overrides: Optional[Dict[str, Any]] = None,
                  *args, **kwargs) -> "Settings":
        """
        Class method for creation of settings object by loading it from json file,
        applying overrides and performing validation of values.

        :param settings_file_path: Path to settings file.
        :param overrides: Values replacing the file values, None entries are ignored.
        :param args: Args for cls initialisation.
        :param kwargs: Kwargs for cls initialisation.
        :return: Instance of Settings class with values from json file.
        """
        self = cls(settings_file_path, *args, **kwargs)
        self.load_settings_file()
        if overrides:
            self.apply_overrides(overrides)
        self.validate_settings_dict()
        return self

    def __init__(self, settings_file_path: str, *args, **kwargs) -> None:
        """
        Class of experiment settings.

        :param settings_file_path: Path to settings file.
        :param args: Args for superclass initialisation.
        :param kwargs: Kwargs for superclass initialisation.
        """
        super().__init__(*args, **kwargs)
        self.settings_file_path = settings_file_path

    def apply_overrides(self, overrides: Dict[str, Any]) -> None:
        """
        Replace settings values by the given ones.

        :param overrides: Mapping of top-level keys to values, None entries are skipped.
        :return: None
        """
        for key, value in overrides.items():
            if value is None:
                continue
            if key not in KEYS:
                raise ValidationError(f"Parameter '{key}' can't be overridden, it isn't a settings parameter.")
            self[key] = value

    def validate_settings_dict(self) -> None:
        """
        Function for perform validation of settings values in given settings dict.
        If validation fails, raises an exception with description of problem.

        :return: None or raise an exception.
        """

        # check the presence and types of necessary settings keys
        for key, type_name in KEYS.items():
            if key not in self:
                raise ValidationError(f"Necessary parameter '{key}' isn't specified in settings.")
            value = self[key]
            if isinstance(type_name, list):
                if not isinstance(value, list) or not all(_has_type(e, type_name[0]) for e in value):
                    raise ValidationError(f"Value of settings parameter '{key}' "
                                          f"should have shape and type '{type_name}'.")
            elif not _has_type(value, type_name):
                raise ValidationError(f"Value of settings parameter '{key}' should have type '{type_name}'.")

        # check if scenario, methods and report mode are supported
        check_members("scenario", [self["scenario"]], [s.value for s in SupportedScenarios])
        check_members("methods", self["methods"], [m.value for m in SupportedMethods])
        check_members("report", [self["report"]], [r.value for r in ReportModes])
        if len(set(self["methods"])) != len(self["methods"]):
            raise ValidationError("Settings parameter 'methods' shouldn't repeat a method.")

        # check sizes and physical values
        for key in ("num_nodes", "antennas", "subchannels", "restarts", "alternations", "workers"):
            check_positive_int(key, self[key])
        if self["num_nodes"] < 2:
            raise ValidationError("Settings parameter 'num_nodes' should be at least 2.")
        for key in ("power_budget", "bandwidth", "noise_power"):
            check_positive(key, self[key])
        for seed in self["seeds"]:
            if seed < 0:
                raise ValidationError(f"Seeds should be non-negative integers, got {seed}.")
        check_sweep_values(self["scenario"], self["sweep_values"])

        # check distribution ranges
        for key in DISTRIBUTION_KEYS:
            if key not in self["distributions"]:
                raise ValidationError(f"Necessary parameter 'distributions.{key}' isn't specified in settings.")
            check_range(f"distributions.{key}", self["distributions"][key])

        # check wmmse section
        for key, type_name in WMMSE_KEYS.items():
            if key not in self["wmmse"]:
                raise ValidationError(f"Necessary parameter 'wmmse.{key}' isn't specified in settings.")
            if not _has_type(self["wmmse"][key], type_name):
                raise ValidationError(f"Value of settings parameter 'wmmse.{key}' should have type '{type_name}'.")
            check_positive(f"wmmse.{key}", self["wmmse"][key])

        # check antenna properness
        if not is_proper(self["num_nodes"], self["antennas"]):
            message = (f"Configuration with {self['num_nodes']} nodes and {self['antennas']} antennas isn't proper, "
                       f"2N >= floor(K/2) + 1 is violated.")
            if self["strict_properness"]:
                raise ValidationError(message)
            logger.warning(message)

    def to_scenario_config(self) -> "ScenarioConfig":
        """
        Convert validated settings into an immutable scenario configuration.

        :return: ScenarioConfig object.
        """
        # imported here, harness depends on this module for its enumerations
        from .harness import ScenarioConfig
        return ScenarioConfig.from_settings(self)

    def write_settings_file(self) -> None:
        """
        Method for writing settings dict to settings json file.

        :return: None
        """
        with open(file=self.settings_file_path, encoding="utf-8", mode="w") as settings_file:
            json.dump(self, settings_file, indent=2)

    def load_settings_file(self) -> None:
        """
        Method for loading settings from json settings file and set it values to settings dict.

        :return: None
        """

        # check if settings file exist
        if os.path.exists(self.settings_file_path):
            # check if file format is .json
            if Path(self.settings_file_path).suffix == '.json':
                try:
                    with open(file=self.settings_file_path, encoding="utf-8", mode="r") as settings_file:
                        settings = json.load(settings_file)
                except Exception:
                    raise ReadFileError("Settings file is invalid and cannot be loaded correctly.")
                if not isinstance(settings, dict):
                    raise ReadFileError("Settings file should hold a json object.")
                self.update(settings)
            else:
                raise InvalidFileFormat("Settings file must be in .json format.")
        else:
            raise FileNotFoundError("Settings file didn't exist or placed in a different directory.")
