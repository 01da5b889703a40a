""" Main application module """


# global imports
import logging
import datetime
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional

# local imports
from ..backend.harness import ResultRow, ScenarioConfig, emit_plot_data, run_scenario, scenario_summary, \
    write_csv, write_link_summary, write_plot_data
from ..backend.settings import Settings
from ..errors.errors import ValidationError


logger = logging.getLogger(__name__)


class Application(ABC):
    """
    Base version of main application class.
    Used to work with experiment settings and run experiments.

    attributes:
        settings_file_path: Path to settings file.
        settings: Dictionary with all experiment settings.
        config: Immutable scenario configuration built from settings.

    methods:
        start: Method for running the configured experiment.

    """

    settings_file_path: str
    settings: Settings
    config: ScenarioConfig

    @abstractmethod
    def __init__(self, *args, **kwargs) -> None:
        """ Initialization of class object """

    @abstractmethod
    def start(self, *args, **kwargs) -> Any:
        """ Run the application """


class ExperimentApplication(Application):
    """
    Main class of application.
    Loads and validates settings, runs the scenario and writes result and plot data files.

    """

    def __init__(self, settings_file_path: str, overrides: Optional[Dict[str, Any]] = None, *args, **kwargs) -> None:
        """
        Main class of application.

        While initialized, load json file with settings by settings_file_path, apply command line overrides
        and build the scenario configuration.

        :param settings_file_path: path for json file with settings.
        :param overrides: Settings values given on the command line.
        :param args: Args of Application.
        :param kwargs: Kwargs of Application.
        :return: None.

        """
        super().__init__(*args, **kwargs)
        self.settings_file_path = settings_file_path

        try:
            self.settings = Settings.from_json(self.settings_file_path, overrides)
            self.config = self.settings.to_scenario_config()
        except ValidationError as error:
            logger.error("Settings file '%s' is invalid: %s", settings_file_path, error)
            raise

    @property
    def plot_data_path(self) -> str:
        """Path of the aggregate table, next to the result file."""
        path = Path(self.config.output_path)
        return str(path.with_name(f"{path.stem}_plot.csv"))

    @property
    def link_summary_path(self) -> str:
        """Path of the per-row allocation summary, next to the result file."""
        path = Path(self.config.output_path)
        return str(path.with_name(f"{path.stem}_links.json"))

    def start(self, *args, **kwargs) -> List[ResultRow]:
        """
        Method what runs the configured scenario and writes its files.

        :param args: args
        :param kwargs: kwargs
        :return: Result rows.
        """
        super().start(*args, **kwargs)
        logger.info("D2D energy experiment running (%s): %s", datetime.datetime.now(), scenario_summary(self.config))

        rows = run_scenario(self.config)
        write_csv(rows, self.config.output_path, self.config)
        write_plot_data(emit_plot_data(rows), self.plot_data_path)
        write_link_summary(rows, self.link_summary_path)

        failed = sum(not row.ok for row in rows)
        if failed:
            logger.warning("%d of %d rows are error rows.", failed, len(rows))
        logger.info("Results written to '%s', '%s' and '%s'.", self.config.output_path, self.plot_data_path,
                    self.link_summary_path)
        logger.info("D2D energy experiment finished (%s)", datetime.datetime.now())
        return rows
