"""
Experiment front-end: seeded instance generation, scenario sweeps and CSV output.
"""


# global imports
import csv
import json
import time
import hashlib
import logging
import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple
import numpy as np

# local imports
from .mimo import WmmseConfig
from .model import MBIT, ChannelSet, EnergyBreakdown, Link, NetworkInstance, NodeProfile, link_rates
from .optimizer import ReportModes, RunConfig, Solution, alternate, local_baseline, random_wmmse_baseline
from .settings import Settings, SupportedMethods, SupportedScenarios, check_sweep_values
from .validation import check_members, check_positive, check_positive_int, check_range, is_proper
from ..errors.errors import ValidationError


logger = logging.getLogger(__name__)

CSV_SCHEMA = "d2d-energy/1"
CSV_COLUMNS = ("scenario", "seed", "method", "sweep_var", "sweep_value", "E_P_joules", "E_M_joules", "E_F_joules",
               "num_links", "alternations", "wall_ms", "status")
PLOT_COLUMNS = ("scenario", "method", "sweep_var", "sweep_value", "step", "count", "mean_E_P_joules",
                "best_E_P_joules", "mean_E_M_joules", "mean_E_F_joules")

# sweep points used when sweep_values is empty
DEFAULT_SWEEPS = {
    SupportedScenarios.subchannels_sweep.value: (1, 2, 3),
    SupportedScenarios.nodes_sweep.value: (4, 6, 8, 10, 12),
    SupportedScenarios.iterations.value: (5, 15),
}


@dataclass(frozen=True)
class ScenarioConfig:
    """
    Immutable configuration of one experiment.

    attributes:
        scenario: links_sweep, iterations, subchannels_sweep, nodes_sweep or single.
        num_nodes: Number of nodes K.
        antennas: Antennas per node N.
        subchannels: Number of subchannels S.
        power_budget: Power budget P in watts.
        bandwidth: Subchannel bandwidth W in hertz.
        noise_power: Noise power sigma^2.
        seeds: Instance seeds.
        methods: Subset of exact, greedy, random and local.
        restarts: Restarts per optimizer run.
        alternations: Alternation cap per restart.
        report: "best" for the lowest-energy restart, "mean" for the mean over restarts.
        sweep_values: Sweep points, scenario defaults when empty.
        data_length_range: Task length range in bits.
        compute_speed_range: Compute speed range in bits per second.
        compute_power_range: Compute power range in watts.
        output_path: CSV path.
        strict_properness: Reject improper configurations instead of warning.
        record_wall_time: Write measured wall times instead of 0.
        workers: Worker processes, 1 runs in-process.
        wmmse: Settings of the signal-design step.

    """
    scenario: str = SupportedScenarios.single.value
    num_nodes: int = 10
    antennas: int = 6
    subchannels: int = 3
    power_budget: float = 5.0
    bandwidth: float = 1e6
    noise_power: float = 1.0
    seeds: Tuple[int, ...] = (0,)
    methods: Tuple[str, ...] = (SupportedMethods.greedy.value, SupportedMethods.local.value)
    restarts: int = 10
    alternations: int = 10
    report: str = ReportModes.best.value
    sweep_values: Tuple[int, ...] = ()
    data_length_range: Tuple[float, float] = (1 * MBIT, 20 * MBIT)
    compute_speed_range: Tuple[float, float] = (0.1 * MBIT, 2 * MBIT)
    compute_power_range: Tuple[float, float] = (0.5, 1.0)
    output_path: str = "results/results.csv"
    strict_properness: bool = False
    record_wall_time: bool = False
    workers: int = 1
    wmmse: WmmseConfig = field(default_factory=WmmseConfig)

    def __post_init__(self) -> None:
        object.__setattr__(self, "seeds", tuple(self.seeds))
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        check_members("scenario", [self.scenario], [s.value for s in SupportedScenarios])
        check_members("methods", self.methods, [m.value for m in SupportedMethods])
        check_members("report", [self.report], [r.value for r in ReportModes])
        check_sweep_values(self.scenario, self.sweep_values)
        for key in ("num_nodes", "antennas", "subchannels", "restarts", "alternations", "workers"):
            check_positive_int(key, getattr(self, key))
        for key in ("power_budget", "bandwidth", "noise_power"):
            check_positive(key, getattr(self, key))
        for key in ("data_length_range", "compute_speed_range", "compute_power_range"):
            check_range(key, getattr(self, key))
        if any(seed < 0 for seed in self.seeds):
            raise ValidationError("Seeds should be non-negative integers.")

    @classmethod
    def from_settings(cls, settings: Settings) -> "ScenarioConfig":
        """
        Build a configuration from validated settings, ranges converted to bits and bits per second.

        :param settings: Validated settings.
        :return: ScenarioConfig object.
        """
        dist = settings["distributions"]
        return cls(
            scenario=settings["scenario"], num_nodes=settings["num_nodes"], antennas=settings["antennas"],
            subchannels=settings["subchannels"], power_budget=float(settings["power_budget"]),
            bandwidth=float(settings["bandwidth"]), noise_power=float(settings["noise_power"]),
            seeds=tuple(settings["seeds"]), methods=tuple(settings["methods"]), restarts=settings["restarts"],
            alternations=settings["alternations"], report=settings["report"],
            sweep_values=tuple(settings["sweep_values"]),
            data_length_range=tuple(v * MBIT for v in dist["data_length_mbits"]),
            compute_speed_range=tuple(v * MBIT for v in dist["compute_speed_mbps"]),
            compute_power_range=tuple(float(v) for v in dist["compute_power_w"]),
            output_path=settings["output_path"], strict_properness=settings["strict_properness"],
            record_wall_time=settings["record_wall_time"], workers=settings["workers"],
            wmmse=WmmseConfig(**settings["wmmse"]),
        )

    def config_hash(self) -> str:
        """
        SHA-256 of every field that influences results.

        :return: Hex digest.
        """
        data = dataclasses.asdict(self)
        for key in ("output_path", "workers"):
            data.pop(key)
        return hashlib.sha256(json.dumps(data, sort_keys=True).encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class ResultRow:
    """
    One CSV row: a method run on one seed at one sweep point.

    Error rows carry status error:<ExceptionName> and no energies. links, rates and powers describe
    the reported solution; links is None for rows without a single solution behind them
    (mean mode and alternation steps).

    """
    scenario: str
    seed: int
    method: str
    sweep_var: str
    sweep_value: int
    energy_total: Optional[float] = None
    energy_communication: Optional[float] = None
    energy_computation: Optional[float] = None
    num_links: int = 0
    alternations: int = 0
    wall_ms: float = 0.0
    status: str = "ok"
    links: Optional[Tuple[Link, ...]] = None
    rates: Tuple[float, ...] = ()
    powers: Tuple[float, ...] = ()

    @property
    def ok(self) -> bool:
        """True for rows without error."""
        return self.status == "ok"

    @property
    def has_summary(self) -> bool:
        """True when the row carries the allocation it was evaluated on."""
        return self.ok and self.links is not None

    def summary(self) -> Dict[str, Any]:
        """
        Allocation, rates and powers of the row for the link summary file.

        :return: JSON-ready dictionary.
        """
        return {"scenario": self.scenario, "seed": self.seed, "method": self.method, "sweep_var": self.sweep_var,
                "sweep_value": self.sweep_value, "E_P_joules": self.energy_total,
                "links": [list(link) for link in self.links or ()], "rates_bps": list(self.rates),
                "powers_w": list(self.powers)}

    def as_csv_row(self) -> List[str]:
        """
        Row formatted for csv.writer with full float precision.

        :return: List of column strings.
        """
        def number(value: Optional[float]) -> str:
            return "" if value is None else repr(float(value))

        return [self.scenario, str(self.seed), self.method, self.sweep_var, str(self.sweep_value),
                number(self.energy_total), number(self.energy_communication), number(self.energy_computation),
                str(self.num_links), str(self.alternations), number(self.wall_ms), self.status]


@dataclass(frozen=True)
class PlotPoint:
    """
    Aggregate of ok rows at one (scenario, method, sweep point, step).

    step is the alternation index in the iterations scenario, -1 elsewhere.

    """
    scenario: str
    method: str
    sweep_var: str
    sweep_value: int
    step: int
    count: int
    mean_total: float
    best_total: float
    mean_communication: float
    mean_computation: float


def generate_instance(cfg: ScenarioConfig, seed: int) -> Tuple[NetworkInstance, ChannelSet]:
    """
    Random instance with uniform node parameters and i.i.d. unit-variance circular complex Gaussian channels.

    Node parameters come from stream (seed, 0); the channel of pair (k, k') from stream (seed, 1, k, k'),
    so channels of a pair don't depend on the network size.

    :param cfg: Scenario configuration.
    :param seed: Instance seed.
    :return: Tuple (network instance, channel set).
    """
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0]))
    k = cfg.num_nodes
    data = rng.uniform(*cfg.data_length_range, size=k)
    speed = rng.uniform(*cfg.compute_speed_range, size=k)
    power = rng.uniform(*cfg.compute_power_range, size=k)
    nodes = tuple(NodeProfile(data_length=float(data[i]), compute_speed=float(speed[i]),
                              compute_power=float(power[i]), tx_antennas=cfg.antennas, rx_antennas=cfg.antennas)
                  for i in range(k))
    net = NetworkInstance(nodes=nodes, power_budget=cfg.power_budget, bandwidth=cfg.bandwidth,
                          noise_power=cfg.noise_power, num_subchannels=cfg.subchannels)

    channels = {}
    for tx in range(k):
        for rx in range(k):
            if tx == rx:
                continue
            pair_rng = np.random.default_rng(np.random.SeedSequence([seed, 1, tx, rx]))
            shape = (cfg.antennas, cfg.antennas)
            channels[(tx, rx)] = (pair_rng.standard_normal(shape) + 1j * pair_rng.standard_normal(shape)) / np.sqrt(2)
    return net, ChannelSet(channels)


def _run_config(cfg: ScenarioConfig, seed: int, allocator: str, max_links: Optional[int]) -> RunConfig:
    return RunConfig(num_restarts=cfg.restarts, alternations=cfg.alternations, allocator=allocator, rng_seed=seed,
                     report=cfg.report, wmmse=cfg.wmmse, max_links=max_links)


def _random_runs(net: NetworkInstance, ch: ChannelSet, cfg: ScenarioConfig, seed: int,
                 max_links: Optional[int]) -> Tuple[EnergyBreakdown, Solution]:
    """Random-matching runs over the configured restarts: reported energy and the best run."""
    runs = [random_wmmse_baseline(net, ch, np.random.SeedSequence([seed, 2, r]), cfg.wmmse, max_links)
            for r in range(cfg.restarts)]
    best = min(runs, key=lambda s: s.energy.total)
    if cfg.report == ReportModes.mean.value:
        return EnergyBreakdown.mean([s.energy for s in runs]), best
    return best.energy, best


def _link_summary(solution: Solution, ch: ChannelSet,
                  net: NetworkInstance) -> Tuple[Tuple[Link, ...], Tuple[float, ...], Tuple[float, ...]]:
    """Links of a solution with the rates and transmit powers its energy was computed from."""
    alloc, bf = solution.allocation, solution.beamforming
    rates = tuple(float(r) for r in link_rates(alloc, bf, ch, net))
    powers = tuple(float(np.vdot(g, g).real) for g in (bf.for_pair(tx, rx, ch, net)[0] for tx, rx in alloc.pairs))
    return alloc.links, rates, powers


def _point_config(cfg: ScenarioConfig) -> Tuple[str, List[Tuple[int, ScenarioConfig, Optional[int]]]]:
    """Sweep variable and (value, configuration, link cap) of every sweep point."""
    scenario = cfg.scenario
    values = cfg.sweep_values or DEFAULT_SWEEPS.get(scenario, ())
    if scenario == SupportedScenarios.links_sweep.value:
        caps = cfg.sweep_values or tuple(range(cfg.num_nodes // 2 + 1))
        return "max_links", [(v, cfg, v) for v in caps]
    if scenario == SupportedScenarios.subchannels_sweep.value:
        return "subchannels", [(v, dataclasses.replace(cfg, subchannels=v), None) for v in values]
    if scenario == SupportedScenarios.nodes_sweep.value:
        return "num_nodes", [(v, dataclasses.replace(cfg, num_nodes=v), None) for v in values]
    if scenario == SupportedScenarios.iterations.value:
        return "antennas", [(v, dataclasses.replace(cfg, antennas=v), None) for v in values]
    return "none", [(0, cfg, None)]


def _run_unit(unit: Tuple[ScenarioConfig, int, str, str, int, Optional[int]]) -> List[ResultRow]:
    """
    Run one method on one seed at one sweep point.

    :param unit: Tuple (point configuration, seed, method, sweep variable, sweep value, link cap).
    :return: Result rows, several for the iterations scenario.
    """
    cfg, seed, method, sweep_var, sweep_value, max_links = unit
    common = dict(scenario=cfg.scenario, seed=seed, method=method, sweep_var=sweep_var, sweep_value=sweep_value)
    mean_mode = cfg.report == ReportModes.mean.value
    start = time.perf_counter()
    try:
        net, ch = generate_instance(cfg, seed)
        trajectory: Sequence[EnergyBreakdown] = ()
        summary: Dict[str, Any] = {}
        if method == SupportedMethods.local.value:
            energy, links, steps = local_baseline(net), 0, 0
            summary = dict(links=(), rates=(), powers=())
        elif method == SupportedMethods.random.value:
            energy, best = _random_runs(net, ch, cfg, seed, max_links)
            links, steps = best.allocation.num_links, 1
        else:
            report = alternate(net, ch, _run_config(cfg, seed, method, max_links))
            best = report.best
            energy, links, steps = report.energy, best.allocation.num_links, best.alternations
            trajectory = report.mean_trajectory if mean_mode else best.trajectory

        # the reported solution is a single run only in best mode
        if method != SupportedMethods.local.value and not mean_mode:
            chosen, rates, powers = _link_summary(best, ch, net)
            summary = dict(links=chosen, rates=rates, powers=powers)
    except Exception as error:
        logger.warning("Run %s failed on seed %d at %s=%s: %r.", method, seed, sweep_var, sweep_value, error)
        return [ResultRow(**common, status=f"error:{type(error).__name__}")]

    wall_ms = (time.perf_counter() - start) * 1e3 if cfg.record_wall_time else 0.0
    if cfg.scenario == SupportedScenarios.iterations.value and trajectory:
        return [ResultRow(**common, energy_total=e.total, energy_communication=e.communication,
                          energy_computation=e.computation, num_links=links, alternations=step, wall_ms=wall_ms)
                for step, e in enumerate(trajectory)]
    return [ResultRow(**common, energy_total=energy.total, energy_communication=energy.communication,
                      energy_computation=energy.computation, num_links=links, alternations=steps, wall_ms=wall_ms,
                      **summary)]


def run_scenario(cfg: ScenarioConfig) -> List[ResultRow]:
    """
    Run every method on every seed at every sweep point.

    Rows are ordered by (sweep value, seed, method) whatever the number of workers. Failed runs
    produce error rows instead of aborting the sweep.

    :param cfg: Scenario configuration.
    :return: Result rows.
    """
    sweep_var, points = _point_config(cfg)

    # properness of every sweep point is checked before anything runs
    for value, point, _ in points:
        if not is_proper(point.num_nodes, point.antennas):
            message = f"Sweep point {sweep_var}={value} with K={point.num_nodes}, N={point.antennas} isn't proper."
            if cfg.strict_properness:
                raise ValidationError(message)
            logger.warning(message)

    units = [(point, seed, method, sweep_var, value, cap)
             for value, point, cap in points for seed in cfg.seeds for method in cfg.methods]
    logger.info("Scenario %s: %d runs over %d sweep points.", cfg.scenario, len(units), len(points))

    if cfg.workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as executor:
            batches = list(executor.map(_run_unit, units))
    else:
        batches = []
        for unit in units:
            batches.append(_run_unit(unit))
            logger.info("Finished %s on seed %d at %s=%s.", unit[2], unit[1], sweep_var, unit[4])

    return [row for batch in batches for row in batch]


def write_csv(rows: Iterable[ResultRow], path: str, cfg: ScenarioConfig) -> None:
    """
    Write rows under a schema and configuration hash comment line.

    :param rows: Result rows.
    :param path: Target path, parent directories are created.
    :param cfg: Configuration the rows come from.
    :return: None
    """
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(file=path, encoding="utf-8", mode="w", newline="") as csv_file:
        csv_file.write(f"# schema={CSV_SCHEMA} config_hash={cfg.config_hash()}\n")
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow(row.as_csv_row())


def emit_plot_data(rows: Iterable[ResultRow]) -> List[PlotPoint]:
    """
    Mean and best energy per (scenario, method, sweep point), per alternation index for the iterations scenario.

    :param rows: Result rows, error rows are skipped.
    :return: Aggregates sorted by (scenario, method, sweep value, step).
    """
    groups: Dict[Tuple[str, str, str, int, int], List[ResultRow]] = {}
    for row in rows:
        if not row.ok:
            continue
        step = row.alternations if row.scenario == SupportedScenarios.iterations.value else -1
        groups.setdefault((row.scenario, row.method, row.sweep_var, row.sweep_value, step), []).append(row)

    points = []
    for key in sorted(groups):
        members = groups[key]
        totals = np.array([r.energy_total for r in members])
        points.append(PlotPoint(
            scenario=key[0], method=key[1], sweep_var=key[2], sweep_value=key[3], step=key[4], count=len(members),
            mean_total=float(np.mean(totals)), best_total=float(np.min(totals)),
            mean_communication=float(np.mean([r.energy_communication for r in members])),
            mean_computation=float(np.mean([r.energy_computation for r in members])),
        ))
    return points


def write_plot_data(points: Iterable[PlotPoint], path: str) -> None:
    """
    Write aggregates as CSV for an external plotting tool.

    :param points: Aggregates from emit_plot_data.
    :param path: Target path, parent directories are created.
    :return: None
    """
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(file=path, encoding="utf-8", mode="w", newline="") as csv_file:
        writer = csv.writer(csv_file, lineterminator="\n")
        writer.writerow(PLOT_COLUMNS)
        for p in points:
            writer.writerow([p.scenario, p.method, p.sweep_var, p.sweep_value, p.step, p.count, repr(p.mean_total),
                             repr(p.best_total), repr(p.mean_communication), repr(p.mean_computation)])


def write_link_summary(rows: Iterable[ResultRow], path: str) -> int:
    """
    Write the allocation, rates and powers behind every row that has them as a JSON list.

    total_energy of a stored entry reproduces the E_P_joules value of its row.

    :param rows: Result rows.
    :param path: Target path, parent directories are created.
    :return: Number of entries written.
    """
    entries = [row.summary() for row in rows if row.has_summary]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(file=path, encoding="utf-8", mode="w") as json_file:
        json.dump({"schema": CSV_SCHEMA, "rows": entries}, json_file, indent=1)
    return len(entries)


def scenario_summary(cfg: ScenarioConfig) -> Dict[str, Any]:
    """
    Short description of a configuration for log output.

    :param cfg: Scenario configuration.
    :return: Dictionary of the main sizes.
    """
    return {"scenario": cfg.scenario, "K": cfg.num_nodes, "N": cfg.antennas, "S": cfg.subchannels,
            "P": cfg.power_budget, "seeds": len(cfg.seeds), "methods": list(cfg.methods)}
