"""
Alternating decomposition: resource allocation with signals fixed, then signal design with the allocation fixed.

Also holds the local-only and random-matching WMMSE baselines.
"""


# global imports
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple, Union
import numpy as np

# local imports
from .alloc import exact_allocate, greedy_allocate, sorted_candidates
from .mimo import WmmseConfig, wmmse_optimize
from .model import Allocation, BeamformingState, ChannelSet, EnergyBreakdown, NetworkInstance, evaluate_energy
from .validation import check_positive, check_positive_int
from ..errors.errors import InfeasibleLinkError, ValidationError


logger = logging.getLogger(__name__)

Seed = Union[int, np.random.SeedSequence]


class Allocators(Enum):
    """
    Class for enumeration of resource allocation solvers.
    """
    exact = "exact"
    greedy = "greedy"


class ReportModes(Enum):
    """
    Class for enumeration of restart aggregation modes.
    """
    best = "best"
    mean = "mean"


@dataclass(frozen=True)
class RunConfig:
    """
    Settings of the alternating optimizer.

    attributes:
        num_restarts: Independent random initializations.
        alternations: Cap on alternations per restart.
        allocator: "exact" or "greedy".
        rng_seed: Seed of the restart streams.
        report: "best" or "mean", the energy AlternationReport.energy refers to.
        tolerance: Relative change of total energy that stops a restart.
        wmmse: Settings of the signal-design step.
        max_links: Optional cap on accepted links.

    """
    num_restarts: int = 10
    alternations: int = 10
    allocator: str = Allocators.greedy.value
    rng_seed: int = 0
    report: str = ReportModes.best.value
    tolerance: float = 1e-6
    wmmse: WmmseConfig = field(default_factory=WmmseConfig)
    max_links: Optional[int] = None

    def __post_init__(self) -> None:
        check_positive_int("num_restarts", self.num_restarts)
        check_positive_int("alternations", self.alternations)
        check_positive("tolerance", self.tolerance)
        try:
            Allocators(self.allocator)
            ReportModes(self.report)
        except ValueError as error:
            raise ValidationError(str(error)) from error
        if self.max_links is not None and (isinstance(self.max_links, bool) or self.max_links < 0):
            raise ValidationError(f"Value of parameter 'max_links' should be >= 0, got {self.max_links}.")


@dataclass(frozen=True)
class Solution:
    """
    Configuration found by one restart or baseline.

    attributes:
        allocation: Selected links.
        beamforming: Signals of the selected links.
        energy: Energy of (allocation, beamforming).
        trajectory: Energy of the initial point and after every alternation.
        restart_index: Restart that produced the solution.
        alternations: Alternations run.
        converged: False when the alternation cap was hit first.

    """
    allocation: Allocation
    beamforming: BeamformingState
    energy: EnergyBreakdown
    trajectory: Tuple[EnergyBreakdown, ...]
    restart_index: int = 0
    alternations: int = 0
    converged: bool = True


@dataclass(frozen=True)
class AlternationReport:
    """
    Outcome of alternate over every restart.

    attributes:
        best: Lowest-energy restart, earliest restart on ties.
        restarts: Every restart's solution in restart order.
        mean_energy: Mean final energy over restarts.
        mean_trajectory: Mean trajectory, shorter runs padded with their last value.
        report: Aggregation mode the energy property follows.

    """
    best: Solution
    restarts: Tuple[Solution, ...]
    mean_energy: EnergyBreakdown
    mean_trajectory: Tuple[EnergyBreakdown, ...]
    report: str = ReportModes.best.value

    @property
    def energy(self) -> EnergyBreakdown:
        """Best or mean energy, per report mode."""
        return self.best.energy if self.report == ReportModes.best.value else self.mean_energy


def _unit_vectors(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform sample on the complex unit sphere of dimension size."""
    v = rng.standard_normal(size) + 1j * rng.standard_normal(size)
    return v / np.linalg.norm(v)


def _random_signals(alloc: Allocation, net: NetworkInstance, rng: np.random.Generator) -> BeamformingState:
    """Random directions at power P/L_max with random unit combiners."""
    beamformers, combiners = {}, {}
    for tx, rx in alloc.pairs:
        beamformers[(tx, rx)] = np.sqrt(net.default_link_power) * _unit_vectors(rng, net.nodes[tx].tx_antennas)
        combiners[(tx, rx)] = _unit_vectors(rng, net.nodes[rx].rx_antennas)
    return BeamformingState(beamformers, combiners)


def initialize(net: NetworkInstance, ch: ChannelSet, seed: Seed) -> Tuple[Allocation, BeamformingState]:
    """
    Random starting point: disjoint candidate pairs in random order up to L_max, random subchannels,
    random unit directions at power P/L_max and random unit combiners.

    :param net: Network instance.
    :param ch: Channel set.
    :param seed: Integer seed or seed sequence.
    :return: Tuple (allocation, beamforming state).
    """
    rng = np.random.default_rng(seed)
    candidates = sorted_candidates(net)

    links = []
    busy = set()
    for idx in rng.permutation(len(candidates)):
        tx, rx = candidates[idx]
        if tx in busy or rx in busy:
            continue
        links.append((tx, rx, int(rng.integers(net.num_subchannels))))
        busy.update((tx, rx))
        if len(links) == net.max_links:
            break

    alloc = Allocation(tuple(links))
    return alloc, _random_signals(alloc, net, rng)


def local_baseline(net: NetworkInstance) -> EnergyBreakdown:
    """
    Energy with every node processing its own task.

    :param net: Network instance.
    :return: Breakdown with zero communication energy.
    """
    return evaluate_energy(net, Allocation(), BeamformingState(), ChannelSet({}))


def design_signals(alloc: Allocation, bf: BeamformingState, ch: ChannelSet, net: NetworkInstance,
                   cfg: WmmseConfig) -> Tuple[Allocation, BeamformingState, EnergyBreakdown]:
    """
    WMMSE on a fixed allocation, weak links released, energy evaluated.

    :param alloc: Fixed allocation.
    :param bf: Initial signals.
    :param ch: Channel set.
    :param net: Network instance.
    :param cfg: WMMSE settings.
    :return: Tuple (allocation without weak links, its signals, energy).
    """
    result = wmmse_optimize(alloc, ch, net, cfg, bf)
    signals = result.beamforming
    if result.weak_links:
        weak = set(result.weak_links)
        alloc = Allocation(tuple(link for link in alloc.links if (link.tx, link.rx) not in weak))
        logger.debug("Released weak links %s.", sorted(weak))
    signals = signals.restricted_to(alloc, ch, net)
    return alloc, signals, evaluate_energy(net, alloc, signals, ch)


def _merge(base: BeamformingState, update: BeamformingState) -> BeamformingState:
    """State with the entries of update overriding base."""
    return BeamformingState({**base.beamformers, **update.beamformers}, {**base.combiners, **update.combiners})


def _run_restart(net: NetworkInstance, ch: ChannelSet, cfg: RunConfig, index: int,
                 baseline: EnergyBreakdown) -> Solution:
    """One restart of the alternation, falling back to local processing when that is cheaper."""
    alloc, bf = initialize(net, ch, np.random.SeedSequence([cfg.rng_seed, index]))
    try:
        energy = evaluate_energy(net, alloc, bf, ch)
    except InfeasibleLinkError:
        energy = baseline
    trajectory = [energy]

    allocate = exact_allocate if cfg.allocator == Allocators.exact.value else greedy_allocate
    best: Optional[Tuple[EnergyBreakdown, Allocation, BeamformingState]] = None
    converged = False
    previous = energy.total

    for step in range(1, cfg.alternations + 1):
        # 1) network resources with signals fixed, the previous allocation kept when it is cheaper
        chosen = allocate(net, bf, ch, max_links=cfg.max_links)
        if cfg.max_links is None or alloc.num_links <= cfg.max_links:
            try:
                if evaluate_energy(net, alloc, bf, ch).total < chosen.energy.total:
                    chosen = None
            except InfeasibleLinkError:
                pass
        if chosen is not None:
            alloc = chosen.allocation

        # 2) signals with resources fixed
        alloc, signals, energy = design_signals(alloc, bf, ch, net, cfg.wmmse)
        bf = _merge(bf, signals)

        trajectory.append(energy)
        if best is None or energy.total < best[0].total:
            best = (energy, alloc, signals)

        change = abs(previous - energy.total)
        logger.debug("Restart %d alternation %d: %.9g J with %d links.", index, step, energy.total, alloc.num_links)
        if change <= cfg.tolerance * max(abs(previous), np.finfo(float).tiny):
            converged = True
            break
        previous = energy.total

    energy, alloc, signals = best
    if energy.total > baseline.total:
        logger.debug("Restart %d ends above the local baseline, local processing kept.", index)
        energy, alloc, signals = baseline, Allocation(), BeamformingState()

    return Solution(allocation=alloc, beamforming=signals, energy=energy, trajectory=tuple(trajectory),
                    restart_index=index, alternations=len(trajectory) - 1, converged=converged)


def _mean_trajectory(solutions: List[Solution]) -> Tuple[EnergyBreakdown, ...]:
    length = max(len(s.trajectory) for s in solutions)
    padded = [s.trajectory + (s.trajectory[-1],) * (length - len(s.trajectory)) for s in solutions]
    return tuple(EnergyBreakdown.mean([p[t] for p in padded]) for t in range(length))


def alternate(net: NetworkInstance, ch: ChannelSet, cfg: RunConfig) -> AlternationReport:
    """
    Alternate allocation and signal design from several random starting points.

    Each restart stops when the total energy changes by less than cfg.tolerance (relative) or after
    cfg.alternations rounds, and keeps the lowest-energy configuration it met. The minimizer over
    restarts is reported together with mean statistics.

    :param net: Network instance.
    :param ch: Channel set.
    :param cfg: Optimizer settings.
    :return: Report with the best solution and mean statistics.
    """
    baseline = local_baseline(net)

    if not sorted_candidates(net):
        logger.debug("No candidate link pairs, local processing only.")
        local = Solution(allocation=Allocation(), beamforming=BeamformingState(), energy=baseline,
                         trajectory=(baseline,))
        return AlternationReport(best=local, restarts=(local,), mean_energy=baseline, mean_trajectory=(baseline,),
                                 report=cfg.report)

    solutions = [_run_restart(net, ch, cfg, index, baseline) for index in range(cfg.num_restarts)]
    best = min(solutions, key=lambda s: (s.energy.total, s.restart_index))
    mean = EnergyBreakdown.mean([s.energy for s in solutions])
    logger.debug("Best restart %d with %.9g J, mean %.9g J.", best.restart_index, best.energy.total, mean.total)

    return AlternationReport(best=best, restarts=tuple(solutions), mean_energy=mean,
                             mean_trajectory=_mean_trajectory(solutions), report=cfg.report)


def random_wmmse_baseline(net: NetworkInstance, ch: ChannelSet, seed: Seed, cfg: Optional[WmmseConfig] = None,
                          max_links: Optional[int] = None) -> Solution:
    """
    Random matching of node pairs with WMMSE signals.

    floor(K/2) disjoint pairs are drawn uniformly at random without regard to the candidate set.
    In every pair the slower node (smaller compute speed) transmits, the lower index on equal speeds.
    Subchannels are random. The energy is evaluated as is, it may exceed the local baseline.

    :param net: Network instance.
    :param ch: Channel set.
    :param seed: Integer seed or seed sequence.
    :param cfg: WMMSE settings.
    :param max_links: Optional cap on the number of pairs.
    :return: Solution with a single trajectory point.
    """
    cfg = cfg or WmmseConfig()
    rng = np.random.default_rng(seed)
    order = rng.permutation(net.num_nodes)
    count = net.max_links if max_links is None else max(0, min(max_links, net.max_links))

    links = []
    for i in range(count):
        a, b = int(order[2 * i]), int(order[2 * i + 1])
        speed_a, speed_b = net.nodes[a].compute_speed, net.nodes[b].compute_speed
        if speed_a < speed_b or (speed_a == speed_b and a < b):
            tx, rx = a, b
        else:
            tx, rx = b, a
        links.append((tx, rx, int(rng.integers(net.num_subchannels))))

    alloc = Allocation(tuple(links))
    alloc, signals, energy = design_signals(alloc, _random_signals(alloc, net, rng), ch, net, cfg)
    return Solution(allocation=alloc, beamforming=signals, energy=energy, trajectory=(energy,), alternations=1)
