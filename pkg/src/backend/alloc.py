"""
Network-resource subproblem: choose link pairs and subchannels with the signal design fixed.

Two solvers are provided, an exact depth-first enumerator for small networks and the greedy
joint link pair and subchannel algorithm.
"""


# global imports
import time
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

# local imports
from .model import (Allocation, BeamformingState, ChannelSet, EnergyBreakdown, NetworkInstance, Pair,
                    candidate_links, evaluate_energy, link_rate, local_energy, offload_energy)
from ..errors.errors import InfeasibleLinkError, ProblemSizeError


logger = logging.getLogger(__name__)

# largest network the exact solver agrees to enumerate
EXACT_MAX_NODES = 8

# relative slack of the pruning bound, keeps exact ties reachable under rounding
_BOUND_SLACK = 1e-9


@dataclass(frozen=True)
class SavedEnergy:
    """
    Energy saved by offloading tx's task to rx, optionally on a given subchannel.

    attributes:
        tx: Transmitting node.
        rx: Receiving node.
        subchannel: Subchannel the rate was evaluated on, None for an interference-free rate.
        value: local_energy(tx) - offload_energy(tx, rx, rate, P_tx) in joules.

    """
    tx: int
    rx: int
    subchannel: Optional[int]
    value: float


@dataclass(frozen=True)
class SolverStats:
    """Counters of a solver run."""
    nodes_explored: int = 0
    candidates_evaluated: int = 0
    wall_time: float = 0.0


@dataclass(frozen=True)
class AllocResult:
    """
    Allocation chosen by a solver with its honestly evaluated energy.

    """
    allocation: Allocation
    energy: EnergyBreakdown
    solver_stats: SolverStats = field(default_factory=SolverStats)


def sorted_candidates(net: NetworkInstance) -> List[Pair]:
    """
    Candidate set in lexicographic order.

    :param net: Network instance.
    :return: Sorted list of candidate pairs.
    """
    return sorted(candidate_links(net))


def provision(bf: BeamformingState, pairs: List[Pair], ch: ChannelSet, net: NetworkInstance) -> BeamformingState:
    """
    Complete a beamforming state with matched-filter defaults for every listed pair.

    :param bf: Caller supplied state.
    :param pairs: Pairs that need an entry.
    :param ch: Channel set.
    :param net: Network instance.
    :return: State holding an entry for every pair in pairs and every pair already in bf.
    """
    # copy the state, then fill in missing pairs
    beamformers = dict(bf.beamformers)
    combiners = dict(bf.combiners)
    for tx, rx in pairs:
        if (tx, rx) not in beamformers or (tx, rx) not in combiners:
            beamformers[(tx, rx)], combiners[(tx, rx)] = bf.for_pair(tx, rx, ch, net)
    return BeamformingState(beamformers, combiners)


def saved_energy(tx: int, rx: int, subchannel: Optional[int], partial_alloc: Allocation, bf: BeamformingState,
                 ch: ChannelSet, net: NetworkInstance) -> SavedEnergy:
    """
    Saved energy of adding link (tx, rx) to a partial allocation.

    Without a subchannel the rate is interference-free. With a subchannel the rate includes
    interference from the links of partial_alloc already on it.

    :param tx: Transmitting node.
    :param rx: Receiving node.
    :param subchannel: Subchannel of the new link or None.
    :param partial_alloc: Links selected so far.
    :param bf: Beamforming state.
    :param ch: Channel set.
    :param net: Network instance.
    :return: Saved energy, offloading pays off when its value is > 0.
    """
    # create the trial allocation, alone or next to the partial one
    if subchannel is None:
        trial = Allocation(((tx, rx, 0),))
    else:
        trial = partial_alloc.with_link(tx, rx, subchannel)
    n = trial.num_links - 1

    # rate of the new link only, earlier links keep their own rates
    rate = link_rate(n, trial, bf, ch, net)
    g, _ = bf.for_pair(tx, rx, ch, net)
    power = float((abs(g) ** 2).sum())

    value = local_energy(tx, net) - offload_energy(tx, rx, rate, power, net)
    return SavedEnergy(tx=tx, rx=rx, subchannel=subchannel, value=value)


def _link_limit(net: NetworkInstance, max_links: Optional[int]) -> int:
    """Effective cap on accepted links."""
    return net.max_links if max_links is None else max(0, min(max_links, net.max_links))


def greedy_allocate(net: NetworkInstance, bf: BeamformingState, ch: ChannelSet,
                    max_links: Optional[int] = None) -> AllocResult:
    """
    Greedy joint link pair and subchannel selection.

    While fresh subchannels remain, the pair with the largest interference-free saved energy gets a
    fresh subchannel. Afterwards the best (pair, used subchannel) combination is chosen with
    interference from links already on that subchannel. The loop ends when the best saved energy is
    not positive or no candidate is left. Every selection removes all pairs that share a node with it.

    :param net: Network instance.
    :param bf: Beamforming state, missing pairs get matched-filter defaults.
    :param ch: Channel set.
    :param max_links: Optional cap on the number of accepted links.
    :return: Allocation result.
    """
    # prepare signals of every candidate
    start = time.perf_counter()
    candidates = sorted_candidates(net)
    bf = provision(bf, candidates, ch, net)
    limit = _link_limit(net, max_links)

    alloc = Allocation()
    current = evaluate_energy(net, alloc, bf, ch)
    remaining = list(candidates)
    fresh = 0
    evaluated = 0

    while remaining and alloc.num_links < limit:
        scores: List[SavedEnergy] = []

        # 1. allocate a new subchannel to the link pair
        if fresh < net.num_subchannels:
            for tx, rx in remaining:
                try:
                    scores.append(saved_energy(tx, rx, None, alloc, bf, ch, net))
                except InfeasibleLinkError:
                    logger.debug("Pair (%d, %d) has no usable rate, skipped.", tx, rx)
            evaluated += len(scores)
            scores.sort(key=lambda d: (-d.value, d.tx, d.rx))
            if not scores or scores[0].value <= 0:
                break
            best = scores[0]
            alloc = alloc.with_link(best.tx, best.rx, fresh)
            fresh += 1

        # 2. allocate a used subchannel to the link pair
        else:
            for tx, rx in remaining:
                for i in range(net.num_subchannels):
                    try:
                        scores.append(saved_energy(tx, rx, i, alloc, bf, ch, net))
                    except InfeasibleLinkError:
                        logger.debug("Pair (%d, %d) has no usable rate on subchannel %d, skipped.", tx, rx, i)
            evaluated += len(scores)
            scores.sort(key=lambda d: (-d.value, d.tx, d.rx, d.subchannel))

            # the new link also degrades earlier links, accept only honest improvements
            best = None
            for d in scores:
                if d.value <= 0:
                    break
                energy = evaluate_energy(net, alloc.with_link(d.tx, d.rx, d.subchannel), bf, ch)
                if energy.total < current.total:
                    best = d
                    break
                logger.debug("Pair (%d, %d) on subchannel %d raises total energy, skipped.", d.tx, d.rx, d.subchannel)
            if best is None:
                break
            alloc = alloc.with_link(best.tx, best.rx, best.subchannel)

        logger.debug("Greedy selected %s with saved energy %.6g J.", alloc.links[-1], best.value)
        current = evaluate_energy(net, alloc, bf, ch)

        # update candidate set
        busy = alloc.busy_nodes
        remaining = [(tx, rx) for tx, rx in remaining if tx not in busy and rx not in busy]

    stats = SolverStats(nodes_explored=alloc.num_links, candidates_evaluated=evaluated,
                        wall_time=time.perf_counter() - start)
    return AllocResult(allocation=alloc, energy=current, solver_stats=stats)


def exact_allocate(net: NetworkInstance, bf: BeamformingState, ch: ChannelSet, max_links: Optional[int] = None,
                   max_nodes: int = EXACT_MAX_NODES) -> AllocResult:
    """
    Globally minimal total energy over all node-disjoint candidate links with subchannel assignment.

    Depth-first enumeration over candidate pairs in lexicographic order. Subchannels are opened in
    canonical order, so relabelings are visited once. A subtree is pruned when a lower bound of its
    energy (interference-free offloading for committed links, best case for free nodes) exceeds the
    incumbent. Ties are broken by fewest links, then lexicographic link order.

    :param net: Network instance.
    :param bf: Beamforming state, missing pairs get matched-filter defaults.
    :param ch: Channel set.
    :param max_links: Optional cap on the number of links.
    :param max_nodes: Enumeration cap on the number of nodes.
    :return: Allocation result with a canonical allocation.
    """
    # check the problem size
    if net.num_nodes > max_nodes:
        raise ProblemSizeError(f"Exact allocation is limited to {max_nodes} nodes, instance has {net.num_nodes}.")

    start = time.perf_counter()
    candidates = sorted_candidates(net)
    bf = provision(bf, candidates, ch, net)
    limit = _link_limit(net, max_links)

    local = [local_energy(k, net) for k in range(net.num_nodes)]

    # interference-free offloading energy of every usable pair
    free: Dict[Pair, float] = {}
    for tx, rx in candidates:
        try:
            free[(tx, rx)] = local[tx] - saved_energy(tx, rx, None, Allocation(), bf, ch, net).value
        except InfeasibleLinkError:
            logger.debug("Pair (%d, %d) has no usable rate, excluded from enumeration.", tx, rx)
    usable = [pair for pair in candidates if pair in free]

    # cheapest possible energy of every node
    best_case = list(local)
    for (tx, _), energy in free.items():
        best_case[tx] = min(best_case[tx], energy)

    # incumbent is the empty allocation
    empty = Allocation()
    best_energy = evaluate_energy(net, empty, bf, ch)
    best_key: Tuple = (best_energy.total, 0, empty.links)
    best_alloc = empty
    explored = 0

    def search(begin: int, alloc: Allocation, busy: FrozenSet[int], opened: int, committed: float) -> None:
        nonlocal best_energy, best_key, best_alloc, explored

        for idx in range(begin, len(usable)):
            tx, rx = usable[idx]
            if tx in busy or rx in busy:
                continue
            nodes = busy | {tx, rx}

            # committed links at their interference-free energy, receivers process their own data
            bound = committed + free[(tx, rx)] + local[rx]
            bound += sum(best_case[k] for k in range(net.num_nodes) if k not in nodes)
            if bound > best_key[0] * (1.0 + _BOUND_SLACK) + _BOUND_SLACK:
                continue

            # used subchannels and at most one fresh one
            for i in range(min(opened + 1, net.num_subchannels)):
                trial = alloc.with_link(tx, rx, i)
                explored += 1
                energy = evaluate_energy(net, trial, bf, ch)
                key = (energy.total, trial.num_links, trial.links)
                # check if the trial beats the incumbent
                if key < best_key:
                    best_energy, best_key, best_alloc = energy, key, trial
                if trial.num_links < limit:
                    search(idx + 1, trial, nodes, max(opened, i + 1), committed + free[(tx, rx)] + local[rx])

    if limit > 0:
        search(0, empty, frozenset(), 0, 0.0)

    logger.debug("Exact allocation explored %d allocations, best %s with %.6g J.",
                 explored, best_alloc.links, best_energy.total)
    stats = SolverStats(nodes_explored=explored, candidates_evaluated=len(usable),
                        wall_time=time.perf_counter() - start)
    return AllocResult(allocation=best_alloc, energy=best_energy, solver_stats=stats)
