"""
Reference checkers: independent exhaustive allocators and the three-node worked example.
"""


# global imports
import itertools
import logging
from typing import Dict, Iterator, List, Optional, Tuple
import numpy as np

# local imports
from .mimo import WmmseConfig
from .model import (Allocation, BeamformingState, ChannelSet, EnergyBreakdown, Link, NetworkInstance, NodeProfile,
                    Pair, candidate_links, evaluate_energy)
from .optimizer import design_signals, local_baseline
from ..errors.errors import InfeasibleLinkError


logger = logging.getLogger(__name__)


def _disjoint(pairs: Tuple[Pair, ...]) -> bool:
    nodes = [node for pair in pairs for node in pair]
    return len(nodes) == len(set(nodes))


def enumerate_allocations(net: NetworkInstance, max_links: Optional[int] = None) -> Iterator[Allocation]:
    """
    Every canonical allocation: node-disjoint subsets of candidate pairs under every subchannel labeling.

    :param net: Network instance.
    :param max_links: Optional cap on the number of links.
    :return: Iterator over distinct canonical allocations, the empty one first.
    """
    limit = net.max_links if max_links is None else max(0, min(max_links, net.max_links))
    candidates = sorted(candidate_links(net))

    seen = set()
    for size in range(limit + 1):
        for pairs in itertools.combinations(candidates, size):
            if not _disjoint(pairs):
                continue
            for labels in itertools.product(range(net.num_subchannels), repeat=size):
                alloc = Allocation(tuple(Link(tx, rx, i) for (tx, rx), i in zip(pairs, labels))).canonical()
                if alloc.links in seen:
                    continue
                seen.add(alloc.links)
                yield alloc


def brute_force_allocate(net: NetworkInstance, bf: BeamformingState, ch: ChannelSet,
                         max_links: Optional[int] = None) -> Tuple[Allocation, EnergyBreakdown]:
    """
    Try every node-disjoint subset of candidate pairs with every subchannel labeling.

    Allocations are canonicalized before comparison; the winner has the lowest total energy,
    then the fewest links, then the smallest link tuple.

    :param net: Network instance.
    :param bf: Beamforming state, missing pairs get matched-filter defaults.
    :param ch: Channel set.
    :param max_links: Optional cap on the number of links.
    :return: Tuple (canonical allocation, energy).
    """
    best: Optional[Tuple] = None
    best_energy: Optional[EnergyBreakdown] = None
    checked = 0
    for alloc in enumerate_allocations(net, max_links):
        checked += 1
        try:
            energy = evaluate_energy(net, alloc, bf, ch)
        except InfeasibleLinkError:
            continue
        key = (energy.total, alloc.num_links, alloc.links)
        if best is None or key < best:
            best, best_energy = key, energy

    logger.debug("Brute force checked %d allocations.", checked)
    return Allocation(best[2]), best_energy


def joint_brute_force(net: NetworkInstance, ch: ChannelSet, cfg: Optional[WmmseConfig] = None
                      ) -> Tuple[Allocation, EnergyBreakdown]:
    """
    Signal design from matched-filter defaults on every allocation, keeping the cheapest.

    Weak links are released as in the optimizer, so the result never exceeds the local baseline.

    :param net: Network instance.
    :param ch: Channel set.
    :param cfg: WMMSE settings.
    :return: Tuple (allocation after release of weak links, energy).
    """
    cfg = cfg or WmmseConfig()
    best_alloc, best_energy = Allocation(), local_baseline(net)
    for alloc in enumerate_allocations(net):
        if not alloc.num_links:
            continue
        try:
            kept, _, energy = design_signals(alloc, BeamformingState(), ch, net, cfg)
        except InfeasibleLinkError:
            continue
        if energy.total < best_energy.total:
            best_alloc, best_energy = kept, energy
    return best_alloc, best_energy


def worked_example() -> Tuple[NetworkInstance, ChannelSet]:
    """
    Three nodes with 10 Mbit tasks, 1 W processors and speeds 10, 2 and 1 Mbit/s.

    Scalar channels of gain 3 give 2 Mbit/s on every link at the default 1 W, so the local baseline
    is 16 J, offloading 2 -> 0 costs 12 J and offloading 1 -> 0 costs 17 J.

    :return: Tuple (network instance, channel set).
    """
    nodes = tuple(NodeProfile(data_length=1e7, compute_speed=speed, compute_power=1.0)
                  for speed in (1e7, 2e6, 1e6))
    net = NetworkInstance(nodes=nodes, power_budget=1.0, bandwidth=1e6, noise_power=1.0, num_subchannels=1)
    channels: Dict[Pair, List[List[complex]]] = {
        (k, kp): [[complex(np.sqrt(3.0))]] for k in range(3) for kp in range(3) if k != kp
    }
    return net, ChannelSet(channels)
