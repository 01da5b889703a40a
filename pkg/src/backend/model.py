"""
Domain types of the wireless D2D network and closed-form evaluators for rates and energies.

All quantities are SI: bits, bits per second, watts, joules and hertz.
Node and subchannel indices are 0-based.
"""


# global imports
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, NamedTuple, Optional, Sequence, Tuple
import numpy as np
import scipy.linalg

# local imports
from .validation import check_positive, check_positive_int
from ..errors.errors import InvalidInstanceError, InvalidAllocationError, InfeasibleLinkError


logger = logging.getLogger(__name__)

# bits in one "Mbit" of configuration files
MBIT = 1e6

Pair = Tuple[int, int]


@dataclass(frozen=True)
class NodeProfile:
    """
    Task and hardware description of a single node.

    attributes:
        data_length: Length of the node's task I_k in bits.
        compute_speed: Computation speed C_k in bits per second.
        compute_power: Processing power F_k in watts.
        tx_antennas: Number of transmit antennas.
        rx_antennas: Number of receive antennas.

    """
    data_length: float
    compute_speed: float
    compute_power: float
    tx_antennas: int = 1
    rx_antennas: int = 1

    def __post_init__(self) -> None:
        # zero data is a degenerate node with no task, negative data is invalid
        if isinstance(self.data_length, bool) or not np.isfinite(self.data_length) or self.data_length < 0:
            raise InvalidInstanceError(f"Node data length should be finite and non-negative, got {self.data_length}.")
        check_positive("compute_speed", self.compute_speed, InvalidInstanceError)
        check_positive("compute_power", self.compute_power, InvalidInstanceError)
        check_positive_int("tx_antennas", self.tx_antennas, InvalidInstanceError)
        check_positive_int("rx_antennas", self.rx_antennas, InvalidInstanceError)


@dataclass(frozen=True)
class NetworkInstance:
    """
    Group of K nodes sharing a power budget and S equal-bandwidth subchannels.

    attributes:
        nodes: Profiles of all nodes.
        power_budget: Network-wide transmit power budget P in watts.
        bandwidth: Bandwidth W of one subchannel in hertz.
        noise_power: Receiver noise power sigma^2.
        num_subchannels: Number of subchannels S.

    """
    nodes: Tuple[NodeProfile, ...]
    power_budget: float
    bandwidth: float
    noise_power: float = 1.0
    num_subchannels: int = 1

    def __post_init__(self) -> None:
        # check node count and types
        object.__setattr__(self, "nodes", tuple(self.nodes))
        if len(self.nodes) < 2:
            raise InvalidInstanceError(f"Network needs at least 2 nodes, got {len(self.nodes)}.")
        for node in self.nodes:
            if not isinstance(node, NodeProfile):
                raise InvalidInstanceError("Every node should be a NodeProfile.")
        # check physical values
        check_positive("power_budget", self.power_budget, InvalidInstanceError)
        check_positive("bandwidth", self.bandwidth, InvalidInstanceError)
        check_positive("noise_power", self.noise_power, InvalidInstanceError)
        check_positive_int("num_subchannels", self.num_subchannels, InvalidInstanceError)

    @property
    def num_nodes(self) -> int:
        """Number of nodes K."""
        return len(self.nodes)

    @property
    def max_links(self) -> int:
        """Largest number of node-disjoint links, floor(K/2)."""
        return self.num_nodes // 2

    @property
    def default_link_power(self) -> float:
        """Per-link power P/L_max used for fresh links."""
        return self.power_budget / self.max_links

    @property
    def data_lengths(self) -> np.ndarray:
        """Data lengths of all nodes in bits."""
        return np.array([node.data_length for node in self.nodes], dtype=float)


class ChannelSet(Mapping):
    """
    Complex channel matrices H[k, k'] of shape (rx_antennas(k'), tx_antennas(k)) for every ordered pair k != k'.

    """

    def __init__(self, channels: Mapping[Pair, np.ndarray]) -> None:
        """
        Complex channel matrices for every ordered node pair.

        :param channels: Mapping from (tx, rx) to channel matrix.
        """
        self._channels: Dict[Pair, np.ndarray] = {}
        # store read-only complex copies
        for (tx, rx), matrix in channels.items():
            matrix = np.array(matrix, dtype=complex)
            if matrix.ndim != 2:
                raise InvalidInstanceError(f"Channel {(tx, rx)} should be a matrix, got shape {matrix.shape}.")
            matrix.setflags(write=False)
            self._channels[(int(tx), int(rx))] = matrix

    def __getitem__(self, pair: Pair) -> np.ndarray:
        return self._channels[pair]

    def __iter__(self) -> Iterator[Pair]:
        return iter(self._channels)

    def __len__(self) -> int:
        return len(self._channels)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(pairs={len(self)})"

    def validate(self, net: NetworkInstance) -> None:
        """
        Check that every ordered pair of distinct nodes has one finite matrix of the declared shape.

        :param net: Network the channels belong to.
        :return: None or raise an exception.
        """
        # check if every ordered pair is present exactly once
        expected = {(k, kp) for k in range(net.num_nodes) for kp in range(net.num_nodes) if k != kp}
        if set(self._channels) != expected:
            missing = sorted(expected - set(self._channels))
            extra = sorted(set(self._channels) - expected)
            raise InvalidInstanceError(f"Channel set mismatch, missing pairs {missing}, unexpected pairs {extra}.")
        # check shapes and finiteness
        for (k, kp), matrix in self._channels.items():
            shape = (net.nodes[kp].rx_antennas, net.nodes[k].tx_antennas)
            if matrix.shape != shape:
                raise InvalidInstanceError(f"Channel {(k, kp)} has shape {matrix.shape}, expected {shape}.")
            if not np.all(np.isfinite(matrix)):
                raise InvalidInstanceError(f"Channel {(k, kp)} has non-finite entries.")


class Link(NamedTuple):
    """Directed link tx -> rx on one subchannel."""
    tx: int
    rx: int
    subchannel: int


@dataclass(frozen=True)
class Allocation:
    """
    Selected directed link pairs with their subchannels (the support of a^i_{k,k'}).

    """
    links: Tuple[Link, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "links", tuple(Link(int(tx), int(rx), int(i)) for tx, rx, i in self.links))

    @property
    def num_links(self) -> int:
        """Number of links L."""
        return len(self.links)

    @property
    def pairs(self) -> Tuple[Pair, ...]:
        """(tx, rx) of every link in link order."""
        return tuple((link.tx, link.rx) for link in self.links)

    @property
    def busy_nodes(self) -> FrozenSet[int]:
        """Nodes used by any link in any role."""
        return frozenset(node for link in self.links for node in (link.tx, link.rx))

    @property
    def used_subchannels(self) -> FrozenSet[int]:
        """Subchannels carrying at least one link."""
        return frozenset(link.subchannel for link in self.links)

    def with_link(self, tx: int, rx: int, subchannel: int) -> "Allocation":
        """
        Copy of this allocation with one more link appended.

        :param tx: Transmitting node.
        :param rx: Receiving node.
        :param subchannel: Subchannel of the new link.
        :return: New allocation.
        """
        return Allocation(self.links + (Link(tx, rx, subchannel),))

    def canonical(self) -> "Allocation":
        """
        Links sorted by (tx, rx) with subchannels relabeled in order of first use.

        :return: Canonical allocation with the same energy as this one.
        """
        # sort links, then number subchannels by first use
        links = sorted(self.links, key=lambda link: (link.tx, link.rx))
        relabel: Dict[int, int] = {}
        for link in links:
            relabel.setdefault(link.subchannel, len(relabel))
        return Allocation(tuple(Link(link.tx, link.rx, relabel[link.subchannel]) for link in links))

    def validate(self, net: NetworkInstance, candidates: Optional[Iterable[Pair]] = None) -> None:
        """
        Check node-disjointness, absence of self-links, subchannel range and, optionally, candidate membership.

        :param net: Network the allocation belongs to.
        :param candidates: Allowed (tx, rx) pairs, or None to skip the check.
        :return: None or raise an exception.
        """
        # check nodes, subchannels and disjointness of every link
        seen = set()
        for link in self.links:
            if not (0 <= link.tx < net.num_nodes and 0 <= link.rx < net.num_nodes):
                raise InvalidAllocationError(f"Link {link} uses a node outside 0..{net.num_nodes - 1}.")
            if link.tx == link.rx:
                raise InvalidAllocationError(f"Link {link} is a self-link.")
            if not 0 <= link.subchannel < net.num_subchannels:
                raise InvalidAllocationError(f"Link {link} uses subchannel outside 0..{net.num_subchannels - 1}.")
            for node in (link.tx, link.rx):
                if node in seen:
                    raise InvalidAllocationError(f"Node {node} appears in more than one link.")
                seen.add(node)
        # check candidate membership
        if candidates is not None:
            allowed = set(candidates)
            for pair in self.pairs:
                if pair not in allowed:
                    raise InvalidAllocationError(f"Link {pair} isn't in the candidate set.")


def matched_filter(channel: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Dominant right and left singular vectors of a channel matrix.

    :param channel: Channel matrix H.
    :return: Unit-norm transmit direction v and receive combiner u with H v = s_max u.
    """
    u, _, vh = scipy.linalg.svd(channel)
    return vh[0].conj(), u[:, 0]


@dataclass(frozen=True, eq=False)
class BeamformingState:
    """
    Per-link combined beamformers g = sqrt(P) f and receive combiners z, keyed by (tx, rx).

    Pairs without an entry fall back to matched-filter defaults at power P/L_max.

    """
    beamformers: Mapping[Pair, np.ndarray] = field(default_factory=dict)
    combiners: Mapping[Pair, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "beamformers", {p: np.asarray(g, dtype=complex) for p, g in self.beamformers.items()})
        object.__setattr__(self, "combiners", {p: np.asarray(z, dtype=complex) for p, z in self.combiners.items()})

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(pairs={sorted(self.beamformers)})"

    def for_pair(self, tx: int, rx: int, ch: ChannelSet, net: NetworkInstance) -> Tuple[np.ndarray, np.ndarray]:
        """
        Beamformer and combiner of a pair, matched-filter defaults where missing.

        :param tx: Transmitting node.
        :param rx: Receiving node.
        :param ch: Channel set.
        :param net: Network instance (for the default power P/L_max).
        :return: Tuple (g, z).
        """
        # fall back to the dominant singular pair where an entry is missing
        g = self.beamformers.get((tx, rx))
        z = self.combiners.get((tx, rx))
        if g is None or z is None:
            v, u = matched_filter(ch[(tx, rx)])
            if g is None:
                g = np.sqrt(net.default_link_power) * v
            if z is None:
                z = u
        return g, z

    @property
    def powers(self) -> Dict[Pair, float]:
        """Transmit power ||g||^2 of every stored link."""
        return {pair: float(np.vdot(g, g).real) for pair, g in self.beamformers.items()}

    @property
    def directions(self) -> Dict[Pair, np.ndarray]:
        """Unit-norm beamformer directions f = g / ||g|| (zero for a silent link)."""
        out = {}
        for pair, g in self.beamformers.items():
            norm = np.linalg.norm(g)
            out[pair] = g / norm if norm > 0 else np.zeros_like(g)
        return out

    def total_power(self, alloc: Allocation, ch: ChannelSet, net: NetworkInstance) -> float:
        """
        Sum of squared beamformer norms over the links of an allocation.

        :param alloc: Allocation whose links are summed.
        :param ch: Channel set.
        :param net: Network instance.
        :return: Total transmit power in watts.
        """
        total = 0.0
        for tx, rx in alloc.pairs:
            g, _ = self.for_pair(tx, rx, ch, net)
            total += float(np.vdot(g, g).real)
        return total

    def restricted_to(self, alloc: Allocation, ch: ChannelSet, net: NetworkInstance) -> "BeamformingState":
        """
        State holding exactly the links of an allocation, defaults filled in.

        :param alloc: Allocation to keep.
        :param ch: Channel set.
        :param net: Network instance.
        :return: New state.
        """
        beamformers, combiners = {}, {}
        for tx, rx in alloc.pairs:
            beamformers[(tx, rx)], combiners[(tx, rx)] = self.for_pair(tx, rx, ch, net)
        return BeamformingState(beamformers, combiners)


@dataclass(frozen=True)
class EnergyBreakdown:
    """
    Total, communication and computation energy of a configuration in joules.

    """
    total: float
    communication: float
    computation: float

    @classmethod
    def mean(cls, items: Sequence["EnergyBreakdown"]) -> "EnergyBreakdown":
        """
        Component-wise arithmetic mean.

        :param items: Non-empty sequence of breakdowns.
        :return: Mean breakdown.
        """
        n = len(items)
        return cls(total=sum(e.total for e in items) / n,
                   communication=sum(e.communication for e in items) / n,
                   computation=sum(e.computation for e in items) / n)


def cooccurrence(alloc: Allocation) -> np.ndarray:
    """
    Binary subchannel co-occurrence matrix M of an allocation.

    :param alloc: Valid allocation.
    :return: Symmetric L x L integer matrix with M[n, m] = 1 iff links n and m share a subchannel.
    """
    sub = np.array([link.subchannel for link in alloc.links], dtype=int)
    return (sub[:, None] == sub[None, :]).astype(int)


def link_sinr(n: int, alloc: Allocation, bf: BeamformingState, ch: ChannelSet, net: NetworkInstance,
              m_matrix: Optional[np.ndarray] = None) -> float:
    """
    Signal to interference plus noise ratio of link n.

    Noise enters as sigma^2 ||z||^2, which is sigma^2 for unit-norm combiners and makes the ratio
    invariant to any nonzero scaling of z.

    :param n: Link index.
    :param alloc: Allocation.
    :param bf: Beamforming state.
    :param ch: Channel set.
    :param net: Network instance.
    :param m_matrix: Precomputed co-occurrence matrix.
    :return: SINR, 0 for a silent link or a zero combiner.
    """
    if m_matrix is None:
        m_matrix = cooccurrence(alloc)
    tx, rx, _ = alloc.links[n]
    g, z = bf.for_pair(tx, rx, ch, net)

    # check for a degenerate signal term
    noise = net.noise_power * float(np.vdot(z, z).real)
    signal = abs(np.vdot(z, ch[(tx, rx)] @ g)) ** 2
    if signal == 0.0 or noise == 0.0:
        return 0.0

    # co-channel interference at the receiver
    interference = 0.0
    for m, (tx_m, rx_m, _) in enumerate(alloc.links):
        if m == n or not m_matrix[n, m]:
            continue
        g_m, _ = bf.for_pair(tx_m, rx_m, ch, net)
        interference += abs(np.vdot(z, ch[(tx_m, rx)] @ g_m)) ** 2
    return signal / (interference + noise)


def link_rate(n: int, alloc: Allocation, bf: BeamformingState, ch: ChannelSet, net: NetworkInstance,
              m_matrix: Optional[np.ndarray] = None) -> float:
    """
    Maximum data rate W log2(1 + SINR) of link n in bits per second.

    A zero desired beamformer gives rate 0; callers must treat such a link as unusable.

    :param n: Link index.
    :param alloc: Allocation.
    :param bf: Beamforming state.
    :param ch: Channel set.
    :param net: Network instance.
    :param m_matrix: Precomputed co-occurrence matrix.
    :return: Rate in bits per second.
    """
    sinr = link_sinr(n, alloc, bf, ch, net, m_matrix)
    if sinr == 0.0:
        logger.debug("Link %s has a degenerate signal term, rate is 0.", alloc.links[n])
    return net.bandwidth * float(np.log2(1.0 + sinr))


def link_rates(alloc: Allocation, bf: BeamformingState, ch: ChannelSet, net: NetworkInstance) -> np.ndarray:
    """
    Rates of every link of an allocation under full mutual interference.

    :param alloc: Allocation.
    :param bf: Beamforming state.
    :param ch: Channel set.
    :param net: Network instance.
    :return: Array of L rates in bits per second.
    """
    m_matrix = cooccurrence(alloc)
    return np.array([link_rate(n, alloc, bf, ch, net, m_matrix) for n in range(alloc.num_links)], dtype=float)


def local_energy(k: int, net: NetworkInstance) -> float:
    """
    Energy F_k I_k / C_k of processing node k's task locally.

    :param k: Node index.
    :param net: Network instance.
    :return: Energy in joules.
    """
    node = net.nodes[k]
    return node.compute_power * node.data_length / node.compute_speed


def offload_energy(k: int, kp: int, rate: float, tx_power: float, net: NetworkInstance) -> float:
    """
    Energy of sending node k's task to node kp and processing it there.

    The processing term uses the sender's data length at the receiver's speed and power.

    :param k: Transmitting node.
    :param kp: Receiving node.
    :param rate: Link rate in bits per second.
    :param tx_power: Transmit power of node k in watts.
    :param net: Network instance.
    :return: Energy in joules.
    """
    if not rate > 0:
        raise InfeasibleLinkError(f"Link ({k}, {kp}) has rate {rate}, offloading over it is infeasible.")
    data = net.nodes[k].data_length
    receiver = net.nodes[kp]
    return tx_power * data / rate + receiver.compute_power * data / receiver.compute_speed


def total_energy(net: NetworkInstance, alloc: Allocation, rates: Sequence[float],
                 tx_powers: Sequence[float]) -> EnergyBreakdown:
    """
    Total energy of processing every task, split into communication and computation.

    :param net: Network instance.
    :param alloc: Allocation.
    :param rates: Rate of every link in bits per second.
    :param tx_powers: Transmit power of every link in watts.
    :return: Energy breakdown.
    """
    # check if rates and powers match the links
    if len(rates) != alloc.num_links or len(tx_powers) != alloc.num_links:
        raise InvalidAllocationError("Rates and powers should be given for every link.")

    # link index of every transmitting node
    sender = {link.tx: n for n, link in enumerate(alloc.links)}

    # local energy for idle senders, offload energy otherwise
    communication = 0.0
    total = 0.0
    for k in range(net.num_nodes):
        n = sender.get(k)
        if n is None:
            total += local_energy(k, net)
            continue
        rx = alloc.links[n].rx
        total += offload_energy(k, rx, rates[n], tx_powers[n], net)
        communication += tx_powers[n] * net.nodes[k].data_length / rates[n]

    return EnergyBreakdown(total=total, communication=communication, computation=total - communication)


def evaluate_energy(net: NetworkInstance, alloc: Allocation, bf: BeamformingState,
                    ch: ChannelSet) -> EnergyBreakdown:
    """
    Energy of an allocation with rates and powers taken from a beamforming state.

    :param net: Network instance.
    :param alloc: Allocation.
    :param bf: Beamforming state.
    :param ch: Channel set.
    :return: Energy breakdown under full mutual interference.
    """
    rates = link_rates(alloc, bf, ch, net)
    powers = [float(np.vdot(g, g).real) for g in (bf.for_pair(tx, rx, ch, net)[0] for tx, rx in alloc.pairs)]
    return total_energy(net, alloc, rates, powers)


def candidate_links(net: NetworkInstance) -> FrozenSet[Pair]:
    """
    Ordered pairs whose offloaded processing energy is below local processing energy.

    :param net: Network instance.
    :return: Candidate set X.
    """
    out: List[Pair] = []
    for k in range(net.num_nodes):
        data = net.nodes[k].data_length
        for kp in range(net.num_nodes):
            if k == kp:
                continue
            # compare local processing with processing at kp
            remote = net.nodes[kp].compute_power * data / net.nodes[kp].compute_speed
            if local_energy(k, net) > remote:
                out.append((k, kp))
    return frozenset(out)
