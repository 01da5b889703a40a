""" Instance builders shared by the tests """


# global imports
from typing import Dict, Tuple
import numpy as np

# local imports
from src.backend.harness import ScenarioConfig, generate_instance
from src.backend.model import ChannelSet, NetworkInstance, NodeProfile, Pair


def random_channels(num_nodes: int, antennas: int, seed: int) -> ChannelSet:
    """Unit-variance circular complex Gaussian channels for every ordered pair."""
    rng = np.random.default_rng(seed)
    channels: Dict[Pair, np.ndarray] = {}
    for tx in range(num_nodes):
        for rx in range(num_nodes):
            if tx != rx:
                shape = (antennas, antennas)
                channels[(tx, rx)] = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    return ChannelSet(channels)


def uniform_network(num_nodes: int, antennas: int = 1, subchannels: int = 1, power: float = 1.0,
                    noise: float = 1.0, speeds: Tuple[float, ...] = (),
                    data: Tuple[float, ...] = ()) -> NetworkInstance:
    """Nodes with 1 W processors, 10 Mbit tasks and 1 Mbit/s speeds unless given."""
    speeds = speeds or (1e6,) * num_nodes
    data = data or (1e7,) * num_nodes
    nodes = tuple(NodeProfile(data_length=d, compute_speed=s, compute_power=1.0, tx_antennas=antennas,
                              rx_antennas=antennas) for d, s in zip(data, speeds))
    return NetworkInstance(nodes=nodes, power_budget=power, bandwidth=1e6, noise_power=noise,
                           num_subchannels=subchannels)


def seeded_instance(seed: int, num_nodes: int, antennas: int, subchannels: int,
                    power: float = 5.0) -> Tuple[NetworkInstance, ChannelSet]:
    """Instance drawn with the experiment generator."""
    cfg = ScenarioConfig(num_nodes=num_nodes, antennas=antennas, subchannels=subchannels, power_budget=power)
    return generate_instance(cfg, seed)
