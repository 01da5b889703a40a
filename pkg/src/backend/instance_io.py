"""
Dump and restore network instances as JSON files.

Channel entries are stored as [real, imag] pairs of full-precision floats, so a dump restores exactly.
"""


# global imports
import os
import json
from pathlib import Path
from typing import Any, Dict, Tuple
import numpy as np

# local imports
from .model import ChannelSet, NetworkInstance, NodeProfile
from ..errors.errors import InvalidFileFormat, InvalidFilePathError, InvalidInstanceError, ReadFileError


SCHEMA = "d2d-instance/1"


def instance_to_dict(net: NetworkInstance, ch: ChannelSet) -> Dict[str, Any]:
    """
    Plain JSON-compatible representation of an instance.

    :param net: Network instance.
    :param ch: Channel set.
    :return: Dictionary with schema tag.
    """
    return {
        "schema": SCHEMA,
        "power_budget": net.power_budget,
        "bandwidth": net.bandwidth,
        "noise_power": net.noise_power,
        "num_subchannels": net.num_subchannels,
        "nodes": [
            {"data_length": n.data_length, "compute_speed": n.compute_speed, "compute_power": n.compute_power,
             "tx_antennas": n.tx_antennas, "rx_antennas": n.rx_antennas}
            for n in net.nodes
        ],
        "channels": [
            {"tx": tx, "rx": rx,
             "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in ch[(tx, rx)]]}
            for tx, rx in sorted(ch)
        ],
    }


def instance_from_dict(data: Dict[str, Any]) -> Tuple[NetworkInstance, ChannelSet]:
    """
    Rebuild an instance from instance_to_dict output.

    :param data: Dictionary with schema tag.
    :return: Tuple (network instance, channel set).
    """
    if data.get("schema") != SCHEMA:
        raise InvalidInstanceError(f"Instance schema should be '{SCHEMA}', got {data.get('schema')!r}.")
    try:
        nodes = tuple(NodeProfile(**node) for node in data["nodes"])
        net = NetworkInstance(nodes=nodes, power_budget=data["power_budget"], bandwidth=data["bandwidth"],
                              noise_power=data["noise_power"], num_subchannels=data["num_subchannels"])
        channels = {}
        for entry in data["channels"]:
            matrix = np.array(entry["matrix"], dtype=float)
            channels[(entry["tx"], entry["rx"])] = matrix[..., 0] + 1j * matrix[..., 1]
    except (KeyError, TypeError, IndexError) as error:
        raise InvalidInstanceError(f"Instance description is incomplete: {error!r}.") from error

    ch = ChannelSet(channels)
    ch.validate(net)
    return net, ch


def dump_instance(net: NetworkInstance, ch: ChannelSet, path: str) -> None:
    """
    Write an instance to a .json file, creating parent directories.

    :param net: Network instance.
    :param ch: Channel set.
    :param path: Target file path.
    :return: None
    """
    if Path(path).suffix != ".json":
        raise InvalidFileFormat("Instance file must be in .json format.")
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(file=path, encoding="utf-8", mode="w") as instance_file:
        json.dump(instance_to_dict(net, ch), instance_file, indent=1)


def load_instance(path: str) -> Tuple[NetworkInstance, ChannelSet]:
    """
    Read an instance written by dump_instance.

    :param path: Source file path.
    :return: Tuple (network instance, channel set).
    """
    if not os.path.exists(path):
        raise InvalidFilePathError(f"Instance file '{path}' doesn't exist.")
    if Path(path).suffix != ".json":
        raise InvalidFileFormat("Instance file must be in .json format.")
    try:
        with open(file=path, encoding="utf-8", mode="r") as instance_file:
            data = json.load(instance_file)
    except (OSError, ValueError) as error:
        raise ReadFileError("Instance file is invalid and cannot be loaded correctly.") from error
    return instance_from_dict(data)
