"""
Various objects used for validation.
"""


# global imports
import math
from typing import Any, Sequence, Type

# local imports
from ..errors.errors import ValidationError


def check_positive(name: str, value: Any, error: Type[Exception] = ValidationError) -> None:
    """
    Check that value is a finite number strictly above zero.

    :param name: Name of the checked parameter, used in error message.
    :param value: Checked value.
    :param error: Exception class raised on failure.
    :return: None or raise an exception.
    """
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise error(f"Value of parameter '{name}' should be a number.")
    if not math.isfinite(value) or value <= 0:
        raise error(f"Value of parameter '{name}' should be finite and strictly positive, got {value}.")


def check_positive_int(name: str, value: Any, error: Type[Exception] = ValidationError) -> None:
    """
    Check that value is an integer not less than one.

    :param name: Name of the checked parameter, used in error message.
    :param value: Checked value.
    :param error: Exception class raised on failure.
    :return: None or raise an exception.
    """
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise error(f"Value of parameter '{name}' should be an integer >= 1, got {value!r}.")


def check_range(name: str, value: Any, positive: bool = True) -> None:
    """
    Check that value is a [low, high] pair with low <= high.

    :param name: Name of the checked parameter, used in error message.
    :param value: Checked value.
    :param positive: Require low to be strictly positive.
    :return: None or raise an exception.
    """
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError(f"Value of parameter '{name}' should be a list [low, high].")
    low, high = value
    for bound in (low, high):
        if isinstance(bound, bool) or not isinstance(bound, (int, float)) or not math.isfinite(bound):
            raise ValidationError(f"Bounds of parameter '{name}' should be finite numbers.")
    if low > high:
        raise ValidationError(f"Range of parameter '{name}' is empty: {low} > {high}.")
    if positive and low <= 0:
        raise ValidationError(f"Lower bound of parameter '{name}' should be strictly positive.")


def is_proper(num_nodes: int, antennas: int) -> bool:
    """
    Antenna properness condition 2N >= floor(K/2) + 1.

    :param num_nodes: Number of nodes K.
    :param antennas: Antennas per node N.
    :return: True when the configuration is proper.
    """
    return 2 * antennas >= num_nodes // 2 + 1


def check_members(name: str, values: Sequence[Any], allowed: Sequence[Any]) -> None:
    """
    Check that every element of values is one of allowed.

    :param name: Name of the checked parameter, used in error message.
    :param values: Checked values.
    :param allowed: Supported values.
    :return: None or raise an exception.
    """
    for v in values:
        if v not in allowed:
            raise ValidationError(f"Value '{v}' of parameter '{name}' isn't supported, use one of {list(allowed)}.")
