"""
Errors of application.
"""


class InvalidFilePathError(FileNotFoundError):
    """
    This file path is invalid.
    """


class InvalidFileFormat(ValueError):
    """
    This file format is invalid.
    """


class ReadFileError(ValueError):
    """
    Exception on file reading.
    """


class ValidationError(Exception):
    """
    Error what occurred via validation process.
    """


class InvalidInstanceError(ValueError):
    """
    Network instance, node profile or channel set breaks its invariants.
    """


class InvalidAllocationError(ValueError):
    """
    Allocation breaks node-disjointness, self-link or subchannel constraints.
    """


class InfeasibleLinkError(ValueError):
    """
    Link has no positive rate, so its transfer energy is undefined.
    """


class ProblemSizeError(ValueError):
    """
    Instance is too large for exhaustive enumeration.
    """
