"""
Utility module for DT-IRS-Bench.

Contains shared constants, enums, the exception hierarchy, and helper functions
used throughout the codebase.
"""

import os
import random
from enum import Enum, auto, unique

import numpy as np
import torch


@unique
class Scheme(Enum):
    """
    Optimization schemes that can be run on a scenario.

    Values:
        PROPOSED: Five-step alternating optimization with DT backup and IRS.
        FULL_LOCAL: Every UD runs the whole network on its own CPU.
        FULL_OFFLOAD: Raw inputs are sent to the AP through the IRS.
        GA: Genetic search over cut layers, remaining blocks resolved per candidate.
        ADMM: Relaxed cut layers solved by consensus ADMM, then rounded.
    """

    PROPOSED = auto()
    FULL_LOCAL = auto()
    FULL_OFFLOAD = auto()
    GA = auto()
    ADMM = auto()

    @property
    def cli_name(self) -> str:
        """Get the name used on the command line and in output files."""
        match self:
            case Scheme.PROPOSED:
                return "proposed"
            case Scheme.FULL_LOCAL:
                return "full-local"
            case Scheme.FULL_OFFLOAD:
                return "full-offload"
            case Scheme.GA:
                return "ga"
            case Scheme.ADMM:
                return "admm"

    @classmethod
    def from_cli_name(cls, name: str) -> "Scheme":
        """Look up a scheme by its command-line name."""
        for scheme in cls:
            if scheme.cli_name == name:
                return scheme
        raise ValueError(f"unknown scheme: {name}")


def set_global_seed(seed: int) -> None:
    """
    Set random seeds for reproducibility across all libraries.

    Args:
        seed: Integer seed to use for all random number generators.
    """
    random.seed(seed)
    np.random.seed(seed)
    os.environ["PYTHONHASHSEED"] = str(seed)
    torch.manual_seed(seed)


# numerical tolerances
bisect_tol = 1e-12
bisect_max_iter = 200
unit_modulus_tol = 1e-9
power_budget_slack = 1e-9
dt_budget_slack = 1e-6
descent_slack = 1e-9
sdp_tol = 1e-7
sdp_max_iter = 200
phase_floor = 1e-15


class DtirsError(Exception):
    """Base class for every error raised by the library."""


class DomainError(DtirsError, ValueError):
    """An argument lies outside the domain of the function."""


class ShapeError(DtirsError, ValueError):
    """Array dimensions do not agree."""


class BracketError(DtirsError, ValueError):
    """A root search was started on an interval without a sign change."""


class ConvergenceError(DtirsError, RuntimeError):
    """
    An iterative method hit its iteration cap.

    Attributes:
        best: The best iterate found before giving up.
    """

    def __init__(self, message: str, best: object = None):
        super().__init__(message)
        self.best = best


class InfeasibleError(DtirsError):
    """
    A problem instance has no feasible point.

    Attributes:
        report: Details on the violated requirement.
    """

    def __init__(self, message: str, report: object = None):
        super().__init__(message)
        self.report = report


class ConfigError(DtirsError):
    """
    A scenario file could not be parsed or failed validation.

    Attributes:
        errors: One message per offending key.
    """

    def __init__(self, errors: list[str]):
        super().__init__("invalid config: " + "; ".join(errors))
        self.errors = errors
