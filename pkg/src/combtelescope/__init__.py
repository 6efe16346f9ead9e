"""Executable multiple combinatorial telescoping for Andrews' parity identities."""

from .errors import ContractError
from .partition import Partition
from .qpoly import (BiPoly, eval_a_one, gaussian_binomial, pochhammer_inv_series,
                    summand, theta_series)

__all__ = [
    "BiPoly",
    "ContractError",
    "Partition",
    "eval_a_one",
    "gaussian_binomial",
    "pochhammer_inv_series",
    "summand",
    "theta_series",
]

__version__ = "0.1.0"
