"""First-order descent method for set optimization with finitely many smooth selections."""

from .cone import Cone, make_orthant, validate
from .instances import Instance, builtin
from .solver import SolveParams, Status, solve

__all__ = ["Cone", "Instance", "SolveParams", "Status", "builtin", "make_orthant", "solve", "validate"]
__version__ = "0.1.0"
