"""Exact computations with modules over blocks of tame representation type."""

from .fields import GF, field
from .linalg import FieldMatrix, kernel_basis, rank, rref, solve
from .presentations import (AlgebraPresentation, Quiver, instantiate, instantiate_family,
                            parse_presentation, print_presentation)
from .repmod import Algebra, Representation

__version__ = "0.1.0"
