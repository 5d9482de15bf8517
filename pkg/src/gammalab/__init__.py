"""Finite realization of an F-algebra whose uniform module has a prescribed
Gamma-invariant, with machine checks of its submodule and ideal structure.

The infinite index set (ordinal pairs below a regular cardinal) is truncated
to pairs of integers below ``n``; every computation is exact.
"""

from .index import Index, Instance, concat, enumerate_y, initial_segment, y_slice
from .linalg import Field, Subspace
from .operators import Generator, Model, apply_generator, enumerate_generators
from .rewrite import CanonicalForm, compose_pair, normalize, parse_expression, realize

__all__ = [
    "CanonicalForm",
    "Field",
    "Generator",
    "Index",
    "Instance",
    "Model",
    "Subspace",
    "apply_generator",
    "compose_pair",
    "concat",
    "enumerate_generators",
    "enumerate_y",
    "initial_segment",
    "normalize",
    "parse_expression",
    "realize",
    "y_slice",
]

__version__ = "0.1.0"
