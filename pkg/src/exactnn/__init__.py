"""Exact-arithmetic neural network execution and verification toolkit.

Networks run over arbitrary-precision rationals or integers with no floating
point anywhere in the verified path; properties are checked by brute-force
enumeration, sound interval propagation, or complete branch-and-bound over
relu phases with an exact linear-feasibility oracle.
"""

from .matrix import (
    DENSE,
    DimensionError,
    Matrix,
    SPARSE,
    Scalar,
    convert,
    dot_product,
    map2,
    parse_scalar,
    scalar_to_text,
    sub_matrix,
)
from .layers import (
    Convolution,
    Flatten,
    FullyConnected,
    LINEAR,
    MaxPool,
    Network,
    RELU,
    Tensor,
    argmax,
    flatten,
    relu,
    run,
    unflatten,
)

__version__ = "0.1.0"
