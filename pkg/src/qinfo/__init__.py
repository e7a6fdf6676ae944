"""Finite-dimensional quantum information toolkit.

Submodules: ``linalg`` (tensor products, partial trace, eigen and Schmidt
decompositions), ``states`` (density operators, measurements, channels),
``info`` (entropies, typical sets, compression), ``circuits`` (gate
simulator and oracle algorithms), ``protocols`` (teleportation, dense
coding, singlet statistics), ``qkd`` (key distribution), ``bitcommit``
(commitment cheating) and ``cli``.
"""

from .linalg import partial_trace, schmidt_decompose, tensor
from .states import Ensemble, KrausChannel, Povm

__version__ = "0.1.0"

__all__ = ["Ensemble", "KrausChannel", "Povm", "partial_trace", "schmidt_decompose", "tensor"]
