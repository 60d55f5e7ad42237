"""Joint largest-eigenvalue gap probabilities for two coupled GUE matrices.

Fredholm determinants of the extended Hermite matrix kernel, endpoint
observables, and a numerical verification suite for the PDE systems and
first integrals those probabilities satisfy.
"""

from .kernel import KernelParams
from .fredholm import solve, endpoint_data, resolvent_at, FredholmSolution, EndpointData

__version__ = "0.1.0"

__all__ = [
    "KernelParams",
    "FredholmSolution",
    "EndpointData",
    "solve",
    "endpoint_data",
    "resolvent_at",
]
