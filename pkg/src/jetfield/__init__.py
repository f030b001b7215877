"""Numerical geometry of metric Lagrangians on the 1-jet bundle.

From a scenario (temporal metric, spatial Lagrangian data, field constants)
the library evaluates, at sampled jet points, the canonical nonlinear and
linear connections, their torsion and curvature families, electromagnetic
and gravitational field objects, and the residuals of every identity those
objects satisfy: metricity, structural zeros, Bianchi, Maxwell, Einstein
block structure and conservation laws.
"""

from .errors import (
    DomainError,
    JetfieldError,
    OrderError,
    ParseError,
    ScenarioError,
    SingularMatrixError,
)
from .jets import JetSpace, JetValue, jet_space

__all__ = [
    "DomainError",
    "JetfieldError",
    "OrderError",
    "ParseError",
    "ScenarioError",
    "SingularMatrixError",
    "JetSpace",
    "JetValue",
    "jet_space",
]

__version__ = "0.1.0"
