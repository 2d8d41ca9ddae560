"""Closed-form J2 main-problem theory with a single Lie transformation.

Modules: ``elements`` (charts and Kepler's equation), ``jets`` (second-order
derivative arithmetic and Poisson brackets), ``hamiltonian``, ``genfun``
(generating function and its series), ``corrections`` (mean and osculating
maps), ``secular`` (initialization and propagation), ``oracle`` (numerical
truth) and ``cli``.
"""

from .elements import (
    EARTH,
    CartesianState,
    DelaunayState,
    KeplerianSet,
    PhysicalConstants,
    PolarNodalState,
    cartesian_from_delaunay,
    delaunay_from_cartesian,
    delaunay_from_keplerian,
)
from .secular import (
    TheoryConfig,
    ephemeris_states,
    generate_ephemeris,
    initialize_theory,
    propagate_mean,
)

__version__ = "0.1.0"

__all__ = [
    "EARTH",
    "CartesianState",
    "DelaunayState",
    "KeplerianSet",
    "PhysicalConstants",
    "PolarNodalState",
    "TheoryConfig",
    "cartesian_from_delaunay",
    "delaunay_from_cartesian",
    "delaunay_from_keplerian",
    "ephemeris_states",
    "generate_ephemeris",
    "initialize_theory",
    "propagate_mean",
]
