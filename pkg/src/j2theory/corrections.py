"""Periodic corrections between mean and osculating states.

The maps act on the six polar-nodal functions of the Delaunay chart
(r, theta = f + g, nu = h, R, Theta = G, N = H).  These are regular at
e = 0, so the 1/e factors produced by differentiating through the
eccentricity cancel inside each bracket.  Corrected values are then turned
back into Delaunay elements through the Cartesian-free polar-nodal inversion.

Direct map, brackets evaluated at the mean state::

    xi = xi' + J2 {xi, W1} + J2^2/2 ({{xi, W1}, W1} + {xi, W2})

Inverse map, brackets evaluated at the osculating state::

    xi' = xi - J2 {xi, W1} + J2^2/2 ({{xi, W1}, W1} - {xi, W2})
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import genfun
from .elements import (
    DelaunayState,
    PhysicalConstants,
    PolarNodalState,
    delaunay_from_polar_nodal,
    eccentricity,
    polar_nodal_from_delaunay,
    wrap_angle,
)
from .hamiltonian import CRITICAL_GUARD
from .jets import Jet, OrbitJets, bracket, bracket_jet, lift_state

DEFAULT_E_FLOOR = 1e-6
# Below this eccentricity the second-order brackets are not evaluated in place:
# their Hessians carry 1/e^3 factors whose cancellation costs ~eps/e^3 in
# relative precision.  The brackets are smooth in e at fixed angles and
# inclination, so they are sampled on well-conditioned nodes and extrapolated.
SMALL_E = 2e-3
_NODES = SMALL_E * (1.0 + 1.5 * (1.0 - np.cos(np.pi * (np.arange(5) + 0.5) / 5)))


@dataclass(frozen=True)
class CorrectionOrder:
    order: int
    direction: str = "direct"

    def __post_init__(self):
        if self.order not in (0, 1, 2):
            raise ValueError("correction order must be 0, 1 or 2")
        if self.direction not in ("direct", "inverse"):
            raise ValueError("direction must be 'direct' or 'inverse'")


def polar_nodal_jets(o: OrbitJets) -> tuple[Jet, ...]:
    """(r, theta, nu, R, Theta, N) as jets of the Delaunay seeds."""
    R = o.e * (o.mu / o.G) * o.sin(1, 0)
    return (o.r, o.f + o.g, o.h, R, o.G, o.H)


def correction_terms(d: DelaunayState, order: int, c: PhysicalConstants,
                     guard: float = CRITICAL_GUARD, e_floor: float = DEFAULT_E_FLOOR):
    """First- and second-order pieces for the six polar-nodal functions.

    Returns ``(values, first, nested, second)`` where, per function xi,
    ``first = {xi, W1}``, ``nested = {{xi, W1}, W1}`` and ``second = {xi, W2}``
    (the last two are ``None`` when ``order < 2``).
    """
    o = OrbitJets(lift_state(d, 1), c.mu, e_floor)
    xs = polar_nodal_jets(o)
    W1 = genfun.w1(o, c, guard)
    values = [x.val for x in xs]
    first = [bracket(x, W1) for x in xs]
    if order < 2:
        return values, first, None, None
    nested, second = _second_order_pieces(d, c, guard, e_floor)
    return values, first, nested, second


def _second_order_in_place(d, c, guard, e_floor):
    o = OrbitJets(lift_state(d, 2), c.mu, e_floor)
    W1 = genfun.w1(o, c, guard)
    o1 = OrbitJets(lift_state(d, 1), c.mu, e_floor)
    W2 = genfun.w2(o1, c, guard)
    W1_1 = W1.truncate(1)
    nested, second = [], []
    for x in polar_nodal_jets(o):
        nested.append(bracket(bracket_jet(x, W1), W1_1))
        second.append(bracket(x.truncate(1), W2))
    return np.array(nested, dtype=float), np.array(second, dtype=float)


def _second_order_pieces(d, c, guard, e_floor):
    """{{xi, W1}, W1} and {xi, W2}, extrapolated in e for near-circular states."""
    e = np.atleast_1d(eccentricity(d.L, d.G))
    small = e < SMALL_E
    shape = np.shape(np.asarray(d.L))
    if not small.any():
        return _second_order_in_place(d, c, guard, e_floor)
    flat = [np.broadcast_to(np.asarray(v, dtype=float), e.shape) for v in d.as_tuple()]
    nested = np.zeros((6,) + e.shape)
    second = np.zeros((6,) + e.shape)
    big = ~small
    if big.any():
        sub = DelaunayState(*(v[big] for v in flat))
        nested[:, big], second[:, big] = _second_order_in_place(sub, c, guard, e_floor)
    ell, g, h, L, G, H = (v[small] for v in flat)
    cos_i = H / G
    target = e[small]
    acc_n = np.zeros((6, target.size))
    acc_s = np.zeros((6, target.size))
    for j, ej in enumerate(_NODES):
        Gj = L * np.sqrt((1.0 - ej) * (1.0 + ej))
        node = DelaunayState(ell, g, h, L, Gj, Gj * cos_i)
        nj, sj = _second_order_in_place(node, c, guard, e_floor)
        w = np.ones_like(target)
        for k, ek in enumerate(_NODES):
            if k != j:
                w = w * (target - ek) / (ej - ek)
        acc_n += w * nj
        acc_s += w * sj
    nested[:, small], second[:, small] = acc_n, acc_s
    return nested.reshape((6,) + shape), second.reshape((6,) + shape)


def _apply(d, order, c, guard, e_floor, sign):
    if order not in (0, 1, 2):
        raise ValueError("correction order must be 0, 1 or 2")
    if order == 0 or c.j2 == 0.0:
        return polar_nodal_from_delaunay(d, c.mu)
    values, first, nested, second = correction_terms(d, order, c, guard, e_floor)
    j2 = c.j2
    out = []
    for idx in range(6):
        x = values[idx] + sign * j2 * first[idx]
        if order == 2:
            x = x + 0.5 * j2 * j2 * (nested[idx] + sign * second[idx])
        out.append(x)
    # N = H is untouched: W does not depend on the node.
    out[5] = np.asarray(values[5], dtype=float).copy()
    return PolarNodalState(*out)


def mean_to_osculating(mean: DelaunayState, order: int, c: PhysicalConstants,
                       guard: float = CRITICAL_GUARD,
                       e_floor: float = DEFAULT_E_FLOOR) -> PolarNodalState:
    """Osculating polar-nodal state from a mean Delaunay state."""
    return _apply(mean, order, c, guard, e_floor, +1.0)


def osculating_to_mean(osc: DelaunayState, order: int, c: PhysicalConstants,
                       guard: float = CRITICAL_GUARD,
                       e_floor: float = DEFAULT_E_FLOOR) -> DelaunayState:
    """Mean Delaunay state from an osculating one."""
    if order == 0 or c.j2 == 0.0:
        return osc
    pn = _apply(osc, order, c, guard, e_floor, -1.0)
    return delaunay_from_polar_nodal(pn, c.mu)


def mean_to_osculating_delaunay(mean: DelaunayState, order: int, c: PhysicalConstants,
                                guard: float = CRITICAL_GUARD,
                                e_floor: float = DEFAULT_E_FLOOR) -> DelaunayState:
    if order == 0 or c.j2 == 0.0:
        return mean
    return delaunay_from_polar_nodal(mean_to_osculating(mean, order, c, guard, e_floor), c.mu)


# -- semi-major axis cross-checks ------------------------------------------------


def delta_a_first(d: DelaunayState, c: PhysicalConstants):
    """Closed-series first-order a-correction {a, W1} in km (per unit J2)."""
    o = OrbitJets(lift_state(d, 0), c.mu)
    return _out(genfun.delta_a_first(o, c).val)


def delta_a_second_inverse(d: DelaunayState, c: PhysicalConstants, guard: float = 1e-3):
    """Closed-series inverse second-order a-correction {Da, W1} - {a, W2} in km."""
    o = OrbitJets(lift_state(d, 0), c.mu)
    return _out(genfun.delta_a_second_inverse(o, c, guard).val)


def delta_a_brackets(d: DelaunayState, c: PhysicalConstants, guard: float = CRITICAL_GUARD,
                     e_floor: float = DEFAULT_E_FLOOR):
    """Bracket-engine values of ({a, W1}, {{a, W1}, W1}, {a, W2})."""
    o = OrbitJets(lift_state(d, 2), c.mu, e_floor)
    W1 = genfun.w1(o, c, guard)
    da = bracket_jet(o.a, W1)
    o1 = OrbitJets(lift_state(d, 1), c.mu, e_floor)
    W2 = genfun.w2(o1, c, guard)
    return _out(da.val), _out(bracket(da, W1.truncate(1))), _out(bracket(o1.a, W2))


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


__all__ = [
    "CorrectionOrder",
    "correction_terms",
    "delta_a_brackets",
    "delta_a_first",
    "delta_a_second_inverse",
    "mean_to_osculating",
    "mean_to_osculating_delaunay",
    "osculating_to_mean",
    "polar_nodal_jets",
    "wrap_angle",
]
