"""Osculating main-problem Hamiltonian and the completely reduced secular terms.

Theory functions take an evaluation context (an :class:`~j2theory.jets.OrbitJets`
or a :class:`MomentaJets`) plus the physical constants and return a jet.  The
inclination enters only through ``s2 = sin^2 I``.  The plain-number wrappers at
the bottom are the public API for callers that do not need derivatives.
"""

from __future__ import annotations

from math import factorial

import numpy as np

from .elements import DelaunayState, PhysicalConstants
from .errors import CriticalInclinationError
from .jets import Jet, OrbitJets, constant, lift_state
from .tables import default_tables

CRITICAL_GUARD = 1e-3


def check_critical(s2, guard: float = CRITICAL_GUARD):
    """Refuse states inside the band |5 s^2 - 4| < guard."""
    s2 = s2.val if isinstance(s2, Jet) else np.asarray(s2)
    if np.any(np.abs(5.0 * s2 - 4.0) < guard):
        raise CriticalInclinationError(
            f"|5 s^2 - 4| below the critical-inclination guard {guard:g}"
        )


class MomentaJets:
    """Momentum-only context (L, G, H) for the angle-free secular terms."""

    def __init__(self, L, G, H, mu: float, order: int = 1):
        seeds = lift_state(DelaunayState(0.0, 0.0, 0.0, L, G, H), order)
        self.L, self.G, self.H = seeds[3], seeds[4], seeds[5]
        self.order = order
        self.mu = mu
        self.a = self.L * self.L / mu
        self.eta = self.G / self.L
        self.e2 = (self.L - self.G) * (self.L + self.G) / (self.L * self.L)
        self.s2 = (self.G - self.H) * (self.G + self.H) / (self.G * self.G)
        self.p = self.G * self.G / mu
        self.n = mu * mu / (self.L * self.L * self.L)


# -- osculating Hamiltonian ---------------------------------------------------


def h00(o, c: PhysicalConstants) -> Jet:
    return o.a.reciprocal() * (-0.5 * c.mu)


def h10(o: OrbitJets, c: PhysicalConstants) -> Jet:
    """J2 coefficient of the osculating Hamiltonian."""
    ratio = c.re / o.r
    bracket = 1.0 - 1.5 * o.s2 + 1.5 * o.s2 * o.cos(2, 2)
    return (c.mu / o.r) * ratio * ratio * bracket * (-0.5)


def osculating_hamiltonian(o: OrbitJets, c: PhysicalConstants) -> Jet:
    return h00(o, c) + c.j2 * h10(o, c)


# -- secular terms --------------------------------------------------------------


def h01(o, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    q = c.re / o.p
    return h00(o, c) * q * q * o.eta * (1.0 - 1.5 * o.s2)


def h02(o, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    q2 = (c.re / o.p) ** 2
    s2, eta = o.s2, o.eta
    s4 = s2 * s2
    poly = (
        5.0 * (7.0 * s4 - 16.0 * s2 + 8.0)
        + eta * (6.0 * s2 - 4.0) ** 2
        + eta * eta * (5.0 * s4 + 8.0 * s2 - 8.0)
    )
    return h00(o, c) * q2 * q2 * eta * poly * (3.0 / 32.0)


def h03(o, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    check_critical(o.s2, guard)
    beta = default_tables()["beta4"]
    q2 = (c.re / o.p) ** 2
    eta = o.eta
    acc = beta((0, 4), o.s2)
    for k in range(3, -1, -1):
        acc = acc * eta + beta((0, k), o.s2)
    d = 5.0 * o.s2 - 4.0
    return h00(o, c) * q2 * q2 * q2 * eta * acc / (d * d) * (9.0 / 512.0)


SECULAR_TERMS = {1: h01, 2: h02, 3: h03}


def secular_hamiltonian_jet(o, c: PhysicalConstants, k: int, guard: float = CRITICAL_GUARD) -> Jet:
    if not 0 <= k <= 3:
        raise ValueError("secular order must be 0..3")
    total = h00(o, c)
    for m in range(1, k + 1):
        total = total + SECULAR_TERMS[m](o, c, guard) * (c.j2**m / factorial(m))
    return total


# -- plain-number API -------------------------------------------------------------


def eval_osculating_hamiltonian(d: DelaunayState, c: PhysicalConstants):
    o = OrbitJets(lift_state(d, 0), c.mu)
    return _out(osculating_hamiltonian(o, c).val)


def eval_secular_term(m: int, L, G, H, c: PhysicalConstants, guard: float = CRITICAL_GUARD):
    if m not in SECULAR_TERMS:
        raise ValueError("secular term order must be 1, 2 or 3")
    return _out(SECULAR_TERMS[m](MomentaJets(L, G, H, c.mu, 0), c, guard).val)


def secular_hamiltonian(k: int, L, G, H, c: PhysicalConstants, guard: float = CRITICAL_GUARD):
    return _out(secular_hamiltonian_jet(MomentaJets(L, G, H, c.mu, 0), c, k, guard).val)


def secular_frequencies(L_hat, L, G, H, k: int, c: PhysicalConstants,
                        guard: float = CRITICAL_GUARD):
    """(n_ell, n_g, n_h) with the Keplerian mean motion taken at ``L_hat``."""
    if not 0 <= k <= 3:
        raise ValueError("secular order must be 0..3")
    m = MomentaJets(L, G, H, c.mu, 1)
    pert = constant(0.0, m.L)
    for j in range(1, k + 1):
        pert = pert + SECULAR_TERMS[j](m, c, guard) * (c.j2**j / factorial(j))
    n_ell = c.mu**2 / np.asarray(L_hat, dtype=float) ** 3 + pert.grad[..., 3]
    return _out(n_ell), _out(pert.grad[..., 4]), _out(pert.grad[..., 5])


def _out(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x
