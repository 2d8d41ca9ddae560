"""Theory initialization, secular propagation and ephemeris generation.

A theory variant is labelled ``I:S:D`` (inverse, secular and direct orders),
with a ``+`` after ``I`` when the mean action L is recalibrated from the
osculating energy.  A calibrated variant works at order ``k = I + 1`` (unless
an explicit calibration order is configured): the energy balance and the
frequency sums then both run to ``max(S, k)``, so ``2+:2:2`` carries the
third-order secular term in the mean motion.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

import numpy as np

from .corrections import DEFAULT_E_FLOOR, mean_to_osculating, osculating_to_mean
from .elements import (
    EARTH,
    CartesianState,
    DelaunayState,
    PhysicalConstants,
    cartesian_from_polar_nodal,
    wrap_angle,
)
from .errors import InvalidEnergyError
from .hamiltonian import (
    CRITICAL_GUARD,
    eval_osculating_hamiltonian,
    secular_frequencies,
    secular_hamiltonian,
)

_LABEL = re.compile(r"^\s*\{?\s*([0-2])(\+?)\s*:\s*([1-3])\s*:\s*([0-2])\s*\}?\s*$")


@dataclass(frozen=True)
class TheoryConfig:
    inverse_order: int = 2
    secular_order: int = 2
    direct_order: int = 2
    calibrate: bool = True
    constants: PhysicalConstants = field(default_factory=lambda: EARTH)
    critical_guard: float = CRITICAL_GUARD
    e_floor: float = DEFAULT_E_FLOOR
    calibration_order: int | None = None

    def __post_init__(self):
        if self.inverse_order not in (0, 1, 2):
            raise ValueError("inverse_order must be 0, 1 or 2")
        if self.secular_order not in (1, 2, 3):
            raise ValueError("secular_order must be 1, 2 or 3")
        if self.direct_order not in (0, 1, 2):
            raise ValueError("direct_order must be 0, 1 or 2")
        if self.calibration_order is not None and self.calibration_order not in (1, 2, 3):
            raise ValueError("calibration_order must be 1, 2 or 3")
        if self.critical_guard <= 0 or self.e_floor <= 0:
            raise ValueError("guards must be positive")

    @classmethod
    def from_label(cls, label: str, **kw) -> "TheoryConfig":
        m = _LABEL.match(label)
        if not m:
            raise ValueError(f"bad theory label {label!r}; expected e.g. '2+:2:2'")
        return cls(int(m.group(1)), int(m.group(3)), int(m.group(4)), m.group(2) == "+", **kw)

    @property
    def label(self) -> str:
        plus = "+" if self.calibrate else ""
        return f"{self.inverse_order}{plus}:{self.secular_order}:{self.direct_order}"

    @property
    def energy_order(self) -> int:
        """Truncation order of the secular Hamiltonian used for calibration."""
        if self.calibration_order is not None:
            return self.calibration_order
        return min(self.inverse_order + 1, 3)

    @property
    def frequency_order(self) -> int:
        """Truncation order of the secular frequency sums."""
        if self.calibrate:
            return max(self.secular_order, self.energy_order)
        return self.secular_order

    def with_constants(self, constants: PhysicalConstants) -> "TheoryConfig":
        return replace(self, constants=constants)


@dataclass(frozen=True)
class SecularConstants:
    mean: DelaunayState
    L_hat: float
    n_ell: float
    n_g: float
    n_h: float
    label: str = ""


@dataclass(frozen=True)
class EphemerisRecord:
    t: float
    state: CartesianState
    source: str


def calibrate_L(E0, L, G, H, k: int, c: PhysicalConstants, guard: float = CRITICAL_GUARD):
    """Action L_hat whose Keplerian energy balances E0 against the secular terms."""
    kepler = -c.mu**2 / (2.0 * np.asarray(L, dtype=float) ** 2)
    pert = np.asarray(secular_hamiltonian(k, L, G, H, c, guard)) - kepler
    radicand = 2.0 * (pert - np.asarray(E0, dtype=float))
    if np.any(~(radicand > 0)):
        raise InvalidEnergyError("calibration radicand is not positive (unbound energy?)")
    out = c.mu / np.sqrt(radicand)
    return float(out) if np.ndim(out) == 0 else out


def initialize_theory(osc: DelaunayState, cfg: TheoryConfig) -> SecularConstants:
    c = cfg.constants
    mean = osculating_to_mean(osc, cfg.inverse_order, c, cfg.critical_guard, cfg.e_floor)
    L_hat = float(mean.L)
    if cfg.calibrate:
        E0 = eval_osculating_hamiltonian(osc, c)
        L_hat = calibrate_L(E0, mean.L, mean.G, mean.H, cfg.frequency_order, c,
                            cfg.critical_guard)
    n_ell, n_g, n_h = secular_frequencies(L_hat, mean.L, mean.G, mean.H, cfg.frequency_order,
                                          c, cfg.critical_guard)
    return SecularConstants(mean, L_hat, float(n_ell), float(n_g), float(n_h), cfg.label)


def propagate_mean(sc: SecularConstants, t) -> DelaunayState:
    t = np.asarray(t, dtype=float)
    m = sc.mean
    ones = np.ones_like(t)
    return DelaunayState(
        wrap_angle(m.ell + sc.n_ell * t),
        wrap_angle(m.g + sc.n_g * t),
        wrap_angle(m.h + sc.n_h * t),
        m.L * ones,
        m.G * ones,
        m.H * ones,
    )


def ephemeris_states(sc: SecularConstants, times, cfg: TheoryConfig) -> CartesianState:
    """Batched Cartesian states at ``times`` (arrays of shape (n, 3))."""
    times = np.atleast_1d(np.asarray(times, dtype=float))
    mean = propagate_mean(sc, times)
    pn = mean_to_osculating(mean, cfg.direct_order, cfg.constants, cfg.critical_guard, cfg.e_floor)
    return cartesian_from_polar_nodal(pn)


def generate_ephemeris(sc: SecularConstants, times, cfg: TheoryConfig) -> list[EphemerisRecord]:
    times = np.atleast_1d(np.asarray(times, dtype=float))
    states = ephemeris_states(sc, times, cfg)
    source = cfg.label
    return [
        EphemerisRecord(float(t), CartesianState(states.position[i], states.velocity[i]), source)
        for i, t in enumerate(times)
    ]
