"""Numerical truth for the main problem: Cartesian integration and RSS errors.

The integrator is scipy's DOP853 (an embedded 8(5,3) Runge-Kutta pair with
dense output) at a tight relative tolerance.  ``self_convergence`` measures
the truth error budget by comparing against a tighter reference run.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .elements import CartesianState, PhysicalConstants
from .errors import DomainError, IntegrationError

MIN_TOL = 1e-14
MAX_TOL = 1e-9
# scipy refuses relative tolerances below 100 * machine epsilon
_SCIPY_RTOL_FLOOR = 100 * np.finfo(float).eps


def main_problem_potential(pos, c: PhysicalConstants):
    """Gravitational potential energy per unit mass, -mu/r (1 - J2 (Re/r)^2 P2(z/r))."""
    x = np.asarray(pos, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r <= 0):
        raise DomainError("zero radius")
    sinlat2 = (x[..., 2] / r) ** 2
    return -c.mu / r * (1.0 - c.j2 * (c.re / r) ** 2 * 0.5 * (3.0 * sinlat2 - 1.0))


def main_problem_acceleration(pos, c: PhysicalConstants):
    """Two-body plus J2 acceleration (km/s^2), the negative potential gradient."""
    x = np.asarray(pos, dtype=float)
    r2 = np.sum(x * x, axis=-1)
    if np.any(r2 <= 0):
        raise DomainError("zero radius")
    r = np.sqrt(r2)
    z2 = x[..., 2] ** 2 / r2
    k = 1.5 * c.j2 * c.mu * c.re**2 / (r2 * r2 * r)
    acc = -c.mu / (r2 * r)[..., None] * x + (k * (5.0 * z2 - 1.0))[..., None] * x
    acc[..., 2] -= 2.0 * k * x[..., 2]
    return acc


def specific_energy(state, c: PhysicalConstants):
    """Osculating energy v^2/2 + potential for Cartesian state arrays (..., 6)."""
    s = np.asarray(state, dtype=float)
    return 0.5 * np.sum(s[..., 3:] ** 2, axis=-1) + main_problem_potential(s[..., :3], c)


def polar_angular_momentum(state):
    s = np.asarray(state, dtype=float)
    return s[..., 0] * s[..., 4] - s[..., 1] * s[..., 3]


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray
    states: np.ndarray
    nfev: int
    steps: int
    tol: float

    def cartesian(self, i: int) -> CartesianState:
        return CartesianState.from_array(self.states[i])

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :3]


def integrate_trajectory(x0: CartesianState, times, tol: float, c: PhysicalConstants,
                         atol_scale: float = 1e-3) -> Trajectory:
    """Integrate from t=0 and sample the dense output at ``times`` (seconds)."""
    if not MIN_TOL <= tol <= MAX_TOL:
        raise DomainError(f"oracle tolerance must lie in [{MIN_TOL:g}, {MAX_TOL:g}]")
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if times.ndim != 1 or np.any(np.diff(times) <= 0):
        raise DomainError("sample times must be strictly increasing")
    y0 = np.asarray(x0.as_array(), dtype=float)
    t_end = float(times[-1])
    if t_end == 0.0:
        return Trajectory(times.copy(), y0[None, :].copy(), 0, 0, tol)
    rtol = max(tol, _SCIPY_RTOL_FLOOR)
    scale = np.concatenate([np.full(3, np.linalg.norm(y0[:3])), np.full(3, np.linalg.norm(y0[3:]))])
    atol = rtol * atol_scale * scale

    def rhs(_t, y):
        return np.concatenate([y[3:], main_problem_acceleration(y[:3], c)])

    sol = solve_ivp(rhs, (0.0, t_end), y0, method="DOP853", rtol=rtol, atol=atol,
                    t_eval=times, dense_output=False)
    if not sol.success:
        raise IntegrationError(f"integration failed: {sol.message}")
    steps = int(round(sol.nfev / 12))
    return Trajectory(sol.t.copy(), sol.y.T.copy(), int(sol.nfev), steps, rtol)


def compare_rss(analytic_t, analytic_pos, truth: Trajectory):
    """(t, RSS) with RSS the Euclidean position difference at each sample."""
    t = np.asarray(analytic_t, dtype=float)
    pos = np.asarray(analytic_pos, dtype=float)
    if t.shape != truth.t.shape or not np.allclose(t, truth.t, rtol=0, atol=1e-9):
        raise DomainError("analytic and truth time grids differ")
    return t, np.linalg.norm(pos - truth.positions, axis=-1)


def compare_records(records, truth: Trajectory):
    t = np.array([r.t for r in records])
    pos = np.array([np.asarray(r.state.position) for r in records])
    return compare_rss(t, pos, truth)


def energy_drift(traj: Trajectory, c: PhysicalConstants) -> float:
    E = specific_energy(traj.states, c)
    return float(np.max(np.abs(E - E[0]) / abs(E[0])))


def hz_drift(traj: Trajectory) -> float:
    hz = polar_angular_momentum(traj.states)
    return float(np.max(np.abs(hz - hz[0]) / abs(hz[0])))


@dataclass(frozen=True)
class ConvergenceStudy:
    tols: tuple[float, ...]
    errors_km: tuple[float, ...]
    reference_tol: float
    rate: float
    truth_error_km: float


def self_convergence(x0: CartesianState, times, c: PhysicalConstants, tol: float = 1e-13,
                     ladder=(1e-11, 1e-12)) -> ConvergenceStudy:
    """Truth error budget of a run at ``tol``.

    Runs at the ``ladder`` tolerances and at ``tol`` are compared with a
    reference at the tightest tolerance scipy accepts.  The observed rate
    ``err ~ tol**rate`` (from the last two ladder points) extrapolates the
    reference's own error, which is added to the measured distance.
    """
    ref = integrate_trajectory(x0, times, MIN_TOL, c)
    tols = tuple(ladder) + (tol,)
    errs = []
    for tl in tols:
        run = integrate_trajectory(x0, times, tl, c)
        errs.append(float(np.max(np.linalg.norm(run.positions - ref.positions, axis=-1))))
    rate = 1.0
    if len(ladder) >= 2 and errs[-2] > 0 and errs[-3] > 0:
        rate = float(np.log(errs[-3] / errs[-2]) / np.log(tols[-3] / tols[-2]))
    q = (ref.tol / max(tol, _SCIPY_RTOL_FLOOR)) ** max(rate, 0.5)
    q = min(q, 0.9)
    budget = errs[-1] + errs[-1] * q / (1.0 - q)
    return ConvergenceStudy(tols, tuple(errs), ref.tol, rate, budget)
