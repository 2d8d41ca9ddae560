"""Element charts and elliptic kinematics.

Keplerian elements, the canonical Delaunay chart, polar-nodal variables and
Cartesian states, plus the Kepler-equation solver that underlies all of them.
Units are km, s and rad.  Every function accepts scalars or numpy arrays of a
common shape.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from .errors import DomainError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PhysicalConstants:
    """Gravitational parameter, equatorial radius and J2 (J2 = -C20)."""

    mu: float = 398600.4415
    re: float = 6378.1363
    j2: float = 1.082626683e-3

    def __post_init__(self):
        if self.mu <= 0 or self.re <= 0:
            raise DomainError("mu and re must be positive")
        if not 0 <= self.j2 < 0.1:
            raise DomainError(f"J2 = {self.j2} is not a small positive coefficient")

    def with_j2(self, j2: float) -> "PhysicalConstants":
        return PhysicalConstants(self.mu, self.re, j2)


EARTH = PhysicalConstants()


class _State:
    def as_tuple(self):
        return tuple(getattr(self, f.name) for f in fields(self))


@dataclass(frozen=True)
class KeplerianSet(_State):
    a: float
    e: float
    inc: float
    node: float
    argp: float
    ell: float


@dataclass(frozen=True)
class DelaunayState(_State):
    ell: float
    g: float
    h: float
    L: float
    G: float
    H: float


@dataclass(frozen=True)
class PolarNodalState(_State):
    r: float
    theta: float
    nu: float
    R: float
    Theta: float
    N: float


@dataclass(frozen=True)
class CartesianState:
    position: np.ndarray
    velocity: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.position), np.asarray(self.velocity)], axis=-1)

    @classmethod
    def from_array(cls, x) -> "CartesianState":
        x = np.asarray(x, dtype=float)
        return cls(x[..., 0:3], x[..., 3:6])


@dataclass(frozen=True)
class AnomalySet:
    E: np.ndarray
    f: np.ndarray
    r: np.ndarray
    phi: np.ndarray


def wrap_angle(x):
    """Reduce to [0, 2*pi)."""
    y = np.mod(x, TWO_PI)
    return np.where(y >= TWO_PI, 0.0, y)


def wrap_pi(x):
    """Reduce to [-pi, pi)."""
    return np.mod(np.asarray(x) + np.pi, TWO_PI) - np.pi


def _check_ecc(e):
    e = np.asarray(e, dtype=float)
    if np.any(~np.isfinite(e)) or np.any(e < 0) or np.any(e >= 1):
        raise DomainError("eccentricity must lie in [0, 1)")
    return e


def solve_kepler(ell, e, tol: float = 1e-14, maxiter: int = 50):
    """Eccentric anomaly E solving E - e sin E = ell.

    Newton iteration from E0 = M + e sin M on the reduced anomaly, with a
    bisection fallback for any entry that has not converged after ``maxiter``
    steps.  The result is continuous in ``ell`` (the 2*pi winding is restored).
    """
    e = _check_ecc(e)
    ell = np.asarray(ell, dtype=float)
    ell, e = np.broadcast_arrays(ell, e)
    M = wrap_pi(ell)
    E = M + e * np.sin(M)
    for _ in range(maxiter):
        dE = (E - e * np.sin(E) - M) / (1.0 - e * np.cos(E))
        E = E - dE
        if np.all(np.abs(dE) <= 1e-16 * (1.0 + np.abs(E))):
            break
    resid = np.abs(E - e * np.sin(E) - M)
    bad = ~(resid <= tol)
    if np.any(bad):
        E = np.array(E, dtype=float, copy=True)
        E[bad] = _bisect_kepler(M[bad], e[bad], tol)
    out = E + (ell - M)
    return out if out.ndim else float(out)


def _bisect_kepler(M, e, tol):
    lo, hi = M - e, M + e
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f = mid - e * np.sin(mid) - M
        lo = np.where(f < 0, mid, lo)
        hi = np.where(f < 0, hi, mid)
        if np.all(hi - lo <= tol * 1e-2):
            break
    return 0.5 * (lo + hi)


def true_from_eccentric(E, e):
    """True anomaly, continuous in E (same winding)."""
    e = np.asarray(e, dtype=float)
    beta = e / (1.0 + np.sqrt(1.0 - e * e))
    return E + 2.0 * np.arctan2(beta * np.sin(E), 1.0 - beta * np.cos(E))


def eccentric_from_true(f, e):
    e = np.asarray(e, dtype=float)
    beta = e / (1.0 + np.sqrt(1.0 - e * e))
    return f - 2.0 * np.arctan2(beta * np.sin(f), 1.0 + beta * np.cos(f))


def anomalies_from_mean(ell, a, e) -> AnomalySet:
    """Eccentric and true anomalies, radius and equation of the center."""
    a = np.asarray(a, dtype=float)
    if np.any(a <= 0):
        raise DomainError("semi-major axis must be positive")
    E = np.asarray(solve_kepler(ell, e))
    e = np.asarray(e, dtype=float)
    f = true_from_eccentric(E, e)
    r = a * (1.0 - e * np.cos(E))
    phi = wrap_pi(f - np.asarray(ell, dtype=float))
    return AnomalySet(E, f, r, phi)


# -- chart conversions -------------------------------------------------------


def delaunay_from_keplerian(k: KeplerianSet, mu: float) -> DelaunayState:
    a = np.asarray(k.a, dtype=float)
    if np.any(a <= 0):
        raise DomainError("semi-major axis must be positive")
    e = _check_ecc(k.e)
    L = np.sqrt(mu * a)
    G = L * np.sqrt((1.0 - e) * (1.0 + e))
    H = G * np.cos(k.inc)
    return DelaunayState(k.ell, k.argp, k.node, L, G, H)


def eccentricity(L, G):
    L = np.asarray(L, dtype=float)
    return np.sqrt(np.clip((L - G) * (L + G), 0.0, None)) / L


def keplerian_from_delaunay(d: DelaunayState, mu: float) -> KeplerianSet:
    L, G, H = (np.asarray(v, dtype=float) for v in (d.L, d.G, d.H))
    if np.any(L <= 0) or np.any(G <= 0) or np.any(G > L) or np.any(np.abs(H) > G):
        raise DomainError("invalid Delaunay momenta")
    a = L * L / mu
    e = eccentricity(L, G)
    inc = np.arccos(np.clip(H / G, -1.0, 1.0))
    return KeplerianSet(a, e, inc, d.h, d.g, d.ell)


def polar_nodal_from_delaunay(d: DelaunayState, mu: float) -> PolarNodalState:
    L, G = np.asarray(d.L, dtype=float), np.asarray(d.G, dtype=float)
    a = L * L / mu
    e = eccentricity(L, G)
    an = anomalies_from_mean(d.ell, a, e)
    R = (mu / G) * e * np.sin(an.f)
    return PolarNodalState(an.r, an.f + np.asarray(d.g), np.asarray(d.h, dtype=float),
                           R, G, np.asarray(d.H, dtype=float))


def delaunay_from_polar_nodal(p: PolarNodalState, mu: float) -> DelaunayState:
    r, R, Theta, N = (np.asarray(v, dtype=float) for v in (p.r, p.R, p.Theta, p.N))
    if np.any(r <= 0) or np.any(Theta <= 0) or np.any(np.abs(N) > Theta):
        raise DomainError("invalid polar-nodal state")
    energy = 0.5 * R * R + 0.5 * Theta * Theta / (r * r) - mu / r
    if np.any(energy >= 0):
        raise DomainError("state is not on an elliptic orbit")
    a = -mu / (2.0 * energy)
    L = np.sqrt(mu * a)
    pp = Theta * Theta / mu
    ecosf = pp / r - 1.0
    esinf = R * Theta / mu
    e = np.hypot(ecosf, esinf)
    f = np.arctan2(esinf, ecosf)
    E = eccentric_from_true(f, e)
    ell = E - e * np.sin(E)
    return DelaunayState(wrap_angle(ell), wrap_angle(np.asarray(p.theta) - f),
                         wrap_angle(p.nu), L, Theta, N)


def _frame(theta, nu, cos_i, sin_i):
    """Radial and transverse unit vectors for a node/inclination/latitude chain."""
    ct, st = np.cos(theta), np.sin(theta)
    cn, sn = np.cos(nu), np.sin(nu)
    u = np.stack([cn * ct - sn * st * cos_i, sn * ct + cn * st * cos_i, st * sin_i], axis=-1)
    w = np.stack([-cn * st - sn * ct * cos_i, -sn * st + cn * ct * cos_i, ct * sin_i], axis=-1)
    return u, w


def cartesian_from_polar_nodal(p: PolarNodalState) -> CartesianState:
    r, R, Theta, N = (np.asarray(v, dtype=float) for v in (p.r, p.R, p.Theta, p.N))
    if np.any(np.abs(N) > Theta * (1.0 + 1e-15)):
        raise DomainError("|N| exceeds Theta")
    cos_i = np.clip(N / Theta, -1.0, 1.0)
    sin_i = np.sqrt((1.0 - cos_i) * (1.0 + cos_i))
    u, w = _frame(np.asarray(p.theta, dtype=float), np.asarray(p.nu, dtype=float), cos_i, sin_i)
    pos = r[..., None] * u
    vel = R[..., None] * u + (Theta / r)[..., None] * w
    return CartesianState(pos, vel)


def polar_nodal_from_cartesian(c: CartesianState) -> PolarNodalState:
    x = np.asarray(c.position, dtype=float)
    v = np.asarray(c.velocity, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    if np.any(r <= 0):
        raise DomainError("zero radius")
    hvec = np.cross(x, v)
    Theta = np.linalg.norm(hvec, axis=-1)
    N = hvec[..., 2]
    R = np.sum(x * v, axis=-1) / r
    nu = np.arctan2(hvec[..., 0], -hvec[..., 1])
    # argument of latitude from the node line and the in-plane normal
    cn, sn = np.cos(nu), np.sin(nu)
    node = np.stack([cn, sn, np.zeros_like(cn)], axis=-1)
    across = np.cross(hvec, node) / Theta[..., None]
    theta = np.arctan2(np.sum(x * across, axis=-1), np.sum(x * node, axis=-1))
    return PolarNodalState(r, wrap_angle(theta), wrap_angle(nu), R, Theta, N)


def cartesian_from_delaunay(d: DelaunayState, mu: float) -> CartesianState:
    return cartesian_from_polar_nodal(polar_nodal_from_delaunay(d, mu))


def delaunay_from_cartesian(c: CartesianState, mu: float) -> DelaunayState:
    return delaunay_from_polar_nodal(polar_nodal_from_cartesian(c), mu)


def cartesian_from_keplerian(k: KeplerianSet, mu: float) -> CartesianState:
    return cartesian_from_delaunay(delaunay_from_keplerian(k, mu), mu)


def keplerian_from_cartesian(c: CartesianState, mu: float) -> KeplerianSet:
    return keplerian_from_delaunay(delaunay_from_cartesian(c, mu), mu)
