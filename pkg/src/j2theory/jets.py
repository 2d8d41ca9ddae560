"""Second-order truncated Taylor arithmetic over the Delaunay chart.

A :class:`Jet` carries a value together with its gradient and Hessian with
respect to the six Delaunay coordinates ``(ell, g, h, L, G, H)``.  Values may
be numpy arrays, in which case every component carries the same leading batch
shape and the derivative axes are appended (``grad[..., 6]``,
``hess[..., 6, 6]``).

Jets come in three orders: 0 (value only), 1 (value and gradient) and 2 (all
three).  Mixing orders truncates to the lowest one, so a theory function can be
evaluated cheaply at order 0 or 1 through the very same code path that produces
exact Hessians at order 2.
"""

from __future__ import annotations

import numpy as np

NDIM = 6
ANGLES = (0, 1, 2)
ACTIONS = (3, 4, 5)

# Symplectic form: {F, G} = grad(F) . J . grad(G)
SYMPLECTIC = np.zeros((NDIM, NDIM))
SYMPLECTIC[0:3, 3:6] = np.eye(3)
SYMPLECTIC[3:6, 0:3] = -np.eye(3)


def _outer(a, b):
    return a[..., :, None] * b[..., None, :]


class Jet:
    """Value, gradient and Hessian of a scalar function of the Delaunay state."""

    __slots__ = ("val", "grad", "hess")
    __array_priority__ = 1000

    def __init__(self, val, grad=None, hess=None):
        self.val = np.asarray(val, dtype=float)
        self.grad = grad
        self.hess = hess
        if hess is not None and grad is None:
            raise ValueError("a Jet with a Hessian needs a gradient")

    @property
    def order(self) -> int:
        if self.grad is None:
            return 0
        return 1 if self.hess is None else 2

    def truncate(self, order: int) -> "Jet":
        if order >= self.order:
            return self
        if order == 0:
            return Jet(self.val)
        return Jet(self.val, self.grad)

    def shift(self, delta) -> "Jet":
        """Same derivatives, value moved by a constant (e.g. a 2*pi wrap)."""
        return Jet(self.val + delta, self.grad, self.hess)

    def __repr__(self):
        return f"Jet(val={self.val!r}, order={self.order})"

    # -- arithmetic -------------------------------------------------------

    def __neg__(self):
        return Jet(
            -self.val,
            None if self.grad is None else -self.grad,
            None if self.hess is None else -self.hess,
        )

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, Jet):
            return Jet(self.val + other, self.grad, self.hess)
        order = min(self.order, other.order)
        grad = hess = None
        if order >= 1:
            grad = self.grad + other.grad
        if order == 2:
            hess = self.hess + other.hess
        return Jet(self.val + other.val, grad, hess)

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet):
            c = np.asarray(other, dtype=float)
            return Jet(
                self.val * c,
                None if self.grad is None else self.grad * c[..., None],
                None if self.hess is None else self.hess * c[..., None, None],
            )
        order = min(self.order, other.order)
        a, b = self, other
        grad = hess = None
        if order >= 1:
            grad = a.grad * b.val[..., None] + b.grad * a.val[..., None]
        if order == 2:
            cross = _outer(a.grad, b.grad)
            hess = (
                a.hess * b.val[..., None, None]
                + b.hess * a.val[..., None, None]
                + cross
                + np.swapaxes(cross, -1, -2)
            )
        return Jet(a.val * b.val, grad, hess)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def reciprocal(self):
        v = self.val
        inv = 1.0 / v
        return _chain(self, inv, -inv * inv, 2.0 * inv * inv * inv)

    def __pow__(self, n):
        if isinstance(n, Jet):
            raise TypeError("jet exponents are not supported")
        if isinstance(n, int) and n >= 0:
            return _ipow(self, n)
        v = self.val
        n = float(n)
        f0 = v**n
        return _chain(self, f0, n * v ** (n - 1.0), n * (n - 1.0) * v ** (n - 2.0))


def _ipow(x: Jet, n: int) -> Jet:
    if n == 0:
        return x * 0.0 + 1.0
    v = x.val
    f1 = n * v ** (n - 1)
    f2 = n * (n - 1) * v ** (n - 2) if n >= 2 else np.zeros_like(v)
    return _chain(x, v**n, f1, f2)


def _chain(a: Jet, f0, f1, f2) -> Jet:
    """Compose a scalar function with known derivatives f1, f2 onto a jet."""
    grad = hess = None
    if a.order >= 1:
        grad = f1[..., None] * a.grad
    if a.order == 2:
        hess = f1[..., None, None] * a.hess + f2[..., None, None] * _outer(a.grad, a.grad)
    return Jet(f0, grad, hess)


def _chain2(y: Jet, x: Jet, f0, fy, fx, fyy, fxx, fxy) -> Jet:
    order = min(y.order, x.order)
    grad = hess = None
    if order >= 1:
        grad = fy[..., None] * y.grad + fx[..., None] * x.grad
    if order == 2:
        xy = _outer(x.grad, y.grad)
        hess = (
            fy[..., None, None] * y.hess
            + fx[..., None, None] * x.hess
            + fyy[..., None, None] * _outer(y.grad, y.grad)
            + fxx[..., None, None] * _outer(x.grad, x.grad)
            + fxy[..., None, None] * (xy + np.swapaxes(xy, -1, -2))
        )
    return Jet(f0, grad, hess)


# -- elementary functions (accept jets or plain numbers) -------------------


def sin(x):
    if not isinstance(x, Jet):
        return np.sin(x)
    s, c = np.sin(x.val), np.cos(x.val)
    return _chain(x, s, c, -s)


def cos(x):
    if not isinstance(x, Jet):
        return np.cos(x)
    s, c = np.sin(x.val), np.cos(x.val)
    return _chain(x, c, -s, -c)


def sqrt(x):
    if not isinstance(x, Jet):
        return np.sqrt(x)
    r = np.sqrt(x.val)
    return _chain(x, r, 0.5 / r, -0.25 / (r * x.val))


def atan2(y, x):
    if not isinstance(y, Jet) and not isinstance(x, Jet):
        return np.arctan2(y, x)
    if not isinstance(y, Jet):
        y = constant(y, x)
    if not isinstance(x, Jet):
        x = constant(x, y)
    rho2 = x.val * x.val + y.val * y.val
    rho4 = rho2 * rho2
    xy = x.val * y.val
    return _chain2(
        y,
        x,
        np.arctan2(y.val, x.val),
        x.val / rho2,
        -y.val / rho2,
        -2.0 * xy / rho4,
        2.0 * xy / rho4,
        (y.val * y.val - x.val * x.val) / rho4,
    )


def constant(val, like: Jet) -> Jet:
    """A jet with zero derivatives, shaped and ordered like ``like``."""
    v = np.broadcast_to(np.asarray(val, dtype=float), like.val.shape).copy()
    grad = hess = None
    if like.order >= 1:
        grad = np.zeros(v.shape + (NDIM,))
    if like.order == 2:
        hess = np.zeros(v.shape + (NDIM, NDIM))
    return Jet(v, grad, hess)


def value(x):
    return x.val if isinstance(x, Jet) else np.asarray(x, dtype=float)


# -- seeds and brackets -----------------------------------------------------


def lift_state(d, order: int = 2) -> tuple[Jet, ...]:
    """Six seed jets for the coordinates of a Delaunay state.

    Seed ``i`` has the coordinate value, the unit gradient ``e_i`` and a zero
    Hessian.  Array-valued states give batched seeds.
    """
    coords = np.broadcast_arrays(*(np.asarray(v, dtype=float) for v in d.as_tuple()))
    shape = coords[0].shape
    seeds = []
    for i, v in enumerate(coords):
        grad = hess = None
        if order >= 1:
            grad = np.zeros(shape + (NDIM,))
            grad[..., i] = 1.0
        if order == 2:
            hess = np.zeros(shape + (NDIM, NDIM))
        seeds.append(Jet(v.copy(), grad, hess))
    return tuple(seeds)


def bracket(F: Jet, G: Jet):
    """Poisson bracket {F, G} from the gradients of two jets (value only)."""
    if F.order < 1 or G.order < 1:
        raise ValueError("brackets need first-order jets")
    dF, dG = F.grad, G.grad
    return (
        np.sum(dF[..., 0:3] * dG[..., 3:6], axis=-1)
        - np.sum(dF[..., 3:6] * dG[..., 0:3], axis=-1)
    )


def bracket_jet(F: Jet, G: Jet) -> Jet:
    """Poisson bracket {F, G} carried with its own gradient.

    With F and G known to second order the gradient of the bracket is exact:
    d{F,G} = Hess(F) J grad(G) - Hess(G) J grad(F).  The result is a first
    order jet, enough to bracket it once more (nested brackets).
    """
    val = bracket(F, G)
    if F.order < 2 or G.order < 2:
        return Jet(val)
    JdG = G.grad @ SYMPLECTIC.T
    JdF = F.grad @ SYMPLECTIC.T
    grad = np.einsum("...ij,...j->...i", F.hess, JdG) - np.einsum(
        "...ij,...j->...i", G.hess, JdF
    )
    return Jet(val, grad)


# -- elliptic kinematics on jets ----------------------------------------------


def _kepler_jet(ell: Jet, e: Jet, E_val) -> Jet:
    """Eccentric anomaly by implicit differentiation of E - e sin E = ell."""
    sE, cE = np.sin(E_val), np.cos(E_val)
    order = min(ell.order, e.order)
    if order == 0:
        return Jet(E_val)
    D = 1.0 - e.val * cE
    grad = (ell.grad + sE[..., None] * e.grad) / D[..., None]
    hess = None
    if order == 2:
        Ee = _outer(grad, e.grad)
        hess = (
            ell.hess
            + sE[..., None, None] * e.hess
            + cE[..., None, None] * (Ee + np.swapaxes(Ee, -1, -2))
            - (e.val * sE)[..., None, None] * _outer(grad, grad)
        ) / D[..., None, None]
    return Jet(E_val, grad, hess)


class OrbitJets:
    """Elliptic quantities of a lifted Delaunay state, all carried as jets.

    This is the evaluation context handed to every theory function: the six
    seeds plus the semi-major axis, eccentricity, inclination functions and
    the anomalies.  Derivatives of E and f come from implicit differentiation
    of Kepler's equation, never from the solver iterations.
    """

    def __init__(self, seeds, mu: float, e_floor: float = 1e-6):
        from .elements import solve_kepler
        from .errors import EccentricityFloorError

        self.ell, self.g, self.h, self.L, self.G, self.H = seeds
        self.mu = mu
        self.e_floor = e_floor
        L, G, H = self.L, self.G, self.H
        self.order = min(s.order for s in seeds)
        self.a = L * L / mu
        self.eta = G / L
        self.e2 = (L - G) * (L + G) / (L * L)
        if np.any(self.e2.val < 0) or np.any(self.eta.val <= 0):
            from .errors import DomainError

            raise DomainError("invalid Delaunay momenta (need 0 < G <= L)")
        if self.order >= 1 and np.any(self.e2.val < e_floor * e_floor):
            raise EccentricityFloorError(
                f"eccentricity below the floor {e_floor:g}; derivatives with "
                "respect to L and G are singular"
            )
        self.e = sqrt(self.e2) if self.order >= 1 else Jet(np.sqrt(np.clip(self.e2.val, 0, None)))
        self.c = H / G
        self.s2 = (G - H) * (G + H) / (G * G)
        self.p = G * G / mu
        self.n = mu * mu / (L * L * L)
        E_val = np.asarray(solve_kepler(self.ell.val, self.e.val))
        self.E = _kepler_jet(self.ell, self.e, E_val)
        beta = self.e / (1.0 + self.eta)
        self.f = self.E + 2.0 * atan2(beta * sin(self.E), 1.0 - beta * cos(self.E))
        self.r = self.a * (1.0 - self.e * cos(self.E))
        raw = self.f - self.ell
        self.phi = raw.shift(np.mod(raw.val + np.pi, 2.0 * np.pi) - np.pi - raw.val)
        self._trig = {}

    def trig(self, j: int, m: int):
        """(cos, sin) of j*f + m*g."""
        key = (j, m)
        if key not in self._trig:
            arg = self.f * float(j) + self.g * float(m)
            self._trig[key] = (cos(arg), sin(arg))
        return self._trig[key]

    def cos(self, j: int, m: int) -> Jet:
        return self.trig(j, m)[0]

    def sin(self, j: int, m: int) -> Jet:
        return self.trig(j, m)[1]

    def epow(self, k: int) -> Jet:
        """e**k for integer k (negative powers allowed away from e = 0)."""
        if k == 0:
            return constant(1.0, self.e)
        if k > 0:
            return self.e**k
        return (self.e ** (-k)).reciprocal()


def jet_anomalies(seeds, mu: float, e_floor: float = 1e-6) -> OrbitJets:
    return OrbitJets(seeds, mu, e_floor)


def evaluate(fn, d, c, order: int = 0, e_floor: float = 1e-6, **kw) -> Jet:
    """Lift a Delaunay state to the requested jet order and evaluate ``fn``."""
    o = OrbitJets(lift_state(d, order), c.mu, e_floor)
    return fn(o, c, **kw)


def poisson_bracket(F, G, d, c, e_floor: float = 1e-6):
    """{F, G} at a Delaunay state; F and G are theory functions (o, c) -> Jet."""
    o = OrbitJets(lift_state(d, 1), c.mu, e_floor)
    return bracket(F(o, c), G(o, c))


def poisson_bracket_jet(F, G, seeds, c, e_floor: float = 1e-6) -> Jet:
    """{F, G} as a first-order jet, ready for a further bracket."""
    o = OrbitJets(seeds, c.mu, e_floor)
    return bracket_jet(F(o, c), G(o, c))
