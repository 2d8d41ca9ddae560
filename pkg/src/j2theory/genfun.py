"""Generating-function terms and the intermediate series of the reduction.

``W1 = V1 + C1`` and ``W2 = V2 + C2`` drive the periodic corrections.  The
remaining series (the second-order known terms, their averages and the
averaged third-order terms) are not needed to propagate an orbit; they are
evaluated from the tables so they can be checked against the bracket engine.

Each series is transcribed term by term from its closed form, with the
summation ranges written out explicitly.
"""

from __future__ import annotations

import numpy as np

from .elements import DelaunayState, PhysicalConstants
from .errors import DomainError, TableDenominatorError
from .hamiltonian import CRITICAL_GUARD, check_critical, h00, h01, h02, h10
from .jets import Jet, OrbitJets, bracket_jet, constant, lift_state
from .tables import default_tables


def _star(j: int) -> int:
    return j % 2


def _incl_B(o):
    """B0 = 1 - 3 s^2/2, B1 = 3 s^2/4."""
    return (1.0 - 1.5 * o.s2, 0.75 * o.s2)


def _powers(x: Jet, n: int):
    out = [constant(1.0, x), x]
    for _ in range(2, n + 1):
        out.append(out[-1] * x)
    return out


# -- first order -----------------------------------------------------------------


def c1(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """Integration constant that removes the long-period terms at second order."""
    check_critical(o.s2, guard)
    q = c.re / o.p
    s2 = o.s2
    ratio = (15.0 * s2 - 14.0) / ((5.0 * s2 - 4.0) * 32.0)
    return o.G * q * q * ratio * s2 * o.e2 * o.sin(0, 2)


def v1(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """Short-period part of the first-order generating function."""
    q = c.re / o.p
    B = _incl_B(o)
    acc = B[0] * o.phi
    for i in range(2):
        for j in range(max(i, 1), 2 * i + 2):
            coef = (2 - _star(j)) ** i / j
            acc = acc + B[i] * o.epow(abs(j - 2 * i)) * o.sin(j, 2 * i) * coef
    return o.G * q * q * acc * (-0.5)


def w1(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    return v1(o, c, guard) + c1(o, c, guard)


def htilde01(o: OrbitJets, c: PhysicalConstants) -> Jet:
    """H10 rewritten as a finite Fourier series in the true anomaly."""
    B = _incl_B(o)
    acc = constant(0.0, o.e)
    for i in range(2):
        for j in range(i, 2 * i + 2):
            coef = float((2 - _star(j)) ** i)
            acc = acc + B[i] * o.epow(abs(j - 2 * i)) * o.cos(j, 2 * i) * coef
    ratio = c.re / o.r
    return h00(o, c) * ratio * ratio * acc / (o.eta * o.eta)


# -- second-order known terms -------------------------------------------------------


def htilde02_prime(o: OrbitJets, c: PhysicalConstants) -> Jet:
    """{H10 + H01, V1} as a closed series (Table B)."""
    B = default_tables()["B"]
    s2, eta = o.s2, o.eta
    q4 = (c.re / o.p) ** 4
    H00 = h00(o, c)
    etak = _powers(eta, 3)
    s2i = _powers(s2, 2)

    row1 = constant(0.0, eta)
    for i in range(3):
        for j in range((-1) ** i * i, i + 5):
            kmax = 3 - abs(2 * i - j)
            if kmax < 0:
                continue
            poly = constant(0.0, eta)
            for k in range(kmax + 1):
                if (i, j, k) in B:
                    poly = poly + B((i, j, k), s2) * etak[k]
            row1 = row1 + s2i[i] * poly * o.epow(abs(j - 2 * i)) * o.cos(j, 2 * i)
    a_r = o.a / o.r
    row1 = row1 * a_r * a_r * eta * eta / (1.0 + eta) * (3.0 / 64.0)

    d = 5.0 * s2 - 4.0
    sum2 = constant(0.0, eta)
    sum3 = constant(0.0, eta)
    for j in (1, 2, 3):
        js = _star(j)
        sum2 = sum2 + o.epow(js) * o.cos(j, 2) * ((2 - js) / j)
        sum3 = sum3 + o.epow(js) * o.sin(j, 2) * float(2 - js)
    row2 = eta * (eta * (3.0 * s2 - 2.0) ** 2 + 3.0 * d * s2 * sum2) * (3.0 / 8.0)
    p_r = o.p / o.r
    row3 = d * s2 * p_r * p_r * o.phi / (eta * eta) * sum3 * (9.0 / 8.0)
    return H00 * q4 * (row1 + row2 + row3)


def _partials(fn, o: OrbitJets, c, guard):
    """First partials of a theory function as jets one order below the relift.

    The state is relifted one order higher than ``o`` (capped at 2), so the
    partials of ``fn`` carry their own gradients when ``o`` is first order.
    """
    order = min(o.order + 1, 2)
    hi = fn(OrbitJets(lift_state(_state_of(o), order), c.mu, o.e_floor), c, guard)
    if order < 1:
        raise ValueError("partials need at least a first-order relift")
    return [
        Jet(hi.grad[..., idx], hi.hess[..., idx, :] if order == 2 else None)
        for idx in range(6)
    ]


def _state_of(o: OrbitJets) -> DelaunayState:
    return DelaunayState(o.ell.val, o.g.val, o.h.val, o.L.val, o.G.val, o.H.val)


def htilde02_star(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """{H10 + H01, C1} as a closed series (Tables b and q)."""
    dC = _partials(c1, o, c, guard)
    if o.order > dC[1].order:
        o = OrbitJets(lift_state(_state_of(o), dC[1].order), c.mu, o.e_floor)
    r1, r2, r3 = htilde02_star_rows(o, c, dC[1], dC[4], dC[3])
    return r1 + r2 + r3


def htilde02_star_rows(o: OrbitJets, c: PhysicalConstants, dC_dg, dC_dG, dC_dL):
    """The three rows of {H10 + H01, C1}, factored by dC1/dg, dC1/dG, dC1/dL."""
    tb, tq = default_tables()["b"], default_tables()["q"]
    s2, eta = o.s2, o.eta
    H00q2 = h00(o, c) * (c.re / o.p) ** 2
    a_r = o.a / o.r
    w = a_r * a_r * eta

    row1 = constant(0.0, eta)
    for i in range(2):
        for j in range(-i, 2 * i + 4):
            js = _star(j)
            jprime = (abs(j - 2 * i) - 2) * js
            poly = constant(0.0, eta)
            for k in range(js + 1):
                if (i, j, k) in tb:
                    poly = poly + tb((i, j, k), s2) * eta ** (2 * k)
            row1 = row1 + poly * o.epow(jprime) * o.cos(j, 2 * i)
    row1 = H00q2 * (4.0 - 5.0 * s2 + w * row1) * dC_dg / o.L * 1.5

    row2 = constant(0.0, eta)
    for j in (1, 2, 3):
        row2 = row2 + o.epow(_star(j)) * o.sin(j, 2) * float(1 + _star(j + 1))
    row2 = H00q2 * row2 * w * eta * s2 * dC_dG * (-1.5)

    b_i = (2.0 * (3.0 * s2 - 2.0), s2)
    row3 = constant(0.0, eta)
    for i in range(2):
        inner = constant(0.0, eta)
        for j in range(-i, 2 * i + 4):
            if (i, j) in tq:
                inner = inner + tq((i, j), o.e2) * o.epow(_star(j)) * o.sin(j, 2 * i)
        row3 = row3 + b_i[i] * inner
    row3 = H00q2 * row3 * w * dC_dL * 3.0 / (16.0 * eta * eta)
    return row1, row2, row3


def htilde02_prime_avg(o, c: PhysicalConstants) -> Jet:
    """Mean-anomaly average of {H10 + H01, V1}."""
    s2, eta = o.s2, o.eta
    q4 = (c.re / o.p) ** 4
    s4 = s2 * s2
    secular = (
        5.0 * (7.0 * s4 - 16.0 * s2 + 8.0)
        + eta * (6.0 * s2 - 4.0) ** 2
        + eta * eta * (5.0 * s4 + 8.0 * s2 - 8.0)
    ) * (3.0 / 32.0)
    longp = (15.0 * s2 - 14.0) * s2 * o.e2 * o.cos(0, 2) * (3.0 / 16.0)
    return h00(o, c) * q4 * eta * (secular + longp)


def htilde02_prime_avg_long(o, c: PhysicalConstants) -> Jet:
    """The g-dependent row of the average of {H10 + H01, V1}."""
    q4 = (c.re / o.p) ** 4
    return h00(o, c) * q4 * o.eta * (15.0 * o.s2 - 14.0) * o.s2 * o.e2 * o.cos(0, 2) * (3.0 / 16.0)


def htilde02_star_avg(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """Average of {H10 + H01, C1}: -H00 (Re/p)^2 3 (5 s^2 - 4) dC1/dg / L."""
    dC_dg = _partials(c1, o, c, guard)[1]
    q2 = (c.re / o.p) ** 2
    o1 = o if o.order <= dC_dg.order else OrbitJets(lift_state(_state_of(o), dC_dg.order), c.mu, o.e_floor)
    return h00(o1, c) * q2 * 3.0 * (5.0 * o1.s2 - 4.0) * dC_dg / o1.L * (-1.0)


# -- second-order generating function --------------------------------------------------


def v2(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """Periodic part of the second-order generating function (Table beta3)."""
    check_critical(o.s2, guard)
    beta = default_tables()["beta3"]
    s2, eta = o.s2, o.eta
    s4 = s2 * s2
    d = 5.0 * s2 - 4.0
    q4 = (c.re / o.p) ** 4

    cossum = constant(0.0, eta)
    for j in (1, 2, 3):
        js = _star(j)
        cossum = cossum + o.epow(js) * o.cos(j, 2) * ((2 - js) / j)
    block = (
        -eta * eta * (5.0 * s4 + 8.0 * s2 - 8.0)
        - 5.0 * (7.0 * s4 - 16.0 * s2 + 8.0)
        - (15.0 * s2 - 14.0) * o.e2 * s2 * o.cos(0, 2)
        + 12.0 * s2 * d * cossum
    )
    phi_part = o.phi * block * (3.0 / 64.0)

    etak = _powers(eta, 3)
    s2i = _powers(s2, 2)
    dpow = {0: d * d, 1: d, 2: d * d}
    opeta = 1.0 + eta
    series = constant(0.0, eta)
    for i in range(3):
        jmin = 2 * _star(i + 1) - 1
        jmax = 4 + i + (i - 1) // 2
        den = dpow[i]
        nb = (3 - i) // 2
        if nb:
            den = den * opeta**nb
        inner_i = constant(0.0, eta)
        for j in range(jmin, jmax + 1):
            poly = constant(0.0, eta)
            hit = False
            for k in range(4):
                if (i, j, k) in beta:
                    poly = poly + beta((i, j, k), s2) * etak[k]
                    hit = True
            if hit:
                inner_i = inner_i + poly * o.epow(_star(j)) * o.sin(j, 2 * i)
        series = series + s2i[i] * inner_i / den
    series = series * (1.0 / 512.0)
    return o.G * q4 * (phi_part + series)


def c2(o, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """Integration constant that removes the long-period terms at third order."""
    check_critical(o.s2, guard)
    beta = default_tables()["beta4"]
    s2, eta = o.s2, o.eta
    d = 5.0 * s2 - 4.0
    q4 = (c.re / o.p) ** 4
    acc = constant(0.0, eta)
    for i in (1, 2):
        istar = _star(i)
        poly = constant(0.0, eta)
        for k in range(4 - 2 * i + istar + 1):
            poly = poly + beta((i, k), s2) * eta**k
        den = d ** (i + 1) * (2.0 * i)
        if istar:
            den = den * (1.0 + eta)
        acc = acc + poly * s2**i * o.e2**i * o.sin(0, 2 * i) / den
    return o.G * q4 * acc * (1.0 / 256.0)


def w2(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    return v2(o, c, guard) + c2(o, c, guard)


# -- third-order averages ----------------------------------------------------------------


def htilde03_prime_avg(o, c: PhysicalConstants, guard: float = CRITICAL_GUARD,
                       rows=(0, 1, 2)) -> Jet:
    """Average of the directly computable third-order known terms (Table beta4).

    ``rows`` selects the harmonics cos(2 i g) to include; row 0 alone is the
    third-order secular term.
    """
    check_critical(o.s2, guard)
    beta = default_tables()["beta4"]
    s2, eta = o.s2, o.eta
    d = 5.0 * s2 - 4.0
    q2 = (c.re / o.p) ** 2
    acc = constant(0.0, eta)
    for i in rows:
        istar = _star(i)
        poly = constant(0.0, eta)
        for k in range(4 - 2 * i + istar + 1):
            poly = poly + beta((i, k), s2) * eta**k
        den = d ** (2 - istar)
        if istar:
            den = den * (1.0 + eta)
        term = poly * s2**i * o.e2**i / den
        if i:
            term = term * o.cos(0, 2 * i)
        acc = acc + term
    return h00(o, c) * q2 * q2 * q2 * eta * acc * (9.0 / 512.0)


def htilde03_star_avg(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """Average of {H01 + 2 H10, C2}: -H00 (Re/p)^2 (9/2)(5 s^2 - 4) dC2/dg / L."""
    dC_dg = _partials(c2, o, c, guard)[1]
    o1 = o if o.order <= dC_dg.order else OrbitJets(lift_state(_state_of(o), dC_dg.order), c.mu, o.e_floor)
    q2 = (c.re / o1.p) ** 2
    return h00(o1, c) * q2 * 4.5 * (5.0 * o1.s2 - 4.0) * dC_dg / o1.L * (-1.0)


# -- first-order a-correction and the inverse second-order a-correction ----------------------


_A1 = {
    (0, 0): lambda eta: 10.0 - 6.0 * eta * eta - 4.0 * eta**3,
    (0, 1): lambda eta: 15.0 - 3.0 * eta * eta,
    (1, 1): lambda eta: 15.0 - 3.0 * eta * eta,
    (1, 3): lambda eta: 15.0 - 3.0 * eta * eta,
    (1, 2): lambda eta: 20.0 - 12.0 * eta * eta,
    (0, 2): lambda eta: 6.0,
    (1, 0): lambda eta: 6.0,
    (1, 4): lambda eta: 6.0,
    (0, 3): lambda eta: 1.0,
    (1, -1): lambda eta: 1.0,
    (1, 5): lambda eta: 1.0,
}


def delta_a_first(o: OrbitJets, c: PhysicalConstants) -> Jet:
    """First-order periodic correction to the semi-major axis, {a, W1}."""
    q2 = (c.re / o.p) ** 2
    B = _incl_B(o)
    acc = constant(0.0, o.eta)
    for i in range(2):
        for j in range(-i, 4 + 2 * i):
            coef = _A1.get((i, j))
            if coef is None:
                continue
            acc = acc + B[i] * coef(o.eta) * o.epow(abs(j - 2 * i)) * o.cos(j, 2 * i)
    return o.a * q2 * acc / (o.eta * o.eta * 4.0)


def delta_a_second_inverse(o: OrbitJets, c: PhysicalConstants, guard: float = 1e-3) -> Jet:
    """Inverse second-order correction to a: {Delta a, W1} - {a, W2} (Table A)."""
    tA = default_tables()["A"]
    s2, eta = o.s2, o.eta
    if np.any(np.abs(3.0 * s2.val - 2.0) < guard):
        raise TableDenominatorError("3 s^2 - 2 inside the guard band of the a-correction table")
    q4 = (c.re / o.p) ** 4
    eta2 = eta * eta
    etak = _powers(eta, 6)
    head = (
        24.0 * etak[6] * eta * (5.0 * s2 * s2 + 8.0 * s2 - 8.0)
        + 48.0 * etak[5] * (15.0 * s2 - 14.0) * s2 * o.e2 * o.cos(0, 2)
    )
    s2i = _powers(s2, 2)
    body = constant(0.0, eta)
    for i in range(3):
        istar = _star(i)
        pre = s2i[i] * (3.0 * s2 - 2.0) if istar else s2i[i]
        inner = constant(0.0, eta)
        for j in range(-i - 3 * istar, 7 + 2 * i):
            kmax = 6 - abs(j - 2 * i)
            poly = constant(0.0, eta)
            hit = False
            for k in range(kmax + 1):
                if (i, j, k) in tA:
                    poly = poly + tA((i, j, k), s2) * etak[k]
                    hit = True
            if hit:
                inner = inner + poly * o.epow(abs(j - 2 * i)) * o.cos(j, 2 * i)
        body = body + pre * inner
    return o.a * q4 * (head + body) / (eta2 * eta2 * 256.0)


# -- homological right-hand sides ---------------------------------------------------


def homological_rhs1(o: OrbitJets, c: PhysicalConstants) -> Jet:
    """H10 - H01, which must equal n dW1/dell."""
    return h10(o, c) - h01(o, c)


def homological_rhs2(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """Series form of H~02 - H02, which must equal n dW2/dell."""
    return htilde02_prime(o, c) + htilde02_star(o, c, guard) - h02(o, c)


# -- averaging rules over the mean anomaly --------------------------------------------


def kozai_average(m: int, alpha, e):
    """Mean over ell of cos(m f + alpha): (-e/(1+eta))^m (1 + m eta) cos(alpha)."""
    if m < 0:
        raise DomainError("the averaging rule needs m >= 0")
    e = np.asarray(e, dtype=float)
    if np.any(e < 0) or np.any(e >= 1):
        raise DomainError("eccentricity must lie in [0, 1)")
    eta = np.sqrt((1.0 - e) * (1.0 + e))
    out = (-e / (1.0 + eta)) ** m * (1.0 + m * eta) * np.cos(alpha)
    return float(out) if np.ndim(out) == 0 else out


def ibp_average(m: int, alpha, e):
    """Mean over ell of (p/r)^2 phi sin(m f + alpha), for m >= 1.

    Since (p/r)^2 d(ell) = eta^3 df, one integration by parts in f leaves
    only the average of cos(m f + alpha) over ell, so the result is
    -(eta^3/m) times :func:`kozai_average`.
    """
    if m < 1:
        raise DomainError("integration by parts needs m >= 1")
    e = np.asarray(e, dtype=float)
    eta = np.sqrt((1.0 - e) * (1.0 + e))
    out = -(eta**3 / m) * np.asarray(kozai_average(m, alpha, e))
    return float(out) if np.ndim(out) == 0 else out


# -- nested first-order term used by the third-order average ---------------------------


def h11(o: OrbitJets, c: PhysicalConstants, guard: float = CRITICAL_GUARD) -> Jet:
    """H11 = H02 - {H01, W1}, returned as a first-order jet (needs ``o.order == 2``).

    This sign is the one under which the averaged third-order series holds.
    """
    if o.order < 2:
        raise ValueError("h11 needs a second-order context")
    return h02(o, c).truncate(1) - bracket_jet(h01(o, c), w1(o, c, guard))


# -- plain-number wrappers ----------------------------------------------------------


def _value_of(fn, d: DelaunayState, c: PhysicalConstants, order: int = 0, **kw):
    o = OrbitJets(lift_state(d, order), c.mu, kw.pop("e_floor", 1e-6))
    out = np.asarray(fn(o, c, **kw).val)
    return float(out) if out.ndim == 0 else out


def eval_C1(d, c, guard=CRITICAL_GUARD):
    return _value_of(c1, d, c, guard=guard)


def eval_W1(d, c, guard=CRITICAL_GUARD):
    return _value_of(w1, d, c, guard=guard)


def eval_V2(d, c, guard=CRITICAL_GUARD):
    return _value_of(v2, d, c, guard=guard)


def eval_C2(d, c, guard=CRITICAL_GUARD):
    return _value_of(c2, d, c, guard=guard)


def eval_W2(d, c, guard=CRITICAL_GUARD):
    return _value_of(w2, d, c, guard=guard)


def eval_Htilde02_prime(d, c):
    return _value_of(htilde02_prime, d, c)


def eval_Htilde02_star(d, c, guard=CRITICAL_GUARD):
    return _value_of(htilde02_star, d, c, guard=guard)
