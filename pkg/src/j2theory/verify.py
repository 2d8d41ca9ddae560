"""Self-verification suite: every closed series against an independent oracle.

Each check compares a table-driven series with a bracket-engine or
quadrature evaluation at seeded random states and reports the worst error,
normalized per state by the natural size of the term being checked (for an
order-m Hamiltonian term that is |H00| (Re/p)^(2m)).  When a table-driven
check fails, the residual is fitted against unit bumps of every coefficient
of the tables the check reads, and the best-fitting entry is reported.
"""

from __future__ import annotations

from contextlib import nullcontext
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import genfun as gf
from . import hamiltonian as hm
from .elements import EARTH, DelaunayState, PhysicalConstants, anomalies_from_mean, solve_kepler
from .jets import OrbitJets, bracket, bracket_jet, lift_state
from .tables import default_tables, perturbed, using_tables

DEFAULT_STATES = 1000
QUAD_NODES = 256
_CHUNK = 48


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_rel_error: float
    tolerance: float
    passed: bool
    culprit: str = ""

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "max_rel_error": self.max_rel_error,
            "tolerance": self.tolerance,
            "passed": self.passed,
            "culprit": self.culprit,
        }


@dataclass(frozen=True)
class Check:
    name: str
    residual: Callable  # (DelaunayState, PhysicalConstants) -> signed normalized residual per state
    tolerance: float = 1e-9
    tables: tuple[str, ...] = field(default_factory=tuple)


# -- sampling ------------------------------------------------------------------


def sample_states(rng: np.random.Generator, n: int, c: PhysicalConstants = EARTH,
                  a_range=(7000.0, 20000.0), e_range=(0.01, 0.6), crit_band=0.05,
                  s2_band=1e-3) -> DelaunayState:
    """Random regular states away from 5 s^2 = 4 and 3 s^2 = 2."""
    out = {k: [] for k in ("ell", "g", "h", "L", "G", "H")}
    have = 0
    while have < n:
        m = 2 * (n - have) + 8
        a = rng.uniform(*a_range, m)
        e = rng.uniform(*e_range, m)
        ci = rng.uniform(-1.0, 1.0, m)
        ang = rng.uniform(0.0, 2.0 * np.pi, (3, m))
        s2 = 1.0 - ci * ci
        ok = (np.abs(5.0 * s2 - 4.0) >= crit_band) & (np.abs(3.0 * s2 - 2.0) >= s2_band)
        ok &= np.abs(ci) > 1e-6
        L = np.sqrt(c.mu * a)
        G = L * np.sqrt(1.0 - e * e)
        cols = dict(ell=ang[0], g=ang[1], h=ang[2], L=L, G=G, H=G * ci)
        take = np.flatnonzero(ok)[: n - have]
        for k in out:
            out[k].append(cols[k][take])
        have += take.size
    return DelaunayState(**{k: np.concatenate(v) for k, v in out.items()})


def _subset(d: DelaunayState, sl) -> DelaunayState:
    return DelaunayState(*(np.asarray(v)[sl] for v in d.as_tuple()))


def _ctx(d: DelaunayState, c, order: int) -> OrbitJets:
    return OrbitJets(lift_state(d, order), c.mu)


def _scale(o, c, m: int):
    """Natural size of an order-m Hamiltonian term."""
    return np.abs(hm.h00(o, c).val) * (c.re / o.p.val) ** (2 * m)


def _on_grid(d: DelaunayState, nodes: int) -> DelaunayState:
    """States replicated over an ell grid of ``nodes`` equispaced points."""
    ell = (np.arange(nodes) + 0.5) * (2.0 * np.pi / nodes)
    M = np.asarray(d.L).shape[0]

    def rep(v):
        return np.broadcast_to(np.asarray(v, dtype=float)[:, None], (M, nodes))

    return DelaunayState(np.broadcast_to(ell, (M, nodes)), rep(d.g), rep(d.h),
                         rep(d.L), rep(d.G), rep(d.H))


def _average(fn, d: DelaunayState, c, order: int, nodes: int = QUAD_NODES):
    """Mean over ell of fn(o) (trapezoid rule, spectrally accurate here)."""
    M = np.asarray(d.L).shape[0]
    out = np.empty(M)
    for start in range(0, M, _CHUNK):
        part = _subset(d, slice(start, start + _CHUNK))
        o = _ctx(_on_grid(part, nodes), c, order)
        out[start:start + _CHUNK] = np.mean(fn(o), axis=-1)
    return out


def _chunked(fn, d: DelaunayState):
    M = np.asarray(d.L).shape[0]
    return np.concatenate([fn(_subset(d, slice(s, s + _CHUNK))) for s in range(0, M, _CHUNK)])


# -- individual identities -------------------------------------------------------


def _w1_homological(d, c):
    def run(part):
        o = _ctx(part, c, 1)
        lhs = o.n.val * gf.w1(o, c).grad[..., 0]
        return (lhs - gf.homological_rhs1(o, c).val) / _scale(o, c, 1)
    return _chunked(run, d)


def _w2_homological(d, c):
    def run(part):
        o = _ctx(part, c, 1)
        lhs = o.n.val * gf.w2(o, c).grad[..., 0]
        return (lhs - gf.homological_rhs2(o, c).val) / _scale(o, c, 2)
    return _chunked(run, d)


def _second_order_series(d, c):
    def run(part):
        o = _ctx(part, c, 1)
        H1 = hm.h10(o, c) + hm.h01(o, c)
        return (gf.htilde02_prime(o, c).val - bracket(H1, gf.v1(o, c))) / _scale(o, c, 2)
    return _chunked(run, d)


def _c1_bracket_series(d, c):
    def run(part):
        o = _ctx(part, c, 1)
        H1 = hm.h10(o, c) + hm.h01(o, c)
        return (gf.htilde02_star(o, c).val - bracket(H1, gf.c1(o, c))) / _scale(o, c, 2)
    return _chunked(run, d)


def _v2_series(d, c):
    """n dV2/dell against the bracket form {H10 + H01, W1} - H02."""
    def run(part):
        o = _ctx(part, c, 1)
        H1 = hm.h10(o, c) + hm.h01(o, c)
        rhs = bracket(H1, gf.w1(o, c)) - hm.h02(o, c).val
        return (o.n.val * gf.v2(o, c).grad[..., 0] - rhs) / _scale(o, c, 2)
    return _chunked(run, d)


def _second_order_average(d, c):
    o0 = _ctx(d, c, 0)

    def integrand(o):
        return bracket(hm.h10(o, c) + hm.h01(o, c), gf.v1(o, c))

    avg = _average(integrand, d, c, 1)
    ref = gf.htilde02_prime_avg(o0, c).val
    return (ref - avg) / _scale(o0, c, 2)


def _c1_cancellation(d, c):
    """Average of {H10 + H01, C1} against its closed form and against minus the g-row."""
    o0 = _ctx(d, c, 0)

    def integrand(o):
        return bracket(hm.h10(o, c) + hm.h01(o, c), gf.c1(o, c))

    avg = _average(integrand, d, c, 1)
    s = _scale(o0, c, 2)
    r1 = (gf.htilde02_star_avg(o0, c).val - avg) / s
    r2 = (-gf.htilde02_prime_avg_long(o0, c).val - avg) / s
    return np.where(np.abs(r1) > np.abs(r2), r1, r2)


def _h01_average(d, c):
    o0 = _ctx(d, c, 0)
    avg = _average(lambda o: hm.h10(o, c).val, d, c, 0)
    return (hm.h01(o0, c).val - avg) / _scale(o0, c, 1)


def _h02_average(d, c):
    o0 = _ctx(d, c, 0)

    def integrand(o):
        return bracket(hm.h10(o, c) + hm.h01(o, c), gf.w1(o, c))

    avg = _average(integrand, d, c, 1)
    return (hm.h02(o0, c).val - avg) / _scale(o0, c, 2)


def _third_order_integrand(o, c):
    """{H02 + H11, W1} + {H01 + 2 H10, V2} on a second-order context."""
    W1 = gf.w1(o, c)
    o1 = OrbitJets(tuple(s.truncate(1) for s in (o.ell, o.g, o.h, o.L, o.G, o.H)), c.mu)
    H02 = hm.h02(o1, c)
    H11 = gf.h11(o, c)
    V2 = gf.v2(o1, c)
    return bracket(H02 + H11, W1.truncate(1)) + bracket(hm.h01(o1, c) + 2.0 * hm.h10(o1, c), V2)


def _third_order_average(d, c):
    o0 = _ctx(d, c, 0)
    avg = _average(lambda o: _third_order_integrand(o, c), d, c, 2)
    return (gf.htilde03_prime_avg(o0, c).val - avg) / _scale(o0, c, 3)


def _c2_cancellation(d, c):
    """C2 cancels the g-dependent third-order rows and its average has the closed form."""
    o0 = _ctx(d, c, 0)

    def integrand(o):
        return bracket(hm.h01(o, c) + 2.0 * hm.h10(o, c), gf.c2(o, c))

    avg = _average(integrand, d, c, 1)
    s = _scale(o0, c, 3)
    r1 = (-gf.htilde03_prime_avg(o0, c, rows=(1, 2)).val - avg) / s
    r2 = (gf.htilde03_star_avg(o0, c).val - avg) / s
    return np.where(np.abs(r1) > np.abs(r2), r1, r2)


def _h03_average(d, c):
    """H03 equals the average of the full third-order known terms (with W2)."""
    o0 = _ctx(d, c, 0)

    def integrand(o):
        o1 = OrbitJets(tuple(s.truncate(1) for s in (o.ell, o.g, o.h, o.L, o.G, o.H)), c.mu)
        extra = bracket(hm.h01(o1, c) + 2.0 * hm.h10(o1, c), gf.c2(o1, c))
        return _third_order_integrand(o, c) + extra

    avg = _average(integrand, d, c, 2)
    return (hm.h03(o0, c).val - avg) / _scale(o0, c, 3)


def _delta_a_first(d, c):
    def run(part):
        o = _ctx(part, c, 1)
        ref = bracket(o.a, gf.w1(o, c))
        s = o.a.val * (c.re / o.p.val) ** 2
        return (gf.delta_a_first(o, c).val - ref) / s
    return _chunked(run, d)


def _delta_a_second_inverse(d, c):
    def run(part):
        o2 = _ctx(part, c, 2)
        W1 = gf.w1(o2, c)
        da = bracket_jet(o2.a, W1)
        o1 = _ctx(part, c, 1)
        ref = bracket(da, W1.truncate(1)) - bracket(o1.a, gf.w2(o1, c))
        s = o1.a.val * (c.re / o1.p.val) ** 4
        return (gf.delta_a_second_inverse(o1, c).val - ref) / s
    return _chunked(run, d)


def _averaging_rules(d, c):
    """Closed averages of cos(m f + a) and (p/r)^2 phi sin(m f + a) vs Gauss-Legendre."""
    x, w = np.polynomial.legendre.leggauss(256)
    ell = np.pi * (x + 1.0)
    w = w / 2.0
    n = np.asarray(d.L).shape[0]
    rng = np.random.default_rng(n)
    es = np.linspace(0.0, 0.7, 8)
    worst = []
    for e in es:
        an = anomalies_from_mean(ell, 1.0, e)
        eta = np.sqrt(1.0 - e * e)
        for m in range(7):
            alpha = rng.uniform(0, 2 * np.pi)
            k = np.sum(w * np.cos(m * an.f + alpha))
            worst.append(k - gf.kozai_average(m, alpha, e))
            if m >= 1:
                p_r = eta * eta / an.r
                i = np.sum(w * p_r * p_r * an.phi * np.sin(m * an.f + alpha))
                worst.append(i - gf.ibp_average(m, alpha, e))
    return np.asarray(worst)


def _kepler(d, c):
    rng = np.random.default_rng(np.asarray(d.L).shape[0])
    ell = rng.uniform(-20.0, 20.0, 10000)
    e = rng.uniform(0.0, 0.9, 10000)
    E = solve_kepler(ell, e)
    return E - e * np.sin(E) - ell


def _node_free(d, c):
    """W1, W2 and the secular terms carry no h dependence; H0m carry no angles."""
    o = _ctx(_subset(d, slice(0, 64)), c, 1)
    s = _scale(o, c, 1)
    vals = [np.abs(gf.w1(o, c).grad[..., 2]) / s, np.abs(gf.w2(o, c).grad[..., 2]) / s]
    for m, fn in hm.SECULAR_TERMS.items():
        vals.append(np.max(np.abs(fn(o, c).grad[..., 0:3]), axis=-1) / _scale(o, c, m))
    return np.concatenate(vals)


CHECKS: tuple[Check, ...] = (
    Check("kepler_residual", _kepler, 1e-14),
    Check("averaging_rules", _averaging_rules, 1e-11),
    Check("node_and_angle_independence", _node_free, 1e-14),
    Check("w1_homological", _w1_homological, 1e-9),
    Check("h01_average", _h01_average, 1e-9),
    Check("second_order_series_B", _second_order_series, 1e-9, ("B",)),
    Check("c1_bracket_series_b_q", _c1_bracket_series, 1e-9, ("b", "q")),
    Check("second_order_average", _second_order_average, 1e-9),
    Check("c1_cancellation", _c1_cancellation, 1e-9),
    Check("h02_average", _h02_average, 1e-9),
    Check("w2_homological", _w2_homological, 1e-9, ("beta3", "B", "b", "q")),
    Check("v2_series_beta3", _v2_series, 1e-9, ("beta3",)),
    Check("third_order_average_beta4", _third_order_average, 1e-9, ("beta4", "beta3")),
    Check("c2_cancellation_beta4", _c2_cancellation, 1e-9, ("beta4",)),
    Check("h03_average_beta4", _h03_average, 1e-9, ("beta4", "beta3")),
    Check("delta_a_first_series", _delta_a_first, 1e-9),
    Check("delta_a_second_inverse_A", _delta_a_second_inverse, 1e-9, ("A", "beta3", "beta4")),
)


def attribute(check: Check, d: DelaunayState, c: PhysicalConstants, n: int = 8) -> str:
    """Name the table coefficient whose unit bump best explains the residual."""
    sub = _subset(d, slice(0, n))
    base = default_tables()
    r = np.asarray(check.residual(sub, c), dtype=float)
    best, best_fit = "", np.inf
    rn = float(np.dot(r, r))
    if rn == 0.0:
        return ""
    for name in check.tables:
        for idx, entry in base[name].entries.items():
            for k in range(len(entry.num)):
                with using_tables(perturbed(base, name, idx, k, 1)):
                    b = np.asarray(check.residual(sub, c), dtype=float) - r
                bb = float(np.dot(b, b))
                if bb == 0.0:
                    continue
                delta = -float(np.dot(b, r)) / bb
                fit = float(np.dot(r + delta * b, r + delta * b)) / rn
                if fit < best_fit:
                    best_fit = fit
                    var = "e" if name == "q" else "s"
                    best = f"{name}[{','.join(map(str, idx))}] coefficient of {var}^{2 * k}"
                if best_fit < 1e-12:
                    return best
    return best if best_fit < 1e-3 else ""


def run_checks(seed: int = 0, n_states: int = DEFAULT_STATES, c: PhysicalConstants = EARTH,
               names=None, tables=None) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    d = sample_states(rng, n_states, c)
    selected = [ch for ch in CHECKS if names is None or ch.name in names]
    results = []
    ctx = using_tables(tables) if tables is not None else nullcontext()
    with ctx:
        for ch in selected:
            r = np.asarray(ch.residual(d, c), dtype=float)
            err = float(np.max(np.abs(r))) if r.size else 0.0
            ok = bool(np.isfinite(err) and err <= ch.tolerance)
            culprit = ""
            if not ok and ch.tables:
                culprit = attribute(ch, d, c)
            results.append(CheckResult(ch.name, err, ch.tolerance, ok, culprit))
    return results


__all__ = ["CHECKS", "Check", "CheckResult", "attribute", "run_checks", "sample_states"]
