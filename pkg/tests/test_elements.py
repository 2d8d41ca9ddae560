import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from j2theory.elements import (
    EARTH,
    DelaunayState,
    KeplerianSet,
    PhysicalConstants,
    PolarNodalState,
    anomalies_from_mean,
    cartesian_from_delaunay,
    cartesian_from_polar_nodal,
    delaunay_from_cartesian,
    delaunay_from_keplerian,
    delaunay_from_polar_nodal,
    eccentric_from_true,
    keplerian_from_cartesian,
    keplerian_from_delaunay,
    polar_nodal_from_cartesian,
    polar_nodal_from_delaunay,
    solve_kepler,
    true_from_eccentric,
    wrap_angle,
    wrap_pi,
)
from j2theory.errors import DomainError

from .conftest import TOPEX

MU = EARTH.mu


def _bisect(ell, e):
    lo, hi = ell - 1.0, ell + 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid - e * np.sin(mid) - ell < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestKepler:
    def test_symmetry_point(self):
        assert solve_kepler(0.0, 0.3) == 0.0

    def test_circular(self):
        assert solve_kepler(1.234, 0.0) == pytest.approx(1.234, abs=1e-15)

    def test_against_bisection(self):
        E = solve_kepler(1.0, 0.1)
        assert abs(E - _bisect(1.0, 0.1)) < 1e-14
        assert E == pytest.approx(1.0885977523978936, abs=1e-14)

    def test_batch_residual(self, rng):
        ell = rng.uniform(-50, 50, 10_000)
        e = rng.uniform(0, 0.9, 10_000)
        E = solve_kepler(ell, e)
        assert np.max(np.abs(E - e * np.sin(E) - ell)) <= 1e-14 * 4

    def test_continuous_in_ell(self):
        ell = np.linspace(-7, 7, 5001)
        E = solve_kepler(ell, 0.5)
        assert np.all(np.diff(E) > 0)

    @pytest.mark.parametrize("e", [-0.1, 1.0, 1.5, np.nan])
    def test_bad_eccentricity(self, e):
        with pytest.raises(DomainError):
            solve_kepler(0.5, e)

    @given(st.floats(-100, 100), st.floats(0, 0.95))
    def test_residual_property(self, ell, e):
        E = solve_kepler(ell, e)
        assert abs(E - e * np.sin(E) - ell) <= 1e-13 * max(1.0, abs(ell) / 10)

    def test_bisection_fallback(self):
        E = solve_kepler(np.array([0.1, 2.0]), np.array([0.99, 0.999]), maxiter=1)
        assert np.allclose(E - np.array([0.99, 0.999]) * np.sin(E), [0.1, 2.0], atol=1e-13)


class TestAnomalies:
    def test_apoapsis(self):
        an = anomalies_from_mean(np.pi, 7000.0, 0.3)
        assert an.f == pytest.approx(np.pi)
        assert an.phi == pytest.approx(0.0, abs=1e-14)
        assert an.r == pytest.approx(7000.0 * 1.3)

    def test_circular(self):
        an = anomalies_from_mean(0.8, 7000.0, 0.0)
        assert an.f == pytest.approx(0.8)
        assert an.phi == pytest.approx(0.0, abs=1e-15)
        assert an.r == pytest.approx(7000.0)

    def test_half_angle_relation(self):
        an = anomalies_from_mean(1.0, 7707.27, 0.1)
        lhs = np.tan(an.f / 2)
        rhs = np.sqrt(1.1 / 0.9) * np.tan(an.E / 2)
        assert lhs == pytest.approx(rhs, rel=1e-13)
        assert an.f == pytest.approx(1.1794692626997687, abs=1e-13)

    @given(st.floats(0.001, 6.28), st.floats(0, 0.9))
    def test_phi_odd(self, ell, e):
        a = anomalies_from_mean(ell, 1.0, e).phi
        b = anomalies_from_mean(2 * np.pi - ell, 1.0, e).phi
        assert a == pytest.approx(-b, abs=1e-12)
        assert abs(a) < np.pi

    @given(st.floats(-10, 10), st.floats(0, 0.9))
    def test_conic_equation(self, ell, e):
        an = anomalies_from_mean(ell, 1.0, e)
        p = 1.0 - e * e
        assert an.r == pytest.approx(p / (1 + e * np.cos(an.f)), rel=1e-12)

    @given(st.floats(-10, 10), st.floats(0, 0.9))
    def test_true_eccentric_roundtrip(self, E, e):
        f = true_from_eccentric(E, e)
        assert eccentric_from_true(f, e) == pytest.approx(E, abs=1e-12)

    def test_areal_velocity(self):
        # r^2 df/dt = G along the two-body flow, by central differences in time
        a, e = 8000.0, 0.3
        n = np.sqrt(MU / a**3)
        h = 1e-3
        an = anomalies_from_mean(0.7, a, e)
        fp = anomalies_from_mean(0.7 + n * h, a, e).f
        fm = anomalies_from_mean(0.7 - n * h, a, e).f
        G = np.sqrt(MU * a * (1 - e * e))
        assert an.r**2 * (fp - fm) / (2 * h) == pytest.approx(G, rel=1e-8)


def test_wrap_helpers():
    assert wrap_angle(-0.1) == pytest.approx(2 * np.pi - 0.1)
    assert 0 <= wrap_angle(2 * np.pi) < 2 * np.pi
    assert wrap_pi(np.pi + 0.1) == pytest.approx(-np.pi + 0.1)


def test_constants_validation():
    with pytest.raises(DomainError):
        PhysicalConstants(mu=-1.0)
    with pytest.raises(DomainError):
        PhysicalConstants(j2=0.5)
    assert EARTH.with_j2(0.0).j2 == 0.0


class TestCharts:
    def test_unit_circular_equatorial(self):
        d = delaunay_from_keplerian(KeplerianSet(1.0, 0.0, 0.0, 0.0, 0.0, 0.0), 1.0)
        assert (d.L, d.G, d.H) == (1.0, 1.0, 1.0)

    def test_topex_momenta(self, topex):
        L = np.sqrt(MU * 7707.270)
        assert topex.L == pytest.approx(L, rel=1e-15)
        assert topex.G == pytest.approx(L * np.sqrt(1 - 1e-8), rel=1e-15)
        assert topex.H == pytest.approx(topex.G * np.cos(np.radians(66.04)), rel=1e-15)
        assert float(topex.L) == pytest.approx(55426.71941184779, rel=1e-14)

    @pytest.mark.parametrize("bad", [dict(a=-1.0), dict(e=1.0), dict(e=-0.2)])
    def test_invalid_keplerian(self, bad):
        kw = dict(a=7000.0, e=0.1, inc=0.5, node=0.0, argp=0.0, ell=0.0)
        kw.update(bad)
        with pytest.raises(DomainError):
            delaunay_from_keplerian(KeplerianSet(**kw), MU)

    @given(st.floats(6600, 40000), st.floats(0, 0.8), st.floats(0.01, 3.13),
           st.floats(0, 6.28), st.floats(0, 6.28), st.floats(0, 6.28))
    def test_keplerian_roundtrip(self, a, e, inc, node, argp, ell):
        k = KeplerianSet(a, e, inc, node, argp, ell)
        d = delaunay_from_keplerian(k, MU)
        back = keplerian_from_delaunay(d, MU)
        assert back.a == pytest.approx(a, rel=1e-12)
        assert back.inc == pytest.approx(inc, abs=1e-10)
        # e is recovered from L - G, which carries an absolute error ~ sqrt(eps)
        assert back.e == pytest.approx(e, abs=5e-8)
        again = delaunay_from_keplerian(back, MU)
        for x, y in zip(d.as_tuple(), again.as_tuple()):
            assert y == pytest.approx(x, rel=1e-12, abs=1e-12)

    def test_polar_nodal_special_points(self):
        L = np.sqrt(MU * 7000.0)
        circ = polar_nodal_from_delaunay(DelaunayState(0.4, 0.3, 0.2, L, L, 0.5 * L), MU)
        assert circ.R == 0.0 and circ.r == pytest.approx(7000.0)
        assert circ.theta == pytest.approx(0.7)
        G = L * np.sqrt(1 - 0.09)
        peri = polar_nodal_from_delaunay(DelaunayState(0.0, 0.3, 0.2, L, G, 0.5 * G), MU)
        assert peri.R == pytest.approx(0.0, abs=1e-15)
        assert peri.r == pytest.approx(7000.0 * 0.7)

    def test_cartesian_geometry(self):
        p = PolarNodalState(7000.0, 0.0, 0.4, 0.1, 52000.0, 52000.0)
        c = cartesian_from_polar_nodal(p)
        assert abs(c.position[2]) < 1e-12 and abs(c.velocity[2]) < 1e-12
        node_dir = np.array([np.cos(0.4), np.sin(0.4), 0.0])
        assert np.allclose(c.position / 7000.0, node_dir)
        with pytest.raises(DomainError):
            cartesian_from_polar_nodal(PolarNodalState(7000.0, 0.0, 0.0, 0.0, 1.0, 2.0))

    @given(st.floats(6600, 40000), st.floats(0.001, 0.8), st.floats(0.05, 3.09),
           st.floats(0, 6.28), st.floats(0, 6.28), st.floats(0, 6.28))
    def test_cartesian_invariants(self, a, e, inc, node, argp, ell):
        d = delaunay_from_keplerian(KeplerianSet(a, e, inc, node, argp, ell), MU)
        c = cartesian_from_delaunay(d, MU)
        hvec = np.cross(c.position, c.velocity)
        assert np.linalg.norm(hvec) == pytest.approx(d.G, rel=1e-12)
        assert hvec[2] == pytest.approx(d.H, rel=1e-10, abs=1e-10 * d.G)
        energy = 0.5 * c.velocity @ c.velocity - MU / np.linalg.norm(c.position)
        assert energy == pytest.approx(-MU**2 / (2 * d.L**2), rel=1e-12)

    @given(st.floats(6600, 40000), st.floats(0.001, 0.8), st.floats(0.05, 3.09),
           st.floats(0, 6.28), st.floats(0, 6.28), st.floats(0, 6.28))
    def test_full_roundtrip(self, a, e, inc, node, argp, ell):
        d = delaunay_from_keplerian(KeplerianSet(a, e, inc, node, argp, ell), MU)
        back = delaunay_from_cartesian(cartesian_from_delaunay(d, MU), MU)
        for x, y in zip(d.as_tuple()[3:], back.as_tuple()[3:]):
            assert y == pytest.approx(x, rel=1e-11)
        x0 = cartesian_from_delaunay(d, MU).as_array()
        x1 = cartesian_from_delaunay(back, MU).as_array()
        assert np.allclose(x0, x1, rtol=1e-11, atol=1e-11 * a)

    def test_polar_nodal_roundtrip(self, generic_state):
        pn = polar_nodal_from_delaunay(generic_state, MU)
        back = delaunay_from_polar_nodal(pn, MU)
        for x, y in zip(generic_state.as_tuple(), back.as_tuple()):
            assert y == pytest.approx(x, rel=1e-12)
        again = polar_nodal_from_cartesian(cartesian_from_polar_nodal(pn))
        for x, y in zip(pn.as_tuple(), again.as_tuple()):
            assert y == pytest.approx(x, rel=1e-12, abs=1e-12)

    def test_keplerian_from_cartesian(self):
        k = keplerian_from_cartesian(cartesian_from_delaunay(
            delaunay_from_keplerian(TOPEX, MU), MU), MU)
        assert k.a == pytest.approx(7707.270, rel=1e-12)
        assert k.inc == pytest.approx(np.radians(66.04), abs=1e-12)

    def test_unbound_rejected(self):
        with pytest.raises(DomainError):
            delaunay_from_polar_nodal(PolarNodalState(7000.0, 0.0, 0.0, 20.0, 52000.0, 1.0), MU)
