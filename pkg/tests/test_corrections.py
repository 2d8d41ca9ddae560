import numpy as np
import pytest

from j2theory import corrections as C
from j2theory.elements import (
    EARTH,
    DelaunayState,
    cartesian_from_delaunay,
    cartesian_from_polar_nodal,
    polar_nodal_from_delaunay,
)
from j2theory.errors import CriticalInclinationError
from j2theory.hamiltonian import eval_osculating_hamiltonian, secular_hamiltonian

MU = EARTH.mu


def _state(a, e, inc, ell=1.0, g=0.7, h=0.3):
    L = np.sqrt(MU * a)
    G = L * np.sqrt(1 - e * e)
    return DelaunayState(ell, g, h, L, G, G * np.cos(inc))


def _pos(d):
    return np.asarray(cartesian_from_delaunay(d, MU).position)


def test_order_validation(generic_state):
    with pytest.raises(ValueError):
        C.mean_to_osculating(generic_state, 3, EARTH)
    with pytest.raises(ValueError):
        C.CorrectionOrder(1, "sideways")
    with pytest.raises(ValueError):
        C.CorrectionOrder(5)


@pytest.mark.parametrize("order", [0, 1, 2])
def test_identity_without_j2(generic_state, order):
    c0 = EARTH.with_j2(0.0)
    pn = C.mean_to_osculating(generic_state, order, c0)
    ref = polar_nodal_from_delaunay(generic_state, MU)
    assert np.allclose(pn.as_tuple(), ref.as_tuple(), rtol=1e-15, atol=0)
    assert C.osculating_to_mean(generic_state, order, c0) == generic_state


@pytest.mark.parametrize("order", [1, 2])
def test_polar_momentum_untouched(generic_state, order):
    pn = C.mean_to_osculating(generic_state, order, EARTH)
    assert pn.N == generic_state.H
    back = C.osculating_to_mean(generic_state, order, EARTH)
    assert back.H == pytest.approx(generic_state.H, rel=1e-15)


def test_first_order_brackets_of_momenta_vanish_where_expected(generic_state):
    _, first, _, _ = C.correction_terms(generic_state, 1, EARTH)
    assert first[5] == 0.0        # {H, W1}: W1 is node-free
    assert first[2] != 0.0        # the node is corrected


def test_delta_a_series_match_brackets(rng):
    for _ in range(10):
        d = _state(rng.uniform(7000, 20000), rng.uniform(0.02, 0.5), rng.uniform(0.2, 1.0),
                   *rng.uniform(0, 2 * np.pi, 3))
        da1, nested, second = C.delta_a_brackets(d, EARTH)
        a = d.L**2 / MU
        scale = a * (EARTH.re / (a * (1 - (1 - (d.G / d.L) ** 2)))) ** 2
        assert C.delta_a_first(d, EARTH) == pytest.approx(da1, abs=1e-10 * scale)
        assert C.delta_a_second_inverse(d, EARTH) == pytest.approx(nested - second,
                                                                   abs=1e-9 * scale)


def test_delta_a_first_vs_map(generic_state):
    # the direct map's a (from r and R) moves by J2 {a, W1} to first order
    j2 = 1e-7
    c = EARTH.with_j2(j2)
    d1 = C.mean_to_osculating_delaunay(generic_state, 1, c)
    da = (d1.L**2 - generic_state.L**2) / MU
    assert da == pytest.approx(j2 * C.delta_a_first(generic_state, EARTH), rel=1e-6)


def _roundtrip_error(d, order, c):
    osc = C.mean_to_osculating_delaunay(d, order, c)
    back = C.osculating_to_mean(osc, order, c)
    return np.linalg.norm(_pos(back) - _pos(d))


@pytest.mark.parametrize("order, rate", [(1, 2.0), (2, 3.0)])
def test_roundtrip_scaling(generic_state, order, rate):
    errs = [_roundtrip_error(generic_state, order, EARTH.with_j2(k * EARTH.j2)) for k in (4, 2, 1)]
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - rate) < 0.15), slopes


@pytest.mark.parametrize("order", [1, 2])
def test_hamiltonian_consistency_scaling(generic_state, order):
    # energy of the osculating image minus the mean Hamiltonian through order `order`
    def resid(j2):
        c = EARTH.with_j2(j2)
        osc = C.mean_to_osculating_delaunay(generic_state, order, c)
        d = generic_state
        return abs(eval_osculating_hamiltonian(osc, c) - secular_hamiltonian(order, d.L, d.G, d.H, c))

    errs = [resid(k * EARTH.j2) for k in (4, 2, 1)]
    slopes = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all(np.abs(slopes - (order + 1)) < 0.15), slopes


def test_small_eccentricity_continuity():
    # corrections in position are continuous through e -> 0
    es = [1e-6, 1e-5, 1e-4, 1e-3]
    pos = [np.asarray(cartesian_from_polar_nodal(
        C.mean_to_osculating(_state(7200, e, 1.2, ell=0.4, g=0.9), 2, EARTH)).position) for e in es]
    for (e1, p1), (e2, p2) in zip(zip(es, pos), zip(es[1:], pos[1:])):
        assert np.linalg.norm(p2 - p1) <= 2.5 * 7200 * (e2 - e1) + 1e-9


def test_eccentricity_sweep_finite():
    for e in np.geomspace(1e-6, 0.5, 25):
        pn = C.mean_to_osculating(_state(8000, e, 1.0), 2, EARTH)
        assert np.all(np.isfinite(pn.as_tuple()))
        back = C.osculating_to_mean(_state(8000, e, 1.0), 2, EARTH)
        assert np.all(np.isfinite(back.as_tuple()))


def test_critical_inclination_refused():
    d = _state(8000, 0.1, np.arccos(np.sqrt(0.2)))
    with pytest.raises(CriticalInclinationError):
        C.mean_to_osculating(d, 1, EARTH)


def test_batched_matches_scalar(rng):
    n = 6
    a = rng.uniform(7000, 12000, n)
    e = rng.uniform(0.001, 0.3, n)
    d = _state(a, e, 0.5, rng.uniform(0, 6, n), rng.uniform(0, 6, n), rng.uniform(0, 6, n))
    batch = C.mean_to_osculating(d, 2, EARTH)
    for i in range(n):
        di = DelaunayState(*(np.asarray(v)[i] for v in d.as_tuple()))
        one = C.mean_to_osculating(di, 2, EARTH)
        assert np.allclose([np.asarray(v)[i] for v in batch.as_tuple()], one.as_tuple(),
                           rtol=1e-14, atol=1e-12)


def _correction(d, order=2):
    pn = C.mean_to_osculating(d, order, EARTH)
    return np.asarray(cartesian_from_polar_nodal(pn).position) - _pos(d)


def test_correction_itself_continuous_near_circular():
    es = [1.0e-6, 1.0e-5, 1.0e-4, 1.0e-3, 1.99e-3, 2.01e-3, 5e-3]
    corr = [_correction(_state(7200, e, 1.2, ell=0.4, g=0.9)) for e in es]
    for (e1, c1), (e2, c2) in zip(zip(es, corr), zip(es[1:], corr[1:])):
        assert np.linalg.norm(c2 - c1) <= 10 * EARTH.j2 * 7200 * (e2 - e1) + 1e-9


def test_small_e_extrapolation_matches_direct_evaluation():
    d = _state(7500, 1.5e-3, 0.8)
    n_ex, s_ex = C._second_order_pieces(d, EARTH, 1e-3, 1e-6)
    n_in, s_in = C._second_order_in_place(d, EARTH, 1e-3, 1e-6)
    scale = 0.5 * EARTH.j2**2
    assert np.max(np.abs(n_ex - n_in)[:4]) * scale < 1e-9
    assert np.max(np.abs(s_ex - s_in)[:4]) * scale < 1e-9
