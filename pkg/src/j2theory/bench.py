"""Throughput of the periodic-correction evaluation.

Times the full direct correction (all six polar-nodal functions) at orders 1
and 2, and the semi-major-axis correction by the closed series against the
bracket engine.  States are evaluated in batches; the figures reported are
wall time per state.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import genfun as gf
from .corrections import mean_to_osculating
from .elements import EARTH, DelaunayState, PhysicalConstants
from .jets import OrbitJets, bracket, bracket_jet, lift_state


@dataclass(frozen=True)
class Timing:
    name: str
    states: int
    mean_us: float
    median_us: float
    spread: float

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "states": self.states,
            "mean_us_per_state": self.mean_us,
            "median_us_per_state": self.median_us,
            "relative_spread": self.spread,
        }


def bench_states(rng: np.random.Generator, n: int, c: PhysicalConstants = EARTH) -> DelaunayState:
    """Near-circular to moderately eccentric low orbits away from the guard bands."""
    a = rng.uniform(6900.0, 8000.0, n)
    e = rng.uniform(1e-3, 0.1, n)
    ci = rng.uniform(-0.85, 0.85, n)
    s2 = 1.0 - ci * ci
    bad = (np.abs(5.0 * s2 - 4.0) < 0.05) | (np.abs(3.0 * s2 - 2.0) < 1e-2)
    ci[bad] = 0.2
    L = np.sqrt(c.mu * a)
    G = L * np.sqrt(1.0 - e * e)
    ang = rng.uniform(0.0, 2.0 * np.pi, (3, n))
    return DelaunayState(ang[0], ang[1], ang[2], L, G, G * ci)


def _chunks(d: DelaunayState, size: int):
    n = np.asarray(d.L).shape[0]
    for s in range(0, n, size):
        yield DelaunayState(*(np.asarray(v)[s:s + size] for v in d.as_tuple()))


def _time(fn, d: DelaunayState, chunk: int, repeats: int, name: str) -> Timing:
    n = np.asarray(d.L).shape[0]
    per_state = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        for part in _chunks(d, chunk):
            fn(part)
        per_state.append((time.perf_counter() - t0) / n * 1e6)
    arr = np.asarray(per_state)
    spread = float((arr.max() - arr.min()) / arr.mean()) if arr.size > 1 else 0.0
    return Timing(name, n, float(arr.mean()), float(np.median(arr)), spread)


def run_bench(n_states: int = 100_000, repeats: int = 5, seed: int = 0,
              c: PhysicalConstants = EARTH, chunk: int = 10_000) -> list[Timing]:
    d = bench_states(np.random.default_rng(seed), n_states, c)

    def direct(order):
        return lambda part: mean_to_osculating(part, order, c)

    def da_table_first(part):
        return gf.delta_a_first(OrbitJets(lift_state(part, 0), c.mu), c).val

    def da_bracket_first(part):
        o = OrbitJets(lift_state(part, 1), c.mu)
        return bracket(o.a, gf.w1(o, c))

    def da_table_second(part):
        return gf.delta_a_second_inverse(OrbitJets(lift_state(part, 0), c.mu), c).val

    def da_bracket_second(part):
        o2 = OrbitJets(lift_state(part, 2), c.mu)
        W1 = gf.w1(o2, c)
        o1 = OrbitJets(lift_state(part, 1), c.mu)
        return bracket(bracket_jet(o2.a, W1), W1.truncate(1)) - bracket(o1.a, gf.w2(o1, c))

    cases = [
        ("direct_correction_order1", direct(1)),
        ("direct_correction_order2", direct(2)),
        ("delta_a_order1_table", da_table_first),
        ("delta_a_order1_bracket", da_bracket_first),
        ("delta_a_order2_table", da_table_second),
        ("delta_a_order2_bracket", da_bracket_second),
    ]
    return [_time(fn, d, chunk, repeats, name) for name, fn in cases]
