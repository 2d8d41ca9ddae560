"""Command-line front end: ``j2theory {propagate,compare,verify,bench}``.

Runs are driven by a JSON configuration file (every key optional, unknown
keys rejected) plus a few flag overrides.  Exit status: 0 success, 2 bad
configuration, 3 guard violation, 4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .elements import (
    EARTH,
    KeplerianSet,
    PhysicalConstants,
    cartesian_from_keplerian,
    delaunay_from_keplerian,
)
from .errors import ConfigError, DomainError, GuardViolation, IntegrationError

EXIT_OK, EXIT_CONFIG, EXIT_GUARD, EXIT_VERIFY = 0, 2, 3, 4

TOPEX_ELEMENTS = {
    "a_km": 7707.270,
    "e": 1e-4,
    "inc_deg": 66.04,
    "node_deg": 180.001,
    "argp_deg": 270.0,
    "mean_anomaly_deg": 180.0,
}
DEFAULT_VARIANTS = ("1:2:1", "1+:2:1", "2:2:2", "2+:2:2")


@dataclass(frozen=True)
class RunConfig:
    constants: PhysicalConstants = EARTH
    elements: dict = field(default_factory=lambda: dict(TOPEX_ELEMENTS))
    theory: str = "2+:2:2"
    variants: tuple[str, ...] = DEFAULT_VARIANTS
    duration_days: float = 30.0
    step_s: float = 600.0
    oracle_tol: float = 1e-13
    ephemeris_csv: str | None = None
    errors_csv: str | None = None
    report_json: str | None = None
    seed: int = 0
    verify_states: int = 1000
    bench_states: int = 100_000
    bench_repeats: int = 5

    @property
    def keplerian(self) -> KeplerianSet:
        el = self.elements
        return KeplerianSet(
            el["a_km"], el["e"], np.radians(el["inc_deg"]), np.radians(el["node_deg"]),
            np.radians(el["argp_deg"]), np.radians(el["mean_anomaly_deg"]),
        )

    def times(self) -> np.ndarray:
        end = self.duration_days * 86400.0
        n = int(np.floor(end / self.step_s + 1e-9))
        t = np.arange(n + 1) * self.step_s
        if end - t[-1] > 1e-6:
            t = np.append(t, end)
        return t


_TOP_KEYS = {
    "constants", "elements", "theory", "variants", "duration_days", "step_s", "oracle_tol",
    "output", "seed", "verify_states", "bench_states", "bench_repeats",
}
_CONST_KEYS = {"mu", "re", "j2"}
_OUTPUT_KEYS = {"ephemeris_csv", "errors_csv", "report_json"}


def _number(v, key, lo=None, hi=None, integer=False):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{key}: expected a number, got {v!r}")
    if integer and int(v) != v:
        raise ConfigError(f"{key}: expected an integer, got {v!r}")
    if not np.isfinite(v):
        raise ConfigError(f"{key}: must be finite")
    if lo is not None and v < lo:
        raise ConfigError(f"{key}: must be >= {lo}")
    if hi is not None and v > hi:
        raise ConfigError(f"{key}: must be <= {hi}")
    return int(v) if integer else float(v)


def _keys(d, allowed, where):
    if not isinstance(d, dict):
        raise ConfigError(f"{where}: expected an object")
    extra = set(d) - allowed
    if extra:
        raise ConfigError(f"{where}: unknown keys {sorted(extra)}")


def _label(v, key):
    from .secular import TheoryConfig

    if not isinstance(v, str):
        raise ConfigError(f"{key}: expected a label string such as '2+:2:2'")
    try:
        TheoryConfig.from_label(v)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return v


def config_from_dict(raw: dict) -> RunConfig:
    _keys(raw, _TOP_KEYS, "config")
    kw = {}
    if "constants" in raw:
        _keys(raw["constants"], _CONST_KEYS, "constants")
        vals = {k: _number(v, f"constants.{k}") for k, v in raw["constants"].items()}
        try:
            kw["constants"] = replace(EARTH, **vals)
        except DomainError as exc:
            raise ConfigError(f"constants: {exc}") from None
    if "elements" in raw:
        _keys(raw["elements"], set(TOPEX_ELEMENTS), "elements")
        el = dict(TOPEX_ELEMENTS)
        el.update({k: _number(v, f"elements.{k}") for k, v in raw["elements"].items()})
        if el["a_km"] <= 0:
            raise ConfigError("elements.a_km: must be positive")
        if not 0 <= el["e"] < 1:
            raise ConfigError("elements.e: must lie in [0, 1)")
        if not 0 <= el["inc_deg"] <= 180:
            raise ConfigError("elements.inc_deg: must lie in [0, 180]")
        kw["elements"] = el
    if "theory" in raw:
        kw["theory"] = _label(raw["theory"], "theory")
    if "variants" in raw:
        v = raw["variants"]
        if not isinstance(v, list) or not v:
            raise ConfigError("variants: expected a non-empty list of labels")
        kw["variants"] = tuple(_label(x, "variants") for x in v)
    if "duration_days" in raw:
        kw["duration_days"] = _number(raw["duration_days"], "duration_days", 0.0, 365.0)
    if "step_s" in raw:
        step = _number(raw["step_s"], "step_s")
        if step <= 0:
            raise ConfigError("step_s: must be positive")
        kw["step_s"] = step
    if "oracle_tol" in raw:
        kw["oracle_tol"] = _number(raw["oracle_tol"], "oracle_tol", 1e-14, 1e-9)
    if "output" in raw:
        _keys(raw["output"], _OUTPUT_KEYS, "output")
        for k, v in raw["output"].items():
            if v is not None and not isinstance(v, str):
                raise ConfigError(f"output.{k}: expected a path string or null")
            kw[k] = v
    if "seed" in raw:
        kw["seed"] = _number(raw["seed"], "seed", 0, integer=True)
    if "verify_states" in raw:
        kw["verify_states"] = _number(raw["verify_states"], "verify_states", 1, integer=True)
    if "bench_states" in raw:
        kw["bench_states"] = _number(raw["bench_states"], "bench_states", 1, integer=True)
    if "bench_repeats" in raw:
        kw["bench_repeats"] = _number(raw["bench_repeats"], "bench_repeats", 1, integer=True)
    return RunConfig(**kw)


def read_config_file(path: str) -> dict:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config: expected a JSON object")
    return raw


def load_config(path: str | None) -> RunConfig:
    return RunConfig() if path is None else config_from_dict(read_config_file(path))


def _fmt(x) -> str:
    """Shortest decimal string that round-trips to the same double."""
    return repr(float(x))


def _open_out(path: str | None):
    if path is None or path == "-":
        return sys.stdout, False
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    return open(path, "w", newline=""), True


def _theory(cfg: RunConfig, label: str):
    from .secular import TheoryConfig

    return TheoryConfig.from_label(label, constants=cfg.constants)


def cmd_propagate(cfg: RunConfig) -> int:
    from .secular import ephemeris_states, initialize_theory

    tcfg = _theory(cfg, cfg.theory)
    osc = delaunay_from_keplerian(cfg.keplerian, cfg.constants.mu)
    sc = initialize_theory(osc, tcfg)
    t = cfg.times()
    st = ephemeris_states(sc, t, tcfg)
    fh, close = _open_out(cfg.ephemeris_csv)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_s", "x_km", "y_km", "z_km", "vx_kms", "vy_kms", "vz_kms"])
        for i, ti in enumerate(t):
            w.writerow([_fmt(ti)] + [_fmt(v) for v in st.position[i]]
                       + [_fmt(v) for v in st.velocity[i]])
    finally:
        if close:
            fh.close()
    return EXIT_OK


def compare_variants(cfg: RunConfig):
    """Oracle trajectory and the RSS curve of every configured variant."""
    from .oracle import compare_rss, integrate_trajectory
    from .secular import ephemeris_states, initialize_theory

    c = cfg.constants
    t = cfg.times()
    x0 = cartesian_from_keplerian(cfg.keplerian, c.mu)
    truth = integrate_trajectory(x0, t, cfg.oracle_tol, c)
    osc = delaunay_from_keplerian(cfg.keplerian, c.mu)
    curves = {}
    for label in cfg.variants:
        tcfg = _theory(cfg, label)
        sc = initialize_theory(osc, tcfg)
        st = ephemeris_states(sc, t, tcfg)
        curves[label] = compare_rss(t, st.position, truth)[1]
    return t, truth, curves


def cmd_compare(cfg: RunConfig) -> int:
    t, _, curves = compare_variants(cfg)
    fh, close = _open_out(cfg.errors_csv)
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["variant", "t_days", "rss_km"])
        for label, rss in curves.items():
            for ti, ri in zip(t, rss):
                w.writerow([label, _fmt(ti / 86400.0), _fmt(ri)])
    finally:
        if close:
            fh.close()
    summary = ", ".join(f"{{{k}}} {v[-1] * 1e3:.4g} m" for k, v in curves.items())
    print(f"RSS at day {t[-1] / 86400.0:g}: {summary}", file=sys.stderr)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from .verify import run_checks

    results = run_checks(seed=cfg.seed, n_states=cfg.verify_states, c=cfg.constants)
    report = {"seed": cfg.seed, "states": cfg.verify_states,
              "passed": all(r.passed for r in results),
              "checks": [r.as_dict() for r in results]}
    _emit_json(report, cfg.report_json)
    return EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_bench(cfg: RunConfig) -> int:
    from .bench import run_bench

    timings = run_bench(cfg.bench_states, cfg.bench_repeats, cfg.seed, cfg.constants)
    _emit_json({"timings": [t.as_dict() for t in timings]}, cfg.report_json)
    return EXIT_OK


def _emit_json(obj, path):
    text = json.dumps(obj, indent=2)
    if path is None or path == "-":
        print(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text + "\n")


COMMANDS = {
    "propagate": cmd_propagate,
    "compare": cmd_compare,
    "verify": cmd_verify,
    "bench": cmd_bench,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="j2theory", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", help="JSON run configuration (defaults: Topex-type orbit)")
        s.add_argument("--variant", action="append",
                       help="theory label such as 2+:2:2 (repeat for compare)")
        s.add_argument("--days", type=float, help="propagation span in days")
        s.add_argument("--step", type=float, help="output step in seconds")
        s.add_argument("--tol", type=float, help="oracle relative tolerance")
        s.add_argument("--seed", type=int, help="sampling seed")
        s.add_argument("--states", type=int, help="number of sampled states (verify, bench)")
        s.add_argument("--out", help="output path ('-' for stdout)")
    return p


def apply_overrides(cfg_raw: dict, args) -> dict:
    raw = dict(cfg_raw)
    if args.variant:
        if args.command == "compare":
            raw["variants"] = list(args.variant)
        else:
            raw["theory"] = args.variant[-1]
    if args.days is not None:
        raw["duration_days"] = args.days
    if args.step is not None:
        raw["step_s"] = args.step
    if args.tol is not None:
        raw["oracle_tol"] = args.tol
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.states is not None:
        raw["verify_states" if args.command == "verify" else "bench_states"] = args.states
    if args.out is not None:
        key = {"propagate": "ephemeris_csv", "compare": "errors_csv"}.get(args.command,
                                                                        "report_json")
        raw["output"] = dict(raw.get("output", {}), **{key: args.out})
    return raw


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = read_config_file(args.config) if args.config else {}
        cfg = config_from_dict(apply_overrides(raw, args))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return COMMANDS[args.command](cfg)
    except GuardViolation as exc:
        print(f"guard violation [{exc.guard}]: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except (DomainError, IntegrationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
