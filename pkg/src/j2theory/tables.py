"""Coefficient tables shipped as ``data/tables.txt``.

Entries are polynomials (or, for a few second-order a-correction entries,
ratios of polynomials) with exact rational coefficients in one variable:
``s^2`` for the inclination tables and ``e^2`` for ``q``.  Aliases are
resolved at load time so evaluation never follows a chain.
"""

from __future__ import annotations

import hashlib
from contextlib import contextmanager
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .jets import Jet, _chain

TABLE_NAMES = ("B", "b", "q", "beta3", "beta4", "A")


@dataclass(frozen=True)
class Entry:
    num: tuple[Fraction, ...]
    den: tuple[Fraction, ...] = (Fraction(1),)
    printed: str = ""

    def scaled(self, k: Fraction) -> "Entry":
        return Entry(tuple(k * c for c in self.num), self.den, self.printed)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.num)


class CoefficientTable:
    """One named table: index tuple -> :class:`Entry`."""

    def __init__(self, name: str, entries: dict[tuple[int, ...], Entry]):
        self.name = name
        self.entries = entries
        self._float = {
            idx: (
                np.array([float(c) for c in e.num]),
                np.array([float(c) for c in e.den]),
            )
            for idx, e in entries.items()
        }

    def __contains__(self, idx):
        return tuple(idx) in self.entries

    def __getitem__(self, idx) -> Entry:
        return self.entries[tuple(idx)]

    def keys(self):
        return self.entries.keys()

    def __call__(self, idx, x):
        """Evaluate entry ``idx`` at ``x`` (array or Jet); unlisted entries are 0."""
        idx = tuple(idx)
        if idx not in self._float:
            return 0.0
        num, den = self._float[idx]
        if isinstance(x, Jet):
            p0, p1, p2 = _horner3(num, x.val)
            if len(den) == 1:
                return _chain(x, p0 / den[0], p1 / den[0], p2 / den[0])
            q0, q1, q2 = _horner3(den, x.val)
            f0 = p0 / q0
            f1 = (p1 - f0 * q1) / q0
            f2 = (p2 - 2.0 * f1 * q1 - f0 * q2) / q0
            return _chain(x, f0, f1, f2)
        x = np.asarray(x, dtype=float)
        p0 = _horner(num, x)
        if len(den) == 1:
            return p0 / den[0]
        return p0 / _horner(den, x)


def _horner(c, x):
    acc = np.zeros_like(x) + c[-1]
    for ck in c[-2::-1]:
        acc = acc * x + ck
    return acc


def _horner3(c, x):
    """Polynomial value with first and second derivatives."""
    p0 = np.zeros_like(x) + c[-1]
    p1 = np.zeros_like(x)
    p2 = np.zeros_like(x)
    for ck in c[-2::-1]:
        p2 = p2 * x + 2.0 * p1
        p1 = p1 * x + p0
        p0 = p0 * x + ck
    return p0, p1, p2


def _parse_index(s: str) -> tuple[int, ...]:
    return tuple(int(t) for t in s.split(","))


def parse_tables(text: str) -> dict[str, CoefficientTable]:
    raw: dict[str, dict] = {name: {} for name in TABLE_NAMES}
    aliases = []
    for lineno, line in enumerate(text.splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        printed = ""
        if "|" in body:
            body, printed = (t.strip() for t in body.split("|", 1))
        toks = body.split()
        name, idx, kind = toks[0], _parse_index(toks[1]), toks[2]
        if name not in raw:
            raise ValueError(f"line {lineno}: unknown table {name!r}")
        if idx in raw[name] or any(a[0] == name and a[1] == idx for a in aliases):
            raise ValueError(f"line {lineno}: duplicate entry {name}{idx}")
        if kind == "poly":
            rest = toks[3:]
            if "/" in rest:
                cut = rest.index("/")
                num, den = rest[:cut], rest[cut + 1:]
            else:
                num, den = rest, ["1"]
            raw[name][idx] = Entry(
                tuple(Fraction(t) for t in num), tuple(Fraction(t) for t in den), printed
            )
        elif kind == "alias":
            scale, target, tidx = Fraction(toks[3]), toks[4], _parse_index(toks[5])
            aliases.append((name, idx, scale, target, tidx, lineno))
        else:
            raise ValueError(f"line {lineno}: unknown entry kind {kind!r}")

    pending = list(aliases)
    while pending:
        progress = False
        for item in list(pending):
            name, idx, scale, target, tidx, lineno = item
            if tidx in raw[target]:
                src = raw[target][tidx]
                raw[name][idx] = Entry(
                    tuple(scale * c for c in src.num), src.den, f"alias {scale} {target}{tidx}"
                )
                pending.remove(item)
                progress = True
        if not progress:
            bad = ", ".join(f"{n}{i} (line {ln})" for n, i, _, _, _, ln in pending)
            raise ValueError(f"unresolvable aliases: {bad}")
    return {name: CoefficientTable(name, entries) for name, entries in raw.items()}


def data_text() -> str:
    return resources.files("j2theory").joinpath("data/tables.txt").read_text()


def checksum(text: str | None = None) -> str:
    return hashlib.sha256((text if text is not None else data_text()).encode()).hexdigest()


@lru_cache(maxsize=1)
def shipped_tables() -> dict[str, CoefficientTable]:
    return parse_tables(data_text())


_override: list[dict[str, CoefficientTable]] = []


def default_tables() -> dict[str, CoefficientTable]:
    """Tables in effect: the shipped data unless :func:`using_tables` is active."""
    return _override[-1] if _override else shipped_tables()


@contextmanager
def using_tables(tables: dict[str, CoefficientTable]):
    """Evaluate every series with ``tables`` in place of the shipped data."""
    _override.append(tables)
    try:
        yield tables
    finally:
        _override.pop()


def perturbed(tables: dict[str, CoefficientTable], name: str, idx, coeff: int,
              delta) -> dict[str, CoefficientTable]:
    """Copy of ``tables`` with one numerator coefficient of one entry shifted."""
    idx = tuple(idx)
    entries = dict(tables[name].entries)
    old = entries.get(idx, Entry((Fraction(0),)))
    num = list(old.num) + [Fraction(0)] * max(0, coeff + 1 - len(old.num))
    num[coeff] += Fraction(delta)
    entries[idx] = Entry(tuple(num), old.den, old.printed)
    out = dict(tables)
    out[name] = CoefficientTable(name, entries)
    return out
