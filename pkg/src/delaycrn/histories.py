"""Initial history functions on the delay window [-tau, 0].

A history assigns each species a non-negative function of s: a constant, an
affine-power profile ``(a*s + b)**p`` with p in {1, 1/2}, or a linearly
interpolated sample table.  Histories evaluate vectorized over arrays of s
values, which is what the integrator and the functional quadratures need.
"""

from __future__ import annotations

import csv
import os
import re
from dataclasses import dataclass

import numpy as np

from .errors import NetworkValidationError

__all__ = [
    "Constant",
    "AffinePower",
    "Table",
    "SpeciesHistory",
    "HistoryFunction",
    "parse_history_spec",
]


@dataclass(frozen=True)
class Constant:
    """Constant profile ``value`` for all s."""

    value: float

    def __post_init__(self):
        if self.value < 0:
            raise NetworkValidationError(f"history constant must be >= 0, got {self.value}")

    def evaluate(self, s: np.ndarray, tau: float) -> np.ndarray:
        return np.full_like(s, self.value, dtype=float)

    def pretty(self) -> str:
        return f"const {self.value:g}"


@dataclass(frozen=True)
class AffinePower:
    """Profile ``(a*s + b) ** power`` with power 1 or 1/2.

    The base must be non-negative on the whole window; this is checked when
    the enclosing HistoryFunction fixes tau.
    """

    a: float
    b: float
    power: float = 1.0

    def __post_init__(self):
        if self.power not in (1.0, 0.5):
            raise NetworkValidationError(f"history power must be 1 or 0.5, got {self.power}")

    def evaluate(self, s: np.ndarray, tau: float) -> np.ndarray:
        # guard the sqrt branch against -0.0-scale rounding at the window edge
        base = np.maximum(self.a * s + self.b, 0.0)
        return base if self.power == 1.0 else np.sqrt(base)

    def min_on_window(self, tau: float) -> float:
        return min(self.b, self.a * (-tau) + self.b)

    def pretty(self) -> str:
        name = "affine" if self.power == 1.0 else "sqrtaffine"
        return f"{name}({self.a:g},{self.b:g})"


@dataclass(frozen=True)
class Table:
    """Sampled profile with linear interpolation, clamped outside the samples."""

    s_points: tuple[float, ...]
    values: tuple[float, ...]
    source_path: str = ""

    def __post_init__(self):
        if len(self.s_points) < 2 or len(self.s_points) != len(self.values):
            raise NetworkValidationError("history table needs >= 2 matched (s, value) rows")
        if any(b <= a for a, b in zip(self.s_points, self.s_points[1:])):
            raise NetworkValidationError("history table s column must be strictly increasing")
        if any(v < 0 for v in self.values):
            raise NetworkValidationError("history table values must be >= 0")

    @classmethod
    def from_csv(cls, path: str) -> "Table":
        rows: list[tuple[float, float]] = []
        with open(path, newline="") as f:
            for lineno, row in enumerate(csv.reader(f), start=1):
                if not row or not "".join(row).strip():
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if lineno == 1:
                        continue  # tolerate a header row
                    raise NetworkValidationError(
                        f"{path}:{lineno}: expected two numeric columns"
                    ) from None
        return cls(
            tuple(s for s, _ in rows), tuple(v for _, v in rows), source_path=os.path.abspath(path)
        )

    def evaluate(self, s: np.ndarray, tau: float) -> np.ndarray:
        return np.interp(s, self.s_points, self.values)

    def pretty(self) -> str:
        return f"table({self.source_path})"


SpeciesHistory = Constant | AffinePower | Table


@dataclass(frozen=True)
class HistoryFunction:
    """Vector history theta: [-tau, 0] -> R^n_{>=0}, one spec per species."""

    specs: tuple[SpeciesHistory, ...]
    tau: float

    def __post_init__(self):
        if self.tau < 0:
            raise NetworkValidationError(f"history window must be >= 0, got tau={self.tau}")
        if not self.specs:
            raise NetworkValidationError("history needs at least one species spec")
        for i, spec in enumerate(self.specs):
            if isinstance(spec, AffinePower) and spec.min_on_window(self.tau) < 0:
                raise NetworkValidationError(
                    f"history component {i} is negative on [-{self.tau}, 0]"
                )

    @property
    def n(self) -> int:
        return len(self.specs)

    @classmethod
    def constant(cls, values, tau: float = 0.0) -> "HistoryFunction":
        return cls(tuple(Constant(float(v)) for v in values), tau)

    def __call__(self, s) -> np.ndarray:
        """Evaluate at s (scalar -> shape (n,); array of m -> shape (n, m))."""
        arr = np.asarray(s, dtype=float)
        out = np.stack([spec.evaluate(arr, self.tau) for spec in self.specs])
        return out if arr.ndim else out.reshape(self.n)

    def pretty(self) -> str:
        return "; ".join(spec.pretty() for spec in self.specs)


_CALL_RE = re.compile(r"^(affine|sqrtaffine|table)\((.*)\)$")
_NUM_RE = re.compile(r"^[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?$")


def _split_entries(text: str) -> list[str]:
    """Split on whitespace/';' outside parentheses (table paths may hold ',')."""
    entries: list[str] = []
    buf: list[str] = []
    depth = 0
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth = max(0, depth - 1)
        if ch in " \t;" and depth == 0:
            if buf:
                entries.append("".join(buf))
                buf = []
        else:
            buf.append(ch)
    if buf:
        entries.append("".join(buf))
    return entries


def parse_history_spec(text: str, n: int, tau: float, base_dir: str = ".") -> HistoryFunction:
    """Parse the per-species history mini-language.

    Entries, separated by whitespace or ';':
      ``zero`` | ``const c`` | bare number | ``affine(a,b)`` |
      ``sqrtaffine(a,b)`` | ``table(path)``
    One entry per species, in declaration order.
    """
    entries = _split_entries(text)
    specs: list[SpeciesHistory] = []
    i = 0
    while i < len(entries):
        entry = entries[i]
        i += 1
        if entry == "zero":
            specs.append(Constant(0.0))
            continue
        if entry == "const":
            if i >= len(entries) or not _NUM_RE.match(entries[i]):
                raise ValueError(f"history spec: 'const' needs a number, got {entries[i:i+1]}")
            specs.append(Constant(float(entries[i])))
            i += 1
            continue
        if _NUM_RE.match(entry):
            specs.append(Constant(float(entry)))
            continue
        m = _CALL_RE.match(entry)
        if not m:
            raise ValueError(f"history spec: cannot parse entry {entry!r}")
        kind, args = m.groups()
        if kind == "table":
            path = args.strip()
            if not path:
                raise ValueError("history spec: table() needs a file path")
            if not os.path.isabs(path):
                path = os.path.normpath(os.path.join(base_dir, path))
            specs.append(Table.from_csv(path))
            continue
        parts = [p.strip() for p in args.split(",")]
        if len(parts) != 2 or not all(_NUM_RE.match(p) for p in parts):
            raise ValueError(f"history spec: {kind}(a,b) needs two numbers, got {entry!r}")
        a, b = float(parts[0]), float(parts[1])
        specs.append(AffinePower(a, b, 1.0 if kind == "affine" else 0.5))
    if len(specs) != n:
        raise ValueError(f"history spec has {len(specs)} entries but the network has {n} species")
    return HistoryFunction(tuple(specs), tau)
