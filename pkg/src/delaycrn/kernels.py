"""Delay kernels: weight densities on the history window.

A kernel assigns unit mass to past times ``s <= 0``. A point mass at
``s = -tau`` models a constant delay (``tau = 0`` means no delay); a
density on an interval ``[-b, -a]`` models a distributed delay. Table
kernels interpolate a sampled density and are renormalized to unit mass.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import NetworkValidationError


@dataclass(frozen=True)
class PointMassKernel:
    """All mass concentrated at ``s = -delay``; ``delay = 0`` is the no-delay case."""

    delay: float

    def __post_init__(self):
        if self.delay < 0:
            raise NetworkValidationError(f"constant delay must be >= 0, got {self.delay}")

    @property
    def is_point(self) -> bool:
        return True

    @property
    def support(self) -> tuple[float, float]:
        return (-self.delay, -self.delay)

    @property
    def max_delay(self) -> float:
        return self.delay

    def first_moment(self) -> float:
        """Mean lag: integral of g(s) * (-s)."""
        return self.delay

    def cdf(self, s):
        """Kernel mass at or below s (all of it sits at s = -delay)."""
        return np.where(np.asarray(s, dtype=float) >= -self.delay, 1.0, 0.0)

    def pretty(self) -> str:
        return "none" if self.delay == 0 else f"const({self.delay!r})"


@dataclass(frozen=True)
class UniformKernel:
    """Constant density 1/(b-a) on ``s in [-b, -a]`` with ``0 <= a < b``."""

    a: float
    b: float

    def __post_init__(self):
        if not (0 <= self.a < self.b):
            raise NetworkValidationError(
                f"uniform kernel needs 0 <= a < b, got a={self.a}, b={self.b}"
            )

    @property
    def is_point(self) -> bool:
        return False

    @property
    def support(self) -> tuple[float, float]:
        return (-self.b, -self.a)

    @property
    def max_delay(self) -> float:
        return self.b

    def density(self, s):
        s = np.asarray(s, dtype=float)
        inside = (s >= -self.b) & (s <= -self.a)
        return np.where(inside, 1.0 / (self.b - self.a), 0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        """Kinks of the density strictly inside the support (none here)."""
        return ()

    def first_moment(self) -> float:
        return 0.5 * (self.a + self.b)

    def cdf(self, s):
        s = np.asarray(s, dtype=float)
        return np.clip((s + self.b) / (self.b - self.a), 0.0, 1.0)

    def pretty(self) -> str:
        return f"uniform({self.a!r},{self.b!r})"


@dataclass(frozen=True)
class TableKernel:
    """Piecewise-linear density from ``(s, value)`` samples, renormalized to unit mass.

    Samples must satisfy ``s <= 0`` and ``value >= 0``; the trapezoid mass of
    the raw table must be positive. ``source_path`` keeps the original file
    reference so the kernel can be pretty-printed back to DSL form.
    """

    s_points: tuple[float, ...]
    values: tuple[float, ...]
    source_path: str | None = field(default=None, compare=False)

    def __post_init__(self):
        s = np.asarray(self.s_points, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if s.size < 2 or s.size != v.size:
            raise NetworkValidationError("table kernel needs >= 2 (s, density) samples")
        if np.any(np.diff(s) <= 0):
            raise NetworkValidationError("table kernel abscissae must be strictly increasing")
        if np.any(s > 0):
            raise NetworkValidationError("table kernel abscissae must be <= 0")
        if np.any(v < 0):
            raise NetworkValidationError("table kernel density must be >= 0")
        mass = np.trapezoid(v, s)
        if mass <= 0:
            raise NetworkValidationError("table kernel has zero mass")
        object.__setattr__(self, "values", tuple(float(x) for x in v / mass))
        object.__setattr__(self, "s_points", tuple(float(x) for x in s))

    @property
    def is_point(self) -> bool:
        return False

    @property
    def support(self) -> tuple[float, float]:
        return (self.s_points[0], self.s_points[-1])

    @property
    def max_delay(self) -> float:
        return -self.s_points[0]

    def density(self, s):
        s = np.asarray(s, dtype=float)
        return np.interp(s, self.s_points, self.values, left=0.0, right=0.0)

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return self.s_points[1:-1]

    def first_moment(self) -> float:
        # g is linear between samples, so -s*g(s) is quadratic there and
        # per-segment Simpson integrates it exactly
        s = np.asarray(self.s_points)
        v = np.asarray(self.values)
        mid_f = 0.5 * (s[:-1] + s[1:]) * 0.5 * (v[:-1] + v[1:])
        seg = (np.diff(s) / 6.0) * (-s[:-1] * v[:-1] - 4.0 * mid_f - s[1:] * v[1:])
        return float(seg.sum())

    def cdf(self, s):
        """Mass at or below s; quadratic inside each table segment."""
        sp = np.asarray(self.s_points)
        v = np.asarray(self.values)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * (v[:-1] + v[1:]) * np.diff(sp))))
        s = np.asarray(s, dtype=float)
        j = np.clip(np.searchsorted(sp, s, side="right") - 1, 0, sp.size - 2)
        t = np.clip(s - sp[j], 0.0, sp[j + 1] - sp[j])
        slope = (v[j + 1] - v[j]) / (sp[j + 1] - sp[j])
        part = v[j] * t + 0.5 * slope * t * t
        return np.where(s < sp[0], 0.0, np.minimum(cum[j] + part, cum[-1]))

    def pretty(self) -> str:
        if self.source_path is None:
            raise NetworkValidationError("table kernel without a source file cannot be printed")
        return f"table({self.source_path})"

    @classmethod
    def from_csv(cls, path: str) -> "TableKernel":
        """Load a two-column ``s, density`` CSV (optional header row)."""
        rows = []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                try:
                    rows.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    if not rows:
                        continue  # tolerate a single header row
                    raise NetworkValidationError(f"bad table row {row!r} in {path}")
        if len(rows) < 2:
            raise NetworkValidationError(f"table kernel file {path} has fewer than 2 samples")
        rows.sort(key=lambda p: p[0])
        s, v = zip(*rows)
        return cls(s_points=s, values=v, source_path=path)


DelayKernel = PointMassKernel | UniformKernel | TableKernel

NO_DELAY = PointMassKernel(0.0)
