"""Composite Simpson quadrature on panels aligned to an integration grid.

Delay integrals are taken over windows whose integrands are only piecewise
smooth: simulated trajectories are cubic per step cell and kink at grid
times, and kernel densities may kink at table breakpoints.  Aligning panel
boundaries with those points keeps every panel smooth, which is what makes
the composite rule behave at fourth order here.  Each panel contributes
Simpson weights at its two boundaries and its midpoint; node arrays are
interleaved as (b0, m0, b1, m1, ..., bM).
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "aligned_bounds",
    "interleave",
    "simpson_weights",
]


def aligned_bounds(lo: float, hi: float, width: float, phase: float = 0.0, force=()):
    """Panel boundaries over [lo, hi].

    Includes lo and hi, every point ``phase + k*width`` strictly inside,
    and any forced interior breakpoints; sorted with near-duplicates
    (within 1e-9*width) merged.
    """
    if not hi > lo:
        raise ValueError(f"empty panel range [{lo}, {hi}]")
    tol = 1e-9 * width
    pts = [lo, hi]
    pts.extend(p for p in force if lo + tol < p < hi - tol)
    k0 = math.ceil((lo - phase) / width)
    k1 = math.floor((hi - phase) / width)
    pts.extend(
        p for k in range(k0, k1 + 1) if lo + tol < (p := phase + k * width) < hi - tol
    )
    pts.sort()
    out = [pts[0]]
    for p in pts[1:]:
        if p - out[-1] > tol:
            out.append(p)
    out[-1] = hi  # a merged cluster at the top must still end exactly at hi
    return np.asarray(out)


def interleave(bound_vals: np.ndarray, mid_vals: np.ndarray) -> np.ndarray:
    out = np.empty(bound_vals.size + mid_vals.size)
    out[0::2] = bound_vals
    out[1::2] = mid_vals
    return out


def simpson_weights(bounds: np.ndarray, density=None) -> tuple[np.ndarray, np.ndarray]:
    """Interleaved nodes and weights for ``sum(W * f(nodes)) ~ int w*f``.

    ``density`` (if given) is evaluated at the nodes and folded into the
    weights, so callers only ever evaluate their own integrand.
    """
    d = np.diff(bounds)
    nodes = interleave(bounds, 0.5 * (bounds[:-1] + bounds[1:]))
    w = np.zeros(nodes.size)
    w[0:-1:2] += d / 6.0
    w[2::2] += d / 6.0
    w[1::2] = 4.0 * d / 6.0
    if density is not None:
        w = w * np.asarray(density(nodes), dtype=float)
    return nodes, w
