"""Functionals on history segments: effective state, class keys, Lyapunov V.

Every delay integral here is reduced to a single pass: swapping the order
of integration turns ``int g_k(s) int_s^0 f(u) du ds`` into
``int_{-tau_k}^0 f(u) G_k(u) du`` where G_k is the kernel mass at or
below u.  Composite Simpson with the CDF folded into the weights then
evaluates f once per node, and the same node set serves h, the class
key, and V.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .engine import Trajectory
from .histories import HistoryFunction
from .network import ReactionNetwork, complex_powers, monomial_at, monomial_cols
from .quadrature import aligned_bounds, simpson_weights
from .structure import StoichInfo

__all__ = [
    "ClassKey",
    "KEY_RTOL",
    "compute_h",
    "h_constant",
    "class_key",
    "map_P",
    "lyapunov_V",
    "FunctionalTrace",
    "trajectory_functionals",
]

KEY_RTOL = 1e-9
DEFAULT_PANEL_WIDTH = 0.01


@dataclass(frozen=True)
class ClassKey:
    """Conserved coordinates v_i . h(psi) over the canonical basis of S-perp."""

    values: tuple[float, ...]

    def matches(self, other: "ClassKey", rtol: float = KEY_RTOL) -> bool:
        if len(self.values) != len(other.values):
            return False
        a = np.asarray(self.values)
        b = np.asarray(other.values)
        scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-12)
        return bool(np.all(np.abs(a - b) <= rtol * scale))

    def pretty(self) -> str:
        return "[" + ", ".join(repr(v) for v in self.values) + "]"


def _window_rule(kernel, width: float, phase: float):
    """Simpson nodes/weights for ``int_{-tau}^0 f(u) cdf(u) du``.

    Panels are aligned to ``phase + k*width`` so that a caller handing us a
    trajectory window (``phase = -t``) gets panel bounds on archive grid
    times; the support top and density kinks are forced breakpoints since
    the CDF stops being smooth there.
    """
    lo, hi = kernel.support
    force = () if kernel.is_point else tuple(kernel.breakpoints)
    if hi < 0.0:
        force += (hi,)
    bounds = aligned_bounds(lo, 0.0, width, phase=phase, force=force)
    return simpson_weights(bounds, density=kernel.cdf)


def _entropy_bracket(z, ref):
    """z*(ln z - ln ref - 1) + ref elementwise, reading 0*ln 0 as 0."""
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 0.0, z, 1.0)
    return np.where(z > 0.0, z * (np.log(safe) - np.log(ref) - 1.0), 0.0) + ref


def compute_h(
    net: ReactionNetwork,
    psi,
    panel_width: float | None = None,
    phase: float = 0.0,
) -> np.ndarray:
    """Effective state h(psi) = psi(0) + sum_k kappa_k D_k y_k.

    D_k is the kernel-weighted backlog of the source monomial,
    ``int g_k(s) int_s^0 psi(u)^{y_k} du ds``.  ``psi`` is any callable on
    s <= 0 returning species values (HistoryFunction or SegmentView).
    Pass the integrator step as ``panel_width`` (and ``phase = -t``) when
    psi is a trajectory window, so quadrature panels match archive cells.
    """
    width = DEFAULT_PANEL_WIDTH if panel_width is None else float(panel_width)
    out = np.asarray(psi(0.0), dtype=float).copy()
    sources = net.source_matrix()
    for j, rxn in enumerate(net.reactions):
        if rxn.kernel.max_delay == 0.0:
            continue
        nodes, w = _window_rule(rxn.kernel, width, phase)
        idx, ex = complex_powers(rxn.source)
        mono = monomial_cols(np.asarray(psi(nodes), dtype=float), idx, ex)
        out += rxn.rate * float(w @ mono) * sources[j]
    return out


def h_constant(net: ReactionNetwork, x) -> np.ndarray:
    """Closed form of compute_h for constant psi: x + sum_k kappa_k m_k x^{y_k} y_k."""
    x = np.asarray(x, dtype=float)
    out = x.copy()
    sources = net.source_matrix()
    for j, rxn in enumerate(net.reactions):
        m = rxn.kernel.first_moment()
        if m == 0.0:
            continue
        idx, ex = complex_powers(rxn.source)
        out += rxn.rate * m * monomial_at(x, idx, ex) * sources[j]
    return out


def class_key(
    net: ReactionNetwork,
    stoich: StoichInfo,
    psi,
    panel_width: float | None = None,
    phase: float = 0.0,
) -> ClassKey:
    """Conserved quantities v_i . h(psi) identifying psi's compatibility class."""
    h = compute_h(net, psi, panel_width=panel_width, phase=phase)
    return ClassKey(tuple(float(v) for v in stoich.conservation_matrix() @ h))


def map_P(net: ReactionNetwork, theta, panel_width: float | None = None) -> np.ndarray:
    """Initial state of the delay-free class sharing theta's conserved quantities.

    Returns h(theta); v . h(theta) is by construction the class key, so two
    histories with equal keys land in the same delay-free class.
    """
    return compute_h(net, theta, panel_width=panel_width)


def lyapunov_V(
    net: ReactionNetwork,
    x_bar,
    psi,
    panel_width: float | None = None,
    phase: float = 0.0,
) -> float:
    """Entropy-like functional of the window, zero exactly at psi == x_bar.

    V = sum_i [psi_i(0)(ln psi_i(0) - ln xbar_i - 1) + xbar_i]
      + sum_k kappa_k int g_k(s) int_s^0 B(psi(u)^{y_k}) du ds
    with B the same bracket taken at reference xbar^{y_k}.  Species at 0
    contribute the 0*ln 0 := 0 limit, so boundary windows are admitted.
    """
    x_bar = np.asarray(x_bar, dtype=float)
    if np.any(x_bar <= 0.0):
        raise ValueError("Lyapunov reference point must be strictly positive")
    width = DEFAULT_PANEL_WIDTH if panel_width is None else float(panel_width)
    x0 = np.asarray(psi(0.0), dtype=float)
    total = float(np.sum(_entropy_bracket(x0, x_bar)))
    for rxn in net.reactions:
        if rxn.kernel.max_delay == 0.0:
            continue
        nodes, w = _window_rule(rxn.kernel, width, phase)
        idx, ex = complex_powers(rxn.source)
        mono = monomial_cols(np.asarray(psi(nodes), dtype=float), idx, ex)
        ref = monomial_at(x_bar, idx, ex)
        total += rxn.rate * float(w @ _entropy_bracket(mono, ref))
    return total


@dataclass(frozen=True)
class FunctionalTrace:
    """h, class key, and optionally V sampled along a trajectory's grid."""

    times: np.ndarray
    h_values: np.ndarray
    keys: np.ndarray
    lyapunov: np.ndarray | None

    @property
    def key_drift(self) -> float:
        """Max relative deviation of the sampled keys from their t=0 values."""
        ref = self.keys[0]
        scale = np.maximum(np.abs(ref), 1e-12)
        return float(np.max(np.abs(self.keys - ref) / scale)) if ref.size else 0.0


def trajectory_functionals(
    net: ReactionNetwork,
    stoich: StoichInfo,
    traj: Trajectory,
    x_bar=None,
    stride: int = 1,
) -> FunctionalTrace:
    """Sample the conserved functionals (and V when x_bar is given) along traj.

    One monomial archive per delayed reaction is shared by all samples:
    windows ending on grid times reuse the same node offsets, so each
    sample is a pair of dot products instead of fresh quadrature.  The
    last grid point is always included.
    """
    h0 = traj.h
    grid = traj.grid
    samples = np.arange(0, grid.size, max(int(stride), 1))
    if samples[-1] != grid.size - 1:
        samples = np.append(samples, grid.size - 1)
    times = grid[samples]
    h_out = traj.states[samples].astype(float).copy()
    v_out = None
    if x_bar is not None:
        x_bar = np.asarray(x_bar, dtype=float)
        if np.any(x_bar <= 0.0):
            raise ValueError("Lyapunov reference point must be strictly positive")
        v_out = _entropy_bracket(traj.states[samples], x_bar).sum(axis=1)

    sources = net.source_matrix()
    for j, rxn in enumerate(net.reactions):
        kern = rxn.kernel
        if kern.max_delay == 0.0:
            continue
        nodes, w = _window_rule(kern, h0, 0.0)
        idx, ex = complex_powers(rxn.source)

        # archives of the source monomial: all grid times and all cell
        # midpoints, prefixed with enough history for the earliest window
        pre = int(math.ceil(kern.max_delay / h0 - 1e-9)) + 1
        t_hist = -h0 * np.arange(pre, 0, -1)
        phi_g = np.concatenate(
            [
                monomial_cols(traj.history(t_hist), idx, ex),
                monomial_cols(traj.states.T, idx, ex),
            ]
        )
        x_mid = 0.5 * (traj.states[:-1] + traj.states[1:]) + (h0 / 8.0) * (
            traj.derivs[:-1] - traj.derivs[1:]
        )
        phi_h = np.concatenate(
            [
                monomial_cols(traj.history(t_hist + 0.5 * h0), idx, ex),
                monomial_cols(x_mid.T, idx, ex),
            ]
        )

        # classify each node offset once: archive grid point, archive cell
        # midpoint, or odd (support end off the lattice)
        r = nodes / h0
        on_grid = np.abs(r - np.round(r)) <= 1e-6
        frac = r - np.floor(r)
        on_half = ~on_grid & (np.abs(frac - 0.5) <= 1e-6)
        odd = ~on_grid & ~on_half
        off_g = np.round(r[on_grid]).astype(int)
        off_h = np.floor(r[on_half]).astype(int)
        w_g, w_h, w_o = w[on_grid], w[on_half], w[odd]
        s_odd = nodes[odd]

        base = pre + samples
        mat_g = phi_g[base[:, None] + off_g[None, :]]
        mat_h = phi_h[base[:, None] + off_h[None, :]]
        d_vals = mat_g @ w_g + mat_h @ w_h
        if x_bar is not None:
            ref = monomial_at(x_bar, idx, ex)
            v_out += rxn.rate * (
                _entropy_bracket(mat_g, ref) @ w_g + _entropy_bracket(mat_h, ref) @ w_h
            )
        if s_odd.size:
            t_odd = (times[:, None] + s_odd[None, :]).ravel()
            mono_o = monomial_cols(traj.eval(t_odd), idx, ex).reshape(times.size, -1)
            d_vals += mono_o @ w_o
            if x_bar is not None:
                v_out += rxn.rate * (_entropy_bracket(mono_o, ref) @ w_o)
        h_out += rxn.rate * d_vals[:, None] * sources[j][None, :]

    keys = h_out @ stoich.conservation_matrix().T
    return FunctionalTrace(times=times, h_values=h_out, keys=keys, lyapunov=v_out)
