"""Integration of the delayed mass-action dynamics.

The integrator advances by the method of steps: fixed-step explicit
4-stage Runge-Kutta on a uniform grid, with every completed step archived
as state plus derivative so past values come from cubic Hermite dense
output.  Distributed-delay integrals use composite Simpson whose panel
boundaries land on archive grid times (and kernel breakpoints), so the
piecewise structure of the numeric solution never crosses a panel.  The
sliver of kernel mass inside the step being computed is evaluated by
Hermite extrapolation from the last accepted step.

Also here: the delay-free fast path (``simulate_ode``), and the expansion
of a constant-delay network into its delay-free approximating chain of N
intermediate species per delayed reaction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import IntegrationError, NetworkValidationError
from .histories import HistoryFunction
from .network import (
    Complex,
    Reaction,
    ReactionNetwork,
    SpeciesId,
    complex_powers,
    monomial_at,
    monomial_cols,
)
from .quadrature import aligned_bounds, simpson_weights

__all__ = [
    "SimConfig",
    "Trajectory",
    "SegmentView",
    "rhs",
    "simulate",
    "simulate_ode",
    "expand_chain",
    "chain_initial_state",
]


@dataclass(frozen=True)
class SimConfig:
    """Fixed-step integration settings."""

    h: float = 0.01
    t_end: float = 100.0
    eps_neg: float = 1e-12

    def __post_init__(self):
        if self.h <= 0:
            raise ValueError(f"step must be > 0, got h={self.h}")
        if self.t_end <= 0:
            raise ValueError(f"horizon must be > 0, got t_end={self.t_end}")
        if self.h > self.t_end:
            raise ValueError(f"step h={self.h} exceeds horizon t_end={self.t_end}")
        if self.eps_neg < 0:
            raise ValueError(f"clamp threshold must be >= 0, got {self.eps_neg}")


@dataclass
class Trajectory:
    """Dense numeric solution on [0, t_end] plus its initial history."""

    grid: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    history: HistoryFunction
    net: ReactionNetwork
    clamp_count: int = 0

    @property
    def h(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def t_end(self) -> float:
        return float(self.grid[-1])

    def eval(self, t) -> np.ndarray:
        """State at time(s) t: history for t <= 0, cubic Hermite on each cell after.

        Scalar t gives shape (n,), an array of m times gives (n, m).
        """
        arr = np.atleast_1d(np.asarray(t, dtype=float))
        n = self.states.shape[1]
        out = np.empty((n, arr.size))
        past = arr <= 0.0
        if past.any():
            out[:, past] = self.history(arr[past])
        if (~past).any():
            u = arr[~past]
            if u.max() > self.t_end * (1 + 1e-12) + 1e-12:
                raise ValueError(f"time {u.max()} beyond trajectory end {self.t_end}")
            h0 = self.h
            cell = np.clip((u / h0).astype(int), 0, self.grid.size - 2)
            th = u / h0 - cell
            out[:, ~past] = _hermite(
                self.states[cell].T,
                self.states[cell + 1].T,
                self.derivs[cell].T,
                self.derivs[cell + 1].T,
                th,
                h0,
            )
        return out if np.asarray(t).ndim else out[:, 0]

    def segment(self, t: float) -> "SegmentView":
        return SegmentView(self, float(t))


@dataclass
class SegmentView:
    """The trailing window of a trajectory at time t, as a function of s <= 0."""

    traj: Trajectory
    t: float

    def __call__(self, s) -> np.ndarray:
        return self.traj.eval(self.t + np.asarray(s, dtype=float))

    @property
    def tau(self) -> float:
        return self.traj.net.max_delay


def _hermite(x0, x1, f0, f1, th, h0):
    """Cubic Hermite on the unit cell; th may exceed 1 when extrapolating."""
    t2 = th * th
    t3 = t2 * th
    return (
        x0 * (2 * t3 - 3 * t2 + 1)
        + x1 * (-2 * t3 + 3 * t2)
        + f0 * (h0 * (t3 - 2 * t2 + th))
        + f1 * (h0 * (t3 - t2))
    )


class _StageQuad:
    """Quadrature nodes of one distributed kernel for one RK stage fraction.

    A node's absolute time during the step from t_i is t_i + c*h0 + s.  It
    is classified once, here, by where it falls: on an archive grid point
    (weight into ``gw``, cell offset in ``gi``), on a cell half-point
    (``hw``/``hi``), at some other past time (``s_odd``, evaluated
    generically), strictly inside the incomplete step (``s_tip``,
    Hermite-extrapolated), or exactly at the stage time (``w_now``, the
    stage state itself).  Grid and half-point values are served from
    rolling per-kernel caches of the source monomial, which is what makes
    the integrator's cost per step flat in the window length.
    """

    __slots__ = ("gi", "gw", "hi", "hw", "s_odd", "w_odd", "s_tip", "w_tip", "w_now")

    def __init__(self, s_nodes, weights, c, h0):
        tol = 1e-9 * h0
        gi, gw, hi, hw, odd, wodd, tip, wtip = [], [], [], [], [], [], [], []
        self.w_now = 0.0
        for s, w in zip(s_nodes, weights):
            if s > -tol:
                self.w_now += float(w)
                continue
            u_off = s + c * h0  # position relative to the last accepted time
            if u_off > tol:
                tip.append(s)
                wtip.append(w)
                continue
            r = u_off / h0
            if abs(r - round(r)) < 1e-6:
                gi.append(int(round(r)))
                gw.append(w)
            elif abs(r - 0.5 - round(r - 0.5)) < 1e-6:
                hi.append(int(round(r - 0.5)))
                hw.append(w)
            else:
                odd.append(s)
                wodd.append(w)
        self.gi = np.asarray(gi, dtype=np.intp)
        self.gw = np.asarray(gw)
        self.hi = np.asarray(hi, dtype=np.intp)
        self.hw = np.asarray(hw)
        self.s_odd = np.asarray(odd)
        self.w_odd = np.asarray(wodd)
        self.s_tip = np.asarray(tip)
        self.w_tip = np.asarray(wtip)


class _Integrator:
    def __init__(self, net: ReactionNetwork, history: HistoryFunction, cfg: SimConfig):
        if history.n != net.n:
            raise NetworkValidationError(
                f"history has {history.n} components for {net.n} species"
            )
        tau = net.max_delay
        if history.tau + 1e-12 < tau:
            raise NetworkValidationError(
                f"history window {history.tau} does not cover the delay span {tau}"
            )
        if tau > 0 and cfg.h > tau / 4 + 1e-12:
            raise ValueError(f"step h={cfg.h} must be <= tau/4 = {tau / 4}")

        self.net = net
        self.cfg = cfg
        self.history = history
        n_steps = max(1, math.ceil(cfg.t_end / cfg.h - 1e-9))
        self.h0 = cfg.t_end / n_steps
        self.n_steps = n_steps
        self.grid = np.linspace(0.0, cfg.t_end, n_steps + 1)
        self.states = np.zeros((n_steps + 1, net.n))
        self.derivs = np.zeros((n_steps + 1, net.n))
        self.i_cur = 0
        self.clamp_count = 0

        self.rates = net.rates()
        self.yprod_t = net.product_matrix().T.astype(float)
        self.ysrc_t = net.source_matrix().T.astype(float)
        self.src_pow = [complex_powers(rxn.source) for rxn in net.reactions]
        # flat exponent arrays: one ufunc call computes all stage monomials
        self._flat_rxn = np.concatenate(
            [np.full(idx.size, k) for k, (idx, _) in enumerate(self.src_pow)]
            or [np.empty(0, int)]
        ).astype(int)
        self._flat_sp = np.concatenate(
            [idx for idx, _ in self.src_pow] or [np.empty(0, int)]
        ).astype(int)
        self._flat_ex = np.concatenate(
            [ex for _, ex in self.src_pow] or [np.empty(0)]
        )

        # per-reaction delayed-source plan: ("zero",) | ("point", tau) |
        # ("dist", {stage fraction c: _StageQuad}, grid cache, half cache)
        self.plans = []
        self._pre = pre = int(math.ceil(tau / self.h0 + 1e-9)) + 2
        grid_past = -self.h0 * np.arange(pre, -1, -1)  # t_{-pre} .. t_0
        half_past = grid_past[:-1] + self.h0 / 2
        hist_grid = history(np.minimum(grid_past, 0.0))
        hist_half = history(half_past)
        for rxn in net.reactions:
            k = rxn.kernel
            if k.is_point:
                self.plans.append(("zero",) if k.delay == 0 else ("point", k.delay))
                continue
            lo, hi = k.support
            quads = {}
            for offset, fracs in ((0.0, (0.0, 1.0)), (self.h0 / 2, (0.5,))):
                bounds = aligned_bounds(
                    lo, hi, self.h0, phase=-offset, force=k.breakpoints
                )
                nodes, weights = simpson_weights(bounds, density=k.density)
                for c in fracs:
                    quads[c] = _StageQuad(nodes, weights, c, self.h0)
            idx, ex = complex_powers(rxn.source)
            phi_g = np.zeros(pre + n_steps + 1)
            phi_h = np.zeros(pre + n_steps)
            phi_g[: pre + 1] = monomial_cols(hist_grid, idx, ex)
            phi_h[:pre] = monomial_cols(hist_half, idx, ex)
            self.plans.append(("dist", quads, phi_g, phi_h))
        self._have_dist = any(p[0] == "dist" for p in self.plans)

    def _stage_monomials(self, x: np.ndarray) -> np.ndarray:
        prods = np.ones(len(self.plans))
        if self._flat_sp.size:
            np.multiply.at(prods, self._flat_rxn, x[self._flat_sp] ** self._flat_ex)
        return prods

    def _eval_archive(self, u: np.ndarray) -> np.ndarray:
        """States at times u <= current accepted time (history before 0)."""
        out = np.empty((self.net.n, u.size))
        past = u <= 0.0
        if past.any():
            out[:, past] = self.history(u[past])
        live = ~past
        if live.any():
            v = u[live]
            cell = np.clip((v / self.h0).astype(int), 0, max(self.i_cur - 1, 0))
            th = v / self.h0 - cell
            out[:, live] = _hermite(
                self.states[cell].T,
                self.states[cell + 1].T,
                self.derivs[cell].T,
                self.derivs[cell + 1].T,
                th,
                self.h0,
            )
        return out

    def _extrapolate(self, u: np.ndarray) -> np.ndarray:
        """States inside the incomplete step, from the last accepted cell."""
        i = self.i_cur
        if i == 0:
            return self.states[0][:, None] + u[None, :] * self.derivs[0][:, None]
        th = u / self.h0 - (i - 1)
        return _hermite(
            self.states[i - 1][:, None],
            self.states[i][:, None],
            self.derivs[i - 1][:, None],
            self.derivs[i][:, None],
            th,
            self.h0,
        )

    def _point_value(self, u: float) -> np.ndarray:
        t_cur = self.i_cur * self.h0
        arr = np.array([u])
        if u <= t_cur + 1e-9 * self.h0:
            return self._eval_archive(arr)[:, 0]
        return self._extrapolate(arr)[:, 0]

    def field(self, t_stage: float, c: float, x_stage: np.ndarray) -> np.ndarray:
        prods = self._stage_monomials(x_stage)
        inflow = prods.copy()
        base = self._pre + self.i_cur
        for k, plan in enumerate(self.plans):
            if plan[0] == "zero":
                continue
            idx, ex = self.src_pow[k]
            if plan[0] == "point":
                inflow[k] = monomial_at(self._point_value(t_stage - plan[1]), idx, ex)
                continue
            _, quads, phi_g, phi_h = plan
            quad: _StageQuad = quads[c]
            acc = quad.gw @ phi_g[base + quad.gi] + quad.hw @ phi_h[base + quad.hi]
            if quad.s_odd.size:
                x_at = self._eval_archive(t_stage + quad.s_odd)
                acc += quad.w_odd @ monomial_cols(x_at, idx, ex)
            if quad.s_tip.size:
                x_at = self._extrapolate(t_stage + quad.s_tip)
                acc += quad.w_tip @ monomial_cols(x_at, idx, ex)
            if quad.w_now:
                acc += quad.w_now * prods[k]
            inflow[k] = acc
        return self.yprod_t @ (self.rates * inflow) - self.ysrc_t @ (self.rates * prods)

    def run(self) -> Trajectory:
        h0 = self.h0
        self.states[0] = self.history(0.0)
        self.derivs[0] = self.field(0.0, 0.0, self.states[0])
        # blow-ups surface as IntegrationError, not as overflow warnings
        with np.errstate(over="ignore", invalid="ignore"):
            for i in range(self.n_steps):
                t = self.grid[i]
                x0 = self.states[i]
                k1 = self.derivs[i]
                k2 = self.field(t + h0 / 2, 0.5, x0 + (h0 / 2) * k1)
                k3 = self.field(t + h0 / 2, 0.5, x0 + (h0 / 2) * k2)
                k4 = self.field(t + h0, 1.0, x0 + h0 * k3)
                xn = x0 + (h0 / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
                t_new = self.grid[i + 1]
                if not np.all(np.isfinite(xn)):
                    raise IntegrationError("state is not finite", time=float(t_new))
                if np.any(xn < -self.cfg.eps_neg):
                    worst = float(xn.min())
                    raise IntegrationError(
                        f"state component {worst} below -{self.cfg.eps_neg}",
                        time=float(t_new),
                    )
                neg = xn < 0.0
                if neg.any():
                    self.clamp_count += int(neg.sum())
                    xn = np.where(neg, 0.0, xn)
                self.states[i + 1] = xn
                # derivative at the accepted point, evaluated exactly like a stage
                # (tip nodes extrapolated); it becomes k1 of the next step
                self.derivs[i + 1] = self.field(t_new, 1.0, xn)
                if self._have_dist:
                    x_mid = _hermite(
                        x0, xn, self.derivs[i], self.derivs[i + 1], 0.5, h0
                    )
                    for k, plan in enumerate(self.plans):
                        if plan[0] == "dist":
                            idx, ex = self.src_pow[k]
                            plan[2][self._pre + i + 1] = monomial_at(xn, idx, ex)
                            plan[3][self._pre + i] = monomial_at(x_mid, idx, ex)
                self.i_cur = i + 1
        return Trajectory(
            grid=self.grid,
            states=self.states,
            derivs=self.derivs,
            history=self.history,
            net=self.net,
            clamp_count=self.clamp_count,
        )


def simulate(net: ReactionNetwork, history: HistoryFunction, cfg: SimConfig) -> Trajectory:
    """Integrate the delayed dynamics from the given initial history."""
    return _Integrator(net, history, cfg).run()


def rhs(net: ReactionNetwork, segment, panel_width: float | None = None) -> np.ndarray:
    """Field value for the state whose trailing window is ``segment``.

    ``segment`` is any callable of s on [-tau, 0] (a HistoryFunction, a
    Trajectory SegmentView, or a plain function) returning the state
    vector(s).  Distributed kernels are integrated with composite Simpson;
    ``panel_width`` defaults to support/64 per kernel.
    """
    x_now = np.asarray(segment(0.0), dtype=float)
    rates = net.rates()
    inflow = np.empty(net.r)
    outflow = np.empty(net.r)
    for k, rxn in enumerate(net.reactions):
        idx, ex = complex_powers(rxn.source)
        outflow[k] = monomial_at(x_now, idx, ex)
        kern = rxn.kernel
        if kern.is_point:
            if kern.delay == 0:
                inflow[k] = outflow[k]
            else:
                inflow[k] = monomial_at(
                    np.asarray(segment(-kern.delay), dtype=float), idx, ex
                )
            continue
        lo, hi = kern.support
        width = panel_width if panel_width else (hi - lo) / 64
        bounds = aligned_bounds(lo, hi, width, force=kern.breakpoints)
        nodes, weights = simpson_weights(bounds, density=kern.density)
        x_at = np.asarray(segment(nodes), dtype=float)
        inflow[k] = weights @ monomial_cols(x_at, idx, ex)
    yprod_t = net.product_matrix().T.astype(float)
    ysrc_t = net.source_matrix().T.astype(float)
    return yprod_t @ (rates * inflow) - ysrc_t @ (rates * outflow)


def simulate_ode(net: ReactionNetwork, x0, cfg: SimConfig) -> Trajectory:
    """Plain fixed-step RK4 for a delay-free network (independent of simulate)."""
    for rxn in net.reactions:
        if not (rxn.kernel.is_point and rxn.kernel.delay == 0):
            raise NetworkValidationError("simulate_ode requires a delay-free network")
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (net.n,):
        raise NetworkValidationError(f"initial state must have length {net.n}")
    if np.any(x0 < 0):
        raise NetworkValidationError("initial state must be non-negative")

    stoich = (net.product_matrix() - net.source_matrix()).T.astype(float)
    rates = net.rates()
    powers = [complex_powers(rxn.source) for rxn in net.reactions]
    flat_rxn = np.concatenate(
        [np.full(idx.size, k) for k, (idx, _) in enumerate(powers)] or [np.empty(0, int)]
    ).astype(int)
    flat_sp = np.concatenate([idx for idx, _ in powers] or [np.empty(0, int)]).astype(int)
    flat_ex = np.concatenate([ex for _, ex in powers] or [np.empty(0)])

    def field(x: np.ndarray) -> np.ndarray:
        prods = np.ones(net.r)
        if flat_sp.size:
            np.multiply.at(prods, flat_rxn, x[flat_sp] ** flat_ex)
        return stoich @ (rates * prods)

    n_steps = max(1, math.ceil(cfg.t_end / cfg.h - 1e-9))
    h0 = cfg.t_end / n_steps
    grid = np.linspace(0.0, cfg.t_end, n_steps + 1)
    states = np.zeros((n_steps + 1, net.n))
    derivs = np.zeros((n_steps + 1, net.n))
    states[0] = x0
    derivs[0] = field(x0)
    clamps = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n_steps):
            x = states[i]
            k1 = derivs[i]
            k2 = field(x + (h0 / 2) * k1)
            k3 = field(x + (h0 / 2) * k2)
            k4 = field(x + h0 * k3)
            xn = x + (h0 / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(xn)):
                raise IntegrationError("state is not finite", time=float(grid[i + 1]))
            if np.any(xn < -cfg.eps_neg):
                raise IntegrationError(
                    f"state component {float(xn.min())} below -{cfg.eps_neg}",
                    time=float(grid[i + 1]),
                )
            neg = xn < 0.0
            if neg.any():
                clamps += int(neg.sum())
                xn = np.where(neg, 0.0, xn)
            states[i + 1] = xn
            derivs[i + 1] = field(xn)
    return Trajectory(
        grid=grid,
        states=states,
        derivs=derivs,
        history=HistoryFunction.constant(x0, tau=0.0),
        net=net,
        clamp_count=clamps,
    )


def _require_point_mass(net: ReactionNetwork):
    for rxn in net.reactions:
        if not rxn.kernel.is_point:
            raise NetworkValidationError(
                "chain expansion requires constant (point-mass) delays only"
            )


def expand_chain(net: ReactionNetwork, n_stages: int) -> ReactionNetwork:
    """Replace each delayed reaction by a chain of n_stages fast intermediates.

    A reaction y -> y' with rate kappa and delay tau becomes
    y ->(kappa) z_1 ->(N/tau) ... ->(N/tau) z_N ->(N/tau) y'.
    Zero-delay reactions are copied unchanged.
    """
    _require_point_mass(net)
    if n_stages < 1:
        raise NetworkValidationError(f"chain length must be >= 1, got {n_stages}")
    delayed = [k for k, rxn in enumerate(net.reactions) if rxn.kernel.delay > 0]
    if not delayed:
        return net

    names = list(net.species_names)
    taken = set(names)
    z_index: dict[tuple[int, int], int] = {}
    for k in delayed:
        for j in range(1, n_stages + 1):
            name = f"z{k + 1}_{j}"
            while name in taken:
                name = "_" + name
            taken.add(name)
            z_index[(k, j)] = len(names)
            names.append(name)
    total = len(names)
    species = tuple(SpeciesId(i, nm) for i, nm in enumerate(names))

    def widen(c: Complex) -> Complex:
        return Complex(tuple(c.coeffs) + (0,) * (total - net.n))

    def unit(i: int) -> Complex:
        return Complex(tuple(1 if j == i else 0 for j in range(total)))

    reactions = []
    for k, rxn in enumerate(net.reactions):
        if rxn.kernel.delay == 0:
            reactions.append(Reaction(widen(rxn.source), widen(rxn.product), rxn.rate))
            continue
        fast = n_stages / rxn.kernel.delay
        reactions.append(Reaction(widen(rxn.source), unit(z_index[(k, 1)]), rxn.rate))
        for j in range(1, n_stages):
            reactions.append(
                Reaction(unit(z_index[(k, j)]), unit(z_index[(k, j + 1)]), fast)
            )
        reactions.append(Reaction(unit(z_index[(k, n_stages)]), widen(rxn.product), fast))
    return ReactionNetwork(species=species, reactions=tuple(reactions))


def chain_initial_state(
    net: ReactionNetwork, history: HistoryFunction, n_stages: int
) -> np.ndarray:
    """Initial state for the expanded chain: head x = theta(0), stage masses
    z_kj = kappa_k (tau_k/N) theta(-j tau_k/N)**y_k."""
    _require_point_mass(net)
    if n_stages < 1:
        raise NetworkValidationError(f"chain length must be >= 1, got {n_stages}")
    parts = [np.asarray(history(0.0), dtype=float)]
    for rxn in net.reactions:
        tau = rxn.kernel.delay
        if tau == 0:
            continue
        s = -tau * np.arange(1, n_stages + 1) / n_stages
        idx, ex = complex_powers(rxn.source)
        parts.append(rxn.rate * (tau / n_stages) * monomial_cols(history(s), idx, ex))
    return np.concatenate(parts)
