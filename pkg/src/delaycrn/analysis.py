"""Long-run trajectory classification and verification studies.

The classifier is honest about finite-time observation: asymptotic
membership is inferred from a trailing window and the third verdict
(Undetermined) is a real outcome, not an error.  The studies wrap the
drift, projection-count, chain-approximation, and Lyapunov claims into
structured reports a front end can render or assert on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .engine import (
    SimConfig,
    Trajectory,
    chain_initial_state,
    expand_chain,
    rhs,
    simulate,
    simulate_ode,
)
from .errors import NotWeaklyReversibleError
from .functionals import ClassKey, class_key, h_constant, lyapunov_V, map_P
from .histories import HistoryFunction
from .network import ReactionNetwork
from .structure import StoichInfo, analyze_structure

__all__ = [
    "WindowWitness",
    "OmegaLimitVerdict",
    "classify_omega_limit",
    "ClassCountReport",
    "verify_class_count",
    "ChainRunRow",
    "WrExistenceReport",
    "verify_wr_existence",
    "ChainErrorRow",
    "ChainStudy",
    "chain_convergence_study",
]

EPS_EQ = 1e-4
EPS_BD = 1e-6


@dataclass(frozen=True)
class WindowWitness:
    """Summary of the trailing window backing a verdict."""

    species_min: np.ndarray
    species_max: np.ndarray
    distance: float
    lyapunov: float


@dataclass(frozen=True)
class OmegaLimitVerdict:
    kind: str  # PositiveEquilibrium | Boundary | Undetermined
    witness: WindowWitness
    at_time: float


def classify_omega_limit(
    traj: Trajectory,
    x_bar_class,
    eps_eq: float = EPS_EQ,
    eps_bd: float = EPS_BD,
    window: float | None = None,
    at_time: float | None = None,
) -> OmegaLimitVerdict:
    """Classify where the trajectory is heading, from its trailing window.

    PositiveEquilibrium needs the whole window within ``eps_eq`` of the
    predicted in-class equilibrium and every species at least ``eps_bd``;
    Boundary needs some species below ``eps_bd`` throughout.  The two
    cannot both hold since ``eps_bd <= eps_eq`` separations are enforced
    by the threshold check.  Runs shorter than five windows are always
    Undetermined.
    """
    x_bar = np.asarray(x_bar_class, dtype=float)
    if window is None:
        window = traj.net.max_delay
    if eps_bd >= float(np.min(x_bar)):
        raise ValueError(
            f"boundary threshold {eps_bd} must lie below the predicted "
            f"equilibrium minimum {float(np.min(x_bar))}"
        )
    at = traj.t_end if at_time is None else float(at_time)
    if not 0.0 < at <= traj.t_end * (1 + 1e-12):
        raise ValueError(f"checkpoint {at} outside trajectory range (0, {traj.t_end}]")
    h0 = traj.h
    i_at = int(round(at / h0))
    at = float(traj.grid[i_at])
    i_lo = max(0, i_at - int(round(window / h0))) if window > 0 else i_at
    win = traj.states[i_lo : i_at + 1]
    distance = float(np.max(np.abs(win - x_bar)))
    witness = WindowWitness(
        species_min=win.min(axis=0),
        species_max=win.max(axis=0),
        distance=distance,
        lyapunov=lyapunov_V(traj.net, x_bar, traj.segment(at), panel_width=h0, phase=-at),
    )
    if traj.t_end < 5.0 * window:
        kind = "Undetermined"
    elif distance <= eps_eq and np.all(witness.species_min >= eps_bd):
        kind = "PositiveEquilibrium"
    elif np.any(witness.species_max < eps_bd):
        kind = "Boundary"
    else:
        kind = "Undetermined"
    return OmegaLimitVerdict(kind=kind, witness=witness, at_time=at)


@dataclass(frozen=True)
class ClassCountReport:
    """Grouping of history samples by conserved class key vs projection."""

    keys: tuple[ClassKey, ...]
    projections: tuple[tuple[float, ...], ...]
    key_groups: tuple[tuple[int, ...], ...]
    projection_groups: tuple[tuple[int, ...], ...]
    consistent: bool
    max_group_spread: float

    @property
    def distinct_keys(self) -> int:
        return len(self.key_groups)

    @property
    def distinct_projections(self) -> int:
        return len(self.projection_groups)


def _group_by(count, same):
    groups: list[list[int]] = []
    for i in range(count):
        for g in groups:
            if same(g[0], i):
                g.append(i)
                break
        else:
            groups.append([i])
    return tuple(tuple(g) for g in groups)


def verify_class_count(
    net: ReactionNetwork,
    samples,
    stoich: StoichInfo | None = None,
    panel_width: float | None = None,
) -> ClassCountReport:
    """Group samples by class key and check the delay-free projections agree.

    Each sample's key is v . h(theta) and its projection is h(theta)
    itself, so members of one key group must land in one projected class;
    the report records both partitions and their consistency.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("needs at least one history sample")
    if stoich is None:
        stoich = analyze_structure(net)
    basis = stoich.conservation_matrix()
    keys = [class_key(net, stoich, th, panel_width=panel_width) for th in samples]
    proj = [basis @ map_P(net, th, panel_width=panel_width) for th in samples]

    key_groups = _group_by(len(samples), lambda a, b: keys[a].matches(keys[b]))
    proj_groups = _group_by(
        len(samples),
        lambda a, b: ClassKey(tuple(proj[a])).matches(ClassKey(tuple(proj[b]))),
    )
    spread = 0.0
    for g in key_groups:
        for i in g[1:]:
            scale = np.maximum(np.abs(np.asarray(keys[g[0]].values)), 1e-12)
            if scale.size:
                spread = max(spread, float(np.max(np.abs(proj[i] - proj[g[0]]) / scale)))
    consistent = sorted(key_groups) == sorted(proj_groups)
    return ClassCountReport(
        keys=tuple(keys),
        projections=tuple(tuple(float(v) for v in p) for p in proj),
        key_groups=key_groups,
        projection_groups=proj_groups,
        consistent=consistent,
        max_group_spread=spread,
    )


@dataclass(frozen=True)
class ChainRunRow:
    n_stages: int
    x_bar: np.ndarray
    rhs_norm: float
    key_error: float


@dataclass(frozen=True)
class WrExistenceReport:
    rows: tuple[ChainRunRow, ...]
    theta_key: ClassKey
    key_errors_decreasing: bool
    converged: bool

    @property
    def x_bar(self) -> np.ndarray:
        return self.rows[-1].x_bar


def _min_positive_delay(net: ReactionNetwork) -> float:
    delays = [rxn.kernel.max_delay for rxn in net.reactions if rxn.kernel.max_delay > 0]
    return min(delays, default=0.0)


def _chain_step(base_h: float, tau_min: float, n_stages: int) -> float:
    # stage rate N/tau bounds the stiffness; keep h * N/tau <= 1
    return base_h if tau_min == 0.0 else min(base_h, tau_min / n_stages)


def verify_wr_existence(
    net: ReactionNetwork,
    theta: HistoryFunction,
    n_schedule=(8, 32, 128),
    cfg: SimConfig | None = None,
    stoich: StoichInfo | None = None,
) -> WrExistenceReport:
    """Realize a positive equilibrium of a constant-delay network by chain runs.

    For each N the delayed reactions are expanded into N-stage conversion
    chains, the chain ODE is integrated to stationarity from the state
    matching theta, and the head components are read off as x_bar(N).
    Each candidate is checked against the delayed field directly
    (rhs at the constant window) and against theta's class key, whose
    error must not grow along the schedule.
    """
    if stoich is None:
        stoich = analyze_structure(net)
    if not stoich.weakly_reversible:
        raise NotWeaklyReversibleError(
            "existence construction requires a weakly reversible network"
        )
    if cfg is None:
        cfg = SimConfig(h=0.01, t_end=200.0)
    basis = stoich.conservation_matrix()
    theta_key = class_key(net, stoich, theta)
    target = np.asarray(theta_key.values)
    scale = np.maximum(np.abs(target), 1.0)
    tau_min = _min_positive_delay(net)

    rows = []
    for n_stages in n_schedule:
        expanded = expand_chain(net, n_stages)
        z0 = chain_initial_state(net, theta, n_stages)
        run_cfg = SimConfig(
            h=_chain_step(cfg.h, tau_min, n_stages), t_end=cfg.t_end, eps_neg=cfg.eps_neg
        )
        run = simulate_ode(expanded, z0, run_cfg)
        x_bar = run.states[-1, : net.n].copy()
        field = rhs(net, HistoryFunction.constant(x_bar, tau=net.max_delay))
        key_vals = basis @ h_constant(net, x_bar)
        key_err = float(np.max(np.abs(key_vals - target) / scale)) if target.size else 0.0
        rows.append(
            ChainRunRow(
                n_stages=int(n_stages),
                x_bar=x_bar,
                rhs_norm=float(np.max(np.abs(field))),
                key_error=key_err,
            )
        )
    decreasing = all(
        cur.key_error <= max(prev.key_error * 1.05, 1e-9)
        for prev, cur in zip(rows, rows[1:])
    )
    converged = len(rows) < 2 or bool(
        np.max(np.abs(rows[-1].x_bar - rows[-2].x_bar)) <= 1e-3
    )
    return WrExistenceReport(
        rows=tuple(rows),
        theta_key=theta_key,
        key_errors_decreasing=decreasing,
        converged=converged,
    )


@dataclass(frozen=True)
class ChainErrorRow:
    n_stages: int
    error: float


@dataclass(frozen=True)
class ChainStudy:
    rows: tuple[ChainErrorRow, ...]
    t_end: float
    monotone_nonincreasing: bool


def chain_convergence_study(
    net: ReactionNetwork,
    theta: HistoryFunction,
    n_schedule=(8, 32, 128),
    cfg: SimConfig | None = None,
) -> ChainStudy:
    """Sup-norm gap between chain runs and the delayed reference trajectory.

    e_N = max over the reference grid of the largest per-species deviation
    of the N-stage chain solution (head components only).
    """
    if cfg is None:
        cfg = SimConfig(h=0.01, t_end=20.0)
    reference = simulate(net, theta, cfg)
    tau_min = _min_positive_delay(net)
    rows = []
    for n_stages in n_schedule:
        expanded = expand_chain(net, n_stages)
        z0 = chain_initial_state(net, theta, n_stages)
        run_cfg = SimConfig(
            h=_chain_step(cfg.h, tau_min, n_stages), t_end=cfg.t_end, eps_neg=cfg.eps_neg
        )
        run = simulate_ode(expanded, z0, run_cfg)
        diff = run.eval(reference.grid)[: net.n] - reference.states.T
        rows.append(ChainErrorRow(n_stages=int(n_stages), error=float(np.max(np.abs(diff)))))
    monotone = all(b.error <= a.error + 1e-14 for a, b in zip(rows, rows[1:]))
    return ChainStudy(rows=tuple(rows), t_end=cfg.t_end, monotone_nonincreasing=monotone)
