"""Equilibrium location: complex-balance detection, a balanced representative
from the Matrix-Tree construction, and the in-class point by damped Newton in
exponential coordinates.

Delays never move equilibria: a constant trajectory satisfies the delayed
field iff it satisfies the undelayed one, so everything here works on the
plain mass-action vector field.  Delay kernels only enter through the class
key of the constant history (first-moment correction in h).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, NotComplexBalancedError, NotWeaklyReversibleError
from .functionals import ClassKey, h_constant
from .network import ReactionNetwork, complex_powers, monomial_at
from .structure import StoichInfo, analyze_structure, complex_graph

__all__ = [
    "EquilibriumResult",
    "check_complex_balance",
    "find_complex_balanced_equilibrium",
    "in_class_equilibrium",
]


@dataclass(frozen=True)
class EquilibriumResult:
    """A strictly positive equilibrium with its balance certificate."""

    point: np.ndarray
    complex_balanced: bool
    residual: float
    class_key: ClassKey


def check_complex_balance(net: ReactionNetwork, x, tol: float = 1e-10):
    """Test inflow == outflow at every complex; returns (balanced, residual).

    The residual is the largest per-complex imbalance relative to the
    largest single reaction flow, so ``residual <= tol`` is scale-free.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0) or not np.all(np.isfinite(x)):
        raise ValueError(f"complex balance needs strictly positive x, got {x}")
    cg = complex_graph(net)
    net_flow = np.zeros(cg.n_nodes)
    scale = 0.0
    for rxn, (src, dst, rate) in zip(net.reactions, cg.edges):
        flow = rate * monomial_at(x, *complex_powers(rxn.source))
        net_flow[src] -= flow
        net_flow[dst] += flow
        scale = max(scale, flow)
    residual = float(np.max(np.abs(net_flow)) / scale)
    return residual <= tol, residual


def _matrix_tree_weights(nodes, edges):
    """Positive kernel vector of the flow balance on one strongly
    connected component, by the all-minors Matrix-Tree theorem.

    L[a, a] holds the out-rate of a and L[a, b] = -rate(b -> a), so
    L rho = 0 says inflow equals outflow at every node when node b
    carries weight rho_b.  rho_b is the principal minor of L at b.
    """
    m = len(nodes)
    pos = {node: i for i, node in enumerate(nodes)}
    lap = np.zeros((m, m))
    for src, dst, rate in edges:
        if src in pos and dst in pos:
            lap[pos[src], pos[src]] += rate
            lap[pos[dst], pos[src]] -= rate
    rho = np.empty(m)
    for i in range(m):
        keep = [j for j in range(m) if j != i]
        rho[i] = np.linalg.det(lap[np.ix_(keep, keep)]) if keep else 1.0
    top = rho.max()
    if top <= 0.0 or np.any(rho <= 0.0):
        raise NotComplexBalancedError(
            "linkage class is not strongly connected at positive weight",
            residual=float(np.min(rho)),
        )
    return rho / top


def find_complex_balanced_equilibrium(
    net: ReactionNetwork,
    stoich: StoichInfo | None = None,
    tol: float = 1e-10,
) -> EquilibriumResult:
    """A strictly positive complex-balanced equilibrium, if one exists.

    Per linkage class, Matrix-Tree weights rho give the unique balanced
    flow pattern; solving y_eta . ln x = ln rho_eta + mu_class in least
    squares then realizes the pattern as a state iff the network is
    complex balanced.  The minimum-norm solution fixes the representative.
    """
    if stoich is None:
        stoich = analyze_structure(net)
    if not stoich.weakly_reversible:
        raise NotWeaklyReversibleError(
            "network is not weakly reversible; no complex-balanced equilibrium"
        )
    cg = complex_graph(net)
    n = len(net.species)
    n_classes = len(stoich.linkage_classes)

    rows, rhs = [], []
    for lidx, members in enumerate(stoich.linkage_classes):
        rho = _matrix_tree_weights(members, cg.edges)
        for node, weight in zip(members, rho):
            row = np.zeros(n + n_classes)
            row[:n] = np.asarray(cg.complexes[node].coeffs, dtype=float)
            row[n + lidx] = -1.0
            rows.append(row)
            rhs.append(np.log(weight))
    mat = np.vstack(rows)
    vec = np.asarray(rhs)
    sol, *_ = np.linalg.lstsq(mat, vec, rcond=None)
    log_residual = float(np.max(np.abs(mat @ sol - vec)))
    if log_residual > 1e-8:
        raise NotComplexBalancedError(
            "no state realizes the balanced flow pattern", residual=log_residual
        )
    x = np.exp(sol[:n])
    balanced, residual = check_complex_balance(net, x, tol=tol)
    if not balanced:
        raise NotComplexBalancedError(
            "candidate equilibrium fails complex balance", residual=residual
        )
    key = ClassKey(tuple(float(v) for v in stoich.conservation_matrix() @ h_constant(net, x)))
    return EquilibriumResult(point=x, complex_balanced=True, residual=residual, class_key=key)


def in_class_equilibrium(
    net: ReactionNetwork,
    x_ref,
    key: ClassKey,
    stoich: StoichInfo | None = None,
    tol: float = 1e-10,
    max_iter: int = 80,
    diagnostics: dict | None = None,
) -> np.ndarray:
    """The unique equilibrium in the compatibility class with the given key.

    Searches x(c) = x_ref * exp(B^T c) over coefficients c of the
    conservation basis B — every such point is an equilibrium whenever
    x_ref is complex balanced — and solves B h(x(c)) = key by damped
    Newton.  The system is the gradient of a strictly convex function,
    so halving the step until the residual drops always makes progress;
    hitting the damping floor means the key is infeasible.
    """
    if stoich is None:
        stoich = analyze_structure(net)
    x_ref = np.asarray(x_ref, dtype=float)
    basis = stoich.conservation_matrix()
    d = basis.shape[0]
    if len(key.values) != d:
        raise ValueError(f"key has {len(key.values)} values, class space has {d}")
    if d == 0:
        return x_ref.copy()
    target = np.asarray(key.values, dtype=float)
    scale = np.maximum(np.abs(target), 1.0)

    moments = np.array([rxn.rate * rxn.kernel.first_moment() for rxn in net.reactions])
    powers = [complex_powers(rxn.source) for rxn in net.reactions]
    sources = net.source_matrix().astype(float)

    def point(c):
        with np.errstate(over="ignore"):
            return x_ref * np.exp(basis.T @ c)

    def residual_vec(x):
        return basis @ h_constant(net, x) - target

    c = np.zeros(d)
    x = x_ref.copy()
    f = residual_vec(x)
    res = float(np.max(np.abs(f) / scale))
    iterations = 0
    for _ in range(max_iter):
        if res <= tol:
            break
        jac = basis @ (x[:, None] * basis.T)
        for j, (idx, ex) in enumerate(powers):
            if moments[j] == 0.0:
                continue
            mono = moments[j] * monomial_at(x, idx, ex)
            jac += mono * np.outer(basis @ sources[j], sources[j] @ basis.T)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            raise ConvergenceError("singular Newton system", residual=res)
        alpha = 1.0
        norm0 = float(np.linalg.norm(f))
        while alpha >= 2.0**-20:
            c_try = c + alpha * step
            x_try = point(c_try)
            if np.all(np.isfinite(x_try)) and np.all(x_try > 0.0):
                f_try = residual_vec(x_try)
                if float(np.linalg.norm(f_try)) < norm0:
                    c, x, f = c_try, x_try, f_try
                    break
            alpha *= 0.5
        else:
            raise ConvergenceError(
                "Newton stalled at the damping floor; is the requested key attainable?",
                residual=res,
            )
        res = float(np.max(np.abs(f) / scale))
        iterations += 1
    if diagnostics is not None:
        diagnostics["iterations"] = iterations
        diagnostics["residual"] = res
    if res > tol:
        raise ConvergenceError(
            f"no convergence after {max_iter} iterations", residual=res
        )
    return x
