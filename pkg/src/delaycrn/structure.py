"""Delay-independent structural analysis of a reaction network.

Computes the stoichiometric matrix and its rank, an exact integer basis of
the orthogonal complement of the stoichiometric subspace, the deduplicated
complex digraph with its linkage classes, weak reversibility, and the
deficiency.  Everything here ignores delay kernels: these properties depend
only on complexes and which reactions exist.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from .network import Complex, ReactionNetwork

__all__ = ["ComplexGraph", "StoichInfo", "complex_graph", "analyze_structure"]


@dataclass(frozen=True)
class ComplexGraph:
    """Directed multigraph whose nodes are the distinct complexes.

    ``complexes`` lists the deduplicated complexes in first-appearance
    order; ``edges`` holds one ``(source_node, target_node, rate)`` triple
    per reaction, in reaction order.  Parallel edges are preserved.
    """

    complexes: tuple[Complex, ...]
    edges: tuple[tuple[int, int, float], ...]

    @property
    def n_nodes(self) -> int:
        return len(self.complexes)

    def successors(self, node: int) -> list[int]:
        return [dst for src, dst, _ in self.edges if src == node]


@dataclass(frozen=True)
class StoichInfo:
    """Structural summary of a network.

    ``stoich_matrix`` is n x r with columns ``product - source``;
    ``ortho_basis`` spans its left null space with integer entries
    (gcd 1, positive leading coefficient).  ``linkage_classes`` partitions
    node indices of the deduplicated complex list.
    """

    stoich_matrix: np.ndarray
    rank: int
    ortho_basis: tuple[tuple[int, ...], ...]
    complexes: tuple[Complex, ...]
    linkage_classes: tuple[tuple[int, ...], ...]
    weakly_reversible: bool
    deficiency: int

    def conservation_matrix(self) -> np.ndarray:
        """Basis vectors as a float matrix, one per row (shape (n-s, n))."""
        n = self.stoich_matrix.shape[0]
        return np.array(self.ortho_basis, dtype=float).reshape(-1, n)


def complex_graph(net: ReactionNetwork) -> ComplexGraph:
    """Deduplicate complexes and record one edge per reaction."""
    nodes: list[Complex] = []
    index: dict[tuple[int, ...], int] = {}

    def node_of(c: Complex) -> int:
        key = c.coeffs
        if key not in index:
            index[key] = len(nodes)
            nodes.append(c)
        return index[key]

    edges = tuple(
        (node_of(rxn.source), node_of(rxn.product), rxn.rate) for rxn in net.reactions
    )
    return ComplexGraph(tuple(nodes), edges)


def _integer_nullspace(rows: list[tuple[int, ...]], n: int) -> list[tuple[int, ...]]:
    """Nullspace basis of the matrix with the given integer rows.

    Gaussian elimination over exact rationals; each free column yields one
    basis vector, scaled to integer entries with gcd 1 and positive leading
    coefficient.  Returns the vectors in increasing free-column order.
    """
    mat = [[Fraction(v) for v in row] for row in rows]
    pivot_cols: list[int] = []
    pr = 0  # pivot row
    for col in range(n):
        pivot = next((i for i in range(pr, len(mat)) if mat[i][col] != 0), None)
        if pivot is None:
            continue
        mat[pr], mat[pivot] = mat[pivot], mat[pr]
        inv = mat[pr][col]
        mat[pr] = [v / inv for v in mat[pr]]
        for i in range(len(mat)):
            if i != pr and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[pr])]
        pivot_cols.append(col)
        pr += 1
        if pr == len(mat):
            break

    basis: list[tuple[int, ...]] = []
    free_cols = [c for c in range(n) if c not in pivot_cols]
    for fc in free_cols:
        vec = [Fraction(0)] * n
        vec[fc] = Fraction(1)
        for row, pc in zip(mat, pivot_cols):
            vec[pc] = -row[fc]
        scale = 1
        for v in vec:
            scale = scale * v.denominator // gcd(scale, v.denominator)
        ints = [int(v * scale) for v in vec]
        g = 0
        for v in ints:
            g = gcd(g, abs(v))
        ints = [v // g for v in ints]
        lead = next(v for v in ints if v != 0)
        if lead < 0:
            ints = [-v for v in ints]
        basis.append(tuple(ints))
    return basis


def _strong_components(n_nodes: int, adj: list[list[int]]) -> list[int]:
    """Tarjan's algorithm, iterative; returns component id per node."""
    index = [-1] * n_nodes
    low = [0] * n_nodes
    on_stack = [False] * n_nodes
    stack: list[int] = []
    comp = [-1] * n_nodes
    counter = 0
    n_comp = 0
    for root in range(n_nodes):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            node, ei = work.pop()
            if ei == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack[node] = True
            recurse = False
            for j in range(ei, len(adj[node])):
                nxt = adj[node][j]
                if index[nxt] == -1:
                    work.append((node, j + 1))
                    work.append((nxt, 0))
                    recurse = True
                    break
                if on_stack[nxt]:
                    low[node] = min(low[node], index[nxt])
            if recurse:
                continue
            if low[node] == index[node]:
                while True:
                    top = stack.pop()
                    on_stack[top] = False
                    comp[top] = n_comp
                    if top == node:
                        break
                n_comp += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    return comp


def _weak_components(n_nodes: int, adj_undirected: list[set[int]]) -> list[tuple[int, ...]]:
    seen = [False] * n_nodes
    classes: list[tuple[int, ...]] = []
    for start in range(n_nodes):
        if seen[start]:
            continue
        members = []
        frontier = [start]
        seen[start] = True
        while frontier:
            node = frontier.pop()
            members.append(node)
            for nxt in adj_undirected[node]:
                if not seen[nxt]:
                    seen[nxt] = True
                    frontier.append(nxt)
        classes.append(tuple(sorted(members)))
    return classes


def analyze_structure(net: ReactionNetwork) -> StoichInfo:
    """Stoichiometric subspace, linkage classes, weak reversibility, deficiency."""
    n = net.n
    reaction_vectors = [
        tuple(int(p - s) for s, p in zip(rxn.source.coeffs, rxn.product.coeffs))
        for rxn in net.reactions
    ]
    stoich = np.array(reaction_vectors, dtype=np.int64).T.reshape(n, net.r)

    basis = _integer_nullspace(reaction_vectors, n)
    rank = n - len(basis)

    graph = complex_graph(net)
    m = graph.n_nodes
    adj: list[list[int]] = [[] for _ in range(m)]
    undirected: list[set[int]] = [set() for _ in range(m)]
    for src, dst, _ in graph.edges:
        adj[src].append(dst)
        undirected[src].add(dst)
        undirected[dst].add(src)

    linkage = _weak_components(m, undirected)
    comp = _strong_components(m, adj)
    # weakly reversible <=> every linkage class lies in a single SCC
    weakly_reversible = all(len({comp[v] for v in cls}) == 1 for cls in linkage)

    deficiency = m - len(linkage) - rank
    return StoichInfo(
        stoich_matrix=stoich,
        rank=rank,
        ortho_basis=tuple(basis),
        complexes=graph.complexes,
        linkage_classes=tuple(linkage),
        weakly_reversible=weakly_reversible,
        deficiency=deficiency,
    )
