"""Reaction-network data model.

A network is a list of named species plus mass-action reactions between
integer-coefficient complexes. Every reaction carries a rate constant and a
delay kernel; the network's ``max_delay`` is the largest kernel support
bound. All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .errors import NetworkValidationError
from .kernels import NO_DELAY, DelayKernel, PointMassKernel


@dataclass(frozen=True)
class SpeciesId:
    index: int
    name: str


@dataclass(frozen=True)
class Complex:
    """Integer stoichiometric coefficients of one reaction side."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if any(c < 0 for c in self.coeffs):
            raise NetworkValidationError(f"complex coefficients must be >= 0: {self.coeffs}")

    def as_array(self) -> np.ndarray:
        return np.array(self.coeffs, dtype=np.int64)

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def pretty(self, species_names: list[str] | tuple[str, ...]) -> str:
        terms = []
        for c, name in zip(self.coeffs, species_names):
            if c == 0:
                continue
            terms.append(name if c == 1 else f"{c} {name}")
        return " + ".join(terms) if terms else "0"


@dataclass(frozen=True)
class Reaction:
    """One mass-action reaction ``source -> product`` with rate and delay kernel."""

    source: Complex
    product: Complex
    rate: float
    kernel: DelayKernel = NO_DELAY

    def __post_init__(self):
        if self.rate <= 0:
            raise NetworkValidationError(f"rate constant must be > 0, got {self.rate}")
        if self.source == self.product:
            raise NetworkValidationError("reaction source and product complexes must differ")
        if len(self.source.coeffs) != len(self.product.coeffs):
            raise NetworkValidationError("source and product complexes have different lengths")

    @property
    def vector(self) -> np.ndarray:
        """Net stoichiometric change (product minus source)."""
        return self.product.as_array() - self.source.as_array()


@dataclass(frozen=True)
class ReactionNetwork:
    species: tuple[SpeciesId, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        names = [sp.name for sp in self.species]
        if len(set(names)) != len(names):
            raise NetworkValidationError("species names must be unique")
        for i, sp in enumerate(self.species):
            if sp.index != i:
                raise NetworkValidationError("species indices must match list positions")
        n = len(self.species)
        for rxn in self.reactions:
            if len(rxn.source.coeffs) != n:
                raise NetworkValidationError("reaction complex length does not match species count")

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def r(self) -> int:
        return len(self.reactions)

    @property
    def species_names(self) -> list[str]:
        return [sp.name for sp in self.species]

    @property
    def max_delay(self) -> float:
        return max((rxn.kernel.max_delay for rxn in self.reactions), default=0.0)

    def source_matrix(self) -> np.ndarray:
        """Source-complex exponents, shape (r, n)."""
        return np.array([rxn.source.coeffs for rxn in self.reactions], dtype=np.int64)

    def product_matrix(self) -> np.ndarray:
        return np.array([rxn.product.coeffs for rxn in self.reactions], dtype=np.int64)

    def rates(self) -> np.ndarray:
        return np.array([rxn.rate for rxn in self.reactions], dtype=float)

    def pretty(self) -> str:
        """Render back to the text format accepted by the parser."""
        names = self.species_names
        lines = ["species " + " ".join(names)]
        for rxn in self.reactions:
            lines.append(
                f"reaction {rxn.source.pretty(names)} -> {rxn.product.pretty(names)}"
                f" ; rate {rxn.rate!r} ; delay {rxn.kernel.pretty()}"
            )
        return "\n".join(lines) + "\n"

    def content_hash(self) -> str:
        """Deterministic digest of the network definition (kernels included)."""
        h = hashlib.sha256(self.pretty().encode())
        for rxn in self.reactions:
            k = rxn.kernel
            if not isinstance(k, PointMassKernel) and hasattr(k, "s_points"):
                h.update(repr((k.s_points, k.values)).encode())
        return h.hexdigest()


def complex_powers(c: Complex) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero exponents of a complex as (species index array, exponent array)."""
    idx = np.flatnonzero(np.asarray(c.coeffs) > 0)
    ex = np.asarray([c.coeffs[i] for i in idx], dtype=float)
    return idx, ex


def monomial_at(x: np.ndarray, idx: np.ndarray, ex: np.ndarray) -> float:
    """x**y for one state vector (empty exponent set means the zero complex, 1)."""
    if idx.size == 0:
        return 1.0
    return float(np.prod(x[idx] ** ex))


def monomial_cols(states: np.ndarray, idx: np.ndarray, ex: np.ndarray) -> np.ndarray:
    """x**y column-wise over states of shape (n, m) -> (m,)."""
    if idx.size == 0:
        return np.ones(states.shape[1])
    return np.prod(states[idx, :] ** ex[:, None], axis=0)
