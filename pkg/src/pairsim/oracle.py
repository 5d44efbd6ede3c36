"""Brute-force spectra, gaps and propagators by dense diagonalization."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, ValidationError
from .model import (
    BLOCK_DIM_CAP,
    FULL_QUBIT_CAP,
    BlockIndex,
    PairingModel,
    block_hamiltonian,
    build_hp,
)

DENSE_DIM_CAP = max(1 << FULL_QUBIT_CAP, BLOCK_DIM_CAP)
DEGENERACY_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class EigenSystem:
    energies: np.ndarray
    vectors: np.ndarray
    block: BlockIndex | None = None

    @property
    def dim(self) -> int:
        return int(self.energies.size)

    def embedded_vectors(self) -> np.ndarray:
        """Eigenvectors as columns of the full ``2^N`` space (block case only)."""
        if self.block is None:
            return self.vectors
        full = np.zeros((1 << self.block.N, self.dim), dtype=complex)
        full[self.block.indices] = self.vectors
        return full


@dataclass(frozen=True)
class GapReport:
    n: int
    E_n0: float
    E_n1: float
    two_delta: float
    degeneracy_0: int


def _fix_phases(W: np.ndarray) -> np.ndarray:
    # largest-magnitude component of every column made real positive
    rows = np.argmax(np.abs(W), axis=0)
    piv = W[rows, np.arange(W.shape[1])]
    return W * (np.abs(piv) / piv)


def dense_eigensystem(H: np.ndarray, block: BlockIndex | None = None) -> EigenSystem:
    dim = H.shape[0]
    if dim > DENSE_DIM_CAP:
        raise CapExceededError(f"dense diagonalization of dimension {dim} refused (cap {DENSE_DIM_CAP})")
    E, W = np.linalg.eigh(H)
    return EigenSystem(energies=E, vectors=_fix_phases(W), block=block)


def full_eigensystem(model: PairingModel) -> EigenSystem:
    return dense_eigensystem(build_hp(model))


def block_eigensystem(model: PairingModel, n: int) -> EigenSystem:
    H, block = block_hamiltonian(model, n)
    return dense_eigensystem(H, block)


def degeneracy_tolerance(energies: np.ndarray) -> float:
    width = float(energies[-1] - energies[0]) if energies.size else 0.0
    return DEGENERACY_RTOL * max(width, 1e-300)


def distinct_levels(energies: np.ndarray) -> list[tuple[float, int]]:
    """Group sorted energies into ``(level, degeneracy)`` pairs."""
    tol = degeneracy_tolerance(energies)
    levels: list[tuple[float, int]] = []
    start = 0
    for i in range(1, energies.size + 1):
        if i == energies.size or energies[i] - energies[start] > tol:
            levels.append((float(np.mean(energies[start:i])), i - start))
            start = i
    return levels


def exact_gap(model: PairingModel, n: int) -> GapReport:
    es = block_eigensystem(model, n)
    if es.dim < 2:
        raise ValidationError(f"block n={n} has dimension {es.dim}; no gap defined")
    levels = distinct_levels(es.energies)
    if len(levels) < 2:
        raise ValidationError(f"block n={n} is fully degenerate; no excited level")
    (e0, g0), (e1, _) = levels[0], levels[1]
    return GapReport(n=n, E_n0=e0, E_n1=e1, two_delta=e1 - e0, degeneracy_0=g0)


def exact_propagator(H: np.ndarray, t: float) -> np.ndarray:
    es = dense_eigensystem(H)
    W = es.vectors
    return (W * np.exp(-1j * es.energies * t)) @ W.conj().T
