"""Dense qubit-operator primitives.

Basis convention used everywhere in the package: basis index ``b`` stores
qubit ``q`` in bit ``q`` (qubit 0 is the least significant bit).  A set bit
means the qubit is in ``|1>`` (pair occupied), and ``sigma^z`` has eigenvalue
+1 on ``|1>``, so the occupation is ``n_q = (sigma^z_q + 1) / 2``.

In the single-qubit ordering ``(|0>, |1>)`` this gives ``sigma^z = diag(-1, 1)``
and ``sigma^+ = |1><0|``.  ``sigma^y`` is chosen so that the usual algebra
``[sigma^x, sigma^y] = 2i sigma^z`` still holds.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, 1j], [-1j, 0]], dtype=complex)
SZ = np.array([[-1, 0], [0, 1]], dtype=complex)
SPLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SMINUS = np.array([[0, 1], [0, 0]], dtype=complex)
I2 = np.eye(2, dtype=complex)

PAULI = {"x": SX, "y": SY, "z": SZ}


def popcount(b: int) -> int:
    return int(b).bit_count()


def popcounts(N: int) -> np.ndarray:
    """Pair number of every basis index ``0 .. 2^N - 1``."""
    idx = np.arange(1 << N, dtype=np.int64)
    counts = np.zeros(1 << N, dtype=np.int64)
    for q in range(N):
        counts += (idx >> q) & 1
    return counts


def embed(op: np.ndarray, qubit: int, N: int) -> np.ndarray:
    """Full ``2^N x 2^N`` matrix of a single-qubit operator acting on ``qubit``."""
    factors = [op if q == qubit else I2 for q in reversed(range(N))]
    return reduce(np.kron, factors)


def pauli_string(N: int, terms: dict[int, str]) -> np.ndarray:
    """Kronecker-product matrix of ``{qubit: axis}`` Paulis (identity elsewhere)."""
    factors = [PAULI[terms[q]] if q in terms else I2 for q in reversed(range(N))]
    return reduce(np.kron, factors)


def apply_1q(psi: np.ndarray, u: np.ndarray, qubit: int, N: int) -> np.ndarray:
    """Apply a 2x2 matrix to ``qubit`` of a state (or of every column of a matrix)."""
    tail = psi.shape[1:]
    t = psi.reshape((1 << (N - 1 - qubit), 2, 1 << qubit) + tail)
    out = np.einsum("ij,ajb...->aib...", u, t)
    return out.reshape(psi.shape)


def rotation(axis: str, angle: float) -> np.ndarray:
    """``exp(-i angle/2 sigma^axis)``."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    return c * I2 - 1j * s * PAULI[axis]


def expm_hermitian(H: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i H t)`` for Hermitian ``H`` via its spectral decomposition."""
    E, W = np.linalg.eigh(H)
    return (W * np.exp(-1j * E * t)) @ W.conj().T


def is_hermitian(H: np.ndarray, tol: float = 1e-12) -> bool:
    return bool(np.max(np.abs(H - H.conj().T), initial=0.0) <= tol)


def unitarity_defect(U: np.ndarray) -> float:
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[0]), 2))


def phase_aligned_distance(U: np.ndarray, V: np.ndarray) -> float:
    """Spectral-norm distance ``||U - e^{i phi} V||`` with ``phi = arg tr(V^dag U)``.

    The trace-aligned phase is optimal in Frobenius norm; for the spectral norm
    it yields an upper bound on the true minimum, which is fine for tolerances.
    """
    ov = np.vdot(V, U)
    phase = ov / abs(ov) if abs(ov) > 0 else 1.0
    return float(np.linalg.norm(U - phase * V, 2))


def support_residual(U: np.ndarray, support: list[int] | tuple[int, ...], N: int) -> float:
    """Distance of ``U`` from the closest operator ``A_support (x) I_rest``.

    Zero exactly when ``U`` acts as the identity (up to anything absorbed in
    ``A``, including a global phase) on every qubit outside ``support``.
    """
    support = sorted(set(support))
    rest = [q for q in range(N) if q not in support]
    if not rest:
        return 0.0
    # tensor axis of qubit q is N-1-q (most significant bit first)
    axes_s = [N - 1 - q for q in support]
    axes_r = [N - 1 - q for q in rest]
    T = U.reshape((2,) * (2 * N))
    perm = axes_s + axes_r + [N + a for a in axes_s] + [N + a for a in axes_r]
    ds, dr = 1 << len(support), 1 << len(rest)
    M = T.transpose(perm).reshape(ds, dr, ds, dr)
    A = np.einsum("iaja->ij", M) / dr
    approx = np.einsum("ij,ab->iajb", A, np.eye(dr))
    diff = (M - approx).reshape(ds * dr, ds * dr)
    return float(np.linalg.norm(diff, 2))


def commutator(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return A @ B - B @ A


def normalize(psi: np.ndarray) -> np.ndarray:
    nrm = float(np.linalg.norm(psi))
    if nrm == 0.0:
        raise ValueError("zero-norm state")
    return psi / nrm


__all__ = [
    "SX", "SY", "SZ", "SPLUS", "SMINUS", "I2", "PAULI",
    "popcount", "popcounts", "embed", "pauli_string", "apply_1q", "rotation",
    "expm_hermitian", "is_hermitian", "unitarity_defect", "phase_aligned_distance",
    "support_residual", "commutator", "normalize",
]
