"""Pairing Hamiltonians mapped onto qubits.

Each effective state ``m`` (a time-reversed pair ``m, -m``) is one qubit; the
qubit is ``|1>`` when the pair is occupied.  The qubit Hamiltonian is

    H_p = sum_m (eps_m / 2) sigma^z_m
          + sum_{r=+,-} sum_{l>m} (V^r_ml / 2) (sigma^x_m sigma^x_l + r sigma^y_m sigma^y_l)

with dressed energies ``eps_m = e_m + V^+_mm``.  With ``V^- = 0`` it commutes
with the total pair number, so the ``2^N`` space splits into blocks of fixed
popcount.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import CapExceededError, UnsupportedModelError, ValidationError
from .ops import SMINUS, SZ, pauli_string, popcount, popcounts

FULL_QUBIT_CAP = 14
BLOCK_DIM_CAP = 20000


@dataclass(frozen=True, eq=False)
class PairingModel:
    """Bare pair energies plus the two symmetric interaction matrices.

    ``eps`` holds the bare energies; the dressed energies that actually enter
    the qubit Hamiltonian are available as :attr:`dressed`.
    """

    eps: np.ndarray
    vplus: np.ndarray
    vminus: np.ndarray | None = None

    def __post_init__(self) -> None:
        eps = np.array(self.eps, dtype=float).reshape(-1)
        N = eps.size
        if N < 1:
            raise ValidationError("model needs at least one pair state")
        vplus = _square(self.vplus, N, "Vplus")
        vminus = np.zeros((N, N)) if self.vminus is None else _square(self.vminus, N, "Vminus")
        if not np.all(np.isfinite(eps)):
            raise ValidationError("eps must be finite")
        for arr in (eps, vplus, vminus):
            arr.setflags(write=False)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "vplus", vplus)
        object.__setattr__(self, "vminus", vminus)

    @property
    def N(self) -> int:
        return int(self.eps.size)

    @property
    def dressed(self) -> np.ndarray:
        """Dressed energies ``eps_m + V^+_mm``."""
        return self.eps + np.diag(self.vplus)

    @property
    def conserves_pairs(self) -> bool:
        return not np.any(self.vminus)

    def to_dict(self) -> dict[str, Any]:
        return {
            "N": self.N,
            "eps": self.eps.tolist(),
            "Vplus": self.vplus.tolist(),
            "Vminus": self.vminus.tolist(),
        }


def _square(a: Any, N: int, name: str) -> np.ndarray:
    m = np.array(a, dtype=float)
    if m.shape != (N, N):
        raise ValidationError(f"{name} must have shape ({N}, {N}), got {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError(f"{name} must be finite")
    if not np.array_equal(m, m.T):
        raise ValidationError(f"{name} must be symmetric")
    return m


def check_full_cap(N: int) -> None:
    if N > FULL_QUBIT_CAP:
        raise CapExceededError(
            f"dense 2^{N} operators refused: N={N} exceeds the cap N<={FULL_QUBIT_CAP}"
        )


# ---------------------------------------------------------------------------
# Operators
# ---------------------------------------------------------------------------


def h0_diagonal(model: PairingModel, indices: np.ndarray | None = None) -> np.ndarray:
    """Diagonal of ``H_0`` on the given basis indices (all ``2^N`` by default)."""
    if indices is None:
        check_full_cap(model.N)
        indices = np.arange(1 << model.N, dtype=np.int64)
    eps = model.dressed
    diag = np.zeros(len(indices))
    for m in range(model.N):
        s = 2.0 * ((indices >> m) & 1) - 1.0
        diag += 0.5 * eps[m] * s
    return diag


def build_h0(model: PairingModel) -> np.ndarray:
    return np.diag(h0_diagonal(model)).astype(complex)


def build_hi(model: PairingModel) -> np.ndarray:
    N = model.N
    check_full_cap(N)
    dim = 1 << N
    b = np.arange(dim, dtype=np.int64)
    H = np.zeros((dim, dim), dtype=complex)
    for m in range(N):
        for l in range(m + 1, N):
            flip = (1 << m) | (1 << l)
            differ = ((b >> m) & 1) != ((b >> l) & 1)
            if model.vplus[m, l]:
                src = b[differ]
                H[src ^ flip, src] += model.vplus[m, l]
            if model.vminus[m, l]:
                src = b[~differ]
                H[src ^ flip, src] += model.vminus[m, l]
    return H


def build_hp(model: PairingModel) -> np.ndarray:
    return build_h0(model) + build_hi(model)


# ---------------------------------------------------------------------------
# Pair-number blocks
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BlockIndex:
    N: int
    n: int
    indices: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.indices.size)


def pair_number(basis_index: int, N: int | None = None) -> int:
    if basis_index < 0 or (N is not None and basis_index >= 1 << N):
        raise ValidationError(f"basis index {basis_index} out of range")
    return popcount(basis_index)


def block_dimension(N: int, n: int) -> int:
    """Exact ``C(N, n)``; works far beyond anything that can be enumerated."""
    if not 0 <= n <= N:
        raise ValidationError(f"pair number n={n} outside 0..{N}")
    return math.comb(N, n)


def block_indices(N: int, n: int) -> BlockIndex:
    dim = block_dimension(N, n)
    if dim > BLOCK_DIM_CAP or N > 62:
        raise CapExceededError(
            f"block (N={N}, n={n}) has dimension {dim:.4e} > {BLOCK_DIM_CAP}; enumeration refused"
        )
    # Gosper's hack enumerates popcount-n integers in increasing order.
    out = np.empty(dim, dtype=np.int64)
    if n == 0:
        out[0] = 0
    else:
        v = (1 << n) - 1
        for i in range(dim):
            out[i] = v
            c = v & -v
            r = v + c
            v = (((r ^ v) >> 2) // c) | r
    return BlockIndex(N=N, n=n, indices=out)


def block_weights(state: np.ndarray, N: int) -> np.ndarray:
    """Probability in each pair-number sector ``n = 0..N``."""
    return np.bincount(popcounts(N), weights=np.abs(state) ** 2, minlength=N + 1)


def block_hamiltonian(model: PairingModel, n: int) -> tuple[np.ndarray, BlockIndex]:
    """``H_p`` restricted to the popcount-``n`` sector, built without the full matrix."""
    if not model.conserves_pairs:
        raise UnsupportedModelError("pair-number blocks only exist when Vminus == 0")
    block = block_indices(model.N, n)
    idx = block.indices
    H = np.diag(h0_diagonal(model, idx)).astype(complex)
    for m in range(model.N):
        for l in range(m + 1, model.N):
            v = model.vplus[m, l]
            if not v:
                continue
            differ = ((idx >> m) & 1) != ((idx >> l) & 1)
            rows = np.nonzero(differ)[0]
            partners = np.searchsorted(idx, idx[rows] ^ ((1 << m) | (1 << l)))
            H[partners, rows] += v
    return H, block


# ---------------------------------------------------------------------------
# Presets and I/O
# ---------------------------------------------------------------------------


def reduced_bcs_preset(N: int, eps0: float, d: float, V: float) -> PairingModel:
    """Uniform attraction ``V_ml = -V`` with dressed levels ``eps0 + l d`` (l = 1..N)."""
    if V <= 0:
        raise ValidationError("reduced BCS needs V > 0 (attractive pairing V_ml = -V)")
    if d < 0:
        raise ValidationError("level spacing d must be >= 0")
    vplus = np.full((N, N), -float(V))
    dressed = eps0 + d * np.arange(1, N + 1)
    return PairingModel(eps=dressed - np.diag(vplus), vplus=vplus)


def random_model(N: int, rng: np.random.Generator, scale: float = 1.0) -> PairingModel:
    eps = rng.uniform(-1.0, 1.0, size=N) * scale
    a = rng.normal(size=(N, N)) * scale / 2
    return PairingModel(eps=eps, vplus=(a + a.T) / 2)


def model_from_dict(data: dict[str, Any]) -> PairingModel:
    try:
        if data.get("preset") is not None:
            if data["preset"] != "reduced_bcs":
                raise ValidationError(f"unknown preset {data['preset']!r}")
            return reduced_bcs_preset(
                int(data["N"]), float(data["eps0"]), float(data["d"]), float(data["V"])
            )
        N = int(data["N"])
        eps = data["eps"]
        if len(eps) != N:
            raise ValidationError(f"eps has {len(eps)} entries, N={N}")
        return PairingModel(eps=eps, vplus=data["Vplus"], vminus=data.get("Vminus"))
    except (KeyError, TypeError) as exc:
        raise ValidationError(f"malformed model description: {exc}") from exc


def load_model(path: str | Path) -> PairingModel:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError(f"cannot read model file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ValidationError("model file must contain a JSON object")
    return model_from_dict(data)


# ---------------------------------------------------------------------------
# sl(2) pair mappings
# ---------------------------------------------------------------------------


def pair_sl2_generators(case: str) -> dict[str, np.ndarray]:
    """Raising/lowering/z generators of one pair in a two-mode Fock space.

    ``case`` is ``"particle-particle"`` (Cooper pairs), ``"particle-hole"``
    (fermionic excitons) or ``"boson"`` (dual-rail bosons).  Returned keys:
    ``raise``, ``lower``, ``z`` on the full Fock space, ``subspace`` (columns
    spanning the constrained two-state subspace, vacuum first), and the
    restricted 2x2 versions ``raise2``, ``lower2``, ``z2``.
    """
    if case in ("particle-particle", "particle-hole"):
        # modes (m, -m) -> bits (0, 1); Jordan-Wigner with mode m first
        c_m = np.kron(np.eye(2), SMINUS)
        c_mm = np.kron(SMINUS, -SZ)  # parity string (-1)^{n_m} = -sigma^z in our basis
        n_m = c_m.conj().T @ c_m
        n_mm = c_mm.conj().T @ c_mm
        one = np.eye(4)
        if case == "particle-particle":
            lower = c_mm @ c_m
            raise_ = c_m.conj().T @ c_mm.conj().T
            z = n_m + n_mm - one
            vac = np.zeros(4)
            vac[0] = 1.0
        else:
            lower = c_mm.conj().T @ c_m
            raise_ = c_m.conj().T @ c_mm
            z = n_m - n_mm
            vac = c_mm.conj().T @ np.eye(4)[:, 0]
    elif case == "boson":
        cut = 3  # occupations 0..2 per mode
        b = np.diag(np.sqrt(np.arange(1, cut)), 1)
        b_m = np.kron(np.eye(cut), b)
        b_mm = np.kron(b, np.eye(cut))
        n_m = b_m.T @ b_m
        n_mm = b_mm.T @ b_mm
        lower = b_mm.T @ b_m
        raise_ = b_m.T @ b_mm
        z = n_m - n_mm
        vac = b_mm.T @ np.eye(cut * cut)[:, 0]
    else:
        raise ValidationError(f"unknown pairing case {case!r}")
    excited = raise_ @ vac
    sub = np.stack([vac, excited], axis=1).astype(complex)
    restrict = lambda op: sub.conj().T @ op @ sub  # noqa: E731
    return {
        "raise": raise_.astype(complex),
        "lower": lower.astype(complex),
        "z": z.astype(complex),
        "subspace": sub,
        "raise2": restrict(raise_),
        "lower2": restrict(lower),
        "z2": restrict(z),
    }


def exchange_generators(l: int, m: int, N: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """The ``X_lm, Y_lm, Z_lm`` su(2) triple acting on qubits ``l`` and ``m``."""
    X = 0.5 * (pauli_string(N, {l: "x", m: "x"}) + pauli_string(N, {l: "y", m: "y"}))
    Y = 0.5 * (pauli_string(N, {l: "y", m: "x"}) - pauli_string(N, {l: "x", m: "y"}))
    Z = 0.5 * (pauli_string(N, {l: "z"}) - pauli_string(N, {m: "z"}))
    return X, Y, Z
