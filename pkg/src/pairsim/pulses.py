"""Recoupling compiler for an always-on nearest-neighbour Ising machine.

The machine Hamiltonian

    H_NMR = sum_l (omega_l / 2) sigma^z_l + sum_l J_l sigma^z_l sigma^z_{l+1}

cannot be switched off; the only controls are instantaneous single-qubit x/y
rotations.  Every primitive here is built from two ingredients:

* toggling-frame refocusing: pi x-pulses flip the sign of ``sigma^z`` on
  chosen qubits between equal free-evolution intervals.  With sign patterns
  taken from rows of a 4x4 Walsh-Hadamard matrix, every unwanted Zeeman and
  coupling term averages to zero exactly (all terms are diagonal, so there is
  no higher-order residue);
* recoupling conjugations ``C_A^phi o U = e^{i phi A} U e^{-i phi A}`` with
  ``A`` a sum (or product) of single-qubit x/y Paulis.

Long-range ``sigma^z_l sigma^z_m`` couplings are produced by conjugating a
nearest-neighbour block with exchange gates ``exp(-i pi/2 X_{j,j+1})`` that
walk the coupling along the chain.

Qubits are 0-based.  ``Rotate(q, axis, angle)`` is ``exp(-i angle/2 sigma^axis_q)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import UnsupportedModelError, ValidationError
from .model import PairingModel, check_full_cap, reduced_bcs_preset
from .ops import apply_1q, pauli_string, rotation

WALSH = np.array(
    [
        [1, 1, 1, 1],
        [1, -1, 1, -1],
        [1, 1, -1, -1],
        [1, -1, -1, 1],
    ]
)
ANGLE_EPS = 1e-13


@dataclass(frozen=True, eq=False)
class NmrMachine:
    omega: np.ndarray
    J: np.ndarray

    def __post_init__(self) -> None:
        omega = np.array(self.omega, dtype=float).reshape(-1)
        J = np.array(self.J, dtype=float).reshape(-1)
        if omega.size < 1:
            raise ValidationError("machine needs at least one qubit")
        if J.size != omega.size - 1:
            raise ValidationError(f"need {omega.size - 1} couplings J, got {J.size}")
        if not (np.all(np.isfinite(omega)) and np.all(np.isfinite(J))):
            raise ValidationError("machine parameters must be finite")
        if np.any(J <= 0):
            raise ValidationError("couplings J_l must be positive")
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "J", J)

    @property
    def N(self) -> int:
        return int(self.omega.size)

    def diagonal(self) -> np.ndarray:
        """Diagonal of H_NMR in the computational basis."""
        check_full_cap(self.N)
        b = np.arange(1 << self.N, dtype=np.int64)
        s = [2.0 * ((b >> q) & 1) - 1.0 for q in range(self.N)]
        diag = sum(0.5 * w * sq for w, sq in zip(self.omega, s))
        for l, j in enumerate(self.J):
            diag = diag + j * s[l] * s[l + 1]
        return np.asarray(diag, dtype=float)


def default_machine(N: int) -> NmrMachine:
    return NmrMachine(omega=1.0 + 0.25 * np.arange(N), J=np.full(N - 1, 0.5))


# ---------------------------------------------------------------------------
# Pulses and programs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FreeEvolve:
    duration: float

    def __post_init__(self) -> None:
        if not self.duration >= 0:
            raise ValidationError("free evolution duration must be >= 0")


@dataclass(frozen=True)
class Rotate:
    qubit: int
    axis: str
    angle: float

    def __post_init__(self) -> None:
        if self.axis not in ("x", "y"):
            raise ValidationError(f"rotation axis must be 'x' or 'y', got {self.axis!r}")
        if not -2 * math.pi < self.angle <= 2 * math.pi:
            raise ValidationError(f"rotation angle {self.angle} outside (-2pi, 2pi]")


Pulse = Union[FreeEvolve, Rotate]


@dataclass(frozen=True)
class PulseProgram:
    """An ordered pulse list (first element is applied first).

    ``step_count`` counts every free-evolution interval and every individual
    single-qubit pulse.  ``layer_count`` instead merges runs of rotations into
    layers of simultaneous pulses (at most one pulse per qubit per layer).
    """

    pulses: tuple[Pulse, ...] = field(default_factory=tuple)

    def __add__(self, other: PulseProgram) -> PulseProgram:
        return PulseProgram(self.pulses + other.pulses)

    def __len__(self) -> int:
        return len(self.pulses)

    @property
    def step_count(self) -> int:
        return len(self.pulses)

    @property
    def layer_count(self) -> int:
        count = 0
        layer: set[int] = set()
        for p in self.pulses:
            if isinstance(p, FreeEvolve):
                count += 1
                layer = set()
            else:
                if not layer or p.qubit in layer:
                    count += 1
                    layer = set()
                layer.add(p.qubit)
        return count

    @property
    def free_time(self) -> float:
        return float(sum(p.duration for p in self.pulses if isinstance(p, FreeEvolve)))

    def listing(self) -> list[dict]:
        rows = []
        for i, p in enumerate(self.pulses):
            if isinstance(p, FreeEvolve):
                rows.append({"index": i, "kind": "free", "qubit": None, "axis": None,
                             "angle": None, "duration": p.duration})
            else:
                rows.append({"index": i, "kind": "rotate", "qubit": p.qubit, "axis": p.axis,
                             "angle": p.angle, "duration": 0.0})
        return rows


EMPTY = PulseProgram()


def concat(programs: Iterable[PulseProgram]) -> PulseProgram:
    pulses: list[Pulse] = []
    for prog in programs:
        pulses.extend(prog.pulses)
    return PulseProgram(tuple(pulses))


def _wrap(angle: float) -> float:
    a = math.remainder(angle, 2 * math.pi)
    return math.pi if a == -math.pi else a


def simplify(prog: PulseProgram) -> PulseProgram:
    """Peephole clean-up that preserves the unitary up to a global phase.

    Adjacent free evolutions merge; inside each run of rotations, pulses on
    different qubits commute, so each qubit's pulses are merged (same-axis
    neighbours add, multiples of 2pi drop) and re-emitted layer by layer.
    """
    out: list[Pulse] = []
    run: list[Rotate] = []

    def flush() -> None:
        per_qubit: dict[int, list[Rotate]] = {}
        for r in run:
            stack = per_qubit.setdefault(r.qubit, [])
            if stack and stack[-1].axis == r.axis:
                merged = _wrap(stack.pop().angle + r.angle)
                if abs(merged) > ANGLE_EPS:
                    stack.append(Rotate(r.qubit, r.axis, merged))
            else:
                a = _wrap(r.angle)
                if abs(a) > ANGLE_EPS:
                    stack.append(Rotate(r.qubit, r.axis, a))
        run.clear()
        depth = max((len(s) for s in per_qubit.values()), default=0)
        for i in range(depth):
            for q in sorted(per_qubit):
                if i < len(per_qubit[q]):
                    out.append(per_qubit[q][i])

    for p in prog.pulses:
        if isinstance(p, FreeEvolve):
            flush()
            if p.duration == 0:
                continue
            if out and isinstance(out[-1], FreeEvolve):
                out[-1] = FreeEvolve(out[-1].duration + p.duration)
            else:
                out.append(p)
        else:
            run.append(p)
    flush()
    return PulseProgram(tuple(out))


# ---------------------------------------------------------------------------
# Simulation
# ---------------------------------------------------------------------------


def simulate_program(machine: NmrMachine, prog: PulseProgram, state: np.ndarray) -> np.ndarray:
    """Apply every pulse exactly to a state (or to each column of a matrix)."""
    if state.shape[0] != 1 << machine.N:
        raise ValidationError(f"state dimension {state.shape[0]} does not match N={machine.N}")
    diag = machine.diagonal()
    psi = state.astype(complex)
    for p in prog.pulses:
        if isinstance(p, FreeEvolve):
            phase = np.exp(-1j * p.duration * diag)
            psi = psi * (phase if psi.ndim == 1 else phase[:, None])
        else:
            psi = apply_1q(psi, rotation(p.axis, p.angle), p.qubit, machine.N)
    return psi


def program_unitary(machine: NmrMachine, prog: PulseProgram) -> np.ndarray:
    return simulate_program(machine, prog, np.eye(1 << machine.N, dtype=complex))


# ---------------------------------------------------------------------------
# Recoupling conjugation
# ---------------------------------------------------------------------------


def conjugate(
    prog: PulseProgram,
    generator: Sequence[tuple[int, str]],
    phi: float,
    mode: str = "sum",
) -> PulseProgram:
    """Program for ``e^{i phi A} U e^{-i phi A}`` where ``U`` is ``prog``.

    ``generator`` lists ``(qubit, axis)`` terms; ``A`` is their sum
    (``mode="sum"``, any ``phi``) or their tensor product (``mode="product"``,
    only ``phi`` a multiple of pi/2).
    """
    terms = list(generator)
    for q, axis in terms:
        if axis not in ("x", "y"):
            raise ValidationError(f"generator axis {axis!r} is not a single-qubit x/y control")
    if len({q for q, _ in terms}) != len(terms):
        raise ValidationError("generator terms must act on distinct qubits")
    if mode == "sum":
        angle = _wrap(2 * phi)
        if abs(angle) < ANGLE_EPS:
            return prog
        pre = tuple(Rotate(q, a, angle) for q, a in terms)
        post = tuple(Rotate(q, a, -angle) for q, a in terms)
    elif mode == "product":
        k = 2 * phi / math.pi
        if abs(k - round(k)) > 1e-12:
            raise ValidationError("a product generator is only realizable for phi in (pi/2) Z")
        if round(k) % 2 == 0:
            return prog
        # e^{+-i pi/2 P} is P up to phase, and P is a layer of pi rotations
        pre = post = tuple(Rotate(q, a, math.pi) for q, a in terms)
    else:
        raise ValidationError(f"unknown generator mode {mode!r}")
    return PulseProgram(pre + prog.pulses + post)


# ---------------------------------------------------------------------------
# Refocused free evolution
# ---------------------------------------------------------------------------


def _toggled(signs: np.ndarray, dt: float) -> PulseProgram:
    """Free evolution in ``signs.shape[1]`` intervals with sigma^z_q multiplied by signs[q, k]."""
    N, K = signs.shape
    cur = np.ones(N, dtype=int)
    pulses: list[Pulse] = []
    for k in range(K):
        pulses.extend(Rotate(int(q), "x", math.pi) for q in np.nonzero(signs[:, k] != cur)[0])
        pulses.append(FreeEvolve(dt))
        cur = signs[:, k]
    pulses.extend(Rotate(int(q), "x", math.pi) for q in np.nonzero(cur < 0)[0])
    return PulseProgram(tuple(pulses))


def _single_z_signs(N: int, l: int, sign: int) -> np.ndarray:
    signs = np.empty((N, 4), dtype=int)
    for j in range(N):
        signs[j] = sign * WALSH[0] if j == l else WALSH[1 + j % 2]
    return signs


def _nn_zz_signs(N: int, l: int, sign: int) -> np.ndarray:
    signs = np.empty((N, 4), dtype=int)
    for j in range(N):
        if j == l:
            signs[j] = WALSH[1]
        elif j == l + 1:
            signs[j] = sign * WALSH[1]
        else:
            dist = l - j if j < l else j - l - 1
            signs[j] = WALSH[2] if dist % 2 == 1 else WALSH[3]
    return signs


def _check_qubit(machine: NmrMachine, q: int) -> None:
    if not 0 <= q < machine.N:
        raise ValidationError(f"qubit {q} outside 0..{machine.N - 1}")


def compile_single_z(machine: NmrMachine, l: int, theta: float) -> PulseProgram:
    """``exp(-i theta/2 sigma^z_l)`` with every other term refocused."""
    _check_qubit(machine, l)
    if theta == 0:
        return EMPTY
    w = machine.omega[l]
    if w == 0:
        raise ValidationError(f"omega_{l} = 0: no free z-phase available on that qubit")
    sign = 1 if theta * w > 0 else -1
    dt = abs(theta / w) / 4
    return _toggled(_single_z_signs(machine.N, l, sign), dt)


def _compile_nn_zz(machine: NmrMachine, l: int, theta: float) -> PulseProgram:
    if theta == 0:
        return EMPTY
    sign = 1 if theta > 0 else -1
    dt = abs(theta) / (4 * machine.J[l])
    return _toggled(_nn_zz_signs(machine.N, l, sign), dt)


def compile_exchange(machine: NmrMachine, l: int, inverse: bool = False) -> PulseProgram:
    """``exp(-i pi/2 X_{l,l+1})`` (or its inverse), from two pi/4 Ising blocks."""
    if not 0 <= l < machine.N - 1:
        raise ValidationError(f"exchange needs 0 <= l < {machine.N - 1}, got {l}")
    gx = [(l, "x"), (l + 1, "x")]
    gy = [(l, "y"), (l + 1, "y")]
    quarter = math.pi / 4
    if not inverse:
        zz = _compile_nn_zz(machine, l, quarter)
        # operator order C_x^{-pi/4}(zz) . C_y^{pi/4}(zz): the y factor runs first
        return conjugate(zz, gy, quarter) + conjugate(zz, gx, -quarter)
    zz = _compile_nn_zz(machine, l, -quarter)
    return conjugate(zz, gx, -quarter) + conjugate(zz, gy, quarter)


def compile_zz(machine: NmrMachine, l: int, m: int, theta: float) -> PulseProgram:
    """``exp(-i theta sigma^z_l sigma^z_m)`` for any pair ``l != m``."""
    _check_qubit(machine, l)
    _check_qubit(machine, m)
    if l == m:
        raise ValidationError("zz coupling needs two distinct qubits")
    l, m = min(l, m), max(l, m)
    if theta == 0:
        return EMPTY
    core = _compile_nn_zz(machine, l, theta)
    # walk qubit m's role down to l+1: S = W_{m-1} ... W_{l+1},  U = S core S^dag
    hops = range(l + 1, m)
    before = [compile_exchange(machine, j, inverse=True) for j in reversed(hops)]
    after = [compile_exchange(machine, j) for j in hops]
    return concat(before + [core] + after)


def compile_h0(machine: NmrMachine, model: PairingModel, tau: float) -> PulseProgram:
    """``exp(-i H0 tau)`` as one refocused z-phase block per qubit."""
    _check_sizes(machine, model)
    return concat(compile_single_z(machine, l, e * tau) for l, e in enumerate(model.dressed) if e)


def compile_hi_step(machine: NmrMachine, model: PairingModel, tau: float, c: float = 1.0) -> PulseProgram:
    """Product over coupled pairs of ``exp(-i c tau V_ml X_ml)``.

    Each pair factor is exact: its xx and yy parts commute and are obtained by
    rotating the same Ising block with x/y pi/4 recoupling.  Different pairs do
    not commute, so for N >= 3 the product differs from ``exp(-i c tau H_I)``
    at order tau^2.
    """
    _check_sizes(machine, model)
    if not model.conserves_pairs:
        raise UnsupportedModelError("pulse compilation supports Vminus == 0 only")
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"interaction scale c={c} outside [0, 1]")
    quarter = math.pi / 4
    parts = []
    for m in range(model.N):
        for l in range(m + 1, model.N):
            v = model.vplus[m, l]
            if v == 0 or c == 0:
                continue
            zz = compile_zz(machine, m, l, c * tau * v / 2)
            parts.append(conjugate(zz, [(m, "y"), (l, "y")], quarter))  # -> xx
            parts.append(conjugate(zz, [(m, "x"), (l, "x")], quarter))  # -> yy
    return concat(parts)


def compile_trotter_step(machine: NmrMachine, model: PairingModel, tau: float, c: float = 1.0) -> PulseProgram:
    """``exp(-i H0 tau) exp(-i c H_I tau)``: the interaction part runs first."""
    return simplify(compile_hi_step(machine, model, tau, c) + compile_h0(machine, model, tau))


def hi_pair_product(model: PairingModel, tau: float, c: float = 1.0) -> np.ndarray:
    """Matrix the H_I compiler targets: ordered product of exact pair exponentials."""
    N = model.N
    U = np.eye(1 << N, dtype=complex)
    for m in range(N):
        for l in range(m + 1, N):
            v = model.vplus[m, l]
            if v == 0:
                continue
            theta = c * tau * v / 2
            xx = pauli_string(N, {m: "x", l: "x"})
            yy = pauli_string(N, {m: "y", l: "y"})
            # xx and yy commute and square to 1
            fac = (np.cos(theta) * np.eye(1 << N) - 1j * np.sin(theta) * yy) @ (
                np.cos(theta) * np.eye(1 << N) - 1j * np.sin(theta) * xx
            )
            U = fac @ U
    return U


def _check_sizes(machine: NmrMachine, model: PairingModel) -> None:
    if machine.N != model.N:
        raise ValidationError(f"machine has {machine.N} qubits, model has N={model.N}")


# ---------------------------------------------------------------------------
# Step counting
# ---------------------------------------------------------------------------


def paper_step_count(N: int) -> int:
    """Quartic step count ``(28N^4 - 47N^3 - 4N^2 + 32N) / 3`` (always an integer)."""
    if N < 1:
        raise ValidationError("N must be >= 1")
    num = 28 * N**4 - 47 * N**3 - 4 * N**2 + 32 * N
    return num // 3


def scaling_program(N: int, tau: float = 0.1) -> PulseProgram:
    """Compiled Trotter step of the all-to-all reduced BCS preset on the default machine."""
    model = reduced_bcs_preset(N, eps0=1.0, d=0.1, V=1.0)
    return compile_trotter_step(default_machine(N), model, tau)
