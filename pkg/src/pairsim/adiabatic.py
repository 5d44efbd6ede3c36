"""(Quasi-)adiabatic preparation of low-lying states of H_p.

The ramp evolves under ``H(t) = H0 + c(t) H_I`` as a product of split steps
``exp(-i H0 tau) exp(-i c(j tau) H_I tau)``, j = 1..k.  Starting from the
lowest H0 basis state of a pair sector, a slow ramp ends near the sector's
ground state; a faster ramp leaves a controlled admixture ``theta`` of excited
levels, which is what spectroscopy needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import UnreachableTargetError, ValidationError
from .model import PairingModel, build_h0, build_hi
from .oracle import EigenSystem, block_eigensystem, distinct_levels, exact_gap
from .ops import expm_hermitian, popcount
from .trotter import SplitPropagator, warn_if_outside_budget


@dataclass(frozen=True, eq=False)
class RampSchedule:
    """Values ``c(j tau)`` for j = 1..k; ``c(0) = 0`` is implicit."""

    tau: float
    values: np.ndarray
    kind: str = "custom"

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=float).reshape(-1)
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        if vals.size < 1:
            raise ValidationError("ramp needs at least one step")
        if vals[-1] != 1.0:
            raise ValidationError("ramp must end at c(T) = 1")
        if np.any(vals < 0) or np.any(vals > 1) or np.any(np.diff(vals) < 0):
            raise ValidationError("ramp values must be nondecreasing within [0, 1]")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def linear(cls, T: float, tau: float) -> RampSchedule:
        k = max(1, round(T / tau))
        return cls(tau=tau, values=np.arange(1, k + 1) / k, kind="linear")

    @property
    def k(self) -> int:
        return int(self.values.size)

    @property
    def T(self) -> float:
        return self.k * self.tau


@dataclass(frozen=True, eq=False)
class PreparationReport:
    final_state: np.ndarray
    n: int
    ground_fidelity: float  # |<g_n|psi>| (norm of projection on the ground level)
    theta: float  # norm of projection on all excited levels of block n
    leaked_weight: float  # probability outside block n
    level_weights: np.ndarray  # probability per distinct level of block n
    T: float
    tau: float
    k: int
    margin: float

    def summary(self) -> dict:
        return {
            "n": self.n,
            "ground_fidelity": self.ground_fidelity,
            "theta": self.theta,
            "leaked_weight": self.leaked_weight,
            "level_weights": self.level_weights.tolist(),
            "T": self.T,
            "tau": self.tau,
            "k": self.k,
            "adiabatic_margin": self.margin,
        }


def prepare_basis_state(N: int, bits: str) -> np.ndarray:
    """Computational basis state; the rightmost character is qubit 0."""
    if len(bits) != N or set(bits) - {"0", "1"}:
        raise ValidationError(f"expected a bitstring of length {N}, got {bits!r}")
    psi = np.zeros(1 << N, dtype=complex)
    psi[int(bits, 2)] = 1.0
    return psi


def lowest_h0_bits(model: PairingModel, n: int) -> str:
    """Bitstring of the H0 ground state with ``n`` pairs (lowest dressed levels filled)."""
    if not 0 <= n <= model.N:
        raise ValidationError(f"n={n} outside 0..{model.N}")
    order = np.argsort(model.dressed, kind="stable")[:n]
    idx = sum(1 << int(q) for q in order)
    return format(idx, f"0{model.N}b")


def adiabatic_evolve(
    model: PairingModel,
    schedule: RampSchedule,
    initial: np.ndarray,
    exact_factors: bool = False,
) -> np.ndarray:
    """Apply the ramp product; ``exact_factors`` uses ``exp(-i H(j tau) tau)`` unsplit."""
    if initial.shape != (1 << model.N,):
        raise ValidationError("initial state does not match the model size")
    psi = initial.astype(complex)
    if exact_factors:
        h0, hi = build_h0(model), build_hi(model)
        for c in schedule.values:
            psi = expm_hermitian(h0 + c * hi, schedule.tau) @ psi
        return psi
    warn_if_outside_budget(model, schedule.tau)
    prop = SplitPropagator(model)
    for c in schedule.values:
        psi = prop.apply(psi, schedule.tau, c)
    return psi


def adiabatic_condition_check(k: int, tau: float, two_delta: float) -> float:
    """Margin ``k / (pi / (tau Delta))`` with ``Delta = two_delta / 2``."""
    if two_delta <= 0:
        raise ValidationError("gap must be positive")
    return k * tau * (two_delta / 2) / math.pi


def ramp_model(model: PairingModel, c: float) -> PairingModel:
    """Model whose H_p is ``H0 + c H_I`` of ``model`` (dressed energies held fixed)."""
    vp = c * model.vplus
    return PairingModel(eps=model.dressed - np.diag(vp), vplus=vp, vminus=c * model.vminus)


def min_ramp_gap(model: PairingModel, n: int, samples: int = 201) -> tuple[float, float]:
    """Smallest sector gap ``2 Delta_n(c)`` along the ramp, sampled on a uniform c grid.

    Returns ``(two_delta_min, c_at_min)``.
    """
    best = (math.inf, 0.0)
    for c in np.linspace(0.0, 1.0, samples):
        g = exact_gap(ramp_model(model, float(c)), n).two_delta
        if g < best[0]:
            best = (g, float(c))
    return best


def decompose(state: np.ndarray, es: EigenSystem) -> tuple[float, float, float, np.ndarray]:
    """(ground fidelity, theta, leaked weight, weight per distinct level) in one block."""
    amps = es.vectors.conj().T @ state[es.block.indices]
    probs = np.abs(amps) ** 2
    weights = []
    start = 0
    for _, g in distinct_levels(es.energies):
        weights.append(probs[start : start + g].sum())
        start += g
    weights = np.array(weights)
    inside = float(probs.sum())
    leaked = max(0.0, float(np.vdot(state, state).real) - inside)
    return math.sqrt(weights[0]), math.sqrt(weights[1:].sum()), leaked, weights


def _report(model, es, gap, schedule, psi, n) -> PreparationReport:
    fid, theta, leaked, weights = decompose(psi, es)
    return PreparationReport(
        final_state=psi,
        n=n,
        ground_fidelity=fid,
        theta=theta,
        leaked_weight=leaked,
        level_weights=weights,
        T=schedule.T,
        tau=schedule.tau,
        k=schedule.k,
        margin=adiabatic_condition_check(schedule.k, schedule.tau, gap.two_delta) if gap else math.nan,
    )


def prepare_adiabatic(model: PairingModel, bits: str, T: float, tau: float) -> PreparationReport:
    """Linear ramp of total time ``T`` from a basis state, analysed against the oracle."""
    psi0 = prepare_basis_state(model.N, bits)
    n = popcount(int(bits, 2))
    es = block_eigensystem(model, n)
    gap = exact_gap(model, n) if es.dim > 1 and len(distinct_levels(es.energies)) > 1 else None
    schedule = RampSchedule.linear(T, tau)
    return _report(model, es, gap, schedule, adiabatic_evolve(model, schedule, psi0), n)


def prepare_quasi_adiabatic(
    model: PairingModel,
    bits: str,
    target_theta: float,
    tau: float,
    rel_tol: float = 0.3,
    max_iter: int = 60,
) -> PreparationReport:
    """Tune the linear-ramp time so the excited admixture theta hits a target.

    Brackets the target between a sudden ramp (one step) and a ramp long
    enough to push theta below it, then bisects on log T until theta is
    within ``rel_tol`` of the target.
    """
    if not 0 < target_theta < 0.5:
        raise ValidationError("target theta must lie in (0, 0.5)")
    psi0 = prepare_basis_state(model.N, bits)
    n = popcount(int(bits, 2))
    es = block_eigensystem(model, n)
    levels = distinct_levels(es.energies)
    if len(levels) < 2:
        raise UnreachableTargetError(f"block n={n} has no excited level to admix")
    gap = exact_gap(model, n)
    if gap.degeneracy_0 > 1:
        raise UnreachableTargetError("ground level is degenerate; theta is not well defined")

    def run(T: float) -> PreparationReport:
        schedule = RampSchedule.linear(T, tau)
        return _report(model, es, gap, schedule, adiabatic_evolve(model, schedule, psi0), n)

    lo_T = tau
    lo = run(lo_T)
    if _within(lo.theta, target_theta, rel_tol):
        return lo
    if lo.theta < target_theta:
        raise UnreachableTargetError(
            f"even a sudden ramp leaves theta={lo.theta:.3g} below the target {target_theta:g}"
        )
    hi_T = max(2 * tau, math.pi / gap.two_delta)
    hi = run(hi_T)
    for _ in range(40):
        if hi.theta <= target_theta:
            break
        lo_T, lo = hi_T, hi
        hi_T *= 2
        hi = run(hi_T)
    else:
        raise UnreachableTargetError("theta does not fall below the target for any ramp tried")
    if _within(hi.theta, target_theta, rel_tol):
        return hi
    for _ in range(max_iter):
        mid_T = math.sqrt(lo_T * hi_T)
        if round(mid_T / tau) in (round(lo_T / tau), round(hi_T / tau)):
            break
        mid = run(mid_T)
        if _within(mid.theta, target_theta, rel_tol):
            return mid
        if mid.theta > target_theta:
            lo_T = mid_T
        else:
            hi_T = mid_T
    raise UnreachableTargetError(
        f"bisection stalled: theta brackets [{hi.theta:.3g}, {lo.theta:.3g}] around {target_theta:g}"
    )


def _within(value: float, target: float, rel_tol: float) -> bool:
    return abs(value - target) <= rel_tol * target
