"""First-order split propagator ``exp(-i H0 tau) exp(-i c H_I tau)`` and its powers."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import PairingModel, build_hi, build_hp, h0_diagonal
from .oracle import exact_propagator

BUDGET_WARN_FRACTION = 0.1


@dataclass(frozen=True)
class TrotterPlan:
    tau: float
    k: int

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise ValidationError("tau must be positive")
        if self.k < 0:
            raise ValidationError("k must be non-negative")

    @property
    def T(self) -> float:
        return self.tau * self.k


class SplitPropagator:
    """Caches the diagonal of H0 and the eigenbasis of H_I for repeated steps.

    Each step applies the two factors exactly (spectrally), so the only
    approximation is the splitting itself.
    """

    def __init__(self, model: PairingModel) -> None:
        self.model = model
        self.h0 = h0_diagonal(model)
        self.hi_energies, self.hi_vectors = np.linalg.eigh(build_hi(model))
        self._hi_vectors_h = self.hi_vectors.conj().T

    def apply(self, psi: np.ndarray, tau: float, c: float = 1.0) -> np.ndarray:
        W = self.hi_vectors
        out = W @ (np.exp(-1j * c * tau * self.hi_energies)[:, None] * (self._hi_vectors_h @ _as_2d(psi)))
        out *= np.exp(-1j * tau * self.h0)[:, None]
        return out.reshape(psi.shape)

    def matrix(self, tau: float, c: float = 1.0) -> np.ndarray:
        return self.apply(np.eye(self.h0.size, dtype=complex), tau, c)


def _as_2d(psi: np.ndarray) -> np.ndarray:
    return psi.reshape(psi.shape[0], -1)


def _check_c(c: float) -> None:
    if not 0.0 <= c <= 1.0:
        raise ValidationError(f"interaction scale c={c} outside [0, 1]")


def trotter_step(model: PairingModel, tau: float, c: float = 1.0) -> np.ndarray:
    _check_c(c)
    return SplitPropagator(model).matrix(tau, c)


def evolve(state: np.ndarray, model: PairingModel, plan: TrotterPlan) -> np.ndarray:
    if state.shape != (1 << model.N,):
        raise ValidationError(f"state of shape {state.shape} does not match N={model.N}")
    warn_if_outside_budget(model, plan.tau)
    prop = SplitPropagator(model)
    psi = state.astype(complex)
    for _ in range(plan.k):
        psi = prop.apply(psi, plan.tau)
    return psi


def exact_evolve(state: np.ndarray, model: PairingModel, t: float) -> np.ndarray:
    return exact_propagator(build_hp(model), t) @ state


def trotter_error(model: PairingModel, tau: float) -> float:
    """Spectral-norm distance between one split step and ``exp(-i H_p tau)``."""
    if tau == 0:
        return 0.0
    U = trotter_step(model, tau)
    return float(np.linalg.norm(U - exact_propagator(build_hp(model), tau), 2))


def level_spacing(model: PairingModel) -> float:
    """Smallest positive gap between adjacent sorted dressed energies (0 if none)."""
    diffs = np.diff(np.sort(model.dressed))
    diffs = diffs[diffs > 0]
    return float(diffs.min()) if diffs.size else 0.0


def short_time_budget(model: PairingModel) -> float:
    """Time step scale ``1/d`` below which the split is trustworthy."""
    d = level_spacing(model)
    return math.inf if d == 0 else 1.0 / d


def warn_if_outside_budget(model: PairingModel, tau: float) -> None:
    budget = short_time_budget(model)
    if tau > BUDGET_WARN_FRACTION * budget:
        warnings.warn(
            f"tau={tau:g} exceeds {BUDGET_WARN_FRACTION:g} x short-time budget {budget:g}",
            RuntimeWarning,
            stacklevel=3,
        )
