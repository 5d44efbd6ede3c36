"""Tilt, free-induction-decay synthesis, Fourier spectrum and gap estimation.

The FID of a pure state is ``V_alpha(t) = <psi(t)| sigma^-_alpha |psi(t)>``.
Because ``sigma^-`` lowers the pair number by exactly one, every Fourier line
sits at a transition ``E_{n-1,j} - E_{n,i}``; lines that share the lower
level ``j`` but start from the two lowest levels of sector ``n`` are split by
the sector gap ``2 Delta_n = E_{n,1} - E_{n,0}``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .adiabatic import PreparationReport, lowest_h0_bits, prepare_quasi_adiabatic
from .errors import InsufficientPeaksError, UnsupportedModelError, ValidationError
from .model import PairingModel, build_hp
from .oracle import block_eigensystem, dense_eigensystem, distinct_levels, exact_gap
from .ops import SY, I2, apply_1q
from .pulses import NmrMachine, compile_trotter_step, default_machine, paper_step_count, program_unitary
from .trotter import SplitPropagator, short_time_budget

BACKENDS = ("exact", "trotter", "pulse")
PEAK_THRESHOLD = 0.02
MAX_LINES = 64
RELAX_SWEEPS = 8
DEFAULT_T2_OVER_TLOGIC = 1e5


@dataclass(frozen=True, eq=False)
class FidTrace:
    tau: float
    samples: np.ndarray
    alpha: int
    backend: str

    @property
    def K(self) -> int:
        return int(self.samples.size)

    @property
    def times(self) -> np.ndarray:
        return self.tau * np.arange(self.K)


@dataclass(frozen=True)
class Peak:
    omega: float
    amplitude: float


@dataclass(frozen=True, eq=False)
class SpectrumResult:
    freqs: np.ndarray
    amps: np.ndarray
    peaks: list[Peak]
    resolution: float
    window: str | None = None


@dataclass(frozen=True)
class GapEstimate:
    n: int
    two_delta_est: float
    matched_lines: list[tuple[float, str]]
    uncertainty: float


# ---------------------------------------------------------------------------
# State preparation and signal
# ---------------------------------------------------------------------------


def tilt_state(state: np.ndarray, alpha: int, omega_tilt: float) -> np.ndarray:
    """Apply ``exp(-i omega_tilt sigma^y_alpha)``."""
    N = state.size.bit_length() - 1
    if not 0 <= alpha < N:
        raise ValidationError(f"measured qubit alpha={alpha} outside 0..{N - 1}")
    if abs(omega_tilt) > 0.5:
        warnings.warn(f"tilt angle {omega_tilt:g} is not small", RuntimeWarning, stacklevel=2)
    u = math.cos(omega_tilt) * I2 - 1j * math.sin(omega_tilt) * SY
    return apply_1q(state.astype(complex), u, alpha, N)


def lowering_expectation(psi: np.ndarray, alpha: int) -> complex:
    """``<psi| sigma^-_alpha |psi>`` without building the operator."""
    bit = 1 << alpha
    idx = np.arange(psi.size)
    low = idx[(idx & bit) == 0]
    return complex(np.vdot(psi[low], psi[low | bit]))


def fid_signal(
    initial: np.ndarray,
    model: PairingModel,
    tau: float,
    K: int,
    alpha: int,
    backend: str = "exact",
    machine: NmrMachine | None = None,
) -> FidTrace:
    """Samples ``V_alpha(k tau)``, k = 0..K-1, with the chosen propagator."""
    if K < 2:
        raise ValidationError("need at least two samples")
    if backend not in BACKENDS:
        raise ValidationError(f"unknown backend {backend!r}")
    if initial.shape != (1 << model.N,):
        raise ValidationError("initial state does not match the model size")
    if not 0 <= alpha < model.N:
        raise ValidationError(f"measured qubit alpha={alpha} outside 0..{model.N - 1}")
    if backend == "exact":
        es = dense_eigensystem(build_hp(model))
        coeffs = es.vectors.conj().T @ initial

        def state_at(k: int) -> np.ndarray:
            return es.vectors @ (np.exp(-1j * es.energies * k * tau) * coeffs)

    else:
        if backend == "trotter":
            prop = SplitPropagator(model)
            step = lambda psi: prop.apply(psi, tau)  # noqa: E731
        else:
            if not model.conserves_pairs:
                raise UnsupportedModelError("pulse backend requires Vminus == 0")
            machine = machine or default_machine(model.N)
            U = program_unitary(machine, compile_trotter_step(machine, model, tau))
            step = lambda psi: U @ psi  # noqa: E731
        cache = [initial.astype(complex)]

        def state_at(k: int) -> np.ndarray:
            while len(cache) <= k:
                cache.append(step(cache[-1]))
            return cache[k]

    samples = np.array([lowering_expectation(state_at(k), alpha) for k in range(K)])
    return FidTrace(tau=tau, samples=samples, alpha=alpha, backend=backend)


# ---------------------------------------------------------------------------
# Spectrum and peaks
# ---------------------------------------------------------------------------


def _window(K: int, window: str | None) -> np.ndarray:
    if window is None:
        return np.ones(K)
    if window == "hann":
        return np.hanning(K)
    raise ValidationError(f"unknown window {window!r}")


def _frequency_axis(K: int, tau: float) -> np.ndarray:
    w = 2 * np.pi * np.fft.fftfreq(K, d=tau)
    w[np.isclose(w, -np.pi / tau)] = np.pi / tau  # axis covers (-pi/tau, pi/tau]
    return w


def _wrap_freq(omega: float, tau: float) -> float:
    half = math.pi / tau
    w = (omega + half) % (2 * half) - half
    return half if w == -half else w


def _extract_lines(samples: np.ndarray, tau: float, w: np.ndarray, threshold: float) -> list[Peak]:
    """Greedy line extraction with tone subtraction and cyclic refinement.

    Each round takes the strongest DFT bin of the residual, places a line by
    3-point quadratic interpolation, and fits it as the maximiser of the
    windowed transform within half a bin.  All lines found so far are then
    re-fitted in turn, each against the signal with the others subtracted, so
    that leakage from neighbours does not bias them.  Subtracting fitted tones
    keeps window sidelobes of strong lines from being reported as lines of
    their own.  Lines that converge within half a bin are merged.
    """
    K = samples.size
    t = tau * np.arange(K)
    bin_w = 2 * np.pi / (K * tau)
    norm = w.sum()
    data = samples.astype(complex)

    def dtft(x: np.ndarray, omega: float) -> complex:
        return complex(np.dot(w * x, np.exp(-1j * omega * t)) / norm)

    def fit(x: np.ndarray, guess: float) -> tuple[float, complex]:
        res = minimize_scalar(
            lambda om: -abs(dtft(x, om)),
            bounds=(guess - bin_w / 2, guess + bin_w / 2),
            method="bounded",
            options={"xatol": 1e-9 * bin_w},
        )
        return float(res.x), dtft(x, float(res.x))

    def tone(omega: float, amp: complex) -> np.ndarray:
        return amp * np.exp(1j * omega * t)

    ref = np.abs(np.fft.fft(w * data) / norm).max()
    if ref == 0:
        return []
    lines: list[tuple[float, complex]] = []
    resid = data.copy()
    for _ in range(MAX_LINES):
        a = np.abs(np.fft.fft(w * resid) / norm)
        i = int(np.argmax(a))
        if a[i] < threshold * ref:
            break
        left, right = a[(i - 1) % K], a[(i + 1) % K]
        denom = left - 2 * a[i] + right
        delta = 0.5 * (left - right) / denom if denom != 0 else 0.0
        lines.append(fit(resid, (i + delta) * bin_w))
        for _ in range(RELAX_SWEEPS):
            shift = 0.0
            total = sum((tone(*ln) for ln in lines), np.zeros(K, complex))
            for j, (om, amp) in enumerate(lines):
                others = total - tone(om, amp)
                lines[j] = fit(data - others, om)
                total = others + tone(*lines[j])
                shift = max(shift, abs(lines[j][0] - om))
            if shift < 1e-6 * bin_w:
                break
        lines = _merge(lines, bin_w / 2)
        resid = data - sum((tone(*ln) for ln in lines), np.zeros(K, complex))
    peaks = [Peak(_wrap_freq(om, tau), float(abs(c))) for om, c in lines]
    return sorted(peaks, key=lambda p: p.omega)


def _merge(lines: list[tuple[float, complex]], tol: float) -> list[tuple[float, complex]]:
    merged: list[tuple[float, complex]] = []
    for om, amp in sorted(lines, key=lambda x: x[0]):
        if merged and om - merged[-1][0] < tol:
            om0, amp0 = merged[-1]
            weight = abs(amp0) / (abs(amp0) + abs(amp))
            merged[-1] = (weight * om0 + (1 - weight) * om, amp0 + amp)
        else:
            merged.append((om, amp))
    return merged


def spectrum(
    trace: FidTrace,
    window: str | None = None,
    peak_threshold: float = PEAK_THRESHOLD,
) -> SpectrumResult:
    K, tau = trace.K, trace.tau
    w = _window(K, window)
    X = np.fft.fft(w * trace.samples) / w.sum()
    freqs = _frequency_axis(K, tau)
    order = np.argsort(freqs)
    peaks = _extract_lines(trace.samples, tau, w, peak_threshold)
    return SpectrumResult(
        freqs=freqs[order],
        amps=np.abs(X)[order],
        peaks=peaks,
        resolution=2 * np.pi / (K * tau),
        window=window,
    )


# ---------------------------------------------------------------------------
# Gap estimation
# ---------------------------------------------------------------------------


def oracle_hint(model: PairingModel) -> dict[int, np.ndarray]:
    """Energies of every pair sector, used to label spectral lines."""
    return {n: block_eigensystem(model, n).energies for n in range(model.N + 1)}


def allowed_lines(hint: dict[int, np.ndarray]) -> list[tuple[float, int, int, int]]:
    """All ``(E_{m-1,j} - E_{m,i}, m, j, i)`` with j, i indexing distinct levels."""
    levels = {m: [e for e, _ in distinct_levels(np.asarray(E))] for m, E in hint.items()}
    lines = []
    for m in sorted(levels):
        if m - 1 not in levels:
            continue
        for j, lo in enumerate(levels[m - 1]):
            for i, hi in enumerate(levels[m]):
                lines.append((lo - hi, m, j, i))
    return lines


def _label(m: int, j: int, i: int) -> str:
    return f"E[{m - 1},{j}]-E[{m},{i}]"


def estimate_gap(
    spec: SpectrumResult,
    n: int,
    oracle_hint: dict[int, np.ndarray] | None = None,
) -> GapEstimate:
    """Sector gap from the separation of measured lines.

    With ``oracle_hint`` the peaks are labelled by nearby allowed transitions
    and the estimate is the measured separation of the strongest pair of lines
    that share their other level and start (or end) on levels 0 and 1 of
    sector ``n``.  Without a hint, pairwise separations are clustered and the
    smallest cluster supported by at least two line pairs is returned (or the
    smallest separation if no cluster repeats).
    """
    peaks = spec.peaks
    res = spec.resolution
    if len(peaks) < 2:
        raise InsufficientPeaksError(
            f"{len(peaks)} line(s) found; try other measured qubits or tilt angles"
        )
    if oracle_hint is not None:
        return _estimate_with_hint(peaks, n, oracle_hint, res)
    diffs = []
    for a in range(len(peaks)):
        for b in range(a + 1, len(peaks)):
            d = abs(peaks[b].omega - peaks[a].omega)
            if d >= res:
                diffs.append((d, a, b))
    if not diffs:
        raise InsufficientPeaksError("all lines lie within one resolution cell")
    diffs.sort()
    clusters: list[list[tuple[float, int, int]]] = []
    for item in diffs:
        if clusters and item[0] - clusters[-1][0][0] <= res:
            clusters[-1].append(item)
        else:
            clusters.append([item])
    stable = [c for c in clusters if len(c) >= 2]
    chosen = stable[0] if stable else clusters[0]
    value = float(np.mean([d for d, _, _ in chosen]))
    matched = []
    for _, a, b in chosen:
        matched += [(peaks[a].omega, "line"), (peaks[b].omega, "line")]
    return GapEstimate(n=n, two_delta_est=value, matched_lines=matched, uncertainty=res)


def _estimate_with_hint(peaks, n, hint, res) -> GapEstimate:
    lines = allowed_lines(hint)
    labels: list[list[tuple[int, int, int]]] = []
    for p in peaks:
        labels.append([(m, j, i) for f, m, j, i in lines if abs(f - p.omega) <= res])
    best = None
    for a, pa in enumerate(peaks):
        for b, pb in enumerate(peaks):
            if a == b:
                continue
            for m, j, i in labels[a]:
                # lines into sector n-1 from levels 0 and 1 of sector n
                if m == n and i == 0 and (n, j, 1) in labels[b]:
                    score, est = pa.amplitude * pb.amplitude, pa.omega - pb.omega
                # lines from sector n+1 ending on levels 0 and 1 of sector n
                elif m == n + 1 and j == 0 and (n + 1, 1, i) in labels[b]:
                    score, est = pa.amplitude * pb.amplitude, pb.omega - pa.omega
                else:
                    continue
                if est > 0 and (best is None or score > best[0]):
                    best = (score, est, a, b, (m, j, i))
    if best is None:
        raise InsufficientPeaksError(f"no pair of lines resolves the gap of sector n={n}")
    _, est, a, b, _ = best
    matched = [
        (peaks[k].omega, ", ".join(_label(*lab) for lab in labels[k]))
        for k in (a, b)
    ]
    return GapEstimate(n=n, two_delta_est=float(est), matched_lines=matched, uncertainty=res)


# ---------------------------------------------------------------------------
# Pipeline and resources
# ---------------------------------------------------------------------------


def feasibility_bound(N: int, d_over_delta: float) -> float:
    """Lower bound ``k s(N) >> (pi / (tau Delta)) * 9 N^4`` with ``tau = 1/d``."""
    return math.pi * d_over_delta * 9 * N**4


def resource_report(
    N: int,
    K: int,
    two_delta: float | None = None,
    tau: float | None = None,
    t2_over_tlogic: float = DEFAULT_T2_OVER_TLOGIC,
) -> dict:
    s = paper_step_count(N)
    report = {
        "N": N,
        "k": K,
        "s_of_N": s,
        "longest_run_steps": K * s,
        "total_steps": 0.5 * K**2 * s,
        "t2_over_tlogic": t2_over_tlogic,
        "fits_coherence": K * s < t2_over_tlogic,
    }
    if two_delta and tau:
        report["k_min"] = math.pi / (tau * two_delta / 2)
    return report


def feasibility_statement(
    N: int = 10,
    d_over_delta: float = 0.1,
    t2_over_tlogic: float = DEFAULT_T2_OVER_TLOGIC,
) -> dict:
    """Coherence-budget check for resolving a gap ``Delta`` at level spacing ``d``.

    With the largest trustworthy step ``tau = 1/d`` the shortest useful record
    has ``k = pi d / Delta`` steps, so the longest run needs at least
    ``k s(N)`` logic steps; ``9 pi (d/Delta) N^4`` is the leading-order form.
    """
    k_min = math.pi * d_over_delta
    s = paper_step_count(N)
    need = k_min * s
    bound = feasibility_bound(N, d_over_delta)
    return {
        "N": N,
        "d_over_delta": d_over_delta,
        "k_min": k_min,
        "s_of_N": s,
        "k_times_s_lower": need,
        "leading_order_bound": bound,
        "t2_over_tlogic": t2_over_tlogic,
        "headroom": t2_over_tlogic / need,
        "statement": f"k(n) s({N}) >> {bound:.1e} vs T2/tau_logic = {t2_over_tlogic:.0e}",
    }


@dataclass(frozen=True, eq=False)
class PipelineResult:
    preparation: PreparationReport
    tilted: np.ndarray
    trace: FidTrace
    spectrum: SpectrumResult
    gap: GapEstimate
    exact_two_delta: float
    margins: dict = field(default_factory=dict)
    resources: dict = field(default_factory=dict)


def run_pipeline(
    model: PairingModel,
    initial_bits: str | None,
    tau: float,
    K: int,
    alpha: int,
    omega_tilt: float,
    theta_target: float,
    backend: str = "exact",
    n: int | None = None,
    prep_tau: float | None = None,
    window: str | None = None,
    use_oracle_labels: bool = True,
    machine: NmrMachine | None = None,
    t2_over_tlogic: float = DEFAULT_T2_OVER_TLOGIC,
) -> PipelineResult:
    """Quasi-adiabatic preparation, tilt, FID, spectrum and gap in one call."""
    if initial_bits is None:
        if n is None:
            raise ValidationError("give either initial_bits or n")
        initial_bits = lowest_h0_bits(model, n)
    n = initial_bits.count("1")
    prep = prepare_quasi_adiabatic(model, initial_bits, theta_target, prep_tau or tau)
    tilted = tilt_state(prep.final_state, alpha, omega_tilt)
    trace = fid_signal(tilted, model, tau, K, alpha, backend, machine)
    spec = spectrum(trace, window=window)
    hint = oracle_hint(model) if use_oracle_labels else None
    gap = estimate_gap(spec, n, hint)
    exact = exact_gap(model, n).two_delta
    budget = short_time_budget(model)
    margins = {
        "adiabatic_margin": prep.margin,
        "tau_over_budget": tau / budget if math.isfinite(budget) else 0.0,
        "resolution": spec.resolution,
        "resolution_below_delta": spec.resolution < exact / 2,
        "nyquist": math.pi / tau,
    }
    resources = resource_report(model.N, K, exact, tau, t2_over_tlogic)
    return PipelineResult(prep, tilted, trace, spec, gap, exact, margins, resources)
