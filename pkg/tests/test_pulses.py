import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given
from hypothesis import strategies as st

from oracles import X, Y, Z, op_on, random_symmetric
from pairsim.errors import UnsupportedModelError, ValidationError
from pairsim.model import PairingModel, build_h0, build_hi, exchange_generators, reduced_bcs_preset
from pairsim.ops import phase_aligned_distance, support_residual
from pairsim.pulses import (
    FreeEvolve,
    NmrMachine,
    PulseProgram,
    Rotate,
    compile_exchange,
    compile_h0,
    compile_hi_step,
    compile_single_z,
    compile_trotter_step,
    compile_zz,
    conjugate,
    default_machine,
    hi_pair_product,
    paper_step_count,
    program_unitary,
    scaling_program,
)
from pairsim.trotter import trotter_step


def machine(N):
    # deliberately irregular parameters so accidental cancellations are unlikely
    return NmrMachine(omega=1.0 + 0.37 * np.arange(N) ** 1.3, J=0.3 + 0.11 * np.arange(N - 1))


def expm(H):
    return scipy.linalg.expm(-1j * H)


# --- machine and pulses ------------------------------------------------------


def test_machine_validation():
    with pytest.raises(ValidationError):
        NmrMachine(omega=[1.0, 2.0], J=[0.0])
    with pytest.raises(ValidationError):
        NmrMachine(omega=[1.0, 2.0], J=[0.5, 0.5])
    with pytest.raises(ValidationError):
        NmrMachine(omega=[1.0, np.nan], J=[0.5])


def test_pulse_validation():
    with pytest.raises(ValidationError):
        Rotate(0, "z", 1.0)
    with pytest.raises(ValidationError):
        Rotate(0, "x", 7.0)
    with pytest.raises(ValidationError):
        FreeEvolve(-1.0)


def test_free_evolution_is_machine_hamiltonian():
    mc = machine(3)
    H = sum(w / 2 * op_on(3, {q: Z}) for q, w in enumerate(mc.omega))
    H = H + sum(j * op_on(3, {q: Z, q + 1: Z}) for q, j in enumerate(mc.J))
    U = program_unitary(mc, PulseProgram((FreeEvolve(0.7),)))
    np.testing.assert_allclose(U, expm(0.7 * H), atol=1e-12)


@pytest.mark.parametrize("axis,P", [("x", X), ("y", Y)])
def test_rotation_convention(axis, P):
    U = program_unitary(machine(3), PulseProgram((Rotate(1, axis, 0.9),)))
    np.testing.assert_allclose(U, expm(0.45 * op_on(3, {1: P})), atol=1e-12)


def test_program_order_and_listing():
    prog = PulseProgram((Rotate(0, "x", 1.0),)) + PulseProgram((FreeEvolve(0.2), Rotate(1, "y", 0.5)))
    assert len(prog) == prog.step_count == 3
    assert prog.free_time == pytest.approx(0.2)
    rows = prog.listing()
    assert [r["kind"] for r in rows] == ["rotate", "free", "rotate"]
    assert rows[1]["duration"] == 0.2 and rows[2]["axis"] == "y"


def test_layer_count_groups_simultaneous_pulses():
    prog = PulseProgram((Rotate(0, "x", 1.0), Rotate(1, "x", 1.0), Rotate(0, "y", 1.0), FreeEvolve(0.1)))
    assert prog.layer_count == 3
    assert prog.step_count == 4


def test_simplify_preserves_unitary():
    mc = machine(3)
    prog = compile_trotter_step(mc, reduced_bcs_preset(3, 1.0, 0.2, 0.5), 0.1)
    raw = compile_hi_step(mc, reduced_bcs_preset(3, 1.0, 0.2, 0.5), 0.1) + compile_h0(
        mc, reduced_bcs_preset(3, 1.0, 0.2, 0.5), 0.1
    )
    assert len(prog) < len(raw)
    assert phase_aligned_distance(program_unitary(mc, prog), program_unitary(mc, raw)) < 1e-12


# --- primitives ----------------------------------------------------------------


@pytest.mark.parametrize("N", [1, 2, 4, 5])
def test_single_z_is_exact_and_local(N):
    mc = machine(N)
    for l in range(N):
        U = program_unitary(mc, compile_single_z(mc, l, -0.8))
        assert phase_aligned_distance(U, expm(-0.4 * op_on(N, {l: Z}))) < 1e-12


@pytest.mark.parametrize("N", [2, 3, 5])
def test_zz_all_pairs(N):
    mc = machine(N)
    for l in range(N):
        for m in range(l + 1, N):
            U = program_unitary(mc, compile_zz(mc, l, m, 0.3))
            assert phase_aligned_distance(U, expm(0.3 * op_on(N, {l: Z, m: Z}))) < 1e-11
            assert support_residual(U, (l, m), N) < 1e-11


@pytest.mark.parametrize("inverse", [False, True])
def test_exchange_gate(inverse):
    N = 4
    mc = machine(N)
    for l in range(N - 1):
        Xg, _, _ = exchange_generators(l, l + 1, N)
        target = expm((-1 if inverse else 1) * math.pi / 2 * Xg)
        U = program_unitary(mc, compile_exchange(mc, l, inverse))
        assert phase_aligned_distance(U, target) < 1e-12


def test_zero_frequency_qubit_rejected():
    mc = NmrMachine(omega=[0.0, 1.0], J=[0.5])
    with pytest.raises(ValidationError):
        compile_single_z(mc, 0, 0.1)


def test_conjugate_rejects_unrealisable_generators():
    prog = compile_single_z(machine(2), 0, 0.3)
    with pytest.raises(ValidationError):
        conjugate(prog, [(0, "z")], 0.1)
    with pytest.raises(ValidationError):
        conjugate(prog, [(0, "x"), (1, "x")], 0.3, mode="product")
    with pytest.raises(ValidationError):
        conjugate(prog, [(0, "x"), (0, "y")], 0.3)


def test_product_conjugation():
    N = 3
    mc = machine(N)
    prog = compile_zz(mc, 0, 2, 0.25)
    out = conjugate(prog, [(0, "x"), (1, "y")], math.pi / 2, mode="product")
    A = op_on(N, {0: X, 1: Y})
    inner = expm(0.25 * op_on(N, {0: Z, 2: Z}))
    target = scipy.linalg.expm(1j * math.pi / 2 * A) @ inner @ scipy.linalg.expm(-1j * math.pi / 2 * A)
    assert phase_aligned_distance(program_unitary(mc, out), target) < 1e-12


# --- Trotter-step compilation --------------------------------------------------


@pytest.mark.parametrize("N", [2, 3, 4])
def test_h0_block(N):
    mc = machine(N)
    m = reduced_bcs_preset(N, 1.0, 0.3, 0.5)
    U = program_unitary(mc, compile_h0(mc, m, 0.2))
    assert phase_aligned_distance(U, expm(0.2 * build_h0(m))) < 1e-12


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_hi_compiles_to_pair_product(N):
    rng = np.random.default_rng(N)
    m = PairingModel(eps=rng.uniform(0.5, 1.5, N), vplus=random_symmetric(rng, N))
    mc = machine(N)
    U = program_unitary(mc, compile_hi_step(mc, m, 0.1, 0.7))
    assert phase_aligned_distance(U, hi_pair_product(m, 0.1, 0.7)) < 1e-11


def test_n2_compiled_step_equals_split_step():
    m = PairingModel(eps=[1.0, 2.0], vplus=[[0.0, -0.5], [-0.5, 0.0]])
    mc = default_machine(2)
    for tau, c in ((0.01, 1.0), (0.3, 0.5)):
        U = program_unitary(mc, compile_trotter_step(mc, m, tau, c))
        assert phase_aligned_distance(U, trotter_step(m, tau, c)) < 1e-12


def test_pair_product_deviation_is_second_order():
    m = reduced_bcs_preset(4, 1.0, 0.1, 1.0)
    target = lambda t: expm(t * build_hi(m))  # noqa: E731
    errs = [phase_aligned_distance(hi_pair_product(m, t), target(t)) for t in (0.02, 0.01, 0.005)]
    np.testing.assert_allclose(np.array(errs[:-1]) / np.array(errs[1:]), 4.0, rtol=0.05)


def test_compiled_step_conserves_pair_number():
    m = reduced_bcs_preset(4, 1.0, 0.1, 1.0)
    U = program_unitary(default_machine(4), compile_trotter_step(default_machine(4), m, 0.2))
    n = np.array([bin(i).count("1") for i in range(16)])
    assert np.abs(U[n[:, None] != n[None, :]]).max() < 1e-12


def test_compile_rejects_vminus_and_size_mismatch():
    m = PairingModel(eps=[1.0, 2.0], vplus=np.zeros((2, 2)), vminus=[[0, 0.2], [0.2, 0]])
    with pytest.raises(UnsupportedModelError):
        compile_hi_step(default_machine(2), m, 0.1)
    with pytest.raises(ValidationError):
        compile_h0(default_machine(3), reduced_bcs_preset(2, 1.0, 0.1, 1.0), 0.1)


# --- counting ---------------------------------------------------------------------


def test_paper_step_count_values():
    assert [paper_step_count(N) for N in range(1, 6)] == [3, 40, 353, 1408, 3895]
    assert paper_step_count(10) == 77640
    with pytest.raises(ValidationError):
        paper_step_count(0)


@given(st.integers(1, 500))
def test_paper_step_count_is_exact_integer(N):
    num = 28 * N**4 - 47 * N**3 - 4 * N**2 + 32 * N
    assert num % 3 == 0
    assert 3 * paper_step_count(N) == num


def test_scaling_program_counts_grow():
    counts = [scaling_program(N).step_count for N in range(2, 6)]
    assert counts == sorted(counts)
    assert all(scaling_program(N).layer_count <= c for N, c in zip(range(2, 6), counts))
