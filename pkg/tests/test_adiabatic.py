import math

import numpy as np
import pytest

from pairsim.adiabatic import (
    RampSchedule,
    adiabatic_condition_check,
    adiabatic_evolve,
    decompose,
    lowest_h0_bits,
    min_ramp_gap,
    prepare_adiabatic,
    prepare_basis_state,
    prepare_quasi_adiabatic,
    ramp_model,
)
from pairsim.errors import UnreachableTargetError, ValidationError
from pairsim.model import PairingModel, build_h0, build_hi, build_hp, reduced_bcs_preset
from pairsim.oracle import block_eigensystem, exact_gap

N2 = PairingModel(eps=[1.0, 2.0], vplus=[[0.0, -0.5], [-0.5, 0.0]])


def test_schedule_validation():
    s = RampSchedule.linear(1.0, 0.1)
    assert s.k == 10 and s.T == pytest.approx(1.0)
    np.testing.assert_allclose(s.values, np.arange(1, 11) / 10)
    for vals in ([0.5], [0.2, 0.1, 1.0], [0.0, 1.2, 1.0], []):
        with pytest.raises(ValidationError):
            RampSchedule(0.1, vals)
    with pytest.raises(ValidationError):
        RampSchedule(0.0, [1.0])
    assert RampSchedule.linear(0.01, 0.1).k == 1


def test_basis_state_bit_order():
    psi = prepare_basis_state(3, "001")
    assert psi[1] == 1 and np.count_nonzero(psi) == 1
    with pytest.raises(ValidationError):
        prepare_basis_state(3, "01")
    with pytest.raises(ValidationError):
        prepare_basis_state(2, "0a")


def test_lowest_h0_bits_fill_lowest_levels():
    m = PairingModel(eps=[0.5, -1.0, 2.0, 0.0], vplus=np.zeros((4, 4)))
    assert lowest_h0_bits(m, 2) == "1010"
    assert lowest_h0_bits(m, 0) == "0000"
    with pytest.raises(ValidationError):
        lowest_h0_bits(m, 5)


def test_margin_definition():
    tau, two_delta = 0.05, 0.8
    k = math.pi / (tau * two_delta / 2)
    assert adiabatic_condition_check(k, tau, two_delta) == pytest.approx(1.0)
    assert adiabatic_condition_check(2 * k, tau, two_delta) == pytest.approx(2.0)
    with pytest.raises(ValidationError):
        adiabatic_condition_check(10, tau, 0.0)


def test_slow_ramp_reaches_n2_ground_state():
    gap = exact_gap(N2, 1).two_delta
    T = 40 * math.pi / (gap / 2)
    rep = prepare_adiabatic(N2, "01", T, 0.05)
    assert rep.ground_fidelity >= 0.99
    assert rep.margin == pytest.approx(40, rel=0.01)
    assert rep.leaked_weight < 1e-12


def test_report_quantities_are_consistent():
    rep = prepare_adiabatic(reduced_bcs_preset(3, 1.0, 0.2, 0.5), "011", 5.0, 0.05)
    assert rep.ground_fidelity**2 + rep.theta**2 + rep.leaked_weight == pytest.approx(1.0, abs=1e-12)
    assert rep.level_weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert rep.summary()["k"] == 100


def test_split_ramp_tracks_unsplit_ramp():
    m = reduced_bcs_preset(3, 1.0, 0.2, 0.5)
    psi0 = prepare_basis_state(3, "011")
    sched = RampSchedule.linear(4.0, 0.01)
    a = adiabatic_evolve(m, sched, psi0)
    b = adiabatic_evolve(m, sched, psi0, exact_factors=True)
    assert np.linalg.norm(a - b) < 0.05


def test_quasi_adiabatic_hits_target():
    rep = prepare_quasi_adiabatic(N2, "01", 0.2, 0.05)
    assert rep.theta == pytest.approx(0.2, rel=0.3)


def test_quasi_adiabatic_unreachable_targets():
    with pytest.raises(ValidationError):
        prepare_quasi_adiabatic(N2, "01", 0.7, 0.05)
    with pytest.raises(UnreachableTargetError):
        prepare_quasi_adiabatic(N2, "11", 0.2, 0.05)  # one-dimensional block
    # weak coupling: even a sudden quench barely leaves the ground state
    weak = PairingModel(eps=[1.0, 2.0], vplus=[[0.0, -0.01], [-0.01, 0.0]])
    with pytest.raises(UnreachableTargetError):
        prepare_quasi_adiabatic(weak, "01", 0.2, 0.05)


def test_ramp_model_interpolates():
    m = reduced_bcs_preset(3, 1.0, 0.2, 0.5)
    for c in (0.0, 0.3, 1.0):
        np.testing.assert_allclose(build_hp(ramp_model(m, c)), build_h0(m) + c * build_hi(m), atol=1e-13)


def test_min_ramp_gap_bounds_final_gap():
    m = reduced_bcs_preset(4, 1.0, 0.1, 1.0)
    g, c = min_ramp_gap(m, 2, samples=21)
    assert g == pytest.approx(0.1) and c == 0.0
    assert g <= exact_gap(m, 2).two_delta


def test_decompose_on_eigenstate():
    es = block_eigensystem(N2, 1)
    psi = es.embedded_vectors()[:, 0]
    fid, theta, leaked, _ = decompose(psi, es)
    assert fid == pytest.approx(1.0) and theta < 1e-12 and leaked < 1e-12


def test_uncoupled_model_keeps_basis_state():
    m = PairingModel(eps=[0.3, 1.1, 2.0], vplus=np.zeros((3, 3)))
    rep = prepare_adiabatic(m, "011", 3.0, 0.1)
    assert rep.ground_fidelity == pytest.approx(1.0, abs=1e-12) and rep.theta < 1e-12
    with pytest.raises(UnreachableTargetError):
        prepare_quasi_adiabatic(m, "011", 0.2, 0.1)


def test_infidelity_falls_like_inverse_square_ramp_time():
    m = reduced_bcs_preset(4, 1.0, 0.1, 1.0)
    Ts = np.array([200.0, 400.0, 800.0, 1600.0, 2000.0])
    inf = np.array([1 - prepare_adiabatic(m, "0011", T, 0.05).ground_fidelity for T in Ts])
    slope = np.polyfit(np.log(Ts), np.log(inf), 1)[0]
    assert slope == pytest.approx(-2.0, abs=0.25)
    # doubling T never lowers the fidelity
    assert np.all(np.diff(1 - inf[:4]) > -1e-3)


def test_leakage_free_for_any_schedule():
    m = reduced_bcs_preset(4, 1.0, 0.1, 1.0)
    sched = RampSchedule(0.2, [0.1, 0.1, 0.7, 0.9, 1.0])
    psi = adiabatic_evolve(m, sched, prepare_basis_state(4, "0101"))
    _, _, leaked, _ = decompose(psi, block_eigensystem(m, 2))
    assert leaked <= 1e-10
