import numpy as np
import pytest
import scipy.linalg

from oracles import kron_hamiltonian, random_state, random_symmetric
from pairsim.errors import ValidationError
from pairsim.model import PairingModel, block_weights, build_h0, build_hi, reduced_bcs_preset
from pairsim.trotter import (
    SplitPropagator,
    TrotterPlan,
    evolve,
    exact_evolve,
    level_spacing,
    short_time_budget,
    trotter_error,
    trotter_step,
    warn_if_outside_budget,
)


def random_model(seed, N):
    rng = np.random.default_rng(seed)
    return PairingModel(eps=rng.uniform(-1, 1, N), vplus=random_symmetric(rng, N))


@pytest.mark.parametrize("c", [0.0, 0.4, 1.0])
def test_step_is_h0_after_hi(c):
    m = random_model(0, 3)
    tau = 0.2
    ref = scipy.linalg.expm(-1j * tau * build_h0(m)) @ scipy.linalg.expm(-1j * c * tau * build_hi(m))
    np.testing.assert_allclose(trotter_step(m, tau, c), ref, atol=1e-12)


def test_split_propagator_matrix_and_apply_agree():
    m = random_model(1, 4)
    prop = SplitPropagator(m)
    psi = random_state(np.random.default_rng(2), 16)
    np.testing.assert_allclose(prop.matrix(0.1, 0.5) @ psi, prop.apply(psi, 0.1, 0.5), atol=1e-13)


def test_interaction_scale_range():
    with pytest.raises(ValidationError):
        trotter_step(random_model(0, 2), 0.1, c=1.5)


def test_plan_validation():
    assert TrotterPlan(0.1, 5).T == pytest.approx(0.5)
    with pytest.raises(ValidationError):
        TrotterPlan(0.0, 5)
    with pytest.raises(ValidationError):
        TrotterPlan(0.1, -1)


def test_first_order_local_error():
    m = random_model(3, 4)
    errs = [trotter_error(m, t) for t in (0.02, 0.01, 0.005)]
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    np.testing.assert_allclose(ratios, 4.0, rtol=0.05)
    assert trotter_error(m, 0.0) == 0.0


def test_commuting_parts_are_exact():
    m = PairingModel(eps=[0.4, -0.2, 1.0], vplus=np.zeros((3, 3)))
    assert trotter_error(m, 0.7) < 1e-13


def test_global_error_converges_linearly():
    m = reduced_bcs_preset(3, 1.0, 0.2, 0.5)
    psi0 = np.zeros(8, complex)
    psi0[0b011] = 1.0
    exact = exact_evolve(psi0, m, 1.0)
    errs = [np.linalg.norm(evolve(psi0, m, TrotterPlan(1.0 / k, k)) - exact) for k in (50, 100, 200)]
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)
    assert errs[1] / errs[2] == pytest.approx(2.0, rel=0.1)


def test_evolution_preserves_block_weights():
    m = random_model(5, 4)
    psi = random_state(np.random.default_rng(6), 16)
    out = evolve(psi, m, TrotterPlan(0.05, 40))
    np.testing.assert_allclose(block_weights(out, 4), block_weights(psi, 4), atol=1e-12)


def test_evolve_shape_check():
    with pytest.raises(ValidationError):
        evolve(np.ones(4), random_model(0, 3), TrotterPlan(0.1, 1))


def test_exact_evolve_matches_oracle():
    m = random_model(7, 3)
    psi = random_state(np.random.default_rng(8), 8)
    H = kron_hamiltonian(m.eps, m.vplus)
    np.testing.assert_allclose(exact_evolve(psi, m, 0.8), scipy.linalg.expm(-0.8j * H) @ psi, atol=1e-12)


def test_short_time_budget():
    m = reduced_bcs_preset(4, 1.0, 0.1, 1.0)
    assert level_spacing(m) == pytest.approx(0.1)
    assert short_time_budget(m) == pytest.approx(10.0)
    flat = PairingModel(eps=[1.0, 1.0], vplus=np.zeros((2, 2)))
    assert short_time_budget(flat) == np.inf
    with pytest.warns(RuntimeWarning):
        warn_if_outside_budget(m, 2.0)


def test_error_within_budget_scales_quadratically():
    m = reduced_bcs_preset(6, 1.0, 0.1, 1.0)
    budget = short_time_budget(m)
    assert trotter_error(m, 0.1 * budget) <= 100 * trotter_error(m, 0.01 * budget)
