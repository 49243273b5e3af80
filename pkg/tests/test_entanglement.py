import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from esdlab import entanglement as ent
from esdlab import models as M
from esdlab.errors import InvalidStateError, PatternError

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def bell():
    v = np.array([1, 1, 0, 0]) / math.sqrt(2)
    return np.outer(v, v).astype(complex)


def werner(p):
    return p * bell() + (1 - p) * np.eye(4) / 4


def pure_tensor(psi):
    return M.tensor_to_computational(np.outer(psi, psi.conj()))


def random_pure(rng):
    psi = rng.normal(size=4) + 1j * rng.normal(size=4)
    return psi / np.linalg.norm(psi)


def random_x_state(rng):
    d = rng.dirichlet(np.ones(4))
    rho = np.diag(d).astype(complex)
    z1 = math.sqrt(d[0] * d[1]) * rng.uniform() * np.exp(1j * rng.uniform(0, 2 * math.pi))
    z2 = math.sqrt(d[2] * d[3]) * rng.uniform() * np.exp(1j * rng.uniform(0, 2 * math.pi))
    rho[0, 1], rho[1, 0] = z1, np.conj(z1)
    rho[2, 3], rho[3, 2] = z2, np.conj(z2)
    return rho


def test_bell_is_maximal():
    assert ent.concurrence(bell()) == pytest.approx(1.0, abs=1e-12)


def test_maximally_mixed_is_zero():
    assert ent.concurrence(np.eye(4) / 4) == 0.0


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0])
def test_werner_family(p):
    assert ent.concurrence(werner(p)) == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-12)


def test_product_state_is_zero():
    psi = np.kron([1, 0], [math.cos(0.3), math.sin(0.3)])
    assert ent.concurrence(pure_tensor(psi)) == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_pure_state_matches_coefficient_formula(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = random_pure(rng)  # tensor order ee, eg, ge, gg
    rho = pure_tensor(np.array([a, b, c, d]))
    assert ent.concurrence(rho) == pytest.approx(2 * abs(a * d - b * c), abs=1e-10)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_x_state_closed_form_agrees(seed):
    rho = random_x_state(np.random.default_rng(seed))
    report = ent.wootters_concurrence(rho)
    assert report.x_state_closed_form is not None
    assert report.wootters == pytest.approx(report.x_state_closed_form, abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(seeds)
def test_local_unitary_invariance(seed):
    rng = np.random.default_rng(seed)
    psi = random_pure(rng)
    rho = 0.7 * pure_tensor(psi) + 0.3 * np.eye(4) / 4
    ua = scipy.stats.unitary_group.rvs(2, random_state=rng)
    ub = scipy.stats.unitary_group.rvs(2, random_state=rng)
    u = M.tensor_to_computational(np.kron(ua, ub))
    rotated = u @ rho @ u.conj().T
    assert ent.concurrence(rotated) == pytest.approx(ent.concurrence(rho), abs=1e-10)


def test_spin_flip_values_descending_and_nonnegative():
    lam = ent.spin_flip_eigenvalues(werner(0.6))
    assert np.all(np.diff(lam) <= 1e-15)
    assert np.all(lam >= 0)


def test_non_x_state_has_no_closed_form():
    rho = pure_tensor(np.array([0.5, 0.5, 0.5, 0.5]))
    assert not ent.is_x_state(rho)
    assert ent.wootters_concurrence(rho).x_state_closed_form is None
    with pytest.raises(PatternError):
        ent.x_state_concurrence(rho)


@pytest.mark.parametrize("bad", [
    np.eye(3) / 3,
    np.eye(4) / 2,
    np.array([[0.5, 1], [0, 0.5]]).repeat(2, 0).repeat(2, 1) / 2,
    np.diag([1.5, -0.5, 0, 0]),
    np.full((4, 4), np.nan),
])
def test_invalid_states_rejected(bad):
    with pytest.raises(InvalidStateError):
        ent.concurrence(bad)


def test_cutoff_form_examples():
    assert ent.paper_cutoff_concurrence(bell()) == 0.0
    rho = np.diag([0.0, 0.0, 0.5, 0.5]).astype(complex)
    rho[2, 3] = rho[3, 2] = 0.5
    assert ent.paper_cutoff_concurrence(rho) == pytest.approx(0.5)
    assert ent.concurrence(rho) == pytest.approx(1.0, abs=1e-12)


def test_cutoff_form_at_quarter_period_point():
    # cos(sqrt6 gt) = 0, theta = pi/2, r = 1: rho_34 = 1/6, rho_11 rho_22 = (4/9)(5/9)... both vanish
    tc = M.TavisCummingsParams()
    gt = math.pi / (2 * math.sqrt(6))
    rho = M.tc_reduced_state_analytic(tc, M.InitialStateFamily(1.0, math.pi / 2), gt)
    assert ent.paper_cutoff_concurrence(rho) == 0.0
    assert ent.concurrence(rho) == pytest.approx(0.0, abs=1e-12)


def test_energy_examples():
    gg = np.diag([0, 1, 0, 0]).astype(complex)
    assert ent.energy_h0(gg, omega0=1.0) == -1.0
    tc = M.TavisCummingsParams()
    rho = M.tc_reduced_state_analytic(tc, M.InitialStateFamily(1.0, math.pi / 2), math.pi / math.sqrt(6))
    assert ent.energy_h0(rho) == pytest.approx(-7 / 9, abs=1e-14)
    assert ent.energy_hI_ising(bell(), g=2.0) == pytest.approx(2.0)
    assert ent.energy_hI_ising(bell(), g=2.0, half=True) == pytest.approx(1.0)


def test_energy_matches_operator_expectation():
    rng = np.random.default_rng(3)
    psi = random_pure(rng)
    rho = pure_tensor(psi)
    sz = M.tensor_to_computational(0.5 * (np.kron(M.SIGMA_Z, M.I2) + np.kron(M.I2, M.SIGMA_Z)))
    xx = M.tensor_to_computational(np.kron(M.SIGMA_X, M.SIGMA_X))
    assert ent.energy_h0(rho, 1.7) == pytest.approx(1.7 * np.trace(sz @ rho).real, abs=1e-14)
    # energy_hI_ising assumes X form; test on an X state
    x = random_x_state(rng)
    assert ent.energy_hI_ising(x, 0.9) == pytest.approx(0.9 * np.trace(xx @ x).real, abs=1e-14)


@pytest.mark.parametrize("r", [0.0, 0.3, 1.0])
def test_purity_of_family(r):
    rho = M.build_initial_qubit_state(M.InitialStateFamily(r, 0.7))
    assert ent.purity(rho) == pytest.approx((1 + 3 * r * r) / 4, abs=1e-14)
