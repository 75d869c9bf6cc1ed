import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.linalg import expm

from wallstate.linalg import PAULI, haar_random_ket, random_unitary
from wallstate.manifold import (
    ComplexSphere,
    DescentConfig,
    DescentStalled,
    TangentError,
    UnitaryGroup,
    descend,
    grad_check,
    project_su,
    sphere_retract,
    su_retract,
)

seeds = st.integers(0, 2**32 - 1)


def test_su_retract_zero_step(rng):
    U = random_unitary(3, rng)
    T = UnitaryGroup(3).random_tangent(U, rng)
    assert su_retract(U, T, 0.0) is U


def test_su_retract_closed_form():
    out = su_retract(np.eye(2), 1j * PAULI["z"], np.pi / 2)
    assert np.allclose(out, np.diag([np.exp(-1j * np.pi / 2), np.exp(1j * np.pi / 2)]), atol=1e-14)


def test_su_retract_rejects_bad_direction():
    with pytest.raises(TangentError):
        su_retract(np.eye(2), PAULI["z"], 0.1)


def test_su_retract_stays_unitary(rng):
    man = UnitaryGroup(4)
    U = project_su(random_unitary(4, rng))
    for _ in range(1000):
        U = su_retract(U, man.random_tangent(U, rng), rng.uniform(0, 0.5))
    assert np.linalg.norm(U.conj().T @ U - np.eye(4)) < 1e-10
    assert abs(np.linalg.det(U) - 1) < 1e-9


def test_sphere_retract_zero_step(rng):
    w = haar_random_ket(3, rng)
    assert sphere_retract(w, rng.standard_normal(3) + 0j, 0.0) is w


def test_sphere_parallel_direction_is_phase(rng):
    w = haar_random_ket(3, rng)
    out = sphere_retract(w, -2.5 * w, 0.3)
    assert abs(abs(np.vdot(w, out)) - 1) < 1e-12


@pytest.mark.parametrize("eps", [1e-3, 1e-2, 0.1])
def test_sphere_great_circle(eps):
    w = np.array([1, 0], dtype=complex)
    X = np.array([0, 1], dtype=complex)
    out = sphere_retract(w, -X, eps)
    gen = np.outer(X, w.conj()) - np.outer(w, X.conj())
    ref = expm(eps * gen) @ w
    assert np.linalg.norm(out - ref) < 1e-12
    # first order motion towards |1⟩
    assert np.linalg.norm(out - (w + eps * X)) < eps**2


@given(seeds, st.integers(2, 5))
def test_sphere_retract_unit_norm(seed, n):
    rng = np.random.default_rng(seed)
    w = haar_random_ket(n, rng)
    for _ in range(50):
        w = sphere_retract(w, rng.standard_normal(n) + 1j * rng.standard_normal(n), rng.uniform(0, 1))
    assert abs(np.linalg.norm(w) - 1) < 1e-12


def _overlap_cost(n):
    e0 = np.zeros(n, dtype=complex)
    e0[0] = 1

    def cost(w):
        return 1 - abs(np.vdot(e0, w)) ** 2

    def grad(w):
        # phase-invariant cost: the projected Euclidean gradient is already Riemannian
        eg = -2 * e0 * np.vdot(e0, w)
        return eg - w * np.vdot(w, eg).real

    return cost, grad


def test_descend_sphere_overlap(rng):
    cost, grad = _overlap_cost(3)
    man = ComplexSphere(3)
    tr = descend(man, cost, grad, haar_random_ket(3, rng), DescentConfig(g_min=1e-12))
    assert tr.cost < 1e-8
    assert abs(abs(tr.x[0]) - 1) < 1e-4
    assert all(b <= a for a, b in zip(tr.costs, tr.costs[1:]))


def test_overlap_gradient_checks(rng):
    cost, grad = _overlap_cost(3)
    man = ComplexSphere(3)
    for _ in range(10):
        assert grad_check(man, cost, grad, haar_random_ket(3, rng), rng=rng) < 1e-7


def test_linear_sphere_cost_gradient(rng):
    n = 4
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    A = A + A.conj().T

    def cost(w):
        return float(np.vdot(w, A @ w).real)

    def grad(w):
        e = 2 * A @ w
        return e - w * np.vdot(w, e).real

    man = ComplexSphere(n)
    for _ in range(5):
        assert grad_check(man, cost, grad, haar_random_ket(n, rng), rng=rng) < 1e-7


def test_descend_stationary_start():
    man = UnitaryGroup(2)
    tr = descend(man, lambda u: 0.0, lambda u: np.zeros((2, 2), dtype=complex), np.eye(2, dtype=complex))
    assert tr.iterations == 0
    assert tr.reason == "gradient"


def test_descend_is_deterministic(toy_frame):
    prob, _ = toy_frame
    U0 = project_su(random_unitary(4, np.random.default_rng(7)))
    cfg = DescentConfig(max_iter=200)
    a = descend(UnitaryGroup(4), prob.cost_J_reg, prob.grad_J_reg, U0, cfg)
    b = descend(UnitaryGroup(4), prob.cost_J_reg, prob.grad_J_reg, U0, cfg)
    assert a.costs == b.costs
    assert np.array_equal(a.x, b.x)


def test_descend_monotone_on_frame_cost(toy_frame):
    prob, _ = toy_frame
    U0 = project_su(random_unitary(4, np.random.default_rng(8)))
    tr = descend(UnitaryGroup(4), prob.cost_J_reg, prob.grad_J_reg, U0, DescentConfig(g_min=1e-26))
    assert all(b <= a for a, b in zip(tr.costs, tr.costs[1:]))
    assert UnitaryGroup(4).check(tr.x) < 1e-9


def test_descend_stall_carries_trace():
    # gradient pointing the wrong way: no Armijo step exists
    man = ComplexSphere(2)
    cost, grad = _overlap_cost(2)
    w0 = np.array([0.6, 0.8], dtype=complex)
    with pytest.raises(DescentStalled) as exc:
        descend(man, cost, lambda w: -grad(w), w0, DescentConfig(max_contractions=20))
    assert exc.value.trace.x is w0


def test_descent_config_validation():
    with pytest.raises(ValueError):
        DescentConfig(beta=1.5)
    with pytest.raises(ValueError):
        DescentConfig(eps0=0)


def test_grad_check_probe_range(rng):
    cost, grad = _overlap_cost(2)
    with pytest.raises(ValueError):
        grad_check(ComplexSphere(2), cost, grad, haar_random_ket(2, rng), h=1e-2)
