import numpy as np
import pytest

from qlustering.numerics import (
    commutator_superop,
    dissipator_superop,
    integrate_master_equation,
    is_hermitian,
    null_space,
    rk4_propagator,
    unvec,
    vec,
)


def test_vec_convention():
    rng = np.random.default_rng(0)
    a, x, b = (rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3)) for _ in range(3))
    assert np.allclose(np.kron(a, b.T) @ vec(x), vec(a @ x @ b))
    assert np.array_equal(unvec(vec(x)), x)
    with pytest.raises(ValueError):
        unvec(np.zeros(5))


def test_null_space_of_zero_matrix_is_everything():
    basis = null_space(np.zeros((2, 2)))
    assert len(basis) == 2


def test_null_space_of_identity_is_empty():
    assert null_space(np.eye(3)) == []


def test_null_space_rank_one():
    (v,) = null_space(np.array([[1.0, 1.0], [1.0, 1.0]]))
    v = v * np.sign(v[0].real)
    assert np.allclose(v, np.array([1, -1]) / np.sqrt(2), atol=1e-14)


def test_null_space_errors():
    with pytest.raises(ValueError):
        null_space(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        null_space(np.eye(2), tol=0)
    with pytest.raises(ValueError):
        null_space(np.eye(2), tol=-1e-3)


def test_null_space_orthonormal_and_small_residual():
    rng = np.random.default_rng(3)
    b = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    a = b @ b.conj().T  # rank 3
    basis = null_space(a, tol=1e-10)
    assert len(basis) == 3
    V = np.array(basis)
    assert np.allclose(V.conj() @ V.T, np.eye(3), atol=1e-10)
    norm = np.linalg.norm(a, 2)
    for v in basis:
        assert np.linalg.norm(a @ v) <= 1e-10 * norm


def test_commutator_and_dissipator_match_direct_action():
    rng = np.random.default_rng(1)
    h = rng.standard_normal((3, 3))
    h = h + h.T
    v = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    x = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    direct_c = -1j * (h @ x - x @ h)
    vdv = v.conj().T @ v
    direct_d = v @ x @ v.conj().T - 0.5 * (vdv @ x + x @ vdv)
    assert np.allclose(unvec(commutator_superop(h) @ vec(x)), direct_c)
    assert np.allclose(unvec(dissipator_superop(v) @ vec(x)), direct_d)


def test_rk4_propagator_equals_four_stage_step():
    rng = np.random.default_rng(2)
    A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    x = rng.standard_normal(4) + 0j
    dt = 0.03
    k1 = A @ x
    k2 = A @ (x + dt / 2 * k1)
    k3 = A @ (x + dt / 2 * k2)
    k4 = A @ (x + dt * k3)
    stepped = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    assert np.allclose(rk4_propagator(A, dt) @ x, stepped, atol=1e-14)


def test_integrator_zero_generator_leaves_state():
    rho0 = np.diag([0.25, 0.75]).astype(complex)
    out = integrate_master_equation(np.zeros((4, 4)), rho0, 10.0)
    assert np.array_equal(out, rho0)


def test_integrator_rabi_transfer():
    h = 0.7
    ham = np.array([[0, h], [h, 0]])
    rho0 = np.diag([1.0, 0.0]).astype(complex)
    out = integrate_master_equation(commutator_superop(ham), rho0, np.pi / (2 * h))
    assert abs(out[1, 1].real - 1.0) < 1e-6
    assert abs(np.trace(out) - 1) < 1e-9


def test_integrator_repeated_squaring_matches_loop():
    rng = np.random.default_rng(5)
    ham = rng.standard_normal((2, 2))
    ham = ham + ham.T
    v = np.array([[0, 1], [0, 0]], dtype=complex)
    gen = commutator_superop(ham) + dissipator_superop(v)
    rho0 = np.diag([0.0, 1.0]).astype(complex)
    dt = 0.01
    step = rk4_propagator(gen, dt)
    x = vec(rho0)
    for _ in range(300):
        x = step @ x
    assert np.allclose(integrate_master_equation(gen, rho0, 3.0, dt), unvec(x), atol=1e-12)


def test_integrator_dimension_mismatch():
    with pytest.raises(ValueError):
        integrate_master_equation(np.zeros((9, 9)), np.eye(2) / 2, 1.0)
    with pytest.raises(ValueError):
        integrate_master_equation(np.zeros((4, 4)), np.eye(2) / 2, 1.0, dt=0)


def test_is_hermitian():
    assert is_hermitian(np.array([[1, 1j], [-1j, 2]]))
    assert not is_hermitian(np.array([[1, 1j], [1j, 2]]))
    assert not is_hermitian(np.zeros((2, 3)))
