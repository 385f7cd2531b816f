import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hst

from spintel import (BlochAngles, ContractViolation, DomainError,
                     EnsembleState, apply_rotation, make_dicke,
                     make_spin_coherent, q_function, q_function_grid, r_matrix,
                     r_matrix_reference, spin_expectation)
from spintel.spincore import (half_pi_y_rotation, sx_matrix, sy_matrix,
                              sz_matrix)

from conftest import (collective_operator, product_state, qubit_at,
                      random_state, symmetric_embedding)


# ---------------------------------------------------------------------------
# Dicke and coherent states
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,k,expected", [
    (2, 0, [1, 0, 0]),
    (2, 2, [0, 0, 1]),
    (1, 1, [0, 1]),
])
def test_dicke_basis_vectors(n, k, expected):
    state = make_dicke(n, k)
    np.testing.assert_allclose(state.amplitudes, expected)


def test_dicke_out_of_range():
    with pytest.raises(DomainError):
        make_dicke(3, 4)
    with pytest.raises(DomainError):
        make_dicke(3, -1)


def test_coherent_poles():
    # the pole amplitude carries the defining phase exp(-i phi N / 2)
    north = make_spin_coherent(5, BlochAngles(0.0, 1.3))
    assert abs(abs(north.amplitudes[5]) - 1.0) < 1e-15
    assert abs(north.amplitudes[5] - np.exp(-0.5j * 1.3 * 5)) < 1e-14
    assert np.all(np.abs(north.amplitudes[:5]) == 0.0)
    south = make_spin_coherent(5, BlochAngles(math.pi, 0.0))
    assert abs(south.amplitudes[0] - 1.0) < 1e-15


def test_coherent_equator_n2():
    state = make_spin_coherent(2, BlochAngles(math.pi / 2, 0.0))
    np.testing.assert_allclose(state.amplitudes,
                               [0.5, 1 / math.sqrt(2), 0.5], atol=1e-15)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_coherent_matches_qubit_product(n):
    theta, phi = 1.1, -2.0
    embed = symmetric_embedding(n)
    full = product_state(n, qubit_at(theta, phi))
    projected = embed.T @ full
    state = make_spin_coherent(n, BlochAngles(theta, phi))
    np.testing.assert_allclose(state.amplitudes, projected, atol=1e-14)


def test_coherent_normalized_large_n():
    state = make_spin_coherent(400, BlochAngles(0.7, 2.9))
    assert abs(state.norm_sq() - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# spin expectations
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n,k", [(4, 0), (4, 2), (7, 7)])
def test_dicke_spin_expectation(n, k):
    vec = spin_expectation(make_dicke(n, k))
    np.testing.assert_allclose(vec.as_array(), [0, 0, 2 * k - n], atol=1e-14)


@pytest.mark.parametrize("n", [1, 2, 3, 4, 9, 25])
def test_coherent_spin_expectation(n):
    theta, phi = 0.9, 2.2
    vec = spin_expectation(make_spin_coherent(n, BlochAngles(theta, phi)))
    target = n * np.array([math.sin(theta) * math.cos(phi),
                           math.sin(theta) * math.sin(phi),
                           math.cos(theta)])
    np.testing.assert_allclose(vec.as_array(), target, atol=1e-12)


def test_single_qubit_pauli_convention():
    # (|0> + |1>)/sqrt(2) points along +x when |k=1> is the +z state
    state = EnsembleState(1, np.array([1.0, 1.0]) / math.sqrt(2))
    vec = spin_expectation(state)
    np.testing.assert_allclose(vec.as_array(), [1, 0, 0], atol=1e-15)


def test_spin_expectation_matches_qubit_oracle(rng):
    n = 4
    amps = random_state(n, rng)
    state = EnsembleState(n, amps)
    vec = spin_expectation(state)
    embed = symmetric_embedding(n)
    full = embed @ amps
    for i, axis in enumerate("xyz"):
        op = collective_operator(n, axis)
        expect = np.vdot(full, op @ full).real
        assert abs(vec.as_array()[i] - expect) < 1e-12


def test_spin_expectation_rejects_unnormalized():
    state = EnsembleState(2, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ContractViolation):
        spin_expectation(state)


# ---------------------------------------------------------------------------
# rotations
# ---------------------------------------------------------------------------

def test_rotation_zero_angle_is_identity(rng):
    amps = random_state(6, rng)
    out = apply_rotation(EnsembleState(6, amps), (0.0, 1.0, 0.0), 0.0)
    np.testing.assert_allclose(out.amplitudes, amps, atol=1e-15)


def test_rotation_flips_pole():
    north = make_spin_coherent(5, BlochAngles(0.0, 0.0))
    south = make_spin_coherent(5, BlochAngles(math.pi, 0.0))
    rotated = apply_rotation(north, (0.0, 1.0, 0.0), math.pi)
    overlap = abs(np.vdot(south.amplitudes, rotated.amplitudes))
    assert abs(overlap - 1.0) < 1e-12


def test_z_rotation_shifts_azimuth():
    theta, phi, chi = 1.2, 0.4, 0.9
    start = make_spin_coherent(8, BlochAngles(theta, phi))
    rotated = apply_rotation(start, (0.0, 0.0, 1.0), chi)
    target = make_spin_coherent(8, BlochAngles(theta, phi + chi))
    overlap = abs(np.vdot(target.amplitudes, rotated.amplitudes))
    assert abs(overlap - 1.0) < 1e-12


def test_rotation_matches_qubit_oracle(rng):
    n = 3
    axis = np.array([0.3, -0.5, 0.6])
    axis /= np.linalg.norm(axis)
    angle = 1.3
    amps = random_state(n, rng)
    rotated = apply_rotation(EnsembleState(n, amps), axis, angle)
    gen = sum(a * collective_operator(n, ax) for a, ax in zip(axis, "xyz"))
    evals, evecs = np.linalg.eigh(gen)
    full_rot = (evecs * np.exp(-0.5j * angle * evals)) @ evecs.conj().T
    embed = symmetric_embedding(n)
    expected = embed.T @ (full_rot @ (embed @ amps))
    np.testing.assert_allclose(rotated.amplitudes, expected, atol=1e-12)


def test_rotation_rejects_non_unit_axis():
    with pytest.raises(DomainError):
        apply_rotation(make_dicke(3, 1), (1.0, 1.0, 0.0), 0.5)


@settings(max_examples=25, deadline=None)
@given(seed=hst.integers(0, 2**31), n=hst.integers(1, 24))
def test_rotation_preserves_norm(seed, n):
    gen = np.random.default_rng(seed)
    amps = random_state(n, gen)
    axis = gen.normal(size=3)
    axis /= np.linalg.norm(axis)
    rotated = apply_rotation(EnsembleState(n, amps), axis,
                             gen.uniform(-2 * math.pi, 2 * math.pi))
    assert abs(rotated.norm_sq() - 1.0) < 1e-12


# ---------------------------------------------------------------------------
# operator algebra
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [2, 9, 30])
def test_commutators_and_casimir(n):
    sx, sy, sz = sx_matrix(n), sy_matrix(n), sz_matrix(n)
    assert np.max(np.abs(sx @ sy - sy @ sx - 2j * sz)) < 1e-10
    assert np.max(np.abs(sy @ sz - sz @ sy - 2j * sx)) < 1e-10
    assert np.max(np.abs(sz @ sx - sx @ sz - 2j * sy)) < 1e-10
    casimir = sx @ sx + sy @ sy + sz @ sz
    assert np.max(np.abs(casimir - n * (n + 2) * np.eye(n + 1))) < 1e-10


# ---------------------------------------------------------------------------
# the pi/2 rotation matrix
# ---------------------------------------------------------------------------

def test_r_matrix_n1_pinned():
    r = r_matrix(1).entries
    s = 1 / math.sqrt(2)
    np.testing.assert_allclose(r, [[s, -s], [s, s]], atol=1e-15)


@pytest.mark.parametrize("n", [1, 7, 40, 120])
def test_r_matrix_unitary(n):
    r = r_matrix(n).entries
    assert np.max(np.abs(r.T @ r - np.eye(n + 1))) < 1e-12


@pytest.mark.parametrize("n", [2, 5, 11, 20])
def test_r_matrix_matches_factorial_oracle(n):
    r = r_matrix(n).entries
    ref = np.array([[r_matrix_reference(n, kp, k) for k in range(n + 1)]
                    for kp in range(n + 1)])
    assert np.max(np.abs(r - ref)) < 1e-10


@pytest.mark.parametrize("n", [4, 9])
def test_r_matrix_reflection_symmetry(n):
    r = r_matrix(n).entries
    for kp in range(n + 1):
        for k in range(n + 1):
            assert abs(r[n - kp, k] - (-1.0) ** k * r[kp, k]) < 1e-13


def test_r_matrix_columns_diagonalize_sx():
    n = 12
    rot = half_pi_y_rotation(n)
    sx = sx_matrix(n)
    for kp in range(n + 1):
        col = rot[:, kp]
        np.testing.assert_allclose(sx @ col, (2 * kp - n) * col, atol=1e-10)


# ---------------------------------------------------------------------------
# Q function
# ---------------------------------------------------------------------------

def test_q_self_overlap():
    state = make_spin_coherent(9, BlochAngles(1.0, -0.7))
    q = q_function(state, [BlochAngles(1.0, -0.7)])
    assert abs(q[0] - 1.0) < 1e-13


def test_q_of_top_dicke_state():
    n = 6
    state = make_dicke(n, n)
    grid = [BlochAngles(th, 0.3) for th in np.linspace(0.1, 3.0, 7)]
    q = q_function(state, grid)
    expected = [math.cos(a.theta / 2) ** (2 * n) for a in grid]
    np.testing.assert_allclose(q, expected, atol=1e-14)


def test_q_resolution_of_identity(rng):
    n = 7
    state = EnsembleState(n, random_state(n, rng))
    nodes, weights = np.polynomial.legendre.leggauss(2 * n + 4)
    thetas = np.arccos(nodes)
    n_phi = 2 * n + 3
    phis = np.linspace(-math.pi, math.pi, n_phi, endpoint=False)
    q = q_function_grid(state, thetas, phis)
    integral = float(weights @ q.sum(axis=1)) * (2 * math.pi / n_phi)
    assert abs(integral * (n + 1) / (4 * math.pi) - 1.0) < 1e-6
