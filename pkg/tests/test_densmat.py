from __future__ import annotations

import numpy as np
import pytest

from locacc import errors
from locacc.densmat import (
    conditional_operator,
    eigh,
    kron,
    maximally_mixed,
    partial_trace,
    product_state,
    projector,
    pure_density,
    validate_density_matrix,
    ket,
)
from locacc.ensembles import bell_states
from locacc.haar import make_rng, sample_pure_states, sample_unitary

from conftest import random_state

PHI_P, _, _, PSI_M = bell_states()


def test_maximally_mixed_valid():
    d = validate_density_matrix(np.eye(4) / 4, (2, 2))
    assert d.dims == (2, 2)
    assert d.dim == 4


def test_pure_projector_rank_one():
    d = pure_density(ket(1, 0, 0, 0), (2, 2))
    w, _ = eigh(d)
    assert np.count_nonzero(w > 1e-12) == 1


def test_negative_eigenvalue_rejected():
    with pytest.raises(errors.NegativeEigenvalue):
        validate_density_matrix(np.diag([0.6, 0.6, -0.2, 0.0]), (2, 2))


def test_non_hermitian_rejected():
    m = np.eye(2) / 2
    m = m.astype(complex)
    m[0, 1] = 0.1
    with pytest.raises(errors.NonHermitian) as exc:
        validate_density_matrix(m)
    assert "1.000e-01" in str(exc.value)


def test_trace_deviation_rejected():
    with pytest.raises(errors.TraceDeviation):
        validate_density_matrix(np.eye(2) * 0.6)


def test_small_negative_eigenvalue_clamped():
    m = np.diag([0.5 + 5e-11, 0.5, -5e-11])
    d = validate_density_matrix(m)
    w = np.linalg.eigvalsh(d.matrix)
    assert w.min() >= -1e-15
    assert abs(np.trace(d.matrix).real - 1) < 1e-14


def test_dimension_checks():
    with pytest.raises(errors.DimensionMismatch):
        validate_density_matrix(np.eye(4) / 4, (2, 3))
    with pytest.raises(errors.DimensionMismatch):
        validate_density_matrix(np.ones((2, 3)))


def test_eigh_diagonal():
    w, _ = eigh(validate_density_matrix(np.diag([1 / 3, 1 / 3, 1 / 3, 0]), (2, 2)))
    assert np.allclose(w, [1 / 3, 1 / 3, 1 / 3, 0], atol=1e-14)


def test_eigh_two_pure_qubit_states():
    # overlap |<0|+>|^2 = 1/2 gives the spectrum cos^2(pi/8), sin^2(pi/8)
    m = (projector(ket(1, 0)) + projector(ket(1, 1))) / 2
    w, _ = eigh(validate_density_matrix(m))
    assert np.allclose(w, [np.cos(np.pi / 8) ** 2, np.sin(np.pi / 8) ** 2], atol=1e-12)


def test_eigh_two_pure_product_states():
    # |<00|++>|^2 = 1/4, so the eigenvalues are (1 +- 1/2) / 2
    m = (projector(ket(1, 0, 0, 0)) + projector(ket(1, 1, 1, 1))) / 2
    w, _ = eigh(validate_density_matrix(m, (2, 2)))
    assert np.allclose(w, [0.75, 0.25, 0, 0], atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 6, 9])
def test_eigh_random_reconstruction(d):
    rho = random_state(d, make_rng(d))
    w, v = eigh(rho)
    assert np.max(np.abs(v.conj().T @ v - np.eye(d))) < 1e-10
    assert np.max(np.abs((v * w) @ v.conj().T - rho.matrix)) < 1e-10
    assert abs(w.sum() - 1) < 1e-10
    assert np.all(np.diff(w) <= 0)


def test_eigh_unitary_covariance():
    rng = make_rng(8)
    rho = random_state(4, rng)
    u = sample_unitary(4, rng)
    w1, _ = eigh(rho)
    w2, _ = eigh(validate_density_matrix(u @ rho.matrix @ u.conj().T))
    assert np.max(np.abs(w1 - w2)) < 1e-9


def test_kron_examples():
    assert np.array_equal(kron(np.eye(2), np.eye(2)), np.eye(4))
    assert np.array_equal(kron([1, 0], [0, 1]), [0, 1, 0, 0])
    x = np.array([[0, 1], [1, 0]])
    assert np.array_equal(kron(x, np.eye(2)) @ np.array([1, 0, 0, 0]), [0, 0, 1, 0])


def test_kron_size_cap():
    with pytest.raises(errors.SizeCap):
        kron(np.ones((100, 100)), np.ones((100, 100)))


def test_partial_trace_bell():
    red = partial_trace(pure_density(PHI_P, (2, 2)), 0)
    assert np.allclose(red.matrix, np.eye(2) / 2)


def test_partial_trace_product(rng):
    for _ in range(5):
        a = random_state(2, rng)
        b = random_state(3, rng)
        ab = product_state(a, b)
        assert np.max(np.abs(partial_trace(ab, 0).matrix - a.matrix)) < 1e-12
        assert np.max(np.abs(partial_trace(ab, 1).matrix - b.matrix)) < 1e-12


def test_partial_trace_tripartite(rng):
    a, b, c = random_state(2, rng), random_state(3, rng), random_state(2, rng)
    abc = product_state(a, b, c)
    assert abc.dims == (2, 3, 2)
    assert np.allclose(partial_trace(abc, 1).matrix, b.matrix, atol=1e-12)


def test_partial_trace_bad_index():
    with pytest.raises(errors.BadPartyIndex):
        partial_trace(maximally_mixed((2, 2)), 2)


def test_conditional_bell():
    w, c = conditional_operator(pure_density(PHI_P, (2, 2)), ket(1, 0))
    assert w == pytest.approx(0.5)
    assert np.allclose(c.matrix, np.diag([1, 0]))


def test_conditional_three_bell_average(rng):
    sigma = validate_density_matrix((np.eye(4) - projector(PSI_M)) / 3, (2, 2))
    for alpha in sample_pure_states(2, 5, rng):
        w, c = conditional_operator(sigma, alpha)
        assert w == pytest.approx(0.5, abs=1e-12)
        assert np.allclose(np.linalg.eigvalsh(c.matrix), [1 / 3, 2 / 3], atol=1e-12)


def test_conditional_product(rng):
    a, b = random_state(2, rng), random_state(3, rng)
    alpha = sample_pure_states(2, 1, rng)[0]
    w, c = conditional_operator(product_state(a, b), alpha)
    assert w == pytest.approx(float(np.real(alpha.conj() @ a.matrix @ alpha)))
    assert np.allclose(c.matrix, b.matrix, atol=1e-12)


def test_conditional_undefined_weight():
    w, c = conditional_operator(pure_density(ket(1, 0, 0, 0), (2, 2)), ket(0, 1))
    assert w == 0.0 and c is None


def test_conditional_dimension_mismatch():
    with pytest.raises(errors.DimensionMismatch):
        conditional_operator(maximally_mixed((2, 2)), ket(1, 0, 0))


def test_conditional_weights_average(rng):
    sigma = random_state(6, rng, (2, 3))
    alphas = sample_pure_states(2, 4000, rng)
    ws = np.array([conditional_operator(sigma, a)[0] for a in alphas])
    # 2 E[w] = 1 for Haar alpha
    assert abs(2 * ws.mean() - 1) < 5 * 2 * ws.std() / np.sqrt(ws.size)
