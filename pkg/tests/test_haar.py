from __future__ import annotations

import numpy as np
import pytest

from locacc.haar import (
    bloch_grid,
    make_rng,
    sample_local_product_basis,
    sample_product_basis_matrices,
    sample_product_states,
    sample_pure_state,
    sample_pure_states,
    sample_unitaries,
    spawn,
)

from conftest import random_state


def test_one_dimensional_state():
    s = sample_pure_state(1, make_rng(0))
    assert s.shape == (1,) and abs(abs(s[0]) - 1) < 1e-15


def test_states_normalized():
    s = sample_pure_states(5, 100, make_rng(1))
    assert np.allclose(np.linalg.norm(s, axis=1), 1, atol=1e-12)


def test_first_moment_qubit():
    n = 100_000
    s = sample_pure_states(2, n, make_rng(2))
    proj = np.einsum("ni,nj->nij", s, s.conj())
    mean = proj.mean(axis=0)
    se = proj.std(axis=0) / np.sqrt(n)
    assert np.all(np.abs(mean - np.eye(2) / 2) <= 3 * se + 1e-15)


def test_first_moment_against_state():
    rng = make_rng(3)
    rho = random_state(4, rng)
    s = sample_pure_states(4, 100_000, rng)
    f = np.real(np.einsum("ni,ij,nj->n", s.conj(), rho.matrix, s))
    assert abs(f.mean() - 0.25) <= 3 * f.std() / np.sqrt(f.size)


def test_unitaries_are_unitary():
    u = sample_unitaries(4, 50, make_rng(4))
    eye = np.einsum("nji,njk->nik", u.conj(), u)
    assert np.max(np.abs(eye - np.eye(4))) < 1e-12


def test_unitary_distribution_phase_fixed():
    # Haar: E|U_00|^2 = 1/d and E U_00 = 0
    u = sample_unitaries(3, 40_000, make_rng(5))[:, 0, 0]
    assert abs(np.mean(np.abs(u) ** 2) - 1 / 3) < 0.01
    assert abs(np.mean(u)) < 0.01


def test_product_basis_orthonormal():
    b = sample_local_product_basis(2, 2, make_rng(6))
    m = b.matrix()
    assert m.shape == (4, 4)
    assert np.max(np.abs(m.conj().T @ m - np.eye(4))) < 1e-12
    for v in b.vectors():
        # Schmidt rank one
        assert np.linalg.matrix_rank(v.reshape(2, 2), tol=1e-10) == 1


def test_product_basis_marginal():
    rng = make_rng(7)
    n = 100_000
    bases = sample_product_basis_matrices((2, 3), n, rng)
    first = bases[:, :, 0].reshape(n, 2, 3)
    a_factor = first[:, :, 0] / np.linalg.norm(first[:, :, 0], axis=1, keepdims=True)
    proj = np.einsum("ni,nj->nij", a_factor, a_factor.conj())
    se = proj.std(axis=0) / np.sqrt(n)
    assert np.all(np.abs(proj.mean(axis=0) - np.eye(2) / 2) <= 3 * se + 1e-15)


def test_basis_matrices_match_single_draws():
    a = sample_product_basis_matrices((2, 3), 4, make_rng(8))
    eye = np.einsum("nji,njk->nik", a.conj(), a)
    assert np.max(np.abs(eye - np.eye(6))) < 1e-12


def test_determinism():
    a = sample_local_product_basis(2, 3, make_rng(9)).matrix()
    b = sample_local_product_basis(2, 3, make_rng(9)).matrix()
    assert np.array_equal(a, b)
    x = [g.standard_normal(3) for g in spawn(4, 2)]
    y = [g.standard_normal(3) for g in spawn(4, 2)]
    assert np.array_equal(x[0], y[0]) and not np.array_equal(x[0], x[1])


def test_product_states_shape():
    s = sample_product_states((2, 2, 3), 10, make_rng(10))
    assert s.shape == (10, 12)
    assert np.allclose(np.linalg.norm(s, axis=1), 1)


def test_grid_weights():
    g = bloch_grid(16, 12)
    assert g.nodes.shape == (16 * 12, 2)
    assert g.integrate(np.ones(len(g.weights))) == pytest.approx(1.0, abs=1e-14)
    assert np.all(g.weights > 0)
    assert np.allclose(np.linalg.norm(g.nodes, axis=1), 1)


def test_grid_rejects_tiny():
    with pytest.raises(ValueError):
        bloch_grid(1, 4)


def test_grid_first_and_second_moment():
    rng = make_rng(11)
    g = bloch_grid(64, 64)
    for _ in range(5):
        rho = random_state(2, rng)
        f = np.real(np.einsum("ni,ij,nj->n", g.nodes.conj(), rho.matrix, g.nodes))
        assert abs(2 * g.integrate(f) - 1) < 1e-12
        purity = np.real(np.trace(rho.matrix @ rho.matrix))
        assert abs(2 * g.integrate(f ** 2) - (1 + purity) / 3) < 1e-12


def test_grid_second_moment_monte_carlo_agrees():
    rng = make_rng(12)
    rho = random_state(2, rng)
    s = sample_pure_states(2, 200_000, rng)
    f = np.real(np.einsum("ni,ij,nj->n", s.conj(), rho.matrix, s)) ** 2
    purity = np.real(np.trace(rho.matrix @ rho.matrix))
    assert abs(2 * f.mean() - (1 + purity) / 3) <= 3 * 2 * f.std() / np.sqrt(f.size)


def test_grid_polynomial_exactness():
    g = bloch_grid(8, 8)
    t = np.arccos(np.clip(2 * np.abs(g.nodes[:, 0]) ** 2 - 1, -1, 1))
    x = np.cos(t)
    # mean of x^k over the sphere: 1/(k+1) for even k, 0 for odd
    for k in range(0, 15):
        expected = 1 / (k + 1) if k % 2 == 0 else 0.0
        assert g.integrate(x ** k) == pytest.approx(expected, abs=1e-12)


def test_grid_cached():
    assert bloch_grid(32, 32) is bloch_grid(32, 32)
