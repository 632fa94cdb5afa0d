from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from locacc import errors
from locacc.bounds import lambda_L
from locacc.densmat import ket, projector, validate_density_matrix
from locacc.ensembles import parse_ensemble
from locacc.haar import make_rng, sample_product_basis_matrices, sample_unitaries
from locacc.scrooge import (
    constancy_check,
    mode_agreement,
    sample_information,
    sample_scrooge,
    scrooge_density,
)

from conftest import random_state


def test_density_two_level_uniform():
    lam = [0.5, 0.5]
    total, _ = integrate.quad(lambda x: scrooge_density([x, 1 - x], lam), 0, 1)
    assert total == pytest.approx(1.0, abs=1e-10)
    assert scrooge_density([0.3, 0.7], lam) == pytest.approx(1.0)


def test_density_two_level_random():
    lam = [0.8, 0.2]
    total, _ = integrate.quad(lambda x: scrooge_density([x, 1 - x], lam), 0, 1)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_density_three_level():
    lam = make_rng(1).dirichlet(np.ones(3))
    total, _ = integrate.dblquad(lambda y, x: scrooge_density([x, y, 1 - x - y], lam),
                                 0, 1, 0, lambda x: 1 - x, epsabs=1e-10, epsrel=1e-10)
    assert total == pytest.approx(1.0, abs=1e-6)


def test_density_point_mass_and_support():
    assert scrooge_density([1, 0, 0], [1, 0, 0]) == 1.0
    with pytest.raises(errors.SupportMismatch):
        scrooge_density([0.5, 0.5, 0], [1, 0, 0])
    with pytest.raises(errors.SupportMismatch):
        scrooge_density([1, 0], [1, 0, 0])


def test_density_matches_sampler_histogram():
    rho = validate_density_matrix(np.diag([0.75, 0.25]))
    s = sample_scrooge(rho, 200_000, make_rng(2))
    x = np.abs(s.states[:, 0]) ** 2
    edges = np.linspace(0, 1, 11)
    hist, _ = np.histogram(x, bins=edges, weights=s.weights)
    for lo, hi, h in zip(edges, edges[1:], hist):
        expected, _ = integrate.quad(lambda t: scrooge_density([t, 1 - t], [0.75, 0.25]), lo, hi)
        assert abs(h - expected) < 0.01


def test_pure_state():
    v = ket(1, 1j, 0)
    s = sample_scrooge(validate_density_matrix(projector(v)), 100, make_rng(3))
    overlaps = np.abs(s.states @ v.conj()) ** 2
    assert np.allclose(overlaps, 1, atol=1e-12)
    assert np.allclose(s.weights, 1 / 100)


def test_pure_state_spread_zero():
    v = np.kron(ket(1, 1), ket(1, 0))
    s = sample_scrooge(validate_density_matrix(projector(v), (2, 2)), 200, make_rng(4))
    c = constancy_check(s, 20, make_rng(5))
    assert c.spread <= 1e-12 and c.mean == pytest.approx(0, abs=1e-12)


def test_maximally_mixed_uniform():
    s = sample_scrooge(validate_density_matrix(np.eye(3) / 3), 500, make_rng(6))
    assert np.allclose(s.weights, 1 / 500, atol=1e-15)


def test_weights_and_norms():
    s = sample_scrooge(random_state(4, make_rng(7), dims=(2, 2)), 1000, make_rng(8))
    assert s.weights.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.all(s.weights > 0)
    assert np.allclose(np.linalg.norm(s.states, axis=1), 1, atol=1e-12)


def test_support_confinement():
    rho = random_state(4, make_rng(9), rank=2)
    s = sample_scrooge(rho, 500, make_rng(10))
    w, v = np.linalg.eigh(rho.matrix)
    null = v[:, w < 1e-10]
    assert np.max(np.abs(s.states @ null.conj())) < 1e-10


def test_recovery_qubit():
    rho = random_state(2, make_rng(11), rank=2)
    s = sample_scrooge(rho, 100_000, make_rng(12))
    err, scale = s.recovery()
    assert err <= 5 * scale


def test_rejects_zero_samples():
    with pytest.raises(errors.ValidationError):
        sample_scrooge(random_state(2, make_rng(0)), 0)


def test_covariance():
    rng = make_rng(13)
    rho = random_state(3, rng)
    u = sample_unitaries(3, 1, rng)[0]
    rot = validate_density_matrix(u @ rho.matrix @ u.conj().T)
    m = random_state(3, rng).matrix
    a = sample_scrooge(rho, 50_000, make_rng(14))
    b = sample_scrooge(rot, 50_000, make_rng(15))
    fa = np.real(np.einsum("ni,ij,nj->n", a.states.conj(), u.conj().T @ m @ u, a.states))
    fb = np.real(np.einsum("ni,ij,nj->n", b.states.conj(), m, b.states))
    ma, mb = a.weights @ fa, b.weights @ fb
    va = np.sqrt(a.weights ** 2 @ (fa - ma) ** 2)
    vb = np.sqrt(b.weights ** 2 @ (fb - mb) ** 2)
    assert abs(ma - mb) <= 4 * math.hypot(va, vb)


def test_single_qubit_global_within_noise():
    s = sample_scrooge(validate_density_matrix(np.eye(2) / 2), 20_000, make_rng(16))
    c = constancy_check(s, 50, make_rng(17), mode="global")
    assert c.within_noise


def test_spread_shrinks():
    rng = make_rng(18)
    rho = random_state(4, rng, dims=(2, 2))
    bases = sample_product_basis_matrices((2, 2), 30, rng)
    spreads = [constancy_check(sample_scrooge(rho, n, make_rng(n)), 30, bases=bases).spread
               for n in (1_000, 10_000, 100_000)]
    assert spreads[0] > spreads[1] > spreads[2]


def test_product_vs_global():
    rng = make_rng(19)
    rho = random_state(4, rng, dims=(2, 2))
    s = sample_scrooge(rho, 50_000, make_rng(20))
    diff, sigma = mode_agreement(s, sample_product_basis_matrices((2, 2), 40, rng), sample_unitaries(4, 40, rng))
    assert abs(diff) <= 3 * sigma


def test_product_mean_matches_quadrature_of_discretized():
    rng = make_rng(21)
    rho = random_state(4, rng, dims=(2, 2))
    s = sample_scrooge(rho, 300, make_rng(22))
    e = parse_ensemble(s.to_dict())
    c = constancy_check(s, 3000, make_rng(23))
    q = lambda_L(e, "quadrature").value
    assert abs(c.mean - q) <= 3 * c.std_error


def test_sample_information_basis_invariance():
    rng = make_rng(24)
    s = sample_scrooge(random_state(3, rng), 100, rng)
    b = sample_unitaries(3, 1, rng)[0]
    a = sample_information(s.states, s.weights, b)
    c = sample_information(s.states, s.weights, b[:, [2, 0, 1]] * np.exp(1j * np.array([0.3, 1, 2])))
    assert a == pytest.approx(c, abs=1e-12)


def test_to_dict_round_trip():
    s = sample_scrooge(random_state(4, make_rng(25), dims=(2, 2)), 10, make_rng(26))
    e = parse_ensemble(s.to_dict())
    assert e.dims == (2, 2) and len(e) == 10
