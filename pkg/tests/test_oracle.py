from __future__ import annotations

import math

import numpy as np
import pytest

from locacc import errors
from locacc.bounds import holevo_chi, lambda_L
from locacc.densmat import ket
from locacc.ensembles import bell3_ensemble, e1_ensemble, make_ensemble, product8_ensemble, random_ensemble
from locacc.entropy import mutual_information_of_basis
from locacc.haar import make_rng, sample_local_product_basis
from locacc.oracle import (
    TwoStepProtocol,
    average_product_basis_mi,
    n_unitary_params,
    optimize_global_orthogonal,
    optimize_two_step_locc,
    qubit_pair,
    unitary_from_angles,
)

from conftest import random_state


def test_unitary_from_angles():
    rng = make_rng(0)
    for d in (1, 2, 3, 4):
        u = unitary_from_angles(rng.uniform(0, 6, n_unitary_params(d)), d)
        assert np.allclose(u.conj().T @ u, np.eye(d), atol=1e-12)


def test_qubit_pair_orthonormal():
    b = qubit_pair(1.2, 0.4)
    assert np.allclose(b.conj().T @ b, np.eye(2), atol=1e-12)


def test_two_step_protocol_basis_is_product_orthonormal():
    rng = make_rng(1)
    x = rng.uniform(0, 6, 2 + 2 * n_unitary_params(3))
    proto = TwoStepProtocol.from_vector(x, 3)
    b = proto.basis()
    assert np.allclose(b.conj().T @ b, np.eye(6), atol=1e-9)
    assert np.allclose(proto.vector(), x)
    for col in b.T:
        assert np.linalg.matrix_rank(col.reshape(2, 3), tol=1e-9) == 1


def test_average_bell3():
    mean, se = average_product_basis_mi(bell3_ensemble(), 10_000, make_rng(2))
    assert abs(mean - 0.2516) <= 3 * se + 1e-4


def test_average_identical_members_zero():
    rho = random_state(4, make_rng(3), dims=(2, 2))
    e = make_ensemble((2, 2), [0.5, 0.5], [rho.matrix, rho.matrix])
    mean, se = average_product_basis_mi(e, 500, make_rng(4))
    assert abs(mean) < 1e-12 and se < 1e-12


def test_average_product8():
    lam = lambda_L(product8_ensemble(), "quadrature").value
    mean, se = average_product_basis_mi(product8_ensemble(), 10_000, make_rng(5))
    assert abs(mean - lam) <= 3 * se


def test_average_in_range():
    e = random_ensemble((2, 3), make_rng(6))
    mean, _ = average_product_basis_mi(e, 50, make_rng(7))
    assert 0 <= mean <= holevo_chi(e).value + 1e-9
    b = sample_local_product_basis(2, 3, make_rng(8)).matrix()
    assert 0 <= mutual_information_of_basis(e, b) <= holevo_chi(e).value + 1e-9


def test_two_step_orthogonal_products():
    e = make_ensemble((2, 2), [0.5, 0.5], [ket(1, 0, 0, 0), ket(0, 0, 0, 1)])
    r = optimize_two_step_locc(e, budget=3000, restarts=2)
    assert r.value == pytest.approx(1.0, abs=1e-6)


def test_two_step_bell3():
    r = optimize_two_step_locc(bell3_ensemble(), budget=5000, restarts=4, grid=(3, 4))
    assert r.value >= 0.2516 - 1e-3
    assert r.value <= holevo_chi(bell3_ensemble()).value + 1e-9


def test_two_step_e1():
    e = e1_ensemble(0.0, math.pi / 4)
    r = optimize_two_step_locc(e, budget=5000, restarts=4, grid=(3, 4))
    assert r.value >= lambda_L(e, "quadrature").value - 1e-9


def test_two_step_requires_qubit_a():
    with pytest.raises(errors.DimensionMismatch):
        optimize_two_step_locc(random_ensemble((3, 2), make_rng(8)))


def test_two_step_reproducible():
    e = random_ensemble((2, 2), make_rng(9))
    a = optimize_two_step_locc(e, budget=2000, restarts=2, seed=5, grid=(3, 4))
    b = optimize_two_step_locc(e, budget=2000, restarts=2, seed=5, grid=(3, 4))
    assert a.value == b.value and np.array_equal(a.params, b.params)


def test_two_step_budget_exhausted():
    with pytest.raises(errors.BudgetExhausted):
        optimize_two_step_locc(bell3_ensemble(), budget=50, restarts=4, strict=True)
    r = optimize_two_step_locc(bell3_ensemble(), budget=50, restarts=4)
    assert not r.converged and r.evaluations <= 50 + 1


def test_global_two_orthogonal():
    e = make_ensemble((2,), [0.5, 0.5], [ket(1, 0), ket(0, 1)])
    assert optimize_global_orthogonal(e, budget=2000, restarts=2).value == pytest.approx(1.0, abs=1e-8)


def test_global_zero_plus():
    e = make_ensemble((2,), [0.5, 0.5], [ket(1, 0), ket(1, 1)])
    c2 = math.cos(math.pi / 8) ** 2
    target = 1 + c2 * math.log2(c2) + (1 - c2) * math.log2(1 - c2)
    r = optimize_global_orthogonal(e, budget=3000, restarts=4)
    assert r.value == pytest.approx(target, abs=1e-3)
    assert target == pytest.approx(0.39912, abs=1e-5)


def test_global_sandwich():
    e = bell3_ensemble()
    g = optimize_global_orthogonal(e, budget=6000, restarts=4)
    t = optimize_two_step_locc(e, budget=5000, restarts=4, grid=(3, 4))
    draw = mutual_information_of_basis(e, sample_local_product_basis(2, 2, make_rng(10)).matrix())
    assert g.value >= t.value - 1e-3
    assert g.value >= draw - 1e-9
    assert g.value <= math.log2(3) + 1e-9


def test_global_size_cap():
    e = make_ensemble((17,), [1.0], [np.eye(17) / 17])
    with pytest.raises(errors.SizeCap):
        optimize_global_orthogonal(e)


def test_global_budget_exhausted():
    with pytest.raises(errors.BudgetExhausted):
        optimize_global_orthogonal(bell3_ensemble(), budget=30, restarts=4, strict=True)


def test_result_dict():
    r = optimize_global_orthogonal(make_ensemble((2,), [1.0], [ket(1, 0)]), budget=200, restarts=1)
    d = r.to_dict()
    assert d["label"] == "lower bound" and d["kind"] == "global_orthogonal"
