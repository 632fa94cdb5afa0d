"""Haar sampling of pure states and unitaries, and Bloch-sphere quadrature."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import prod
from typing import Sequence

import numpy as np

DEFAULT_NTHETA = 64
DEFAULT_NPHI = 64


def make_rng(seed=0) -> np.random.Generator:
    """Seedable PCG64 generator; ``seed`` may also be a SeedSequence."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(seed))


def spawn(seed, n: int) -> list[np.random.Generator]:
    """``n`` independent child generators, identical for identical seeds."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [make_rng(child) for child in ss.spawn(n)]


def sample_pure_states(d: int, n: int, rng) -> np.ndarray:
    """``n`` Haar-random states of dimension ``d`` as rows."""
    z = rng.standard_normal((n, d)) + 1j * rng.standard_normal((n, d))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_pure_state(d: int, rng) -> np.ndarray:
    return sample_pure_states(d, 1, rng)[0]


def sample_unitaries(d: int, n: int, rng) -> np.ndarray:
    """Haar unitaries via QR of Ginibre matrices with the R-diagonal phases fixed."""
    z = (rng.standard_normal((n, d, d)) + 1j * rng.standard_normal((n, d, d))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    phases = diag / np.abs(diag)
    return q * phases[:, None, :]


def sample_unitary(d: int, rng) -> np.ndarray:
    return sample_unitaries(d, 1, rng)[0]


@dataclass(frozen=True)
class ProductBasis:
    """Complete orthonormal basis ``U_1|j_1> x ... x U_n|j_n>``."""

    factors: tuple[np.ndarray, ...]

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(u.shape[0] for u in self.factors)

    def matrix(self) -> np.ndarray:
        """Basis vectors as columns, lexicographic in the local indices."""
        m = self.factors[0]
        for u in self.factors[1:]:
            m = np.kron(m, u)
        return m

    def vectors(self) -> list[np.ndarray]:
        m = self.matrix()
        return [m[:, i] for i in range(m.shape[1])]


def sample_local_product_basis(dA: int, dB: int, rng) -> ProductBasis:
    return sample_product_basis((dA, dB), rng)


def sample_product_basis(dims: Sequence[int], rng) -> ProductBasis:
    return ProductBasis(tuple(sample_unitary(d, rng) for d in dims))


def sample_product_basis_matrices(dims: Sequence[int], n: int, rng) -> np.ndarray:
    """``n`` product bases as an array of shape ``(n, D, D)`` (columns)."""
    out = None
    for d in dims:
        u = sample_unitaries(d, n, rng)
        out = u if out is None else np.einsum("nij,nkl->nikjl", out, u).reshape(
            n, out.shape[1] * d, out.shape[2] * d)
    return out


def sample_product_states(dims: Sequence[int], n: int, rng) -> np.ndarray:
    """``n`` product states, each factor Haar on its party, shape ``(n, D)``."""
    out = None
    for d in dims:
        s = sample_pure_states(d, n, rng)
        out = s if out is None else np.einsum("ni,nj->nij", out, s).reshape(n, -1)
    return out


@dataclass(frozen=True)
class QuadratureGrid:
    """Qubit states and weights for integrating against the Haar measure."""

    nodes: np.ndarray
    weights: np.ndarray
    ntheta: int
    nphi: int

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


@lru_cache(maxsize=8)
def bloch_grid(ntheta: int = DEFAULT_NTHETA, nphi: int = DEFAULT_NPHI) -> QuadratureGrid:
    """Gauss-Legendre in cos(theta) times the trapezoid rule in phi.

    Nodes are ``cos(theta/2)|0> + exp(i phi) sin(theta/2)|1>``; weights sum
    to one.
    """
    if ntheta < 2 or nphi < 2:
        raise ValueError("need at least 2 nodes per angle")
    x, wx = np.polynomial.legendre.leggauss(ntheta)
    phi = 2.0 * np.pi * np.arange(nphi) / nphi
    theta = np.arccos(x)
    t, p = np.meshgrid(theta, phi, indexing="ij")
    nodes = np.stack([np.cos(t / 2), np.exp(1j * p) * np.sin(t / 2)], axis=-1).reshape(-1, 2)
    w = np.repeat(wx / 2.0, nphi) / nphi
    w = w / w.sum()
    nodes.setflags(write=False)
    w.setflags(write=False)
    return QuadratureGrid(nodes, w, ntheta, nphi)


def total_dim(dims: Sequence[int]) -> int:
    return prod(dims)
