"""Entropy functionals in bits: Shannon, von Neumann, subentropy, and the
mutual information of a complete projective measurement."""
from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .densmat import DensityMatrix, eigh
from .errors import IncompleteBasis, NegativeProbability, NonOrthonormal, ValidationError

LOG2E = 1.0 / math.log(2.0)
PROB_TOL = 1e-9
GRAM_TOL = 1e-9
DEGENERACY_TOL = 1e-9


def _xlog2x(p):
    p = np.asarray(p, dtype=np.float64)
    safe = np.where(p > 0, p, 1.0)
    return np.where(p > 0, p * np.log2(safe), 0.0)


def shannon_entropy(p) -> float:
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if np.any(p < 0):
        raise NegativeProbability(f"negative entry {p.min():.3e}")
    if abs(p.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"probabilities sum to {p.sum():.12g}")
    return float(max(0.0, -np.sum(_xlog2x(p))))


def shannon_entropy_rows(p) -> np.ndarray:
    """Entropy of each row of a nonnegative array, no normalization checks."""
    return -np.sum(_xlog2x(p), axis=-1)


def as_spectrum(values) -> np.ndarray:
    s = np.asarray(values, dtype=np.float64).reshape(-1)
    if s.size == 0:
        raise ValidationError("empty spectrum")
    if np.any(s < -PROB_TOL) or np.any(s > 1 + PROB_TOL):
        raise ValidationError("spectrum entries must lie in [0, 1]")
    if abs(s.sum() - 1.0) > PROB_TOL:
        raise ValidationError(f"spectrum sums to {s.sum():.12g}")
    return np.sort(np.clip(s, 0.0, 1.0))[::-1]


def von_neumann_entropy(rho: DensityMatrix) -> float:
    return shannon_entropy(eigh(rho, vectors=False)[0])


def subentropy(spectrum) -> float:
    """Subentropy of a spectrum, in bits.

    Evaluated as minus the divided difference of ``x**d log2 x`` over the
    eigenvalues; zero eigenvalues are kept as nodes.
    """
    s = as_spectrum(spectrum)
    return float(max(0.0, _kernels.subentropy(s[None], DEGENERACY_TOL)[0]))


def subentropy_many(spectra) -> np.ndarray:
    """Row-wise subentropy for a stack of spectra; no validation."""
    return _kernels.subentropy(np.asarray(spectra, dtype=np.float64), DEGENERACY_TOL)


def subentropy_direct(spectrum) -> float:
    """The product formula, for distinct eigenvalues only."""
    s = as_spectrum(spectrum)
    total = 0.0
    for k, lk in enumerate(s):
        if lk <= 0:
            continue
        coef = 1.0
        for m, lm in enumerate(s):
            if m != k:
                coef *= lk / (lk - lm)
        total -= coef * lk * math.log2(lk)
    return total


def density_subentropy(rho: DensityMatrix) -> float:
    return subentropy(eigh(rho, vectors=False)[0])


def basis_matrix(basis) -> np.ndarray:
    """Stack basis vectors as columns and check completeness."""
    if isinstance(basis, np.ndarray) and basis.ndim == 2:
        b = np.asarray(basis, dtype=np.complex128)
    else:
        b = np.column_stack([np.asarray(v, dtype=np.complex128).reshape(-1) for v in basis])
    if b.shape[0] != b.shape[1]:
        raise IncompleteBasis(f"{b.shape[1]} vectors in dimension {b.shape[0]}")
    gram_dev = float(np.max(np.abs(b.conj().T @ b - np.eye(b.shape[0]))))
    if gram_dev > GRAM_TOL:
        raise NonOrthonormal(f"Gram matrix deviates from identity by {gram_dev:.3e}")
    return b


def outcome_table(matrices, probs, b) -> np.ndarray:
    """Joint table ``p(x, outcome) = p_x <b|rho_x|b>``."""
    cond = np.real(np.einsum("ix,kij,jx->kx", b.conj(), matrices, b, optimize=True))
    return np.asarray(probs)[:, None] * np.clip(cond, 0.0, None)


def mutual_information_from_table(joint) -> float:
    joint = np.asarray(joint, dtype=np.float64)
    px = joint.sum(axis=1)
    cond = joint / np.where(px > 0, px, 1.0)[:, None]
    return float(shannon_entropy_rows(joint.sum(axis=0)) - np.dot(px, shannon_entropy_rows(cond)))


def mutual_information_of_basis(ensemble, basis) -> float:
    """Mutual information between the ensemble label and the outcome of a
    complete orthonormal measurement."""
    b = basis_matrix(basis)
    if b.shape[0] != ensemble.dim:
        raise IncompleteBasis(f"basis dimension {b.shape[0]} != ensemble dimension {ensemble.dim}")
    joint = outcome_table(ensemble.matrices, ensemble.probs, b)
    # canonical column order makes the result exactly invariant under relabeling outcomes
    joint = joint[:, np.lexsort(joint[::-1])]
    return max(0.0, mutual_information_from_table(joint))
