"""Dense complex linear algebra on small Hilbert spaces."""
from __future__ import annotations

from dataclasses import dataclass
from math import prod
from typing import Sequence

import numpy as np

from . import _kernels
from .errors import (
    BadPartyIndex,
    DimensionMismatch,
    NegativeEigenvalue,
    NoConvergence,
    NonHermitian,
    SizeCap,
    TraceDeviation,
    ValidationError,
)

MAX_TOTAL_DIM = 4096
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10
ROUNDING_FLOOR = 1e-15
NORM_TOL = 1e-12
JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
UNDEFINED_WEIGHT = 1e-14


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated state. Build it with :func:`validate_density_matrix`."""

    dims: tuple[int, ...]
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def spectrum(self) -> np.ndarray:
        return eigh(self, vectors=False)[0]

    def allclose(self, other: "DensityMatrix", atol: float = 1e-10) -> bool:
        return self.dims == other.dims and np.allclose(self.matrix, other.matrix, rtol=0, atol=atol)

    def __repr__(self):
        return f"DensityMatrix(dims={self.dims})"


def _check_dims(dims, size):
    dims = tuple(int(x) for x in dims)
    if not dims or any(x < 1 for x in dims):
        raise DimensionMismatch(f"party dimensions must be positive, got {dims}")
    total = prod(dims)
    if total > MAX_TOTAL_DIM:
        raise SizeCap(f"total dimension {total} exceeds the cap {MAX_TOTAL_DIM}")
    if size is not None and total != size:
        raise DimensionMismatch(f"dims {dims} give {total}, matrix has size {size}")
    return dims


def hermitian_eigh(a, vectors=True):
    """Eigen-decomposition of one Hermitian matrix or a stack of them.

    Cyclic Jacobi; eigenvalues are returned in descending order.
    """
    arr = np.asarray(a, dtype=np.complex128)
    single = arr.ndim == 2
    stack = arr[None] if single else arr
    w, v, sweeps = _kernels.jacobi_eigh(stack, vectors, JACOBI_TOL, JACOBI_MAX_SWEEPS)
    if sweeps < 0:
        raise NoConvergence(f"Jacobi did not converge within {JACOBI_MAX_SWEEPS} sweeps")
    if single:
        return w[0], (v[0] if vectors else None)
    return w, v


def validate_density_matrix(m, dims: Sequence[int] | None = None) -> DensityMatrix:
    """Check ``m`` is a density matrix and wrap it.

    Negative eigenvalues down to ``-PSD_TOL`` are clamped to zero and the
    matrix renormalized; anything more negative is rejected.
    """
    m = np.array(m, dtype=np.complex128)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValidationError("matrix has non-finite entries")
    dims = _check_dims(dims if dims is not None else (m.shape[0],), m.shape[0])
    dev = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
    if dev > HERMITIAN_TOL:
        raise NonHermitian(f"max |m - m^dagger| = {dev:.3e}")
    m = 0.5 * (m + m.conj().T)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > TRACE_TOL:
        raise TraceDeviation(f"trace deviates from 1 by {tr - 1.0:.3e}")
    w, v = hermitian_eigh(m)
    if w[-1] < -PSD_TOL:
        raise NegativeEigenvalue(f"smallest eigenvalue {w[-1]:.3e}")
    # rounding-level negativity is left alone so validation is idempotent
    if w[-1] < -ROUNDING_FLOOR * max(1, m.shape[0]):
        w = np.clip(w, 0.0, None)
        w /= w.sum()
        m = (v * w) @ v.conj().T
        m = 0.5 * (m + m.conj().T)
    m.setflags(write=False)
    return DensityMatrix(dims, m)


def eigh(d: DensityMatrix, vectors: bool = True):
    """Eigenvalues (descending, clamped to [0, 1]) and eigenvector columns."""
    w, v = hermitian_eigh(d.matrix, vectors)
    return np.clip(w, 0.0, 1.0), v


def kron(a, b) -> np.ndarray:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.size * b.size > MAX_TOTAL_DIM ** 2:
        raise SizeCap("tensor product too large")
    return np.kron(a, b)


def as_pure_state(v, dim: int | None = None) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    if dim is not None and v.shape[0] != dim:
        raise DimensionMismatch(f"state has dimension {v.shape[0]}, expected {dim}")
    norm = np.linalg.norm(v)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError(f"state norm deviates from 1 by {norm - 1.0:.3e}")
    return v


def ket(*amplitudes) -> np.ndarray:
    """Normalized ket from (possibly unnormalized) amplitudes."""
    v = np.asarray(amplitudes, dtype=np.complex128).reshape(-1)
    return v / np.linalg.norm(v)


def projector(v) -> np.ndarray:
    v = np.asarray(v, dtype=np.complex128).reshape(-1)
    return np.outer(v, v.conj())


def pure_density(v, dims: Sequence[int] | None = None) -> DensityMatrix:
    return validate_density_matrix(projector(as_pure_state(v)), dims)


def partial_trace(d: DensityMatrix, keep: int) -> DensityMatrix:
    """Reduce ``d`` to the single party ``keep``."""
    n = len(d.dims)
    if not 0 <= keep < n:
        raise BadPartyIndex(f"party index {keep} out of range for dims {d.dims}")
    t = d.matrix.reshape(d.dims + d.dims)
    # move the kept party to the front on both sides, then trace the rest
    rest = [i for i in range(n) if i != keep]
    t = np.transpose(t, [keep] + rest + [n + keep] + [n + i for i in rest])
    dk = d.dims[keep]
    r = prod(d.dims[i] for i in rest)
    red = np.einsum("ajbj->ab", t.reshape(dk, r, dk, r))
    return validate_density_matrix(red, (dk,))


def sandwich_first_party(matrices, alphas, dims) -> np.ndarray:
    """``<alpha|sigma|alpha>`` on the second party, batched.

    ``matrices`` has shape ``(k, D, D)``, ``alphas`` shape ``(n, dA)``; the
    result has shape ``(n, k, dB, dB)`` and is not normalized.
    """
    da, db = dims
    s = np.asarray(matrices).reshape(-1, da, db, da, db)
    a = np.asarray(alphas, dtype=np.complex128)
    return np.einsum("ni,kiajb,nj->nkab", a.conj(), s, a, optimize=True)


def conditional_operator(sigma: DensityMatrix, alpha):
    """Weight ``tr <alpha|sigma|alpha>`` and the normalized operator on B.

    The conditional is ``None`` when the weight is below ``1e-14``; the
    weight is then reported as 0.
    """
    if len(sigma.dims) != 2:
        raise DimensionMismatch(f"need a bipartite state, got dims {sigma.dims}")
    alpha = as_pure_state(alpha, sigma.dims[0])
    block = sandwich_first_party(sigma.matrix[None], alpha[None], sigma.dims)[0, 0]
    weight = float(np.trace(block).real)
    if weight < UNDEFINED_WEIGHT:
        return 0.0, None
    cond = block / weight
    cond = 0.5 * (cond + cond.conj().T)
    return min(weight, 1.0), validate_density_matrix(cond, (sigma.dims[1],))


def product_state(*states: DensityMatrix) -> DensityMatrix:
    m = states[0].matrix
    dims = list(states[0].dims)
    for s in states[1:]:
        m = kron(m, s.matrix)
        dims.extend(s.dims)
    return validate_density_matrix(m, dims)


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    n = prod(dims)
    return validate_density_matrix(np.eye(n) / n, dims)
