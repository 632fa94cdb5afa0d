"""Brute-force estimators used to certify the analytic bounds.

* :func:`average_product_basis_mi` averages the measured mutual information
  over random local bases; it must agree with the lower bound formula.
* :func:`optimize_two_step_locc` searches the protocols "Alice measures her
  qubit, Bob measures in a basis that depends on her outcome". Every value
  it returns is achieved by an explicit LOCC measurement.
* :func:`optimize_global_orthogonal` searches all complete orthonormal
  bases. Its values are lower bounds on the accessible information, never
  claimed optima.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from ._kernels import givens_unitary
from .densmat import sandwich_first_party
from .ensembles import Ensemble
from .entropy import mutual_information_from_table, shannon_entropy_rows
from .errors import BudgetExhausted, DimensionMismatch, SizeCap
from .haar import make_rng, sample_product_basis_matrices

DEFAULT_RESTARTS = 32
BASIS_CHUNK = 2000
GLOBAL_MAX_DIM = 16


def _batch_information(matrices, probs, bases) -> np.ndarray:
    """Mutual information for each basis of a stack ``(n, D, D)``."""
    cond = np.real(np.einsum("nib,kij,njb->nkb", bases.conj(), matrices, bases, optimize=True))
    cond = np.clip(cond, 0.0, None)
    outcome = np.einsum("k,nkb->nb", probs, cond)
    return shannon_entropy_rows(outcome) - shannon_entropy_rows(cond) @ probs


def average_product_basis_mi(e: Ensemble, n_bases: int, rng=None):
    """Mean and standard error of the information over random product bases."""
    rng = make_rng(0) if rng is None else rng
    mats, probs = e.matrices, e.probs
    values = []
    left = n_bases
    while left > 0:
        n = min(BASIS_CHUNK, left)
        values.append(_batch_information(mats, probs, sample_product_basis_matrices(e.dims, n, rng)))
        left -= n
    v = np.concatenate(values)
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
    return float(v.mean()), se


# --- parameterized bases ------------------------------------------------

def n_unitary_params(d: int) -> int:
    return d * (d - 1)


def unitary_from_angles(angles, d: int) -> np.ndarray:
    """Product of two-level rotations ``(i, j)``, each with a mixing angle and
    a relative phase. Column phases are left out since they do not change
    any measurement statistics."""
    return givens_unitary(angles, d)


def qubit_pair(theta: float, phi: float) -> np.ndarray:
    """Columns |a>, |a_perp> for Bloch angles (theta, phi)."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    e = complex(math.cos(phi), math.sin(phi))
    return np.array([[c, -s * e.conjugate()], [s * e, c]], dtype=np.complex128)


@dataclass
class TwoStepProtocol:
    """Alice measures {|a>, |a_perp>}; Bob then measures in ``bob_bases[outcome]``."""

    alice_angles: tuple[float, float]
    bob_angles: tuple[np.ndarray, np.ndarray]
    dB: int

    @classmethod
    def from_vector(cls, x, dB):
        n = n_unitary_params(dB)
        return cls((float(x[0]), float(x[1])), (np.asarray(x[2:2 + n]), np.asarray(x[2 + n:2 + 2 * n])), dB)

    def vector(self) -> np.ndarray:
        return np.concatenate([self.alice_angles, self.bob_angles[0], self.bob_angles[1]])

    def basis(self) -> np.ndarray:
        a = qubit_pair(*self.alice_angles)
        cols = [np.kron(a[:, o:o + 1], unitary_from_angles(self.bob_angles[o], self.dB)) for o in (0, 1)]
        return np.concatenate(cols, axis=1)


@dataclass
class OptimizationResult:
    value: float
    params: np.ndarray
    restarts_used: int
    converged: bool
    evaluations: int = 0
    kind: str = ""
    notes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "value_bits": float(self.value), "label": "lower bound",
                "params": [float(x) for x in self.params], "restarts_used": self.restarts_used,
                "converged": self.converged, "evaluations": self.evaluations, **self.notes}


class _Counter:
    def __init__(self, budget):
        self.budget = budget
        self.used = 0

    @property
    def left(self):
        return self.budget - self.used

    def wrap(self, f):
        def g(x):
            self.used += 1
            return f(x)
        return g


def _nelder_mead(f, x0, maxfev, scale=0.5):
    x0 = np.asarray(x0, dtype=np.float64)
    simplex = np.vstack([x0] + [x0 + scale * np.eye(x0.size)[i] for i in range(x0.size)])
    res = minimize(f, x0, method="Nelder-Mead",
                   options={"maxfev": max(int(maxfev), x0.size + 2), "xatol": 1e-7, "fatol": 1e-11,
                            "initial_simplex": simplex})
    return res.x, float(res.fun), bool(res.success)


# --- global orthonormal bases ------------------------------------------

def _neg_xlog2x_sum(p):
    p = p[p > 1e-300]
    return -float(np.dot(p, np.log2(p)))


def _information_for_basis(matrices, probs, b) -> float:
    # lean version of entropy.mutual_information_of_basis for optimizer loops
    cond = np.clip(np.real(np.sum(b.conj()[None] * (matrices @ b), axis=1)), 0.0, None)
    h_out = _neg_xlog2x_sum(probs @ cond)
    h_cond = sum(pk * _neg_xlog2x_sum(row) for pk, row in zip(probs, cond))
    return h_out - h_cond


def optimize_global_orthogonal(e: Ensemble, budget: int = 60_000, restarts: int = DEFAULT_RESTARTS,
                               seed=0, strict: bool = False) -> OptimizationResult:
    """Best complete orthonormal measurement found by multi-start simplex search."""
    d = e.dim
    if d > GLOBAL_MAX_DIM:
        raise SizeCap(f"global search limited to dimension {GLOBAL_MAX_DIM}, got {d}")
    mats, probs = e.matrices, e.probs
    rng = make_rng(seed)
    counter = _Counter(budget)
    obj = counter.wrap(lambda x: -_information_for_basis(mats, probs, unitary_from_angles(x, d)))
    npar = n_unitary_params(d)
    if npar == 0:
        v = _information_for_basis(mats, probs, np.eye(1))
        return OptimizationResult(v, np.zeros(0), 0, True, 0, "global_orthogonal")
    per_start = max(budget // max(restarts, 1), 20 * npar)
    best = (-np.inf, np.zeros(npar), False)
    used = 0
    for r in range(restarts):
        if counter.left <= npar + 2:
            break
        x0 = np.zeros(npar) if r == 0 else rng.uniform(0, 2 * np.pi, npar)
        x, fval, ok = _nelder_mead(obj, x0, min(per_start, counter.left))
        used += 1
        if -fval > best[0]:
            best = (-fval, x, ok)
    exhausted = used < restarts
    if strict and exhausted:
        raise BudgetExhausted(f"budget of {budget} evaluations used after {used} restarts")
    return OptimizationResult(max(0.0, best[0]), best[1], used, best[2] and not exhausted,
                              counter.used, "global_orthogonal")


# --- two-step LOCC ------------------------------------------------------

def _conditional_on_bob(mats, probs, dims, alice):
    """For each Alice outcome: probability, label posterior and Bob's states."""
    blocks = sandwich_first_party(mats, alice.T, dims)  # (2, k, dB, dB)
    w = np.real(np.trace(blocks, axis1=2, axis2=3))
    out = []
    for o in range(2):
        joint = probs * np.clip(w[o], 0.0, None)
        q = joint.sum()
        keep = joint > 1e-15
        if q <= 1e-15:
            out.append((0.0, None, None))
            continue
        post = joint[keep] / q
        states = blocks[o][keep] / w[o][keep][:, None, None]
        out.append((q, post, states))
    return out, w


def _alice_information(probs, w):
    return mutual_information_from_table(probs[:, None] * np.clip(w.T, 0.0, None))


def _bob_search(post, states, dB, rng, starts, maxfev, counter):
    """Best Bob basis for one conditional ensemble; returns (info, angles)."""
    npar = n_unitary_params(dB)
    if post is None or npar == 0:
        return 0.0, np.zeros(npar)
    obj = counter.wrap(lambda x: -_information_for_basis(states, post, unitary_from_angles(x, dB)))
    best = (-np.inf, np.zeros(npar))
    for s in range(starts):
        if counter.left <= npar + 2:
            break
        x0 = np.zeros(npar) if s == 0 else rng.uniform(0, 2 * np.pi, npar)
        x, fval, _ = _nelder_mead(obj, x0, min(maxfev, counter.left))
        if -fval > best[0]:
            best = (-fval, x)
    return max(0.0, best[0]) if np.isfinite(best[0]) else 0.0, best[1]


def _two_step_value(mats, probs, dims, x):
    proto = TwoStepProtocol.from_vector(x, dims[1])
    return _information_for_basis(mats, probs, proto.basis())


def optimize_two_step_locc(e: Ensemble, budget: int = 40_000, restarts: int = DEFAULT_RESTARTS,
                           seed=0, strict: bool = False, grid=(5, 8)) -> OptimizationResult:
    """Best two-step protocol found; party A must be a qubit.

    Alice's angles are first scanned on a coarse grid with Bob's bases
    optimized separately for each of her outcomes (the information splits as
    ``I(X;A) + sum_a q_a I(X;K|A=a)``). The best grid points then seed joint
    refinements of all angles.
    """
    if len(e.dims) != 2 or e.dims[0] != 2:
        raise DimensionMismatch(f"two-step protocol needs dims (2, n), got {e.dims}")
    dims = e.dims
    dB = dims[1]
    mats, probs = e.matrices, e.probs
    rng = make_rng(seed)
    counter = _Counter(budget)
    npb = n_unitary_params(dB)
    inner_fev = 40 * max(npb, 1)
    scored = []
    thetas = np.linspace(0, np.pi, grid[0])
    phis = np.linspace(0, 2 * np.pi, grid[1], endpoint=False)
    for th in thetas:
        for ph in (phis if 0 < th < np.pi else phis[:1]):
            if counter.left <= 0:
                break
            parts, w = _conditional_on_bob(mats, probs, dims, qubit_pair(th, ph))
            total = _alice_information(probs, w)
            bob = []
            for q, post, states in parts:
                info, ang = _bob_search(post, states, dB, rng, 2, inner_fev, counter)
                total += q * info
                bob.append(ang)
            scored.append((total, np.concatenate([[th, ph], bob[0], bob[1]])))
    scored.sort(key=lambda t: -t[0])
    full = counter.wrap(lambda x: -_two_step_value(mats, probs, dims, x))
    best_val, best_x = scored[0] if scored else (-np.inf, np.zeros(2 + 2 * npb))
    best_ok = False
    npar = 2 + 2 * npb
    per_start = max(counter.left // max(restarts, 1), 20 * npar)
    used = 0
    for r in range(restarts):
        if counter.left <= npar + 2:
            break
        x0 = scored[r][1] if r < len(scored) else np.concatenate(
            [[rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)], rng.uniform(0, 2 * np.pi, 2 * npb)])
        x, fval, ok = _nelder_mead(full, x0, min(per_start, counter.left), scale=0.3)
        used += 1
        if -fval > best_val:
            best_val, best_x, best_ok = -fval, x, ok
        elif r == 0:
            best_ok = ok
    exhausted = used < restarts
    if strict and exhausted:
        raise BudgetExhausted(f"budget of {budget} evaluations used after {used} refinements")
    value = _two_step_value(mats, probs, dims, best_x)
    return OptimizationResult(max(0.0, value), best_x, used, best_ok and not exhausted,
                              counter.used, "two_step_locc",
                              {"grid_points": len(scored)})
