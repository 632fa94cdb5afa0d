"""Upper and lower bounds on (locally) accessible information.

The local subentropy of a bipartite state is

    Q_L(sigma) = -dA dB E[f log2 f],   f = <a b|sigma|a b>,

with ``a`` and ``b`` independent Haar states. Two evaluation routes are
provided: plain Monte Carlo over product states, and (when party A is a
qubit) Bloch-sphere quadrature of the inner integral over ``b`` in closed
form,

    Q_L(sigma) = dA E_a[w (Q(sigma_a) - log2 w)] + hc(dB),

where ``w = tr <a|sigma|a>``, ``sigma_a`` the normalized conditional
operator on B and ``hc`` the harmonic constant.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from math import prod

import numpy as np

from .densmat import (
    DensityMatrix,
    UNDEFINED_WEIGHT,
    hermitian_eigh,
    partial_trace,
    sandwich_first_party,
    validate_density_matrix,
)
from .ensembles import (
    Ensemble,
    PureDecomposition,
    average_state,
    bell_states,
    is_product_average,
    project_to_2xn,
    string_ensemble,
)
from .entropy import LOG2E, density_subentropy, subentropy_many, von_neumann_entropy
from .errors import (
    AverageNotProduct,
    ConsistencyFailure,
    DimensionMismatch,
    NegativeEoutTerm,
    NotBellDiagonal,
    QuadratureUnsupported,
    SampleBudgetTooSmall,
)
from .haar import DEFAULT_NPHI, DEFAULT_NTHETA, bloch_grid, sample_product_states, spawn

DEFAULT_SAMPLES = 200_000
MIN_SAMPLES = 100
MC_CHUNK = 50_000
QUADRATURE = "quadrature"
MONTE_CARLO = "monte_carlo"
CLOSED_FORM = "closed_form"
SEPARABLE_FLAG = "separable-only"
METHOD_ALIASES = {"quadrature": QUADRATURE, "quad": QUADRATURE,
                  "monte_carlo": MONTE_CARLO, "mc": MONTE_CARLO, "auto": "auto"}


def harmonic_constant(n: int) -> float:
    """log2(e) * (1/2 + ... + 1/n); zero for n = 1."""
    return LOG2E * sum(1.0 / k for k in range(2, n + 1))


@dataclass
class BoundReport:
    name: str
    value: float
    method: str = CLOSED_FORM
    std_error: float = 0.0
    params: dict = field(default_factory=dict)
    flags: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"name": self.name, "value_bits": float(self.value),
                "std_error_bits": float(self.std_error), "method": self.method,
                "params": self.params, "flags": list(self.flags)}


# --- closed forms -------------------------------------------------------

def holevo_chi(e: Ensemble) -> BoundReport:
    rho = average_state(e)
    value = von_neumann_entropy(rho) - sum(p * von_neumann_entropy(r) for p, r in e.members)
    return BoundReport("chi", max(0.0, value))


def jrw_lambda(e: Ensemble) -> BoundReport:
    """Subentropy lower bound for a single receiver."""
    rho = average_state(e)
    value = density_subentropy(rho) - sum(p * density_subentropy(r) for p, r in e.members)
    return BoundReport("lambda", value)


def chi_L(e: Ensemble, e_out_avg: float = 0.0) -> BoundReport:
    if len(e.dims) != 2:
        raise DimensionMismatch("chi_L needs a bipartite ensemble")
    if e_out_avg < 0:
        raise NegativeEoutTerm(f"average output entanglement must be >= 0, got {e_out_avg}")
    rho = average_state(e)
    s_a = von_neumann_entropy(partial_trace(rho, 0))
    s_b = von_neumann_entropy(partial_trace(rho, 1))
    local = [sum(p * von_neumann_entropy(partial_trace(r, z)) for p, r in e.members) for z in (0, 1)]
    value = s_a + s_b - max(local) - e_out_avg
    params = {"S_A": s_a, "S_B": s_b, "avg_member_S_A": local[0], "avg_member_S_B": local[1],
              "e_out_avg": e_out_avg}
    return BoundReport("chi_L", value, params=params)


# --- quadrature ---------------------------------------------------------

def _conditional_terms(matrices, dims, nodes) -> np.ndarray:
    """``w (Q(sigma_a) - log2 w)`` at each node for each matrix, shape (n, k)."""
    blocks = sandwich_first_party(matrices, nodes, dims)
    n, k, db, _ = blocks.shape
    w = np.real(np.trace(blocks, axis1=2, axis2=3))
    ok = w > UNDEFINED_WEIGHT
    safe_w = np.where(ok, w, 1.0)
    cond = blocks / safe_w[:, :, None, None]
    cond = 0.5 * (cond + np.conj(np.swapaxes(cond, 2, 3)))
    if db == 1:
        q = np.zeros((n, k))
    else:
        lam, _ = hermitian_eigh(cond.reshape(-1, db, db), vectors=False)
        lam = np.clip(lam, 0.0, None)
        lam /= lam.sum(axis=1, keepdims=True)
        q = np.clip(subentropy_many(lam), 0.0, None).reshape(n, k)
    return np.where(ok, w * (q - np.log2(safe_w)), 0.0)


def _quadrature_integrals(matrices, dims, ntheta, nphi, threads=1) -> np.ndarray:
    """``dA * integral of w (Q - log2 w)`` for each matrix (qubit party A)."""
    if dims[0] != 2:
        raise QuadratureUnsupported(f"quadrature needs a qubit first party, got dims {dims}")
    grid = bloch_grid(ntheta, nphi)
    chunks = np.array_split(np.arange(len(grid.weights)), max(1, threads))

    def work(idx):
        return grid.weights[idx] @ _conditional_terms(matrices, dims, grid.nodes[idx])

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, chunks))
    else:
        parts = [work(idx) for idx in chunks]
    return 2.0 * np.sum(parts, axis=0)


# --- Monte Carlo --------------------------------------------------------

def _xlog2x(f):
    safe = np.where(f > 0, f, 1.0)
    return np.where(f > 0, f * np.log2(safe), 0.0)


def _mc_samples(matrices, dims, samples, seed, threads=1) -> np.ndarray:
    """``f_k = <prod|sigma_k|prod>`` for Haar product states, shape (samples, k).

    Samples come in fixed-size chunks with their own spawned streams, so the
    result does not depend on ``threads``.
    """
    if samples < MIN_SAMPLES:
        raise SampleBudgetTooSmall(f"need at least {MIN_SAMPLES} samples, got {samples}")
    sizes = [MC_CHUNK] * (samples // MC_CHUNK)
    if samples % MC_CHUNK:
        sizes.append(samples % MC_CHUNK)
    rngs = spawn(seed, len(sizes))

    def work(args):
        n, rng = args
        v = sample_product_states(dims, n, rng)
        f = np.real(np.einsum("ni,kij,nj->nk", v.conj(), matrices, v, optimize=True))
        return np.clip(f, 0.0, None)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, zip(sizes, rngs)))
    else:
        parts = [work(a) for a in zip(sizes, rngs)]
    return np.concatenate(parts, axis=0)


def _mean_and_error(values):
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    return float(values.mean()), float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0


# --- local subentropy and the lower bound -------------------------------

def _resolve_method(method, dims):
    m = METHOD_ALIASES.get(method)
    if m is None:
        raise ValueError(f"unknown method {method!r}")
    if m == "auto":
        m = QUADRATURE if len(dims) == 2 and 2 in dims else MONTE_CARLO
    return m


def _locc_flags(dims):
    return [] if len(dims) == 2 and 2 in dims else [SEPARABLE_FLAG]


def swap_parties(e: Ensemble) -> Ensemble:
    """Exchange the two parties of a bipartite ensemble."""
    da, db = e.dims
    perm = np.arange(da * db).reshape(da, db).T.reshape(-1)
    members = [(p, validate_density_matrix(r.matrix[np.ix_(perm, perm)], (db, da))) for p, r in e.members]
    kets = [k[perm] for k in e.kets] if e.kets is not None else None
    return Ensemble((db, da), members, e.label, kets)


def _swap_state(sigma: DensityMatrix) -> DensityMatrix:
    da, db = sigma.dims
    perm = np.arange(da * db).reshape(da, db).T.reshape(-1)
    return validate_density_matrix(sigma.matrix[np.ix_(perm, perm)], (db, da))


def local_subentropy(sigma: DensityMatrix, method: str = "auto", *, ntheta: int = DEFAULT_NTHETA,
                     nphi: int = DEFAULT_NPHI, samples: int = DEFAULT_SAMPLES, seed=0,
                     threads: int = 1) -> BoundReport:
    dims = sigma.dims
    method = _resolve_method(method, dims)
    flags = _locc_flags(dims)
    if method == QUADRATURE:
        if len(dims) != 2 or 2 not in dims:
            raise QuadratureUnsupported(f"quadrature needs a 2 x n state, got dims {dims}")
        swapped = dims[0] != 2
        s = _swap_state(sigma) if swapped else sigma
        val = _quadrature_integrals(s.matrix[None], s.dims, ntheta, nphi, threads)[0]
        val += harmonic_constant(s.dims[1])
        return BoundReport("Q_L", float(val), QUADRATURE, 0.0,
                           {"ntheta": ntheta, "nphi": nphi, "swapped": swapped}, flags)
    f = _mc_samples(sigma.matrix[None], dims, samples, seed, threads)[:, 0]
    mean, err = _mean_and_error(-prod(dims) * _xlog2x(f))
    return BoundReport("Q_L", mean, MONTE_CARLO, err, {"samples": samples, "seed": _seed_repr(seed)}, flags)


def _seed_repr(seed):
    return seed if isinstance(seed, (int, str)) or seed is None else repr(seed)


def lambda_L(e: Ensemble, method: str = "auto", *, ntheta: int = DEFAULT_NTHETA,
             nphi: int = DEFAULT_NPHI, samples: int = DEFAULT_SAMPLES, seed=0,
             threads: int = 1) -> BoundReport:
    """Average mutual information over complete orthogonal product bases."""
    method = _resolve_method(method, e.dims)
    flags = _locc_flags(e.dims)
    mats = np.concatenate([average_state(e).matrix[None], e.matrices])
    probs = e.probs
    if method == QUADRATURE:
        if len(e.dims) != 2 or 2 not in e.dims:
            raise QuadratureUnsupported(f"quadrature needs a 2 x n ensemble, got dims {e.dims}")
        swapped = e.dims[0] != 2
        if swapped:
            e = swap_parties(e)
            mats = np.concatenate([average_state(e).matrix[None], e.matrices])
        integrals = _quadrature_integrals(mats, e.dims, ntheta, nphi, threads)
        value = integrals[0] - probs @ integrals[1:]
        return BoundReport("lambda_L", float(value), QUADRATURE, 0.0,
                           {"ntheta": ntheta, "nphi": nphi, "swapped": swapped}, flags)
    f = _mc_samples(mats, e.dims, samples, seed, threads)
    # shared samples for every term: the variance of the difference is small
    g = -prod(e.dims) * (_xlog2x(f[:, 0]) - _xlog2x(f[:, 1:]) @ probs)
    mean, err = _mean_and_error(g)
    return BoundReport("lambda_L", mean, MONTE_CARLO, err,
                       {"samples": samples, "seed": _seed_repr(seed)}, flags)


def product_average_first_term(rho_a: DensityMatrix, rho_b: DensityMatrix, form: str = "derived") -> float:
    """``Q_L(rho_a x rho_b)`` from marginal subentropies.

    ``form="printed"`` evaluates the alternative expression
    ``-dA dB {Q_A + Q_B - log2(e) [(H_dA - 1) - (H_dB - 1)]}``, kept so the
    consistency check can be exercised against it.
    """
    qa, qb = density_subentropy(rho_a), density_subentropy(rho_b)
    da, db = rho_a.dim, rho_b.dim
    if form == "derived":
        return qa + qb + harmonic_constant(da) + harmonic_constant(db)
    if form == "printed":
        return -da * db * (qa + qb - (harmonic_constant(da) - harmonic_constant(db)))
    raise ValueError(f"unknown form {form!r}")


def lambda_L_product_average(e: Ensemble, method: str = "auto", *, form: str = "derived",
                             ntheta: int = DEFAULT_NTHETA, nphi: int = DEFAULT_NPHI,
                             samples: int = DEFAULT_SAMPLES, seed=0, threads: int = 1,
                             quadrature_tol: float = 1e-5) -> BoundReport:
    """Lower bound for ensembles whose average state is a product.

    The result is compared with :func:`lambda_L`; a disagreement beyond five
    combined standard errors (plus ``quadrature_tol`` for quadrature) raises
    :class:`ConsistencyFailure` instead of returning a number.
    """
    if len(e.dims) != 2:
        raise DimensionMismatch("need a bipartite ensemble")
    if not is_product_average(e):
        raise AverageNotProduct("average state is not a product of its marginals")
    method = _resolve_method(method, e.dims)
    rho = average_state(e)
    first = product_average_first_term(partial_trace(rho, 0), partial_trace(rho, 1), form)
    opts = dict(ntheta=ntheta, nphi=nphi, samples=samples, seed=seed, threads=threads)
    if method == QUADRATURE:
        ee = swap_parties(e) if e.dims[0] != 2 else e
        second = float(e.probs @ _quadrature_integrals(ee.matrices, ee.dims, ntheta, nphi, threads))
        second += harmonic_constant(ee.dims[1])
        err = 0.0
    else:
        f = _mc_samples(e.matrices, e.dims, samples, seed, threads)
        second, err = _mean_and_error(-prod(e.dims) * (_xlog2x(f) @ e.probs))
    value = first - second
    direct = lambda_L(e, method, **opts)
    combined = math.hypot(err, direct.std_error)
    allowed = 5.0 * combined + (quadrature_tol if method == QUADRATURE else 0.0)
    if abs(value - direct.value) > allowed:
        raise ConsistencyFailure(
            f"product-average formula ({form}) gives {value:.6f}, direct evaluation "
            f"{direct.value:.6f} (allowed deviation {allowed:.2e})")
    params = {"form": form, "first_term": first, "second_term": second,
              "direct_value": direct.value, **direct.params}
    return BoundReport("lambda_L", value, method, err, params, _locc_flags(e.dims))


# --- distillation -------------------------------------------------------

def distillation_bound(d: PureDecomposition, m: int = 1, isometry=None, method: str = "auto",
                       **opts) -> BoundReport:
    """Upper bound on the singlet yield per copy of protocols that try to
    identify the shared string of decomposition members."""
    if len(d.dims) != 2:
        raise DimensionMismatch("need a bipartite decomposition")
    ens = d.to_ensemble()
    rho = average_state(ens)
    s_a = von_neumann_entropy(partial_trace(rho, 0))
    s_b = von_neumann_entropy(partial_trace(rho, 1))
    s_bar = sum(p * von_neumann_entropy(partial_trace(r, 1)) for p, r in ens.members)
    projected = project_to_2xn(string_ensemble(d, m), isometry)
    low = lambda_L(projected, method, **opts)
    value = s_a + s_b - s_bar - low.value / m
    flags = list(low.flags)
    if value <= 0:
        flags.append("no-distillation")
    params = {"m": m, "S_A": s_a, "S_B": s_b, "avg_member_S_A": s_bar,
              "lambda_L_projected": low.value, "lambda_L_method": low.method,
              "projected_dims": list(projected.dims), "clamped_value": max(0.0, value), **low.params}
    return BoundReport("distill_D", value, low.method, low.std_error / m, params, flags)


def is_bell_diagonal(d: PureDecomposition, tol: float = 1e-9) -> bool:
    if d.dims != (2, 2):
        return False
    bells = np.array(bell_states())
    return all(np.max(np.abs(bells.conj() @ v)) >= 1 - tol for _, v in d.members)


@dataclass
class HashingCheck:
    bound: BoundReport
    hashing_yield: float
    compatible: bool

    def to_dict(self) -> dict:
        return {"bound": self.bound.to_dict(), "hashing_yield_bits": self.hashing_yield,
                "compatible": self.compatible}


def hashing_compatibility_check(d: PureDecomposition, m: int = 1, isometry=None,
                                method: str = "auto", **opts) -> HashingCheck:
    """Compare the bound with the hashing yield ``1 - S(rho)``."""
    if not is_bell_diagonal(d):
        raise NotBellDiagonal("members must be canonical Bell states")
    bound = distillation_bound(d, m, isometry, method, **opts)
    hashing = 1.0 - von_neumann_entropy(d.state())
    ok = bound.value >= hashing - 3.0 * bound.std_error - 1e-9
    return HashingCheck(bound, hashing, bool(ok))

