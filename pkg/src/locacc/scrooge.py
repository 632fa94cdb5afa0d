"""Scrooge ensembles: density, weighted sampling, and the check that every
complete measurement extracts the same information from them."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .densmat import DensityMatrix, eigh
from .entropy import density_subentropy, shannon_entropy_rows
from .errors import SupportMismatch, ValidationError
from .haar import make_rng, sample_product_basis_matrices, sample_pure_states, sample_unitaries

SUPPORT_TOL = 1e-12
PRODUCT = "product"
GLOBAL = "global"


def _support(lam, tol=SUPPORT_TOL):
    lam = np.asarray(lam, dtype=np.float64)
    return lam > tol


def scrooge_density(x, spectrum) -> float:
    """Density of the squared amplitudes ``x`` (eigenbasis coordinates) with
    respect to ``dx_1 ... dx_{N-1}`` on the simplex of the support.

    Coordinates on zero eigenvalues must vanish; a one-dimensional support
    is a point mass and returns 1.
    """
    x = np.asarray(x, dtype=np.float64)
    lam = np.asarray(spectrum, dtype=np.float64)
    if x.shape != lam.shape:
        raise SupportMismatch(f"point has {x.size} coordinates, spectrum {lam.size}")
    on = _support(lam)
    if np.any(x[~on] > SUPPORT_TOL):
        raise SupportMismatch("point has weight outside the support of the spectrum")
    xs, ls = x[on], lam[on]
    n = xs.size
    if n == 1:
        return 1.0
    t = np.sum(xs / ls)
    return float(math.factorial(n) / (np.prod(ls) * t ** (n + 1)))


@dataclass
class ScroogeSample:
    """Weighted pure states (rows of ``states``) averaging to ``source_rho``."""

    states: np.ndarray
    weights: np.ndarray
    source_rho: DensityMatrix
    seed: object = None

    def __len__(self):
        return self.states.shape[0]

    def average(self) -> np.ndarray:
        return np.einsum("n,ni,nj->ij", self.weights, self.states, self.states.conj())

    def recovery(self):
        """``(max |average - rho|, Monte-Carlo scale)``.

        The scale is the largest entrywise standard error of the weighted
        (ratio) estimator of the average.
        """
        avg = self.average()
        err = float(np.max(np.abs(avg - self.source_rho.matrix)))
        outer = np.einsum("ni,nj->nij", self.states, self.states.conj())
        dev = np.abs(outer - avg[None]) ** 2
        se = np.sqrt(np.einsum("n,nij->ij", self.weights ** 2, dev))
        return err, float(np.max(se))

    def to_dict(self) -> dict:
        members = [{"prob": float(w), "ket": np.stack([s.real, s.imag], axis=-1).tolist()}
                   for w, s in zip(self.weights, self.states)]
        return {"label": "scrooge", "dims": list(self.source_rho.dims), "members": members}


def sample_scrooge(rho: DensityMatrix, n_samples: int, rng=None, seed=None) -> ScroogeSample:
    """Haar states on the support, distorted by ``rho**0.5`` and weighted by
    ``<phi|rho|phi>``."""
    if n_samples < 1:
        raise ValidationError("need at least one sample")
    rng = make_rng(seed if seed is not None else 0) if rng is None else rng
    lam, vecs = eigh(rho)
    on = _support(lam)
    ls, vs = lam[on], vecs[:, on]
    phi = sample_pure_states(ls.size, n_samples, rng)
    amp = phi * np.sqrt(ls)[None, :]
    norm2 = np.sum(np.abs(amp) ** 2, axis=1)
    states = (amp / np.sqrt(norm2)[:, None]) @ vs.T
    weights = norm2 / norm2.sum()
    return ScroogeSample(states, weights, rho, seed)


def sample_information(states, weights, basis) -> float:
    """Mutual information of a weighted pure-state ensemble measured in ``basis``."""
    p = np.abs(states @ basis.conj()) ** 2
    p /= p.sum(axis=1, keepdims=True)
    outcome = weights @ p
    return float(shannon_entropy_rows(outcome) - weights @ shannon_entropy_rows(p))


@dataclass
class ConstancyStats:
    mode: str
    n_samples: int
    values: np.ndarray
    per_basis_std_error: float
    target_subentropy: float

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def spread(self) -> float:
        return float(np.max(self.values) - np.min(self.values))

    @property
    def std_error(self) -> float:
        """Standard error of the mean over bases."""
        v = self.values
        return float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0

    @property
    def within_noise(self) -> bool:
        # the range of ~50 Gaussian draws rarely exceeds 6 standard deviations
        return self.spread <= 6.0 * self.per_basis_std_error + 1e-12

    def to_dict(self) -> dict:
        return {"mode": self.mode, "n_samples": self.n_samples, "n_bases": int(self.values.size),
                "mean_bits": self.mean, "spread_bits": self.spread, "std_error_bits": self.std_error,
                "per_basis_std_error_bits": self.per_basis_std_error,
                "within_noise": self.within_noise, "subentropy_of_rho_bits": self.target_subentropy}


def _bases(dims, n_bases, rng, mode):
    if mode == PRODUCT:
        return sample_product_basis_matrices(dims, n_bases, rng)
    if mode == GLOBAL:
        return sample_unitaries(int(np.prod(dims)), n_bases, rng)
    raise ValueError(f"unknown mode {mode!r}")


def constancy_check(s: ScroogeSample, n_bases: int, rng=None, mode: str = PRODUCT,
                    bases=None, n_batches: int = 20) -> ConstancyStats:
    """Mutual information of the discretized sample over random bases.

    ``bases`` (shape ``(n, D, D)``) overrides the random draw so several
    sample sizes can be compared on the same measurements.
    """
    rng = make_rng(0) if rng is None else rng
    if bases is None:
        bases = _bases(s.source_rho.dims, n_bases, rng, mode)
    values = np.array([sample_information(s.states, s.weights, b) for b in bases])
    batches = np.array_split(np.arange(len(s)), min(n_batches, len(s)))
    errs = []
    if len(batches) > 1:
        for b in bases[: min(len(bases), 10)]:
            per = []
            for idx in batches:
                w = s.weights[idx]
                per.append(sample_information(s.states[idx], w / w.sum(), b))
            errs.append(np.std(per, ddof=1) / math.sqrt(len(per)))
    return ConstancyStats(mode, len(s), values, float(np.mean(errs)) if errs else 0.0,
                          density_subentropy(s.source_rho))


def mode_agreement(s: ScroogeSample, product_bases, global_bases, n_batches: int = 20):
    """Difference of the product-basis and global-basis mean information.

    Returns ``(difference, sigma)``. ``sigma`` combines the basis-sampling
    error of both means with the placement noise of the sample, estimated
    from the spread of the difference over disjoint batches.
    """
    def mean_info(states, weights, bases):
        return np.mean([sample_information(states, weights, b) for b in bases])

    diff = mean_info(s.states, s.weights, product_bases) - mean_info(s.states, s.weights, global_bases)
    per = []
    for idx in np.array_split(np.arange(len(s)), n_batches):
        w = s.weights[idx] / s.weights[idx].sum()
        per.append(mean_info(s.states[idx], w, product_bases) - mean_info(s.states[idx], w, global_bases))
    placement = np.std(per, ddof=1) / math.sqrt(n_batches)
    vp = np.array([sample_information(s.states, s.weights, b) for b in product_bases])
    vg = np.array([sample_information(s.states, s.weights, b) for b in global_bases])
    basis_se2 = vp.var(ddof=1) / vp.size + vg.var(ddof=1) / vg.size
    return float(diff), float(math.sqrt(placement ** 2 + basis_se2))
