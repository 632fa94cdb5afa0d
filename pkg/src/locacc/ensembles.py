"""Ensemble data model, JSON I/O and the builders for the standard ensembles."""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field
from math import prod
from pathlib import Path
from typing import Sequence

import numpy as np

from .densmat import (
    MAX_TOTAL_DIM,
    DensityMatrix,
    as_pure_state,
    ket,
    partial_trace,
    projector,
    validate_density_matrix,
)
from .errors import (
    BadPartyIndex,
    DegenerateParameters,
    DimensionMismatch,
    LocaccError,
    NonIsometric,
    SchemaError,
    SizeCap,
    ValidationError,
)
from .haar import make_rng

PROB_TOL = 1e-9
DROP_WEIGHT = 1e-12


@dataclass(eq=False)
class Ensemble:
    dims: tuple[int, ...]
    members: list[tuple[float, DensityMatrix]]
    label: str = ""
    kets: list[np.ndarray] | None = field(default=None, repr=False)

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        if not self.members:
            raise ValidationError("ensemble has no members")
        for i, (_, rho) in enumerate(self.members):
            if rho.dims != self.dims:
                raise DimensionMismatch(f"member {i} has dims {rho.dims}, ensemble {self.dims}")
        p = np.array([pr for pr, _ in self.members], dtype=np.float64)
        if np.any(p < 0):
            raise ValidationError("negative member probability")
        if abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError(f"member probabilities sum to {p.sum():.12g}")

    @property
    def dim(self) -> int:
        return prod(self.dims)

    @property
    def probs(self) -> np.ndarray:
        return np.array([p for p, _ in self.members], dtype=np.float64)

    @property
    def matrices(self) -> np.ndarray:
        return np.stack([rho.matrix for _, rho in self.members])

    def __len__(self):
        return len(self.members)

    def relabeled(self, order: Sequence[int]) -> "Ensemble":
        kets = [self.kets[i] for i in order] if self.kets is not None else None
        return Ensemble(self.dims, [self.members[i] for i in order], self.label, kets)

    def conjugated(self, u: np.ndarray) -> "Ensemble":
        """Apply the unitary ``u`` to every member."""
        members = [(p, validate_density_matrix(u @ r.matrix @ u.conj().T, self.dims))
                   for p, r in self.members]
        kets = [u @ k for k in self.kets] if self.kets is not None else None
        return Ensemble(self.dims, members, self.label, kets)


@dataclass(eq=False)
class PureDecomposition:
    """``sum_i p_i |psi_i><psi_i|`` with normalized, not necessarily orthogonal kets."""

    dims: tuple[int, ...]
    members: list[tuple[float, np.ndarray]]
    label: str = ""

    def __post_init__(self):
        self.dims = tuple(int(d) for d in self.dims)
        p = np.array([pr for pr, _ in self.members], dtype=np.float64)
        if not self.members or np.any(p < 0) or abs(p.sum() - 1.0) > PROB_TOL:
            raise ValidationError("decomposition probabilities must be nonnegative and sum to 1")
        self.members = [(float(pr), as_pure_state(v, prod(self.dims))) for pr, v in self.members]

    def to_ensemble(self) -> Ensemble:
        members = [(p, validate_density_matrix(projector(v), self.dims)) for p, v in self.members]
        return Ensemble(self.dims, members, self.label, [v for _, v in self.members])

    def state(self) -> DensityMatrix:
        return average_state(self.to_ensemble())


def _normalize_probs(probs, what="member"):
    p = np.asarray(probs, dtype=np.float64)
    if np.any(p < 0):
        raise ValidationError(f"negative {what} probability")
    s = p.sum()
    if abs(s - 1.0) > PROB_TOL:
        raise ValidationError(f"{what} probabilities sum to {s:.12g}")
    # leave sums that are 1 up to rounding untouched so round trips stay bit-exact
    return p / s if abs(s - 1.0) > 4 * np.finfo(float).eps * len(p) else p


def make_ensemble(dims, probs, states, label="") -> Ensemble:
    """Ensemble from probabilities and kets (1-d) or matrices (2-d)."""
    probs = _normalize_probs(probs)
    members, kets = [], []
    for p, s in zip(probs, states):
        s = np.asarray(s, dtype=np.complex128)
        if s.ndim == 1:
            kets.append(as_pure_state(s))
            members.append((float(p), validate_density_matrix(projector(s), dims)))
        else:
            members.append((float(p), validate_density_matrix(s, dims)))
    return Ensemble(dims, members, label, kets if len(kets) == len(members) else None)


# --- JSON ---------------------------------------------------------------

def _complex_entries(x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.shape[-1] != 2:
        raise SchemaError("complex numbers must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def _pairs(a):
    a = np.asarray(a)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def parse_ensemble(document) -> Ensemble:
    """Validated ensemble from a JSON string or an already decoded mapping."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
    if not isinstance(document, dict):
        raise SchemaError("top level must be an object")
    for key in ("dims", "members"):
        if key not in document:
            raise SchemaError(f"missing required key {key!r}")
    dims = document["dims"]
    if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and d > 0 for d in dims):
        raise SchemaError("'dims' must be a non-empty list of positive integers")
    members = document["members"]
    if not isinstance(members, list) or not members:
        raise SchemaError("'members' must be a non-empty list")
    probs, states = [], []
    for i, m in enumerate(members):
        if not isinstance(m, dict) or "prob" not in m or ("matrix" in m) == ("ket" in m):
            raise SchemaError(f"member {i} needs 'prob' and exactly one of 'matrix'/'ket'")
        if not isinstance(m["prob"], (int, float)):
            raise SchemaError(f"member {i}: 'prob' must be a number")
        try:
            states.append(_complex_entries(m["ket"] if "ket" in m else m["matrix"]))
        except (ValueError, TypeError, IndexError) as exc:
            raise SchemaError(f"member {i}: malformed entries ({exc})") from None
        probs.append(float(m["prob"]))
    try:
        return make_ensemble(dims, probs, states, document.get("label", ""))
    except LocaccError as exc:
        bad = _first_bad_member(dims, states)
        where = f" (member {bad})" if bad is not None else ""
        raise ValidationError(f"{type(exc).__name__}{where}: {exc}") from exc


def _first_bad_member(dims, states):
    for i, s in enumerate(states):
        try:
            if s.ndim == 1:
                validate_density_matrix(projector(as_pure_state(s)), dims)
            else:
                validate_density_matrix(s, dims)
        except LocaccError:
            return i
    return None


def ensemble_to_dict(e: Ensemble, use_kets: bool = True) -> dict:
    members = []
    for i, (p, rho) in enumerate(e.members):
        if use_kets and e.kets is not None:
            members.append({"prob": p, "ket": _pairs(e.kets[i])})
        else:
            members.append({"prob": p, "matrix": _pairs(rho.matrix)})
    return {"label": e.label, "dims": list(e.dims), "members": members}


def serialize_ensemble(e: Ensemble, use_kets: bool = True) -> str:
    return json.dumps(ensemble_to_dict(e, use_kets))


def load_ensemble(path) -> Ensemble:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    return parse_ensemble(text)


def decomposition_from_ensemble(e: Ensemble) -> PureDecomposition:
    """Pure members only; rank-one matrices are accepted."""
    kets = e.kets
    if kets is None:
        kets = []
        for i, (_, rho) in enumerate(e.members):
            w, v = np.linalg.eigh(rho.matrix)
            if w[-1] < 1 - 1e-9:
                raise ValidationError(f"member {i} is not pure")
            kets.append(v[:, -1])
    return PureDecomposition(e.dims, [(p, k) for (p, _), k in zip(e.members, kets)], e.label)


# --- derived states -----------------------------------------------------

def average_state(e: Ensemble) -> DensityMatrix:
    m = np.tensordot(e.probs, e.matrices, axes=1)
    return validate_density_matrix(m, e.dims)


def marginal_ensemble(e: Ensemble, party: int) -> Ensemble:
    if not 0 <= party < len(e.dims):
        raise BadPartyIndex(f"party {party} out of range for dims {e.dims}")
    members = [(p, partial_trace(rho, party)) for p, rho in e.members]
    return Ensemble((e.dims[party],), members, f"{e.label}|party{party}")


def is_product_average(e: Ensemble, tol: float = 1e-8) -> bool:
    rho = average_state(e)
    if len(e.dims) != 2:
        return False
    prod_state = np.kron(partial_trace(rho, 0).matrix, partial_trace(rho, 1).matrix)
    return float(np.max(np.abs(prod_state - rho.matrix))) <= tol


# --- builders -----------------------------------------------------------

def bell_states() -> list[np.ndarray]:
    """Phi+, Phi-, Psi+, Psi- in the computational basis."""
    return [ket(1, 0, 0, 1), ket(1, 0, 0, -1), ket(0, 1, 1, 0), ket(0, 1, -1, 0)]


def bell3_ensemble() -> Ensemble:
    phi_p, phi_m, psi_p, _ = bell_states()
    return make_ensemble((2, 2), [1 / 3] * 3, [phi_p, phi_m, psi_p], "bell3")


def bell_diagonal_decomposition(probs, label=None) -> PureDecomposition:
    probs = np.asarray(probs, dtype=np.float64)
    if probs.shape != (4,):
        raise ValidationError("need four Bell weights")
    keep = [(float(p), b) for p, b in zip(probs, bell_states()) if p > 0]
    tag = label or "bellmix:" + ":".join(f"{p:g}" for p in probs)
    return PureDecomposition((2, 2), keep, tag)


def e1_ensemble(theta: float, phi: float) -> Ensemble:
    """Four orthonormal states in 2x2; the first three live in
    span{|00>, |11>, |10>} and the fourth is |01>."""
    a = math.sin(theta / 2) * math.cos(phi / 2)
    b = math.sin(theta / 2) * math.sin(phi / 2)
    c = math.cos(theta / 2)
    v1 = np.array([a, b, c])
    diff = np.array([b - c, c - a, a - b])
    norm = np.linalg.norm(diff)
    if norm < 1e-12:
        raise DegenerateParameters(f"a = b = c at theta={theta}, phi={phi}")
    v2 = diff / norm
    v3 = np.cross(v2, v1)
    v3 /= np.linalg.norm(v3)

    def embed(v):
        # coordinates (|00>, |11>, |10>) -> computational order 00, 01, 10, 11
        return np.array([v[0], 0.0, v[2], v[1]], dtype=np.complex128)

    states = [embed(v1), embed(v2), embed(v3), np.array([0, 1, 0, 0], dtype=np.complex128)]
    return make_ensemble((2, 2), [0.25] * 4, states, f"e1:{theta!r}:{phi!r}")


def product8_ensemble() -> Ensemble:
    zero, one = np.array([1, 0]), np.array([0, 1])
    plus, minus = ket(1, 1), ket(1, -1)
    states = [np.kron(x, y) for x, y in
              [(zero, zero), (zero, one), (one, zero), (one, one),
               (plus, plus), (plus, minus), (minus, plus), (minus, minus)]]
    return make_ensemble((2, 2), [1 / 8] * 8, states, "product8")


def string_ensemble(d: PureDecomposition, m: int) -> Ensemble:
    """All m-fold strings of decomposition members, with the A factors
    grouped into one party and the B factors into the other."""
    if m < 1:
        raise ValidationError("m must be at least 1")
    if len(d.dims) != 2:
        raise DimensionMismatch("string ensembles need a bipartite decomposition")
    da, db = d.dims
    k = len(d.members)
    if (da * db) ** m > MAX_TOTAL_DIM or k ** m > MAX_TOTAL_DIM:
        raise SizeCap(f"{k}^{m} strings of dimension {(da * db) ** m} exceed the cap")
    probs = np.array([p for p, _ in d.members])
    kets = [v for _, v in d.members]
    # axis order after the m-fold product is (A1, B1, A2, B2, ...)
    perm = [2 * i for i in range(m)] + [2 * i + 1 for i in range(m)]
    out_p, out_k = [], []
    for idx in np.ndindex(*(k,) * m):
        p = float(np.prod(probs[list(idx)]))
        v = kets[idx[0]]
        for i in idx[1:]:
            v = np.kron(v, kets[i])
        v = v.reshape((da, db) * m).transpose(perm).reshape(-1)
        out_p.append(p)
        out_k.append(v)
    dims = (da ** m, db ** m)
    return make_ensemble(dims, out_p, out_k, f"{d.label}^{m}")


def default_isometry(dA: int) -> np.ndarray:
    return np.eye(2, dA, dtype=np.complex128)


def project_to_2xn(e: Ensemble, isometry=None) -> Ensemble:
    """Project party A onto a qubit subspace and post-select.

    ``isometry`` is a ``2 x dA`` matrix with orthonormal rows. Member
    weights are multiplied by the surviving trace and renormalized;
    members that vanish are dropped.
    """
    if len(e.dims) != 2:
        raise DimensionMismatch("projection needs a bipartite ensemble")
    da, db = e.dims
    v = default_isometry(da) if isometry is None else np.asarray(isometry, dtype=np.complex128)
    if v.shape != (2, da):
        raise NonIsometric(f"isometry must have shape (2, {da}), got {v.shape}")
    dev = float(np.max(np.abs(v @ v.conj().T - np.eye(2))))
    if dev > 1e-9:
        raise NonIsometric(f"rows not orthonormal (deviation {dev:.3e})")
    big = np.kron(v, np.eye(db))
    probs, states, kets = [], [], []
    for i, (p, rho) in enumerate(e.members):
        m = big @ rho.matrix @ big.conj().T
        t = float(np.trace(m).real)
        if t < DROP_WEIGHT or p * t < DROP_WEIGHT:
            continue
        probs.append(p * t)
        states.append(m / t)
        if e.kets is not None:
            kv = big @ e.kets[i]
            kets.append(kv / np.linalg.norm(kv))
    if not probs:
        raise ValidationError("projection annihilates every member")
    probs = np.array(probs) / np.sum(probs)
    out = make_ensemble((2, db), probs, kets if e.kets is not None else states, f"{e.label}->2")
    return out


def random_density(d: int, rng, rank: int | None = None) -> np.ndarray:
    """Induced-measure random state of the given rank (default: random rank)."""
    r = rank if rank is not None else int(rng.integers(1, d + 1))
    g = rng.standard_normal((d, r)) + 1j * rng.standard_normal((d, r))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_ensemble(dims: Sequence[int], rng, n_members: int | None = None, label=None) -> Ensemble:
    dims = tuple(dims)
    n = n_members if n_members is not None else int(rng.integers(2, 5))
    probs = rng.dirichlet(np.ones(n))
    states = [random_density(prod(dims), rng) for _ in range(n)]
    return make_ensemble(dims, probs, states, label or f"random{dims}")


# --- name resolution ----------------------------------------------------

BUILTINS = ("bell3", "product8", "product00", "e1:<theta>:<phi>", "bellmix:<p1>:<p2>:<p3>:<p4>",
            "random:<dA>x<dB>:<seed>")


_ANGLE = re.compile(r"^([-+]?(?:\d+\.?\d*|\.\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d+\.?\d*))?$")


def _angle(text: str) -> float:
    """Float, or a multiple of pi such as ``pi/4`` or ``3pi/4``."""
    t = text.strip().lower()
    m = _ANGLE.match(t)
    try:
        if m:
            coef = m.group(1)
            value = (float(coef) if coef not in ("", "+", "-") else float(coef + "1")) * math.pi
            return value / float(m.group(2)) if m.group(2) else value
        return float(t)
    except ValueError:
        raise SchemaError(f"cannot parse angle {text!r}") from None


def resolve_ensemble(name: str) -> Ensemble:
    """Built-in name or path to an ensemble JSON file."""
    if name == "bell3":
        return bell3_ensemble()
    if name == "product8":
        return product8_ensemble()
    if name == "product00":
        return make_ensemble((2, 2), [1.0], [ket(1, 0, 0, 0)], "product00")
    if name.startswith("e1:"):
        parts = name.split(":")
        if len(parts) != 3:
            raise SchemaError("expected e1:<theta>:<phi>")
        return e1_ensemble(_angle(parts[1]), _angle(parts[2]))
    if name.startswith("bellmix:"):
        return resolve_decomposition(name).to_ensemble()
    if name.startswith("random:"):
        m = re.fullmatch(r"random:(\d+)x(\d+):(\d+)", name)
        if not m:
            raise SchemaError("expected random:<dA>x<dB>:<seed>")
        dims = (int(m.group(1)), int(m.group(2)))
        if min(dims) < 1 or prod(dims) > MAX_TOTAL_DIM:
            raise SizeCap(f"dims {dims} outside 1..{MAX_TOTAL_DIM}")
        return random_ensemble(dims, make_rng(int(m.group(3))), label=name)
    return load_ensemble(name)


def resolve_decomposition(name: str) -> PureDecomposition:
    if name.startswith("bellmix:"):
        parts = name.split(":")[1:]
        if len(parts) != 4:
            raise SchemaError("expected bellmix:<p1>:<p2>:<p3>:<p4>")
        try:
            probs = [float(x) for x in parts]
        except ValueError:
            raise SchemaError(f"bad Bell weights in {name!r}") from None
        return bell_diagonal_decomposition(_normalize_probs(probs, "Bell"), name)
    return decomposition_from_ensemble(resolve_ensemble(name))
