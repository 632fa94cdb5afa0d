"""Bounds on locally accessible information of bipartite quantum ensembles."""
from __future__ import annotations

__version__ = "0.1.0"

from ._kernels import BACKEND
from .bounds import (
    BoundReport,
    chi_L,
    distillation_bound,
    harmonic_constant,
    hashing_compatibility_check,
    holevo_chi,
    jrw_lambda,
    lambda_L,
    lambda_L_product_average,
    local_subentropy,
)
from .densmat import DensityMatrix, eigh, kron, partial_trace, validate_density_matrix
from .ensembles import (
    Ensemble,
    PureDecomposition,
    average_state,
    bell3_ensemble,
    e1_ensemble,
    load_ensemble,
    make_ensemble,
    parse_ensemble,
    product8_ensemble,
    resolve_ensemble,
)
from .entropy import mutual_information_of_basis, shannon_entropy, subentropy, von_neumann_entropy
from .errors import LocaccError

__all__ = [
    "BACKEND", "BoundReport", "DensityMatrix", "Ensemble", "LocaccError", "PureDecomposition",
    "average_state", "bell3_ensemble", "chi_L", "distillation_bound", "e1_ensemble", "eigh",
    "harmonic_constant", "hashing_compatibility_check", "holevo_chi", "jrw_lambda", "kron",
    "lambda_L", "lambda_L_product_average", "load_ensemble", "local_subentropy", "make_ensemble",
    "mutual_information_of_basis", "parse_ensemble", "partial_trace", "product8_ensemble",
    "resolve_ensemble", "shannon_entropy", "subentropy", "validate_density_matrix",
    "von_neumann_entropy",
]
