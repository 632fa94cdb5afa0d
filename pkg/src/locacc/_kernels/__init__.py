"""Hot kernels with a compiled backend and a numpy fallback.

The Cython extension is used when it was built; set ``LOCACC_PURE_PYTHON=1``
to force the numpy implementation.
"""
import os

from . import _pykernels

BACKEND = "python"
if not os.environ.get("LOCACC_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

jacobi_eigh = _impl.jacobi_eigh
subentropy = _impl.subentropy
givens_unitary = _impl.givens_unitary

__all__ = ["BACKEND", "givens_unitary", "jacobi_eigh", "subentropy"]
