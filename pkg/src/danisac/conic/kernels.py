"""Backend dispatch for the solver's batched matrix kernels.

The compiled extension (danisac.conic._kernels, built from Cython) is used
when it imports cleanly; setting the environment variable
DANISAC_PURE_PYTHON=1 before import forces the numpy fallback.  Both
backends implement the same signatures and agree to rounding error.
"""

import os

import numpy as np

from . import _kernels_py
from .embedding import svec_indices

if os.environ.get("DANISAC_PURE_PYTHON", "") == "1":
    _backend = _kernels_py
    _BACKEND_NAME = "python"
else:
    try:
        from . import _kernels as _backend  # type: ignore

        _BACKEND_NAME = "compiled"
    except ImportError:
        _backend = _kernels_py
        _BACKEND_NAME = "python"


def backend_name() -> str:
    return _BACKEND_NAME


def congruence_pack(G: np.ndarray, C_stack: np.ndarray) -> np.ndarray:
    """svec(G @ C_i @ G) for each C_i in a (m, n, n) stack; returns (m, d)."""
    n = G.shape[0]
    rows, cols, w, _ = svec_indices(n)
    return _backend.congruence_pack(
        np.ascontiguousarray(G, dtype=float),
        np.ascontiguousarray(C_stack, dtype=float),
        rows,
        cols,
        w,
    )


def svec_unpack_batch(V: np.ndarray, n: int) -> np.ndarray:
    """Rebuild (m, n, n) symmetric stack from packed (m, d) rows."""
    rows, cols, _, w_inv = svec_indices(n)
    return _backend.svec_unpack_batch(
        np.ascontiguousarray(V, dtype=float), n, rows, cols, w_inv
    )


def apply_scaling(G: np.ndarray, v: np.ndarray) -> np.ndarray:
    """svec(G @ smat(v) @ G): one application of the NT scaling operator."""
    n = G.shape[0]
    M = svec_unpack_batch(v[None, :], n)
    return congruence_pack(G, M)[0]
