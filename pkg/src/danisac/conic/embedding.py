"""Symmetric-matrix vectorization and the complex-to-real PSD embedding.

The interior-point core works over products of real symmetric PSD cones,
nonnegative scalars, and free scalars.  Complex Hermitian unknowns enter
through the standard real embedding

    T(H) = [[Re H, -Im H], [Im H, Re H]]

which doubles the side and maps Hermitian PSD matrices to symmetric PSD
matrices (every eigenvalue of H appears twice in T(H)).  Because T is an
algebra homomorphism, Tr(T(C) T(X)) = 2 Tr(C X) for Hermitian C and X, so
a coefficient matrix C on a complex block is entered as T(C)/2 to keep the
real inner product equal to the complex one.

Vectorization uses the scaled upper triangle (svec): off-diagonal entries
are multiplied by sqrt(2) so that the Euclidean inner product of two svec
vectors equals the Frobenius inner product of the matrices they represent.
Row-major upper-triangle order, as produced by numpy.triu_indices.
"""

import math

import numpy as np

_SQRT2 = math.sqrt(2.0)

# Cached (rows, cols, pack weights, unpack weights) per matrix side.
_INDEX_CACHE: dict = {}


def svec_dim(n: int) -> int:
    """Length of the svec vector for a symmetric matrix of side n."""
    return n * (n + 1) // 2


def svec_side(d: int) -> int:
    """Matrix side whose svec has length d; rejects impossible lengths."""
    n = int(round((math.sqrt(8.0 * d + 1.0) - 1.0) / 2.0))
    if svec_dim(n) != d:
        raise ValueError("length %d is not a triangular number" % d)
    return n


def svec_indices(n: int):
    """Upper-triangle index arrays and scaling weights for side n.

    Returns (rows, cols, w, w_inv) where w multiplies matrix entries on the
    way into svec coordinates and w_inv on the way back out.
    """
    cached = _INDEX_CACHE.get(n)
    if cached is None:
        rows, cols = np.triu_indices(n)
        w = np.where(rows == cols, 1.0, _SQRT2)
        cached = (rows, cols, w, 1.0 / w)
        _INDEX_CACHE[n] = cached
    return cached


def svec(M: np.ndarray) -> np.ndarray:
    """Pack a real symmetric matrix into scaled upper-triangle coordinates."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("svec expects a square matrix")
    rows, cols, w, _ = svec_indices(M.shape[0])
    return M[rows, cols] * w


def smat(v: np.ndarray) -> np.ndarray:
    """Inverse of svec: rebuild the symmetric matrix from packed coordinates."""
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("smat expects a vector")
    n = svec_side(v.size)
    rows, cols, _, w_inv = svec_indices(n)
    vals = v * w_inv
    M = np.zeros((n, n))
    M[rows, cols] = vals
    M[cols, rows] = vals
    return M


def hermitian_embed(H: np.ndarray) -> np.ndarray:
    """Real symmetric image [[Re, -Im], [Im, Re]] of a Hermitian matrix."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise ValueError("hermitian_embed expects a square matrix")
    re = H.real
    im = H.imag
    top = np.hstack([re, -im])
    bot = np.hstack([im, re])
    return np.vstack([top, bot])


def hermitian_extract(Y: np.ndarray) -> np.ndarray:
    """Recover a Hermitian matrix from a real symmetric matrix of doubled side.

    For Y = T(H) this inverts the embedding exactly.  For a general symmetric
    Y (as returned by a solver working in the embedded space) it averages Y
    with its image under the embedding's symmetry, which orthogonally projects
    onto the embedded subspace; the projection preserves positive
    semidefiniteness, so a PSD Y always yields a PSD H.
    """
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2 or Y.shape[0] != Y.shape[1] or Y.shape[0] % 2 != 0:
        raise ValueError("hermitian_extract expects a square matrix of even side")
    n = Y.shape[0] // 2
    re = 0.5 * (Y[:n, :n] + Y[n:, n:])
    B = Y[n:, :n]
    im = 0.5 * (B - B.T)
    return re + 1j * im
