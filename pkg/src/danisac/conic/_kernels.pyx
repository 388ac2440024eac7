# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled twins of the solver's batched matrix kernels.

Same signatures and semantics as _kernels_py; the congruence products run
through BLAS dgemm on preallocated scratch, the packing/unpacking through
typed loops.  Parity with the numpy backend is enforced by tests.
"""

import numpy as np

cimport numpy as cnp
from scipy.linalg.cython_blas cimport dgemm

cnp.import_array()


cdef void _matmul(double* A, double* B, double* C, int n) noexcept nogil:
    # Row-major C = A @ B via the column-major identity C^T = B^T A^T.
    cdef double one = 1.0
    cdef double zero = 0.0
    dgemm("N", "N", &n, &n, &n, &one, B, &n, A, &n, &zero, C, &n)


def congruence_pack(double[:, ::1] G, double[:, :, ::1] C_stack,
                    rows_arr, cols_arr, w_arr):
    cdef cnp.intp_t[::1] rows = np.ascontiguousarray(rows_arr, dtype=np.intp)
    cdef cnp.intp_t[::1] cols = np.ascontiguousarray(cols_arr, dtype=np.intp)
    cdef double[::1] w = np.ascontiguousarray(w_arr, dtype=np.float64)
    cdef Py_ssize_t m = C_stack.shape[0]
    cdef int n = <int> G.shape[0]
    cdef Py_ssize_t d = w.shape[0]
    out_np = np.empty((m, d))
    cdef double[:, ::1] out = out_np
    tmp1_np = np.empty((n, n))
    tmp2_np = np.empty((n, n))
    cdef double[:, ::1] tmp1 = tmp1_np
    cdef double[:, ::1] tmp2 = tmp2_np
    cdef Py_ssize_t k, t
    with nogil:
        for k in range(m):
            _matmul(&C_stack[k, 0, 0], &G[0, 0], &tmp1[0, 0], n)
            _matmul(&G[0, 0], &tmp1[0, 0], &tmp2[0, 0], n)
            for t in range(d):
                out[k, t] = tmp2[rows[t], cols[t]] * w[t]
    return out_np


def svec_unpack_batch(double[:, ::1] V, Py_ssize_t n, rows_arr, cols_arr, w_inv_arr):
    cdef cnp.intp_t[::1] rows = np.ascontiguousarray(rows_arr, dtype=np.intp)
    cdef cnp.intp_t[::1] cols = np.ascontiguousarray(cols_arr, dtype=np.intp)
    cdef double[::1] w_inv = np.ascontiguousarray(w_inv_arr, dtype=np.float64)
    cdef Py_ssize_t m = V.shape[0]
    cdef Py_ssize_t d = V.shape[1]
    out_np = np.zeros((m, n, n))
    cdef double[:, :, ::1] out = out_np
    cdef Py_ssize_t k, t, i, j
    cdef double v
    with nogil:
        for k in range(m):
            for t in range(d):
                i = rows[t]
                j = cols[t]
                v = V[k, t] * w_inv[t]
                out[k, i, j] = v
                out[k, j, i] = v
    return out_np
