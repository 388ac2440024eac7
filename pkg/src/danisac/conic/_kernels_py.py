"""Pure-numpy implementations of the interior-point hot kernels.

These are the reference semantics for the compiled twins in _kernels.pyx;
the two backends must agree to floating-point noise (see the parity tests).
All functions take the upper-triangle index arrays and scaling weights
explicitly so both backends share one calling convention.
"""

import numpy as np


def congruence_pack(G, C_stack, rows, cols, w):
    """Scaled-congruence batch: svec(G @ C_i @ G) for every matrix in the stack.

    G is (n, n) symmetric, C_stack is (m, n, n); returns (m, d) with
    d = n(n+1)/2 in scaled upper-triangle coordinates.
    """
    T = np.matmul(np.matmul(G, C_stack), G)
    return T[:, rows, cols] * w


def svec_unpack_batch(V, n, rows, cols, w_inv):
    """Rebuild a stack of symmetric matrices from packed rows (m, d) -> (m, n, n)."""
    V = np.asarray(V, dtype=float)
    m = V.shape[0]
    vals = V * w_inv
    out = np.zeros((m, n, n))
    out[:, rows, cols] = vals
    out[:, cols, rows] = vals
    return out
