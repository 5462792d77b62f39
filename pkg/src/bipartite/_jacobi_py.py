"""Pure-Python cyclic Jacobi kernel (fallback for :mod:`bipartite._jacobi_ext`).

Same signatures and in-place contract as the compiled module.
"""
import math

import numpy as np

_HUGE_THETA = 1e150
# below this an off-diagonal entry is zeroed instead of rotated away
_TINY = 1e-300


def _offdiag_norm(a):
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return math.sqrt(np.vdot(off, off).real)


def _rotate(a, v, p, q, want_vectors):
    apq = a[p, q]
    mag = abs(apq)
    if mag < _TINY:
        a[p, q] = 0.0
        a[q, p] = 0.0
        return
    app = a[p, p].real
    aqq = a[q, q].real
    ph = apq / mag
    theta = (aqq - app) / (2.0 * mag)
    if abs(theta) > _HUGE_THETA:
        t = 0.5 / theta
    else:
        t = 1.0 / (abs(theta) + math.sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / math.sqrt(t * t + 1.0)
    s = t * c
    g00, g01 = c, s
    g10, g11 = -s * ph.conjugate(), c * ph.conjugate()

    col_p = a[:, p].copy()
    col_q = a[:, q]
    a[:, p] = col_p * g00 + col_q * g10
    a[:, q] = col_p * g01 + col_q * g11
    row_p = a[p, :].copy()
    row_q = a[q, :]
    a[p, :] = np.conj(g00) * row_p + np.conj(g10) * row_q
    a[q, :] = np.conj(g01) * row_p + np.conj(g11) * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = app - t * mag
    a[q, q] = aqq + t * mag
    if want_vectors:
        vp = v[:, p].copy()
        vq = v[:, q]
        v[:, p] = vp * g00 + vq * g10
        v[:, q] = vp * g01 + vq * g11


def jacobi_hermitian(a, v, conv_tol, max_sweeps, want_vectors):
    n = a.shape[0]
    for sweep in range(max_sweeps + 1):
        if _offdiag_norm(a) <= conv_tol:
            return sweep
        if sweep == max_sweeps:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q, want_vectors)
    return -1


def jacobi_eigvals_batch(a, out, rel_tol, max_sweeps):
    failures = 0
    for k in range(a.shape[0]):
        mat = a[k]
        tol = rel_tol * math.sqrt(np.vdot(mat, mat).real)
        if jacobi_hermitian(mat, mat, tol, max_sweeps, False) < 0:
            failures += 1
        out[k, :] = np.diagonal(mat).real
    return failures
