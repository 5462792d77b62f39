# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled cyclic Jacobi kernel for complex Hermitian matrices.

Mirrors :mod:`bipartite._jacobi_py` rotation for rotation; the two must
produce the same iterates up to floating-point reassociation.
"""
from libc.math cimport sqrt, fabs, hypot

cdef double _HUGE_THETA = 1e150
cdef double _TINY = 1e-300


cdef double _offdiag_norm(double complex[:, ::1] a, Py_ssize_t n) nogil:
    cdef Py_ssize_t i, j
    cdef double s = 0.0
    cdef double complex z
    for i in range(n):
        for j in range(n):
            if i != j:
                z = a[i, j]
                s += z.real * z.real + z.imag * z.imag
    return sqrt(s)


cdef void _rotate(double complex[:, ::1] a, double complex[:, ::1] v,
                  Py_ssize_t n, Py_ssize_t p, Py_ssize_t q,
                  bint want_vectors) nogil:
    cdef double complex apq = a[p, q]
    cdef double mag = hypot(apq.real, apq.imag)
    cdef double app, aqq, theta, t, c, s
    cdef double complex ph, g00, g01, g10, g11, xp, xq
    cdef Py_ssize_t i
    if mag < _TINY:
        a[p, q] = 0.0
        a[q, p] = 0.0
        return
    app = a[p, p].real
    aqq = a[q, q].real
    # unit phase of a[p, q]
    ph = apq / mag
    theta = (aqq - app) / (2.0 * mag)
    if fabs(theta) > _HUGE_THETA:
        t = 0.5 / theta
    else:
        t = 1.0 / (fabs(theta) + sqrt(theta * theta + 1.0))
        if theta < 0.0:
            t = -t
    c = 1.0 / sqrt(t * t + 1.0)
    s = t * c
    # G = diag(1, conj(ph)) @ [[c, s], [-s, c]]
    g00 = c
    g01 = s
    g10 = -s * ph.conjugate()
    g11 = c * ph.conjugate()
    for i in range(n):
        xp = a[i, p]
        xq = a[i, q]
        a[i, p] = xp * g00 + xq * g10
        a[i, q] = xp * g01 + xq * g11
    for i in range(n):
        xp = a[p, i]
        xq = a[q, i]
        a[p, i] = g00.conjugate() * xp + g10.conjugate() * xq
        a[q, i] = g01.conjugate() * xp + g11.conjugate() * xq
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = app - t * mag
    a[q, q] = aqq + t * mag
    if want_vectors:
        for i in range(n):
            xp = v[i, p]
            xq = v[i, q]
            v[i, p] = xp * g00 + xq * g10
            v[i, q] = xp * g01 + xq * g11


cpdef int jacobi_hermitian(double complex[:, ::1] a, double complex[:, ::1] v,
                           double conv_tol, int max_sweeps, bint want_vectors):
    """Diagonalize ``a`` in place by cyclic Jacobi sweeps.

    ``v`` accumulates the rotations when ``want_vectors`` is true.
    Returns the number of sweeps performed, or -1 if ``max_sweeps`` was hit
    before the off-diagonal Hilbert-Schmidt mass dropped to ``conv_tol``.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t p, q
    cdef int sweep
    with nogil:
        for sweep in range(max_sweeps + 1):
            if _offdiag_norm(a, n) <= conv_tol:
                return sweep
            if sweep == max_sweeps:
                break
            for p in range(n - 1):
                for q in range(p + 1, n):
                    _rotate(a, v, n, p, q, want_vectors)
    return -1


cpdef int jacobi_eigvals_batch(double complex[:, :, ::1] a, double[:, ::1] out,
                               double rel_tol, int max_sweeps):
    """Eigenvalues (unsorted) of a stack of Hermitian matrices, in place.

    Returns the number of matrices that failed to converge.
    """
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = a.shape[1]
    cdef Py_ssize_t k, i, j, p, q
    cdef int sweep, failures = 0
    cdef double nrm, tol
    cdef bint done
    cdef double complex[:, ::1] mat
    cdef double complex[:, ::1] dummy
    if m == 0:
        return 0
    dummy = a[0]
    for k in range(m):
        mat = a[k]
        nrm = 0.0
        for i in range(n):
            for j in range(n):
                nrm += mat[i, j].real * mat[i, j].real + mat[i, j].imag * mat[i, j].imag
        tol = rel_tol * sqrt(nrm)
        done = False
        with nogil:
            for sweep in range(max_sweeps + 1):
                if _offdiag_norm(mat, n) <= tol:
                    done = True
                    break
                if sweep == max_sweeps:
                    break
                for p in range(n - 1):
                    for q in range(p + 1, n):
                        _rotate(mat, dummy, n, p, q, False)
        if not done:
            failures += 1
        for i in range(n):
            out[k, i] = mat[i, i].real
    return failures
