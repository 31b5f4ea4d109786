# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled subsequence-kernel inner loops.

Same contract as the pure twin ``_sskpure``; see that module for the
recurrence being implemented.  Scratch buffers are allocated once per call
and reused across all pairs.
"""

from libc.string cimport memcpy, memset

import numpy as np

cimport numpy as cnp

cnp.import_array()

IMPLEMENTATION = "compiled"


cdef double _pair_kernel(const int* a, int n, const int* b, int m,
                         double tm, double tg, int ell,
                         double* cur, double* s) noexcept nogil:
    # cur holds A_p (n*m); s provides three m-length work rows:
    # T(i-1,.), S(i,.) and S(i-1,.), maintained in one fused pass per order
    cdef double tm2 = tm * tm
    cdef double w = tm2
    cdef double total = 0.0
    cdef double acc = 0.0
    cdef double t_ij, s_left, t_prev, v
    cdef double* trow = s
    cdef double* srow = s + m
    cdef double* sprev = s + 2 * m
    cdef double* tmp
    cdef int i, j, p
    for i in range(n):
        for j in range(m):
            if a[i] == b[j]:
                cur[i * m + j] = 1.0
                acc += 1.0
            else:
                cur[i * m + j] = 0.0
    total = w * acc
    for p in range(2, ell + 1):
        acc = 0.0
        for j in range(m):
            trow[j] = 0.0
            sprev[j] = 0.0
        for i in range(n):
            # decay-prefix scans of row i (reading cur before overwriting)
            s_left = 0.0
            for j in range(m):
                t_prev = trow[j]
                t_ij = cur[i * m + j] + tg * t_prev
                trow[j] = t_ij
                s_left = t_ij + tg * s_left
                srow[j] = s_left
            # overwrite row i with A_{p}(i,.) = M(i,.) * S_{p-1}(i-1, .-1)
            if i == 0:
                for j in range(m):
                    cur[j] = 0.0
            else:
                cur[i * m] = 0.0
                for j in range(1, m):
                    if a[i] == b[j]:
                        v = sprev[j - 1]
                        cur[i * m + j] = v
                        acc += v
                    else:
                        cur[i * m + j] = 0.0
            tmp = sprev
            sprev = srow
            srow = tmp
        w *= tm2
        total += w * acc
    return total


cdef void _pair_coeffs(const int* a, int n, const int* b, int m,
                       int ell, int D, double* cur, double* s,
                       double* out) noexcept nogil:
    """out[(p-1)*D + d] += coefficient counts; caller zeroes out."""
    cdef int i, j, p, d
    cdef int cell = D
    memset(cur, 0, n * m * D * sizeof(double))
    for i in range(n):
        for j in range(m):
            if a[i] == b[j]:
                cur[(i * m + j) * cell] = 1.0
                out[0] += 1.0
    for p in range(2, ell + 1):
        memcpy(s, cur, n * m * D * sizeof(double))
        for i in range(1, n):
            for j in range(m):
                for d in range(1, D):
                    s[(i * m + j) * cell + d] += s[((i - 1) * m + j) * cell + d - 1]
        for i in range(n):
            for j in range(1, m):
                for d in range(1, D):
                    s[(i * m + j) * cell + d] += s[(i * m + j - 1) * cell + d - 1]
        memset(cur, 0, n * m * D * sizeof(double))
        for i in range(1, n):
            for j in range(1, m):
                if a[i] == b[j]:
                    for d in range(D):
                        cur[(i * m + j) * cell + d] = s[((i - 1) * m + j - 1) * cell + d]
                        out[(p - 1) * D + d] += cur[(i * m + j) * cell + d]


def ssk_pair(a, b, double theta_m, double theta_g, int max_order):
    """Unnormalised kernel value between two index vectors."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] bv = np.ascontiguousarray(b, dtype=np.int32)
    cdef int n = av.shape[0], m = bv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(n * m + 3 * m,
                                                               dtype=np.float64)
    cdef double val
    with nogil:
        val = _pair_kernel(<const int*> av.data, n, <const int*> bv.data, m,
                           theta_m, theta_g, max_order,
                           <double*> scratch.data, (<double*> scratch.data) + n * m)
    return val


def ssk_cross(A, B, double theta_m, double theta_g, int max_order):
    """Unnormalised kernel values for every row pair of two sequence matrices."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2] Av = np.ascontiguousarray(A, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=2] Bv = np.ascontiguousarray(B, dtype=np.int32)
    cdef int na = Av.shape[0], nb = Bv.shape[0]
    cdef int ka = Av.shape[1], kb = Bv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((na, nb), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(ka * kb + 3 * kb,
                                                               dtype=np.float64)
    cdef const int* ap = <const int*> Av.data
    cdef const int* bp = <const int*> Bv.data
    cdef double* op = <double*> out.data
    cdef double* sp = <double*> scratch.data
    cdef int i, j
    with nogil:
        for i in range(na):
            for j in range(nb):
                op[i * nb + j] = _pair_kernel(ap + i * ka, ka, bp + j * kb, kb,
                                              theta_m, theta_g, max_order,
                                              sp, sp + ka * kb)
    return out


def ssk_gram(X, double theta_m, double theta_g, int max_order):
    """Symmetric unnormalised Gram matrix over the rows of X."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2] Xv = np.ascontiguousarray(X, dtype=np.int32)
    cdef int n = Xv.shape[0], k = Xv.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((n, n), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(k * k + 3 * k,
                                                               dtype=np.float64)
    cdef const int* xp = <const int*> Xv.data
    cdef double* op = <double*> out.data
    cdef double* sp = <double*> scratch.data
    cdef int i, j
    cdef double v
    with nogil:
        for i in range(n):
            for j in range(i, n):
                v = _pair_kernel(xp + i * k, k, xp + j * k, k,
                                 theta_m, theta_g, max_order, sp, sp + k * k)
                op[i * n + j] = v
                op[j * n + i] = v
    return out


def gap_coeff_table(a, b, int max_order, int num_powers):
    """Gap-decay polynomial coefficients of the kernel between two vectors."""
    cdef cnp.ndarray[cnp.int32_t, ndim=1] av = np.ascontiguousarray(a, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] bv = np.ascontiguousarray(b, dtype=np.int32)
    cdef int n = av.shape[0], m = bv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((max_order, num_powers),
                                                           dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(
        2 * n * m * num_powers, dtype=np.float64)
    with nogil:
        _pair_coeffs(<const int*> av.data, n, <const int*> bv.data, m,
                     max_order, num_powers,
                     <double*> scratch.data,
                     (<double*> scratch.data) + n * m * num_powers,
                     <double*> out.data)
    return out


def gap_coeff_rows(X, new, int max_order, int num_powers):
    """Coefficient tables between every row of X and one vector."""
    cdef cnp.ndarray[cnp.int32_t, ndim=2] Xv = np.ascontiguousarray(X, dtype=np.int32)
    cdef cnp.ndarray[cnp.int32_t, ndim=1] nv = np.ascontiguousarray(new, dtype=np.int32)
    cdef int n = Xv.shape[0], k = Xv.shape[1], m = nv.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] out = np.zeros(
        (n, max_order, num_powers), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] scratch = np.empty(
        2 * k * m * num_powers, dtype=np.float64)
    cdef const int* xp = <const int*> Xv.data
    cdef double* op = <double*> out.data
    cdef double* sp = <double*> scratch.data
    cdef int i
    with nogil:
        for i in range(n):
            _pair_coeffs(xp + i * k, k, <const int*> nv.data, m,
                         max_order, num_powers,
                         sp, sp + k * m * num_powers,
                         op + i * max_order * num_powers)
    return out
