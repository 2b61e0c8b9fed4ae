# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Pure-numpy twins live in ``_kernels_py``."""
import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _bin(const double[::1] cdf, double u) noexcept nogil:
    cdef Py_ssize_t k = 0
    cdef Py_ssize_t last = cdf.shape[0] - 1
    while k < last and u >= cdf[k]:
        k += 1
    return k


def inverse_cdf_counts(cdf, uniforms):
    cdef const double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef const double[::1] u = np.ascontiguousarray(uniforms, dtype=np.float64).ravel()
    out = np.zeros(c.shape[0], dtype=np.int64)
    cdef cnp.int64_t[::1] counts = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(u.shape[0]):
            counts[_bin(c, u[i])] += 1
    return out


def inverse_cdf_counts_batch(cdf, uniforms):
    cdef const double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef const double[:, ::1] u = np.ascontiguousarray(uniforms, dtype=np.float64)
    out = np.zeros((u.shape[0], c.shape[0]), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] counts = out
    cdef Py_ssize_t r, i
    with nogil:
        for r in range(u.shape[0]):
            for i in range(u.shape[1]):
                counts[r, _bin(c, u[r, i])] += 1
    return out


def evolve_sequence(superops, seq, rho):
    cdef const double complex[:, :, ::1] s = np.ascontiguousarray(superops, dtype=np.complex128)
    cdef const cnp.int64_t[::1] q = np.ascontiguousarray(seq, dtype=np.int64)
    out = np.array(rho, dtype=np.complex128).ravel()
    cdef double complex[::1] v = out
    cdef double complex w[81]
    cdef double complex acc
    cdef Py_ssize_t n = v.shape[0]
    cdef Py_ssize_t t, i, j, k
    if n > 81:
        raise ValueError("superoperator dimension too large")
    for t in range(q.shape[0]):
        k = q[t]
        if k < 0 or k >= s.shape[0]:
            raise IndexError("superoperator index out of range")
    with nogil:
        for t in range(q.shape[0]):
            k = q[t]
            for i in range(n):
                acc = 0
                for j in range(n):
                    acc = acc + s[k, i, j] * v[j]
                w[i] = acc
            for i in range(n):
                v[i] = w[i]
    return out


def qda_classify(points, means, inv_covs, offsets):
    cdef const double[:, ::1] x = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] mu = np.ascontiguousarray(means, dtype=np.float64)
    cdef const double[:, :, ::1] ic = np.ascontiguousarray(inv_covs, dtype=np.float64)
    cdef const double[::1] off = np.ascontiguousarray(offsets, dtype=np.float64)
    out = np.empty(x.shape[0], dtype=np.int64)
    cdef cnp.int64_t[::1] labels = out
    cdef Py_ssize_t n, c, best
    cdef double d0, d1, score, best_score
    with nogil:
        for n in range(x.shape[0]):
            best = 0
            best_score = 0
            for c in range(mu.shape[0]):
                d0 = x[n, 0] - mu[c, 0]
                d1 = x[n, 1] - mu[c, 1]
                score = off[c] - 0.5 * (d0 * (ic[c, 0, 0] * d0 + ic[c, 0, 1] * d1)
                                        + d1 * (ic[c, 1, 0] * d0 + ic[c, 1, 1] * d1))
                if c == 0 or score > best_score:
                    best = c
                    best_score = score
            labels[n] = best
    return out
