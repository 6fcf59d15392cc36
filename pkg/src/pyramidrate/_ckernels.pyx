# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; see _pykernels.py for the reference semantics."""
import numpy as np

from libc.math cimport cos, log, sqrt, M_PI
from libc.stdint cimport int64_t, uint8_t, uint64_t


cdef inline uint64_t _mix64(uint64_t z) noexcept nogil:
    z ^= z >> 30
    z *= 0xBF58476D1CE4E5B9ULL
    z ^= z >> 27
    z *= 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t _key(uint64_t base, uint64_t chain) noexcept nogil:
    return _mix64(base + chain * 0x9E3779B97F4A7C15ULL)


cdef inline double _uniform(uint64_t key, uint64_t counter) noexcept nogil:
    return <double>(_mix64(key + (counter + 1) * 0xD1B54A32D192ED03ULL) >> 11) * (1.0 / 9007199254740992.0)


cdef inline bint _inside(const double[:, ::1] normals, double[::1] x, double tol) noexcept nogil:
    cdef Py_ssize_t i, j
    cdef double s
    for i in range(normals.shape[0]):
        s = normals[i, 0] * x[0]
        for j in range(1, x.shape[0]):
            s = s + normals[i, j] * x[j]
        if not (s >= -tol):
            return False
    return True


def stream_keys(uint64_t seed, chain_ids):
    cdef uint64_t base = _mix64(seed)
    ids = np.asarray(chain_ids, dtype=np.uint64)
    cdef const uint64_t[::1] c = ids
    out = np.empty(c.shape[0], dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    for i in range(c.shape[0]):
        o[i] = _key(base, c[i])
    return out


def dp_step(double[::1] q, double[::1] out, const uint8_t[::1] mask,
            const int64_t[::1] offsets, const double[::1] probs,
            Py_ssize_t lo, Py_ssize_t hi):
    cdef Py_ssize_t na = offsets.shape[0]
    cdef Py_ssize_t a, i, j
    cdef int64_t omin = offsets[0], omax = offsets[0]
    for a in range(na):
        if offsets[a] < omin:
            omin = offsets[a]
        if offsets[a] > omax:
            omax = offsets[a]
    cdef double s, v, y, t
    cdef double ex = 0.0, exc = 0.0, tot = 0.0, totc = 0.0
    cdef Py_ssize_t new_lo = -1, new_hi = -1
    with nogil:
        for j in range(lo + omin, hi + omax + 1):
            s = out[j]
            for a in range(na):
                i = j - offsets[a]
                if i >= lo and i <= hi:
                    s = s + probs[a] * q[i]
            if s == 0.0:
                out[j] = 0.0
                continue
            if mask[j]:
                out[j] = s
                # Kahan summation
                y = s - totc
                t = tot + y
                totc = (t - tot) - y
                tot = t
                if new_lo < 0:
                    new_lo = j
                new_hi = j
            else:
                out[j] = 0.0
                y = s - exc
                t = ex + y
                exc = (t - ex) - y
                ex = t
    return ex, tot, new_lo, new_hi


def mc_exit_times_atomic(const double[:, ::1] atoms, const double[::1] cum,
                         const double[:, ::1] normals, x0, uint64_t seed,
                         int64_t chain_start, int64_t n_chains, int64_t horizon, double tol):
    cdef Py_ssize_t dim = atoms.shape[1], k = cum.shape[0]
    cdef const double[::1] start = np.ascontiguousarray(x0, dtype=np.float64)
    x_buf = np.empty(dim, dtype=np.float64)
    cdef double[::1] x = x_buf
    out = np.empty(n_chains, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t base = _mix64(seed), key
    cdef int64_t c, n, t
    cdef Py_ssize_t i, j
    cdef double u
    with nogil:
        for c in range(n_chains):
            key = _key(base, <uint64_t>(chain_start + c))
            for i in range(dim):
                x[i] = start[i]
            t = horizon + 1
            for n in range(horizon):
                u = _uniform(key, <uint64_t>n)
                j = 0
                while j < k - 1 and not (u < cum[j]):
                    j += 1
                for i in range(dim):
                    x[i] = x[i] + atoms[j, i]
                if not _inside(normals, x, tol):
                    t = n + 1
                    break
            o[c] = t
    return out


def mc_exit_times_gauss(mean, const double[:, ::1] normals, x0, uint64_t seed,
                        int64_t chain_start, int64_t n_chains, int64_t horizon, double tol):
    cdef const double[::1] m = np.ascontiguousarray(mean, dtype=np.float64)
    cdef const double[::1] start = np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t dim = m.shape[0]
    x_buf = np.empty(dim, dtype=np.float64)
    cdef double[::1] x = x_buf
    out = np.empty(n_chains, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t base = _mix64(seed), key, ctr
    cdef int64_t c, n, t
    cdef Py_ssize_t i
    cdef double u1, u2, z
    with nogil:
        for c in range(n_chains):
            key = _key(base, <uint64_t>(chain_start + c))
            for i in range(dim):
                x[i] = start[i]
            t = horizon + 1
            for n in range(horizon):
                for i in range(dim):
                    ctr = <uint64_t>(n * 2 * dim + 2 * i)
                    u1 = _uniform(key, ctr)
                    u2 = _uniform(key, ctr + 1)
                    z = sqrt(-2.0 * log(1.0 - u1)) * cos(2.0 * M_PI * u2)
                    x[i] = x[i] + (m[i] + z)
                if not _inside(normals, x, tol):
                    t = n + 1
                    break
            o[c] = t
    return out
