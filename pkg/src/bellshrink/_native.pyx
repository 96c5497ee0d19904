# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled numeric kernels.

Cython build of the hot loops in ``bellshrink._pure``: the two modules are
maintained in lockstep (same algorithms, same floating-point evaluation
order, same libm calls) so that a given seed yields bit-identical output on
either backend. Any change here must be replicated there.
"""

import numpy as np

from libc.math cimport exp, expm1, fabs, floor, lgamma, log, sqrt
from libc.stdint cimport int64_t, uint64_t

from bellshrink.errors import (
    DomainError,
    NotPositiveDefiniteError,
    NumericFailureError,
)

BACKEND = "compiled"

cdef double _INV_2_53 = 1.0 / 9007199254740992.0
cdef double _POISSON_SPLIT = 10.0
cdef double _ZTP_SPLIT = 12.0
cdef double _MAX_COMPOUND_RATE = 1.0e8
MAX_COMPOUND_RATE = _MAX_COMPOUND_RATE

cdef int _JACOBI_MAX_SWEEPS = 50

cdef uint64_t _GOLDEN = 0x9E3779B97F4A7C15U
cdef uint64_t _MIX1 = 0xBF58476D1CE4E5B9U
cdef uint64_t _MIX2 = 0x94D049BB133111EBU


cdef inline uint64_t _mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * _MIX1
    z = (z ^ (z >> 27)) * _MIX2
    return z ^ (z >> 31)


def derive_seed(seed, index):
    """Child seed for stream ``index``: splitmix64 element of the parent seed."""
    cdef uint64_t s = <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF)
    cdef uint64_t i = <uint64_t> (int(index) & 0xFFFFFFFFFFFFFFFF)
    return _mix64(s + (i + 1U) * _GOLDEN)


cdef class Rng:
    """Deterministic xoshiro256++ stream with distribution samplers."""

    cdef uint64_t s0, s1, s2, s3
    cdef bint has_spare
    cdef double spare
    cdef readonly object seed

    def __init__(self, seed):
        cdef uint64_t x = <uint64_t> (int(seed) & 0xFFFFFFFFFFFFFFFF)
        self.seed = int(seed) & 0xFFFFFFFFFFFFFFFF
        x = x + _GOLDEN
        self.s0 = _mix64(x)
        x = x + _GOLDEN
        self.s1 = _mix64(x)
        x = x + _GOLDEN
        self.s2 = _mix64(x)
        x = x + _GOLDEN
        self.s3 = _mix64(x)
        self.has_spare = False
        self.spare = 0.0

    cdef inline uint64_t _next(self) nogil:
        cdef uint64_t t = self.s0 + self.s3
        cdef uint64_t result = ((t << 23) | (t >> 41)) + self.s0
        t = self.s1 << 17
        self.s2 ^= self.s0
        self.s3 ^= self.s1
        self.s1 ^= self.s2
        self.s0 ^= self.s3
        self.s2 ^= t
        self.s3 = (self.s3 << 45) | (self.s3 >> 19)
        return result

    def next_u64(self):
        return self._next()

    cdef inline double _uniform(self) nogil:
        return <double> (self._next() >> 11) * _INV_2_53

    def uniform(self):
        """Uniform double in [0, 1) from the top 53 bits."""
        return self._uniform()

    cdef double _normal(self) nogil:
        cdef double u, v, s, m
        if self.has_spare:
            self.has_spare = False
            return self.spare
        while True:
            u = 2.0 * self._uniform() - 1.0
            v = 2.0 * self._uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        m = sqrt(-2.0 * log(s) / s)
        self.spare = v * m
        self.has_spare = True
        return u * m

    def normal(self):
        """Standard normal via the polar transform; the pair's spare is cached."""
        return self._normal()

    def normals(self, n):
        cdef Py_ssize_t m = int(n)
        out = np.empty(m, dtype=np.float64)
        cdef double[::1] ov = out
        cdef Py_ssize_t i
        for i in range(m):
            ov[i] = self._normal()
        return out

    cdef int64_t _poisson(self, double lam) nogil:
        cdef double limit, p, slam, loglam, b, a, invalpha, vr, u, v, us, kd, lhs
        cdef int64_t k
        if lam < _POISSON_SPLIT:
            # Knuth multiplication: count uniforms until the product drops
            # below exp(-lam).
            limit = exp(-lam)
            k = 0
            p = 1.0
            while True:
                p *= self._uniform()
                if p <= limit:
                    return k
                k += 1
        # Hoermann's transformed rejection (PTRS), exact for lam >= 10.
        slam = sqrt(lam)
        loglam = log(lam)
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        invalpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2.0)
        while True:
            u = self._uniform() - 0.5
            v = self._uniform()
            us = 0.5 - fabs(u)
            kd = floor((2.0 * a / us + b) * u + lam + 0.43)
            if us >= 0.07 and v <= vr:
                return <int64_t> kd
            if kd < 0 or (us < 0.013 and v > us):
                continue
            lhs = log(v) + log(invalpha) - log(a / (us * us) + b)
            if lhs <= kd * loglam - lam - lgamma(kd + 1.0):
                return <int64_t> kd

    def poisson(self, lam):
        cdef double l = float(lam)
        if not l > 0.0:
            raise DomainError(f"poisson mean must be positive, got {lam}")
        return self._poisson(l)

    cdef int64_t _ztp(self, double theta) nogil:
        cdef double u, t, s
        cdef int64_t k
        if theta < _ZTP_SPLIT:
            # Sequential inversion starting from the smallest support point.
            u = self._uniform()
            t = theta / expm1(theta)
            k = 1
            s = t
            while u > s and t > 1e-312:
                k += 1
                t *= theta / <double> k
                s += t
            return k
        while True:
            k = self._poisson(theta)
            if k >= 1:
                return k

    def ztp(self, theta):
        """Poisson(theta) conditioned on a positive outcome."""
        cdef double t = float(theta)
        if not t > 0.0:
            raise DomainError(f"zero-truncated poisson parameter must be positive, got {theta}")
        return self._ztp(t)

    cdef int64_t _bell(self, double theta) except -1:
        cdef double rate = expm1(theta)
        cdef int64_t n, y, i
        if not rate <= _MAX_COMPOUND_RATE:
            raise NumericFailureError(
                f"compound event rate {rate:.3e} exceeds the exact-sampling cap {_MAX_COMPOUND_RATE:.1e}"
            )
        n = self._poisson(rate) if rate > 0.0 else 0
        y = 0
        for i in range(n):
            y += self._ztp(theta)
        return y

    def bell(self, theta):
        """Compound draw: Poisson(e^theta - 1) many zero-truncated Poisson terms."""
        cdef double t = float(theta)
        if not t > 0.0:
            raise DomainError(f"bell parameter must be positive, got {theta}")
        return self._bell(t)

    def bell_fill(self, thetas):
        """Vector of compound draws, one per entry of ``thetas``, in order."""
        th = np.ascontiguousarray(thetas, dtype=np.float64)
        cdef double[::1] tv = th
        out = np.empty(tv.shape[0], dtype=np.int64)
        cdef int64_t[::1] ov = out
        cdef Py_ssize_t i
        cdef double t
        for i in range(tv.shape[0]):
            t = tv[i]
            if not t > 0.0:
                raise DomainError(f"bell parameter must be positive, got {t} at index {i}")
            if not expm1(t) <= _MAX_COMPOUND_RATE:
                raise NumericFailureError(
                    f"compound event rate exceeds the exact-sampling cap at index {i} (theta={t:.6g})"
                )
            ov[i] = self._bell(t)
        return out


def jacobi_eigh(a_in):
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.

    Cyclic Jacobi rotations on the upper triangle; assumes the caller has
    already checked symmetry.
    """
    a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    cdef double[:, ::1] am = a
    cdef Py_ssize_t p = am.shape[0]
    v = np.eye(p, dtype=np.float64)
    cdef double[:, ::1] vm = v
    if p == 1:
        return a.diagonal().copy(), v
    cdef bint converged = False
    cdef int sweep
    cdef Py_ssize_t i, j, r, m
    cdef double off, thresh, g, h, hh, t, phi, c, s, tau, tmp
    for sweep in range(1, _JACOBI_MAX_SWEEPS + 1):
        off = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                off += fabs(am[i, j])
        if off == 0.0:
            converged = True
            break
        thresh = 0.2 * off / (p * p) if sweep < 4 else 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                g = 100.0 * fabs(am[i, j])
                if sweep > 4 and fabs(am[i, i]) + g == fabs(am[i, i]) and fabs(am[j, j]) + g == fabs(am[j, j]):
                    am[i, j] = 0.0
                elif fabs(am[i, j]) > thresh:
                    h = am[j, j] - am[i, i]
                    if fabs(h) + g == fabs(h):
                        t = am[i, j] / h
                    else:
                        phi = 0.5 * h / am[i, j]
                        t = 1.0 / (fabs(phi) + sqrt(1.0 + phi * phi))
                        if phi < 0.0:
                            t = -t
                    c = 1.0 / sqrt(1.0 + t * t)
                    s = t * c
                    tau = s / (1.0 + c)
                    h = t * am[i, j]
                    am[i, i] -= h
                    am[j, j] += h
                    am[i, j] = 0.0
                    for r in range(i):
                        g = am[r, i]
                        hh = am[r, j]
                        am[r, i] = g - s * (hh + tau * g)
                        am[r, j] = hh + s * (g - tau * hh)
                    for r in range(i + 1, j):
                        g = am[i, r]
                        hh = am[r, j]
                        am[i, r] = g - s * (hh + tau * g)
                        am[r, j] = hh + s * (g - tau * hh)
                    for r in range(j + 1, p):
                        g = am[i, r]
                        hh = am[j, r]
                        am[i, r] = g - s * (hh + tau * g)
                        am[j, r] = hh + s * (g - tau * hh)
                    for r in range(p):
                        g = vm[r, i]
                        hh = vm[r, j]
                        vm[r, i] = g - s * (hh + tau * g)
                        vm[r, j] = hh + s * (g - tau * hh)
    if not converged:
        raise NumericFailureError(f"jacobi sweep cap ({_JACOBI_MAX_SWEEPS}) reached without convergence")
    w = np.empty(p, dtype=np.float64)
    cdef double[::1] wv = w
    for i in range(p):
        wv[i] = am[i, i]
    # Selection sort, descending; columns of v follow their eigenvalues.
    for i in range(p - 1):
        m = i
        for j in range(i + 1, p):
            if wv[j] > wv[m]:
                m = j
        if m != i:
            tmp = wv[i]
            wv[i] = wv[m]
            wv[m] = tmp
            for r in range(p):
                tmp = vm[r, i]
                vm[r, i] = vm[r, m]
                vm[r, m] = tmp
    return w, v


def cholesky_spd(a_in):
    """Lower Cholesky factor of a symmetric positive-definite matrix."""
    a = np.ascontiguousarray(a_in, dtype=np.float64)
    cdef double[:, ::1] am = a
    cdef Py_ssize_t p = am.shape[0]
    low = np.zeros((p, p), dtype=np.float64)
    cdef double[:, ::1] lv = low
    cdef Py_ssize_t i, j, r
    cdef double s
    for i in range(p):
        for j in range(i + 1):
            s = am[i, j]
            for r in range(j):
                s -= lv[i, r] * lv[j, r]
            if i == j:
                if not s > 0.0:
                    raise NotPositiveDefiniteError(f"non-positive pivot {s} at column {j}")
                lv[i, j] = sqrt(s)
            else:
                lv[i, j] = s / lv[j, j]
    return low


def solve_spd(a_in, b_in):
    """Solve A x = b for symmetric positive-definite A via Cholesky."""
    low = cholesky_spd(a_in)
    cdef double[:, ::1] lv = low
    b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef double[::1] bv = b
    cdef Py_ssize_t p = lv.shape[0]
    x = np.empty(p, dtype=np.float64)
    cdef double[::1] xv = x
    cdef Py_ssize_t i, r
    cdef double s
    for i in range(p):
        s = bv[i]
        for r in range(i):
            s -= lv[i, r] * xv[r]
        xv[i] = s / lv[i, i]
    for i in range(p - 1, -1, -1):
        s = xv[i]
        for r in range(i + 1, p):
            s -= lv[r, i] * xv[r]
        xv[i] = s / lv[i, i]
    return x
