"""Pure-Python numeric kernels.

Reference implementation of the hot loops: the seeded generator, discrete
samplers, the cyclic Jacobi eigensolver and the Cholesky routines. The
compiled module ``bellshrink._native`` mirrors this file operation for
operation (same algorithms, same floating-point evaluation order, same libm
calls), so both backends produce bit-identical streams and results. Any
change here must be replicated there.

Generator: xoshiro256++ seeded through four rounds of the splitmix64
finalizer. Uniforms take the top 53 bits. Normal variates use the Marsaglia
polar transform with the spare value cached on the generator.
"""

from __future__ import annotations

import math

import numpy as np

from bellshrink.errors import (
    DomainError,
    NotPositiveDefiniteError,
    NumericFailureError,
)

BACKEND = "python"

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0

# Poisson: Knuth multiplication below this mean, transformed rejection above.
_POISSON_SPLIT = 10.0
# Zero-truncated Poisson: sequential inversion below, rejection above.
_ZTP_SPLIT = 12.0
# Compound draws with a Poisson event count above this rate are refused.
MAX_COMPOUND_RATE = 1.0e8

_JACOBI_MAX_SWEEPS = 50


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed, index):
    """Child seed for stream ``index``: splitmix64 element of the parent seed."""
    return _mix64((int(seed) + (int(index) + 1) * _GOLDEN) & _MASK)


class Rng:
    """Deterministic xoshiro256++ stream with distribution samplers."""

    __slots__ = ("seed", "_s0", "_s1", "_s2", "_s3", "_has_spare", "_spare")

    def __init__(self, seed):
        seed = int(seed) & _MASK
        self.seed = seed
        x = seed
        s = []
        for _ in range(4):
            x = (x + _GOLDEN) & _MASK
            s.append(_mix64(x))
        self._s0, self._s1, self._s2, self._s3 = s
        self._has_spare = False
        self._spare = 0.0

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        t = (s0 + s3) & _MASK
        result = (((t << 23) | (t >> 41)) + s0) & _MASK
        t = (s1 << 17) & _MASK
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = ((s3 << 45) | (s3 >> 19)) & _MASK
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV_2_53

    def normal(self) -> float:
        """Standard normal via the polar transform; the pair's spare is cached."""
        if self._has_spare:
            self._has_spare = False
            return self._spare
        while True:
            u = 2.0 * self.uniform() - 1.0
            v = 2.0 * self.uniform() - 1.0
            s = u * u + v * v
            if 0.0 < s < 1.0:
                break
        m = math.sqrt(-2.0 * math.log(s) / s)
        self._spare = v * m
        self._has_spare = True
        return u * m

    def normals(self, n: int) -> np.ndarray:
        out = np.empty(int(n), dtype=np.float64)
        for i in range(int(n)):
            out[i] = self.normal()
        return out

    def poisson(self, lam: float) -> int:
        if not lam > 0.0:
            raise DomainError(f"poisson mean must be positive, got {lam}")
        return self._poisson(float(lam))

    def _poisson(self, lam: float) -> int:
        if lam < _POISSON_SPLIT:
            # Knuth multiplication: count uniforms until the product drops
            # below exp(-lam).
            limit = math.exp(-lam)
            k = 0
            p = 1.0
            while True:
                p *= self.uniform()
                if p <= limit:
                    return k
                k += 1
        # Hoermann's transformed rejection (PTRS), exact for lam >= 10.
        slam = math.sqrt(lam)
        loglam = math.log(lam)
        b = 0.931 + 2.53 * slam
        a = -0.059 + 0.02483 * b
        invalpha = 1.1239 + 1.1328 / (b - 3.4)
        vr = 0.9277 - 3.6224 / (b - 2.0)
        while True:
            u = self.uniform() - 0.5
            v = self.uniform()
            us = 0.5 - abs(u)
            k = math.floor((2.0 * a / us + b) * u + lam + 0.43)
            if us >= 0.07 and v <= vr:
                return k
            if k < 0 or (us < 0.013 and v > us):
                continue
            lhs = math.log(v) + math.log(invalpha) - math.log(a / (us * us) + b)
            if lhs <= k * loglam - lam - math.lgamma(k + 1.0):
                return k

    def ztp(self, theta: float) -> int:
        """Poisson(theta) conditioned on a positive outcome."""
        if not theta > 0.0:
            raise DomainError(f"zero-truncated poisson parameter must be positive, got {theta}")
        return self._ztp(float(theta))

    def _ztp(self, theta: float) -> int:
        if theta < _ZTP_SPLIT:
            # Sequential inversion starting from the smallest support point.
            u = self.uniform()
            t = theta / math.expm1(theta)
            k = 1
            s = t
            while u > s and t > 1e-312:
                k += 1
                t *= theta / k
                s += t
            return k
        while True:
            k = self._poisson(theta)
            if k >= 1:
                return k

    def bell(self, theta: float) -> int:
        """Compound draw: Poisson(e^theta - 1) many zero-truncated Poisson terms."""
        if not theta > 0.0:
            raise DomainError(f"bell parameter must be positive, got {theta}")
        return self._bell(float(theta))

    def _bell(self, theta: float) -> int:
        rate = math.expm1(theta)
        if not rate <= MAX_COMPOUND_RATE:
            raise NumericFailureError(
                f"compound event rate {rate:.3e} exceeds the exact-sampling cap {MAX_COMPOUND_RATE:.1e}"
            )
        n = self._poisson(rate) if rate > 0.0 else 0
        y = 0
        for _ in range(n):
            y += self._ztp(theta)
        return y

    def bell_fill(self, thetas) -> np.ndarray:
        """Vector of compound draws, one per entry of ``thetas``, in order."""
        th = np.ascontiguousarray(thetas, dtype=np.float64)
        out = np.empty(th.shape[0], dtype=np.int64)
        for i in range(th.shape[0]):
            t = float(th[i])
            if not t > 0.0:
                raise DomainError(f"bell parameter must be positive, got {t} at index {i}")
            if not math.expm1(t) <= MAX_COMPOUND_RATE:
                raise NumericFailureError(
                    f"compound event rate exceeds the exact-sampling cap at index {i} (theta={t:.6g})"
                )
            out[i] = self._bell(t)
        return out


def jacobi_eigh(a_in):
    """Eigenvalues (descending) and orthonormal eigenvectors of a symmetric matrix.

    Cyclic Jacobi rotations on the upper triangle; assumes the caller has
    already checked symmetry. Converges to exact off-diagonal zeros for the
    small dense matrices this package works with.
    """
    a = np.array(a_in, dtype=np.float64, order="C", copy=True)
    p = a.shape[0]
    v = np.eye(p, dtype=np.float64)
    if p == 1:
        return a.diagonal().copy(), v
    converged = False
    for sweep in range(1, _JACOBI_MAX_SWEEPS + 1):
        off = 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                off += abs(a[i, j])
        if off == 0.0:
            converged = True
            break
        thresh = 0.2 * off / (p * p) if sweep < 4 else 0.0
        for i in range(p - 1):
            for j in range(i + 1, p):
                g = 100.0 * abs(a[i, j])
                if sweep > 4 and abs(a[i, i]) + g == abs(a[i, i]) and abs(a[j, j]) + g == abs(a[j, j]):
                    a[i, j] = 0.0
                elif abs(a[i, j]) > thresh:
                    h = a[j, j] - a[i, i]
                    if abs(h) + g == abs(h):
                        t = a[i, j] / h
                    else:
                        phi = 0.5 * h / a[i, j]
                        t = 1.0 / (abs(phi) + math.sqrt(1.0 + phi * phi))
                        if phi < 0.0:
                            t = -t
                    c = 1.0 / math.sqrt(1.0 + t * t)
                    s = t * c
                    tau = s / (1.0 + c)
                    h = t * a[i, j]
                    a[i, i] -= h
                    a[j, j] += h
                    a[i, j] = 0.0
                    for r in range(i):
                        g = a[r, i]
                        hh = a[r, j]
                        a[r, i] = g - s * (hh + tau * g)
                        a[r, j] = hh + s * (g - tau * hh)
                    for r in range(i + 1, j):
                        g = a[i, r]
                        hh = a[r, j]
                        a[i, r] = g - s * (hh + tau * g)
                        a[r, j] = hh + s * (g - tau * hh)
                    for r in range(j + 1, p):
                        g = a[i, r]
                        hh = a[j, r]
                        a[i, r] = g - s * (hh + tau * g)
                        a[j, r] = hh + s * (g - tau * hh)
                    for r in range(p):
                        g = v[r, i]
                        hh = v[r, j]
                        v[r, i] = g - s * (hh + tau * g)
                        v[r, j] = hh + s * (g - tau * hh)
    if not converged:
        raise NumericFailureError(f"jacobi sweep cap ({_JACOBI_MAX_SWEEPS}) reached without convergence")
    w = np.empty(p, dtype=np.float64)
    for i in range(p):
        w[i] = a[i, i]
    # Selection sort, descending; columns of v follow their eigenvalues.
    for i in range(p - 1):
        m = i
        for j in range(i + 1, p):
            if w[j] > w[m]:
                m = j
        if m != i:
            w[i], w[m] = w[m], w[i]
            for r in range(p):
                v[r, i], v[r, m] = v[r, m], v[r, i]
    return w, v


def cholesky_spd(a_in):
    """Lower Cholesky factor of a symmetric positive-definite matrix."""
    a = np.ascontiguousarray(a_in, dtype=np.float64)
    p = a.shape[0]
    low = np.zeros((p, p), dtype=np.float64)
    for i in range(p):
        for j in range(i + 1):
            s = a[i, j]
            for r in range(j):
                s -= low[i, r] * low[j, r]
            if i == j:
                if not s > 0.0:
                    raise NotPositiveDefiniteError(f"non-positive pivot {s} at column {j}")
                low[i, j] = math.sqrt(s)
            else:
                low[i, j] = s / low[j, j]
    return low


def solve_spd(a_in, b_in):
    """Solve A x = b for symmetric positive-definite A via Cholesky."""
    low = cholesky_spd(a_in)
    b = np.ascontiguousarray(b_in, dtype=np.float64)
    p = low.shape[0]
    x = np.empty(p, dtype=np.float64)
    for i in range(p):
        s = b[i]
        for r in range(i):
            s -= low[i, r] * x[r]
        x[i] = s / low[i, i]
    for i in range(p - 1, -1, -1):
        s = x[i]
        for r in range(i + 1, p):
            s -= low[r, i] * x[r]
        x[i] = s / low[i, i]
    return x
