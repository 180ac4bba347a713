# cython: language_level=3, boundscheck=False, wraparound=False
# cython: cdivision=True, initializedcheck=False
"""Compiled kernels: same contract as the pure module.

The matrix exponential is Pade-13 with scaling and squaring, built on
BLAS zgemm and one LAPACK zgesv solve per call.  Buffers are row-major;
zgemm arguments are swapped so the column-major routine computes the
row-major product, and the zgesv solve returns (V+U)(V-U)^-1 instead of
(V-U)^-1(V+U), which is the same matrix because U and V are polynomials
in the scaled input and therefore commute.

The accumulation loop exponentiates one step generator at a time and
multiplies onto the running product without touching the GIL.
"""

import numpy as np

from libc.math cimport ceil, ldexp, log2, sqrt
from libc.string cimport memcpy
from scipy.linalg.cython_blas cimport zgemm
from scipy.linalg.cython_lapack cimport zgesv

BACKEND = "compiled"

ctypedef double complex zc

cdef double THETA13 = 5.371920351148152

cdef double[14] PADE13_B
PADE13_B[0] = 64764752532480000.0
PADE13_B[1] = 32382376266240000.0
PADE13_B[2] = 7771770303897600.0
PADE13_B[3] = 1187353796428800.0
PADE13_B[4] = 129060195264000.0
PADE13_B[5] = 10559470521600.0
PADE13_B[6] = 670442572800.0
PADE13_B[7] = 33522128640.0
PADE13_B[8] = 1323241920.0
PADE13_B[9] = 40840800.0
PADE13_B[10] = 960960.0
PADE13_B[11] = 16380.0
PADE13_B[12] = 182.0
PADE13_B[13] = 1.0


cdef void _matmul(int n, const zc* a, const zc* b, zc* c) nogil:
    # Row-major C = A @ B via column-major BLAS: swap the operands.
    cdef char tn = b'N'
    cdef zc one = 1.0
    cdef zc zero = 0.0
    zgemm(&tn, &tn, &n, &n, &n, &one, <zc*> b, &n, <zc*> a, &n, &zero, c, &n)


cdef double _abs_row_sum_norm(int n, const zc* a) nogil:
    cdef double best = 0.0
    cdef double acc
    cdef zc z
    cdef int i, j
    for i in range(n):
        acc = 0.0
        for j in range(n):
            z = a[i * n + j]
            acc += sqrt(z.real * z.real + z.imag * z.imag)
        if acc > best:
            best = acc
    return best


cdef void _poly_combine(int nn, zc* dst, const zc* a2, const zc* a4,
                        const zc* a6, double c2, double c4, double c6) nogil:
    cdef int i
    for i in range(nn):
        dst[i] = c2 * a2[i] + c4 * a4[i] + c6 * a6[i]


cdef int _expm_core(int n, const zc* a, zc* out, zc* work, int* ipiv) nogil:
    """Pade-13 scaling and squaring into ``out``.  ``work`` holds eight
    n*n scratch blocks.  Returns 0, or -1 for a non-finite norm, -2 for
    an unscalable norm, or the positive zgesv info on a singular solve.
    """
    cdef int nn = n * n
    cdef zc* w_as = work
    cdef zc* w_a2 = work + nn
    cdef zc* w_a4 = work + 2 * nn
    cdef zc* w_a6 = work + 3 * nn
    cdef zc* w_p = work + 4 * nn
    cdef zc* w_q = work + 5 * nn
    cdef zc* w_m = work + 6 * nn
    cdef zc* w_t = work + 7 * nn
    cdef zc* cur
    cdef zc* spare
    cdef zc* swap
    cdef double norm = _abs_row_sum_norm(n, a)
    cdef double scale
    cdef int s = 0
    cdef int i, k, info, nrhs

    if not (norm == norm and norm - norm == 0.0):
        return -1
    if norm > THETA13:
        s = <int> ceil(log2(norm / THETA13))
    if s > 1024:
        return -2
    scale = ldexp(1.0, -s)
    for i in range(nn):
        w_as[i] = scale * a[i]

    _matmul(n, w_as, w_as, w_a2)
    _matmul(n, w_a2, w_a2, w_a4)
    _matmul(n, w_a2, w_a4, w_a6)

    # U = As (A6 (b13 A6 + b11 A4 + b9 A2) + b7 A6 + b5 A4 + b3 A2 + b1 I)
    _poly_combine(nn, w_p, w_a2, w_a4, w_a6,
                  PADE13_B[9], PADE13_B[11], PADE13_B[13])
    _matmul(n, w_a6, w_p, w_q)
    for i in range(nn):
        w_q[i] = w_q[i] + (PADE13_B[3] * w_a2[i] + PADE13_B[5] * w_a4[i]
                           + PADE13_B[7] * w_a6[i])
    for i in range(n):
        w_q[i * n + i] = w_q[i * n + i] + PADE13_B[1]
    _matmul(n, w_as, w_q, w_p)

    # V = A6 (b12 A6 + b10 A4 + b8 A2) + b6 A6 + b4 A4 + b2 A2 + b0 I
    _poly_combine(nn, w_q, w_a2, w_a4, w_a6,
                  PADE13_B[8], PADE13_B[10], PADE13_B[12])
    _matmul(n, w_a6, w_q, w_m)
    for i in range(nn):
        w_m[i] = w_m[i] + (PADE13_B[2] * w_a2[i] + PADE13_B[4] * w_a4[i]
                           + PADE13_B[6] * w_a6[i])
    for i in range(n):
        w_m[i * n + i] = w_m[i * n + i] + PADE13_B[0]

    # Solve (V - U) R = (V + U); buffers: w_q <- V - U, w_t <- V + U.
    for i in range(nn):
        w_q[i] = w_m[i] - w_p[i]
        w_t[i] = w_m[i] + w_p[i]
    info = 0
    nrhs = n
    zgesv(&n, &nrhs, w_q, &n, ipiv, w_t, &n, &info)
    if info != 0:
        return info

    cur = w_t
    spare = w_p
    for k in range(s):
        _matmul(n, cur, cur, spare)
        swap = cur
        cur = spare
        spare = swap
    memcpy(out, cur, nn * sizeof(zc))
    return 0


def expm(a):
    """exp(a) for a square complex matrix, as a new complex128 array."""
    a = np.ascontiguousarray(np.asarray(a, dtype=np.complex128))
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    cdef int n = a.shape[0]
    out = np.empty((n, n), dtype=np.complex128)
    work = np.empty((8, n, n), dtype=np.complex128)
    ipiv = np.empty(n, dtype=np.intc)
    cdef const zc[:, ::1] av = a
    cdef zc[:, ::1] ov = out
    cdef zc[:, :, ::1] wv = work
    cdef int[::1] pv = ipiv
    cdef int rc
    with nogil:
        rc = _expm_core(n, &av[0, 0], &ov[0, 0], &wv[0, 0, 0], &pv[0])
    _raise_for(rc)
    return out


def _raise_for(rc):
    if rc == 0:
        return
    if rc == -1:
        raise ValueError("matrix has non-finite entries")
    if rc == -2:
        raise ValueError("matrix norm is too large to scale")
    raise RuntimeError(f"Pade denominator solve failed (info={rc})")


def transport_accumulate(samples, dt):
    """Accumulate the product integral from per-step generator samples.

    Same contract as the pure kernel: samples shaped (steps, m, n, n)
    with m == 1 exponentiating dt*A per step and m == 2 combining the
    two Gauss-node samples into the fourth-order Magnus generator.
    Returns the (steps+1, n, n) propagator stack, out[0] = identity.
    """
    samples = np.ascontiguousarray(np.asarray(samples, dtype=np.complex128))
    if samples.ndim != 4 or samples.shape[1] not in (1, 2):
        raise ValueError(f"bad sample stack shape {samples.shape}")
    if samples.shape[2] != samples.shape[3]:
        raise ValueError(f"bad sample stack shape {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise ValueError("generator samples have non-finite entries")
    cdef int steps = samples.shape[0]
    cdef int m = samples.shape[1]
    cdef int n = samples.shape[2]
    cdef double dt_c = dt
    out = np.empty((steps + 1, n, n), dtype=np.complex128)
    work = np.empty((12, n, n), dtype=np.complex128)
    ipiv = np.empty(n, dtype=np.intc)

    cdef const zc[:, :, :, ::1] sv = samples
    cdef zc[:, :, ::1] ov = out
    cdef zc[:, :, ::1] wv = work
    cdef int[::1] pv = ipiv

    cdef int nn = n * n
    cdef double q = sqrt(3.0) * dt_c * dt_c / 12.0
    cdef double half_dt = 0.5 * dt_c
    cdef const zc* sp
    cdef const zc* a1
    cdef const zc* a2
    cdef zc* op
    cdef zc* w_exp
    cdef zc* w_om
    cdef zc* w_u
    cdef zc* w_c1
    cdef zc* w_c2
    cdef int* ip
    cdef int i, k, rc = 0

    sp = &sv[0, 0, 0, 0] if steps > 0 else NULL
    op = &ov[0, 0, 0]
    w_exp = &wv[0, 0, 0]
    w_om = w_exp + 8 * nn
    w_u = w_exp + 9 * nn
    w_c1 = w_exp + 10 * nn
    w_c2 = w_exp + 11 * nn
    ip = &pv[0]

    with nogil:
        for i in range(nn):
            op[i] = 0.0
        for i in range(n):
            op[i * n + i] = 1.0
        for k in range(steps):
            if m == 1:
                for i in range(nn):
                    w_om[i] = dt_c * sp[k * nn + i]
            else:
                a1 = sp + 2 * k * nn
                a2 = a1 + nn
                _matmul(n, a2, a1, w_c1)
                _matmul(n, a1, a2, w_c2)
                for i in range(nn):
                    w_om[i] = (half_dt * (a1[i] + a2[i])
                               + q * (w_c1[i] - w_c2[i]))
            rc = _expm_core(n, w_om, w_u, w_exp, ip)
            if rc != 0:
                break
            _matmul(n, w_u, op + k * nn, op + (k + 1) * nn)
    _raise_for(rc)
    return out
