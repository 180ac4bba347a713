"""Pure numpy/scipy kernels; same contract as the compiled module."""

import math

import numpy as np
import scipy.linalg

BACKEND = "pure"

_SQRT3 = math.sqrt(3.0)


def expm(a):
    """exp(a) for a square complex matrix, as a new complex128 array."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return scipy.linalg.expm(a)


def transport_accumulate(samples, dt):
    """Accumulate the product integral from per-step generator samples.

    ``samples`` has shape (steps, m, n, n).  With m == 1 each step uses
    the single sample A and the step generator is dt*A (exponential
    Euler / midpoint, depending on where the caller sampled).  With
    m == 2 the samples are the two Gauss-node evaluations A1, A2 and the
    step generator is the two-node fourth-order Magnus combination

        (dt/2)(A1 + A2) + (sqrt(3) dt^2 / 12) [A2, A1].

    Returns the (steps+1, n, n) stack of accumulated propagators with
    out[0] = I and out[k+1] = exp(generator_k) @ out[k].
    """
    samples = np.asarray(samples, dtype=np.complex128)
    if samples.ndim != 4 or samples.shape[1] not in (1, 2):
        raise ValueError(f"bad sample stack shape {samples.shape}")
    steps, m, n, n2 = samples.shape
    if n != n2:
        raise ValueError(f"bad sample stack shape {samples.shape}")
    if not np.all(np.isfinite(samples)):
        raise ValueError("generator samples have non-finite entries")

    out = np.empty((steps + 1, n, n), dtype=np.complex128)
    out[0] = np.eye(n, dtype=np.complex128)
    comm_coeff = _SQRT3 * dt * dt / 12.0
    for k in range(steps):
        if m == 1:
            omega = dt * samples[k, 0]
        else:
            a1 = samples[k, 0]
            a2 = samples[k, 1]
            omega = (0.5 * dt) * (a1 + a2) + comm_coeff * (a2 @ a1 - a1 @ a2)
        out[k + 1] = scipy.linalg.expm(omega) @ out[k]
    return out
