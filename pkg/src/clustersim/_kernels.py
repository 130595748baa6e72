"""Numerical hot loops with optional numba acceleration.

Every kernel exists twice: a plain-Python/numpy implementation and a
numba ``@njit`` compilation of the same function.  The backend is chosen
once at import time; set ``CLUSTERSIM_NO_NUMBA=1`` to force the fallback
path (useful for debugging and for the benchmark in ``benchmarks/``).

All randomness is drawn *outside* the kernels with ``numpy.random.Generator``
so that results are bit-identical regardless of the backend.
"""

import os

import numpy as np

_DISABLE = os.environ.get("CLUSTERSIM_NO_NUMBA", "").strip() not in ("", "0")

if not _DISABLE:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        _DISABLE = True

USING_NUMBA = not _DISABLE


def _bessel_j_row(g, m_max):
    """Bessel functions J_0(g) .. J_{m_max}(g) by Miller's downward recurrence.

    The recurrence J_{m-1} = (2m/g) J_m - J_{m+1} is run downward from a
    start order well above m_max and normalized with the identity
    J_0 + 2*(J_2 + J_4 + ...) = 1.
    """
    out = np.zeros(m_max + 1)
    if g == 0.0:
        out[0] = 1.0
        return out
    start = m_max + int(1.4 * abs(g)) + 25
    if start % 2 == 1:
        start += 1
    jp = 0.0  # J_{m+1}
    jc = 1e-30  # J_m at the start order (arbitrary seed)
    norm = 0.0
    for m in range(start, 0, -1):
        jm = (2.0 * m / g) * jc - jp
        jp = jc
        jc = jm
        if m - 1 <= m_max:
            out[m - 1] = jc
        if (m - 1) % 2 == 0 and m - 1 > 0:
            norm += 2.0 * jc
        # rescale to avoid overflow on long recurrences
        if abs(jc) > 1e250:
            jc *= 1e-250
            jp *= 1e-250
            norm *= 1e-250
            for k in range(m_max + 1):
                out[k] *= 1e-250
    norm += jc  # jc now holds J_0
    for k in range(m_max + 1):
        out[k] /= norm
    return out


def _ou_accumulate(normals, decay, innovation):
    """Exact-discretization Ornstein-Uhlenbeck path starting at 0.

    x[k] = decay * x[k-1] + innovation * normals[k]
    """
    n = normals.shape[0]
    out = np.empty(n)
    x = 0.0
    for k in range(n):
        x = decay * x + innovation * normals[k]
        out[k] = x
    return out


def _stabilize_loop(offsets, period_steps, est_noise, resolution):
    """Feedback correction: every period_steps samples, subtract the
    current residual offset estimate (true residual + estimator noise),
    quantized to the actuator resolution."""
    n = offsets.shape[0]
    residual = np.empty(n)
    correction = 0.0
    n_epochs = 0
    for k in range(n):
        if k > 0 and k % period_steps == 0:
            est = (offsets[k] - correction) + est_noise[n_epochs]
            n_epochs += 1
            if resolution > 0.0:
                est = np.round(est / resolution) * resolution
            correction += est
        residual[k] = offsets[k] - correction
    return residual


def _witness_samples(counts, signs, term_basis):
    """Witness value for each resampled count set.

    counts: (n, n_bases, 16) nonnegative count samples
    signs: (n_terms, 16) eigenvalue-product signs per outcome
    term_basis: (n_terms,) index of the basis each term is evaluated in
    """
    n = counts.shape[0]
    n_terms = signs.shape[0]
    out = np.empty(n)
    for i in range(n):
        s_sum = 0.0
        for t in range(n_terms):
            b = term_basis[t]
            tot = 0.0
            acc = 0.0
            for o in range(16):
                c = counts[i, b, o]
                tot += c
                acc += signs[t, o] * c
            if tot > 0.0:
                s_sum += acc / tot
        out[i] = 2.0 - 0.5 * s_sum
    return out


if USING_NUMBA:
    bessel_j_row = njit(cache=True)(_bessel_j_row)
    ou_accumulate = njit(cache=True)(_ou_accumulate)
    stabilize_loop = njit(cache=True)(_stabilize_loop)
    witness_samples = njit(cache=True)(_witness_samples)
else:
    bessel_j_row = _bessel_j_row
    ou_accumulate = _ou_accumulate
    stabilize_loop = _stabilize_loop

    def witness_samples(counts, signs, term_basis):
        # vectorized fallback; same arithmetic as the jitted loop
        totals = counts.sum(axis=2)  # (n, n_bases)
        s_sum = np.zeros(counts.shape[0])
        for t in range(signs.shape[0]):
            b = term_basis[t]
            acc = counts[:, b, :] @ signs[t]
            tot = totals[:, b]
            with np.errstate(invalid="ignore", divide="ignore"):
                s = np.where(tot > 0.0, acc / np.where(tot > 0, tot, 1.0), 0.0)
            s_sum += s
        return 2.0 - 0.5 * s_sum
