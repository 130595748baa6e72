"""First-kind Bessel functions and the balanced beam-splitter operating point.

J_m is evaluated by downward recurrence with series normalization, so the
package has no special-function dependency at runtime.  The test suite
cross-checks against scipy to ten digits.
"""

from functools import lru_cache

import numpy as np

from ._kernels import bessel_j_row


@lru_cache(maxsize=4096)
def _row_cached(g: float, m_max: int):
    row = bessel_j_row(float(g), int(m_max))
    row.setflags(write=False)
    return row


def bessel_j(m: int, g: float) -> float:
    """J_m(g) for integer order m (negative orders via J_{-m} = (-1)^m J_m)."""
    sign = 1.0
    if g < 0:
        g = -g
        sign *= (-1.0) ** (m % 2)
    if m < 0:
        m = -m
        sign *= (-1.0) ** (m % 2)
    return sign * _row_cached(g, m)[m]


def bessel_row(g: float, m_max: int) -> np.ndarray:
    """Array [J_0(g), ..., J_{m_max}(g)]."""
    return _row_cached(float(g), int(m_max))


def efficiency(g: float) -> float:
    """Two-bin beam-splitter scattering efficiency |J_0(g)|^2 + |J_1(g)|^2.

    This is the probability that a photon stays inside the two nominal
    output bins instead of scattering into ancillary modulation orders.
    """
    if g < 0:
        raise ValueError("modulation depth must be nonnegative")
    row = bessel_row(g, 1)
    return float(row[0] ** 2 + row[1] ** 2)


@lru_cache(maxsize=1)
def solve_balanced_depth() -> float:
    """Smallest g > 0 with J_0(g) = J_1(g), i.e. a balanced time-bin splitter.

    Bracketed bisection; the root is near 1.4342.
    """

    def f(g):
        row = bessel_row(g, 1)
        return row[0] - row[1]

    lo, hi = 1.0, 2.0
    assert f(lo) > 0 > f(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    return 0.5 * (lo + hi)
