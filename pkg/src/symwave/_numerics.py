"""Small numerical helpers shared across modules."""
from __future__ import annotations

import math

import numba
import numpy as np


def central_weights(m: int) -> np.ndarray:
    """Exact weights of the ``2m``-th order central first-derivative stencil."""
    w = np.zeros(2 * m + 1)
    for j in range(1, m + 1):
        v = (-1) ** (j + 1) * math.factorial(m) ** 2 / (
            j * math.factorial(m - j) * math.factorial(m + j))
        w[m + j], w[m - j] = v, -v
    return w


def central_derivative(values: np.ndarray, h: float, m: int = 2) -> np.ndarray:
    """Derivative on the interior nodes ``m .. n-m-1`` (length ``n - 2m``)."""
    w = central_weights(m)
    return np.convolve(values, w[::-1], mode="valid") / h


@numba.njit(cache=True)
def linear_rk4_down(alpha, h, w1, d1):
    """RK4 for ``w'' = alpha w`` from ``y = 1`` down to ``y = 0``.

    ``alpha`` holds ``2n + 1`` samples at half steps of a grid with ``n``
    intervals of width ``h``. Returns ``w`` and ``w'`` at the ``n + 1`` nodes.
    The state update uses compensated summation, so rounding does not
    accumulate over many small steps.
    """
    n = (alpha.size - 1) // 2
    w = np.empty(n + 1)
    d = np.empty(n + 1)
    w[n] = w1
    d[n] = d1
    cw = 0.0
    cd = 0.0
    H = -h
    for i in range(n, 0, -1):
        a0 = alpha[2 * i]
        am = alpha[2 * i - 1]
        a1 = alpha[2 * i - 2]
        wi = w[i] + cw
        di = d[i] + cd
        k1w = di
        k1d = a0 * wi
        k2w = di + 0.5 * H * k1d
        k2d = am * (wi + 0.5 * H * k1w)
        k3w = di + 0.5 * H * k2d
        k3d = am * (wi + 0.5 * H * k2w)
        k4w = di + H * k3d
        k4d = a1 * (wi + H * k3w)
        inc = H / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) + cw
        w[i - 1] = w[i] + inc
        cw = inc - (w[i - 1] - w[i])
        inc = H / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d) + cd
        d[i - 1] = d[i] + inc
        cd = inc - (d[i - 1] - d[i])
    return w, d
