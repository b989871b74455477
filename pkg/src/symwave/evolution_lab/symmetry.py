"""Reflection axes and translation defects of periodic profiles.

For ``u`` with Fourier coefficients ``u_k`` on a period ``L``, the
reflection ``u(2 lam - x)`` has coefficients ``conj(u_k) exp(-2 i k lam)``
and the correlation ``C(tau) = int u(x) u(tau - x) dx`` has coefficients
``u_k^2``. ``||u - u(2 lam - .)||^2 = 2 ||u||^2 - 2 C(2 lam)``, so the best
axis sits at the correlation peak. Defects are evaluated through Parseval
on the coefficient difference rather than through that identity, which
would lose half the digits to cancellation.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ZeroState
from .solvers import Trajectory


@dataclass(frozen=True, eq=False)
class SymmetryAxisSeries:
    times: np.ndarray
    lam: np.ndarray
    asymmetry: np.ndarray

    def affine_fit(self, period: float):
        """Least-squares ``lam ~ p t + q`` after unwrapping modulo ``period``.

        Returns ``(slope, intercept, max_deviation)`` over present entries.
        """
        ok = np.isfinite(self.lam)
        t = self.times[ok]
        lam = np.unwrap(self.lam[ok], period=period)
        if t.size < 2:
            return 0.0, float(lam[0]) if lam.size else math.nan, 0.0
        p, q = np.polyfit(t, lam, 1)
        dev = float(np.max(np.abs(lam - (p * t + q))))
        return float(p), float(q), dev


def _coefficients(u: np.ndarray) -> np.ndarray:
    return np.fft.fft(u) / u.size


def _ks(n: int, L: float) -> np.ndarray:
    return 2.0 * math.pi * np.fft.fftfreq(n, d=L / n)


def _peak(coef: np.ndarray, k: np.ndarray, L: float) -> float:
    """Maximizer of the real trigonometric series ``sum coef e^{i k tau}``."""
    n = coef.size
    values = np.real(np.fft.ifft(coef) * n)
    j = int(np.argmax(values))
    h = L / n
    ym, y0, yp = values[j - 1], values[j], values[(j + 1) % n]
    denom = ym - 2.0 * y0 + yp
    shift = 0.5 * (ym - yp) / denom if denom < 0 else 0.0
    tau = (j + shift) * h
    # Newton polish on the exact series
    for _ in range(20):
        e = np.exp(1j * k * tau)
        d1 = float(np.real(np.sum(1j * k * coef * e)))
        d2 = float(np.real(np.sum(-k * k * coef * e)))
        if d2 >= 0:
            break
        step = -d1 / d2
        if abs(step) > h:
            step = math.copysign(h, step)
        tau += step
        if abs(step) < 1e-15 * max(1.0, L):
            break
    return tau % L


def _value_at(coef: np.ndarray, k: np.ndarray, x: float) -> float:
    return float(np.real(np.sum(coef * np.exp(1j * k * x))))


def reflection_axis(u: np.ndarray, L: float, x0: float = 0.0):
    """Best reflection axis ``lam`` and normalized defect for one profile.

    The grid is ``x0 + j L / n``. Reflection axes come in pairs
    ``lam, lam + L/2``; the one where ``u`` is larger is returned.
    """
    u = np.asarray(u, dtype=float)
    n = u.size
    norm = float(np.linalg.norm(u))
    if norm == 0.0:
        raise ZeroState("axis undefined for the zero state")
    c = _coefficients(u)
    k = _ks(n, L)
    # work in the shifted coordinate s = x - x0
    tau = _peak(c * c * n, k, L)
    lam_s = 0.5 * tau
    if _value_at(c, k, lam_s + 0.5 * L) > _value_at(c, k, lam_s):
        lam_s += 0.5 * L
    refl = np.conj(c) * np.exp(-2j * k * lam_s)
    defect = math.sqrt(float(np.sum(np.abs(c - refl) ** 2)) * n) / (2.0 * norm)
    lam = (lam_s + x0 + 0.5 * L) % L - 0.5 * L
    return lam, min(defect, 1.0)


def track_symmetry_axis(trajectory: Trajectory) -> SymmetryAxisSeries:
    """Axis ``lam(t)`` (in ``[-L/2, L/2)``) and asymmetry per stored time.

    Zero states get ``nan`` entries.
    """
    L = trajectory.config.domain_length
    x0 = float(trajectory.x[0])
    lam, asym = [], []
    for u in trajectory.states:
        try:
            a, d = reflection_axis(u, L, x0)
        except ZeroState:
            a, d = math.nan, math.nan
        lam.append(a)
        asym.append(d)
    return SymmetryAxisSeries(trajectory.times.copy(), np.array(lam), np.array(asym))


def best_shift(u: np.ndarray, ref: np.ndarray, L: float):
    """Shift ``s`` minimizing ``||u(. + s) - ref||`` and the relative defect."""
    n = ref.size
    nr = float(np.linalg.norm(ref))
    if nr == 0.0:
        raise ZeroState("reference state is zero")
    cu = _coefficients(np.asarray(u, dtype=float))
    cr = _coefficients(np.asarray(ref, dtype=float))
    k = _ks(n, L)
    # <u(. + s), ref> has coefficients cu conj(cr) e^{i k s}
    s = _peak(cu * np.conj(cr) * n, k, L)
    shifted = cu * np.exp(1j * k * s)
    defect = math.sqrt(float(np.sum(np.abs(shifted - cr) ** 2)) * n) / nr
    s = (s + 0.5 * L) % L - 0.5 * L
    return s, defect


def shape_drift(trajectory: Trajectory) -> np.ndarray:
    """``min_s ||u(t, . + s) - u(0, .)|| / ||u(0, .)||`` per stored time."""
    L = trajectory.config.domain_length
    ref = trajectory.states[0]
    if not np.any(ref):
        raise ZeroState("initial state is zero")
    return np.array([best_shift(u, ref, L)[1] for u in trajectory.states])
