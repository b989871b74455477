"""Steady Camassa-Holm profiles and the weak steady residual.

A traveling wave ``u = phi(x - ct)`` of

    (1 - d_xx) u_t + 2 kappa u_x + u (1 - d_xx) u_x + 2 u_x (1 - d_xx) u = 0

integrates twice to the quadrature identity

    phi_x^2 = (phi^2 (c - 2 kappa - phi) + a phi + b) / (c - phi) =: G(phi)

with integration constants ``a, b``. Profiles are built from the crest
(the largest root of the numerator below ``c``) by integrating
``phi'' = G'(phi) / 2`` and reflected to give an even wave.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from ..errors import InvalidArgument, NearCriticalValue, NoSmoothOrbit

CRITICAL_GAP = 1e-8


@dataclass(frozen=True, eq=False)
class TravelingProfile:
    """Profile samples on ``x`` with an optional exact evaluator.

    ``evaluate(x)`` returns ``(phi, phi_x)`` at arbitrary points (``phi_x``
    almost everywhere for a peakon).
    """

    x: np.ndarray
    phi: np.ndarray
    c: float
    ch_kappa: float
    a: float = 0.0
    b: float = 0.0
    kind: str = "solitary"
    center: float = 0.0
    evaluate: Optional[Callable] = field(default=None, repr=False)

    @property
    def domain_length(self) -> float:
        return float(self.x[1] - self.x[0]) * self.x.size

    def endpoint_slope(self) -> float:
        if self.evaluate is None:
            return math.nan
        ends = np.array([self.x[0], self.x[0] + self.domain_length])
        return float(np.max(np.abs(self.evaluate(ends)[1])))

    def with_speed(self, c: float) -> "TravelingProfile":
        """Same shape, different nominal speed (for residual checks)."""
        return TravelingProfile(self.x, self.phi, float(c), self.ch_kappa, self.a, self.b,
                                self.kind, self.center, self.evaluate)


def _numerator(c, kappa, a, b):
    # -phi^3 + (c - 2 kappa) phi^2 + a phi + b, highest degree first
    return np.array([-1.0, c - 2.0 * kappa, a, b])


def steady_rhs(phi, c, kappa, a, b):
    """``G(phi)``, the right-hand side of the quadrature identity."""
    phi = np.asarray(phi, dtype=float)
    return np.polyval(_numerator(c, kappa, a, b), phi) / (c - phi)


def _real_roots(poly):
    r = np.roots(poly)
    r = np.sort(r[np.abs(r.imag) <= 1e-9 * max(1.0, np.max(np.abs(r)))].real)
    return r


def _orbit(c, kappa, a, b):
    """``(crest, trough, solitary)`` for the orbit below the crest."""
    poly = _numerator(c, kappa, a, b)
    roots = _real_roots(poly)
    if roots.size == 0:
        raise NoSmoothOrbit("numerator has no real roots")
    crest = roots[-1]
    if crest >= c - CRITICAL_GAP:
        raise NearCriticalValue(f"crest {crest:.6g} reaches the speed c = {c:.6g}")
    below = roots[roots < crest - 1e-7 * max(1.0, abs(crest))]
    if below.size == 0:
        raise NoSmoothOrbit("no second root below the crest")
    trough = below[-1]
    mid = 0.5 * (crest + trough)
    if not steady_rhs(mid, c, kappa, a, b) > 0:
        raise NoSmoothOrbit("quadrature right-hand side is negative on the orbit")
    # a double root at the trough gives a solitary wave
    dpoly = np.polyder(poly)
    solitary = abs(np.polyval(dpoly, trough)) <= 1e-9 * max(1.0, abs(c) + abs(kappa)) ** 2
    return float(crest), float(trough), bool(solitary)


def ch_period(c: float, ch_kappa: float, a: float, b: float) -> float:
    """Period of the smooth periodic orbit (``inf`` for a solitary one)."""
    crest, trough, solitary = _orbit(c, ch_kappa, a, b)
    if solitary:
        return math.inf
    # phi = trough + (crest - trough) sin^2(theta) removes both root singularities
    half, _ = integrate.quad(lambda th: _dx_dtheta(th, trough, crest, c, ch_kappa, a, b),
                             0.0, 0.5 * math.pi, epsabs=1e-13, epsrel=1e-13, limit=200)
    return 2.0 * half


def _dx_dtheta(th, trough, crest, c, kappa, a, b):
    # numerator = (crest - phi)(phi - trough)(phi - r1) with r1 the remaining root
    d = crest - trough
    phi = trough + d * math.sin(th) ** 2
    r1 = (c - 2.0 * kappa) - crest - trough
    rest = (phi - r1) / (c - phi)
    return 2.0 / math.sqrt(rest)


def _build(c, kappa, a, b, crest, trough, solitary, span):
    """Dense solution ``phi(s)`` for ``s`` in ``[0, span]`` starting at the crest."""
    poly = _numerator(c, kappa, a, b)
    dpoly = np.polyder(poly)

    def g_prime(p):
        return (np.polyval(dpoly, p) * (c - p) + np.polyval(poly, p)) / (c - p) ** 2

    def second_order(s, y):
        return [y[1], 0.5 * g_prime(y[0])]

    tol = dict(rtol=1e-13, atol=1e-15, method="DOP853", dense_output=True)
    if not solitary:
        sol = integrate.solve_ivp(second_order, (0.0, span), [crest, 0.0], **tol)
        return lambda s: (sol.sol(s)[0], sol.sol(s)[1])
    # near the crest use the regular second-order form, then the factored
    # first-order form phi' = -(phi - trough) sqrt((crest - phi)/(c - phi)),
    # which decays stably into the double root
    switch = trough + 0.5 * (crest - trough)

    def hit(s, y):
        return y[0] - switch
    hit.terminal = True
    first = integrate.solve_ivp(second_order, (0.0, span), [crest, 0.0], events=hit, **tol)
    s1 = float(first.t[-1])

    def first_order(s, y):
        p = y[0]
        ratio = max((crest - p) / (c - p), 0.0)
        return [-(p - trough) * math.sqrt(ratio)]

    second = None
    if s1 < span:
        second = integrate.solve_ivp(first_order, (s1, span), [first.y[0, -1]], **tol)

    def evaluate(s):
        s = np.asarray(s, dtype=float)
        phi = np.empty_like(s)
        dphi = np.empty_like(s)
        lo = s <= s1
        if np.any(lo):
            v = first.sol(s[lo])
            phi[lo], dphi[lo] = v[0], v[1]
        if np.any(~lo):
            p = second.sol(s[~lo])[0]
            phi[~lo] = p
            ratio = np.maximum((crest - p) / (c - p), 0.0)
            dphi[~lo] = -(p - trough) * np.sqrt(ratio)
        return phi, dphi

    return evaluate


def ch_traveling_profile(c: float, ch_kappa: float, a: float, b: float, domain,
                         peakon: bool = False) -> TravelingProfile:
    """Even traveling profile centred in the periodic ``domain`` grid.

    ``domain`` is a uniform periodic grid ``x0 + j L / n``; the crest is
    placed at ``x0 + L/2``. Solitary orbits (double root at the trough)
    must decay within ``L/2``; periodic orbits must fit an integer number
    of periods into ``L``. ``peakon=True`` with ``ch_kappa = 0`` returns
    ``c exp(-|x - centre|)``.
    """
    x = np.asarray(domain, dtype=float)
    if x.ndim != 1 or x.size < 8:
        raise InvalidArgument("domain must be a 1-D grid")
    h = float(x[1] - x[0])
    L = h * x.size
    center = float(x[0] + 0.5 * L)
    if peakon:
        if ch_kappa != 0:
            raise InvalidArgument("the peakon exists for ch_kappa = 0 only")

        def peak(z):
            z = np.asarray(z, dtype=float) - center
            return c * np.exp(-np.abs(z)), -c * np.sign(z) * np.exp(-np.abs(z))
        return TravelingProfile(x, peak(x)[0], float(c), 0.0, 0.0, 0.0, "peakon", center, peak)

    crest, trough, solitary = _orbit(c, ch_kappa, a, b)
    if solitary:
        span = 0.5 * L
        kind = "solitary"
    else:
        period = ch_period(c, ch_kappa, a, b)
        reps = L / period
        if abs(reps - round(reps)) > 1e-6 * max(1.0, reps) or round(reps) < 1:
            raise InvalidArgument(f"domain length {L} is not a multiple of the period {period}")
        span = 0.5 * period
        kind = "periodic"
    half = _build(c, ch_kappa, a, b, crest, trough, solitary, span)

    def evaluate(z):
        z = np.asarray(z, dtype=float) - center
        if kind == "periodic":
            per = 2.0 * span
            z = (z + 0.5 * per) % per - 0.5 * per
        s = np.abs(z)
        phi, dphi = half(np.minimum(s, span))
        return phi, -np.sign(z) * dphi

    phi = evaluate(x)[0]
    return TravelingProfile(x, phi, float(c), float(ch_kappa), float(a), float(b), kind, center, evaluate)


# --------------------------------------------------------------------------
# Weak steady residual
# --------------------------------------------------------------------------

def _bump_derivs(s):
    """``B(s) = (1 - s^2)^4`` on ``|s| < 1`` and its first three derivatives."""
    s = np.asarray(s, dtype=float)
    inside = np.abs(s) < 1.0
    q = np.where(inside, 1.0 - s * s, 0.0)
    b0 = q ** 4
    b1 = -8.0 * s * q ** 3
    b2 = -8.0 * q ** 3 + 48.0 * s * s * q ** 2
    b3 = 144.0 * s * q ** 2 - 192.0 * s ** 3 * q
    return b0, b1, b2, b3


_BUMP_C3 = None


def _bump_c3_norm() -> tuple:
    global _BUMP_C3
    if _BUMP_C3 is None:
        s = np.linspace(-1.0, 1.0, 200001)
        _BUMP_C3 = tuple(float(np.max(np.abs(d))) for d in _bump_derivs(s))
    return _BUMP_C3


@dataclass(frozen=True)
class Bump:
    center: float
    width: float

    def derivatives(self, x):
        b0, b1, b2, b3 = _bump_derivs((np.asarray(x) - self.center) / self.width)
        w = self.width
        return b0, b1 / w, b2 / w ** 2, b3 / w ** 3

    def c3_norm(self) -> float:
        """``max_{j <= 3} sup |psi^(j)|``."""
        n0, n1, n2, n3 = _bump_c3_norm()
        w = self.width
        return max(n0, n1 / w, n2 / w ** 2, n3 / w ** 3)


PROBE_WIDTHS = (1.0, 2.0, 4.0, 6.0)
BANK_WIDTHS = (0.5, 8.0)


def bump_bank(profile: TravelingProfile, size: int, seed: int = 0) -> list:
    """Bumps of width ``w`` in ``[0.5, 8]`` (clipped to the domain).

    The first entries are probes whose steepest point ``center - w/sqrt(7)``
    sits on the crest; the rest have log-uniform widths and uniform
    centres from a seeded generator.
    """
    if size < 1:
        raise InvalidArgument("test bank must be non-empty")
    rng = np.random.default_rng(seed)
    L = profile.domain_length
    lo = float(profile.x[0])
    wmax = min(BANK_WIDTHS[1], 0.45 * L)
    bank = [Bump(profile.center + w / math.sqrt(7.0), w)
            for w in PROBE_WIDTHS if w <= wmax][:size]
    while len(bank) < size:
        w = float(np.exp(rng.uniform(math.log(BANK_WIDTHS[0]), math.log(wmax))))
        cen = float(rng.uniform(lo + w, lo + L - w))
        bank.append(Bump(cen, w))
    return bank


def _quadrature(profile: TravelingProfile, psi: Bump, refine: int):
    """Composite midpoint rule on cells of width ``h / refine``.

    Cells are aligned with the crest, so a kink there is a cell edge and
    never a node (the nodes are offset by half a cell); the support ends of
    ``psi`` are cell edges too. The rule is second order on each smooth
    piece, so residuals of exact weak solutions fall like ``h^2``.
    """
    h = float(profile.x[1] - profile.x[0]) / refine
    a = psi.center - psi.width
    b = psi.center + psi.width
    base = profile.center
    i0 = math.floor((a - base) / h)
    i1 = math.ceil((b - base) / h)
    edges = base + h * np.arange(i0, i1 + 1)
    edges = np.concatenate([[a], edges[(edges > a) & (edges < b)], [b]])
    mid = 0.5 * (edges[1:] + edges[:-1])
    return mid, np.diff(edges)


def _sample(profile: TravelingProfile, z):
    if profile.evaluate is not None:
        return profile.evaluate(z)
    # piecewise-linear interpolant of periodic samples, derivative a.e.
    L = profile.domain_length
    xs = np.append(profile.x, profile.x[0] + L)
    ps = np.append(profile.phi, profile.phi[0])
    zz = (np.asarray(z) - profile.x[0]) % L + profile.x[0]
    phi = np.interp(zz, xs, ps)
    idx = np.clip(np.searchsorted(xs, zz, side="right") - 1, 0, xs.size - 2)
    dphi = (ps[idx + 1] - ps[idx]) / (xs[idx + 1] - xs[idx])
    return phi, dphi


def h1_norm(profile: TravelingProfile, refine: int = 1) -> float:
    L = profile.domain_length
    whole = Bump(profile.center, 0.5 * L)
    nodes, weights = _quadrature(profile, whole, refine)
    phi, dphi = _sample(profile, nodes)
    return math.sqrt(float(np.sum(weights * (phi * phi + dphi * dphi))))


def weak_residual_single(profile: TravelingProfile, psi: Bump, refine: int = 1) -> float:
    """``int U (2k - c(1 - d_xx)) psi_x + U^2 (3/2 psi_x - 1/2 psi_xxx) + 1/2 U_x^2 psi_x``."""
    nodes, weights = _quadrature(profile, psi, refine)
    U, Ux = _sample(profile, nodes)
    _, p1, _, p3 = psi.derivatives(nodes)
    k, c = profile.ch_kappa, profile.c
    integrand = (U * (2.0 * k * p1 - c * (p1 - p3)) + U * U * (1.5 * p1 - 0.5 * p3)
                 + 0.5 * Ux * Ux * p1)
    return float(np.sum(weights * integrand))


def weak_steady_residual(profile: TravelingProfile, test_bank_size: int, seed: int = 0,
                         refine: int = 1) -> float:
    """Max over a bump bank of the normalized weak steady residual.

    Each value is divided by ``||psi||_{C^3} (||U||_{H^1} + ||U||_{H^1}^2)``.
    ``refine`` subdivides the quadrature cells.
    """
    norm = h1_norm(profile, refine)
    if norm == 0.0:
        return 0.0
    scale = norm + norm * norm
    worst = 0.0
    for psi in bump_bank(profile, test_bank_size, seed):
        r = abs(weak_residual_single(profile, psi, refine)) / (psi.c3_norm() * scale)
        worst = max(worst, r)
    return worst
