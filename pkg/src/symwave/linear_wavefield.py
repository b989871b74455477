"""Linear steady waves on a sheared current over a flat bed.

The vertical velocity is assembled in mode form,

    v(x, y) = sum_k f_k(y) (a_k sin(kx) + b_k cos(kx)),

on the period ``x in [0, 2 pi)`` and depth ``y in [0, 1]``, where each
``f_k`` solves ``-f'' + alpha f = -k^2 f`` with ``f(0) = 0`` and
``mu1 f(1) = mu2 f'(1)``. The current ``U`` is recovered from ``alpha`` via
``U'' = alpha (U - c)``, ``U(1) = c + sqrt(mu2)``, ``U'(1) = (mu1 - 1)/sqrt(mu2)``,
which turns the Robin condition into the linearized free-surface condition.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import warnings
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from ._numerics import central_derivative, linear_rk4_down
from .errors import (CriticalLayer, DegenerateConstraint, GridMismatch, InvalidArgument,
                     NotConstantVorticity)
from .sturm_liouville import Eigenpair, Potential, RobinBC

log = logging.getLogger(__name__)

CREST_TOL = 1e-10
RESIDUAL_STENCIL = 6
MAX_SUBSTEPS = 64


@dataclass(frozen=True, eq=False)
class BackgroundCurrent:
    """Samples of ``U`` and ``U'`` on the potential grid.

    ``alpha`` is kept alongside so that ``U'' = alpha (U - c)`` can be used
    without differencing.
    """

    y: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    alpha: np.ndarray
    c: float
    mu1: float
    mu2: float
    substeps: int = 1

    def __post_init__(self):
        if not (self.y.shape == self.U.shape == self.dU.shape == self.alpha.shape):
            raise GridMismatch("current arrays must share one grid")
        top = self.c + math.sqrt(self.mu2)
        slope = (self.mu1 - 1.0) / math.sqrt(self.mu2)
        if abs(self.U[-1] - top) > 1e-10 or abs(self.dU[-1] - slope) > 1e-10:
            raise InvalidArgument("surface data of the current are inconsistent with (mu1, mu2)")

    @property
    def h(self) -> float:
        return float(self.y[1] - self.y[0])

    @property
    def relative(self) -> np.ndarray:
        """``U - c``."""
        return self.U - self.c

    @property
    def curvature(self) -> np.ndarray:
        """``U''`` from the ODE itself."""
        return self.alpha * self.relative

    def ode_residual(self) -> float:
        """Max-norm of ``U'' - alpha (U - c)`` on interior nodes.

        ``U''`` is taken by differencing the stored ``U'`` with a 12th-order
        central stencil, so the check is independent of the integrator.
        """
        m = RESIDUAL_STENCIL
        d2 = central_derivative(self.dU, self.h, m)
        return float(np.max(np.abs(d2 - self.curvature[m:-m])))

    def critical_points(self) -> int:
        """Number of sign changes (or zeros) of ``U - c`` on the grid."""
        w = self.relative
        return int(np.count_nonzero(w == 0.0) + np.count_nonzero(w[:-1] * w[1:] < 0))


def _substeps(potential: Potential) -> int:
    # keep h * sqrt(max|alpha|) small enough that RK4 error is at rounding level
    rate = math.sqrt(max(1.0, float(np.max(np.abs(potential.grid)))))
    n = 1
    while n < MAX_SUBSTEPS and rate * potential.h / n > 1e-3:
        n *= 2
    return n if potential.analytic else 1


def recover_current(potential: Potential, c: float, bc: RobinBC,
                    substeps: Optional[int] = None) -> BackgroundCurrent:
    """Integrate ``U'' = alpha (U - c)`` from the surface to the bed with RK4.

    Each potential interval is split into ``substeps`` RK4 steps (chosen
    from ``max|alpha|`` when omitted) using exact off-grid values of
    ``alpha`` when the potential has them.
    """
    if not bc.mu2 > 0:
        raise InvalidArgument("recovering the current needs mu2 > 0")
    n_sub = _substeps(potential) if substeps is None else int(substeps)
    if n_sub < 1:
        raise InvalidArgument("substeps must be >= 1")
    n = potential.M * n_sub
    if n_sub == 1:
        samples = np.empty(2 * n + 1)
        samples[::2] = potential.grid
        samples[1::2] = potential.midpoints()
    else:
        samples = potential(np.linspace(0.0, 1.0, 2 * n + 1))
    w1 = math.sqrt(bc.mu2)
    d1 = (bc.mu1 - 1.0) / w1
    w, d = linear_rk4_down(np.ascontiguousarray(samples), 1.0 / n, w1, d1)
    w, d = w[::n_sub], d[::n_sub]
    U = w + c
    U[-1] = c + w1
    return BackgroundCurrent(potential.y, U, d, potential.grid.copy(), float(c),
                             float(bc.mu1), float(bc.mu2), n_sub)


@dataclass(frozen=True, eq=False)
class Mode:
    k: int
    f: np.ndarray
    df: np.ndarray
    a: float
    b: float


@dataclass(frozen=True, eq=False)
class CompletedField:
    """``(u, v, p, eta)`` on a tensor grid, arrays indexed ``[x, y]``."""

    x: np.ndarray
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    eta: np.ndarray
    momentum_residual: float


@dataclass(frozen=True, eq=False)
class WaveField:
    modes: tuple
    y: np.ndarray
    projection: float = 0.0
    completed: Optional[CompletedField] = None

    def __post_init__(self):
        for m in self.modes:
            if m.f.shape != self.y.shape:
                raise GridMismatch("mode samples must lie on the field grid")
            if abs(m.f[0]) > 1e-12 * max(1.0, float(np.max(np.abs(m.f)))):
                raise InvalidArgument("every f_k must vanish at the bed")

    @property
    def period(self) -> float:
        return 2.0 * math.pi

    @property
    def crest_defect(self) -> float:
        """``|sum_k f_k(1) b_k|``."""
        return abs(sum(m.f[-1] * m.b for m in self.modes))

    def crest_ok(self, tol: float = CREST_TOL) -> bool:
        top = max((abs(m.f[-1]) for m in self.modes), default=0.0)
        return self.crest_defect <= tol * top

    def v(self, x) -> np.ndarray:
        """``v`` on the tensor grid ``x`` by ``self.y`` (indexed ``[x, y]``)."""
        x = np.asarray(x, dtype=float)
        out = np.zeros((x.size, self.y.size))
        for m in self.modes:
            out += np.outer(m.a * np.sin(m.k * x) + m.b * np.cos(m.k * x), m.f)
        return out


def _wavenumber(lam: float) -> int:
    k = int(round(math.sqrt(max(-lam, 0.0))))
    if abs(lam + k * k) > 1e-6 * max(1.0, k * k):
        raise InvalidArgument(f"eigenvalue {lam!r} is not of the form -k^2")
    return k


def project_crest(values_at_top: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Orthogonal projection of ``b`` onto ``{g . b = 0}``."""
    g = np.asarray(values_at_top, dtype=float)
    b = np.asarray(b, dtype=float)
    gg = float(g @ g)
    if gg == 0.0:
        return b.copy()
    return b - (g @ b) / gg * g


def build_wave_field(eigenpairs: Sequence[Eigenpair], coefficients: Sequence) -> WaveField:
    """Assemble ``v`` from eigenpairs with ``lam = -k^2`` and ``(a_k, b_k)``.

    If the crest condition ``sum_k f_k(1) b_k = 0`` fails, ``b`` is
    projected orthogonally onto it and the size of the correction is kept
    in ``projection``.
    """
    if len(eigenpairs) != len(coefficients):
        raise InvalidArgument("one (a, b) pair is needed per eigenpair")
    ks = [_wavenumber(p.lam) for p in eigenpairs]
    if len(set(ks)) != len(ks):
        raise InvalidArgument("wavenumbers must be distinct")
    if eigenpairs:
        y = eigenpairs[0].y
        if any(p.y.shape != y.shape or not np.array_equal(p.y, y) for p in eigenpairs):
            raise GridMismatch("eigenpairs live on different grids")
    else:
        y = np.linspace(0.0, 1.0, 65)
    coef = np.asarray(coefficients, dtype=float).reshape(len(ks), 2)
    a, b = coef[:, 0], coef[:, 1]
    top = np.array([p.eigenfunction[-1] for p in eigenpairs])
    projection = 0.0
    if top.size and np.any(b != 0):
        scale = float(np.max(np.abs(top)))
        if scale == 0.0:
            raise DegenerateConstraint("all f_k(1) vanish; the crest condition carries no information")
        if abs(float(top @ b)) > CREST_TOL * scale:
            new_b = project_crest(top, b)
            projection = float(np.linalg.norm(new_b - b))
            log.info("crest condition imposed by projection, |db| = %.3e", projection)
            b = new_b
    modes = tuple(Mode(k, p.eigenfunction, p.derivative, float(ai), float(bi))
                  for k, p, ai, bi in zip(ks, eigenpairs, a, b))
    return WaveField(modes, y, projection)


def asymmetry_measure(field: WaveField) -> float:
    """``||even part of v|| / ||v||`` in L2 over one period and the depth.

    The even part is ``sum_k b_k f_k cos(kx)``. A ``k = 0`` mode has no
    sine part and twice the cosine weight.
    """
    even = total = 0.0
    for m in field.modes:
        nf = float(integrate.simpson(m.f ** 2, x=field.y))
        if m.k == 0:
            even += 2.0 * m.b ** 2 * nf
            total += 2.0 * m.b ** 2 * nf
        else:
            even += m.b ** 2 * nf
            total += (m.a ** 2 + m.b ** 2) * nf
    if total == 0.0:
        return 0.0
    return float(math.sqrt(even / total))


@dataclass(frozen=True)
class Residuals:
    interior: float
    surface: float
    bed: float
    scale: float

    @property
    def interior_relative(self) -> float:
        return self.interior / self.scale if self.scale > 0 else 0.0

    def __iter__(self):
        return iter((self.interior, self.surface, self.bed))


def _check_grid(field: WaveField, current: BackgroundCurrent):
    if field.y.shape != current.y.shape or not np.allclose(field.y, current.y, rtol=0, atol=1e-14):
        raise GridMismatch("field and current must share the y grid")


def pde_residual(field: WaveField, current: BackgroundCurrent, nx: int = 64) -> Residuals:
    """Residuals of the curl form of the linearized equations.

    Interior: ``(U-c)(v_xx + v_yy) - U'' v``; surface:
    ``(1 + (U-c)U') v - (U-c)^2 v_y`` at ``y = 1``; bed: ``v`` at ``y = 0``.
    ``x`` derivatives are exact; ``v_yy`` comes from fourth-order central
    differences of the stored ``f_k'``. ``scale`` is the largest magnitude
    among ``(U-c) v_xx``, ``(U-c) v_yy`` and ``U'' v``, for relative
    reporting; the pieces of the Laplacian are taken separately because
    they cancel for harmonic modes.
    """
    _check_grid(field, current)
    x = 2.0 * math.pi * np.arange(nx) / nx
    m = 2
    w = current.relative
    U2 = current.curvature
    ny = field.y.size
    vxx = np.zeros((nx, ny - 2 * m))
    vyy = np.zeros((nx, ny - 2 * m))
    v = np.zeros((nx, ny))
    vy_top = np.zeros(nx)
    for mode in field.modes:
        phase = mode.a * np.sin(mode.k * x) + mode.b * np.cos(mode.k * x)
        vyy += np.outer(phase, central_derivative(mode.df, current.h, m))
        vxx -= np.outer(phase, mode.k ** 2 * mode.f[m:-m])
        v += np.outer(phase, mode.f)
        vy_top += phase * mode.df[-1]
    t1 = w[m:-m] * (vxx + vyy)
    t2 = U2[m:-m] * v[:, m:-m]
    interior = float(np.max(np.abs(t1 - t2))) if field.modes else 0.0
    scale = max(float(np.max(np.abs(w[m:-m] * vxx))), float(np.max(np.abs(w[m:-m] * vyy))),
                float(np.max(np.abs(t2)))) if field.modes else 0.0
    surface = float(np.max(np.abs((1.0 + w[-1] * current.dU[-1]) * v[:, -1] - w[-1] ** 2 * vy_top)))
    bed = float(np.max(np.abs(v[:, 0])))
    return Residuals(interior, surface, bed, scale)


def complete_field(field: WaveField, current: BackgroundCurrent, nx: int = 64) -> WaveField:
    """Add ``(u, p, eta)`` normalized by ``u(0, y) = 0`` and zero-mean ``eta``.

    Per mode ``u_k = -f_k'/k`` (paired with ``cos``/``sin`` so that
    ``u_x = -v_y``), ``eta_x = v(x, 1)/(U(1) - c)`` and
    ``p = eta + int_y^1 (U - c) v_x``. The momentum equation
    ``(U-c) u_x + v U' + p_x`` is not used and is reported as a residual.
    """
    _check_grid(field, current)
    if current.critical_points():
        raise CriticalLayer("U - c changes sign inside the fluid")
    x = 2.0 * math.pi * np.arange(nx) / nx
    y = field.y
    w = current.relative
    top = w[-1]
    kept = []
    for mode in field.modes:
        if mode.k == 0:
            if mode.a or mode.b:
                warnings.warn("k = 0 mode carries no x-dependence and is dropped", stacklevel=2)
            continue
        kept.append(mode)
    shape = (nx, y.size)
    u, v, p, ux, px = (np.zeros(shape) for _ in range(5))
    eta, eta_x = np.zeros(nx), np.zeros(nx)
    for mode in kept:
        k = mode.k
        s, c = np.sin(k * x), np.cos(k * x)
        # P(y) = int_y^1 (U - c) f_k
        cum = integrate.cumulative_simpson(w * mode.f, x=y, initial=0.0)
        P = cum[-1] - cum
        v += np.outer(mode.a * s + mode.b * c, mode.f)
        u -= np.outer(mode.a * (1.0 - c) / k + mode.b * s / k, mode.df)
        ux -= np.outer(mode.a * s + mode.b * c, mode.df)
        g = mode.f[-1] / top
        eta += g * (-mode.a * c + mode.b * s) / k
        eta_x += g * (mode.a * s + mode.b * c)
        p += np.outer(k * (mode.a * c - mode.b * s), P)
        px -= np.outer(k * k * (mode.a * s + mode.b * c), P)
    p += eta[:, None]
    px += eta_x[:, None]
    momentum = w[None, :] * ux + v * current.dU[None, :] + px
    res = float(np.max(np.abs(momentum))) if kept else 0.0
    done = CompletedField(x, y, u, v, p, eta, res)
    return WaveField(field.modes, field.y, field.projection, done)


@dataclass(frozen=True)
class DispersionReport:
    k: int
    L: float
    printed: float
    substituted: float
    printed_match: bool
    substituted_match: bool
    integer_mode: Optional[int]

    @property
    def discrepancy(self) -> float:
        return abs(self.printed - self.substituted)

    def as_dict(self) -> dict:
        out = {k: getattr(self, k) for k in ("k", "L", "printed", "substituted",
                                             "printed_match", "substituted_match")}
        out["discrepancy"] = self.discrepancy
        out["integer_mode"] = self.integer_mode if self.integer_mode is not None else "no integer mode"
        return out


def _substituted(k: int) -> float:
    # f = sinh(ky) in mu1 f(1) = mu2 f'(1) gives mu2/mu1 = tanh(k)/k
    return math.tanh(k) / k


def dispersion_check(current: BackgroundCurrent, k: int, tol: float = 1e-8,
                     kmax: int = 1000) -> DispersionReport:
    """Compare ``L = (U(1)-c)^2 / (1 + (U(1)-c) U'(1))`` with two candidates.

    ``printed`` is ``tanh(k^2)``; ``substituted`` is ``tanh(k)/k``, the value
    forced by putting ``f = sinh(ky)`` into the Robin condition
    (``mu2 k cosh k = mu1 sinh k``). ``integer_mode`` is the unique ``k >= 1``
    (if any) for which the substituted relation holds.
    """
    if k == 0:
        raise InvalidArgument("k = 0 is degenerate")
    k = abs(int(k))
    if np.max(np.abs(current.alpha)) > 1e-10:
        raise NotConstantVorticity("the current has U'' != 0")
    w = float(current.U[-1] - current.c)
    denom = 1.0 + w * float(current.dU[-1])
    L = w * w / denom if denom != 0 else math.inf
    printed = math.tanh(k * k)
    sub = _substituted(k)
    mode = None
    if 0 < L <= 1:
        # tanh(k)/k is decreasing, so at most one integer can match
        guess = max(1, int(round(1.0 / L)))
        for j in range(max(1, guess - 2), min(kmax, guess + 3)):
            if abs(_substituted(j) - L) <= tol:
                mode = j
                break
    return DispersionReport(k, L, printed, sub, abs(L - printed) <= tol,
                            abs(L - sub) <= tol, mode)


def constant_vorticity_current(c: float, bc: RobinBC, M: int = 4096) -> BackgroundCurrent:
    """Linear current ``U`` with the surface data implied by ``bc``."""
    if not bc.mu2 > 0:
        raise InvalidArgument("mu2 must be positive")
    return recover_current(Potential.constant(0.0, M), c, bc)


# --------------------------------------------------------------------------
# I/O
# --------------------------------------------------------------------------

def write_current_csv(current: BackgroundCurrent, path) -> None:
    with open(path, "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(["y", "U", "dU"])
        for row in zip(current.y, current.U, current.dU):
            out.writerow([repr(float(v)) for v in row])


def write_field_csv(field: WaveField, path, nx: int = 64, y_stride: int = 1) -> None:
    """Tensor dump ``x, y, v`` (plus ``u, p`` when the field is completed).

    ``y_stride`` keeps every ``y_stride``-th depth sample (the surface row
    is always kept).
    """
    if y_stride < 1:
        raise InvalidArgument("y_stride must be >= 1")
    if field.completed is not None:
        cf = field.completed
        x, cols, names = cf.x, [cf.v, cf.u, cf.p], ["x", "y", "v", "u", "p"]
    else:
        x = 2.0 * math.pi * np.arange(nx) / nx
        cols, names = [field.v(x)], ["x", "y", "v"]
    ny = field.y.size
    rows = np.unique(np.append(np.arange(0, ny, y_stride), ny - 1))
    X, Y = np.meshgrid(x, field.y[rows], indexing="ij")
    table = np.column_stack([X.ravel(), Y.ravel()] + [c[:, rows].ravel() for c in cols])
    np.savetxt(path, table, fmt="%.17g", delimiter=",", header=",".join(names), comments="")


def modes_to_json(field: WaveField) -> str:
    data = {
        "normalization": "unit L2 norm on [0,1], f'(0) > 0",
        "projection": field.projection,
        "modes": [{"k": m.k, "a": m.a, "b": m.b, "f_top": float(m.f[-1])} for m in field.modes],
    }
    return json.dumps(data, indent=2, sort_keys=True)


def write_potential_csv(potential: Potential, path) -> None:
    Path(path).write_text("y,alpha\n" + "".join(
        f"{float(y)!r},{float(a)!r}\n" for y, a in zip(potential.y, potential.grid)))
