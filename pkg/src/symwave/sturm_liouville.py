"""Forward solver for ``-f'' + alpha(y) f = lam f`` on [0, 1].

Boundary conditions are ``f(0) = 0`` and ``mu1 f(1) = mu2 f'(1)``.

Eigenvalues are located with a scaled Pruefer phase: writing
``f = r sin(theta)``, ``f' = s r cos(theta)`` for a constant scale ``s > 0``,

    theta' = s cos^2(theta) + (lam - alpha) / s * sin^2(theta),
    (log r)' = (s - (lam - alpha) / s) * sin(theta) cos(theta),

with ``theta(0) = 0``. The phase at ``y = 1`` is increasing in ``lam`` and the
k-th eigenvalue is where it equals ``beta + k*pi`` (``beta`` in ``(0, pi]``
encodes the Robin condition). ``s`` is chosen as ``sqrt(max_y |lam - alpha|)``:
the phase equation is then exactly linear for constant potentials, and for
spiky potentials the phase speed stays ``O(s)`` instead of ``O(max|alpha|)``,
which keeps fixed-step RK4 accurate.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numba
import numpy as np
from scipy import integrate, interpolate, optimize

from .errors import InvalidArgument, NonConvergence, NotAnEigenvalue

DEFAULT_M = 4096
DEFAULT_TOL = 1e-10
DEFAULT_BC_TOL = 1e-8
MIN_GRID = 64


# --------------------------------------------------------------------------
# Potentials and boundary data
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Potential:
    """Uniform samples ``alpha(i/M)`` of a potential on [0, 1].

    A potential may carry an analytic description,
    ``alpha(y) = background(y) + sum_j c_j cos(j pi y)``, in which case
    off-grid values (RK4 half steps) are evaluated exactly; otherwise a
    cubic spline through the samples is used.
    """

    grid: np.ndarray
    basis_coeffs: Optional[np.ndarray] = None
    background: Optional[Callable] = field(default=None, repr=False)
    _spline: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.array(self.grid, dtype=float)
        if grid.ndim != 1 or grid.size - 1 < MIN_GRID:
            raise InvalidArgument(f"potential needs at least {MIN_GRID} intervals")
        if not np.all(np.isfinite(grid)):
            raise InvalidArgument("potential samples must be finite")
        grid.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        if self.basis_coeffs is not None:
            c = np.array(self.basis_coeffs, dtype=float)
            c.setflags(write=False)
            object.__setattr__(self, "basis_coeffs", c)
        if self.analytic:
            err = np.max(np.abs(self(self.y) - grid))
            if err > 1e-12 * max(1.0, np.max(np.abs(grid))):
                raise InvalidArgument("grid does not match the analytic description")

    @classmethod
    def from_basis(cls, coeffs: Sequence[float], M: int = DEFAULT_M,
                   background: Optional[Callable] = None) -> "Potential":
        y = np.linspace(0.0, 1.0, M + 1)
        c = np.asarray(coeffs, dtype=float)
        values = cosine_series(c, y)
        if background is not None:
            values = values + background(y)
        return cls(values, c, background)

    @classmethod
    def constant(cls, value: float, M: int = DEFAULT_M) -> "Potential":
        return cls.from_basis([value], M)

    @classmethod
    def from_function(cls, func: Callable, M: int = DEFAULT_M) -> "Potential":
        """Sample ``func`` and keep it for exact off-grid evaluation."""
        return cls.from_basis([], M, background=func)

    @property
    def analytic(self) -> bool:
        return self.basis_coeffs is not None or self.background is not None

    @property
    def M(self) -> int:
        return self.grid.size - 1

    @property
    def h(self) -> float:
        return 1.0 / self.M

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.M + 1)

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        if self.analytic:
            out = np.zeros_like(y)
            if self.basis_coeffs is not None and self.basis_coeffs.size:
                out = out + cosine_series(self.basis_coeffs, y)
            if self.background is not None:
                out = out + self.background(y)
            return out
        if self._spline is None:
            object.__setattr__(self, "_spline", interpolate.CubicSpline(self.y, self.grid))
        return self._spline(y)

    def midpoints(self) -> np.ndarray:
        return self(self.y[:-1] + 0.5 * self.h)

    def mean(self) -> float:
        return float(integrate.simpson(self.grid, x=self.y))

    def shifted(self, s: float) -> "Potential":
        if not self.analytic:
            return Potential(self.grid + s)
        c = np.zeros(max(1, 0 if self.basis_coeffs is None else self.basis_coeffs.size))
        if self.basis_coeffs is not None:
            c[: self.basis_coeffs.size] = self.basis_coeffs
        c[0] += s
        return Potential.from_basis(c, self.M, self.background)


def cosine_series(coeffs, y) -> np.ndarray:
    """Evaluate ``sum_j c_j cos(j pi y)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    y = np.asarray(y, dtype=float)
    j = np.arange(coeffs.size)
    return np.cos(np.pi * np.multiply.outer(y, j)) @ coeffs


@dataclass(frozen=True)
class RobinBC:
    """``mu1 f(1) = mu2 f'(1)``."""

    mu1: float
    mu2: float

    def __post_init__(self):
        if self.mu1 == 0 and self.mu2 == 0:
            raise InvalidArgument("mu1 and mu2 cannot both vanish")

    def angle(self, s: float) -> float:
        """Target Pruefer phase in (0, pi] for scale ``s``."""
        beta = math.atan2(self.mu2 * s, self.mu1) % math.pi
        return beta if beta > 0 else math.pi


@dataclass(frozen=True, eq=False)
class Eigenpair:
    index: int
    lam: float
    y: np.ndarray
    eigenfunction: np.ndarray
    derivative: np.ndarray

    @property
    def interior_zeros(self) -> int:
        f = self.eigenfunction[1:-1]
        scale = np.max(np.abs(self.eigenfunction))
        f = f[np.abs(f) > 1e-12 * scale]
        return int(np.count_nonzero(np.diff(np.sign(f))))


@dataclass(frozen=True)
class Spectrum:
    values: tuple
    provenance: tuple

    def __post_init__(self):
        v = tuple(float(x) for x in self.values)
        if len(v) == 0 or any(b <= a for a, b in zip(v, v[1:])):
            raise InvalidArgument("spectrum must be non-empty and strictly increasing")
        if len(self.provenance) != len(v):
            raise InvalidArgument("provenance length mismatch")
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "provenance", tuple(self.provenance))

    @classmethod
    def computed(cls, values) -> "Spectrum":
        return cls(tuple(values), ("computed",) * len(values))

    @classmethod
    def target(cls, values) -> "Spectrum":
        return cls(tuple(values), ("target",) * len(values))

    def __len__(self):
        return len(self.values)

    def __getitem__(self, i):
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


# --------------------------------------------------------------------------
# Compiled RK4 kernels
# --------------------------------------------------------------------------

@numba.njit(cache=True)
def _prufer_rhs(theta, lam, a, s):
    st = math.sin(theta)
    ct = math.cos(theta)
    return s * ct * ct + (lam - a) / s * st * st


@numba.njit(cache=True)
def _prufer_phase(alpha, alpha_mid, h, lam, s):
    theta = 0.0
    for i in range(alpha_mid.size):
        k1 = _prufer_rhs(theta, lam, alpha[i], s)
        k2 = _prufer_rhs(theta + 0.5 * h * k1, lam, alpha_mid[i], s)
        k3 = _prufer_rhs(theta + 0.5 * h * k2, lam, alpha_mid[i], s)
        k4 = _prufer_rhs(theta + h * k3, lam, alpha[i + 1], s)
        theta += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
    return theta


@numba.njit(cache=True)
def _prufer_path(alpha, alpha_mid, h, lam, s):
    n = alpha_mid.size
    theta = np.zeros(n + 1)
    logr = np.zeros(n + 1)
    th = 0.0
    lr = 0.0
    for i in range(n):
        a0 = alpha[i]
        am = alpha_mid[i]
        a1 = alpha[i + 1]
        k1 = _prufer_rhs(th, lam, a0, s)
        l1 = (s - (lam - a0) / s) * math.sin(th) * math.cos(th)
        t2 = th + 0.5 * h * k1
        k2 = _prufer_rhs(t2, lam, am, s)
        l2 = (s - (lam - am) / s) * math.sin(t2) * math.cos(t2)
        t3 = th + 0.5 * h * k2
        k3 = _prufer_rhs(t3, lam, am, s)
        l3 = (s - (lam - am) / s) * math.sin(t3) * math.cos(t3)
        t4 = th + h * k3
        k4 = _prufer_rhs(t4, lam, a1, s)
        l4 = (s - (lam - a1) / s) * math.sin(t4) * math.cos(t4)
        th += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        lr += h * (l1 + 2.0 * l2 + 2.0 * l3 + l4) / 6.0
        theta[i + 1] = th
        logr[i + 1] = lr
    return theta, logr


class _Shooter:
    """Caches potential samples for repeated phase evaluations."""

    def __init__(self, potential: Potential, bc: RobinBC):
        self.alpha = np.ascontiguousarray(potential.grid)
        self.alpha_mid = np.ascontiguousarray(potential.midpoints())
        self.h = potential.h
        self.lo = float(min(self.alpha.min(), self.alpha_mid.min()))
        self.hi = float(max(self.alpha.max(), self.alpha_mid.max()))
        self.bc = bc

    def scale(self, lam: float) -> float:
        # balances the two phase rates s and |lam - alpha| / s
        return math.sqrt(max(abs(lam - self.lo), abs(lam - self.hi), 1.0))

    def mismatch(self, lam: float, k: int) -> float:
        s = self.scale(lam)
        theta = _prufer_phase(self.alpha, self.alpha_mid, self.h, lam, s)
        return theta - self.bc.angle(s) - k * math.pi

    def path(self, lam: float):
        s = self.scale(lam)
        theta, logr = _prufer_path(self.alpha, self.alpha_mid, self.h, lam, s)
        return s, theta, logr


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------

def _bracket(shooter: _Shooter, k: int, lo: float, hi: float, max_expand: int = 80):
    step = 1.0
    for _ in range(max_expand):
        if shooter.mismatch(lo, k) < 0:
            break
        lo -= step
        step *= 2.0
    else:
        raise NonConvergence(f"could not bracket eigenvalue {k} from below")
    step = max(1.0, abs(hi))
    for _ in range(max_expand):
        if shooter.mismatch(hi, k) > 0:
            break
        lo = hi
        hi += step
        step *= 2.0
    else:
        raise NonConvergence(f"could not bracket eigenvalue {k} from above")
    return lo, hi


def eigenvalues(potential: Potential, bc: RobinBC, count: int, tol: float = DEFAULT_TOL,
                lower: Optional[float] = None, maxiter: int = 200) -> Spectrum:
    """Lowest ``count`` eigenvalues, each refined to ``|dlam| <= tol``.

    ``lower`` is an optional seed for the first bracket (it is expanded
    downwards automatically if it is not below the ground state).
    """
    if count < 1:
        raise InvalidArgument("count must be >= 1")
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    shooter = _Shooter(potential, bc)
    amin = float(np.min(potential.grid))
    amax = float(np.max(potential.grid))
    lo = amin - 1.0 if lower is None else min(lower, amin - 1.0)
    values = []
    for k in range(count):
        hi = amax + ((k + 1) * math.pi) ** 2 + 1.0
        if values:
            hi = max(hi, values[-1] + 1.0)
        a, b = _bracket(shooter, k, lo, hi)
        try:
            lam, info = optimize.brentq(shooter.mismatch, a, b, args=(k,), xtol=tol,
                                        rtol=4 * np.finfo(float).eps, maxiter=maxiter,
                                        full_output=True, disp=False)
        except ValueError as exc:
            raise NonConvergence(str(exc)) from exc
        if not info.converged:
            raise NonConvergence(f"eigenvalue {k} did not converge in {maxiter} iterations")
        values.append(lam)
        lo = lam
    if any(b <= a for a, b in zip(values, values[1:])):
        raise NonConvergence("eigenvalues not separated at this tolerance; refine the grid")
    return Spectrum.computed(values)


def eigenfunction(potential: Potential, bc: RobinBC, lam: float, index: Optional[int] = None,
                  bc_tol: float = DEFAULT_BC_TOL) -> Eigenpair:
    """Normalized eigenfunction for an (approximate) eigenvalue ``lam``.

    The result has unit L2 norm and ``f'(0) > 0``. Raises
    :class:`NotAnEigenvalue` if the Robin residual at ``y = 1`` exceeds
    ``bc_tol * max(|mu1|, |mu2|) * max|f|``.
    """
    shooter = _Shooter(potential, bc)
    s, theta, logr = shooter.path(lam)
    r = np.exp(logr - logr.max())
    f = r * np.sin(theta)
    fp = s * r * np.cos(theta)
    y = potential.y
    norm = math.sqrt(integrate.simpson(f * f, x=y))
    f = f / norm
    fp = fp / norm
    residual = abs(bc.mu1 * f[-1] - bc.mu2 * fp[-1])
    limit = bc_tol * max(abs(bc.mu1), abs(bc.mu2)) * np.max(np.abs(f))
    if not residual <= limit:
        raise NotAnEigenvalue(f"boundary residual {residual:.3e} exceeds {limit:.3e} at lam={lam!r}")
    pair = Eigenpair(0 if index is None else index, float(lam), y, f, fp)
    if index is None:
        pair = Eigenpair(pair.interior_zeros, float(lam), y, f, fp)
    return pair


def eigenpairs(potential: Potential, bc: RobinBC, count: int, tol: float = DEFAULT_TOL,
               lower: Optional[float] = None) -> list:
    spectrum = eigenvalues(potential, bc, count, tol, lower=lower)
    return [eigenfunction(potential, bc, lam, index=k) for k, lam in enumerate(spectrum.values)]


def eigenvalue_sensitivity(potential: Potential, bc: RobinBC, k: int,
                           tol: float = DEFAULT_TOL) -> np.ndarray:
    """Return ``f_k(y)^2`` on the grid, so ``d lam_k = int f_k^2 d alpha dy``."""
    lam = eigenvalues(potential, bc, k + 1, tol).values[k]
    pair = eigenfunction(potential, bc, lam, index=k)
    return pair.eigenfunction ** 2
