"""Reconstruct a potential from a finite piece of its spectrum.

The potential is parametrized by a cosine series
``alpha(y) = alpha_seed(y) + sum_{j<B} c_j cos(j pi y)`` and the first ``K``
eigenvalues are fitted by Levenberg-damped Gauss-Newton. Jacobian entries come from the
first variation of a simple eigenvalue,
``d lam_k / d c_j = int_0^1 f_k(y)^2 cos(j pi y) dy`` for unit-norm ``f_k``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import ForwardSolverFailure, InvalidArgument, NonConvergence, SymwaveError
from .sturm_liouville import (DEFAULT_M, DEFAULT_TOL, Potential, RobinBC, Spectrum,
                              eigenfunction, eigenvalues)

log = logging.getLogger(__name__)


def weyl_value(k) -> float:
    return (k + 0.5) ** 2 * math.pi ** 2


@dataclass(frozen=True)
class InverseProblem:
    target: Spectrum
    bc: RobinBC
    basis_size: int
    match_count: int
    grid_intervals: int = DEFAULT_M

    def __post_init__(self):
        if self.match_count > len(self.target):
            raise InvalidArgument("match_count exceeds target length")
        if self.basis_size < self.match_count:
            raise InvalidArgument("basis_size must be >= match_count")
        if self.match_count < 1:
            raise InvalidArgument("match_count must be positive")

    @property
    def fitted(self) -> np.ndarray:
        return self.target.as_array()[: self.match_count]


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    potential: Potential
    residual: float
    iterations: int
    converged: bool
    history: tuple = field(default=())

    @property
    def coeffs(self) -> np.ndarray:
        return self.potential.basis_coeffs


def target_spectrum(N: int, count: int) -> Spectrum:
    """``(-N^2, ..., -1, 0)`` followed by the unperturbed tail ``(k+1/2)^2 pi^2``."""
    if N < 1:
        raise InvalidArgument("N must be >= 1")
    if count < N + 1:
        raise InvalidArgument("count must be >= N + 1")
    head = [-float(j * j) for j in range(N, -1, -1)]
    tail = [weyl_value(k) for k in range(N + 1, count)]
    return Spectrum.target(head + tail)


def spectral_residual(potential: Potential, bc: RobinBC, target: Spectrum,
                      tol: float = DEFAULT_TOL) -> float:
    """``max_k |lam_k(alpha) - target_k|`` over the whole target."""
    values = target.as_array()
    lower = min(float(values[0]), float(np.min(potential.grid))) - 1.0
    lam = eigenvalues(potential, bc, len(values), tol / 10, lower=lower).as_array()
    return float(np.max(np.abs(lam - values)))


def sensitivity_jacobian(potential: Potential, bc: RobinBC, lams, basis_size: int) -> np.ndarray:
    """Rows ``int f_k^2 cos(j pi y) dy`` for each eigenvalue in ``lams``."""
    y = potential.y
    basis = np.cos(np.pi * np.multiply.outer(y, np.arange(basis_size)))
    rows = []
    for k, lam in enumerate(lams):
        f2 = eigenfunction(potential, bc, lam, index=k).eigenfunction ** 2
        rows.append(integrate.simpson(f2[:, None] * basis, x=y, axis=0))
    return np.array(rows)


class SpectralTransform:
    """Potential whose spectrum differs from a constant one in finitely many places.

    Starting from ``alpha = c0`` with ``f(0) = 0`` and ``f'(1) = 0``, whose
    eigenvalues are ``c0 + (k+1/2)^2 pi^2``, the eigenvalues ``removed`` are
    deleted and ``added`` inserted with norming constants
    ``scales * int_0^1 phi(y, lam)^2 dy``. With ``phi`` the solution of
    ``-phi'' + c0 phi = lam phi``, ``phi(0) = 0``, ``phi'(0) = 1`` and

        Q(y) = int_0^y u u^T,   D(y) = det(I + S Q(y)),

    where ``u`` collects the normalized ``phi`` and ``S`` is ``+1`` on added
    and ``-1`` on removed entries, the transformed potential is
    ``c0 - 2 (log D)''`` and the boundary condition at 1 becomes
    ``f'(1) = H f(1)`` with ``H = -(log D)'(1)``.
    """

    def __init__(self, added, removed, scales, c0: float = 0.0, nodes: int = 48):
        added = np.asarray(added, dtype=float)
        removed = np.asarray(removed, dtype=float)
        scales = np.broadcast_to(np.asarray(scales, dtype=float), added.shape)
        if np.any(scales <= 0):
            raise InvalidArgument("norming scales must be positive")
        self.c0 = float(c0)
        self.lams = np.concatenate([added, removed])
        self.sign = np.concatenate([np.ones(added.size), -np.ones(removed.size)])
        self._xg, self._wg = np.polynomial.legendre.leggauss(nodes)
        base = np.array([self._base_norm(lam) for lam in self.lams])
        self.norms = base * np.concatenate([scales, np.ones(removed.size)])

    def _phi(self, y, lam):
        z = lam - self.c0
        if z > 0:
            r = math.sqrt(z)
            return np.sin(r * y) / r, np.cos(r * y)
        if z < 0:
            r = math.sqrt(-z)
            return np.sinh(r * y) / r, np.cosh(r * y)
        return np.array(y, dtype=float), np.ones_like(y)

    def _base_norm(self, lam):
        x = 0.5 * (self._xg + 1.0)
        return 0.5 * float(np.sum(self._wg * self._phi(x, lam)[0] ** 2))

    def _u(self, y):
        vals, ders = zip(*(self._phi(y, lam) for lam in self.lams))
        inv = 1.0 / np.sqrt(self.norms)
        return np.stack(vals, -1) * inv, np.stack(ders, -1) * inv

    def _parts(self, y):
        y = np.atleast_1d(np.asarray(y, dtype=float))
        u, du = self._u(y)
        # Gauss-Legendre on [0, y] for every y at once
        t = 0.5 * (self._xg[None, :] + 1.0) * y[:, None]
        uq = self._u(t)[0]
        Q = np.einsum("q,yqi,yqj->yij", self._wg, uq, uq) * (0.5 * y)[:, None, None]
        Mx = np.eye(self.lams.size) + self.sign[:, None] * Q
        rhs = np.stack([self.sign * u, self.sign * du], -1)
        w = np.linalg.solve(Mx, rhs)
        first = np.sum(u * w[..., 0], -1)
        second = np.sum(du * w[..., 0], -1) + np.sum(u * w[..., 1], -1) - first ** 2
        return first, second, np.linalg.det(Mx)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        flat = y.ravel()
        out = np.empty_like(flat)
        for i in range(0, flat.size, 2048):
            out[i:i + 2048] = self.c0 - 2.0 * self._parts(flat[i:i + 2048])[1]
        return out.reshape(y.shape)

    @property
    def robin_h(self) -> float:
        return float(-self._parts(np.array([1.0]))[0][0])

    def min_determinant(self, samples: int = 513) -> float:
        return float(np.min(self._parts(np.linspace(0.0, 1.0, samples))[2]))


def transform_seed(target, bc: RobinBC, log_scale_range=(-12.0, 2.0)):
    """Finite-rank seed reproducing ``target`` exactly with ``H = mu1 / mu2``.

    Entries of ``target`` that differ from ``c0 + (k+1/2)^2 pi^2`` (``c0``
    taken from the last entry) are moved. A common norming scale is chosen
    by root finding on ``H(scale) = mu1 / mu2``. Returns ``None`` when no
    scale in the range achieves the requested ``H``.
    """
    if bc.mu2 == 0:
        return None
    target = np.asarray(target, dtype=float)
    ks = np.arange(target.size)
    ladder = weyl_value(ks)
    c0 = float(target[-1] - ladder[-1])
    moved = np.abs(target - ladder - c0) > 1e-12 * np.maximum(1.0, np.abs(target))
    if not np.any(moved):
        return None
    added, removed = target[moved], ladder[moved] + c0
    h_goal = bc.mu1 / bc.mu2

    def gap(log_s):
        tr = SpectralTransform(added, removed, 10.0 ** log_s, c0)
        if tr.min_determinant() <= 0:
            return math.nan
        return tr.robin_h - h_goal

    grid = np.linspace(*log_scale_range, 57)
    vals = [gap(g) for g in grid]
    for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if np.isfinite(fa) and np.isfinite(fb) and fa * fb <= 0:
            root = a if fa == 0 else optimize.brentq(gap, a, b, xtol=1e-13)
            return SpectralTransform(added, removed, 10.0 ** root, c0)
    return None


def _forward(coeffs, problem: InverseProblem, tol: float, lower: float, background=None):
    potential = Potential.from_basis(coeffs, problem.grid_intervals, background)
    try:
        lam = eigenvalues(potential, problem.bc, problem.match_count, tol,
                          lower=min(lower, float(np.min(potential.grid)) - 1.0))
    except SymwaveError as exc:
        raise ForwardSolverFailure(str(exc)) from exc
    return potential, np.sort(lam.as_array())


def _levenberg(coeffs, potential, lam, target, problem, tol, max_iter, solve_tol, lower, mu,
               background=None):
    """Damped Gauss-Newton towards ``target``; steps must lower the max residual."""
    K, B = problem.match_count, problem.basis_size
    res = lam - target
    best = float(np.max(np.abs(res)))
    history = [best]
    it = 0
    while best > tol and it < max_iter:
        it += 1
        J = sensitivity_jacobian(potential, problem.bc, lam, B)
        JJt = J @ J.T
        scale = np.trace(JJt) / K
        accepted = False
        for _ in range(12):
            # minimum-norm damped step for the under-determined linearization
            step = -J.T @ np.linalg.solve(JJt + mu * scale * np.eye(K), res)
            try:
                trial_pot, trial_lam = _forward(coeffs + step, problem, solve_tol, lower, background)
            except ForwardSolverFailure:
                mu *= 10.0
                continue
            trial_res = trial_lam - target
            trial_best = float(np.max(np.abs(trial_res)))
            if trial_best < best:
                coeffs, potential, lam, res, best = coeffs + step, trial_pot, trial_lam, trial_res, trial_best
                mu = max(mu / 10.0, 1e-14)
                accepted = True
                break
            mu *= 10.0
        history.append(best)
        if not accepted:
            break
    return coeffs, potential, lam, best, it, history


def reconstruct_potential(problem: InverseProblem, tol: float = 1e-8, max_iter: int = 200,
                          damping: float = 1e-3, seed: str = "auto") -> ReconstructionResult:
    """Fit the first ``match_count`` target eigenvalues.

    The unknowns are cosine coefficients ``c_j``, ``j < basis_size``, in
    ``alpha = alpha_seed + sum_j c_j cos(j pi y)``. Two seeds are available:

    ``"constant"``
        ``alpha_seed = 0`` and ``c_0`` equal to the mean offset of the target
        from ``(k+1/2)^2 pi^2``.
    ``"transform"``
        the finite-rank :class:`SpectralTransform` of the constant potential
        that carries the fitted target exactly (up to discretization).

    ``"auto"`` starts from the constant seed and switches to the transform
    when the constant start is further from the target than a tenth of the
    smallest target gap. Every accepted damped step lowers the max-abs
    residual. Returns the best iterate; ``converged`` is set when its
    residual is at most ``tol``.
    """
    if tol <= 0:
        raise InvalidArgument("tol must be positive")
    if seed not in ("auto", "constant", "transform"):
        raise InvalidArgument(f"unknown seed {seed!r}")
    target = problem.fitted
    K, B = problem.match_count, problem.basis_size
    # eigenvalues must be resolved well below the fitting tolerance
    solve_tol = min(DEFAULT_TOL, tol / 100)
    lower = float(target[0]) - 2.0 * math.sqrt(abs(float(target[0])) + 1.0) - 4.0

    coeffs = np.zeros(B)
    background = None
    if seed != "transform":
        coeffs[0] = float(np.mean(target - weyl_value(np.arange(K))))
        potential, lam = _forward(coeffs, problem, solve_tol, lower)
        gaps = np.diff(target)
        far = K > 1 and np.max(np.abs(lam - target)) > 0.1 * np.min(gaps)
    if seed == "transform" or (seed == "auto" and far):
        background = transform_seed(target, problem.bc)
        if background is None:
            if seed == "transform":
                raise ForwardSolverFailure("no finite-rank seed matches the boundary condition")
            log.info("finite-rank seed unavailable; keeping the constant start")
        else:
            coeffs = np.zeros(B)
            potential, lam = _forward(coeffs, problem, solve_tol, lower, background)
    coeffs, potential, lam, best, iterations, history = _levenberg(
        coeffs, potential, lam, target, problem, tol, max_iter, solve_tol, lower, damping, background)
    converged = best <= tol
    if not converged:
        log.warning("inverse solve stopped at residual %.3e after %d iterations", best, iterations)
    return ReconstructionResult(potential, best, iterations, converged, tuple(history))


def reconstruct_or_raise(problem: InverseProblem, tol: float = 1e-8, max_iter: int = 60) -> ReconstructionResult:
    result = reconstruct_potential(problem, tol, max_iter)
    if not result.converged:
        raise NonConvergence(f"residual {result.residual:.3e} above tol {tol:.1e}")
    return result
