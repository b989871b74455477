import math

import numpy as np
import pytest

from symwave.errors import ForwardSolverFailure, InvalidArgument, NonConvergence
from symwave.inverse_sl import (InverseProblem, SpectralTransform, reconstruct_or_raise,
                                reconstruct_potential, sensitivity_jacobian, spectral_residual,
                                target_spectrum, transform_seed, weyl_value)
from symwave.sturm_liouville import Potential, RobinBC, Spectrum, eigenvalues

NEUMANN_TOP = RobinBC(0.0, 1.0)


def test_target_spectrum_examples():
    s = target_spectrum(2, 5)
    assert np.allclose(s.as_array(), [-4, -1, 0, 3.5 ** 2 * math.pi ** 2, 4.5 ** 2 * math.pi ** 2])
    assert set(s.provenance) == {"target"}
    assert target_spectrum(1, 2).values == (-1.0, 0.0)
    with pytest.raises(InvalidArgument):
        target_spectrum(0, 3)
    with pytest.raises(InvalidArgument):
        target_spectrum(2, 2)


def test_problem_validation():
    t = target_spectrum(1, 4)
    with pytest.raises(InvalidArgument):
        InverseProblem(t, NEUMANN_TOP, basis_size=4, match_count=5)
    with pytest.raises(InvalidArgument):
        InverseProblem(t, NEUMANN_TOP, basis_size=2, match_count=3)


def test_identity_case():
    target = Spectrum.target([weyl_value(k) for k in range(6)])
    res = reconstruct_potential(InverseProblem(target, NEUMANN_TOP, 8, 6), tol=1e-10)
    assert res.converged and res.residual <= 1e-10
    assert res.iterations <= 1
    assert np.max(np.abs(res.potential.grid)) <= 1e-9


def test_shift_case():
    s = 2.5
    target = Spectrum.target([weyl_value(k) + s for k in range(5)])
    res = reconstruct_potential(InverseProblem(target, NEUMANN_TOP, 6, 5), tol=1e-9)
    assert res.converged
    assert np.max(np.abs(res.potential.grid - s)) <= 1e-7


def test_spectral_residual_examples():
    zero = Potential.constant(0.0, 4096)
    unperturbed = Spectrum.target([weyl_value(k) for k in range(5)])
    assert spectral_residual(zero, NEUMANN_TOP, unperturbed) <= 1e-10
    inserted = Spectrum.target([-1.0] + [weyl_value(k) for k in range(4)])
    assert spectral_residual(zero, NEUMANN_TOP, inserted) >= 1 - 1e-6


def test_jacobian_matches_finite_differences(rng):
    c = rng.normal(0, 2, 5)
    bc = RobinBC(1.0, 1.0)
    pot = Potential.from_basis(c, 2048)
    lams = eigenvalues(pot, bc, 4).as_array()
    J = sensitivity_jacobian(pot, bc, lams, 5)
    eps = 1e-5
    for j in range(5):
        e = np.zeros(5)
        e[j] = eps
        plus = eigenvalues(Potential.from_basis(c + e, 2048), bc, 4).as_array()
        minus = eigenvalues(Potential.from_basis(c - e, 2048), bc, 4).as_array()
        fd = (plus - minus) / (2 * eps)
        assert np.max(np.abs(J[:, j] - fd)) <= 1e-3 * max(1.0, np.max(np.abs(fd)))


def test_small_perturbation_round_trip():
    bc = RobinBC(2.0, 1.0)
    truth = Potential.from_basis([0.3, -1.0, 0.7, 0.2], 4096)
    target = eigenvalues(truth, bc, 6)
    res = reconstruct_potential(InverseProblem(Spectrum.target(target.values), bc, 6, 6),
                                tol=1e-9, seed="constant")
    assert res.converged
    again = eigenvalues(res.potential, bc, 6).as_array()
    assert np.max(np.abs(again - target.as_array())) <= 10 * 1e-9
    # accepted steps never increase the residual
    h = np.array(res.history)
    assert np.all(np.diff(h) <= 0)


def test_constant_seed_cannot_reach_deep_target():
    """A low-mode cosine series from a constant start stalls on the N = 2 target."""
    problem = InverseProblem(target_spectrum(2, 6), RobinBC(1.0, 1.0), 12, 6)
    res = reconstruct_potential(problem, tol=1e-8, max_iter=15, seed="constant")
    assert not res.converged
    assert res.residual > 1.0
    h = np.array(res.history)
    assert np.all(np.diff(h) <= 0)
    with pytest.raises(NonConvergence):
        reconstruct_or_raise(problem, tol=1e-30, max_iter=0)


def test_transform_carries_target_before_refinement():
    target = np.array(target_spectrum(2, 6).values)
    bc = RobinBC(1.0, 1.0)
    T = transform_seed(target, bc)
    assert isinstance(T, SpectralTransform)
    assert abs(T.robin_h - 1.0) <= 1e-10
    assert T.min_determinant() > 0
    pot = Potential.from_function(T, 4096)
    lam = eigenvalues(pot, bc, 6, lower=-10.0).as_array()
    assert np.max(np.abs(lam - target)) <= 1e-4


def test_transform_seed_rejects_unreachable_robin_constant(monkeypatch):
    target = np.array(target_spectrum(2, 6).values)
    assert transform_seed(target, RobinBC(1.0, 1.0), log_scale_range=(-1.0, 2.0)) is None
    import symwave.inverse_sl as inv
    monkeypatch.setattr(inv, "transform_seed", lambda *a, **k: None)
    problem = InverseProblem(target_spectrum(2, 6), RobinBC(1.0, 1.0), 12, 6)
    with pytest.raises(ForwardSolverFailure):
        reconstruct_potential(problem, seed="transform")


def test_n2_reconstruction(n2_construction):
    res = n2_construction["result"]
    assert res.converged and res.residual <= 1e-8
    pot = n2_construction["potential"]
    target = n2_construction["target"]
    fresh = eigenvalues(pot, n2_construction["bc"], 6, lower=-10.0).as_array()
    assert np.max(np.abs(fresh - target.as_array())) <= 1e-6
    assert np.all(np.isfinite(pot.grid))
    assert np.allclose(fresh[:3], [-4.0, -1.0, 0.0], atol=1e-6)


def test_argument_checks():
    problem = InverseProblem(target_spectrum(1, 3), NEUMANN_TOP, 3, 3)
    with pytest.raises(InvalidArgument):
        reconstruct_potential(problem, tol=0.0)
    with pytest.raises(InvalidArgument):
        reconstruct_potential(problem, seed="magic")
