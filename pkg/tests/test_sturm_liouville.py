import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from symwave.errors import InvalidArgument, NonConvergence, NotAnEigenvalue
from symwave.sturm_liouville import (DEFAULT_BC_TOL, Potential, RobinBC, Spectrum, cosine_series,
                                     eigenfunction, eigenpairs, eigenvalue_sensitivity, eigenvalues)

NEUMANN_TOP = RobinBC(0.0, 1.0)
# positive roots of tan r = r
TAN_ROOTS = (4.493409457909064, 7.725251836937707, 10.904121659428899)


@pytest.fixture(scope="module")
def zero():
    return Potential.constant(0.0, 4096)


def test_zero_potential_weyl_values(zero):
    lam = eigenvalues(zero, NEUMANN_TOP, 10).as_array()
    exact = (np.arange(10) + 0.5) ** 2 * math.pi ** 2
    assert np.max(np.abs(lam - exact) / exact) <= 1e-8


def test_constant_shift_example(zero):
    base = eigenvalues(zero, NEUMANN_TOP, 3).as_array()
    shifted = eigenvalues(Potential.constant(5.0, 4096), NEUMANN_TOP, 3).as_array()
    assert np.max(np.abs(shifted - base - 5.0)) <= 1e-9


def test_robin_frozen_values(zero):
    lam = eigenvalues(zero, RobinBC(1.0, 1.0), 4).as_array()
    # f = y solves the problem with lam = 0; the rest satisfy tan r = r
    assert abs(lam[0]) <= 1e-9
    assert np.allclose(lam[1:], np.array(TAN_ROOTS) ** 2, rtol=1e-9, atol=0)


def test_dirichlet_top(zero):
    lam = eigenvalues(zero, RobinBC(1.0, 0.0), 3).as_array()
    assert np.allclose(lam, (np.arange(1, 4) * math.pi) ** 2, rtol=1e-9)


def test_negative_eigenvalue_hyperbolic_regime(zero):
    bc = RobinBC(math.cosh(1.0), math.sinh(1.0))
    lam = eigenvalues(zero, bc, 2).as_array()
    assert abs(lam[0] + 1.0) <= 1e-9


def test_sinh_eigenfunction(zero):
    bc = RobinBC(math.cosh(1.0), math.sinh(1.0))
    pair = eigenfunction(zero, bc, -1.0)
    ref = np.sinh(pair.y)
    ref /= math.sqrt(integrate.simpson(ref ** 2, x=pair.y))
    assert pair.index == 0
    assert np.max(np.abs(pair.eigenfunction - ref)) <= 1e-8


def test_sine_eigenfunction(zero):
    pair = eigenfunction(zero, NEUMANN_TOP, (math.pi / 2) ** 2)
    ref = math.sqrt(2.0) * np.sin(math.pi * pair.y / 2)
    assert np.max(np.abs(pair.eigenfunction - ref)) <= 1e-8
    assert pair.derivative[0] > 0


def test_off_spectrum_value_rejected(zero):
    lam = (math.pi / 2) ** 2
    with pytest.raises(NotAnEigenvalue):
        eigenfunction(zero, NEUMANN_TOP, lam + 10 * DEFAULT_BC_TOL * lam)


def test_sensitivity_examples(zero):
    g = eigenvalue_sensitivity(zero, NEUMANN_TOP, 0)
    assert np.max(np.abs(g - 2.0 * np.sin(math.pi * zero.y / 2) ** 2)) <= 1e-8
    assert abs(integrate.simpson(g, x=zero.y) - 1.0) <= 1e-10


def test_sensitivity_finite_difference_cos2():
    coeffs = np.array([1.0, -2.0, 0.5])
    bc = RobinBC(1.0, 1.0)
    pot = Potential.from_basis(coeffs, 4096)
    eps = 1e-5
    pert = Potential.from_basis(coeffs + eps * np.array([0, 0, 1.0]), 4096)
    for k in range(3):
        g = eigenvalue_sensitivity(pot, bc, k)
        pred = eps * integrate.simpson(g * np.cos(2 * math.pi * pot.y), x=pot.y)
        actual = eigenvalues(pert, bc, k + 1).values[k] - eigenvalues(pot, bc, k + 1).values[k]
        assert abs(pred - actual) <= 1e-3 * abs(actual)


def test_sensitivity_five_random_potentials(rng):
    bc = RobinBC(1.0, 1.0)
    eps = 1e-4
    for _ in range(5):
        c = rng.normal(0, 3, 6)
        d = rng.normal(0, 1, 6)
        pot = Potential.from_basis(c, 2048)
        plus = eigenvalues(Potential.from_basis(c + eps * d, 2048), bc, 3).as_array()
        minus = eigenvalues(Potential.from_basis(c - eps * d, 2048), bc, 3).as_array()
        dv = cosine_series(d, pot.y)
        for k in range(3):
            had = integrate.simpson(eigenvalue_sensitivity(pot, bc, k) * dv, x=pot.y)
            fd = (plus[k] - minus[k]) / (2 * eps)
            assert abs(had - fd) <= 1e-3 * abs(fd)


def test_oscillation_and_normalization(rng):
    pot = Potential.from_basis(rng.normal(0, 5, 8), 2048)
    bc = RobinBC(-0.7, 1.3)
    for k, pair in enumerate(eigenpairs(pot, bc, 6)):
        assert pair.interior_zeros == k
        assert pair.eigenfunction[0] == 0.0
        assert abs(integrate.simpson(pair.eigenfunction ** 2, x=pair.y) - 1.0) <= 1e-10
        assert pair.derivative[0] > 0
        res = abs(bc.mu1 * pair.eigenfunction[-1] - bc.mu2 * pair.derivative[-1])
        assert res <= DEFAULT_BC_TOL * 1.3 * np.max(np.abs(pair.eigenfunction))


def test_weyl_deviation_bounded(rng):
    pot = Potential.from_basis(rng.normal(0, 2, 6), 4096)
    lam = eigenvalues(pot, NEUMANN_TOP, 25).as_array()
    dev = lam - (np.arange(25) + 0.5) ** 2 * math.pi ** 2
    mean = pot.mean()
    # deviations settle to the mean of alpha with a square-summable remainder
    assert np.max(np.abs(dev)) <= 3 * np.max(np.abs(pot.grid))
    tail = dev[10:] - mean
    assert np.sum(tail ** 2) <= np.sum((dev[:10] - mean) ** 2) + 1e-6
    assert abs(dev[-1] - mean) <= 0.05


@settings(max_examples=15, deadline=None)
@given(s=st.floats(-50, 50), c=st.lists(st.floats(-4, 4), min_size=1, max_size=4))
def test_shift_identity_property(s, c):
    pot = Potential.from_basis(c, 1024)
    bc = RobinBC(1.0, 2.0)
    a = eigenvalues(pot, bc, 4).as_array()
    b = eigenvalues(pot.shifted(s), bc, 4).as_array()
    assert np.max(np.abs(b - a - s)) <= 1e-8


def test_grid_only_potential_uses_spline():
    y = np.linspace(0, 1, 1025)
    sampled = Potential(3.0 * np.cos(math.pi * y))
    exact = Potential.from_basis([0.0, 3.0], 1024)
    assert not sampled.analytic
    a = eigenvalues(sampled, NEUMANN_TOP, 3).as_array()
    b = eigenvalues(exact, NEUMANN_TOP, 3).as_array()
    assert np.max(np.abs(a - b)) <= 1e-8


def test_from_function_is_analytic():
    pot = Potential.from_function(lambda y: 4.0 + 0 * y, 512)
    assert pot.analytic and np.allclose(pot.grid, 4.0)
    assert abs(eigenvalues(pot, NEUMANN_TOP, 1).values[0] - 4.0 - math.pi ** 2 / 4) <= 1e-8


def test_potential_validation():
    with pytest.raises(InvalidArgument):
        Potential(np.zeros(10))
    bad = np.zeros(129)
    bad[3] = np.nan
    with pytest.raises(InvalidArgument):
        Potential(bad)
    with pytest.raises(InvalidArgument):
        Potential(np.zeros(129), basis_coeffs=np.array([1.0]))
    with pytest.raises(InvalidArgument):
        RobinBC(0.0, 0.0)


def test_spectrum_type():
    with pytest.raises(InvalidArgument):
        Spectrum.target([1.0, 1.0])
    s = Spectrum.computed([1.0, 2.0])
    assert s.provenance == ("computed", "computed") and len(s) == 2


def test_argument_errors(zero):
    with pytest.raises(InvalidArgument):
        eigenvalues(zero, NEUMANN_TOP, 0)
    with pytest.raises(InvalidArgument):
        eigenvalues(zero, NEUMANN_TOP, 1, tol=0.0)


def test_unreachable_tolerance_reports_nonconvergence(zero):
    with pytest.raises(NonConvergence):
        eigenvalues(zero, NEUMANN_TOP, 2, tol=1e-12, maxiter=2)
