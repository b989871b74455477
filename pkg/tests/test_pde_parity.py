import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.polynomial import polynomial as P

from symwave.errors import PdeSyntaxError, UnsupportedEquation
from symwave.pde_parity import (BUILTIN_CORPUS, BUILTIN_PARAMS, COUNTEREXAMPLES, EVEN, MIXED, ODD,
                                DerivativeMonomial, PdeSpec, check_equation, check_hypotheses,
                                monomial_x_parity, parse_pde, read_equation_file)


def mono(coef, *factors):
    return DerivativeMonomial(Fraction(coef), tuple(factors))


U, UX, UXX, UXXX, UYY = (0, 0), (1, 0), (2, 0), (3, 0), (0, 2)


# ---------------------------------------------------------------- parsing

def test_kdv_canonical_form():
    spec = parse_pde("u_t + u_xxx + 6*u*u_x = 0")
    assert spec.p_coefficients == (Fraction(1),)
    assert set(spec.f_monomials) == {mono(-1, (UXXX, 1)), mono(-6, (U, 1), (UX, 1))}
    assert spec.f_text() == "-u_xxx - 6*u*u_x"


def test_trivial_equation_has_empty_f():
    spec = parse_pde("u_t = 0")
    assert spec.p_coefficients == (Fraction(1),)
    assert spec.f_monomials == ()


def test_second_time_derivative_rejected():
    with pytest.raises(UnsupportedEquation):
        parse_pde("u_tt = u_xx")


@pytest.mark.parametrize("src", ["u_t*u = u_x", "u_t^2 = u", "(u_t)^2 = u", "u_x*u_xt = 0"])
def test_nonlinear_time_derivative_rejected(src):
    with pytest.raises(UnsupportedEquation):
        parse_pde(src)


@pytest.mark.parametrize("src", ["u_t + v_x = 0", "u_t = w", "u_t = u_x/u", "u_x = u", "u_t - u_xyt = 0"])
def test_unsupported(src):
    with pytest.raises(UnsupportedEquation):
        parse_pde(src)


@pytest.mark.parametrize("src", ["", "u_t + u_x", "u_t + (u_x = 0", "u_t = = u", "u_t = u_q",
                                 "u_t = 3 $ u", "u_t = u^x", "u_t = u/0", "u_t = u^1.5"])
def test_syntax_errors(src):
    with pytest.raises(PdeSyntaxError):
        parse_pde(src)


def test_syntax_error_is_a_syntax_error():
    assert issubclass(PdeSyntaxError, SyntaxError)


def test_implicit_products_braces_and_decimals():
    a = parse_pde("u_t + u_{xxx} + 6 u u_x = 0")
    b = parse_pde("u_t + u_xxx + 6*u*u_x = 0")
    assert a.p_coefficients == b.p_coefficients and a.f_monomials == b.f_monomials
    c = parse_pde("u_t = 1.5*u^2 - 0.5 u**2")
    assert c.f_monomials == (mono(1, (U, 2)),)


def test_group_derivative_product_rule():
    spec = parse_pde("u_t = (u^2)_xx")
    assert set(spec.f_monomials) == {mono(2, (U, 1), (UXX, 1)), mono(2, (UX, 2))}


def test_terms_collect_and_cancel():
    spec = parse_pde("u_t + u_x - u_x + 2 u_xxt - u_xxt = u_xxt")
    assert spec.p_coefficients == (Fraction(1),)
    assert spec.f_monomials == ()


def test_named_constants_are_exact():
    spec = parse_pde("u_t = kappa*u_x", {"kappa": "1/3"})
    assert spec.f_monomials == (mono(Fraction(1, 3), (UX, 1)),)
    with pytest.raises(UnsupportedEquation):
        parse_pde("u_t = kappa*u_x")


def test_canonical_order_is_deterministic():
    a = parse_pde("u_t = u_x*u_xx + u + u_xxx")
    b = parse_pde("u_t = u_xxx + u + u_xx*u_x")
    assert a == PdeSpec(b.p_coefficients, b.f_monomials, a.source_text)
    assert [m.sort_key() for m in a.f_monomials] == sorted(m.sort_key() for m in a.f_monomials)


def test_zero_p_rejected_by_spec_type():
    with pytest.raises(UnsupportedEquation):
        PdeSpec((Fraction(0),), (), "0")


def test_monomial_invariants():
    with pytest.raises(ValueError):
        DerivativeMonomial(Fraction(1), ((U, 0),))
    with pytest.raises(ValueError):
        DerivativeMonomial(Fraction(1), ((U, 1), (U, 2)))
    m = mono(3, (UX, 2), (UXXX, 1))
    assert m.total_x_order == 5 and m.degree == 3


# ---------------------------------------------------------------- parity

@pytest.mark.parametrize("m, expected", [
    (mono(1, (U, 1), (UX, 1)), ODD),
    (mono(1, (UX, 2)), EVEN),
    (mono(1, (UYY, 1)), EVEN),
    (mono(1, (U, 3)), EVEN),
    (mono(2, ((1, 2), 1)), ODD),
])
def test_monomial_parity(m, expected):
    assert monomial_x_parity(m) == expected


@pytest.mark.parametrize("name", sorted(BUILTIN_CORPUS))
def test_builtin_corpus_meets_hypotheses(name):
    rep = check_equation(BUILTIN_CORPUS[name], BUILTIN_PARAMS)
    assert rep.hypotheses_met
    assert rep.witness is None


def test_bbm_and_kp_structure():
    bbm = parse_pde(BUILTIN_CORPUS["BBM"])
    assert bbm.p_coefficients == (1, 0, -1)
    kp = parse_pde(BUILTIN_CORPUS["KP"])
    assert kp.p_coefficients == (0, 2)
    rep = check_hypotheses(kp)
    assert (rep.p_parity, rep.f_parity) == (ODD, EVEN)


def test_dp_parity_does_not_depend_on_kappa():
    for kappa in (0, 1, "-7/2"):
        assert check_equation(BUILTIN_CORPUS["DP"], {"kappa": kappa}).hypotheses_met


def test_heat_counterexample_has_witness():
    rep = check_equation(COUNTEREXAMPLES["heat"])
    assert (rep.p_parity, rep.f_parity, rep.hypotheses_met) == (EVEN, EVEN, False)
    assert rep.witness == mono(1, (UXX, 1))


def test_mixed_f_reports_first_offender_in_canonical_order():
    rep = check_equation("u_t = u_x + u*u_xx + u_xxx + u_x^2")
    assert rep.f_parity == MIXED and not rep.hypotheses_met
    assert rep.witness == mono(1, (U, 1), (UXX, 1))


def test_mixed_p_has_no_monomial_witness():
    rep = check_equation("u_t + u_xt = u_x")
    assert rep.p_parity == MIXED and not rep.hypotheses_met and rep.witness is None


def test_empty_f_matches_either_parity():
    assert check_equation("u_t = 0").hypotheses_met
    assert check_equation("u_xt = 0").hypotheses_met


SOURCES = list(BUILTIN_CORPUS.values()) + [
    "u_t = 0", "u_t = u_xx", "u_t + u_xt = u_x", "u_t = u_x + u*u_xx", "u_xt = u^2", "u_xxt = u_x",
]


@pytest.mark.parametrize("src", SOURCES)
def test_report_invariants(src):
    spec = parse_pde(src, BUILTIN_PARAMS)
    rep = check_hypotheses(spec)
    assert rep == check_hypotheses(spec)
    pure_mismatch = rep.p_parity != MIXED and rep.f_parity != MIXED and not rep.hypotheses_met
    assert rep.hypotheses_met == ((rep.p_parity, rep.f_parity) in ((EVEN, ODD), (ODD, EVEN)))
    if rep.hypotheses_met:
        assert rep.witness is None
    else:
        assert rep.witness is not None or rep.p_parity == MIXED
        assert rep.witness is not None or not pure_mismatch


def test_json_report_fields():
    data = json.loads(check_equation("u_t = u_xx").to_json())
    assert data == {"source": "u_t = u_xx", "p_parity": "even", "f_parity": "even",
                    "hypotheses_met": False, "witness": "u_xx"}


def test_equation_file(tmp_path):
    path = tmp_path / "eqs.txt"
    path.write_text("# corpus\nu_t + u_xxx + 6*u*u_x = 0  # KdV\n\n   \nu_t = u_xx\n", encoding="utf-8")
    assert read_equation_file(path) == ["u_t + u_xxx + 6*u*u_x = 0", "u_t = u_xx"]


# ------------------------------------------------ numerical parity oracle

def _factor_values(coeffs, order, x):
    d = P.polyder(coeffs, order) if order else coeffs
    return P.polyval(x, d)


def _evaluate(monomials, coeffs, x):
    out = np.zeros_like(x)
    for m in monomials:
        term = np.full_like(x, float(m.coefficient))
        for (ox, oy), e in m.factors:
            assert oy == 0
            term = term * _factor_values(coeffs, ox, x) ** e
        out += term
    return out


def _reflected(coeffs):
    return coeffs * (-1.0) ** np.arange(coeffs.size)


def _sign_check(monomials, coeffs, x):
    """Relative mismatch of F(u(-.)) against +F(u)(-x) and -F(u)(-x)."""
    lhs = _evaluate(monomials, _reflected(coeffs), x)
    rhs = _evaluate(monomials, coeffs, -x)
    scale = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-300)
    return np.max(np.abs(lhs - rhs)) / scale, np.max(np.abs(lhs + rhs)) / scale


factor = st.tuples(st.integers(0, 4), st.integers(1, 3))
monomials = st.lists(factor, min_size=1, max_size=3, unique_by=lambda f: f[0]).map(
    lambda fs: DerivativeMonomial(Fraction(1), tuple(((o, 0), e) for o, e in fs)))
polys = st.lists(st.floats(-1, 1, allow_nan=False), min_size=6, max_size=9).map(np.array)


@settings(max_examples=80, deadline=None)
@given(m=monomials, coeffs=polys)
def test_symbolic_parity_matches_numeric_sign(m, coeffs):
    x = np.linspace(-0.9, 0.9, 11)
    even_err, odd_err = _sign_check([m], coeffs, x)
    if monomial_x_parity(m) == EVEN:
        assert even_err <= 1e-10
    else:
        assert odd_err <= 1e-10


@settings(max_examples=30, deadline=None)
@given(coeffs=polys)
def test_corpus_f_is_odd_or_even_numerically(coeffs):
    x = np.linspace(-0.9, 0.9, 11)
    for name in ("KdV", "BBM", "DP"):
        spec = parse_pde(BUILTIN_CORPUS[name], BUILTIN_PARAMS)
        _, odd_err = _sign_check(spec.f_monomials, coeffs, x)
        assert odd_err <= 1e-10
    heat = parse_pde("u_t = u_xx")
    even_err, _ = _sign_check(heat.f_monomials, coeffs, x)
    assert even_err <= 1e-10
