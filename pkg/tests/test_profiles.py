import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ruledsurf.expressions import EvaluationError
from ruledsurf.profiles import (
    ConstantProfile,
    ExpressionProfile,
    FunctionProfile,
    InvariantProfile,
    InvariantViolation,
    ProfileDomainError,
    TableProfile,
    as_profile,
    eval_profile,
    lambda_to_sigma,
    make_builtin_profile,
    profile_derivative,
    sigma_to_lambda,
)


def test_eval_examples():
    assert eval_profile(ConstantProfile(1.0), 3.7) == 1.0
    assert eval_profile(ExpressionProfile.parse("sin(u)"), math.pi / 2) == pytest.approx(1.0, abs=1e-15)
    table = TableProfile.from_function(lambda u: u ** 2, 0.0, 1.0, 11)
    assert eval_profile(table, 0.5) == pytest.approx(0.25, abs=1e-9)


def test_table_reports_spacing_and_domain():
    table = TableProfile(0.0, 0.25, [0, 1, 4, 9, 16])
    assert table.step == 0.25
    assert table.domain == (0.0, 1.0)
    with pytest.raises(ProfileDomainError):
        table(1.5)


def test_table_rejects_bad_input():
    with pytest.raises(ValueError):
        TableProfile(0.0, 0.1, [1.0])
    with pytest.raises(ValueError):
        TableProfile(0.0, -0.1, [1.0, 2.0])
    with pytest.raises(ValueError):
        TableProfile(0.0, 0.1, [1.0, np.nan, 2.0])


def test_derivative_examples():
    assert profile_derivative(ConstantProfile(1.0), 2.0) == 0.0
    assert profile_derivative(ExpressionProfile.parse("sin(u)"), 0.0) == pytest.approx(1.0, abs=1e-8)
    assert profile_derivative(ExpressionProfile.parse("u^3"), 1.0, order=2) == pytest.approx(6.0, abs=1e-6)


def test_finite_difference_profile():
    p = FunctionProfile(np.sin, (0.0, 3.0))
    assert profile_derivative(p, 1.0) == pytest.approx(math.cos(1.0), rel=1e-8)
    assert profile_derivative(p, 1.0, order=2) == pytest.approx(-math.sin(1.0), rel=1e-5)
    with pytest.raises(ProfileDomainError):
        profile_derivative(p, 0.0)
    with pytest.raises(ValueError):
        profile_derivative(p, 1.0, order=3)


def test_table_derivative_from_spline():
    table = TableProfile.from_function(np.sin, 0.0, 3.0, 301)
    assert table.derivative(1.0) == pytest.approx(math.cos(1.0), abs=1e-8)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.1, max_value=2.9))
def test_expression_derivative_matches_oracle(u):
    text = "exp(u/2)*cos(3*u) + u^2"
    sym = ExpressionProfile.parse(text, (0.0, 3.0))
    fd = FunctionProfile(lambda x: sym(x), (0.0, 3.0))
    assert sym.derivative(u) == pytest.approx(fd.derivative(u), rel=1e-6, abs=1e-8)


def test_as_profile_coercions():
    assert isinstance(as_profile(2), ConstantProfile)
    assert isinstance(as_profile("u"), ExpressionProfile)
    assert isinstance(as_profile(np.cos), FunctionProfile)
    with pytest.raises(TypeError):
        as_profile(None)


def test_lambda_sigma_conversion():
    assert lambda_to_sigma(0.0) == math.pi / 2
    assert sigma_to_lambda(math.pi / 2) == 0.0
    for lam in (-3.0, -0.2, 0.5, 4.0):
        assert sigma_to_lambda(lambda_to_sigma(lam)) == pytest.approx(lam, rel=1e-14)
    assert lambda_to_sigma(-1.0) == pytest.approx(-math.pi / 4)


def test_builtin_examples():
    u = np.linspace(0, 2 * math.pi, 50)
    h = make_builtin_profile("helicoid", delta0=1.0)
    assert np.all(h.k(u) == 0) and np.all(h.lam(u) == 0) and np.all(h.delta(u) == 1)
    e = make_builtin_profile("edlinger", k0=-1.0, delta0=1.0)
    assert np.all(e.lam(u) == 1.0) and np.all(e.ddelta(u) == 0.0)
    assert np.all(e.k(u) * e.lam(u) + 1 == 0)
    c = make_builtin_profile("const_drall_conoid", lam=1.0, delta0=1.0)
    assert np.all(c.k(u) == 0) and np.all(c.ddelta(u) == 0)


def test_builtin_errors():
    with pytest.raises(ValueError):
        make_builtin_profile("torus")
    with pytest.raises(ValueError):
        make_builtin_profile("edlinger", delta0=1.0)
    with pytest.raises(InvariantViolation):
        make_builtin_profile("edlinger", k0=0.0, delta0=1.0)
    with pytest.raises(InvariantViolation):
        make_builtin_profile("helicoid", delta0=0.0)


def test_torsal_profile_rejected():
    with pytest.raises(InvariantViolation):
        InvariantProfile(0.0, "sin(u)", lam=0.0, domain=(0.0, math.pi))
    with pytest.raises(InvariantViolation):
        InvariantProfile(0.0, "cos(u)", lam=0.0, domain=(0.0, math.pi))


def test_sign_convention_enforced():
    # lambda = 0 means sigma = pi/2 > 0, which conflicts with negative drall
    with pytest.raises(InvariantViolation):
        InvariantProfile(0.0, -1.0, lam=0.0)
    p = InvariantProfile(0.0, -1.0, lam=-2.0)
    assert p.sigma(1.0) < 0
    with pytest.raises(InvariantViolation):
        InvariantProfile(0.0, 1.0, sigma=-0.3)
    with pytest.raises(InvariantViolation):
        InvariantProfile(0.0, 1.0, sigma=2.0)


def test_exactly_one_of_lambda_sigma():
    with pytest.raises(ValueError):
        InvariantProfile(0.0, 1.0)
    with pytest.raises(ValueError):
        InvariantProfile(0.0, 1.0, lam=0.0, sigma=1.0)


def test_unevaluable_profile_is_invariant_violation():
    with pytest.raises(InvariantViolation):
        InvariantProfile("log(u)", 1.0, lam=0.0, domain=(0.0, 1.0))


def test_domain_is_enforced(helicoid):
    with pytest.raises(ProfileDomainError):
        helicoid.k(7.0)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=-3, max_value=3).filter(lambda x: abs(x) > 1e-3),
       st.floats(min_value=-2, max_value=2),
       st.floats(min_value=-3, max_value=3))
def test_invariants_hold_on_grid(d0, k0, lam0):
    if d0 < 0:
        # sigma rounds to -pi/2 for lambda near 0-, which is excluded
        lam0 = -abs(lam0) - 0.1
    if d0 > 0 and lam0 < 0:
        lam0 = abs(lam0)
    if d0 > 0 and lam0 == 0:
        lam0 = 0.0
    p = InvariantProfile(f"{k0!r} + 0.1*sin(u)", f"{d0!r}*(1.2 + cos(u))", lam=f"{lam0!r}*(1 + 0.3*cos(u))")
    u = p.grid(100)
    d, s, lam = p.delta(u), p.sigma(u), p.lam(u)
    assert np.all(d != 0)
    assert np.all(np.sign(s) == np.sign(d))
    assert np.max(np.abs(lam * np.sin(s) - np.cos(s))) <= 1e-12


def test_values_bundle(edlinger):
    k, d, dd, lam = edlinger.values(1.0)
    assert (k, d, dd, lam) == (-1.0, 1.0, 0.0, 1.0)


def test_evaluation_errors_propagate():
    p = ExpressionProfile.parse("log(u)")
    with pytest.raises(EvaluationError):
        p(-1.0)
