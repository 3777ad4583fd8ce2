"""Scalar profiles and the invariant system (k, delta, sigma/lambda) of a skew ruled surface."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.interpolate import make_interp_spline

from . import expressions as ex

HALF_PI = 0.5 * math.pi


class ProfileDomainError(ValueError):
    """Query outside a profile's domain, or too close to its edge for differencing."""


class InvariantViolation(ValueError):
    """The invariant system does not describe a skew ruled surface."""


def _check_domain(domain, u):
    if domain is None:
        return
    a, b = domain
    uu = np.asarray(u, dtype=float)
    slack_a, slack_b = 1e-12 * max(1.0, abs(a)), 1e-12 * max(1.0, abs(b))
    if np.any(uu < a - slack_a) or np.any(uu > b + slack_b) or np.any(np.isnan(uu)):
        raise ProfileDomainError(f"u={u!r} outside domain [{a}, {b}]")


def _fd_step(u):
    return max(1e-5, 1e-5 * abs(u))


class ScalarProfile:
    """A real function of ``u`` on an optional closed domain."""

    domain = None
    #: True when derivatives come from a closed form (no edge margin needed)
    exact_derivatives = False

    def __call__(self, u):
        _check_domain(self.domain, u)
        return self._value(u)

    def _value(self, u):
        raise NotImplementedError

    def derivative(self, u, order=1):
        return _finite_difference(self, u, order)


@dataclass(frozen=True)
class ConstantProfile(ScalarProfile):
    value: float
    domain: tuple | None = None
    exact_derivatives = True

    def _value(self, u):
        if np.ndim(u) == 0:
            return float(self.value)
        return np.full(np.shape(u), float(self.value))

    def derivative(self, u, order=1):
        _check_order(order)
        _check_domain(self.domain, u)
        return 0.0 if np.ndim(u) == 0 else np.zeros(np.shape(u))


@dataclass(frozen=True)
class ExpressionProfile(ScalarProfile):
    """Profile given by a parsed expression; derivatives are symbolic."""

    ast: ex.Node
    domain: tuple | None = None
    text: str | None = None
    exact_derivatives = True

    @classmethod
    def parse(cls, text, domain=None):
        return cls(ex.parse_expression(text), domain, text)

    def _value(self, u):
        return ex.evaluate(self.ast, u)

    @cached_property
    def _derivatives(self):
        d1 = ex.derivative(self.ast)
        return d1, ex.derivative(d1)

    def derivative(self, u, order=1):
        _check_order(order)
        _check_domain(self.domain, u)
        return ex.evaluate(self._derivatives[order - 1], u)


class TableProfile(ScalarProfile):
    """Uniformly sampled values with spline interpolation (cubic by default)."""

    exact_derivatives = True

    def __init__(self, u0, step, values, degree=3):
        values = np.array(values, dtype=float)
        if values.ndim != 1 or len(values) < 2:
            raise ValueError("table needs at least two samples")
        if step <= 0:
            raise ValueError("table step must be positive")
        if not np.all(np.isfinite(values)):
            raise ValueError("table values must be finite")
        self.u0 = float(u0)
        self.step = float(step)
        self.values = values
        self.values.setflags(write=False)
        self.grid = self.u0 + self.step * np.arange(len(values))
        self.domain = (self.u0, float(self.grid[-1]))
        self.degree = min(degree, len(values) - 1)
        self._spline = make_interp_spline(self.grid, values, k=self.degree)

    @classmethod
    def from_function(cls, func, a, b, num, degree=3):
        grid = np.linspace(a, b, num)
        return cls(a, (b - a) / (num - 1), func(grid), degree)

    def _value(self, u):
        out = self._spline(u)
        return float(out) if np.ndim(out) == 0 else out

    def derivative(self, u, order=1):
        _check_order(order)
        _check_domain(self.domain, u)
        if len(self.values) < 5:
            raise ValueError("table with fewer than 5 samples is not differentiable")
        out = self._spline(u, nu=order)
        return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class FunctionProfile(ScalarProfile):
    """Wraps a vectorized callable; derivatives by central differences."""

    func: Callable
    domain: tuple | None = None

    def _value(self, u):
        out = self.func(u)
        return float(out) if np.ndim(out) == 0 else np.asarray(out, dtype=float)


def _check_order(order):
    if order not in (1, 2):
        raise ValueError("derivative order must be 1 or 2")


def _finite_difference(p, u, order):
    """Five-point central differences with step max(1e-5, 1e-5|u|)."""
    _check_order(order)
    if np.ndim(u) != 0:
        return np.array([_finite_difference(p, float(x), order) for x in np.ravel(u)]).reshape(np.shape(u))
    u = float(u)
    h = _fd_step(u)
    if p.domain is not None:
        a, b = p.domain
        if u - 2 * h < a or u + 2 * h > b:
            raise ProfileDomainError(f"u={u} within two difference steps of the domain edge")
    f = p._value
    if order == 1:
        return (-f(u + 2 * h) + 8 * f(u + h) - 8 * f(u - h) + f(u - 2 * h)) / (12 * h)
    return (-f(u + 2 * h) + 16 * f(u + h) - 30 * f(u) + 16 * f(u - h) - f(u - 2 * h)) / (12 * h * h)


def as_profile(obj, domain=None) -> ScalarProfile:
    """Coerce a number, expression string or profile into a ScalarProfile."""
    if isinstance(obj, ScalarProfile):
        return obj
    if isinstance(obj, str):
        return ExpressionProfile.parse(obj, domain)
    if isinstance(obj, (int, float)) and not isinstance(obj, bool):
        return ConstantProfile(float(obj), domain)
    if callable(obj):
        return FunctionProfile(obj, domain)
    raise TypeError(f"cannot build a profile from {obj!r}")


def eval_profile(p: ScalarProfile, u: float):
    return p(u)


def profile_derivative(p: ScalarProfile, u: float, order: int = 1):
    return p.derivative(u, order)


# --- invariant system -----------------------------------------------------

def lambda_to_sigma(lam):
    """sigma = arccot(lambda) in (-pi/2, pi/2]; lambda == 0 maps to pi/2 exactly."""
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore"):
        sig = np.where(lam == 0.0, HALF_PI, np.arctan(1.0 / np.where(lam == 0.0, 1.0, lam)))
    return float(sig) if sig.ndim == 0 else sig


def sigma_to_lambda(sig):
    sig = np.asarray(sig, dtype=float)
    lam = np.where(np.abs(sig - HALF_PI) <= 4e-16, 0.0, np.cos(sig) / np.sin(sig))
    return float(lam) if lam.ndim == 0 else lam


class InvariantProfile:
    """Conical curvature k, drall delta and striction sigma (with lambda = cot sigma).

    Exactly one of ``lam`` / ``sigma`` is given; the other is derived.  The
    constructor checks, on a grid of ``check_points`` points, that delta
    does not vanish and that sign(sigma) == sign(delta).
    """

    def __init__(self, k, delta, lam=None, sigma=None, domain=(0.0, 2 * math.pi),
                 name="generic", check_points=100):
        if (lam is None) == (sigma is None):
            raise ValueError("give exactly one of lam, sigma")
        a, b = (float(domain[0]), float(domain[1]))
        if not a < b:
            raise ValueError(f"empty domain [{a}, {b}]")
        self.domain = (a, b)
        self.name = name
        self.k_profile = as_profile(k)
        self.delta_profile = as_profile(delta)
        if lam is not None:
            self.lambda_profile = as_profile(lam)
            self.sigma_profile = FunctionProfile(lambda u: lambda_to_sigma(self.lambda_profile(u)))
        else:
            self.sigma_profile = as_profile(sigma)
            self.lambda_profile = FunctionProfile(lambda u: sigma_to_lambda(self.sigma_profile(u)))
        self.validate(check_points)

    def __repr__(self):
        return f"InvariantProfile({self.name!r}, domain={self.domain})"

    def _in(self, u):
        _check_domain(self.domain, u)
        return u

    def k(self, u):
        return self.k_profile(self._in(u))

    def delta(self, u):
        return self.delta_profile(self._in(u))

    def lam(self, u):
        return self.lambda_profile(self._in(u))

    def sigma(self, u):
        return self.sigma_profile(self._in(u))

    def ddelta(self, u):
        """delta'(u)."""
        p = self.delta_profile
        self._in(u)
        if p.exact_derivatives or p.domain is not None:
            return p.derivative(u, 1)
        # unbounded callable: keep finite-difference stencils inside our own domain
        return _finite_difference(FunctionProfile(p._value, self.domain), u, 1)

    def values(self, u):
        """(k, delta, delta', lambda) at ``u``."""
        return self.k(u), self.delta(u), self.ddelta(u), self.lam(u)

    def grid(self, num=100):
        return np.linspace(self.domain[0], self.domain[1], num)

    def validate(self, num=100):
        u = self.grid(num)
        try:
            d = np.asarray(self.delta(u), dtype=float)
            s = np.asarray(self.sigma(u), dtype=float)
            lam = np.asarray(self.lam(u), dtype=float)
            np.asarray(self.k(u), dtype=float)
        except ex.EvaluationError as err:
            raise InvariantViolation(f"profile evaluation failed: {err}") from err
        scale = float(np.max(np.abs(d)))
        if scale == 0.0 or np.any(np.abs(d) <= 1e-12 * max(scale, 1.0)):
            bad = u[np.argmin(np.abs(d))]
            raise InvariantViolation(f"drall vanishes near u={bad:.6g} (torsal generator)")
        if np.any(np.sign(d[1:]) != np.sign(d[:-1])):
            raise InvariantViolation("drall changes sign inside the domain (torsal generator)")
        if np.any(s <= -HALF_PI) or np.any(s > HALF_PI + 1e-15):
            raise InvariantViolation("striction angle outside (-pi/2, pi/2]")
        if np.any(np.sign(s) != np.sign(d)):
            bad = u[np.argmax(np.sign(s) != np.sign(d))]
            raise InvariantViolation(f"sign(sigma) != sign(delta) at u={bad:.6g}")
        if np.max(np.abs(lam * np.sin(s) - np.cos(s))) > 1e-12:
            raise InvariantViolation("lambda inconsistent with cot(sigma)")


BUILTINS = ("helicoid", "edlinger", "const_drall_orthoid", "const_drall_conoid", "generic")


def make_builtin_profile(name: str, domain=(0.0, 2 * math.pi), **params) -> InvariantProfile:
    """Named surface classes.

    helicoid(delta0), edlinger(k0, delta0), const_drall_orthoid(k, delta0),
    const_drall_conoid(lam, delta0), generic(k, delta, sigma | lam).
    Profile-valued parameters accept numbers, expression strings or profiles.
    """
    if name not in BUILTINS:
        raise ValueError(f"unknown surface class {name!r}; expected one of {BUILTINS}")

    def need(key):
        if key not in params:
            raise ValueError(f"{name} requires parameter {key!r}")
        return params[key]

    def delta0():
        d = float(need("delta0"))
        if d == 0.0:
            raise InvariantViolation("delta0 must be non-zero")
        return d

    if name == "helicoid":
        return InvariantProfile(0.0, delta0(), lam=0.0, domain=domain, name=name)
    if name == "edlinger":
        k0 = float(need("k0"))
        if k0 == 0.0:
            raise InvariantViolation("edlinger needs k0 != 0")
        return InvariantProfile(k0, delta0(), lam=-1.0 / k0, domain=domain, name=name)
    if name == "const_drall_orthoid":
        return InvariantProfile(need("k"), delta0(), lam=0.0, domain=domain, name=name)
    if name == "const_drall_conoid":
        return InvariantProfile(0.0, delta0(), lam=need("lam"), domain=domain, name=name)
    k, delta = need("k"), need("delta")
    if "sigma" in params:
        return InvariantProfile(k, delta, sigma=params["sigma"], domain=domain, name=name)
    return InvariantProfile(k, delta, lam=need("lam"), domain=domain, name=name)
