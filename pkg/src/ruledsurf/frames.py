"""Companion frame {e, n, z} along the striction line.

The frame obeys

    e' = n,   n' = -e + k z,   z' = -k n

and the striction line s(u) has s' = delta * (lambda * e + z).  Both are
integrated together with classical RK4 and a Gram-Schmidt pass after every
step.  ``extract_standard_form`` goes the other way: from an arbitrary
parametrization c(u) + v d(u) back to tables of k, delta, lambda.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .profiles import (
    InvariantProfile,
    ProfileDomainError,
    ScalarProfile,
    TableProfile,
    as_profile,
)


class IntegrationError(ArithmeticError):
    """Frame or striction integration left its invariants."""


class TorsalPointError(ValueError):
    """Drall vanishes: the surface has a torsal generator."""


class DegenerateMapError(ValueError):
    """Direction field or its spherical image is degenerate."""


def _cross3(a, b):
    # np.cross dominates the step cost for single 3-vectors
    return np.array([a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]])


def orthonormality_defect(e, n, z):
    """(max |<a,b> - delta_ab|, 1 - <e x n, z>) for the triple."""
    m = np.array([e, n, z])
    gram = m @ m.T
    ortho = float(np.max(np.abs(gram - np.eye(3))))
    hand = float(1.0 - np.dot(_cross3(e, n), z))
    return ortho, hand


def gram_schmidt(e, n):
    """Orthonormalize e then n; z = e x n completes a right-handed frame."""
    e = e / math.sqrt(np.dot(e, e))
    n = n - np.dot(n, e) * e
    n = n / math.sqrt(np.dot(n, n))
    return e, n, _cross3(e, n)


@dataclass(frozen=True)
class FrameState:
    u: float
    e: np.ndarray
    n: np.ndarray
    z: np.ndarray

    @classmethod
    def canonical(cls, u=0.0):
        return cls(float(u), np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]),
                   np.array([0.0, 0.0, 1.0]))

    def matrix(self):
        return np.array([self.e, self.n, self.z])

    def defect(self):
        return orthonormality_defect(self.e, self.n, self.z)


def _frame_rate(k):
    # rows e, n, z: F' = A F
    return np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, k], [0.0, -k, 0.0]])


def rk4_frame_step(F, k0, kmid, k1, h):
    """One RK4 step of F' = A(k) F without renormalization."""
    A0, Am, A1 = _frame_rate(k0), _frame_rate(kmid), _frame_rate(k1)
    r1 = A0 @ F
    r2 = Am @ (F + 0.5 * h * r1)
    r3 = Am @ (F + 0.5 * h * r2)
    r4 = A1 @ (F + h * r3)
    return F + (h / 6.0) * (r1 + 2 * r2 + 2 * r3 + r4)


def advance_frame(state: FrameState, profile: InvariantProfile, h: float) -> FrameState:
    """Advance the frame by ``h`` with one RK4 step followed by Gram-Schmidt."""
    if h == 0:
        return state
    u = state.u
    a, b = profile.domain
    if not (a <= u <= b and a <= u + h <= b):
        raise ProfileDomainError(f"step [{u}, {u + h}] leaves domain [{a}, {b}]")
    k = profile.k(np.array([u, u + 0.5 * h, u + h]))
    F = rk4_frame_step(state.matrix(), k[0], k[1], k[2], h)
    e, n, z = gram_schmidt(F[0], F[1])
    return FrameState(u + h, e, n, z)


@dataclass(frozen=True)
class StrictionCurve:
    """Uniform samples of the striction line and its frame.

    ``k`` and ``s_prime`` hold the frame rotation and striction tangent at the
    nodes; they drive cubic Hermite interpolation between samples.
    ``pre_drift`` / ``post_drift`` record, per step, the orthonormality
    defect before and after renormalization (empty for extracted curves).
    """

    u: np.ndarray
    s: np.ndarray
    e: np.ndarray
    n: np.ndarray
    z: np.ndarray
    k: np.ndarray
    s_prime: np.ndarray
    h: float
    pre_drift: np.ndarray = None
    post_drift: np.ndarray = None

    def __len__(self):
        return len(self.u)

    @property
    def domain(self):
        return float(self.u[0]), float(self.u[-1])

    def frame(self, i):
        return FrameState(float(self.u[i]), self.e[i], self.n[i], self.z[i])

    def _locate(self, u):
        u = np.asarray(u, dtype=float)
        a, b = self.domain
        if np.any(u < a - 1e-12 * max(1.0, abs(a))) or np.any(u > b + 1e-12 * max(1.0, abs(b))):
            raise ProfileDomainError(f"u outside striction domain [{a}, {b}]")
        if len(self.u) == 1:
            return np.zeros(u.shape, dtype=int), np.zeros(u.shape)
        i = np.clip(np.floor((u - a) / self.h).astype(int), 0, len(self.u) - 2)
        t = (u - self.u[i]) / self.h
        return i, t

    def _hermite(self, f, df, u):
        i, t = self._locate(u)
        if len(self.u) == 1:
            return f[i]
        t = t[..., None]
        h00 = (1 + 2 * t) * (1 - t) ** 2
        h10 = t * (1 - t) ** 2
        h01 = t * t * (3 - 2 * t)
        h11 = t * t * (t - 1)
        return h00 * f[i] + h10 * self.h * df[i] + h01 * f[i + 1] + h11 * self.h * df[i + 1]

    def point(self, u):
        """Interpolated striction point s(u)."""
        return self._hermite(self.s, self.s_prime, u)

    def generator(self, u):
        """Interpolated (not renormalized) generator direction e(u)."""
        return self._hermite(self.e, self.n, u)

    def frame_at(self, u):
        n_prime = -self.e + self.k[:, None] * self.z
        e = self._hermite(self.e, self.n, u)
        n = self._hermite(self.n, n_prime, u)
        e, n, z = gram_schmidt(np.asarray(e, dtype=float), np.asarray(n, dtype=float))
        return FrameState(float(u), e, n, z)

    def discrete_tangent_defect(self):
        """max |<(s_{i+1} - s_{i-1}) / 2h, n_i>| over interior samples."""
        if len(self.u) < 3:
            return 0.0
        ds = (self.s[2:] - self.s[:-2]) / (2 * self.h)
        return float(np.max(np.abs(np.einsum("ij,ij->i", ds, self.n[1:-1]))))


def integrate_striction_frame(profile: InvariantProfile, u0: float, u1: float, h: float = 1e-3,
                              initial: FrameState | None = None) -> StrictionCurve:
    """Integrate frame and striction line on [u0, u1].

    The initial frame is the canonical basis at ``u0`` and s(u0) is the
    origin.  If ``(u1 - u0) / h`` is not an integer the step is shrunk to
    the nearest uniform spacing.
    """
    if h <= 0:
        raise ValueError("step must be positive")
    a, b = profile.domain
    if not (a <= u0 <= u1 <= b):
        raise ProfileDomainError(f"[{u0}, {u1}] not inside domain [{a}, {b}]")
    steps = int(math.ceil((u1 - u0) / h - 1e-9)) if u1 > u0 else 0
    h = (u1 - u0) / steps if steps else float(h)
    u = u0 + h * np.arange(steps + 1)
    if steps:
        u[-1] = u1
    um = u[:-1] + 0.5 * h

    k_n, d_n, l_n = (np.atleast_1d(np.asarray(f(u), dtype=float)) for f in (profile.k, profile.delta, profile.lam))
    k_m, d_m, l_m = (np.atleast_1d(np.asarray(f(um), dtype=float)) for f in (profile.k, profile.delta, profile.lam))

    start = initial or FrameState.canonical(u0)
    F = start.matrix()
    s = np.zeros(3)
    S = np.empty((steps + 1, 3))
    E, N, Z = (np.empty((steps + 1, 3)) for _ in range(3))
    S[0], E[0], N[0], Z[0] = s, F[0], F[1], F[2]
    pre = np.empty(steps)
    post = np.empty(steps)

    def rate(F, k, d, lam):
        return _frame_rate(k) @ F, d * (lam * F[0] + F[2])

    for i in range(steps):
        r1F, r1s = rate(F, k_n[i], d_n[i], l_n[i])
        F2 = F + 0.5 * h * r1F
        r2F, r2s = rate(F2, k_m[i], d_m[i], l_m[i])
        F3 = F + 0.5 * h * r2F
        r3F, r3s = rate(F3, k_m[i], d_m[i], l_m[i])
        F4 = F + h * r3F
        r4F, r4s = rate(F4, k_n[i + 1], d_n[i + 1], l_n[i + 1])
        F = F + (h / 6.0) * (r1F + 2 * r2F + 2 * r3F + r4F)
        s = s + (h / 6.0) * (r1s + 2 * r2s + 2 * r3s + r4s)
        o, hd = orthonormality_defect(F[0], F[1], F[2])
        pre[i] = max(o, abs(hd))
        e, n, z = gram_schmidt(F[0], F[1])
        F = np.array([e, n, z])
        o, hd = orthonormality_defect(e, n, z)
        post[i] = max(o, abs(hd))
        if pre[i] > 1e-6:
            raise IntegrationError(f"frame lost orthonormality at u={u[i + 1]:.6g} (defect {pre[i]:.3g})")
        S[i + 1], E[i + 1], N[i + 1], Z[i + 1] = s, e, n, z

    s_prime = d_n[:, None] * (l_n[:, None] * E + Z)
    for arr in (u, S, E, N, Z, k_n, s_prime, pre, post):
        arr.setflags(write=False)
    return StrictionCurve(u, S, E, N, Z, k_n, s_prime, float(h), pre, post)


# --- raw parametrizations ---------------------------------------------------

class RawRuledMap:
    """A ruled surface c(u) + v d(u) in arbitrary parametrization."""

    def __init__(self, directrix, direction, domain):
        if len(directrix) != 3 or len(direction) != 3:
            raise ValueError("directrix and direction need three components each")
        self.domain = (float(domain[0]), float(domain[1]))
        if not self.domain[0] < self.domain[1]:
            raise ValueError("empty domain")
        self.directrix = tuple(as_profile(c) for c in directrix)
        self.direction = tuple(as_profile(d) for d in direction)

    @classmethod
    def from_samples(cls, u, points, directions, degree=5):
        """Spline-interpolated map through uniformly spaced samples."""
        u = np.asarray(u, dtype=float)
        h = (u[-1] - u[0]) / (len(u) - 1)
        c = [TableProfile(u[0], h, np.asarray(points)[:, j], degree) for j in range(3)]
        d = [TableProfile(u[0], h, np.asarray(directions)[:, j], degree) for j in range(3)]
        return cls(c, d, (u[0], u[-1]))

    @classmethod
    def from_curve(cls, curve: StrictionCurve, degree=5):
        return cls.from_samples(curve.u, curve.s, curve.e, degree)

    @staticmethod
    def _jet(profiles, u):
        vals = np.stack([np.broadcast_to(p(u), u.shape) for p in profiles], axis=-1)
        d1 = np.stack([np.broadcast_to(p.derivative(u, 1), u.shape) for p in profiles], axis=-1)
        d2 = np.stack([np.broadcast_to(p.derivative(u, 2), u.shape) for p in profiles], axis=-1)
        return vals, d1, d2

    def position(self, u, v):
        c, _, _ = self._jet(self.directrix, np.atleast_1d(np.asarray(u, dtype=float)))
        d, _, _ = self._jet(self.direction, np.atleast_1d(np.asarray(u, dtype=float)))
        return c + np.asarray(v)[..., None] * d

    def spherical_jet(self, u):
        """Unit direction a = d/|d| with a', a'' and the speed q = |a'|."""
        d, d1, d2 = self._jet(self.direction, u)
        r = np.linalg.norm(d, axis=-1)
        if np.any(r == 0):
            raise DegenerateMapError("direction vector vanishes")
        a = d / r[:, None]
        r1 = _dot(d1, a)
        a1 = (d1 - r1[:, None] * a) / r[:, None]
        q = np.linalg.norm(a1, axis=-1)
        r2 = _dot(d2, a) + r * q * q
        a2 = (d2 - r2[:, None] * a - 2 * r1[:, None] * a1) / r[:, None]
        return a, a1, a2, q


def _dot(x, y):
    return np.einsum("ij,ij->i", x, y)


def _det(x, y, z):
    return _dot(np.cross(x, y), z)


LAMBDA_SNAP = 1e-7

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(5)


def _speed(raw, u):
    return raw.spherical_jet(np.atleast_1d(u))[3]


def extract_standard_form(raw: RawRuledMap, num: int = 1001, name: str = "extracted"):
    """Recover (k, delta, lambda) tables and the striction curve from ``raw``.

    The spherical image is reparametrized by arc length t, anchored so that
    t(u0) = u0; maps already in standard form come back unchanged.
    """
    if num < 5:
        raise ValueError("need at least 5 output samples")
    u0, u1 = raw.domain
    fine = np.linspace(u0, u1, 4 * (num - 1) + 1)
    q_fine = _speed(raw, fine)
    if np.min(q_fine) < 1e-10:
        bad = fine[np.argmin(q_fine)]
        raise DegenerateMapError(f"spherical image degenerate near u={bad:.6g}")

    # composite Simpson on pairs of fine intervals
    du = fine[1] - fine[0]
    panels = (du / 3.0) * (q_fine[:-2:2] + 4 * q_fine[1:-1:2] + q_fine[2::2])
    U = fine[::2]
    T = u0 + np.concatenate([[0.0], np.cumsum(panels)])

    t_out = np.linspace(T[0], T[-1], num)
    u_out = PchipInterpolator(T, U)(t_out)
    u_out[0], u_out[-1] = u0, u1
    # Newton polish: t(u) = T[j] + Gauss-Legendre integral of q from U[j]
    for _ in range(3):
        j = np.clip(np.searchsorted(U, u_out) - 1, 0, len(U) - 2)
        half = 0.5 * (u_out - U[j])
        mid = 0.5 * (u_out + U[j])
        nodes = mid[:, None] + half[:, None] * _GL_NODES[None, :]
        qn = _speed(raw, np.clip(nodes.ravel(), u0, u1)).reshape(nodes.shape)
        t_u = T[j] + half * (qn @ _GL_WEIGHTS)
        q_u = _speed(raw, u_out)
        u_out = np.clip(u_out - (t_u - t_out) / q_u, u0, u1)
    u_out[0], u_out[-1] = u0, u1

    a, a1, a2, q = raw.spherical_jet(u_out)
    c, c1, c2 = RawRuledMap._jet(raw.directrix, u_out)
    qq = q * q
    mu = _dot(c1, a1) / qq
    mu1 = (_dot(c2, a1) + _dot(c1, a2)) / qq - 2 * _dot(c1, a1) * _dot(a1, a2) / (qq * qq)

    k = _det(a, a1, a2) / (qq * q)
    delta = _det(a, a1, c1) / qq
    scale = float(np.max(np.abs(delta)))
    if scale == 0.0 or np.min(np.abs(delta)) <= 1e-8 * scale or np.any(np.diff(np.sign(delta)) != 0):
        bad = u_out[np.argmin(np.abs(delta))]
        raise TorsalPointError(f"drall vanishes near u={bad:.6g}")
    lam = (_dot(c1, a) - mu1) / (q * delta)
    # orthoid points: keep sigma = pi/2 exact instead of flipping to -pi/2 on noise
    lam = np.where(np.abs(lam) <= LAMBDA_SNAP, 0.0, lam)

    s = c - mu[:, None] * a
    s1 = c1 - mu1[:, None] * a - mu[:, None] * a1
    e = a
    n = a1 / q[:, None]
    z = np.cross(e, n)

    dt = (t_out[-1] - t_out[0]) / (num - 1)
    domain = (float(t_out[0]), float(t_out[-1]))
    profile = InvariantProfile(
        TableProfile(t_out[0], dt, k),
        TableProfile(t_out[0], dt, delta),
        lam=TableProfile(t_out[0], dt, lam),
        domain=domain,
        name=name,
    )
    curve = StrictionCurve(t_out, s, e, n, z, k, s1 / q[:, None], float(dt))
    return profile, curve
