"""Pointwise geometry of x(u, v) = s(u) + v e(u).

Closed forms in terms of the invariants (with w = sqrt(v^2 + delta^2)):

    g = [[v^2 + delta^2 (lambda^2 + 1), delta lambda], [delta lambda, 1]]
    h = 1/w [[-(k v^2 + delta' v + delta^2 (k - lambda)), delta], [delta, 0]]
    K = -delta^2 / w^4
    H = -(k v^2 + delta' v + delta^2 (k + lambda)) / (2 w^3)

``fd_geometry_oracle`` recomputes the same quantities by differencing the
embedding and shares no formulas with the closed forms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .frames import StrictionCurve, integrate_striction_frame
from .profiles import InvariantProfile, ProfileDomainError

EDLINGER_TOL = 1e-9


class NotEdlingerError(ValueError):
    """delta' = k lambda + 1 = 0 does not hold at the requested point."""


class OracleConvergenceError(ArithmeticError):
    pass


@dataclass(frozen=True)
class DirectionUV:
    """Tangent direction du:dv, stored with du^2 + dv^2 = 1."""

    du: float
    dv: float
    fallback: bool = False

    def __post_init__(self):
        r = math.hypot(self.du, self.dv)
        if r == 0 or not math.isfinite(r):
            raise ValueError("direction must be a non-zero finite vector")
        object.__setattr__(self, "du", self.du / r)
        object.__setattr__(self, "dv", self.dv / r)

    def __iter__(self):
        return iter((self.du, self.dv))

    def canonical(self):
        """Same line with du >= 0 (and dv > 0 when du == 0)."""
        if self.du < 0 or (self.du == 0 and self.dv < 0):
            return DirectionUV(-self.du, -self.dv, self.fallback)
        return self


@dataclass(frozen=True)
class PointGeometry:
    u: float
    v: float
    w: float
    g: np.ndarray
    h: np.ndarray
    K: float
    H: float
    k1: float
    k2: float


def principal_from_KH(K, H):
    """(k1, k2) with k1 >= k2 from Gaussian and mean curvature (K < 0 here).

    The larger-magnitude root is formed by addition and the other from
    k1 k2 = K, which keeps both identities tight to rounding.
    """
    r = math.sqrt(max(H * H - K, 0.0))
    if H >= 0:
        big = H + r
        if big == 0.0:
            return 0.0, 0.0
        return big, K / big
    small = H - r
    return K / small, small


def _invariants(profile, u):
    k, d, dd, lam = profile.values(u)
    return float(k), float(d), float(dd), float(lam)


def fundamental_tensors(profile: InvariantProfile, u: float, v: float):
    """(g, h, w) at (u, v)."""
    k, d, dd, lam = _invariants(profile, u)
    w = math.sqrt(v * v + d * d)
    g = np.array([[v * v + d * d * (lam * lam + 1.0), d * lam], [d * lam, 1.0]])
    h = np.array([[-(k * v * v + dd * v + d * d * (k - lam)) / w, d / w], [d / w, 0.0]])
    return g, h, w


def curvature_scalars(profile: InvariantProfile, u: float, v: float) -> PointGeometry:
    k, d, dd, lam = _invariants(profile, u)
    g, h, w = fundamental_tensors(profile, u, v)
    w2 = v * v + d * d  # not w * w, which rounds twice
    K = -d * d / (w2 * w2)
    H = -(k * v * v + dd * v + d * d * (k + lam)) / (2.0 * w2 * w)
    k1, k2 = principal_from_KH(K, H)
    return PointGeometry(float(u), float(v), w, g, h, K, H, k1, k2)


def is_edlinger_at(profile, u, tol=EDLINGER_TOL):
    k, d, dd, lam = _invariants(profile, u)
    return abs(dd) <= tol and abs(k * lam + 1.0) <= tol and k != 0.0


def edlinger_principal_curvatures(profile: InvariantProfile, u: float, v: float, tol=EDLINGER_TOL):
    """(-k/w, delta^2/(k w^3)) on an Edlinger surface, in that order."""
    k, d, dd, lam = _invariants(profile, u)
    if abs(dd) > tol or abs(k * lam + 1.0) > tol:
        raise NotEdlingerError(
            f"not an Edlinger surface at u={u}: delta'={dd:.3g}, k*lambda+1={k * lam + 1:.3g}")
    if k == 0.0:
        raise NotEdlingerError("k vanishes")
    w = math.sqrt(v * v + d * d)
    return -k / w, d * d / (k * w ** 3)


def normal_curvature(profile: InvariantProfile, u: float, v: float, direction) -> float:
    """Normal curvature II(dir)/I(dir) in the direction du:dv."""
    du, dv = direction
    if du == 0 and dv == 0:
        raise ValueError("degenerate direction")
    k, d, dd, lam = _invariants(profile, u)
    w = math.sqrt(v * v + d * d)
    num = -(k * v * v + dd * v + d * d * (k - lam)) * du * du + 2.0 * d * du * dv
    den = (v * v + d * d * (lam * lam + 1.0)) * du * du + 2.0 * d * lam * du * dv + dv * dv
    return num / (w * den)


# --- the embedded surface ----------------------------------------------------

class RuledSurface:
    """Invariant profile plus its integrated striction curve."""

    def __init__(self, profile: InvariantProfile, striction: StrictionCurve, v_range=(-2.0, 2.0)):
        if not v_range[0] < v_range[1]:
            raise ValueError("empty v-range")
        self.profile = profile
        self.striction = striction
        self.v_range = (float(v_range[0]), float(v_range[1]))

    @classmethod
    def from_profile(cls, profile: InvariantProfile, v_range=(-2.0, 2.0), h=1e-3):
        a, b = profile.domain
        return cls(profile, integrate_striction_frame(profile, a, b, h), v_range)

    @property
    def domain(self):
        return self.striction.domain

    def position(self, u, v, check_range=True):
        """s(u) + v e(u); broadcasts over array arguments."""
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        if check_range:
            lo, hi = self.v_range
            if np.any(v < lo) or np.any(v > hi):
                raise ProfileDomainError(f"v outside range {self.v_range}")
        s = self.striction.point(u)
        e = self.striction.generator(u)
        return s + v[..., None] * e


def position(surface: RuledSurface, u, v):
    return surface.position(u, v)


def fd_geometry_oracle(surface: RuledSurface, u: float, v: float, step: float = 1e-4) -> PointGeometry:
    """Curvature data from central differences of the embedding alone."""
    a, b = surface.domain
    if u - 2 * step < a or u + 2 * step > b:
        raise ProfileDomainError(f"u={u} too close to the domain edge for step {step}")
    geo = _fd_geometry(surface, u, v, step)
    check = _fd_geometry(surface, u, v, 0.5 * step)
    if abs(geo.K - check.K) > 1e-2 * abs(check.K) or abs(geo.H - check.H) > 1e-2 * (abs(check.H) + abs(check.K) ** 0.5):
        raise OracleConvergenceError(f"difference step {step} too large at u={u}, v={v}")
    return geo


def _fd_geometry(surface, u, v, step):
    x = lambda uu, vv: surface.position(uu, vv, check_range=False)
    x0 = x(u, v)
    xup, xum = x(u + step, v), x(u - step, v)
    x_u = (xup - xum) / (2 * step)
    x_v = (x(u, v + step) - x(u, v - step)) / (2 * step)
    x_uu = (xup - 2 * x0 + xum) / (step * step)
    x_uv = (x(u + step, v + step) - x(u + step, v - step) - x(u - step, v + step)
            + x(u - step, v - step)) / (4 * step * step)
    cross = np.cross(x_u, x_v)
    N = cross / np.linalg.norm(cross)
    g = np.array([[x_u @ x_u, x_u @ x_v], [x_u @ x_v, x_v @ x_v]])
    h11, h12 = float(x_uu @ N), float(x_uv @ N)
    h = np.array([[h11, h12], [h12, 0.0]])  # x_vv = 0 on a ruled surface
    det_g = g[0, 0] * g[1, 1] - g[0, 1] ** 2
    K = -h12 * h12 / det_g  # det h with h22 = 0
    H = (g[1, 1] * h11 - 2 * g[0, 1] * h12) / (2 * det_g)
    k1, k2 = principal_from_KH(K, H)
    return PointGeometry(float(u), float(v), math.sqrt(det_g), g, h, K, H, k1, k2)


def fd_second_v_derivative(surface: RuledSurface, u, v, step=0.5):
    """Central second difference of x in v (zero for a ruled surface).

    x is exactly linear in v, so there is no truncation error and a large
    step keeps the roundoff (~eps |x| / step^2) small.
    """
    x = lambda vv: surface.position(u, vv, check_range=False)
    return (x(v + step) - 2 * x(v) + x(v - step)) / (step * step)


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray  # (nu*nv, 3), row-major in u
    faces: np.ndarray  # (nu-1)*(nv-1) quads, zero-based
    nu: int
    nv: int


def sample_mesh(surface: RuledSurface, nu: int, nv: int) -> Mesh:
    """Vertex grid over the full domain and v-range; vertex (i, j) at index i*nv + j."""
    if nu < 2 or nv < 2:
        raise ValueError("mesh needs nu, nv >= 2")
    a, b = surface.domain
    uu = np.linspace(a, b, nu)
    vv = np.linspace(*surface.v_range, nv)
    U, V = np.meshgrid(uu, vv, indexing="ij")
    verts = surface.position(U, V).reshape(-1, 3)
    i, j = np.meshgrid(np.arange(nu - 1), np.arange(nv - 1), indexing="ij")
    base = (i * nv + j).ravel()
    faces = np.stack([base, base + nv, base + nv + 1, base + 1], axis=1)
    return Mesh(verts, faces, nu, nv)
