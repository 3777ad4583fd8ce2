"""Distinguished curve families on a skew ruled surface.

Each family is a direction field a du + b dv = 0 on the (u, v) chart:

    S1  curves of constant striction distance      dv = 0
    S2  orthogonal trajectories of S1              [v^2 + delta^2 (lambda^2 + 1)] du + delta lambda dv = 0
    S3  orthogonal trajectories of the generators  delta lambda du + dv = 0
    S4  curves of constant Gaussian curvature      delta' (delta^2 - v^2) du + 2 delta v dv = 0

plus the two curvature-line fields (eigenvectors of the shape operator).
Every family also has a closed-form normal curvature along it, checked
against the general quotient II/I in :func:`geometry.normal_curvature`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .geometry import (
    DirectionUV,
    curvature_scalars,
    fundamental_tensors,
    is_edlinger_at,
    normal_curvature,
)
from .profiles import InvariantProfile, ProfileDomainError

DEGENERACY_TOL = 1e-12


class CurveFamily(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"
    S4 = "S4"
    PRINCIPAL_1 = "PRINCIPAL_1"
    PRINCIPAL_2 = "PRINCIPAL_2"


class DegenerateFieldError(ValueError):
    pass


def _coefficients(family, k, d, dd, lam, v):
    """(a, b) of a du + b dv = 0 for the non-principal families."""
    if family is CurveFamily.S1:
        return 0.0, 1.0
    if family is CurveFamily.S2:
        return v * v + d * d * (lam * lam + 1.0), d * lam
    if family is CurveFamily.S3:
        return d * lam, 1.0
    if family is CurveFamily.S4:
        return dd * (d * d - v * v), 2.0 * d * v
    raise ValueError(family)


def _principal_direction(g, h, kappa):
    # (h - kappa g) x = 0; use the better conditioned row
    m = h - kappa * g
    r0, r1 = m[0], m[1]
    row = r0 if np.hypot(*r0) >= np.hypot(*r1) else r1
    return DirectionUV(row[1], -row[0]).canonical()


def direction_field(family: CurveFamily, profile: InvariantProfile, u: float, v: float) -> DirectionUV:
    """Unit direction of ``family`` at (u, v) with du >= 0.

    Where both S4 coefficients vanish (delta' = 0 at v = 0) the S1 direction
    is returned with ``fallback=True``.
    """
    family = CurveFamily(family)
    if family in (CurveFamily.PRINCIPAL_1, CurveFamily.PRINCIPAL_2):
        geo = curvature_scalars(profile, u, v)
        kappa = geo.k1 if family is CurveFamily.PRINCIPAL_1 else geo.k2
        return _principal_direction(geo.g, geo.h, kappa)
    k, d, dd, lam = (float(x) for x in profile.values(u))
    a, b = _coefficients(family, k, d, dd, lam, v)
    scale = d * d + v * v
    if abs(a) <= DEGENERACY_TOL * scale and abs(b) <= DEGENERACY_TOL * scale:
        if family is CurveFamily.S4:
            return DirectionUV(1.0, 0.0, fallback=True)
        raise DegenerateFieldError(f"{family.value} undefined at u={u}, v={v}")
    return DirectionUV(b, -a).canonical()


def family_normal_curvature(family: CurveFamily, profile: InvariantProfile, u: float, v: float) -> float:
    """Closed-form normal curvature along the family through (u, v)."""
    family = CurveFamily(family)
    k, d, dd, lam = (float(x) for x in profile.values(u))
    w2 = v * v + d * d
    w = math.sqrt(w2)
    G = v * v + d * d * (lam * lam + 1.0)  # g11
    if family is CurveFamily.S1:
        # sign of the delta^2 (k - lambda) term as in the general quotient
        return -(k * v * v + dd * v + d * d * (k - lam)) / (w * G)
    if family is CurveFamily.S2:
        inner = (k * lam + 2.0) * v * v + dd * lam * v + d * d * (lam * lam + k * lam + 2.0)
        return -d * d * lam * inner / (w2 * w * G)
    if family is CurveFamily.S3:
        return -(k * v * v + dd * v + d * d * (k + lam)) / (w2 * w)
    if family is CurveFamily.S4:
        if direction_field(family, profile, u, v).fallback:
            return family_normal_curvature(CurveFamily.S1, profile, u, v)
        A = ((4 * d * d + dd * dd) * v ** 4 + 4 * d * d * dd * lam * v ** 3
             + 2 * d * d * (2 * d * d * (lam * lam + 1.0) - dd * dd) * v * v
             - 4 * d ** 4 * dd * lam * v + d ** 4 * dd * dd)
        return -4 * d * d * v * (k * v ** 3 + d * d * (k - lam) * v + d * d * dd) / (w * A)
    # curvature lines
    if is_edlinger_at(profile, u):
        pair = sorted((-k / w, d * d / (k * w2 * w)), reverse=True)
    else:
        geo = curvature_scalars(profile, u, v)
        pair = (geo.k1, geo.k2)
    return pair[0] if family is CurveFamily.PRINCIPAL_1 else pair[1]


def edlinger_curvature_line_direction(profile: InvariantProfile, u: float, v: float) -> DirectionUV:
    """Second curvature-line field of an Edlinger surface,
    [k^2 v^2 + delta^2 (k^2 + 1)] du - delta k dv = 0."""
    k, d = float(profile.k(u)), float(profile.delta(u))
    a = k * k * v * v + d * d * (k * k + 1.0)
    b = -d * k
    return DirectionUV(b, -a).canonical()


def g_inner(profile, u, v, p, q):
    g, _, _ = fundamental_tensors(profile, u, v)
    return float(np.array(p) @ g @ np.array(q))


def h_inner(profile, u, v, p, q):
    _, h, _ = fundamental_tensors(profile, u, v)
    return float(np.array(p) @ h @ np.array(q))


def field_residual(family, profile, u, v, du, dv):
    """|a du + b dv| / (|(a, b)| |(du, dv)|) for a chord (du, dv)."""
    family = CurveFamily(family)
    if family in (CurveFamily.PRINCIPAL_1, CurveFamily.PRINCIPAL_2):
        ref = direction_field(family, profile, u, v)
        a, b = -ref.dv, ref.du
    else:
        k, d, dd, lam = (float(x) for x in profile.values(u))
        a, b = _coefficients(family, k, d, dd, lam, v)
    norm = math.hypot(a, b) * math.hypot(du, dv)
    return abs(a * du + b * dv) / norm if norm else 0.0


# --- integration of family curves --------------------------------------------

@dataclass(frozen=True)
class FamilyCurveSample:
    family: CurveFamily
    u: np.ndarray
    v: np.ndarray


def integrate_family_curve(family, profile: InvariantProfile, start, span: float, step: float = 1e-2,
                           v_limit: float = 1e3, min_du=0.1) -> FamilyCurveSample:
    """Trace the family curve through ``start`` = (u, v) for ``span`` in u.

    Integrates dv/du with RK4 while the field is transversal to the rulings
    (|du| >= ``min_du`` for the unit direction); otherwise takes arc-length
    RK4 steps, keeping the orientation of the previous step.
    """
    family = CurveFamily(family)
    u, v = float(start[0]), float(start[1])
    u_end = u + span
    a, b = profile.domain
    if not (a <= u <= b and a <= u_end <= b):
        raise ProfileDomainError(f"curve span [{u}, {u_end}] leaves domain [{a}, {b}]")
    sign = 1.0 if span >= 0 else -1.0
    us, vs = [u], [v]

    def field(uu, vv):
        return direction_field(family, profile, uu, vv)

    def slope(uu, vv):
        dvec = field(uu, vv)
        return dvec.dv / dvec.du

    heading = None
    max_steps = int(20 * abs(span) / step) + 100
    for _ in range(max_steps):
        remaining = u_end - u
        if sign * remaining <= 1e-14 * max(1.0, abs(u_end)):
            break
        d0 = field(u, v)
        if abs(d0.du) >= min_du:
            hstep = sign * min(step, abs(remaining))
            k1 = slope(u, v)
            k2 = slope(u + hstep / 2, v + hstep / 2 * k1)
            k3 = slope(u + hstep / 2, v + hstep / 2 * k2)
            k4 = slope(u + hstep, v + hstep * k3)
            v = v + hstep / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            u = u + hstep
            heading = np.array([sign, sign * k1])
        else:
            def tangent(uu, vv, ref):
                t = np.array(tuple(field(uu, vv)))
                return -t if ref is not None and t @ ref < 0 else t
            ref = heading if heading is not None else np.array([sign, 0.0])
            t1 = tangent(u, v, ref)
            t2 = tangent(u + step / 2 * t1[0], v + step / 2 * t1[1], t1)
            t3 = tangent(u + step / 2 * t2[0], v + step / 2 * t2[1], t1)
            t4 = tangent(u + step * t3[0], v + step * t3[1], t1)
            du, dv = step / 6 * (t1 + 2 * t2 + 2 * t3 + t4)
            if sign * du < 0:
                raise DegenerateFieldError(
                    f"{family.value} curve turns back at u={u:.6g}, v={v:.6g}; not a graph over u")
            if sign * (u + du - u_end) > 0:
                frac = (u_end - u) / du
                du, dv = du * frac, dv * frac
            u, v = u + du, v + dv
            heading = t1
        if not (a <= u <= b) or abs(v) > v_limit or not math.isfinite(v):
            raise ProfileDomainError(f"{family.value} curve left the chart at u={u:.6g}, v={v:.6g}")
        us.append(u)
        vs.append(v)
    else:
        raise DegenerateFieldError(f"{family.value} curve did not reach u={u_end} (field along the rulings)")
    return FamilyCurveSample(family, np.array(us), np.array(vs))
