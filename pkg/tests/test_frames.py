import math

import numpy as np
import pytest

from conftest import builtin_profiles
from ruledsurf.frames import (
    DegenerateMapError,
    FrameState,
    RawRuledMap,
    TorsalPointError,
    advance_frame,
    extract_standard_form,
    gram_schmidt,
    integrate_striction_frame,
    orthonormality_defect,
)
from ruledsurf.profiles import InvariantProfile, ProfileDomainError, make_builtin_profile


def _march(profile, state, total, h):
    steps = int(round(total / h))
    for _ in range(steps):
        state = advance_frame(state, profile, total / steps)
    return state


def test_conoid_frame_rotates_in_plane():
    p = InvariantProfile(0.0, 1.0, lam=0.0, domain=(0.0, 2.0))
    st = _march(p, FrameState.canonical(), math.pi / 2, 1e-3)
    np.testing.assert_allclose(st.e, [0, 1, 0], atol=1e-8)
    np.testing.assert_allclose(st.n, [-1, 0, 0], atol=1e-8)
    np.testing.assert_allclose(st.z, [0, 0, 1], atol=1e-8)


def test_zero_step_is_identity(edlinger):
    st = FrameState.canonical(1.0)
    assert advance_frame(st, edlinger, 0.0) is st


def test_constant_k_precession_axis():
    # omega = k e + z is fixed in space for constant k
    k = 1.0
    p = InvariantProfile(k, 1.0, lam=0.0, domain=(0.0, 4.0))
    axis = (k * np.array([1.0, 0, 0]) + np.array([0, 0, 1.0])) / math.sqrt(2)
    st = FrameState.canonical()
    for _ in range(3000):
        st = advance_frame(st, p, 1e-3)
        assert np.dot(st.e, axis) == pytest.approx(1 / math.sqrt(2), abs=1e-8)


def test_step_leaving_domain():
    p = InvariantProfile(0.0, 1.0, lam=0.0, domain=(0.0, 1.0))
    with pytest.raises(ProfileDomainError):
        advance_frame(FrameState.canonical(0.9999), p, 1e-3)


def test_gram_schmidt_restores_frame():
    rng = np.random.default_rng(3)
    e, n = rng.normal(size=3), rng.normal(size=3)
    e, n, z = gram_schmidt(e, n)
    o, hand = orthonormality_defect(e, n, z)
    assert o <= 1e-15 and abs(hand) <= 1e-15


def test_helicoid_striction_is_axis(helicoid):
    c = integrate_striction_frame(helicoid, 0.0, 2 * math.pi, 1e-3)
    np.testing.assert_allclose(c.s[-1] - c.s[0], [0, 0, 2 * math.pi], atol=1e-6)
    assert np.allclose(np.diff(c.u), c.h, rtol=1e-9, atol=0)


def test_empty_integration(helicoid):
    c = integrate_striction_frame(helicoid, 1.0, 1.0)
    assert len(c) == 1
    np.testing.assert_array_equal(c.s[0], [0, 0, 0])
    np.testing.assert_array_equal(c.point(1.0), [0, 0, 0])


def test_drift_bounds_on_long_run():
    for p in builtin_profiles((0.0, 20.0)).values():
        c = integrate_striction_frame(p, 0.0, 20.0, 1e-3)
        assert np.max(c.pre_drift) <= 1e-9
        assert np.max(c.post_drift) <= 1e-15


def test_discrete_tangent_orthogonal_to_normal(builtin):
    c = integrate_striction_frame(builtin, 0.0, 2 * math.pi, 1e-3)
    assert c.discrete_tangent_defect() <= 10 * c.h ** 2


def test_fourth_order_convergence():
    p = InvariantProfile("sin(u)", "1 + 0.5*cos(u)", lam="0.3 + 0.2*u", domain=(0.0, 2.0))
    end = lambda h: integrate_striction_frame(p, 0.0, 2.0, h).s[-1]
    ref = end(0.05 / 8)
    e1 = np.linalg.norm(end(0.05) - ref)
    e2 = np.linalg.norm(end(0.025) - ref)
    assert 12 <= e1 / e2 <= 20


def test_interpolation_hits_nodes(edlinger):
    c = integrate_striction_frame(edlinger, 0.0, 1.0, 1e-2)
    np.testing.assert_allclose(c.point(c.u[37]), c.s[37], atol=1e-14)
    np.testing.assert_allclose(c.generator(c.u[37]), c.e[37], atol=1e-14)
    f = c.frame_at(0.555)
    o, hand = f.defect()
    assert o <= 1e-14 and abs(hand) <= 1e-14


def test_integration_outside_domain(helicoid):
    with pytest.raises(ProfileDomainError):
        integrate_striction_frame(helicoid, 0.0, 7.0)


# --- standard form extraction ---------------------------------------------------

def test_extract_helicoid_from_expressions():
    raw = RawRuledMap(["0", "0", "u"], ["cos(u)", "sin(u)", "0"], (0.0, 2 * math.pi))
    prof, curve = extract_standard_form(raw, 201)
    t = np.linspace(0.1, 6.1, 37)
    np.testing.assert_allclose(prof.k(t), 0.0, atol=1e-9)
    np.testing.assert_allclose(prof.delta(t), 1.0, atol=1e-9)
    np.testing.assert_allclose(prof.lam(t), 0.0, atol=1e-9)
    np.testing.assert_allclose(curve.s[:, 2], curve.u, atol=1e-9)
    np.testing.assert_allclose(curve.s[:, :2], 0.0, atol=1e-9)
    np.testing.assert_allclose(curve.u, np.linspace(0, 2 * math.pi, 201), atol=1e-9)


def test_scaled_direction_same_invariants():
    dom = (0.0, 2 * math.pi)
    a, _ = extract_standard_form(RawRuledMap(["0", "0", "u"], ["cos(u)", "sin(u)", "0"], dom), 101)
    b, _ = extract_standard_form(RawRuledMap(["0", "0", "u"], ["5*cos(u)", "5*sin(u)", "0"], dom), 101)
    t = np.linspace(0.2, 6.0, 20)
    for f in ("k", "delta", "lam"):
        np.testing.assert_allclose(getattr(a, f)(t), getattr(b, f)(t), atol=1e-12)


def test_reparametrization_to_arc_length():
    # e(u^2) is the helicoid's ruling traversed at speed 2u
    raw = RawRuledMap(["0", "0", "u^2"], ["cos(u^2)", "sin(u^2)", "0"], (0.5, 2.0))
    prof, curve = extract_standard_form(raw, 401)
    assert prof.domain[0] == pytest.approx(0.5)
    assert prof.domain[1] == pytest.approx(0.5 + 4.0 - 0.25, rel=1e-10)
    t = np.linspace(0.6, 4.1, 25)
    np.testing.assert_allclose(prof.delta(t), 1.0, atol=1e-8)
    np.testing.assert_allclose(prof.k(t), 0.0, atol=1e-8)


@pytest.mark.parametrize("name", ["helicoid", "edlinger", "orthoid", "conoid"])
def test_round_trip(name):
    p = builtin_profiles()[name]
    c = integrate_striction_frame(p, 0.0, 2 * math.pi, 1e-3)
    ext, curve = extract_standard_form(RawRuledMap.from_curve(c), len(c.u))
    np.testing.assert_allclose(curve.u, c.u, atol=1e-9)
    t = c.u
    for f in ("k", "delta", "lam"):
        ref = np.broadcast_to(getattr(p, f)(t), t.shape)
        err = np.max(np.abs(getattr(ext, f)(t) - ref)) / max(np.max(np.abs(ref)), 1.0)
        assert err <= 1e-6, (name, f, err)
    assert curve.discrete_tangent_defect() <= 10 * curve.h ** 2


def test_round_trip_variable_invariants():
    p = InvariantProfile("0.5*sin(u)", "1 + 0.2*cos(u)", lam="0.4", domain=(0.0, 3.0))
    c = integrate_striction_frame(p, 0.0, 3.0, 1e-3)
    ext, _ = extract_standard_form(RawRuledMap.from_curve(c), len(c.u))
    t = np.linspace(0.05, 2.95, 30)
    np.testing.assert_allclose(ext.k(t), p.k(t), atol=1e-6)
    np.testing.assert_allclose(ext.delta(t), p.delta(t), atol=1e-6)
    np.testing.assert_allclose(ext.lam(t), 0.4, atol=1e-6)


def test_cylinder_is_degenerate():
    raw = RawRuledMap(["cos(u)", "sin(u)", "0"], ["0", "0", "1"], (0.0, 1.0))
    with pytest.raises(DegenerateMapError):
        extract_standard_form(raw, 51)


def test_tangent_developable_is_torsal():
    # cone: all rulings through the origin
    raw = RawRuledMap(["0", "0", "0"], ["cos(u)", "sin(u)", "1"], (0.0, 1.0))
    with pytest.raises(TorsalPointError):
        extract_standard_form(raw, 51)


def test_raw_map_validation():
    with pytest.raises(ValueError):
        RawRuledMap(["0", "0"], ["1", "0", "0"], (0, 1))
    with pytest.raises(ValueError):
        RawRuledMap(["0", "0", "0"], ["1", "0", "0"], (1, 1))
    with pytest.raises(DegenerateMapError):
        RawRuledMap(["0", "0", "u"], ["0", "0", "0"], (0, 1)).spherical_jet(np.array([0.5]))
