import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from todacurves import CurveC2, PlaneCurve, cross_ratio, det2, project
from todacurves.backlund import (
    BacklundParams,
    backlund_step,
    backlund_transform,
    closure_residual,
    concircularity_defect,
    continuum_limit_residual,
    discrete_volterra_check,
    inverse_step,
    monodromy,
    periodic_fixpoints,
    periodic_transform,
    projective_distance,
    qevol_residuals,
    quad_cross_ratios,
    s_sequence,
)
from todacurves.errors import DegenerateStep, IdentityMonodromy, PeriodicityObstruction
from todacurves.fixtures import arclength_lift, random_arclength_curve

MU = 1.2


def _pt(rng):
    return rng.normal(size=2) + 1j * rng.normal(size=2)


def test_step_affine_example():
    out = backlund_step((0, 1), (1, 1), (2, 1), -1)
    assert out[0] / out[1] == pytest.approx(4 / 3)


def test_step_mu_one_collapses():
    rng = np.random.default_rng(0)
    a, b, d = _pt(rng), _pt(rng), _pt(rng)
    assert abs(det2(a, backlund_step(a, b, d, 1.0))) < 1e-14


def test_step_degenerate():
    with pytest.raises(DegenerateStep):
        backlund_step((1, 0), (0, 1), (0, 2), MU)


@given(st.integers(0, 10_000), st.complex_numbers(min_magnitude=0.1, max_magnitude=5))
def test_step_solves_cross_ratio(seed, mu):
    rng = np.random.default_rng(seed)
    a, b, d = _pt(rng), _pt(rng), _pt(rng)
    if min(projective_distance(a, b), projective_distance(b, d), projective_distance(a, d)) < 0.05:
        return
    if abs(mu - 1) < 0.05:
        return
    x = backlund_step(a, b, d, mu)
    assert abs(cross_ratio(a, b, x, d) - mu) < 1e-12 * max(1, abs(mu)) * 1e2
    back = inverse_step(a, b, x, mu)
    assert projective_distance(back, d) < 1e-10


def test_fixed_points_close(random8):
    fixed = periodic_fixpoints(random8, MU)
    assert closure_residual(random8, MU, fixed[0]) < 1e-10
    assert closure_residual(random8, MU, fixed[1], "backward") < 1e-10
    M = monodromy(random8, MU)
    assert projective_distance(M @ fixed[0], fixed[0]) < 1e-10
    # the subdominant point is only stable under the inverse map
    assert projective_distance(np.linalg.solve(M, fixed[1]), fixed[1]) < 1e-10


def test_generic_seed_does_not_close():
    c = random_arclength_curve(6, seed=1)
    assert closure_residual(c, MU, np.array([1.0, 0.3j])) > 1e-4
    with pytest.warns(PeriodicityObstruction):
        t = backlund_transform(c, BacklundParams(MU, [1.0, 0.3j]))
    assert not t.periodic and len(t) == 7
    assert np.abs(quad_cross_ratios(c, t) - MU).max() < 1e-10


def test_monodromy_degenerations(random8):
    with pytest.raises(IdentityMonodromy):
        periodic_fixpoints(random8, 0.0)
    with pytest.raises(DegenerateStep):
        periodic_fixpoints(random8, 1.0)


@pytest.mark.parametrize("which", [0, 1])
def test_transform_identities(random8, which):
    t = periodic_transform(random8, MU, which)
    assert t.periodic
    np.testing.assert_allclose(t.g, 1, atol=1e-12)
    assert np.abs(quad_cross_ratios(random8, t) - MU).max() < 1e-12
    s = s_sequence(random8, t)
    r1, r2 = qevol_residuals(random8.Q, t.Q, s, MU)
    assert r1 < 1e-12 and r2 < 1e-12
    d1, d2 = discrete_volterra_check(random8.Q, t.Q, s, MU)
    assert d1 < 1e-12 and d2 < 1e-12


def test_double_transform_returns(random8):
    t = periodic_transform(random8, MU, 0)
    candidates = [periodic_transform(t, MU, w) for w in (0, 1)]
    dists = [
        max(projective_distance(p, q) for p, q in zip(c.points, random8.points)) for c in candidates
    ]
    assert min(dists) < 1e-9
    s = s_sequence(random8, t)
    s_back = s_sequence(t, random8)
    assert np.abs(s * s_back - 1).max() < 1e-10


def test_constant_Q_polygon(octagon_lift):
    t = periodic_transform(octagon_lift, MU, 0)
    np.testing.assert_allclose(t.Q, octagon_lift.Q, atol=1e-12)
    s = s_sequence(octagon_lift, t)
    np.testing.assert_allclose(s, s[0], atol=1e-12)


def test_continuum_limit(random8):
    assert continuum_limit_residual(random8, 1e-3) < 1e-2
    assert continuum_limit_residual(random8, 1e-4) < continuum_limit_residual(random8, 1e-3)


@given(st.integers(0, 10_000), st.floats(1.1, 3.0))
def test_real_mu_concircular(seed, mu):
    rng = np.random.default_rng(seed)
    n = 7
    z = np.exp(2j * np.pi * np.arange(n) / n) + 0.1 * (rng.normal(size=n) + 1j * rng.normal(size=n))
    c = arclength_lift(PlaneCurve(z))
    t = periodic_transform(c, mu, 0)
    a, b = project(c).points, project(t).points
    for k in range(n):
        k1 = (k + 1) % n
        assert concircularity_defect(a[k], a[k1], b[k1], b[k]) < 1e-10


def test_concircularity_detects_generic_quad():
    assert concircularity_defect(0, 1, 1 + 1j, 0.3 + 2j) > 1e-3


def test_open_curve_transform():
    c = CurveC2(random_arclength_curve(7, seed=2).points, periodic=False)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        t = backlund_transform(c, BacklundParams(0.8, [1.0, 0.5]))
    assert not t.periodic
    assert np.abs(quad_cross_ratios(c, t) - 0.8).max() < 1e-12
