import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from todacurves import FlowCoefficients, arclength, toda
from todacurves.errors import ConstraintViolated, NotArcLength
from todacurves.fixtures import random_curve
from todacurves.lax import (
    L_rate,
    build_L,
    build_V,
    classical_volterra_form,
    coeffs_from_V,
    compat_residual,
    constraint_residual,
    frame_velocity_residual,
    frames,
    gauged_compat_residual,
    instant_compat_residual,
    mat_norm,
    omega_regauge,
    trace_identity_residual,
    transport_residual,
    volterra_gauge,
    volterra_lax_defect,
    volterra_lax_pair,
    volterra_lax_residual,
    volterra_principal_V,
    zero_curvature,
)


def _random_coeffs(seed, n):
    rng = np.random.default_rng(seed)
    return FlowCoefficients(
        0.2 * (rng.normal(size=n) + 1j * rng.normal(size=n)),
        0.2 * (rng.normal(size=n) + 1j * rng.normal(size=n)),
    )


def test_L_of_unit_quadric():
    c = toda.quadric_curve((1, 0), (0, 1), 2.0, 1.0, 6)
    L = build_L(c)
    for k in range(1, 5):
        np.testing.assert_allclose(L[k], [[2, -1], [1, 0]])
    F = frames(c)
    np.testing.assert_allclose(L[1] @ F[1], F[2])


@given(st.integers(0, 10_000))
def test_L_transport_and_det(seed):
    c = random_curve(7, seed=seed)
    assert transport_residual(c) < 1e-12 * np.abs(c.points).max() ** 2
    L = build_L(c)
    np.testing.assert_allclose(np.linalg.det(L), c.g / np.roll(c.g, 1), rtol=1e-12)
    detF = np.linalg.det(frames(c))
    np.testing.assert_allclose(np.linalg.det(L) * detF, np.roll(detF, -1), rtol=1e-12)


@given(st.integers(0, 10_000))
def test_V_moves_frames(seed):
    c = random_curve(6, seed=seed)
    cf = _random_coeffs(seed, 6)
    assert frame_velocity_residual(c, cf) < 1e-12


@given(st.integers(0, 10_000))
def test_instant_zero_curvature(seed):
    c = random_curve(6, seed=seed)
    cf = _random_coeffs(seed, 6)
    assert instant_compat_residual(c, cf) < 1e-12


def test_compat_along_tangential_flow(tangential_traj):
    assert compat_residual(tangential_traj, arclength.tangential_coeffs) < 1e-5


def test_compat_needs_three_states(random8):
    from todacurves import integrate

    traj = integrate(random8, arclength.tangential_coeffs, 1e-3, 1)
    with pytest.raises(ValueError):
        compat_residual(traj, arclength.tangential_coeffs)


def test_coeffs_from_zero_V(random8):
    cf = coeffs_from_V(np.zeros((8, 2, 2)), random8.g, random8.u)
    assert np.all(cf.alpha == 0) and np.all(cf.beta == 0)


def test_coeffs_from_tangential_V(random8):
    V = build_V(random8, arclength.tangential_coeffs(random8))
    cf = coeffs_from_V(V, random8.g, random8.u)
    assert np.abs(cf.alpha).max() < 1e-12
    assert np.abs(cf.beta - 0.5).max() < 1e-12


def test_coeffs_from_classical_toda_V(toda6):
    cf = coeffs_from_V(toda.toda_V1(toda6), toda6.g, toda6.u)
    ref = toda.toda_coeffs(1, toda6)
    assert np.abs(cf.alpha - ref.alpha).max() < 1e-12
    assert np.abs(cf.beta - ref.beta).max() < 1e-12


@given(st.integers(0, 10_000))
def test_build_V_round_trip(seed):
    c = random_curve(6, seed=seed)
    V = build_V(c, _random_coeffs(seed, 6))
    assert np.abs(constraint_residual(V, c.g)).max() < 1e-12
    back = build_V(c, coeffs_from_V(V, c.g, c.u))
    assert mat_norm(back - V) < 1e-12 * max(1, mat_norm(V))


def test_constraint_violation(random8):
    V = np.zeros((8, 2, 2), dtype=complex)
    V[3, 0, 1] = 1.0
    with pytest.raises(ConstraintViolated) as info:
        coeffs_from_V(V, random8.g, random8.u)
    assert info.value.index == 3


@given(st.integers(0, 10_000))
def test_trace_identity(seed):
    c = random_curve(6, seed=seed)
    assert trace_identity_residual(c, _random_coeffs(seed, 6)) < 1e-12


def test_volterra_gauge(random8):
    data = volterra_gauge(random8)
    Q = random8.Q
    expected = np.zeros((8, 2, 2), dtype=complex)
    expected[:, 0, 0], expected[:, 0, 1], expected[:, 1, 0] = 1, -1, Q
    assert mat_norm(data.L - expected) < 1e-12
    assert mat_norm(data.V - volterra_principal_V(Q)) < 1e-12
    assert mat_norm(zero_curvature(data.L, data.V)) > 0


def test_volterra_gauge_needs_unit_g():
    with pytest.raises(NotArcLength):
        volterra_gauge(random_curve(6, seed=1))


@given(st.integers(0, 10_000), st.complex_numbers(min_magnitude=0.2, max_magnitude=5))
def test_spectral_pair_on_volterra(seed, lam):
    rng = np.random.default_rng(seed)
    Q = 0.25 + 0.2 * (rng.normal(size=7) + 1j * rng.normal(size=7))
    assert volterra_lax_residual(Q, lam) < 1e-12
    wrong = volterra_lax_defect(Q, np.zeros(7), lam)
    assert mat_norm(wrong) > 1e-6


def test_gauged_compat_along_trajectory(tangential_traj):
    for lam in (1.0, 0.5 - 0.3j):
        assert gauged_compat_residual(tangential_traj, lam) < 1e-5


def test_classical_form_is_conjugate(random8):
    zeta = 0.8 + 0.1j
    Q = random8.Q
    pair = volterra_lax_pair(Q, zeta**-2)
    cl = classical_volterra_form(pair, zeta)
    np.testing.assert_allclose(np.trace(cl.L, axis1=1, axis2=2), np.trace(pair.L, axis1=1, axis2=2))
    np.testing.assert_allclose(np.linalg.det(cl.V), np.linalg.det(pair.V))
    r = np.sqrt(zeta)
    np.testing.assert_allclose(cl.L[:, 0, 1], r**2 * pair.L[:, 0, 1])


def test_omega_regauge_keeps_zero_curvature():
    c = random_curve(6, seed=7)
    cf = _random_coeffs(7, 6)
    rng = np.random.default_rng(7)
    q = 0.3 * rng.normal(size=8)
    qd = 0.3 * rng.normal(size=8)
    L, V = build_L(c), build_V(c, cf)
    hat = omega_regauge(L, V, q, qd)
    # exact derivative of Omega_{k+1} L_k Omega_k^-1
    D = np.zeros((8, 2, 2))
    D[:, 0, 0], D[1:, 1, 1] = qd / 2, qd[:-1] / 2
    e = np.exp(q / 2)
    Om = np.zeros((8, 2, 2))
    Om[:, 0, 0], Om[1:, 1, 1] = e, -e[:-1]
    Ld = L_rate(c, cf)
    n = 6
    for k in range(n - 1):
        inner = Ld[k] + D[k + 2] @ L[k] - L[k] @ D[k + 1]
        Lhat_dot = Om[k + 2] @ inner @ np.linalg.inv(Om[k + 1])
        rhs = hat.V[k + 1] @ hat.L[k] - hat.L[k] @ hat.V[k]
        assert mat_norm(Lhat_dot - rhs) < 1e-11
