import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antiholo.curvid import pi1, pi2, psi_of, random_admissible_q, standard_j, synthetic_R
from antiholo.planes import (
    PlaneError,
    TangentPlane,
    constancy_stats,
    constancy_stats_from_tensor,
    extremize_antiholomorphic,
    make_rng,
    random_antiholomorphic_plane,
    sample_curvatures,
    sectional_curvature,
)
from antiholo.tensorcalc import curvature_package

from conftest import E1
from oracles import curvature_on, theta_pair

I6, J3 = np.eye(6), standard_j(3)
FS_ORIGIN = pi1(I6) + pi2(I6, J3)


def test_rng_is_keyed_by_seed_and_stream():
    a = make_rng(7, 3).standard_normal(5)
    np.testing.assert_array_equal(a, make_rng(7, 3).standard_normal(5))
    assert not np.allclose(a, make_rng(7, 4).standard_normal(5))
    assert not np.allclose(a, make_rng(8, 3).standard_normal(5))


def test_random_plane_is_orthonormal_antiholomorphic(flat3):
    g, J = flat3.metric(np.zeros(6)), flat3.complex_structure(np.zeros(6))
    P = random_antiholomorphic_plane(g, J, make_rng(42))
    X, Y = P.X, P.Y
    for v in (X @ Y, X @ J @ Y, abs(X @ X - 1), abs(Y @ Y - 1)):
        assert abs(v) < 1e-14
    assert P.angle(g, J) == pytest.approx(np.pi / 2, abs=1e-10)
    assert P.is_antiholomorphic(g, J)


def test_random_plane_respects_a_general_metric(twisted):
    p = np.array([0.3, -0.2, 0.1, 0.5, 0.2, -0.4])
    g, J = twisted.metric(p), twisted.complex_structure(p)
    rng = make_rng(1)
    for _ in range(20):
        P = random_antiholomorphic_plane(g, J, rng)
        assert P.orthonormality_defect(g) < 1e-12
        assert P.is_antiholomorphic(g, J)


def test_random_plane_has_no_directional_bias():
    rng = make_rng(11)
    X = np.array([random_antiholomorphic_plane(I6, J3, rng).X for _ in range(10_000)])
    # each component of a uniform unit vector in R^6 has variance 1/6
    bound = 3 * np.sqrt(1 / 6 / len(X))
    assert np.all(np.abs(X.mean(axis=0)) < bound)


def test_degenerate_plane_rejected():
    with pytest.raises(PlaneError):
        sectional_curvature(FS_ORIGIN, TangentPlane(E1, E1))


def test_sectional_curvature_values():
    rng = make_rng(3)
    for _ in range(10):
        P = random_antiholomorphic_plane(I6, J3, rng)
        assert sectional_curvature(2 * pi1(I6), P) == pytest.approx(2.0, abs=1e-13)
        assert sectional_curvature(FS_ORIGIN, P) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("theta", [0.0, np.pi / 6, np.pi / 3, np.pi / 2, 1.1])
def test_curvature_at_angle(theta):
    X, Y = theta_pair(3, theta)
    P = TangentPlane(X, Y)
    assert P.angle(I6, J3) == pytest.approx(theta, abs=1e-7)
    assert sectional_curvature(FS_ORIGIN, P) == pytest.approx(1 + 3 * np.cos(theta) ** 2, abs=1e-12)


def test_curvature_at_pi_over_three():
    assert sectional_curvature(FS_ORIGIN, TangentPlane(*theta_pair(3, np.pi / 3))) == pytest.approx(1.75)


def test_constancy_on_space_forms(flat3, fs34):
    s = constancy_stats(flat3, np.zeros(6), m=128, seed=0)
    assert s.nu_hat == 0 and s.max_dev == 0
    s = constancy_stats(fs34, np.zeros(6), m=128, seed=0)
    assert s.nu_hat == pytest.approx(1.0, abs=1e-12) and s.max_dev < 1e-8


def test_constancy_hopf_regression(hopf3):
    s = constancy_stats(hopf3, E1, m=256, seed=0)
    assert s.max_dev > 1e-2
    assert s.nu_hat == pytest.approx(0.68830739040378, rel=1e-9)
    assert s.max_dev == pytest.approx(0.6237026450202152, rel=1e-9)
    # R x S^5: antiholomorphic curvatures fill [0, 1]
    assert s.k_min == pytest.approx(0.0, abs=1e-7)
    assert s.k_max == pytest.approx(1.0, abs=1e-7)


def test_constancy_needs_enough_samples():
    with pytest.raises(ValueError):
        constancy_stats_from_tensor(FS_ORIGIN, I6, J3, m=8)


def test_extremize_constant_tensors():
    r = extremize_antiholomorphic(2 * pi1(I6), I6, J3, restarts=4)
    assert (r.k_min, r.k_max) == pytest.approx((2.0, 2.0), abs=1e-12)
    r = extremize_antiholomorphic(FS_ORIGIN, I6, J3, restarts=4)
    assert (r.k_min, r.k_max) == pytest.approx((1.0, 1.0), abs=1e-7)


def test_extremize_finds_hidden_extremes():
    # K(e_i, e_j) = a_i + a_j on pairs of x-axes and zero on planes meeting the y-axes
    d = 6
    R = np.zeros((d,) * 4)
    a = np.array([0.0, 1.0, 3.0])
    for i in range(3):
        for j in range(3):
            if i != j:
                k = a[i] + a[j]
                R[i, j, j, i], R[j, i, i, j] = k, k
                R[i, j, i, j], R[j, i, j, i] = -k, -k
    r = extremize_antiholomorphic(R, I6, J3, restarts=16, seed=2)
    X, Y = r.argmax.X, r.argmax.Y
    assert r.k_max == pytest.approx(curvature_on(R, X, Y), abs=1e-12)
    assert r.k_max == pytest.approx(4.0, abs=1e-7)  # plane of e_2, e_3
    assert r.k_min == pytest.approx(0.0, abs=1e-7)
    assert r.argmax.is_antiholomorphic(I6, J3, tol=1e-8)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-2, 2))
def test_extremize_synthetic_is_flat_in_antiholomorphic_directions(seed, nu):
    rng = np.random.default_rng(seed)
    R = synthetic_R(random_admissible_q(3, rng), nu, I6, J3)
    r = extremize_antiholomorphic(R, I6, J3, restarts=4, seed=seed % 1000)
    assert r.k_min == pytest.approx(nu, abs=1e-7) and r.k_max == pytest.approx(nu, abs=1e-7)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_extremes_bracket_samples(seed):
    rng = np.random.default_rng(seed)
    R = psi_of(random_admissible_q(3, rng), I6, J3, check=False) + rng.standard_normal() * pi2(I6, J3)
    A = rng.standard_normal((6, 6, 6, 6)) * 0.3
    R = R + (A - A.transpose(1, 0, 2, 3))  # arbitrary, not even a curvature tensor
    stats, _ = constancy_stats_from_tensor(R, I6, J3, m=64, seed=seed % 997, restarts=2)
    assert stats.k_min <= stats.sample_min + 1e-12
    assert stats.k_max >= stats.sample_max - 1e-12


def test_sampling_is_reproducible():
    _, a = sample_curvatures(FS_ORIGIN + pi2(I6, J3), I6, J3, 40, seed=5, stream=2)
    _, b = sample_curvatures(FS_ORIGIN + pi2(I6, J3), I6, J3, 40, seed=5, stream=2)
    np.testing.assert_array_equal(a, b)


def test_extremize_on_chart_agrees_with_frame(hopf3):
    pkg = curvature_package(hopf3, E1)
    r = extremize_antiholomorphic(pkg.riemann_frame, pkg.g_frame, pkg.J_frame, restarts=8)
    assert r.k_min < r.k_max
    assert r.k_max - r.k_min == pytest.approx(1.0, abs=1e-7)
    assert len(r.iterations_min) == 8 and len(r.iterations_max) == 8


def test_restarts_must_be_positive():
    with pytest.raises(ValueError):
        extremize_antiholomorphic(FS_ORIGIN, I6, J3, restarts=0)
