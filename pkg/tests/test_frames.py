import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from antiholo.curvid import random_admissible_q, standard_j
from antiholo.frames import (
    adapted_frame,
    adapted_frame_at,
    all_complex_components,
    complex_basis,
    complex_components,
    nabla_j_components,
    real_from_complex,
    to_frame,
)
from antiholo.manifold import catalog_manifold
from antiholo.tensorcalc import curvature_package

from conftest import E1, PROBE


def _orthonormality(frame, g, J):
    E = frame.vectors
    n = frame.n
    return max(np.abs(E.T @ g @ E - np.eye(2 * n)).max(), np.abs(E[:, n:] - J @ E[:, :n]).max())


def test_flat_frame_is_standard(flat3):
    np.testing.assert_array_equal(adapted_frame_at(flat3, PROBE).vectors, np.eye(6))


def test_fubini_study_origin_frame_is_standard(fs34):
    np.testing.assert_allclose(adapted_frame_at(fs34, np.zeros(6)).vectors, np.eye(6), atol=1e-15)


def test_hopf_frame_scales_with_radius(hopf3):
    F = adapted_frame_at(hopf3, 2 * E1)
    np.testing.assert_allclose(F.vectors, 2 * np.eye(6), atol=1e-14)
    assert _orthonormality(F, hopf3.metric(2 * E1), hopf3.complex_structure(2 * E1)) < 1e-12


@pytest.mark.parametrize("name, params", [("twisted_j", [3, 0.1]), ("fubini_study", [3, 4]),
                                          ("twisted_j", [2, 0.4])])
def test_frame_orthonormal_and_adapted(name, params):
    M = catalog_manifold(name, params)
    for p in M.probe_points()[::17]:
        g, J = M.metric(p), M.complex_structure(p)
        F = adapted_frame(g, J)
        assert _orthonormality(F, g, J) < 1e-12
        np.testing.assert_allclose(to_frame(g, F, "dd"), np.eye(2 * M.n), atol=1e-12)
        np.testing.assert_allclose(to_frame(J, F, "ud"), standard_j(M.n), atol=1e-12)


def test_frame_skips_dependent_direction():
    # J maps x1 to x2, so x2 is already covered after the first pair
    J = np.zeros((4, 4))
    J[1, 0], J[0, 1], J[3, 2], J[2, 3] = 1, -1, 1, -1
    F = adapted_frame(np.eye(4), J)
    np.testing.assert_allclose(F.vectors[:, 0], [1, 0, 0, 0])
    np.testing.assert_allclose(F.vectors[:, 1], [0, 0, 1, 0])


def test_metric_complex_components():
    B = complex_basis(3)
    g = np.eye(6)
    assert np.abs(complex_components(g, B, (False, False))).max() == 0
    np.testing.assert_allclose(complex_components(g, B, (False, True)), np.eye(3) / 2)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_complex_round_trip(seed, n):
    rng = np.random.default_rng(seed)
    T = rng.standard_normal((2 * n,) * 3)
    B = complex_basis(n)
    np.testing.assert_allclose(real_from_complex(all_complex_components(T, B), B), T, atol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_admissible_q_complex_symmetry(seed):
    # Q(JX,JY) = Q(Y,X) gives Q_{a bbar} = Q_{bbar a} and Q_{ab} = -Q_{ba}
    rng = np.random.default_rng(seed)
    Q = random_admissible_q(3, rng)
    B = complex_basis(3)
    Qub = complex_components(Q, B, (False, True))
    Qbu = complex_components(Q, B, (True, False))
    Quu = complex_components(Q, B, (False, False))
    np.testing.assert_allclose(Qub, Qbu.T, atol=1e-12)
    np.testing.assert_allclose(Quu, -Quu.T, atol=1e-12)


def _essential_check(F, n):
    B = complex_basis(n)
    norm = np.linalg.norm(F)
    for bars in np.ndindex(2, 2, 2):
        C = complex_components(F, B, bars)
        if bars in ((1, 0, 0), (0, 1, 1)):
            # F_{abar b c}, skew in (b, c), and its conjugate
            np.testing.assert_allclose(C, -np.swapaxes(C, 1, 2), atol=1e-8 * (1 + norm))
        else:
            assert np.abs(C).max() < 1e-8 * (1 + norm), bars


@pytest.mark.parametrize("p", [E1, np.array([0.7, -0.4, 0.3, 0.9, 0.2, -0.5])])
def test_hopf_f_essential_components(hopf3, p):
    F = curvature_package(hopf3, p).f_frame
    assert np.linalg.norm(F) > 1.0
    _essential_check(F, 3)


def test_fubini_study_f_components_vanish(fs34):
    _essential_check(curvature_package(fs34, PROBE).f_frame, 3)


@pytest.mark.parametrize("p", [E1, np.array([-1.5, 0.2, 1.1, -0.3, 0.8, 1.9])])
def test_hopf_nabla_j_type(hopf3, p):
    comps = nabla_j_components(curvature_package(hopf3, p).f_frame, complex_basis(3))
    for key in ("uuu", "buu", "uub"):
        assert np.abs(comps[key]).max() < 1e-8
    assert np.abs(comps["bub"]).max() > 0.1


def test_twisted_nabla_j_type_fails(twisted):
    comps = nabla_j_components(curvature_package(twisted, PROBE).f_frame, complex_basis(3))
    assert max(np.abs(comps[k]).max() for k in ("uuu", "buu", "uub")) > 1e-3


def test_nabla_j_components_reconstruct_vector():
    # the raised components really are coefficients: (nabla_X J) Y = sum_c c^c Z_c + conj
    rng = np.random.default_rng(3)
    n = 3
    F = rng.standard_normal((6, 6, 6))
    B = complex_basis(n)
    comps = nabla_j_components(F, B)
    T = F  # in an orthonormal frame lowering is the identity
    a, b = 1, 2
    v = np.einsum("i,ijk,j->k", B.Z[:, a], T, B.Z[:, b])
    recon = B.Z @ comps["uuu"][a, b] + B.Zbar @ comps["uub"][a, b]
    np.testing.assert_allclose(recon, v, atol=1e-12)
