import numpy as np
import pytest

from jointcdi.geometry import (ArrayGeometry, array_response, ray_response_matrix,
                               ura_subarray_responses, unvec, vec)


def test_broadside_responses_are_all_ones():
    g = ArrayGeometry.ura(2, 2)
    a_h, a_v = ura_subarray_responses(np.pi / 2, np.pi / 2, g)
    np.testing.assert_allclose(a_h, [1, 1], atol=1e-15)
    np.testing.assert_allclose(a_v, [1, 1], atol=1e-15)
    np.testing.assert_allclose(array_response(np.pi / 2, np.pi / 2, g), np.ones(4), atol=1e-15)
    np.testing.assert_allclose(ray_response_matrix(np.pi / 2, np.pi / 2, g), np.ones((2, 2)), atol=1e-15)


def test_hand_evaluated_phase():
    # 2*pi*0.5*cos(pi/3) = pi/2
    g = ArrayGeometry.ura(2, 2)
    a_h, _ = ura_subarray_responses(np.pi / 3, 0.0, g)
    np.testing.assert_allclose(a_h, [1, 1j], atol=1e-12)
    A = ray_response_matrix(np.pi / 3, np.pi / 2, g)
    np.testing.assert_allclose(A, [[1, 1], [1j, 1j]], atol=1e-12)


def test_single_element():
    g = ArrayGeometry.ura(1, 1)
    a_h, a_v = ura_subarray_responses(0.3, -1.2, g)
    assert a_h.shape == (1,) and a_v.shape == (1,)
    assert a_h[0] == 1 and a_v[0] == 1


def test_kron_and_vec_agree(rng):
    g = ArrayGeometry.ura(3, 5, d_h=0.4, d_v=0.7)
    for th, ph in rng.uniform(-np.pi, np.pi, (20, 2)):
        a_h, a_v = ura_subarray_responses(th, ph, g)
        a = array_response(th, ph, g)
        np.testing.assert_allclose(a, np.kron(a_v, a_h), atol=1e-13)
        np.testing.assert_allclose(a, vec(np.outer(a_h, a_v)), atol=1e-13)
        A = ray_response_matrix(th, ph, g)
        assert np.linalg.matrix_rank(A) == 1
        np.testing.assert_allclose(np.abs(a), 1.0, atol=1e-12)


def test_ucca_broadside_and_order():
    g = ArrayGeometry.ucca(1, 4, radii=[0.5])
    np.testing.assert_allclose(array_response(np.pi / 2, 0.7, g), np.ones(4), atol=1e-15)
    g = ArrayGeometry.ucca(3, 5)
    th, ph = 0.4, 1.1
    a = array_response(th, ph, g)
    assert a.shape == (15,)
    # element l*J + j: radial direction l (phi_l = 2 pi (l+1) / L), ring j
    for l in range(5):
        for j in range(3):
            psi = 2 * np.pi * (l + 1) / 5
            want = np.exp(2j * np.pi * g.radii[j] * np.cos(ph - psi) * np.cos(th))
            assert abs(a[l * 3 + j] - want) < 1e-12


def test_batched_shapes(rng):
    g = ArrayGeometry.ura(4, 2)
    th = rng.uniform(size=(3, 7))
    a = array_response(th, th, g)
    assert a.shape == (3, 7, 8)
    assert ray_response_matrix(th, th, g).shape == (3, 7, 4, 2)


def test_vec_unvec_roundtrip(rng):
    M = rng.standard_normal((6, 3, 4)) + 1j * rng.standard_normal((6, 3, 4))
    v = vec(M)
    assert v.shape == (6, 12)
    np.testing.assert_array_equal(v[0, :3], M[0, :, 0])
    np.testing.assert_array_equal(unvec(v, 3, 4), M)


@pytest.mark.parametrize("kw", [
    dict(kind="URA", n_h=0, n_v=2),
    dict(kind="UCCA", n_rings=2, n_per_ring=4, radii=(1.0, 0.5)),
    dict(kind="UCCA", n_rings=2, n_per_ring=4, radii=(0.5,)),
    dict(kind="ULA"),
])
def test_invalid_geometry(kw):
    with pytest.raises(ValueError):
        ArrayGeometry(**kw)


def test_subarray_rejects_ucca():
    with pytest.raises(ValueError):
        ura_subarray_responses(0.1, 0.2, ArrayGeometry.ucca(2, 4))


def test_element_counts():
    assert ArrayGeometry.ura(4, 8).n_t == 32
    assert ArrayGeometry.ucca(4, 8).n_t == 32
    assert ArrayGeometry.ucca(4, 8).radii == (0.5, 1.0, 1.5, 2.0)
