import numpy as np
import pytest

from jointcdi.channel import (RaySet, ScenarioConfig, UserGeometry, cdi, channel_samples, draw_rays,
                              draw_rayset, draw_user, laplacian, realize_channel)
from jointcdi.errors import DegenerateInputError
from jointcdi.geometry import ArrayGeometry, ray_response_matrix, vec
from jointcdi.seeding import derive_rng


def test_collapsed_spreads_put_every_ray_on_the_means():
    scen = ScenarioConfig.simplified(0.0, n_clusters=1, n_rays=1, offset_rms_deg=0.0)
    rs = draw_rayset(scen, 7)
    rng = derive_rng(7, "rayset")
    user = draw_user(scen, rng)
    assert rs.theta.shape == (1,)
    assert rs.theta[0] == user.theta0 and rs.phi[0] == user.phi0


def test_means_within_ranges():
    scen = ScenarioConfig.simplified(5.0)
    for s in range(50):
        u = draw_user(scen, derive_rng(s, "u"))
        assert abs(u.theta0) <= np.deg2rad(60) and abs(u.phi0) <= np.deg2rad(45)


def test_cluster_deviation_and_offset_moments():
    scen = ScenarioConfig.simplified(5.0, n_clusters=12, n_rays=20)
    user = UserGeometry(0.0, 0.0, np.deg2rad(5.0), np.deg2rad(5.0))
    rng = np.random.default_rng(3)
    # 10^5 cluster deviations
    _, theta, _ = draw_rays(scen, user, rng, 100_000 // 12 + 1)
    per_cluster = theta.reshape(theta.shape[0], 12, 20)
    dev = per_cluster.mean(axis=2)
    assert abs(np.rad2deg(dev.std()) / 5.0 - 1) < 0.05
    off = laplacian(np.random.default_rng(4), np.deg2rad(1.0), 100_000)
    assert abs(np.rad2deg(np.sqrt(np.mean(off ** 2))) - 1.0) < 0.05


def test_gain_variance():
    scen = ScenarioConfig.simplified(5.0, n_clusters=4, n_rays=5)
    user = UserGeometry(0.1, 0.2, 0.05, 0.05)
    g, _, _ = draw_rays(scen, user, np.random.default_rng(0), 20000)
    assert abs(np.mean(np.abs(g) ** 2) * 20 - 1) < 0.02
    assert abs(np.mean(g)) < 0.01


def test_determinism():
    scen = ScenarioConfig.simplified(10.0)
    a, b = draw_rayset(scen, 42), draw_rayset(scen, 42)
    np.testing.assert_array_equal(a.gains, b.gains)
    np.testing.assert_array_equal(a.theta, b.theta)
    assert not np.array_equal(a.gains, draw_rayset(scen, 43).gains)


def test_single_ray_channel():
    g = ArrayGeometry.ura(2, 2)
    ch = realize_channel(RaySet(np.array([1.0 + 0j]), np.array([np.pi / 2]), np.array([np.pi / 2])), g)
    np.testing.assert_allclose(ch.h, np.ones(4), atol=1e-14)
    assert np.linalg.matrix_rank(ch.H) == 1


def test_cancelling_rays():
    g = ArrayGeometry.ura(2, 3)
    ch = realize_channel(RaySet(np.array([1.0, -1.0]), np.array([0.3, 0.3]), np.array([1.1, 1.1])), g)
    np.testing.assert_allclose(ch.h, 0, atol=1e-14)
    with pytest.raises(DegenerateInputError):
        cdi(np.zeros(3))


def test_single_ray_matrix_form():
    g = ArrayGeometry.ura(3, 4)
    gain = 0.3 - 0.7j
    ch = realize_channel(RaySet(np.array([gain]), np.array([0.4]), np.array([-0.9])), g)
    np.testing.assert_allclose(ch.H, gain * ray_response_matrix(0.4, -0.9, g), atol=1e-13)
    np.testing.assert_allclose(vec(ch.H), ch.h)


def test_ucca_channel_has_no_default_matrix():
    g = ArrayGeometry.ucca(2, 4)
    rs = draw_rayset(ScenarioConfig.simplified(5.0), 1)
    assert realize_channel(rs, g).H is None
    assert realize_channel(rs, g, shape=(2, 4)).H.shape == (2, 4)


def test_cdi_examples(rng):
    np.testing.assert_allclose(cdi(np.array([2.0, 0.0])), [1, 0])
    np.testing.assert_allclose(cdi(np.array([1, 1j])), np.array([1, 1j]) / np.sqrt(2))
    H = rng.standard_normal((3, 4))
    assert abs(np.linalg.norm(cdi(H)) - 1) < 1e-12


def test_mean_power_per_element():
    scen = ScenarioConfig.simplified(10.0)
    g = ArrayGeometry.ura(4, 4)
    user = draw_user(scen, derive_rng(0, "user"))
    h = channel_samples(scen, user, g, derive_rng(0, "p"), 100_000)
    assert 0.95 <= np.mean(np.sum(np.abs(h) ** 2, axis=1)) / g.n_t <= 1.05


def test_lognormal_scenarios():
    umi, uma = ScenarioConfig.umi3d(), ScenarioConfig.uma3d()
    assert umi.n_clusters == 19 and uma.n_clusters == 12
    assert umi.elevation_log_mean() == pytest.approx(max(-0.5, -2.1 * 0.1 + 0.9))
    assert ScenarioConfig.uma3d(distance_m=250, user_height_m=11.5).elevation_log_mean() == pytest.approx(
        max(-0.5, -2.1 * 0.25 - 0.01 * 10 + 0.9))
    assert ScenarioConfig.uma3d(distance_m=2000).elevation_log_mean() == -0.5
    # per-user spreads are log-normal in degrees
    logs = [np.log10(np.rad2deg(draw_user(umi, derive_rng(s, "u")).sigma_theta)) for s in range(4000)]
    assert abs(np.mean(logs) - 1.41) < 0.03
    assert abs(np.var(logs) - 0.17) < 0.02


def test_invalid_scenario():
    with pytest.raises(ValueError):
        ScenarioConfig("Rural")
    with pytest.raises(ValueError):
        ScenarioConfig.simplified(-1.0)
    with pytest.raises(ValueError):
        ScenarioConfig.simplified(5.0, n_clusters=0)
