"""Clustered-ray narrowband channel synthesis.

A channel is the sum over ``N`` clusters of ``M`` rays each, ``h = sum g a(theta,
phi)``. Ray angles are ``mean + cluster deviation + intra-cluster offset``.
The per-user means are drawn once (they are the user's long-term geometry),
while deviations, offsets and gains are redrawn for every realization, so
every ray angle has the same marginal law within a user.
"""

from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import DegenerateInputError
from .geometry import URA, unvec, vec
from .seeding import derive_rng

SIMPLIFIED = "Simplified"
UMI3D = "UMi3D"
UMA3D = "UMa3D"
MODELS = (SIMPLIFIED, UMI3D, UMA3D)


@dataclass(frozen=True)
class ScenarioConfig:
    """Angular model parameters. Angles in degrees, log spreads in log10(deg).

    Delay-spread fields are carried for completeness and never used: the
    channel is single-tap.
    """

    model: str = SIMPLIFIED
    n_clusters: int = 12
    n_rays: int = 20
    sigma_deg: float = 5.0
    offset_rms_deg: float = 1.0
    azimuth_mean_range_deg: float = 60.0
    elevation_mean_range_deg: float = 45.0
    log_as_mean: float = 1.41
    log_as_var: float = 0.17
    log_es_mean: float = None
    log_es_var: float = 0.6
    log_ds_mean: float = -6.89
    log_ds_var: float = 0.54
    distance_m: float = 100.0
    user_height_m: float = 1.5

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown scenario model {self.model!r}; expected one of {MODELS}")
        if self.n_clusters < 1 or self.n_rays < 1:
            raise ValueError("need at least one cluster and one ray")
        if self.sigma_deg < 0 or self.offset_rms_deg < 0:
            raise ValueError("angular spreads must be non-negative")
        if self.log_as_var < 0 or self.log_es_var < 0:
            raise ValueError("log-spread variances must be non-negative")

    @classmethod
    def simplified(cls, sigma_deg, n_clusters=12, n_rays=20, **kw):
        return cls(SIMPLIFIED, n_clusters=n_clusters, n_rays=n_rays, sigma_deg=sigma_deg, **kw)

    @classmethod
    def umi3d(cls, distance_m=100.0, **kw):
        params = dict(n_clusters=19, n_rays=20, log_as_mean=1.41, log_as_var=0.17,
                      log_es_var=0.6, log_ds_mean=-6.89, log_ds_var=0.54,
                      distance_m=distance_m)
        params.update(kw)
        return cls(UMI3D, **params)

    @classmethod
    def uma3d(cls, distance_m=250.0, user_height_m=1.5, **kw):
        params = dict(n_clusters=12, n_rays=20, log_as_mean=1.25, log_as_var=0.42,
                      log_es_var=0.49, log_ds_mean=-6.62, log_ds_var=0.32,
                      distance_m=distance_m, user_height_m=user_height_m)
        params.update(kw)
        return cls(UMA3D, **params)

    def elevation_log_mean(self):
        """Mean of log10 elevation spread; distance dependent unless overridden."""
        if self.log_es_mean is not None:
            return self.log_es_mean
        if self.model == UMA3D:
            return max(-0.5, -2.1 * self.distance_m / 1000 - 0.01 * (self.user_height_m - 1.5) + 0.9)
        return max(-0.5, -2.1 * self.distance_m / 1000 + 0.9)

    def with_(self, **kw):
        return replace(self, **kw)


@dataclass(frozen=True)
class UserGeometry:
    """Long-term angular statistics of one user (radians)."""

    theta0: float
    phi0: float
    sigma_theta: float
    sigma_phi: float


@dataclass
class RaySet:
    gains: np.ndarray
    theta: np.ndarray
    phi: np.ndarray


@dataclass
class ChannelRealization:
    h: np.ndarray
    H: np.ndarray = None


def draw_user(scenario, rng):
    """Draw a user's mean angles and, for the log-normal scenarios, its spreads."""
    theta0 = np.deg2rad(rng.uniform(-scenario.azimuth_mean_range_deg, scenario.azimuth_mean_range_deg))
    phi0 = np.deg2rad(rng.uniform(-scenario.elevation_mean_range_deg, scenario.elevation_mean_range_deg))
    if scenario.model == SIMPLIFIED:
        s_t = s_p = np.deg2rad(scenario.sigma_deg)
    else:
        log_as = rng.normal(scenario.log_as_mean, np.sqrt(scenario.log_as_var))
        log_es = rng.normal(scenario.elevation_log_mean(), np.sqrt(scenario.log_es_var))
        s_t = np.deg2rad(10.0 ** log_as)
        s_p = np.deg2rad(10.0 ** log_es)
    return UserGeometry(float(theta0), float(phi0), float(s_t), float(s_p))


def laplacian(rng, rms, size):
    """Zero-mean Laplacian draws with the given RMS, by CDF inversion."""
    b = rms / np.sqrt(2.0)
    u = rng.random(size) - 0.5
    return -b * np.sign(u) * np.log1p(-2.0 * np.abs(u))


def draw_rays(scenario, user, rng, size):
    """Batch of ``size`` independent ray sets for one user.

    Returns
    -------
    gains : (size, N*M) complex
    theta, phi : (size, N*M) float, radians
        Ray ``n*M + m`` is ray ``m`` of cluster ``n``.
    """
    N, M = scenario.n_clusters, scenario.n_rays
    off = np.deg2rad(scenario.offset_rms_deg)
    dev_t = rng.normal(0.0, user.sigma_theta, (size, N))
    dev_p = rng.normal(0.0, user.sigma_phi, (size, N))
    theta = user.theta0 + np.repeat(dev_t, M, axis=1) + laplacian(rng, off, (size, N * M))
    phi = user.phi0 + np.repeat(dev_p, M, axis=1) + laplacian(rng, off, (size, N * M))
    scale = np.sqrt(0.5 / (N * M))
    gains = scale * (rng.standard_normal((size, N * M)) + 1j * rng.standard_normal((size, N * M)))
    return gains, theta, phi


def draw_rayset(scenario, seed, user=None):
    """One ray set, deterministic in ``seed``. Draws the user means too unless given."""
    rng = derive_rng(seed, "rayset")
    if user is None:
        user = draw_user(scenario, rng)
    g, t, p = draw_rays(scenario, user, rng, 1)
    return RaySet(g[0], t[0], p[0])


def synthesize(gains, theta, phi, geom):
    """Channel vectors ``(S, n_t)`` for batched rays ``(S, R)``."""
    gains = np.atleast_2d(gains)
    theta = np.atleast_2d(theta)
    phi = np.atleast_2d(phi)
    if geom.kind == URA:
        H = _kernels.ura_channels(gains, theta, phi, geom.n_h, geom.n_v, geom.d_h, geom.d_v)
        return vec(H)
    return _kernels.ucca_channels(gains, theta, phi, geom.radii, geom.n_per_ring)


def realize_channel(rayset, geom, shape=None):
    """Channel vector and, when a matrix shape applies, its column-major matrix form.

    ``shape`` defaults to ``(n_h, n_v)`` for a URA; a UCCA only gets a matrix
    if ``shape`` is passed.
    """
    h = synthesize(rayset.gains, rayset.theta, rayset.phi, geom)[0]
    if shape is None and geom.kind == URA:
        shape = (geom.n_h, geom.n_v)
    H = None if shape is None else unvec(h, *shape)
    return ChannelRealization(h, H)


def channel_samples(scenario, user, geom, rng, size):
    """``size`` i.i.d. channel vectors of one user, shape ``(size, n_t)``."""
    g, t, p = draw_rays(scenario, user, rng, size)
    return synthesize(g, t, p, geom)


def cdi(x):
    """Unit-norm direction of a channel vector or matrix (Frobenius norm)."""
    x = np.asarray(x)
    nrm = np.linalg.norm(x)
    if not nrm > 0:
        raise DegenerateInputError("channel is identically zero; direction undefined")
    return x / nrm
