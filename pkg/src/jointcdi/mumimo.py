"""Multi-user zero-forcing downlink with quantized channel directions.

An experiment runs in two phases. Phase 1 draws a pool of users, each with its
own long-term angular geometry, and estimates every user's correlation
statistics from ``stats_samples`` independent channels. Phase 2 repeats, per
realization: pick ``K`` distinct users from the pool, draw fresh channels,
quantize each user's direction with every strategy's codebook, build the
zero-forcing precoder from the quantized directions and evaluate the sum rate
on the true channels.

All randomness is keyed by the master seed and the (user, realization,
attempt) indices, and per-realization rates are reduced in index order, so the
report does not depend on the worker count.
"""

import csv
import io
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import codebooks as cb
from .channel import ScenarioConfig, cdi, channel_samples, draw_user
from .errors import SingularPrecoderError
from .geometry import URA, ArrayGeometry, unvec, vec
from .seeding import derive_rng
from .stats import (correlation_set_from_covariance, correlation_set_from_samples,
                    power_coupling, psd_sqrt, sample_covariance)

PERFECT = "PerfectCDI"
GLOBAL = "GlobalRotated"
JOINT_FULL = "JointFull"
JOINT_LOW = "JointLowDim"
JOINT_DFT = "JointDftStats"
INDEPENDENT = "Independent"
STRATEGY_NAMES = (PERFECT, GLOBAL, JOINT_FULL, JOINT_LOW, JOINT_DFT, INDEPENDENT)

CSV_HEADER = "strategy,snr_db,mean_sum_rate,std_err,n_ok,n_redrawn"
SNR_CONVENTION = ("receive SNR: rho is the SINR a single-user matched filter reaches "
                  "on a channel with ||h||^2 = N_t; equal power rho/K per user")

# smallest accepted singular-value ratio of the quantized-CDI matrix
SINGULAR_RTOL = 1e-10

_STRATEGY_RE = re.compile(r"^\s*(\w+)\s*(?:\(\s*(\d+)\s*,\s*(\d+)\s*\))?\s*$")


@dataclass(frozen=True)
class Strategy:
    """A feedback strategy; ``r_h``/``r_v`` only apply to ``JointLowDim``."""

    name: str
    r_h: int = None
    r_v: int = None

    def __str__(self):
        if self.r_h is not None:
            return f"{self.name}({self.r_h},{self.r_v})"
        return self.name


def parse_strategy(text):
    """Parse ``"JointLowDim(2,2)"``-style names.

    ``JointLowDim`` without ranks uses each user's energy-threshold ranks.
    """
    if isinstance(text, Strategy):
        return text
    m = _STRATEGY_RE.match(text)
    if m is None or m.group(1) not in STRATEGY_NAMES:
        raise ValueError(f"unknown strategy {text!r}; expected one of {STRATEGY_NAMES}")
    name = m.group(1)
    if m.group(2) is not None:
        if name != JOINT_LOW:
            raise ValueError(f"strategy {name} takes no ranks")
        r_h, r_v = int(m.group(2)), int(m.group(3))
        if r_h < 1 or r_v < 1:
            raise ValueError("truncation ranks must be >= 1")
        return Strategy(name, r_h, r_v)
    return Strategy(name)


@dataclass(frozen=True)
class ExperimentConfig:
    geometry: ArrayGeometry
    scenario: ScenarioConfig
    K: int = 4
    bits_B: int = 4
    snr_grid_db: tuple = (0.0, 10.0, 20.0)
    n_realizations: int = 1000
    strategies: tuple = (PERFECT, GLOBAL, JOINT_FULL, INDEPENDENT)
    stats_samples: int = 10_000
    master_seed: int = 0
    user_pool: int = 32
    energy_threshold: float = 0.9
    dft_bits: int = 8
    coupling_bits: int = 8
    max_redraws: int = 10

    def __post_init__(self):
        object.__setattr__(self, "strategies", tuple(str(parse_strategy(s)) for s in self.strategies))
        object.__setattr__(self, "snr_grid_db", tuple(float(x) for x in self.snr_grid_db))
        if self.K < 1:
            raise ValueError("K must be >= 1")
        if self.K > self.geometry.n_t:
            raise ValueError(f"K={self.K} exceeds the {self.geometry.n_t} transmit antennas")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if not self.strategies:
            raise ValueError("at least one strategy is required")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("duplicate strategies")
        if not self.snr_grid_db:
            raise ValueError("empty SNR grid")
        if self.bits_B < 0 or self.dft_bits < 0 or self.coupling_bits < 0:
            raise ValueError("bit budgets must be >= 0")
        if self.stats_samples < 2:
            raise ValueError("stats_samples must be >= 2")
        if self.user_pool < self.K:
            raise ValueError(f"user_pool={self.user_pool} smaller than K={self.K}")
        if not 0 < self.energy_threshold <= 1:
            raise ValueError("energy_threshold must lie in (0, 1]")
        if self.max_redraws < 0:
            raise ValueError("max_redraws must be >= 0")
        for s in map(parse_strategy, self.strategies):
            if s.r_h is not None and self.geometry.kind == URA and (
                    s.r_h > self.geometry.n_h or s.r_v > self.geometry.n_v):
                raise ValueError(f"{s} exceeds the {self.geometry.n_h}x{self.geometry.n_v} array")

    @property
    def parsed_strategies(self):
        return tuple(parse_strategy(s) for s in self.strategies)


@dataclass
class SumRateReport:
    """Mean sum rate per (strategy, SNR).

    Arrays are indexed ``[strategy, snr]``; ``n_redrawn`` is per strategy.
    """

    strategies: tuple
    snr_grid_db: tuple
    mean: np.ndarray
    std_err: np.ndarray
    n_ok: np.ndarray
    n_redrawn: np.ndarray
    rates: np.ndarray = field(default=None, repr=False)

    def row(self, strategy, snr_db):
        i = self.strategies.index(str(parse_strategy(strategy)))
        j = self.snr_grid_db.index(float(snr_db))
        return self.mean[i, j], self.std_err[i, j]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER.split(","))
        for i, s in enumerate(self.strategies):
            for j, snr in enumerate(self.snr_grid_db):
                w.writerow([s, _fmt(snr), _fmt(self.mean[i, j]), _fmt(self.std_err[i, j]),
                            int(self.n_ok[i, j]), int(self.n_redrawn[i])])
        return buf.getvalue()


def _fmt(x):
    # repr of a Python float is shortest-roundtrip and locale independent
    return repr(float(x))


# ---------------------------------------------------------------------------
# precoding and rate
# ---------------------------------------------------------------------------

def zf_precoder(quantized_cdi):
    """Column-normalised zero-forcing beamformers.

    Parameters
    ----------
    quantized_cdi : (K, N_t) complex ndarray
        One quantized direction ``h_k`` per row.

    Returns
    -------
    W : (N_t, K) ndarray with ``h_m^H w_k = 0`` for ``m != k``.
    """
    Hq = np.atleast_2d(np.asarray(quantized_cdi, dtype=complex))
    K, n_t = Hq.shape
    if K > n_t:
        raise SingularPrecoderError(f"{K} users exceed {n_t} antennas")
    A = Hq.conj()
    s = np.linalg.svd(A, compute_uv=False)
    if not s[0] > 0 or s[-1] < SINGULAR_RTOL * s[0]:
        raise SingularPrecoderError("quantized CDI matrix is rank deficient")
    W = A.conj().T @ np.linalg.inv(A @ A.conj().T)
    return W / np.linalg.norm(W, axis=0, keepdims=True)


def sum_rate(channels, W, snr_rx):
    """Shannon sum rate of linearly precoded users under equal power.

    Parameters
    ----------
    channels : (K, N_t) true channel vectors, one per row.
    W : (N_t, K) unit-norm beamformers.
    snr_rx : float or array of linear receive SNRs.

    Returns
    -------
    float or ndarray matching ``snr_rx``.
    """
    Hc = np.atleast_2d(np.asarray(channels))
    K, n_t = Hc.shape
    gain = np.abs(Hc.conj() @ W) ** 2 / n_t
    sig = np.diag(gain)
    interf = gain.sum(axis=1) - sig
    rho = np.asarray(snr_rx, dtype=float)[..., None] / K
    out = np.sum(np.log2(1.0 + rho * sig / (1.0 + rho * interf)), axis=-1)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# phase 1: per-user statistics and codebook rotations
# ---------------------------------------------------------------------------

@dataclass
class UserState:
    """One pool user: its geometry, statistics and per-strategy rotations."""

    geometry: object
    corr: object
    rotations: dict
    independent: tuple = None


def _joint_rotation(U_h, U_v, Lam):
    return np.kron(U_v, U_h) * vec(Lam)[None, :]


def _dft_statistics(cfg, corr, user_index):
    W_h, _ = cb.quantize_statistics_dft(corr.U_h[:, :corr.r_h], cfg.dft_bits)
    W_v, _ = cb.quantize_statistics_dft(corr.U_v[:, :corr.r_v], cfg.dft_bits)
    Lam = power_coupling(corr.R, W_h, W_v)
    lam = vec(Lam)
    if lam.size > 1 and np.linalg.norm(lam) > 0:
        book = cb.nonneg_rvq_codebook(lam.size, cfg.coupling_bits,
                                      derive_rng(cfg.master_seed, "coupling", user_index))
        q = cb.quantize(lam / np.linalg.norm(lam), book)
        Lam = unvec(np.real(book.codewords[q.index]), corr.r_h, corr.r_v)
    return W_h, W_v, Lam


def prepare_user(cfg, user_index):
    """Phase-1 state of pool user ``user_index``."""
    geom = cfg.geometry
    user = draw_user(cfg.scenario, derive_rng(cfg.master_seed, "user", user_index))
    samples = channel_samples(cfg.scenario, user, geom,
                              derive_rng(cfg.master_seed, "stats", user_index), cfg.stats_samples)
    if geom.kind == URA:
        corr = correlation_set_from_samples(unvec(samples, geom.n_h, geom.n_v), cfg.energy_threshold)
    else:
        corr = correlation_set_from_covariance(sample_covariance(samples),
                                               energy_threshold=cfg.energy_threshold)
    rotations = {}
    independent = None
    for s in cfg.parsed_strategies:
        key = str(s)
        if s.name == GLOBAL:
            rotations[key] = psd_sqrt(corr.R)
        elif s.name == JOINT_FULL:
            rotations[key] = _joint_rotation(corr.U_h, corr.U_v, corr.Lambda)
        elif s.name == JOINT_LOW:
            r_h = corr.r_h if s.r_h is None else min(s.r_h, corr.n_h)
            r_v = corr.r_v if s.r_v is None else min(s.r_v, corr.n_v)
            rotations[key] = _joint_rotation(corr.U_h[:, :r_h], corr.U_v[:, :r_v], corr.Lambda[:r_h, :r_v])
        elif s.name == JOINT_DFT:
            rotations[key] = _joint_rotation(*_dft_statistics(cfg, corr, user_index))
        elif s.name == INDEPENDENT:
            independent = (psd_sqrt(corr.R_h), psd_sqrt(corr.R_v))
    return UserState(user, corr, rotations, independent)


# ---------------------------------------------------------------------------
# phase 2: realizations
# ---------------------------------------------------------------------------

def _quantized_direction(cfg, state, strategy, h, keys):
    """Quantized CDI of channel ``h`` for one user under one strategy."""
    h_bar = cdi(h)
    if strategy.name == PERFECT:
        return h_bar
    B2 = 2 * cfg.bits_B
    if strategy.name == INDEPENDENT:
        Rh_sqrt, Rv_sqrt = state.independent
        base_h = cb.rvq_codebook(Rh_sqrt.shape[0], cfg.bits_B, derive_rng(cfg.master_seed, "cb_h", *keys))
        base_v = cb.rvq_codebook(Rv_sqrt.shape[0], cfg.bits_B, derive_rng(cfg.master_seed, "cb_v", *keys))
        book = cb.independent_codebook(Rh_sqrt, Rv_sqrt, base_h, base_v)
    else:
        F = state.rotations[str(strategy)]
        # keyed by dimension only: equal-size rotated strategies share base
        # codewords (common random numbers)
        base = cb.rvq_codebook(F.shape[1], B2, derive_rng(cfg.master_seed, "cb", *keys, F.shape[1]))
        book = cb.rotate_codebook(F, base)
    return book.codewords[cb.quantize(h_bar, book).index]


def run_realization(cfg, pool, r):
    """Rates ``(n_strategies, n_snr)`` (NaN when all redraws fail) and redraw counts."""
    snr = 10.0 ** (np.asarray(cfg.snr_grid_db) / 10.0)
    strategies = cfg.parsed_strategies
    rates = np.full((len(strategies), snr.size), np.nan)
    redraws = np.zeros(len(strategies), dtype=np.int64)
    draws = {}

    def draw(attempt):
        # a redraw re-selects users too: users with identical rank-one
        # statistics would otherwise collide on every attempt
        if attempt not in draws:
            chosen = derive_rng(cfg.master_seed, "select", r, attempt).choice(len(pool), cfg.K, replace=False)
            Hc = np.stack([
                channel_samples(cfg.scenario, pool[u].geometry, cfg.geometry,
                                derive_rng(cfg.master_seed, "chan", r, k, attempt), 1)[0]
                for k, u in enumerate(chosen)])
            draws[attempt] = chosen, Hc
        return draws[attempt]

    for i, s in enumerate(strategies):
        for attempt in range(cfg.max_redraws + 1):
            chosen, Hc = draw(attempt)
            Hq = np.stack([_quantized_direction(cfg, pool[u], s, Hc[k], (r, k, attempt))
                           for k, u in enumerate(chosen)])
            try:
                W = zf_precoder(Hq)
            except SingularPrecoderError:
                redraws[i] += 1
                continue
            rates[i] = sum_rate(Hc, W, snr)
            break
    return rates, redraws


def _prepare_chunk(cfg, users):
    return [prepare_user(cfg, u) for u in users]


def _realization_chunk(cfg, pool, start, stop):
    out = [run_realization(cfg, pool, r) for r in range(start, stop)]
    return np.stack([o[0] for o in out]), np.stack([o[1] for o in out])


def _chunks(n, parts):
    step = max(1, math.ceil(n / parts))
    return [(a, min(n, a + step)) for a in range(0, n, step)]


def default_workers():
    """Worker count from ``JOINTCDI_WORKERS`` (default 1)."""
    raw = os.environ.get("JOINTCDI_WORKERS", "").strip()
    if not raw:
        return 1
    n = int(raw)
    if n < 1:
        raise ValueError("JOINTCDI_WORKERS must be >= 1")
    return n


def prepare_pool(cfg, workers=1):
    if workers <= 1:
        return _prepare_chunk(cfg, range(cfg.user_pool))
    spans = _chunks(cfg.user_pool, workers)
    with ProcessPoolExecutor(max_workers=workers) as ex:
        parts = ex.map(_prepare_chunk, [cfg] * len(spans), [range(a, b) for a, b in spans])
        return [u for part in parts for u in part]


def run_experiment(cfg, workers=None):
    """Average sum rates over ``cfg.n_realizations`` realizations."""
    workers = default_workers() if workers is None else int(workers)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    pool = prepare_pool(cfg, workers)
    if workers == 1:
        rates, redraws = _realization_chunk(cfg, pool, 0, cfg.n_realizations)
    else:
        # several chunks per worker keeps the load balanced
        spans = _chunks(cfg.n_realizations, 4 * workers)
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_realization_chunk, [cfg] * len(spans), [pool] * len(spans),
                                [a for a, _ in spans], [b for _, b in spans]))
        rates = np.concatenate([p[0] for p in parts])
        redraws = np.concatenate([p[1] for p in parts])
    return summarize(cfg, rates, redraws)


def summarize(cfg, rates, redraws):
    """Reduce ``rates[realization, strategy, snr]`` in index order."""
    ok = np.isfinite(rates)
    n_ok = ok.sum(axis=0)
    filled = np.where(ok, rates, 0.0)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = filled.sum(axis=0) / n_ok
        dev = np.where(ok, rates - mean, 0.0)
        var = (dev ** 2).sum(axis=0) / np.maximum(n_ok - 1, 1)
        se = np.where(n_ok > 1, np.sqrt(var / n_ok), 0.0)
    return SumRateReport(cfg.strategies, cfg.snr_grid_db, mean, se, n_ok,
                         redraws.sum(axis=0), rates)
