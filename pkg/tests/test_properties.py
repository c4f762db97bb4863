"""Property-based checks of the structural invariants."""

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from jointcdi import config as cfgmod
from jointcdi.codebooks import Codebook, normalize_rows, quantize, rvq_codebook
from jointcdi.geometry import ArrayGeometry, array_response, vec
from jointcdi.matrixio import format_matrix, parse_matrix
from jointcdi.mumimo import zf_precoder
from jointcdi.stats import (correlation_set_from_covariance, nearest_kronecker, power_coupling,
                            truncation_rank)

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.sampled_from([(1, 2), (2, 2), (2, 3), (3, 2), (3, 3)])
finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)


def psd(rng, n):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return A @ A.conj().T


def unitary(rng, n):
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
    return Q


@settings(max_examples=60, deadline=None)
@given(seeds, dims, st.floats(1e-3, 1e3))
def test_kronecker_residual_scales_linearly(seed, shape, alpha):
    rng = np.random.default_rng(seed)
    n_h, n_v = shape
    R = psd(rng, n_h * n_v)
    r1 = nearest_kronecker(R, n_h, n_v).residual
    r2 = nearest_kronecker(alpha * R, n_h, n_v).residual
    assert abs(r2 - alpha * r1) <= 1e-9 * alpha * np.linalg.norm(R)


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_kronecker_residual_bounded_by_input(seed, shape):
    rng = np.random.default_rng(seed)
    n_h, n_v = shape
    R = psd(rng, n_h * n_v)
    assert nearest_kronecker(R, n_h, n_v).residual <= np.linalg.norm(R) * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(seeds, dims)
def test_coupled_powers_sum_to_trace(seed, shape):
    rng = np.random.default_rng(seed)
    n_h, n_v = shape
    R = psd(rng, n_h * n_v)
    Lam = power_coupling(R, unitary(rng, n_h), unitary(rng, n_v))
    assert np.all(Lam >= 0)
    assert abs(np.sum(Lam ** 2) - np.trace(R).real) <= 1e-9 * np.trace(R).real


@settings(max_examples=40, deadline=None)
@given(seeds, dims)
def test_correlation_set_bases_are_unitary(seed, shape):
    rng = np.random.default_rng(seed)
    n_h, n_v = shape
    corr = correlation_set_from_covariance(psd(rng, n_h * n_v), n_h, n_v)
    for U in (corr.U_h, corr.U_v):
        np.testing.assert_allclose(U.conj().T @ U, np.eye(U.shape[0]), atol=1e-9)
    assert 1 <= corr.r_h <= n_h and 1 <= corr.r_v <= n_v


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=12), st.floats(0.01, 1.0))
def test_truncation_rank_is_minimal(lam, thr):
    lam = np.sort(np.asarray(lam))[::-1]
    r = truncation_rank(lam, thr)
    assert 1 <= r <= lam.size
    total = lam.sum()
    if total > 0 and r > 1:
        # one fewer eigenvalue does not clear the threshold
        assert lam[:r - 1].sum() <= thr * total * (1 + 1e-12)


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(2, 8), st.integers(0, 6), st.floats(0, 2 * np.pi))
def test_quantizer_phase_invariance_and_norms(seed, dim, bits, phase):
    rng = np.random.default_rng(seed)
    cb = rvq_codebook(dim, bits, rng)
    np.testing.assert_allclose(np.linalg.norm(cb.codewords, axis=1), 1, atol=1e-12)
    h = normalize_rows(rng.standard_normal((1, dim)) + 1j * rng.standard_normal((1, dim)))[0]
    a, b = quantize(h, cb), quantize(np.exp(1j * phase) * h, cb)
    assert abs(a.alignment - b.alignment) < 1e-12
    assert 0 <= a.alignment <= 1


@settings(max_examples=60, deadline=None)
@given(seeds, st.integers(1, 4), st.integers(0, 3))
def test_zf_is_interference_free(seed, K, extra):
    rng = np.random.default_rng(seed)
    Hq = rng.standard_normal((K, K + extra)) + 1j * rng.standard_normal((K, K + extra))
    W = zf_precoder(Hq)
    G = np.abs(Hq.conj() @ W)
    scale = np.abs(Hq).max()
    np.testing.assert_allclose(G - np.diag(np.diag(G)), 0, atol=1e-8 * scale)


@settings(max_examples=60, deadline=None)
@given(st.floats(-np.pi, np.pi), st.floats(-np.pi, np.pi), st.integers(1, 4), st.integers(1, 4))
def test_ura_response_is_kronecker(theta, phi, n_h, n_v):
    g = ArrayGeometry.ura(n_h, n_v)
    a = array_response(theta, phi, g)
    np.testing.assert_allclose(np.abs(a), 1, atol=1e-12)
    A = a.reshape(n_v, n_h).T
    np.testing.assert_allclose(vec(A), a)
    assert np.linalg.matrix_rank(A, tol=1e-9) == 1


@settings(max_examples=60, deadline=None)
@given(st.lists(st.lists(st.tuples(finite, finite), min_size=2, max_size=2), min_size=1, max_size=3))
def test_matrix_text_round_trip(rows):
    M = np.array([[complex(re, im) for re, im in row] for row in rows])
    np.testing.assert_array_equal(parse_matrix(format_matrix(M)), M)


config_values = st.fixed_dictionaries({}, optional={
    "array.n_h": st.integers(1, 8),
    "array.d_v": st.floats(0.1, 2.0),
    "scenario.sigma_deg": st.floats(0, 45),
    "experiment.snr_db": st.lists(st.floats(-20, 40), min_size=1, max_size=5).map(tuple),
    "experiment.strategies": st.lists(st.sampled_from(
        ["PerfectCDI", "GlobalRotated", "JointFull", "JointLowDim(2,2)", "Independent"]),
        min_size=1, max_size=4).map(tuple),
    "experiment.seed": st.integers(0, 2 ** 31),
})


@settings(max_examples=100, deadline=None)
@given(config_values)
def test_config_round_trip(values):
    assert cfgmod.parse(cfgmod.serialize(values)) == values


def test_codebook_len_and_dim():
    cb = Codebook(np.zeros((3, 5), complex), 2)
    assert len(cb) == 3 and cb.dim == 5
