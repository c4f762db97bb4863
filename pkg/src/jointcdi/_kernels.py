"""Hot inner loops: ray-sum channel synthesis and codebook search.

Every kernel exists twice, as a numba ``@njit`` loop and as a vectorised
numpy expression. The public names at the bottom of this module dispatch to
one or the other. Set ``JOINTCDI_DISABLE_NUMBA=1`` to force the numpy path;
it is also used automatically when numba cannot be imported.
"""

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

_DISABLED = os.environ.get("JOINTCDI_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA = HAVE_NUMBA and not _DISABLED

TWO_PI = 2.0 * np.pi

# rays * elements per numpy chunk, keeps temporaries around 64 MB
_CHUNK_ELEMS = 4_000_000


# ---------------------------------------------------------------------------
# numpy implementations
# ---------------------------------------------------------------------------

def ura_channels_numpy(gains, theta, phi, n_h, n_v, d_h, d_v):
    """Sum of rank-one ray responses ``g * a_h a_v^T`` for a batch of draws.

    Parameters
    ----------
    gains : (S, R) complex ndarray
    theta, phi : (S, R) float ndarray
        Horizontal / vertical ray angles in radians.

    Returns
    -------
    H : (S, n_h, n_v) complex ndarray
    """
    S, R = gains.shape
    out = np.empty((S, n_h, n_v), dtype=np.complex128)
    kh = np.arange(n_h)
    kv = np.arange(n_v)
    step = max(1, _CHUNK_ELEMS // max(1, R * max(n_h, n_v)))
    for s0 in range(0, S, step):
        sl = slice(s0, min(S, s0 + step))
        a_h = np.exp(1j * TWO_PI * d_h * np.cos(theta[sl])[..., None] * kh)
        a_v = np.exp(1j * TWO_PI * d_v * np.cos(phi[sl])[..., None] * kv)
        weighted = gains[sl][..., None] * a_h
        out[sl] = np.matmul(weighted.transpose(0, 2, 1), a_v)
    return out


def ucca_channels_numpy(gains, theta, phi, radii, n_per_ring):
    """Ray-sum channel vectors for a concentric circular array.

    Element ``l * J + j`` holds ring ``j`` on radial direction ``l``.

    Returns
    -------
    h : (S, n_per_ring * len(radii)) complex ndarray
    """
    S, R = gains.shape
    radii = np.asarray(radii, dtype=np.float64)
    J = radii.size
    L = n_per_ring
    psi = TWO_PI * np.arange(1, L + 1) / L
    out = np.empty((S, L * J), dtype=np.complex128)
    step = max(1, _CHUNK_ELEMS // max(1, R * L * J))
    for s0 in range(0, S, step):
        sl = slice(s0, min(S, s0 + step))
        # (s, r, l)
        proj = np.cos(phi[sl][..., None] - psi) * np.cos(theta[sl])[..., None]
        # (s, r, l, j)
        a = np.exp(1j * TWO_PI * proj[..., None] * radii)
        out[sl] = np.einsum("sr,srn->sn", gains[sl], a.reshape(a.shape[0], R, L * J))
    return out


def best_codewords_numpy(codewords, hbar):
    """Index and alignment ``|c^H h|^2`` of the best codeword for each row of ``hbar``.

    Ties resolve to the lowest index.
    """
    align = np.abs(hbar @ codewords.conj().T) ** 2
    idx = np.argmax(align, axis=1)
    return idx, align[np.arange(hbar.shape[0]), idx]


# ---------------------------------------------------------------------------
# numba implementations
# ---------------------------------------------------------------------------

if HAVE_NUMBA:

    @numba.njit(cache=True, nogil=True)
    def ura_channels_numba(gains, theta, phi, n_h, n_v, d_h, d_v):
        S, R = gains.shape
        out = np.zeros((S, n_h, n_v), dtype=np.complex128)
        a_h = np.empty(n_h, dtype=np.complex128)
        a_v = np.empty(n_v, dtype=np.complex128)
        for s in range(S):
            for r in range(R):
                # progressive phase by repeated multiplication, one exp per axis
                zh = np.exp(1j * TWO_PI * d_h * np.cos(theta[s, r]))
                zv = np.exp(1j * TWO_PI * d_v * np.cos(phi[s, r]))
                a_h[0] = gains[s, r]
                for i in range(1, n_h):
                    a_h[i] = a_h[i - 1] * zh
                a_v[0] = 1.0
                for j in range(1, n_v):
                    a_v[j] = a_v[j - 1] * zv
                for j in range(n_v):
                    for i in range(n_h):
                        out[s, i, j] += a_h[i] * a_v[j]
        return out

    @numba.njit(cache=True, nogil=True)
    def ucca_channels_numba(gains, theta, phi, radii, n_per_ring):
        S, R = gains.shape
        J = radii.shape[0]
        L = n_per_ring
        out = np.zeros((S, L * J), dtype=np.complex128)
        for s in range(S):
            for r in range(R):
                ct = np.cos(theta[s, r])
                g = gains[s, r]
                for l in range(L):
                    psi = TWO_PI * (l + 1) / L
                    proj = np.cos(phi[s, r] - psi) * ct
                    for j in range(J):
                        out[s, l * J + j] += g * np.exp(1j * TWO_PI * radii[j] * proj)
        return out

    @numba.njit(cache=True, nogil=True)
    def best_codewords_numba(codewords, hbar):
        C, D = codewords.shape
        K = hbar.shape[0]
        idx = np.zeros(K, dtype=np.int64)
        best = np.full(K, -1.0)
        for k in range(K):
            for c in range(C):
                acc = 0j
                for d in range(D):
                    acc += hbar[k, d] * np.conj(codewords[c, d])
                val = acc.real * acc.real + acc.imag * acc.imag
                if val > best[k]:
                    best[k] = val
                    idx[k] = c
        return idx, best

else:  # pragma: no cover
    ura_channels_numba = ura_channels_numpy
    ucca_channels_numba = ucca_channels_numpy
    best_codewords_numba = best_codewords_numpy


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

def _c128(x):
    return np.ascontiguousarray(x, dtype=np.complex128)


def _f64(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def ura_channels(gains, theta, phi, n_h, n_v, d_h, d_v):
    fn = ura_channels_numba if USE_NUMBA else ura_channels_numpy
    return fn(_c128(gains), _f64(theta), _f64(phi), int(n_h), int(n_v), float(d_h), float(d_v))


def ucca_channels(gains, theta, phi, radii, n_per_ring):
    fn = ucca_channels_numba if USE_NUMBA else ucca_channels_numpy
    return fn(_c128(gains), _f64(theta), _f64(phi), _f64(radii), int(n_per_ring))


# above this many queries one BLAS matmul beats the numba loop
_BATCH_TO_NUMPY = 8


def best_codewords(codewords, hbar):
    hbar = np.atleast_2d(hbar)
    use_nb = USE_NUMBA and hbar.shape[0] < _BATCH_TO_NUMPY
    fn = best_codewords_numba if use_nb else best_codewords_numpy
    return fn(_c128(codewords), _c128(hbar))
