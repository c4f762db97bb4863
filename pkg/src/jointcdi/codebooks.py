"""Codebooks and codeword constructions for channel-direction quantization.

Base codebooks are random vector quantization (RVQ) and oversampled DFT
windows. Structured codewords are built from them:

* globally rotated: ``R^{1/2} g`` over the full ``n_t``-dim direction;
* joint: ``(U_v (x) U_h) diag(vec Lambda) g``, a rotation needing only the
  two sub-array bases and the power coupling;
* independent: ``c_h c_v^T``, one rotated codeword per direction, always rank 1.

The quantizer picks the codeword maximising the chordal alignment
``|c^H h|^2``, lowest index on ties.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import DegenerateInputError
from .geometry import unvec, vec
from .stats import psd_sqrt

RVQ = "RVQ"
DFT = "DFT"
ROTATED = "Rotated"
JOINT = "Joint"
INDEPENDENT = "Independent"

_TINY = 1e-300


@dataclass
class Codebook:
    codewords: np.ndarray
    bits: int
    kind: str = RVQ

    def __len__(self):
        return self.codewords.shape[0]

    @property
    def dim(self):
        return self.codewords.shape[1]


@dataclass
class QuantizerResult:
    index: int
    alignment: float

    @property
    def distortion(self):
        return 1.0 - self.alignment


@dataclass
class JointStatistics:
    """Truncated statistics ``U_h (n_h x r_h)``, ``U_v (n_v x r_v)``, ``Lambda (r_h x r_v)``."""

    U_h: np.ndarray
    U_v: np.ndarray
    Lambda: np.ndarray

    def __post_init__(self):
        self.U_h = np.asarray(self.U_h, dtype=complex)
        self.U_v = np.asarray(self.U_v, dtype=complex)
        self.Lambda = np.asarray(self.Lambda, dtype=float)
        if self.Lambda.shape != (self.U_h.shape[1], self.U_v.shape[1]):
            raise ValueError(f"Lambda {self.Lambda.shape} does not match "
                             f"U_h {self.U_h.shape} and U_v {self.U_v.shape}")
        if np.any(self.Lambda < 0):
            raise ValueError("power coupling must be non-negative")

    @property
    def rotation(self):
        """``(U_v (x) U_h) diag(vec Lambda)``, shape ``(n_h*n_v, r_h*r_v)``."""
        return np.kron(self.U_v, self.U_h) * vec(self.Lambda)[None, :]


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def normalize_rows(X):
    nrm = np.linalg.norm(X, axis=-1, keepdims=True)
    if np.any(nrm <= _TINY):
        raise DegenerateInputError("codeword collapses to zero")
    return X / nrm


def rvq_codebook(dim, bits, seed=None):
    """``2**bits`` isotropic unit vectors in ``C^dim``."""
    if dim < 1 or bits < 0:
        raise ValueError("need dim >= 1 and bits >= 0")
    rng = _rng(seed)
    n = 2 ** int(bits)
    X = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    return Codebook(normalize_rows(X), int(bits), RVQ)


def nonneg_rvq_codebook(dim, bits, seed=None):
    """``2**bits`` random unit vectors drawn uniformly on the non-negative orthant."""
    rng = _rng(seed)
    X = np.abs(rng.standard_normal((2 ** int(bits), dim)))
    return Codebook(normalize_rows(X), int(bits), RVQ)


def dft_codebook(n, window, bits=None):
    """Windows of ``window`` cyclically adjacent columns of the unitary DFT.

    Codeword ``q`` has columns at normalised frequencies ``q/Q + k/n``,
    ``k < window``, with ``Q = 2**bits`` (``Q = n`` when ``bits`` is None). For
    ``Q = n`` these are exactly the ``n`` shifted windows of the DFT matrix; a
    larger ``Q`` fills the budget with finer rotations of the same windows.
    Codewords have shape ``(n, window)``.
    """
    if not 1 <= window <= n:
        raise ValueError(f"window {window} outside 1..{n}")
    if bits is None:
        Q = 1 if window == n else n
    else:
        Q = 2 ** int(bits)
    f = np.arange(Q)[:, None] / Q + np.arange(window)[None, :] / n
    m = np.arange(n)
    cw = np.exp(2j * np.pi * m[None, :, None] * f[:, None, :]) / np.sqrt(n)
    return Codebook(cw, int(np.log2(Q)) if Q > 0 else 0, DFT)


def subspace_alignment(W, U):
    """``||W^H U||_F^2`` (batched over leading axes of ``W``)."""
    return np.sum(np.abs(np.conj(np.swapaxes(W, -1, -2)) @ U) ** 2, axis=(-2, -1))


def quantize_statistics_dft(U, dft_bits):
    """DFT window best aligned with the column span of ``U``.

    Returns
    -------
    W : (n, r) column-orthonormal ndarray
    alignment : float
    """
    U = np.asarray(U)
    n, r = U.shape
    if r > n:
        raise ValueError("more columns than rows")
    cb = dft_codebook(n, r, dft_bits)
    align = subspace_alignment(cb.codewords, U)
    # near-ties (e.g. r == n) resolve to the lowest index
    q = int(np.nonzero(align >= align.max() - 1e-12 * max(r, 1))[0][0])
    return cb.codewords[q], float(align[q])


def rotate_codebook(rotation, base):
    """Apply ``rotation`` to every base codeword and renormalise.

    ``rotation`` is ``(n_t, d)``, ``base`` is a :class:`Codebook` of dim ``d``.
    """
    cw = base.codewords @ rotation.T
    return Codebook(normalize_rows(cw), base.bits, ROTATED)


def global_rotated_codeword(R, g0):
    """``R^{1/2} g0`` normalised to unit norm."""
    c = psd_sqrt(np.asarray(R, dtype=complex)) @ np.asarray(g0, dtype=complex)
    nrm = np.linalg.norm(c)
    if nrm <= 1e-12 * max(1.0, np.linalg.norm(g0)):
        raise DegenerateInputError("base codeword lies in the null space of R")
    return c / nrm


def joint_codeword_matrix(stats, G):
    """Matrix-form joint codeword ``U_h (Lambda * G) U_v^T``, unit Frobenius norm."""
    G = np.asarray(G, dtype=complex)
    if G.shape != stats.Lambda.shape:
        raise ValueError(f"G must be {stats.Lambda.shape}, got {G.shape}")
    core = stats.Lambda * G
    if not np.linalg.norm(core) > _TINY:
        raise DegenerateInputError("Lambda * G is zero")
    C = stats.U_h @ core @ stats.U_v.T
    return C / np.linalg.norm(C)


def joint_codeword(stats, G):
    """Vector-form joint codeword ``(U_v (x) U_h) diag(vec Lambda) vec(G)``, unit norm."""
    g = vec(np.asarray(G, dtype=complex))
    c = stats.rotation @ g
    nrm = np.linalg.norm(c)
    if not nrm > _TINY:
        raise DegenerateInputError("Lambda * G is zero")
    return c / nrm


def joint_codeword_multi(stats, G_list):
    """Joint codewords for several receive antennas sharing one set of statistics.

    Returns an ``(n_h*n_v, N_r)`` matrix with unit-norm columns.
    """
    if len(G_list) < 1:
        raise ValueError("need at least one receive antenna")
    g = np.stack([vec(np.asarray(G, dtype=complex)) for G in G_list], axis=1)
    C = stats.rotation @ g
    nrm = np.linalg.norm(C, axis=0)
    if np.any(nrm <= _TINY):
        raise DegenerateInputError("Lambda * G is zero")
    return C / nrm


def independent_codeword(R_h, R_v, c_h, c_v):
    """Rank-one ``c_Ih c_Iv^T`` from separately rotated horizontal/vertical codewords."""
    c_ih = global_rotated_codeword(R_h, c_h)
    c_iv = global_rotated_codeword(R_v, c_v)
    return np.outer(c_ih, c_iv)


def independent_codebook(Rh_sqrt, Rv_sqrt, base_h, base_v):
    """Every pairing ``vec(c_Ih c_Iv^T)`` of two rotated codebooks.

    Codeword ``iv * len(base_h) + ih`` pairs horizontal ``ih`` with vertical ``iv``.
    """
    ch = normalize_rows(base_h.codewords @ Rh_sqrt.T)
    cv = normalize_rows(base_v.codewords @ Rv_sqrt.T)
    cw = (cv[:, None, :, None] * ch[None, :, None, :]).reshape(len(cv) * len(ch), -1)
    return Codebook(cw, base_h.bits + base_v.bits, INDEPENDENT)


def quantize(h_bar, codebook):
    """Best codeword for a unit-norm channel direction."""
    if len(codebook) == 0:
        raise ValueError("empty codebook")
    h_bar = np.asarray(h_bar).reshape(-1)
    if h_bar.size != codebook.dim:
        raise ValueError(f"direction of size {h_bar.size} vs codebook dim {codebook.dim}")
    idx, align = _kernels.best_codewords(codebook.codewords, h_bar[None, :])
    return QuantizerResult(int(idx[0]), float(min(align[0], 1.0)))


def as_matrix(codeword, n_h, n_v):
    """Column-major matrix view of a vector codeword."""
    return unvec(codeword, n_h, n_v)
