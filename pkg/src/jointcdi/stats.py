"""Second-order channel statistics and their structured decompositions.

Covers the full correlation ``R = E{h h^H}``, the horizontal/vertical
correlations ``R_h = E{H H^H}`` and ``R_v = E{H^T H^*}``, the power-coupling
matrix ``Lambda`` that links the two eigenbases, the nearest Kronecker
product ``R ~ B (x) C`` used for arrays without a natural matrix form, and the
energy-based rank truncation.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericalInputError
from .geometry import unvec, vec

PSD_TOL = 1e-10


def hermitian_eig(A):
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Each eigenvector is rotated so that its largest-magnitude entry is real
    and positive, which makes the basis reproducible.
    """
    A = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(A)
    w = w[::-1].copy()
    V = V[:, ::-1].copy()
    k = np.argmax(np.abs(V), axis=0)
    pivot = V[k, np.arange(V.shape[1])]
    V *= (pivot.conj() / np.abs(pivot))[None, :]
    return w, V


def psd_sqrt(A):
    """Hermitian PSD square root.

    Eigenvalues below ``n * eps * max`` are treated as zero so that round-off
    in a null space is not amplified by the square root.
    """
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    floor = w.shape[-1] * np.finfo(float).eps * np.max(np.abs(w))
    w = np.where(w > floor, w, 0.0)
    return (V * np.sqrt(w)) @ V.conj().T


def psd_project(A):
    """Symmetrise and clip negative eigenvalues."""
    w, V = np.linalg.eigh(0.5 * (A + A.conj().T))
    return (V * np.clip(w, 0.0, None)) @ V.conj().T


def sample_covariance(samples):
    """``(1/S) sum h_s h_s^H`` over the rows of ``samples``."""
    X = np.asarray(samples, dtype=complex)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[0] == 0:
        raise ValueError("need at least one sample")
    R = X.T @ X.conj() / X.shape[0]
    return 0.5 * (R + R.conj().T)


@dataclass
class SubCorrelations:
    R_h: np.ndarray
    R_v: np.ndarray
    lambda_h: np.ndarray
    U_h: np.ndarray
    lambda_v: np.ndarray
    U_v: np.ndarray


def sub_correlations(H_samples):
    """Horizontal and vertical correlation matrices with their eigenbases.

    Parameters
    ----------
    H_samples : (S, n_h, n_v) complex ndarray
    """
    H = np.asarray(H_samples, dtype=complex)
    if H.ndim == 2:
        H = H[None]
    if H.shape[0] == 0:
        raise ValueError("need at least one sample")
    S = H.shape[0]
    R_h = np.einsum("sij,skj->ik", H, H.conj()) / S
    R_v = np.einsum("sij,sik->jk", H, H.conj()) / S
    R_h = 0.5 * (R_h + R_h.conj().T)
    R_v = 0.5 * (R_v + R_v.conj().T)
    lam_h, U_h = hermitian_eig(R_h)
    lam_v, U_v = hermitian_eig(R_v)
    return SubCorrelations(R_h, R_v, lam_h, U_h, lam_v, U_v)


def coupled_powers(R, U_h, U_v):
    """``diag((U_v (x) U_h)^H R (U_v (x) U_h))`` as a real vector (not clipped)."""
    W = np.kron(U_v, U_h)
    return np.real(np.einsum("ij,ik,kj->j", W.conj(), R, W))


def power_coupling(R, U_h, U_v):
    """Power-coupling amplitudes from the full correlation matrix.

    ``U_h``/``U_v`` may be square unitary or tall column-orthonormal; the result
    is ``(U_h.shape[1], U_v.shape[1])``, each entry the square root of the mean
    power shared by one horizontal and one vertical direction.

    Raises
    ------
    NumericalInputError
        If ``R`` is indefinite beyond round-off along one of the directions.
    """
    lam_t = coupled_powers(R, U_h, U_v)
    tol = PSD_TOL * max(np.real(np.trace(R)), 1.0)
    if np.any(lam_t < -tol):
        raise NumericalInputError(f"R is not PSD: coupled power {lam_t.min():.3e}")
    return unvec(np.sqrt(np.clip(lam_t, 0.0, None)), U_h.shape[1], U_v.shape[1])


def transform_to_core(H, U_h, U_v):
    """``U_h^H H U_v^*``; batched over leading axes of ``H``."""
    return U_h.conj().T @ H @ U_v.conj()


def power_coupling_from_samples(H_samples, U_h, U_v):
    """Power coupling estimated directly as ``sqrt(mean |u_i^H H v_j^*|^2)``."""
    Ht = transform_to_core(np.asarray(H_samples), U_h, U_v)
    return np.sqrt(np.mean(np.abs(Ht) ** 2, axis=0))


@dataclass
class Reconstruction:
    R_hat: np.ndarray
    objective: float = None
    off_energy: float = None


def reconstruct_R(U_h, U_v, Lambda, R=None):
    """Rebuild ``(U_v (x) U_h) diag(vec(Lambda^2)) (U_v (x) U_h)^H``.

    With ``R`` given, also report ``||R - R_hat||_F`` and the Frobenius norm of
    the off-diagonal part of ``R`` in the rotated basis. The latter is the
    smallest objective any diagonal core can reach for these bases.
    """
    W = np.kron(U_v, U_h)
    lam_t = vec(np.asarray(Lambda, dtype=float) ** 2)
    R_hat = (W * lam_t) @ W.conj().T
    R_hat = 0.5 * (R_hat + R_hat.conj().T)
    if R is None:
        return Reconstruction(R_hat)
    rot = W.conj().T @ R @ W
    off = rot - np.diag(np.diag(rot))
    return Reconstruction(R_hat, float(np.linalg.norm(R - R_hat)), float(np.linalg.norm(off)))


def rearrange(R, n_h, n_v):
    """Block rearrangement: row ``i + j*n_v`` is ``vec(R_ij)^T`` for ``n_h x n_h`` blocks."""
    R = np.asarray(R)
    if R.shape != (n_h * n_v, n_h * n_v):
        raise ValueError(f"R of shape {R.shape} does not split into {n_v}x{n_v} blocks of {n_h}x{n_h}")
    return R.reshape(n_v, n_h, n_v, n_h).transpose(2, 0, 3, 1).reshape(n_v * n_v, n_h * n_h)


@dataclass
class KroneckerFactors:
    B: np.ndarray
    C: np.ndarray
    residual: float
    n_h: int
    n_v: int


def nearest_kronecker(R, n_h, n_v):
    """Closest ``B (x) C`` to ``R`` in Frobenius norm.

    ``B`` is ``n_v x n_v`` (vertical), ``C`` is ``n_h x n_h`` (horizontal). The
    common scale is split evenly (``||B||_F = ||C||_F``) and the phase fixed
    so that ``trace(C) > 0``.
    """
    if n_h < 1 or n_v < 1:
        raise ValueError("factor sizes must be positive")
    Rt = rearrange(R, n_h, n_v)
    U, s, Vh = np.linalg.svd(Rt, full_matrices=False)
    b = np.sqrt(s[0]) * U[:, 0]
    c = np.sqrt(s[0]) * Vh[0]
    B = unvec(b, n_v, n_v)
    C = unvec(c, n_h, n_h)
    tr = np.trace(C)
    if abs(tr) > 0:
        ph = tr / abs(tr)
        C = C * ph.conj()
        B = B * ph
    if np.allclose(R, np.asarray(R).conj().T, atol=PSD_TOL * max(1.0, np.abs(R).max())):
        B = psd_project(B)
        C = psd_project(C)
    residual = float(np.linalg.norm(R - np.kron(B, C)))
    return KroneckerFactors(B, C, residual, n_h, n_v)


def factor_pairs(n):
    return [(a, n // a) for a in range(1, n + 1) if n % a == 0]


def best_factorization(R, include_trivial=False):
    """Search all ``n_h * n_v = n_t`` splits and keep the smallest residual.

    The trivial splits ``1 x n_t`` and ``n_t x 1`` always fit exactly and
    reduce nothing, so they are skipped unless ``include_trivial`` is set or
    no other split exists.
    """
    n_t = np.asarray(R).shape[0]
    pairs = factor_pairs(n_t)
    if not include_trivial and len(pairs) > 2:
        pairs = [p for p in pairs if 1 not in p]
    fits = [nearest_kronecker(R, n_h, n_v) for n_h, n_v in pairs]
    return min(fits, key=lambda f: f.residual)


def truncation_rank(lam, threshold):
    """Smallest ``r`` whose leading eigenvalues hold more than ``threshold`` of the total."""
    if not 0 < threshold <= 1:
        raise ValueError("energy threshold must lie in (0, 1]")
    lam = np.clip(np.asarray(lam, dtype=float), 0.0, None)
    total = lam.sum()
    if total <= 0:
        return 1
    hit = np.nonzero(np.cumsum(lam) / total > threshold)[0]
    return int(hit[0]) + 1 if hit.size else lam.size


@dataclass
class CorrelationSet:
    """All statistics a user's codebooks are built from."""

    R: np.ndarray
    R_h: np.ndarray
    R_v: np.ndarray
    U_h: np.ndarray
    U_v: np.ndarray
    lambda_h: np.ndarray
    lambda_v: np.ndarray
    Lambda: np.ndarray
    r_h: int
    r_v: int
    residual: float = 0.0

    @property
    def n_h(self):
        return self.U_h.shape[0]

    @property
    def n_v(self):
        return self.U_v.shape[0]


def truncate(corr, energy_threshold):
    """Leading ``r_h``/``r_v`` directions and the matching block of ``Lambda``.

    Returns
    -------
    r_h, r_v, U_h_hat, U_v_hat, Lambda_hat
    """
    r_h = truncation_rank(corr.lambda_h, energy_threshold)
    r_v = truncation_rank(corr.lambda_v, energy_threshold)
    return r_h, r_v, corr.U_h[:, :r_h], corr.U_v[:, :r_v], corr.Lambda[:r_h, :r_v]


def correlation_set_from_samples(H_samples, energy_threshold=0.9):
    """Statistics of a matrix-form (URA) channel from ``(S, n_h, n_v)`` samples.

    ``Lambda`` is estimated per entry from the transformed samples, which never
    needs the full ``n_t x n_t`` matrix; ``R`` is still formed for the globally
    rotated reference codebook.
    """
    H = np.asarray(H_samples, dtype=complex)
    sub = sub_correlations(H)
    Lam = power_coupling_from_samples(H, sub.U_h, sub.U_v)
    R = sample_covariance(vec(H))
    r_h = truncation_rank(sub.lambda_h, energy_threshold)
    r_v = truncation_rank(sub.lambda_v, energy_threshold)
    return CorrelationSet(R, sub.R_h, sub.R_v, sub.U_h, sub.U_v, sub.lambda_h, sub.lambda_v,
                          Lam, r_h, r_v)


def correlation_set_from_covariance(R, n_h=None, n_v=None, energy_threshold=0.9):
    """Statistics of an arbitrary array via the nearest Kronecker product of ``R``.

    Without ``n_h``/``n_v`` the split is chosen by :func:`best_factorization`.
    ``R_v = B`` and ``R_h = C``; ``Lambda`` follows from ``R`` in their eigenbases.
    """
    R = np.asarray(R, dtype=complex)
    if np.real(np.trace(R)) <= 0:
        raise DegenerateInputError("correlation matrix has zero trace")
    if n_h is None or n_v is None:
        kf = best_factorization(R)
    else:
        if n_h * n_v != R.shape[0]:
            raise ValueError(f"{n_h}x{n_v} does not match n_t={R.shape[0]}")
        kf = nearest_kronecker(R, n_h, n_v)
    lam_v, U_v = hermitian_eig(kf.B)
    lam_h, U_h = hermitian_eig(kf.C)
    Lam = power_coupling(R, U_h, U_v)
    r_h = truncation_rank(lam_h, energy_threshold)
    r_v = truncation_rank(lam_v, energy_threshold)
    return CorrelationSet(R, kf.C, kf.B, U_h, U_v, lam_h, lam_v, Lam, r_h, r_v, kf.residual)


def max_offdiag_correlation(X):
    """Largest ``|rho_ij|``, ``i != j``, among the columns of zero-mean samples ``X``."""
    X = np.asarray(X)
    C = X.T @ X.conj() / X.shape[0]
    p = np.real(np.diag(C))
    rho = np.abs(C) / np.sqrt(np.outer(p, p))
    np.fill_diagonal(rho, 0.0)
    return float(rho.max())
