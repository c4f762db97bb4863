"""Array geometries and their steering vectors.

Two base-station layouts are supported: the uniform rectangular array (URA),
whose response factors into a horizontal and a vertical sub-response, and the
uniform concentric circular array (UCCA), which does not factor.

Spacings and radii are given in wavelengths. Vectorisation is column-major
everywhere, so a URA response equals ``kron(a_v, a_h)`` and
``vec(a_h a_v^T)``.
"""

from dataclasses import dataclass, field

import numpy as np

URA = "URA"
UCCA = "UCCA"


@dataclass(frozen=True)
class ArrayGeometry:
    """Base-station array description.

    Use :meth:`ura` or :meth:`ucca` rather than the raw constructor.
    """

    kind: str
    n_h: int = 1
    n_v: int = 1
    d_h: float = 0.5
    d_v: float = 0.5
    n_rings: int = 0
    n_per_ring: int = 0
    radii: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.kind == URA:
            if self.n_h < 1 or self.n_v < 1:
                raise ValueError(f"URA needs n_h, n_v >= 1, got {self.n_h}x{self.n_v}")
        elif self.kind == UCCA:
            if self.n_rings < 1 or self.n_per_ring < 1:
                raise ValueError("UCCA needs at least one ring and one element per ring")
            r = np.asarray(self.radii, dtype=float)
            if r.size != self.n_rings:
                raise ValueError(f"expected {self.n_rings} radii, got {r.size}")
            if np.any(r <= 0) or np.any(np.diff(r) <= 0):
                raise ValueError("UCCA radii must be positive and strictly increasing")
        else:
            raise ValueError(f"unknown array kind {self.kind!r}")

    @classmethod
    def ura(cls, n_h, n_v, d_h=0.5, d_v=0.5):
        return cls(URA, n_h=int(n_h), n_v=int(n_v), d_h=float(d_h), d_v=float(d_v))

    @classmethod
    def ucca(cls, n_rings, n_per_ring, radii=None, spacing=0.5):
        """UCCA with ``radii`` in wavelengths (default ``spacing * (1..J)``)."""
        if radii is None:
            radii = spacing * np.arange(1, n_rings + 1)
        return cls(UCCA, n_rings=int(n_rings), n_per_ring=int(n_per_ring),
                   radii=tuple(float(x) for x in radii))

    @property
    def n_t(self):
        if self.kind == URA:
            return self.n_h * self.n_v
        return self.n_rings * self.n_per_ring


def _require_ura(geom):
    if geom.kind != URA:
        raise ValueError(f"operation needs a URA geometry, got {geom.kind}")


def ura_subarray_responses(theta, phi, geom):
    """Horizontal and vertical sub-array responses of a URA.

    Parameters
    ----------
    theta, phi : float or ndarray
        Ray angles in radians; any matching shape.
    geom : ArrayGeometry
        Must be a URA.

    Returns
    -------
    a_h : ndarray, shape ``theta.shape + (n_h,)``
    a_v : ndarray, shape ``phi.shape + (n_v,)``
    """
    _require_ura(geom)
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    a_h = np.exp(2j * np.pi * geom.d_h * np.cos(theta)[..., None] * np.arange(geom.n_h))
    a_v = np.exp(2j * np.pi * geom.d_v * np.cos(phi)[..., None] * np.arange(geom.n_v))
    return a_h, a_v


def array_response(theta, phi, geom):
    """Full steering vector of length ``geom.n_t`` (batched over leading dims)."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    if geom.kind == URA:
        a_h, a_v = ura_subarray_responses(theta, phi, geom)
        # kron(a_v, a_h): vertical index is the slow one
        out = a_v[..., :, None] * a_h[..., None, :]
        return out.reshape(out.shape[:-2] + (geom.n_t,))
    L = geom.n_per_ring
    radii = np.asarray(geom.radii)
    psi = 2 * np.pi * np.arange(1, L + 1) / L
    proj = np.cos(phi[..., None] - psi) * np.cos(theta)[..., None]
    out = np.exp(2j * np.pi * proj[..., None] * radii)
    return out.reshape(out.shape[:-2] + (geom.n_t,))


def ray_response_matrix(theta, phi, geom):
    """Matrix form ``a_h a_v^T`` (shape ``(..., n_h, n_v)``) of a URA ray response."""
    a_h, a_v = ura_subarray_responses(theta, phi, geom)
    return a_h[..., :, None] * a_v[..., None, :]


def vec(M):
    """Column-major vectorisation over the last two axes."""
    M = np.asarray(M)
    return np.swapaxes(M, -1, -2).reshape(M.shape[:-2] + (-1,))


def unvec(v, n_rows, n_cols):
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    return np.swapaxes(v.reshape(v.shape[:-1] + (n_cols, n_rows)), -1, -2)
