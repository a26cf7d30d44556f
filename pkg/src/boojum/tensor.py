"""Algebra of the axially symmetric Q-tensor ansatz.

A reduced 3-vector ``u`` lifts to the 5-vector ``w = L[u]`` and to the
traceless matrix ``Q[u] = (1/sqrt 2) sum_k w_k M_k`` (the physical prefactor
``a`` is dropped throughout). All functions broadcast over leading axes; the
last axis holds the vector components.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)
SQRT6 = np.sqrt(6.0)

# ordered so that Q = (1/sqrt2) * (w1*M5 + w2*M2 + w3*M4 + w4*M1 + w5*M3)
M1 = np.array([[0, 0, 1], [0, 0, 0], [1, 0, 0]]) / SQRT2
M2 = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]]) / SQRT2
M3 = np.array([[0, 0, 0], [0, 0, 1], [0, 1, 0]]) / SQRT2
M4 = np.array([[-1, 0, 0], [0, -1, 0], [0, 0, 2]]) / SQRT6
M5 = np.array([[1, 0, 0], [0, -1, 0], [0, 0, 0]]) / SQRT2
W_BASIS = np.stack([M5, M2, M4, M1, M3])

# axis-penalty weights on (u1, u2, u3)
AXIS_WEIGHTS = np.array([4.0, 0.0, 1.0])


class Phase(str, Enum):
    UNIAXIAL = "uniaxial"
    BIAXIAL = "biaxial"
    DEGENERATE_UNIAXIAL = "degenerate_uniaxial"
    ISOTROPIC = "isotropic"


def _split(u):
    u = np.asarray(u, dtype=float)
    return u[..., 0], u[..., 1], u[..., 2]


def augment(u, phi):
    """Lift ``u`` to ``L[u] = (u1 cos2phi, u1 sin2phi, u2, u3 cosphi, u3 sinphi)``."""
    u1, u2, u3 = _split(u)
    phi = np.asarray(phi, dtype=float)
    return np.stack(
        np.broadcast_arrays(
            u1 * np.cos(2 * phi), u1 * np.sin(2 * phi), u2, u3 * np.cos(phi), u3 * np.sin(phi)
        ),
        axis=-1,
    )


def eval_S(w):
    w = np.asarray(w, dtype=float)
    w1, w2, w3, w4, w5 = (w[..., k] for k in range(5))
    return (
        -w3 * (w1 ** 2 + w2 ** 2)
        + SQRT3 * w2 * w4 * w5
        + 0.5 * w3 * (w4 ** 2 + w5 ** 2)
        + w3 ** 3 / 3.0
        + 0.5 * SQRT3 * w1 * (w4 ** 2 - w5 ** 2)
    )


def eval_P(v):
    """Bulk polynomial ``P = S o L``; it does not depend on the azimuth."""
    v1, v2, v3 = _split(v)
    return -v2 * v1 ** 2 + 0.5 * SQRT3 * v1 * v3 ** 2 + v2 ** 3 / 3.0 + 0.5 * v2 * v3 ** 2


def grad_P(v):
    v1, v2, v3 = _split(v)
    return np.stack(
        [
            -2 * v1 * v2 + 0.5 * SQRT3 * v3 ** 2,
            -v1 ** 2 + v2 ** 2 + 0.5 * v3 ** 2,
            SQRT3 * v1 * v3 + v2 * v3,
        ],
        axis=-1,
    )


@dataclass(frozen=True)
class EigenTriple:
    lam1: np.ndarray
    lam2: np.ndarray
    lam3: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([self.lam1, self.lam2, self.lam3], axis=-1)


def _disc(u):
    u1, u2, u3 = _split(u)
    return np.sqrt((u1 - SQRT3 * u2) ** 2 + 4 * u3 ** 2)


def eigenvalues(u) -> EigenTriple:
    """Closed-form spectrum of ``Q[u]``; ``lam1`` belongs to the azimuthal direction."""
    u1, u2, _ = _split(u)
    s = u1 + u2 / SQRT3
    root = _disc(u)
    return EigenTriple(-0.5 * s, 0.25 * (s - root), 0.25 * (s + root))


def biaxiality_b(u):
    u1, u2, _ = _split(u)
    return 0.5 * SQRT3 * u1 + 0.5 * u2


def gap31(u, clamp_tol: float = 1e-9):
    """``lam3 - lam1 = (sqrt3 b + sqrt(1 - b^2)) / 2`` for unit ``u``.

    ``|b| <= 1`` holds for unit vectors; excursions beyond ``clamp_tol`` mean
    the input was not normalised and raise ``ValueError``.
    """
    b = np.asarray(biaxiality_b(u))
    excess = np.abs(b) - 1.0
    if np.any(excess > clamp_tol):
        raise ValueError(f"|b| exceeds 1 by {float(np.max(excess)):.3e}; input is not a unit field")
    b = np.clip(b, -1.0, 1.0)
    return 0.5 * (SQRT3 * b + np.sqrt(1.0 - b ** 2))


def gap32(u):
    return 0.5 * _disc(u)


def reconstruct_Q(u, phi=0.0):
    w = augment(u, phi)
    return np.einsum("...k,kij->...ij", w, W_BASIS) / SQRT2


def _coincident_pairs(u, tol):
    lam = np.sort(eigenvalues(u).as_array(), axis=-1)
    return lam[..., 1] - lam[..., 0] <= tol, lam[..., 2] - lam[..., 1] <= tol


def degenerate_mask(u, tol: float = 1e-6) -> np.ndarray:
    """True where the two largest eigenvalues coincide and the smallest is separate."""
    low, high = _coincident_pairs(u, tol)
    return high & ~low


def classify_phase(u, tol: float = 1e-6):
    """Phase label(s) from the eigenvalue multiplicity pattern.

    Returns a :class:`Phase` for a single vector, an object array otherwise.
    """
    low, high = _coincident_pairs(u, tol)
    out = np.empty(low.shape, dtype=object)
    out[...] = Phase.BIAXIAL
    out[low & ~high] = Phase.UNIAXIAL
    out[high & ~low] = Phase.DEGENERATE_UNIAXIAL
    out[low & high] = Phase.ISOTROPIC
    return out[()] if out.ndim == 0 else out


@dataclass(frozen=True)
class DirectorSample:
    """Director in the cylindrical frame ``(e_rho, e_phi, e_z)``."""

    d_rho: np.ndarray
    d_phi: np.ndarray
    d_z: np.ndarray
    degenerate: np.ndarray

    def as_array(self) -> np.ndarray:
        return np.stack([self.d_rho, self.d_phi, self.d_z], axis=-1)


def n_field(u):
    """Un-normalised director ``n`` of the largest meridian eigenvalue.

    ``n`` vanishes where ``u3 = 0`` and ``u1 < sqrt3 u2``; callers fall back to
    an explicit eigen-decomposition there.
    """
    u1, u2, u3 = _split(u)
    root = _disc(u)
    with np.errstate(invalid="ignore", divide="ignore"):
        n_rho = 0.5 * SQRT2 * (1.0 + (u1 - SQRT3 * u2) / root)
        n_z = SQRT2 * u3 / root
    n_rho = np.where(root > 0, n_rho, 0.0)
    n_z = np.where(root > 0, n_z, 0.0)
    return np.stack([n_rho, np.zeros_like(n_rho), n_z], axis=-1)


def _canonical_sign(d):
    # d_rho >= 0, ties broken towards d_z >= 0 then d_phi >= 0
    key = np.where(
        np.abs(d[..., 0]) > 1e-14,
        d[..., 0],
        np.where(np.abs(d[..., 2]) > 1e-14, d[..., 2], d[..., 1]),
    )
    return np.where((key < 0)[..., None], -d, d)


def director_eig(u):
    """Director from a dense eigen-decomposition of ``Q[u]`` at ``phi = 0``.

    At ``phi = 0`` the Cartesian frame coincides with ``(e_rho, e_phi, e_z)``.
    """
    vals, vecs = np.linalg.eigh(reconstruct_Q(u, 0.0))
    d = vecs[..., :, -1]
    return _canonical_sign(d)


def director(u, tol: float = 1e-6) -> DirectorSample:
    u = np.asarray(u, dtype=float)
    n = n_field(u)
    norm = np.linalg.norm(n, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = n / norm[..., None]
    use_eig = ~(norm > tol)

    lam = eigenvalues(u)
    # for b < -1/2 the azimuthal eigenvalue lam1 is the largest one
    azimuthal = lam.lam1 > lam.lam3 + tol
    use_eig = use_eig | azimuthal
    if np.any(use_eig):
        d = np.where(use_eig[..., None], director_eig(u), d)
    d = _canonical_sign(d)

    top = np.sort(lam.as_array(), axis=-1)
    degenerate = (top[..., 2] - top[..., 1]) <= tol
    return DirectorSample(d[..., 0], d[..., 1], d[..., 2], degenerate)
