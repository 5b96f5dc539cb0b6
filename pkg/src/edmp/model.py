"""EDM recognition and the derived profile of one distance matrix.

A hollow symmetric nonnegative matrix D is an EDM exactly when the
centroid Gram matrix B = -JDJ/2 is positive semidefinite.  From B the
profile derives the embedding dimension, a deterministic configuration,
the Gale basis, the vector w with Dw = e, and the sphericity data
(radius, center, regularity).  Spherical EDMs of radius one are the
domain of the perturbation machinery in the rest of the package.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import NotAnEdm, NotUnitSpherical, NumericalFailure
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    fix_column_signs,
    nullspace_basis,
    pinv,
    sym_eig,
    symmetrize,
)

__all__ = [
    "DistanceMatrix",
    "EdmProfile",
    "GramChoice",
    "SPHERICITY_TOL",
    "UNIT_RADIUS_TOL",
    "is_edm",
    "is_edm_array",
    "profile",
    "gram",
    "bdag_identity",
    "bprime_dag_identity",
    "cm_dag_block",
]

# Dimensionless sphericity threshold on (e.w) * (e.D.e / n^2); the product
# is ~1 for spherical inputs and ~1e-16 for nonspherical ones.
SPHERICITY_TOL = 1e-8

# |2 e.w - 1| <= UNIT_RADIUS_TOL * n decides unit sphericity.
UNIT_RADIUS_TOL = 1e-8


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric hollow matrix of squared interpoint distances, n >= 3."""

    d: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.d, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {a.shape}")
        n = a.shape[0]
        if n < 3:
            raise ValueError("distance matrices of order < 3 are not supported")
        a = 0.5 * (a + a.T)
        scale = max(float(np.abs(a).max()), 1.0)
        if np.abs(np.diag(a)).max() > 1e-12 * scale:
            raise ValueError("diagonal entries must be zero")
        if a.min() < -1e-12 * scale:
            raise ValueError("squared distances must be nonnegative")
        np.fill_diagonal(a, 0.0)
        np.clip(a, 0.0, None, out=a)
        a.flags.writeable = False
        object.__setattr__(self, "d", a)

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def perturbed_array(self, k: int, l: int, t: float) -> np.ndarray:
        """Raw copy with t added to the (k,l) and (l,k) entries (0-based).

        No validation: the result may have a negative entry, in which case
        it is simply not an EDM.
        """
        a = np.array(self.d)
        a[k, l] += t
        a[l, k] += t
        return a

    def perturbed(self, k: int, l: int, t: float) -> "DistanceMatrix":
        """Validated copy with t added to the (k,l) and (l,k) entries (0-based)."""
        return DistanceMatrix(self.perturbed_array(k, l, t))


class GramChoice(enum.Enum):
    """Origin convention for the Gram matrix of the generating points."""

    CENTROID = "centroid"  # B = -JDJ/2, satisfies Be = 0
    WVECTOR = "wvector"    # B' = E - D/2, satisfies B'w = 0 (unit spherical only)


@dataclass(frozen=True)
class EdmProfile:
    """Cached derived data of one EDM.  Immutable after construction."""

    d: DistanceMatrix
    tol: TolerancePolicy
    r: int
    B: np.ndarray
    B_dag: np.ndarray
    D_dag: np.ndarray
    P: np.ndarray
    w: np.ndarray
    Z: np.ndarray | None
    Z_tilde: np.ndarray
    spherical: bool
    unit_spherical: bool
    radius: float | None
    center: np.ndarray | None
    regular: bool

    @property
    def n(self) -> int:
        return self.d.n

    def gale_row(self, i: int) -> np.ndarray:
        """Gale transform z^i (empty when r = n-1)."""
        if self.Z is None:
            return np.zeros(0)
        return self.Z[i]

    def tilde_row(self, i: int) -> np.ndarray:
        """Row i of [w Z] (of w alone when r = n-1)."""
        return self.Z_tilde[i]


def centroid_gram(a: np.ndarray) -> np.ndarray:
    """B = -JDJ/2 with J the centering projector."""
    n = a.shape[0]
    j = np.eye(n) - np.full((n, n), 1.0 / n)
    return symmetrize(-0.5 * j @ a @ j)


def is_edm_array(a: np.ndarray, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """EDM test for a raw hollow symmetric array.

    A negative entry fails immediately (it cannot be a squared distance);
    otherwise the matrix must be negative semidefinite on the complement
    of the ones vector.
    """
    if a.min() < -1e-12 * max(float(np.abs(a).max()), 1.0):
        return False
    values = sym_eig(centroid_gram(a)).values
    bound = tol.psd_abs_scale * max(1.0, np.abs(values).max())
    return bool(values.min() >= -bound)


def is_edm(d: DistanceMatrix, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """True iff d is negative semidefinite on the complement of ones."""
    return is_edm_array(d.d, tol)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


def profile(d: DistanceMatrix, tol: TolerancePolicy = DEFAULT_TOL) -> EdmProfile:
    """Full derived profile of an EDM; raises NotAnEdm otherwise."""
    if not is_edm(d, tol):
        raise NotAnEdm("input matrix is not a Euclidean distance matrix")
    a = d.d
    n = d.n
    e = np.ones(n)

    b = centroid_gram(a)
    dec = sym_eig(b)
    lead = np.abs(dec.values).max()
    cut = tol.rank_rel * lead
    r = int(np.count_nonzero(np.abs(dec.values) > cut))

    # Deterministic configuration: columns ordered by descending eigenvalue,
    # signs fixed so the first significant entry of each column is positive.
    vals_r = np.clip(dec.values[:r], 0.0, None)
    p = fix_column_signs(dec.vectors[:, :r] * np.sqrt(vals_r))

    d_dag = pinv(a, tol)
    w = d_dag @ e
    b_dag = pinv(b, tol)

    etw = float(e @ w)
    mean_sq = float(e @ a @ e) / n**2
    spherical = etw * mean_sq > SPHERICITY_TOL

    unit = spherical and abs(2.0 * etw - 1.0) <= UNIT_RADIUS_TOL * n
    radius = float(np.sqrt(1.0 / (2.0 * etw))) if spherical else None

    center = None
    if spherical:
        rhs = 0.5 * (np.diag(b) - np.full(n, np.diag(b).mean()))
        center, *_ = np.linalg.lstsq(p, rhs, rcond=None)

    de = a @ e
    regular = spherical and bool(
        np.linalg.norm(de - de.mean() * e) <= tol.recon_rel * max(np.linalg.norm(de), 1.0)
    )

    z = None
    if r <= n - 2:
        z = nullspace_basis(np.vstack([b, e[None, :]]), tol)
        if z.shape != (n, n - r - 1):
            raise NumericalFailure(
                f"Gale basis has shape {z.shape}, expected {(n, n - r - 1)}"
            )
        z_tilde = np.column_stack([w, z])
        z = _readonly(z)
    else:
        z_tilde = w[:, None].copy()

    return EdmProfile(
        d=d,
        tol=tol,
        r=r,
        B=_readonly(b),
        B_dag=_readonly(b_dag),
        D_dag=_readonly(d_dag),
        P=_readonly(p),
        w=_readonly(w),
        Z=z,
        Z_tilde=_readonly(z_tilde),
        spherical=spherical,
        unit_spherical=unit,
        radius=radius,
        center=_readonly(center) if center is not None else None,
        regular=regular,
    )


def _unit_w(d: DistanceMatrix, tol: TolerancePolicy) -> np.ndarray:
    """w = pinv(D) e, after checking the unit-sphere normalization 2 e.w = 1."""
    w = pinv(d.d, tol) @ np.ones(d.n)
    if abs(2.0 * float(w.sum()) - 1.0) > UNIT_RADIUS_TOL * d.n:
        raise NotUnitSpherical("operation requires a unit spherical EDM")
    return w


def gram(d: DistanceMatrix, choice: GramChoice, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Gram matrix of the generating points for the chosen origin."""
    if choice is GramChoice.CENTROID:
        return centroid_gram(d.d)
    _unit_w(d, tol)
    return symmetrize(np.ones((d.n, d.n)) - 0.5 * d.d)


def bdag_identity(d: DistanceMatrix, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Pseudoinverse of the centroid Gram matrix as -2 pinv(D) + 4 w w^T."""
    w = _unit_w(d, tol)
    return symmetrize(-2.0 * pinv(d.d, tol) + 4.0 * np.outer(w, w))


def bprime_dag_identity(d: DistanceMatrix, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Pseudoinverse of E - D/2 expressed through pinv(D) and w alone."""
    w = _unit_w(d, tol)
    d_dag = pinv(d.d, tol)
    ww = float(w @ w)
    dw = d_dag @ w
    correction = (
        np.outer(dw, w) + np.outer(w, dw) - (float(w @ dw) / ww) * np.outer(w, w)
    )
    return symmetrize(-2.0 * d_dag + (2.0 / ww) * correction)


def cm_dag_block(d: DistanceMatrix, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Closed-form pseudoinverse of the bordered matrix [[0, e^T], [e, D]].

    Equals [[-2, 2w^T], [2w, -pinv(B)/2]] for unit spherical D.
    """
    w = _unit_w(d, tol)
    b_dag = pinv(centroid_gram(d.d), tol)
    n = d.n
    out = np.empty((n + 1, n + 1))
    out[0, 0] = -2.0
    out[0, 1:] = 2.0 * w
    out[1:, 0] = 2.0 * w
    out[1:, 1:] = -0.5 * b_dag
    return symmetrize(out)
