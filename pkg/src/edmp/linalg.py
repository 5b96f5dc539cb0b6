"""Dense symmetric linear-algebra kernel.

Rank, definiteness and pseudoinversion decisions for the whole package
funnel through this module so that a single tolerance policy governs
every numerical cutoff.  All inputs are symmetrized explicitly before
factorization; there is no unsymmetric code path.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalFailure, ParallelVectors

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "EigDecomp",
    "symmetrize",
    "sym_eig",
    "pinv",
    "rank_of",
    "nullspace_basis",
    "is_psd",
    "min_eigenvalue",
    "rank2_sym_eigs",
    "fix_column_signs",
]


@dataclass(frozen=True)
class TolerancePolicy:
    """Thresholds shared by every numerical decision.

    rank_rel: relative eigenvalue/singular-value cutoff for rank and
        pseudoinversion, anchored to the largest magnitude.
    psd_abs_scale: slack for semidefiniteness tests, scaled by
        max(1, largest |eigenvalue|).
    recon_rel: relative tolerance for reconstruction-style identities.
    """

    rank_rel: float = 1e-10
    psd_abs_scale: float = 1e-9
    recon_rel: float = 1e-8

    def __post_init__(self):
        if min(self.rank_rel, self.psd_abs_scale, self.recon_rel) <= 0.0:
            raise ValueError("all tolerances must be strictly positive")


DEFAULT_TOL = TolerancePolicy()


def symmetrize(a) -> np.ndarray:
    """Return the symmetric part (A + A^T)/2 of a square matrix."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class EigDecomp:
    """Spectral factorization A = V diag(values) V^T, eigenvalues descending."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def sym_eig(a) -> EigDecomp:
    """Eigendecomposition of the symmetrized input, eigenvalues descending."""
    s = symmetrize(a)
    try:
        values, vectors = np.linalg.eigh(s)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(f"eigendecomposition failed: {exc}") from exc
    return EigDecomp(values[::-1].copy(), vectors[:, ::-1].copy())


def _rank_cut(values: np.ndarray, tol: TolerancePolicy) -> float:
    return tol.rank_rel * (np.abs(values).max() if values.size else 0.0)


def pinv(a, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Moore-Penrose inverse of a symmetric matrix via its spectrum.

    Eigenvalues with |lambda| above rank_rel * max|lambda| are inverted,
    the rest are zeroed.
    """
    dec = sym_eig(a)
    cut = _rank_cut(dec.values, tol)
    keep = np.abs(dec.values) > cut
    inv = np.zeros_like(dec.values)
    np.divide(1.0, dec.values, out=inv, where=keep)
    return symmetrize((dec.vectors * inv) @ dec.vectors.T)


def rank_of(a, tol: TolerancePolicy = DEFAULT_TOL) -> int:
    """Numerical rank of a symmetric matrix under the shared cutoff."""
    values = sym_eig(a).values
    return int(np.count_nonzero(np.abs(values) > _rank_cut(values, tol)))


def nullspace_basis(a, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the null space {x : Ax = 0}, as columns.

    Accepts any rectangular matrix; the result has A.shape[1] rows and
    one column per singular value below rank_rel * max singular value.
    Column signs are fixed deterministically.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    _, sing, vt = np.linalg.svd(a)
    cut = tol.rank_rel * (sing.max() if sing.size else 0.0)
    rank = int(np.count_nonzero(sing > cut))
    return fix_column_signs(vt[rank:].T.copy())


def is_psd(a, tol: TolerancePolicy = DEFAULT_TOL) -> bool:
    """Positive semidefiniteness up to the policy's absolute slack."""
    values = sym_eig(a).values
    if values.size == 0:
        return True
    bound = tol.psd_abs_scale * max(1.0, np.abs(values).max())
    return values.min() >= -bound


def min_eigenvalue(a) -> float:
    """Smallest eigenvalue of the symmetrized input."""
    return float(sym_eig(a).values[-1])


def rank2_sym_eigs(a, b, tol: TolerancePolicy = DEFAULT_TOL) -> tuple[float, float]:
    """Extreme eigenvalues of a b^T + b a^T for nonparallel a, b.

    The matrix has exactly one positive and one negative eigenvalue,
    a.b + |a||b| and a.b - |a||b|; everything else is zero.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise ValueError("vectors must have equal length")
    sing = np.linalg.svd(np.column_stack([a, b]), compute_uv=False)
    if sing[0] == 0.0 or sing[1] <= tol.rank_rel * sing[0]:
        raise ParallelVectors("rank-two eigenvalue formula needs nonparallel vectors")
    dot = float(a @ b)
    prod = float(np.linalg.norm(a) * np.linalg.norm(b))
    return dot + prod, dot - prod


def fix_column_signs(m: np.ndarray, rel: float = 1e-12) -> np.ndarray:
    """Flip column signs so the first significant entry of each is positive."""
    m = np.array(m, dtype=float)
    for col in range(m.shape[1]):
        column = m[:, col]
        top = np.abs(column).max()
        if top == 0.0:
            continue
        lead = np.argmax(np.abs(column) > rel * top)
        if column[lead] < 0.0:
            m[:, col] = -column
    return m
