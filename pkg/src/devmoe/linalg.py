"""Dense float64 matrix kernel used by every other module.

All matrices are 2-D C-contiguous ``numpy.ndarray`` of float64.  The
helpers here add the shape/rank checking and the deterministic sign
conventions that the rest of the package relies on; heavy lifting
(products, SVD) is delegated to numpy/LAPACK.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Smallest singular value still counted as nonzero when checking row rank.
RANK_TOL = 1e-10


class SvdConvergenceError(RuntimeError):
    """Raised when the LAPACK SVD driver fails to converge."""


def as_matrix(a, check_finite: bool = False) -> np.ndarray:
    """Coerce *a* to a 2-D float64 C-order array, optionally rejecting NaN/Inf."""
    m = np.ascontiguousarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got ndim={m.ndim}")
    if check_finite and not np.isfinite(m).all():
        raise ValueError("matrix contains non-finite entries")
    return m


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product a @ b with an explicit shape check."""
    if a.shape[1] != b.shape[0]:
        raise ValueError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return a @ b


def frob_sq(m: np.ndarray) -> float:
    """Sum of squared entries (squared Frobenius norm)."""
    return float(np.sum(m * m))


@dataclass(frozen=True)
class SvdResult:
    """Thin SVD ``u @ diag(s) @ vt`` with s descending and orthonormal factors."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray


def svd(m: np.ndarray) -> SvdResult:
    """Thin SVD with a deterministic sign convention.

    Each row of ``vt`` is flipped so that its largest-magnitude entry is
    positive (ties broken by the first such entry); the matching column
    of ``u`` is flipped to compensate, so the reconstruction is exact.
    """
    m = as_matrix(m)
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ValueError(f"svd needs a non-empty matrix, got {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("svd input contains non-finite entries")
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SvdConvergenceError(
            "SVD did not converge within the LAPACK iteration cap (gesdd)"
        ) from exc
    u, vt = _fix_signs(u, vt)
    return SvdResult(np.ascontiguousarray(u), s, np.ascontiguousarray(vt))


def _fix_signs(u: np.ndarray, vt: np.ndarray):
    """Force the largest-|entry| of each right singular vector positive."""
    idx = np.argmax(np.abs(vt), axis=1)
    flip = np.sign(vt[np.arange(vt.shape[0]), idx])
    flip[flip == 0] = 1.0
    return u * flip[np.newaxis, :], vt * flip[:, np.newaxis]


def top_r_right_rows(m: np.ndarray, r: int) -> np.ndarray:
    """Rows of vt for the r largest singular values, shape (r, m.cols)."""
    k = min(m.shape)
    if not 1 <= r <= k:
        raise ValueError(f"r={r} out of range for shape {m.shape} (max {k})")
    return svd(m).vt[:r]


def rowspace_projector(b: np.ndarray) -> np.ndarray:
    """Projector P = b^T (b b^T)^-1 b onto the span of b's rows.

    Requires full row rank; the check uses singular values so the error
    can report how close to rank-deficient the input is.
    """
    b = as_matrix(b)
    s = np.linalg.svd(b, compute_uv=False)
    smin = float(s[-1]) if len(s) == b.shape[0] else 0.0
    if b.shape[0] > b.shape[1] or smin <= RANK_TOL:
        raise ValueError(
            f"rowspace_projector needs full row rank: shape {b.shape}, "
            f"smallest singular value {smin:.3e}"
        )
    gram = b @ b.T
    p = b.T @ np.linalg.solve(gram, b)
    # Symmetrize to kill the last-bit asymmetry from the solve.
    return (p + p.T) / 2.0


def orthonormal_rowbasis(m: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (as rows) for the row space of *m*."""
    res = svd(m)
    rank = int(np.sum(res.s > tol * max(1.0, float(res.s[0]))))
    rank = max(rank, 1)
    return res.vt[:rank]
