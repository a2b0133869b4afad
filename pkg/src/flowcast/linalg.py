"""Dense linear-algebra contracts used by the decomposition.

Thin, validated wrappers around LAPACK (via numpy.linalg).  Contracts that
matter downstream: truncation is relative to the largest singular value with
a non-strict comparison, least squares returns the minimum-norm solution,
and normalization is in the root-mean-square sense.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True, eq=False)
class TruncatedSvd:
    """SVD truncated at a relative singular-value tolerance."""

    u: np.ndarray
    s: np.ndarray
    vt: np.ndarray
    rank: int


@dataclass(frozen=True, eq=False)
class EigenPairs:
    """Eigenvalues and matching eigenvector columns of a square matrix."""

    values: np.ndarray
    vectors: np.ndarray


def truncated_svd(a: np.ndarray, tol: float) -> TruncatedSvd:
    """SVD of a, keeping the leading block with s[i]/s[0] > tol.

    The retained rank is the smallest n with s[n]/s[0] <= tol, or the full
    rank if no singular value falls below the threshold.
    """
    a = np.asarray(a)
    if a.size == 0:
        raise ValueError("cannot decompose an empty matrix")
    if not np.isfinite(a).all():
        raise ValidationError("matrix contains non-finite values")
    if not (0 < tol < 1):
        raise ValueError(f"tol must lie in (0, 1), got {tol}")
    u, s, vt = np.linalg.svd(a, full_matrices=False)
    if s[0] == 0:
        raise ValueError("cannot truncate the SVD of a zero matrix")
    below = np.nonzero(s / s[0] <= tol)[0]
    rank = int(below[0]) if below.size else len(s)
    return TruncatedSvd(u[:, :rank].copy(), s[:rank].copy(), vt[:rank].copy(), rank)


def eig_dense(a: np.ndarray) -> EigenPairs:
    """Eigendecomposition of a dense square (real or complex) matrix."""
    a = np.asarray(a)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise ValidationError("matrix contains non-finite values")
    values, vectors = np.linalg.eig(a)
    return EigenPairs(values, vectors)


def lstsq(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution of a @ x = b."""
    a = np.asarray(a)
    b = np.asarray(b)
    if not (np.isfinite(a).all() and np.isfinite(b).all()):
        raise ValidationError("least-squares operand contains non-finite values")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: {a.shape[0]} vs {b.shape[0]}")
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    return x


def rms_normalize(u: np.ndarray) -> tuple[np.ndarray, float]:
    """Scale u to unit RMS: sqrt(mean(|u_i|^2)) == 1.

    Returns (normalized vector, scale) with scale * normalized == u.
    """
    u = np.asarray(u)
    rms = float(np.linalg.norm(u) / np.sqrt(u.size))
    if rms == 0.0:
        raise ValueError("cannot normalize an all-zero vector")
    return u / rms, rms
