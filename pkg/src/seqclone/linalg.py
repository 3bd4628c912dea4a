"""Dense complex linear algebra used by the rest of the package.

All matrices are ``numpy.ndarray`` of complex128 with ``ndim == 2``.
Conventions fixed here and relied upon everywhere else:

* singular values are returned in non-increasing order,
* SVD phases are made deterministic (largest-magnitude entry of every left
  singular vector is real and positive),
* a singular value counts as numerically nonzero iff it exceeds
  ``RANK_RTOL`` times the largest one.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import NumericalFailure

# Relative threshold below which a singular value is treated as zero.
RANK_RTOL = 1e-10


class SVDResult(NamedTuple):
    """Decomposition ``a = left @ diag(singulars) @ right.conj().T``.

    ``left`` and ``right`` both have orthonormal columns; ``singulars`` is a
    real vector sorted in non-increasing order.
    """

    left: np.ndarray
    singulars: np.ndarray
    right: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.singulars) @ self.right.conj().T


def _as_matrix(a: np.ndarray, name: str = "a") -> np.ndarray:
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim != 2 or a.size == 0:
        raise ValueError(f"{name} must be a nonempty 2-d array, got shape {a.shape}")
    return a


def svd(a: np.ndarray) -> SVDResult:
    """Thin SVD with a deterministic phase convention.

    Each left singular vector is rotated so its largest-magnitude entry is
    real-positive (the compensating phase goes into the right vector), which
    makes repeated decompositions of the same matrix bit-stable across runs.

    Raises:
        ValueError: empty input.
        NumericalFailure: the underlying LAPACK iteration did not converge.
    """
    a = _as_matrix(a)
    try:
        u, s, vh = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure(
            f"SVD failed to converge for a {a.shape[0]}x{a.shape[1]} matrix"
        ) from exc
    u = np.asarray(u, dtype=np.complex128)
    vh = np.asarray(vh, dtype=np.complex128)
    for j in range(u.shape[1]):
        pivot = np.argmax(np.abs(u[:, j]))
        mag = np.abs(u[pivot, j])
        if mag > 0.0:
            phase = u[pivot, j] / mag
            u[:, j] *= np.conj(phase)
            vh[j, :] *= phase
    return SVDResult(left=u, singulars=s, right=vh.conj().T)


def numerical_rank(singulars: np.ndarray, rtol: float = RANK_RTOL) -> int:
    """Number of singular values above ``rtol`` times the largest one."""
    s = np.asarray(singulars, dtype=float)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rtol * s[0]))


def truncate_rank(a: np.ndarray, k: int) -> np.ndarray:
    """Best Frobenius-norm rank-``k`` approximation of ``a``.

    Keeps the ``k`` largest singular triplets and discards the rest; the
    discarded Frobenius error is ``sqrt(sum of squared dropped singulars)``.

    Raises:
        ValueError: ``k`` outside ``[1, min(a.shape)]``.
    """
    a = _as_matrix(a)
    min_dim = min(a.shape)
    if not 1 <= k <= min_dim:
        raise ValueError(f"rank cap must be in [1, {min_dim}], got {k}")
    u, s, v = svd(a)
    return (u[:, :k] * s[:k]) @ v[:, :k].conj().T


def hermitian_expm(h: np.ndarray, scale: float = 1.0) -> np.ndarray:
    """Unitary ``exp(-1j * scale * h)`` of a Hermitian generator.

    Computed by eigendecomposition, so the result is unitary to machine
    precision even for large ``scale``.

    Raises:
        ValueError: ``h`` is not square or not Hermitian within 1e-12.
    """
    h = _as_matrix(h, "h")
    if h.shape[0] != h.shape[1]:
        raise ValueError(f"generator must be square, got shape {h.shape}")
    asym = float(np.max(np.abs(h - h.conj().T)))
    if asym > 1e-12:
        raise ValueError(f"generator is not Hermitian: max asymmetry {asym:.3e}")
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * scale * w)) @ v.conj().T


def complete_to_unitary(iso: np.ndarray) -> np.ndarray:
    """Extend a matrix with orthonormal columns to a square unitary.

    The first ``iso.shape[1]`` columns of the result are exactly ``iso``; the
    remaining columns are an orthonormal basis of the orthogonal complement
    of its column space (taken from the full SVD, hence deterministic up to
    LAPACK).

    Raises:
        ValueError: more columns than rows, or columns not orthonormal
            within 1e-10.
    """
    iso = _as_matrix(iso, "iso")
    rows, cols = iso.shape
    if cols > rows:
        raise ValueError(f"isometry cannot be wider than tall, got shape {iso.shape}")
    gram_defect = float(np.max(np.abs(iso.conj().T @ iso - np.eye(cols))))
    if gram_defect > 1e-10:
        raise ValueError(
            f"columns are not orthonormal: max Gram defect {gram_defect:.3e}"
        )
    if cols == rows:
        return iso.copy()
    u_full, _, _ = np.linalg.svd(iso, full_matrices=True)
    return np.hstack([iso, u_full[:, cols:]])
