"""Proximity representations and Nyström factorization.

Similarity and dissimilarity matrices are plain dense ``numpy`` arrays;
the helpers here validate them and convert between the two views.  The
Nyström factors keep only the ``N x m`` cross block and the ``m x m``
landmark block, so nothing in this module forms an ``N x N`` product
except :func:`nystrom_reconstruct`, which exists for small-N checks.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ValidationError

PINV_RTOL = 1e-12
SYMMETRY_TOL = 1e-10


def check_symmetric(K, tol: float = SYMMETRY_TOL, name: str = "matrix") -> np.ndarray:
    """Return ``K`` as a float array after checking it is square and symmetric.

    The tolerance is relative: ``|K_ij - K_ji| <= tol * max(1, max|K|)``.
    """
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError(f"{name} must be square, got shape {K.shape}")
    if K.shape[0] < 1:
        raise ValidationError(f"{name} must have at least one row")
    if not np.all(np.isfinite(K)):
        raise ValidationError(f"{name} contains non-finite entries")
    scale = max(1.0, float(np.max(np.abs(K))))
    asym = float(np.max(np.abs(K - K.T)))
    if asym > tol * scale:
        raise ValidationError(
            f"{name} is not symmetric: max |K_ij - K_ji| = {asym:.3e} "
            f"exceeds {tol:.1e} * {scale:.3e}"
        )
    return K


def sim_to_dissim(K) -> np.ndarray:
    """Squared dissimilarities ``D_ij = K_ii + K_jj - 2 K_ij``."""
    K = check_symmetric(K, name="similarity matrix")
    d = np.diag(K)
    D = d[:, None] + d[None, :] - 2.0 * K
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    return D


def double_center(D) -> np.ndarray:
    """Similarities ``S = -J D J / 2`` from squared dissimilarities ``D``."""
    D = check_symmetric(D, name="dissimilarity matrix")
    scale = max(1.0, float(np.max(np.abs(D))))
    if np.max(np.abs(np.diag(D))) > SYMMETRY_TOL * scale:
        raise ValidationError("dissimilarity matrix must have a zero diagonal")
    row = D.mean(axis=1)
    S = -0.5 * (D - row[:, None] - row[None, :] + row.mean())
    return 0.5 * (S + S.T)


def pe_embedding(S, zero_tol: float = 1e-10):
    """Pseudo-Euclidean coordinates of a symmetric similarity matrix.

    Parameters
    ----------
    S : array, shape (N, N)
        Symmetric similarity matrix, psd or not.
    zero_tol : float
        Eigenvalues with ``|lambda| <= zero_tol * max|lambda|`` are dropped.

    Returns
    -------
    V : array, shape (N, p + q)
        Coordinates; the first ``p`` columns belong to positive eigenvalues.
    signature : tuple of int
        ``(p, q, z)`` counts of positive, negative and dropped eigenvalues.
    """
    S = check_symmetric(S, name="similarity matrix")
    lam, U = np.linalg.eigh(0.5 * (S + S.T))
    top = float(np.max(np.abs(lam))) if lam.size else 0.0
    keep = np.abs(lam) > zero_tol * top if top > 0 else np.zeros(lam.shape, bool)
    pos = np.flatnonzero(keep & (lam > 0))
    neg = np.flatnonzero(keep & (lam < 0))
    pos = pos[np.argsort(-lam[pos], kind="stable")]
    neg = neg[np.argsort(lam[neg], kind="stable")]
    order = np.concatenate([pos, neg])
    V = U[:, order] * np.sqrt(np.abs(lam[order]))
    return V, (len(pos), len(neg), S.shape[0] - len(order))


# --------------------------------------------------------------------------
# kernel functions


def _elm_arcsine(X, Y, weight_variance):
    s2 = 2.0 * weight_variance
    nx = 1.0 + s2 * np.einsum("ij,ij->i", X, X) + s2
    ny = 1.0 + s2 * np.einsum("ij,ij->i", Y, Y) + s2
    num = 1.0 + s2 * (X @ Y.T)
    ratio = num / np.sqrt(np.outer(nx, ny))
    return (2.0 / np.pi) * np.arcsin(np.clip(ratio, -1.0, 1.0))


def _manhattan(X, Y):
    out = np.empty((X.shape[0], Y.shape[0]))
    for j in range(Y.shape[0]):
        out[:, j] = -np.abs(X - Y[j]).sum(axis=1)
    return out


@dataclass(frozen=True)
class KernelFunction:
    """A symmetric similarity function on vectors.

    ``kind`` is one of ``linear``, ``rbf`` (``sigma``), ``negative-manhattan``,
    ``tanh`` (``scale``, ``offset``), ``elm-arcsine`` (``weight_variance``) or
    ``pseudo-euclidean`` (``positive_dims``: the first ``p`` coordinates enter
    the inner product with ``+``, the rest with ``-``).
    """

    kind: str = "linear"
    sigma: float = 1.0
    scale: float = 1.0
    offset: float = 0.0
    weight_variance: float = 1.0
    positive_dims: int = 1

    KINDS = ("linear", "rbf", "negative-manhattan", "tanh", "elm-arcsine",
             "pseudo-euclidean")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValidationError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.sigma > 0:
            raise ValidationError("rbf kernel needs sigma > 0")
        if self.kind == "elm-arcsine" and not self.weight_variance > 0:
            raise ValidationError("elm-arcsine kernel needs weight_variance > 0")
        if self.kind == "pseudo-euclidean" and self.positive_dims < 0:
            raise ValidationError("positive_dims must be >= 0")

    def matrix(self, X, Y=None) -> np.ndarray:
        """Kernel matrix between the rows of ``X`` and the rows of ``Y``."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = X if Y is None else np.atleast_2d(np.asarray(Y, dtype=float))
        if X.shape[1] != Y.shape[1]:
            raise ValidationError("kernel arguments have different dimensions")
        if self.kind == "linear":
            return X @ Y.T
        if self.kind == "rbf":
            sq = (np.einsum("ij,ij->i", X, X)[:, None]
                  + np.einsum("ij,ij->i", Y, Y)[None, :] - 2.0 * X @ Y.T)
            return np.exp(-np.maximum(sq, 0.0) / (2.0 * self.sigma ** 2))
        if self.kind == "negative-manhattan":
            return _manhattan(X, Y)
        if self.kind == "tanh":
            return np.tanh(self.scale * (X @ Y.T) + self.offset)
        if self.kind == "elm-arcsine":
            return _elm_arcsine(X, Y, self.weight_variance)
        p = self.positive_dims
        return X[:, :p] @ Y[:, :p].T - X[:, p:] @ Y[:, p:].T

    def __call__(self, x, y) -> float:
        return float(self.matrix(np.atleast_2d(x), np.atleast_2d(y))[0, 0])


# --------------------------------------------------------------------------
# datasets


@dataclass
class LabeledDataset:
    """Labelled objects given either as vectors plus a kernel or as a
    precomputed similarity matrix.  Exactly one of ``points``/``kernel_matrix``
    is set."""

    labels: np.ndarray
    points: np.ndarray | None = None
    kernel: KernelFunction | None = None
    kernel_matrix: np.ndarray | None = None
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.labels = np.asarray(self.labels).astype(int).ravel()
        if (self.points is None) == (self.kernel_matrix is None):
            raise ValidationError("give either points with a kernel or a kernel matrix")
        if self.points is not None:
            self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
            if self.kernel is None:
                raise ValidationError("vector data needs a kernel function")
            n = self.points.shape[0]
        else:
            self.kernel_matrix = check_symmetric(self.kernel_matrix,
                                                 name="kernel matrix")
            n = self.kernel_matrix.shape[0]
        if self.labels.shape[0] != n:
            raise ValidationError(f"{self.labels.shape[0]} labels for {n} items")

    @property
    def n(self) -> int:
        return self.labels.shape[0]

    @property
    def classes(self) -> np.ndarray:
        return np.unique(self.labels)

    @property
    def precomputed(self) -> bool:
        return self.kernel_matrix is not None

    def block(self, rows=None, cols=None) -> np.ndarray:
        """Kernel values between items ``rows`` and ``cols`` (default: all)."""
        if self.precomputed:
            K = self.kernel_matrix
            r = slice(None) if rows is None else np.asarray(rows, dtype=int)
            c = slice(None) if cols is None else np.asarray(cols, dtype=int)
            if isinstance(r, slice):
                return K[:, c]
            return K[r][:, c]
        X = self.points
        A = X if rows is None else X[np.asarray(rows, dtype=int)]
        B = X if cols is None else X[np.asarray(cols, dtype=int)]
        return self.kernel.matrix(A, B)

    def take(self, idx) -> "LabeledDataset":
        """Sub-dataset restricted to items ``idx`` (in that order)."""
        idx = np.asarray(idx, dtype=int)
        if self.precomputed:
            return LabeledDataset(self.labels[idx], kernel_matrix=self.block(idx, idx),
                                  name=self.name, meta=dict(self.meta))
        return LabeledDataset(self.labels[idx], points=self.points[idx],
                              kernel=self.kernel, name=self.name, meta=dict(self.meta))

    def binary_labels(self, positive) -> np.ndarray:
        """``+1`` for items of class ``positive``, ``-1`` for all others."""
        return np.where(self.labels == positive, 1, -1)


# --------------------------------------------------------------------------
# Nyström factors


def symmetric_pinv(A, rtol: float = PINV_RTOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse of a symmetric matrix via ``eigh``."""
    A = np.asarray(A, dtype=float)
    if A.size == 0:
        return np.zeros_like(A)
    lam, U = np.linalg.eigh(0.5 * (A + A.T))
    top = float(np.max(np.abs(lam)))
    if top == 0.0:
        return np.zeros_like(A)
    keep = np.abs(lam) > rtol * top
    Uk = U[:, keep]
    P = (Uk / lam[keep]) @ Uk.T
    return 0.5 * (P + P.T)


@dataclass(frozen=True)
class NystromFactors:
    """Factors of ``K~ = cross @ pinv(landmark_block) @ cross.T``.

    ``landmarks`` are sorted ascending and ``cross[landmarks] ==
    landmark_block`` holds exactly.
    """

    landmarks: np.ndarray
    cross: np.ndarray
    landmark_block: np.ndarray
    landmark_block_pinv: np.ndarray

    @property
    def n(self) -> int:
        return self.cross.shape[0]

    @property
    def m(self) -> int:
        return self.cross.shape[1]

    @classmethod
    def from_blocks(cls, landmarks, cross) -> "NystromFactors":
        """Build factors from a cross block; the landmark block is read off
        its landmark rows."""
        landmarks = np.asarray(landmarks, dtype=int)
        cross = np.asarray(cross, dtype=float)
        block = cross[landmarks]
        return cls(landmarks, cross, block, symmetric_pinv(block))

    def matvec(self, v) -> np.ndarray:
        """``K~ @ v`` in ``O(N m)`` without forming ``K~``."""
        return self.cross @ (self.landmark_block_pinv @ (self.cross.T @ v))

    def columns(self, idx) -> np.ndarray:
        """Columns ``idx`` of ``K~`` (an ``N x len(idx)`` block)."""
        idx = np.asarray(idx, dtype=int)
        return self.cross @ (self.landmark_block_pinv @ self.cross[idx].T)

    def diag(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self.cross @ self.landmark_block_pinv, self.cross)

    def with_core(self, core) -> "NystromFactors":
        """Factors, on the same landmarks, of ``cross @ core @ cross.T``.

        The new cross block is the landmark columns of that matrix, so only
        ``N x m`` intermediates appear.
        """
        new_cross = self.cross @ (core @ self.landmark_block)
        return NystromFactors.from_blocks(self.landmarks, new_cross)


def _check_landmarks(landmarks, n: int) -> np.ndarray:
    L = np.asarray(landmarks, dtype=int).ravel()
    if L.size < 1 or L.size > n:
        raise ValidationError(f"need 1 <= m <= n landmarks, got m={L.size}, n={n}")
    if np.unique(L).size != L.size:
        dup = sorted({int(i) for i in L if np.count_nonzero(L == i) > 1})
        raise ValidationError(f"duplicate landmark indices: {dup}")
    if L.min() < 0 or L.max() >= n:
        raise ValidationError(f"landmark index out of range 0..{n - 1}")
    return np.sort(L)


def nystrom_factorize(source, landmarks: Sequence[int]) -> NystromFactors:
    """Nyström factors of ``source`` (a similarity matrix or a
    :class:`LabeledDataset`) on the given landmark indices."""
    if isinstance(source, LabeledDataset):
        L = _check_landmarks(landmarks, source.n)
        cross = source.block(None, L)
    else:
        K = np.asarray(source, dtype=float)
        if K.ndim != 2 or K.shape[0] != K.shape[1]:
            raise ValidationError("similarity matrix must be square")
        L = _check_landmarks(landmarks, K.shape[0])
        cross = K[:, L]
    return NystromFactors.from_blocks(L, np.array(cross, dtype=float))


def nystrom_reconstruct(F: NystromFactors) -> np.ndarray:
    """Dense ``K~``; meant for tests and small N."""
    C = F.cross
    R = C @ F.landmark_block_pinv @ C.T
    return 0.5 * (R + R.T)


def nystrom_extend(F: NystromFactors, k_new) -> np.ndarray:
    """Approximate kernel values between a new point and all N training
    points, from its kernel values against the landmarks.

    ``k_new`` may be an ``m``-vector or a ``(t, m)`` array of ``t`` points;
    the result has shape ``(N,)`` or ``(t, N)`` accordingly.
    """
    k_new = np.asarray(k_new, dtype=float)
    if k_new.shape[-1] != F.m:
        raise ValidationError(f"expected {F.m} landmark kernel values, got {k_new.shape[-1]}")
    if k_new.ndim == 1:
        return F.cross @ (F.landmark_block_pinv @ k_new)
    return (k_new @ F.landmark_block_pinv) @ F.cross.T


def row_sums(F: NystromFactors, subset=None) -> np.ndarray:
    """Row sums of ``K~``, optionally restricted to the columns in ``subset``.

    Computed as ``((1' cross_subset) P) cross'`` at ``O(N m)`` cost.
    """
    C = F.cross if subset is None else F.cross[np.asarray(subset)]
    s = C.sum(axis=0)
    return F.cross @ (F.landmark_block_pinv @ s)

