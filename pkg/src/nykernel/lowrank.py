"""Eigendecomposition and pseudo-inverse of Nyström-factored matrices.

Everything here costs ``O(N m^2)`` for ``N`` rows and ``m`` landmarks; the
only dense eigensolves are on ``m x m`` matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .proximity import PINV_RTOL, NystromFactors

EIG_DROP_RTOL = 1e-10
MAX_LANDMARKS = 2000


@dataclass(frozen=True)
class LowRankEvd:
    """``K~ = eigvecs @ diag(eigvals) @ eigvecs.T`` with orthonormal
    ``eigvecs`` and eigenvalues sorted by decreasing magnitude."""

    eigvecs: np.ndarray
    eigvals: np.ndarray

    @property
    def rank(self) -> int:
        return self.eigvals.shape[0]

    def matvec(self, v):
        return self.eigvecs @ (self.eigvals * (self.eigvecs.T @ v))

    def dense(self) -> np.ndarray:
        return (self.eigvecs * self.eigvals) @ self.eigvecs.T


@dataclass(frozen=True)
class LowRankPinv:
    """Pseudo-inverse ``P = left @ diag(inv_singvals) @ right``."""

    left: np.ndarray
    inv_singvals: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return self.inv_singvals.shape[0]

    def matvec(self, v):
        return self.left @ (self.inv_singvals * (self.right @ v))

    def dense(self) -> np.ndarray:
        return (self.left * self.inv_singvals) @ self.right


def _empty_evd(n: int) -> LowRankEvd:
    return LowRankEvd(np.zeros((n, 0)), np.zeros(0))


def nystrom_evd(F: NystromFactors, drop_rtol: float = EIG_DROP_RTOL,
                max_landmarks: int = MAX_LANDMARKS) -> LowRankEvd:
    """Exact eigendecomposition of ``K~`` from its Nyström factors.

    With ``K_mm = U diag(lam) U'`` the matrix factors as ``K~ = B S B'`` where
    ``B = K_Nm U |lam|^-1/2`` and ``S = sign(lam)``.  The eigenvectors of the
    small Gram matrix ``B'B = V diag(a) V'`` give an orthonormal basis
    ``C0 = B V a^-1/2`` of the range of ``K~``.  For psd input
    ``C0' K~ C0 = diag(a)`` already; for indefinite input the ``r x r``
    matrix ``C0' K~ C0`` is diagonalized once more to recover signed
    eigenpairs.  Pairs with ``|lambda| <= drop_rtol * max|lambda|`` are
    discarded.
    """
    n, m = F.cross.shape
    if m > max_landmarks:
        raise ValidationError(f"{m} landmarks exceed the cap of {max_landmarks}")
    block = F.landmark_block
    lam, U = np.linalg.eigh(0.5 * (block + block.T))
    top = float(np.max(np.abs(lam))) if lam.size else 0.0
    if top == 0.0:
        return _empty_evd(n)
    keep = np.abs(lam) > PINV_RTOL * top
    lam, U = lam[keep], U[:, keep]
    signs = np.sign(lam)

    B = F.cross @ (U / np.sqrt(np.abs(lam)))
    a, V = np.linalg.eigh(B.T @ B)
    a_top = float(np.max(a)) if a.size else 0.0
    if a_top <= 0.0:
        return _empty_evd(n)
    ok = a > PINV_RTOL * a_top
    a, V = a[ok], V[:, ok]
    root = np.sqrt(a)
    C0 = B @ (V / root)

    T = (root[:, None] * ((V.T * signs) @ V)) * root[None, :]
    evals, W = np.linalg.eigh(0.5 * (T + T.T))
    C = C0 @ W

    e_top = float(np.max(np.abs(evals)))
    if e_top == 0.0:
        return _empty_evd(n)
    kept = np.flatnonzero(np.abs(evals) > drop_rtol * e_top)
    order = kept[np.argsort(-np.abs(evals[kept]), kind="stable")]
    return LowRankEvd(C[:, order], evals[order])


def nystrom_square(F: NystromFactors) -> NystromFactors:
    """Factors of ``K~ K~'`` on the same landmarks.

    ``K~ K~' = K_Nm G K_Nm'`` with ``G = P (K_Nm' K_Nm) P``, so the new cross
    block is ``K_Nm G K_mm``.  The result is psd, shares the eigenvectors of
    ``K~`` and has squared eigenvalues.
    """
    P = F.landmark_block_pinv
    core = P @ (F.cross.T @ F.cross) @ P
    return F.with_core(0.5 * (core + core.T))


def nystrom_pinv(F: NystromFactors, rtol: float = PINV_RTOL) -> LowRankPinv:
    """Pseudo-inverse of a symmetric Nyström-approximated matrix.

    The singular values are the square roots of the eigenvalues of the
    Nyström approximation of ``K~ K~'`` on the same landmarks, and its
    eigenvectors are the singular vectors.  That matrix shares its
    eigenvectors with ``K~`` and has the squared eigenvalues (see
    :func:`nystrom_square`), so both are read off ``nystrom_evd(F)``
    directly: ``sigma = |lambda|`` and the left vectors carry the signs.
    Going through the explicit square would square the condition number.
    Only singular values above ``rtol * sigma_max`` are inverted, so the
    rank is at most ``m``.
    """
    n = F.n
    evd = nystrom_evd(F, drop_rtol=rtol)
    if evd.rank == 0:
        return LowRankPinv(np.zeros((n, 0)), np.zeros(0), np.zeros((0, n)))
    C, lam = evd.eigvecs, evd.eigvals
    return LowRankPinv(C * np.sign(lam), 1.0 / np.abs(lam), C.T)
