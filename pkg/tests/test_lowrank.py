import numpy as np
import pytest

from helpers import independent_landmarks, signed_lowrank, sorted_by_magnitude
from nykernel import ValidationError
from nykernel.lowrank import nystrom_evd, nystrom_pinv, nystrom_square
from nykernel.proximity import nystrom_factorize, nystrom_reconstruct


def test_evd_exchange_matrix():
    F = nystrom_factorize(np.array([[0.0, 1.0], [1.0, 0.0]]), [0, 1])
    evd = nystrom_evd(F)
    assert np.allclose(sorted(evd.eigvals), [-1.0, 1.0], atol=1e-12)
    assert np.allclose(evd.eigvecs.T @ evd.eigvecs, np.eye(2), atol=1e-12)


def test_evd_psd_rank8_matches_dense():
    K = signed_lowrank(60, 8, 0, seed=1)
    F = nystrom_factorize(K, independent_landmarks(K, 8, seed=1))
    evd = nystrom_evd(F)
    dense = sorted_by_magnitude(np.linalg.eigvalsh(K))[:8]
    assert np.allclose(evd.eigvals, dense, rtol=0, atol=1e-8 * abs(dense[0]))


def test_evd_signature_5_3():
    K = signed_lowrank(80, 5, 3, seed=2)
    evd = nystrom_evd(nystrom_factorize(K, independent_landmarks(K, 8, seed=2)))
    assert (evd.eigvals > 0).sum() == 5 and (evd.eigvals < 0).sum() == 3
    assert np.allclose(evd.dense(), K, atol=1e-8 * np.abs(K).max())


def test_evd_zero_matrix_and_cap():
    F = nystrom_factorize(np.zeros((4, 4)), [0, 1])
    assert nystrom_evd(F).rank == 0
    with pytest.raises(ValidationError):
        nystrom_evd(nystrom_factorize(np.eye(5), range(5)), max_landmarks=4)


def test_square_diag():
    F = nystrom_factorize(np.diag([2.0, -3.0]), [0, 1])
    assert np.allclose(nystrom_reconstruct(nystrom_square(F)), np.diag([4.0, 9.0]), atol=1e-12)


def test_square_spectrum():
    K = signed_lowrank(150, 4, 2, seed=3)
    F = nystrom_factorize(K, independent_landmarks(K, 6, seed=3))
    lam = nystrom_evd(F).eigvals
    sq = nystrom_evd(nystrom_square(F)).eigvals
    assert np.allclose(np.sort(sq), np.sort(lam ** 2), rtol=1e-7, atol=0)


def test_square_psd_keeps_eigenvectors():
    K = signed_lowrank(40, 5, 0, seed=4)
    F = nystrom_factorize(K, independent_landmarks(K, 5, seed=4))
    a, b = nystrom_evd(F), nystrom_evd(nystrom_square(F))
    assert np.all(b.eigvals > 0)
    overlap = np.abs(a.eigvecs.T @ b.eigvecs)
    assert np.allclose(overlap, np.eye(5), atol=1e-6)


def test_pinv_diag():
    F = nystrom_factorize(np.diag([2.0, 0.0, 0.0]), [0])
    assert np.allclose(nystrom_pinv(F).dense(), np.diag([0.5, 0.0, 0.0]), atol=1e-15)


def test_pinv_full_rank_matches_svd_oracle():
    rng = np.random.default_rng(5)
    A = rng.standard_normal((20, 20))
    K = A @ A.T + 0.1 * np.eye(20)
    P = nystrom_pinv(nystrom_factorize(K, np.arange(20))).dense()
    U, s, Vt = np.linalg.svd(K)
    oracle = (Vt.T / s) @ U.T
    assert np.max(np.abs(P - oracle)) <= 1e-6 * np.max(np.abs(oracle))


def test_pinv_rank_deficient_penrose():
    K = signed_lowrank(50, 3, 1, seed=6)
    rng = np.random.default_rng(6)
    F = nystrom_factorize(K, rng.choice(50, size=10, replace=False))
    P = nystrom_pinv(F).dense()
    assert nystrom_pinv(F).rank == 4
    assert np.allclose(P @ K @ P, P, atol=1e-6 * np.abs(P).max())
    assert np.allclose(K @ P @ K, K, atol=1e-6 * np.abs(K).max())


def test_pinv_matvec_matches_dense():
    K = signed_lowrank(30, 2, 2, seed=7)
    pinv = nystrom_pinv(nystrom_factorize(K, independent_landmarks(K, 4, seed=7)))
    v = np.arange(30.0)
    assert np.allclose(pinv.matvec(v), pinv.dense() @ v)


def test_pinv_keeps_accuracy_when_ill_conditioned():
    # squaring the matrix first would lose about half the digits here
    rng = np.random.default_rng(8)
    Q, _ = np.linalg.qr(rng.standard_normal((30, 30)))
    lam = np.logspace(0, -6, 30) * np.where(np.arange(30) % 2, -1, 1)
    K = (Q * lam) @ Q.T
    K = 0.5 * (K + K.T)
    P = nystrom_pinv(nystrom_factorize(K, np.arange(30))).dense()
    oracle = (Q / lam) @ Q.T
    assert np.linalg.norm(P - oracle) <= 1e-7 * np.linalg.norm(oracle)
