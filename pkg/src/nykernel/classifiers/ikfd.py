"""Indefinite kernel Fisher discriminant, dense and Nyström-factored."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..lowrank import EIG_DROP_RTOL, nystrom_evd
from ..proximity import NystromFactors, check_symmetric


@dataclass(frozen=True)
class IkfdModel:
    """Binary Fisher discriminant ``f(x) = sum_i alpha_i k(x, x_i) + b``.

    ``posterior_params`` holds ``(mean, variance)`` of the training scores of
    the positive and the negative class.  Models trained on Nyström factors
    also keep the landmark indices and ``landmark_coef = P K_Nm' alpha`` so
    test points can be scored from their landmark kernel values alone.
    """

    alpha: np.ndarray
    bias: float
    mean_pos: np.ndarray
    mean_neg: np.ndarray
    posterior_params: tuple
    landmarks: np.ndarray | None = None
    landmark_coef: np.ndarray | None = None

    @property
    def n_train(self) -> int:
        return self.alpha.shape[0]

    def decision_function(self, kernel_rows) -> np.ndarray:
        """Scores for kernel rows against all training points, or against
        the landmarks when the model has them."""
        rows = np.asarray(kernel_rows, dtype=float)
        width = rows.shape[-1]
        if width == self.n_train:
            return rows @ self.alpha + self.bias
        if self.landmark_coef is not None and width == self.landmark_coef.shape[0]:
            return rows @ self.landmark_coef + self.bias
        raise ValidationError(f"kernel row of length {width} does not match the model")

    def predict_proba(self, kernel_rows) -> np.ndarray:
        return posterior_from_scores(self.decision_function(kernel_rows),
                                     self.posterior_params)

    def predict(self, kernel_rows) -> np.ndarray:
        return np.where(self.decision_function(kernel_rows) >= 0, 1, -1)


def _log_gauss(x, mean, var):
    return -0.5 * np.log(2.0 * np.pi * var) - (x - mean) ** 2 / (2.0 * var)


def posterior_from_scores(scores, params) -> np.ndarray:
    """P(y=+1 | score) from two 1-D Gaussians with equal priors."""
    (m_pos, v_pos), (m_neg, v_neg) = params
    diff = _log_gauss(scores, m_neg, v_neg) - _log_gauss(scores, m_pos, v_pos)
    return 1.0 / (1.0 + np.exp(np.clip(diff, -700.0, 700.0)))


def _fit_posterior(scores, y):
    params = []
    spread = float(np.max(np.abs(scores))) if scores.size else 0.0
    floor = 1e-12 * max(1.0, spread) ** 2
    for cls in (1, -1):
        s = scores[y == cls]
        params.append((float(s.mean()), max(float(s.var()), floor)))
    return tuple(params)


def _binary_labels(labels, n):
    y = np.asarray(labels).astype(int).ravel()
    if y.shape[0] != n:
        raise ValidationError(f"{y.shape[0]} labels for {n} training points")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValidationError("binary labels must be -1 or +1")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise ValidationError("both classes must be present to train")
    return y


def predict_ikfd(model: IkfdModel, kernel_row):
    """Score, label (sign with ``sign(0) = +1``) and posterior of one point."""
    score = float(model.decision_function(np.asarray(kernel_row, dtype=float)))
    label = 1 if score >= 0 else -1
    post = float(posterior_from_scores(np.array([score]), model.posterior_params)[0])
    return score, label, post


def train_ikfd(F: NystromFactors, labels, drop_rtol: float = EIG_DROP_RTOL) -> IkfdModel:
    """Fisher discriminant on a Nyström-approximated kernel in ``O(N m^2)``.

    Class means come from classwise row sums of the factors; the within-class
    operator is assembled per class as a mean-reduced squared ``N x m``
    block on the same landmarks and inverted through its low-rank
    eigendecomposition.
    """
    y = _binary_labels(labels, F.n)
    P = F.landmark_block_pinv
    CP = F.cross @ P
    L = F.landmarks
    PK = P @ F.landmark_block

    means = {}
    within_cross = np.zeros_like(F.cross)
    for cls in (1, -1):
        members = y == cls
        n_c = int(members.sum())
        Kc = F.cross[members]
        mu = CP @ (Kc.sum(axis=0) / n_c)
        means[cls] = mu
        within_cross += CP @ ((Kc.T @ Kc) @ PK) - n_c * np.outer(mu, mu[L])
    within = NystromFactors.from_blocks(L, within_cross)
    evd = nystrom_evd(within, drop_rtol=drop_rtol)

    diff = means[1] - means[-1]
    alpha = evd.eigvecs @ ((evd.eigvecs.T @ diff) / evd.eigvals) if evd.rank else np.zeros(F.n)
    bias = -float(alpha @ (means[1] + means[-1])) / 2.0
    scores = F.matvec(alpha) + bias
    return IkfdModel(alpha, bias, means[1], means[-1], _fit_posterior(scores, y),
                     landmarks=L.copy(), landmark_coef=P @ (F.cross.T @ alpha))


def train_ikfd_dense(K, labels, drop_rtol: float = EIG_DROP_RTOL) -> IkfdModel:
    """Reference Fisher discriminant on the full kernel matrix, ``O(N^3)``."""
    K = check_symmetric(K, name="kernel matrix")
    y = _binary_labels(labels, K.shape[0])
    within = np.zeros_like(K)
    means = {}
    for cls in (1, -1):
        Kc = K[:, y == cls]
        mu = Kc.mean(axis=1)
        means[cls] = mu
        within += Kc @ Kc.T - Kc.shape[1] * np.outer(mu, mu)
    lam, U = np.linalg.eigh(0.5 * (within + within.T))
    top = float(np.max(np.abs(lam)))
    keep = np.abs(lam) > drop_rtol * top if top > 0 else np.zeros(lam.shape, bool)
    diff = means[1] - means[-1]
    Uk = U[:, keep]
    alpha = Uk @ ((Uk.T @ diff) / lam[keep])
    bias = -float(alpha @ (means[1] + means[-1])) / 2.0
    scores = K @ alpha + bias
    return IkfdModel(alpha, bias, means[1], means[-1], _fit_posterior(scores, y))
