"""Probabilistic classification vector machine trained by EM.

Internally the weights are signed (``y_i w_i >= 0``); the stored model keeps
their magnitudes together with the basis labels so that the score reads
``sum_i weights_i * y_i * k(x, x_i) + b``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr

from ..config import TrainConfig
from ..errors import NumericalError, ValidationError
from ..lowrank import nystrom_pinv
from ..proximity import NystromFactors, check_symmetric

SQRT2 = math.sqrt(2.0)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
MILLS_SWITCH = 1e6
INITIAL_BIAS = 1.0


@dataclass(frozen=True)
class PcvmModel:
    weights: np.ndarray
    bias: float
    active: np.ndarray
    basis_labels: np.ndarray
    prune_threshold: float
    n_train: int
    iterations: int = 0

    @property
    def coef(self) -> np.ndarray:
        """Signed expansion coefficients over the active bases."""
        return self.weights * self.basis_labels

    @property
    def sparsity(self) -> float:
        """Percentage of training points kept as bases."""
        return 100.0 * self.active.size / self.n_train

    def decision_function(self, kernel_rows) -> np.ndarray:
        rows = np.asarray(kernel_rows, dtype=float)
        if rows.shape[-1] == self.n_train:
            rows = rows[..., self.active]
        elif rows.shape[-1] != self.active.size:
            raise ValidationError(
                f"kernel row of length {rows.shape[-1]} matches neither the "
                f"{self.n_train} training points nor the {self.active.size} bases")
        return rows @ self.coef + self.bias

    def predict_proba(self, kernel_rows) -> np.ndarray:
        return probit(self.decision_function(kernel_rows))

    def predict(self, kernel_rows) -> np.ndarray:
        return np.where(self.predict_proba(kernel_rows) >= 0.5, 1, -1)


def probit(x):
    """Standard normal CDF."""
    return ndtr(x)


def predict_pcvm(model: PcvmModel, kernel_row_active):
    """Probability of the positive class and the label for one point."""
    p = float(probit(model.decision_function(np.asarray(kernel_row_active, dtype=float))))
    return p, (1 if p >= 0.5 else -1)


def expected_latent(z, y) -> np.ndarray:
    """Posterior mean of the latent ``h ~ N(z, 1)`` truncated to the side of
    ``y``: ``z + y phi(z) / Phi(y z)``.

    The ratio is taken in log space (``log_ndtr`` is accurate far into the
    tail), which avoids the 0/0 of the direct quotient.  Past ``-1e6`` the
    leading asymptotic term ``-yz`` is exact to double precision.
    """
    z = np.asarray(z, dtype=float)
    u = y * z
    ratio = -u.copy()
    ok = u > -MILLS_SWITCH
    uo = u[ok]
    ratio[ok] = np.exp(-0.5 * uo * uo - _LOG_SQRT_2PI - log_ndtr(uo))
    return z + y * ratio


def _binary(labels, n):
    y = np.asarray(labels).astype(int).ravel()
    if y.shape[0] != n:
        raise ValidationError(f"{y.shape[0]} labels for {n} training points")
    if not np.all(np.isin(y, (-1, 1))):
        raise ValidationError("binary labels must be -1 or +1")
    if not (np.any(y == 1) and np.any(y == -1)):
        raise ValidationError("both classes must be present to train")
    return y.astype(float)


def _scale_diag(w, y):
    m = SQRT2 * np.abs(w)
    m[y * w < 0] = 0.0
    return m


def _dense_weights(Phi, m, Hbar, b):
    """Weight update ``M (M Phi'Phi M + I)^-1 M Phi'(Hbar - b)``.

    The inner solve is the ridge problem ``min |Phi M v - r|^2 + |v|^2``,
    done by least squares on the stacked system so that large scales in
    ``M`` do not square the condition number.
    """
    a = m.shape[0]
    A = np.vstack([Phi * m[None, :], np.eye(a)])
    r = np.concatenate([Hbar - b, np.zeros(a)])
    v = np.linalg.lstsq(A, r, rcond=None)[0]
    return m * v


def _bias_update(b, Hbar, fitted_sum, n):
    t = SQRT2 * abs(b)
    return t * t / (1.0 + t * t * n) * (float(Hbar.sum()) - fitted_sum)


def _finish_iteration(w, active, wa_new, y, threshold):
    ya = y[active]
    wa_new = np.where(ya * wa_new < 0, 0.0, wa_new)
    keep = np.abs(wa_new) > threshold
    w_new = np.zeros_like(w)
    w_new[active[keep]] = wa_new[keep]
    return w_new, active[keep]


def _initial_state(y):
    """Sign-feasible start ``w = y`` and ``b = 1``.

    The bias update is proportional to ``b^2``, so ``b = 0`` would never
    move.  Starting the weights at a small scale lets the prior prune every
    basis before the data term can grow them.
    """
    return y.copy(), INITIAL_BIAS


def _model(w, b, active, y, cfg, n, it):
    return PcvmModel(np.abs(w[active]), float(b), active.copy(),
                     y[active].astype(int), cfg.prune_threshold, n, it)


def train_pcvm_full(K, labels, cfg: TrainConfig = TrainConfig(), callback=None) -> PcvmModel:
    """EM training on the full kernel matrix.

    ``callback(iteration, w, b)`` is called after every iteration with the
    signed weight vector over all training points.
    """
    K = check_symmetric(K, name="kernel matrix")
    n = K.shape[0]
    if n > cfg.dense_cutoff:
        raise ValidationError(f"N={n} exceeds the dense cutoff {cfg.dense_cutoff}")
    y = _binary(labels, n)
    w, b = _initial_state(y)
    active = np.arange(n)
    for it in range(1, cfg.max_iters + 1):
        Phi = K[:, active]
        wa = w[active]
        Hbar = expected_latent(Phi @ wa + b, y)
        wa_new = _dense_weights(Phi, _scale_diag(wa, y[active]), Hbar, b)
        b = _bias_update(b, Hbar, float((Phi @ wa_new).sum()), n)
        w_new, active = _finish_iteration(w, active, wa_new, y, cfg.prune_threshold)
        delta = float(np.max(np.abs(w_new - w)))
        w = w_new
        if callback is not None:
            callback(it, w.copy(), b)
        if active.size == 0:
            raise NumericalError(f"all weights were pruned at iteration {it}")
        if delta <= cfg.tol:
            break
    return _model(w, b, active, y, cfg, n, it)


def upsilon_landmark_count(n_active: int, cfg: TrainConfig) -> int:
    m = math.ceil(cfg.upsilon_landmark_fraction * n_active)
    return min(n_active, max(2, min(cfg.upsilon_landmark_cap, m)))


def train_ny_pcvm(F: NystromFactors, labels, cfg: TrainConfig = TrainConfig(),
                  callback=None) -> PcvmModel:
    """EM training routed entirely through the Nyström factors.

    Products with the kernel use ``K1 = K_Nm`` and ``K2 = P K_Nm'``.  The
    inverse in the weight update is replaced by the Nyström pseudo-inverse of
    the system matrix, sampled on a fresh seeded set of active columns each
    iteration.  Once fewer than ``cfg.small_problem_cutoff`` bases remain the
    exact update on the reduced basis is used.
    """
    n = F.n
    y = _binary(labels, n)
    K1 = F.cross
    K2 = F.landmark_block_pinv @ K1.T
    K2K1 = K2 @ K1
    col_sums = K1.sum(axis=0)
    rng = np.random.default_rng(cfg.rng_seed)

    w, b = _initial_state(y)
    active = np.arange(n)
    for it in range(1, cfg.max_iters + 1):
        K2a = K2[:, active]
        wa = w[active]
        Hbar = expected_latent(K1 @ (K2a @ wa) + b, y)
        m = _scale_diag(wa, y[active])
        a = active.size
        if a < cfg.small_problem_cutoff:
            wa_new = _dense_weights(K1 @ K2a, m, Hbar, b)
        else:
            g = (Hbar @ K1) @ K2a - b * (col_sums @ K2a)
            k = upsilon_landmark_count(a, cfg)
            sel = np.sort(rng.choice(a, size=k, replace=False))
            cols = K1[active] @ (K2K1 @ K2a[:, sel])
            cols *= m[:, None]
            cols *= m[sel][None, :]
            cols[sel, np.arange(k)] += 1.0
            pinv = nystrom_pinv(NystromFactors.from_blocks(sel, cols))
            wa_new = m * pinv.matvec(m * g)
        b = _bias_update(b, Hbar, float(col_sums @ (K2a @ wa_new)), n)
        w_new, active = _finish_iteration(w, active, wa_new, y, cfg.prune_threshold)
        delta = float(np.max(np.abs(w_new - w)))
        w = w_new
        if callback is not None:
            callback(it, w.copy(), b)
        if active.size == 0:
            raise NumericalError(f"all weights were pruned at iteration {it}")
        if delta <= cfg.tol:
            break
    return _model(w, b, active, y, cfg, n, it)
