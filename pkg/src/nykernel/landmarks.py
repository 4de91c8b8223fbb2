"""Landmark selection for Nyström approximations.

The supervised selector runs a core-set minimum enclosing ball per class
and keeps the support points.  k-means and uniform sampling are provided as
baselines, together with the supervised matrix similarity score used to
compare the resulting approximations.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotPSDError, NumericalError, ValidationError
from .proximity import LabeledDataset, NystromFactors, check_symmetric

CORE_WEIGHT_TOL = 1e-8
INDEFINITE_RTOL = 1e-10


@dataclass(frozen=True)
class MEBSolution:
    """Approximate minimum enclosing ball in kernel feature space.

    ``core_set`` indexes into the class subset; ``dual_weights`` are aligned
    with it and sum to one.
    """

    core_set: np.ndarray
    dual_weights: np.ndarray
    radius: float
    epsilon: float
    iterations: int = 0


@dataclass
class LandmarkReport:
    indices: np.ndarray
    method: str
    per_class_counts: dict = field(default_factory=dict)
    smss: float | None = None
    epsilon: float | None = None
    m: int | None = None
    seed: int | None = None

    @property
    def count(self) -> int:
        return int(len(self.indices))


# --------------------------------------------------------------------------
# minimum enclosing ball


def _simplex_fw(Q, d, alpha, gap_tol, max_iter=100_000):
    """Maximize ``alpha'd - alpha'Q alpha`` over the simplex.

    Away-step Frank-Wolfe with exact line search, stopped on the duality
    gap.  Minimizes ``g(alpha) = alpha'Q alpha - alpha'd`` internally.
    """
    alpha = alpha.copy()
    Qa = Q @ alpha
    for _ in range(max_iter):
        grad = 2.0 * Qa - d
        s = int(np.argmin(grad))
        gap = float(grad @ alpha - grad[s])
        if gap <= gap_tol:
            break
        support = np.flatnonzero(alpha > 0)
        a = support[np.argmax(grad[support])]
        away_gap = float(grad[a] - grad @ alpha)
        if gap >= away_gap:
            direction = -alpha.copy()
            direction[s] += 1.0
            step_max = 1.0
        else:
            direction = alpha.copy()
            direction[a] -= 1.0
            step_max = alpha[a] / (1.0 - alpha[a]) if alpha[a] < 1.0 else np.inf
        Qdir = Q @ direction
        curv = 2.0 * float(direction @ Qdir)
        slope = float(grad @ direction)
        step = step_max if curv <= 0 else min(step_max, -slope / curv)
        if step <= 0:
            break
        alpha += step * direction
        alpha[alpha < 1e-15] = 0.0
        alpha /= alpha.sum()
        Qa = Q @ alpha
    return alpha


def _as_kernel(kernel):
    K = np.asarray(kernel, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValidationError("class kernel must be a square matrix")
    return K


def meb_coreset(class_kernel, epsilon: float = 0.01, rng=None,
                max_iter: int | None = None) -> MEBSolution:
    """Core-set (1+epsilon) minimum enclosing ball on a psd kernel block.

    Distances are taken in feature space from kernel values only.  The loop
    starts from a random point and the point farthest from it, solves the
    dual on the current core set and adds the farthest uncovered point
    until every point lies within ``R (1 + epsilon)``.
    """
    K = _as_kernel(class_kernel)
    n = K.shape[0]
    if n < 2:
        raise ValidationError("the enclosing ball needs at least two points")
    if not epsilon > 0:
        raise ValidationError("epsilon must be positive")
    rng = np.random.default_rng(rng)
    if max_iter is None:
        max_iter = math.ceil(2.0 / epsilon ** 2)
    diag = np.diag(K).copy()
    scale = max(1.0, float(np.max(np.abs(diag))))
    neg_tol = 1e-9 * scale

    i = int(rng.integers(n))
    d_i = diag + diag[i] - 2.0 * K[:, i]
    if np.min(d_i) < -neg_tol:
        raise NotPSDError("negative squared feature distance; square an indefinite "
                          "kernel (K @ K.T) before computing the enclosing ball")
    k = int(np.argmax(d_i))
    if k == i:
        k = (i + 1) % n
    S = [i, k]
    alpha = np.array([0.5, 0.5])
    radius_sq = 0.0
    it = 0
    while True:
        it += 1
        KS = K[np.ix_(S, S)]
        alpha = _simplex_fw(KS, diag[S], alpha, gap_tol=1e-9 * scale)
        quad = float(alpha @ KS @ alpha)
        radius_sq = max(float(alpha @ diag[S]) - quad, 0.0)
        dist = diag - 2.0 * (K[:, S] @ alpha) + quad
        if np.min(dist) < -neg_tol:
            raise NotPSDError("negative squared feature distance; square an indefinite "
                              "kernel (K @ K.T) before computing the enclosing ball")
        far = int(np.argmax(dist))
        if dist[far] <= radius_sq * (1.0 + epsilon) ** 2 or it >= max_iter:
            break
        if far in S:
            break
        S.append(far)
        alpha = np.append(alpha, 0.0)

    S = np.asarray(S)
    core = alpha > CORE_WEIGHT_TOL
    if core.sum() < 2:
        core[np.argsort(-alpha, kind="stable")[:2]] = True
    order = np.argsort(S[core])
    w = alpha[core][order]
    return MEBSolution(S[core][order], w / w.sum(), math.sqrt(radius_sq), epsilon, it)


def is_indefinite(K, rtol: float = INDEFINITE_RTOL) -> bool:
    lam = np.linalg.eigvalsh(0.5 * (K + K.T))
    top = float(np.max(np.abs(lam)))
    return top > 0 and float(lam.min()) < -rtol * top


def meb_landmarks(data: LabeledDataset, epsilon: float = 0.01, seed: int = 0,
                  indefinite: bool | None = None) -> LandmarkReport:
    """Supervised landmarks: union of the per-class enclosing-ball core sets.

    An indefinite class block (or any block when ``indefinite`` is true) is
    replaced by its square ``K_c K_c'`` first.
    """
    counts = {}
    chosen = []
    for c_pos, c in enumerate(data.classes):
        idx = np.flatnonzero(data.labels == c)
        if idx.size < 2:
            raise ValidationError(f"class {c} has {idx.size} point(s); need at least 2")
        Kc = data.block(idx, idx)
        square = is_indefinite(Kc) if indefinite is None else indefinite
        if square:
            Kc = Kc @ Kc.T
        rng = np.random.default_rng([seed, c_pos])
        sol = meb_coreset(Kc, epsilon, rng)
        counts[int(c)] = int(sol.core_set.size)
        chosen.append(idx[sol.core_set])
    indices = np.unique(np.concatenate(chosen))
    return LandmarkReport(indices, "meb", counts, epsilon=epsilon, seed=seed)


# --------------------------------------------------------------------------
# baselines


def _squared_features(source):
    """Euclidean vectors whose Gram matrix is ``K K'``."""
    if isinstance(source, NystromFactors):
        P = source.landmark_block_pinv
        G = P @ (source.cross.T @ source.cross) @ P
        lam, U = np.linalg.eigh(0.5 * (G + G.T))
        root = (U * np.sqrt(np.clip(lam, 0.0, None))) @ U.T
        return source.cross @ root
    if isinstance(source, LabeledDataset):
        return source.block()
    return check_symmetric(source, name="kernel matrix")


def kmeans_landmarks(source, m: int, seed: int = 0, max_iter: int = 50,
                     labels=None) -> LandmarkReport:
    """Landmarks from kernel k-means on the squared (psd) kernel ``K K'``.

    Kernel k-means on ``K K'`` equals Lloyd's algorithm on the rows of
    ``K``.  Each cluster contributes the member closest to its mean.
    """
    Z = _squared_features(source)
    n = Z.shape[0]
    if not 1 <= m <= n:
        raise ValidationError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    centers = Z[rng.choice(n, size=m, replace=False)].copy()
    sq = np.einsum("ij,ij->i", Z, Z)
    assign = None
    for _ in range(max_iter):
        dist = sq[:, None] - 2.0 * Z @ centers.T + np.einsum("ij,ij->i", centers, centers)[None, :]
        new = np.argmin(dist, axis=1)
        if assign is not None and np.array_equal(new, assign):
            break
        assign = new
        for j in range(m):
            members = assign == j
            if members.any():
                centers[j] = Z[members].mean(axis=0)
    dist = sq[:, None] - 2.0 * Z @ centers.T + np.einsum("ij,ij->i", centers, centers)[None, :]
    picked = set()
    for j in range(m):
        members = np.flatnonzero(assign == j)
        if members.size == 0:
            continue
        best = members[np.argmin(dist[members, j])]
        picked.add(int(best))
    # empty clusters or ties leave gaps; fill them with the points nearest to any center
    if len(picked) < m:
        for i in np.argsort(dist.min(axis=1), kind="stable"):
            if len(picked) == m:
                break
            picked.add(int(i))
    indices = np.array(sorted(picked))
    counts = {}
    if labels is not None:
        labels = np.asarray(labels)
        counts = {int(c): int(np.sum(labels[indices] == c)) for c in np.unique(labels)}
    return LandmarkReport(indices, "kmeans", counts, m=m, seed=seed)


def random_landmarks(n: int, m: int, seed: int = 0) -> LandmarkReport:
    """``m`` distinct uniformly drawn indices out of ``n``, sorted."""
    if not 1 <= m <= n:
        raise ValidationError(f"need 1 <= m <= n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    return LandmarkReport(np.sort(rng.choice(n, size=m, replace=False)), "random",
                          m=m, seed=seed)


# --------------------------------------------------------------------------
# supervised matrix similarity score


def _margin_dense(K, labels):
    total = 0.0
    for c in np.unique(labels):
        ins = labels == c
        out = ~ins
        n_in = int(ins.sum())
        block = K[np.ix_(ins, ins)]
        pairs = n_in * (n_in - 1)
        within = (block.sum() - np.trace(block)) / pairs if pairs else 0.0
        between = K[np.ix_(ins, out)].mean()
        total += abs(within - between)
    return total


def _margin_factors(F: NystromFactors, labels):
    CP = F.cross @ F.landmark_block_pinv
    diag = np.einsum("ij,ij->i", CP, F.cross)
    col = F.cross.sum(axis=0)
    total = 0.0
    for c in np.unique(labels):
        ins = labels == c
        n_in, n_out = int(ins.sum()), int((~ins).sum())
        s_in = CP[ins].sum(axis=0)
        in_sum = float(s_in @ F.cross[ins].sum(axis=0))
        out_sum = float(s_in @ (col - F.cross[ins].sum(axis=0)))
        pairs = n_in * (n_in - 1)
        within = (in_sum - diag[ins].sum()) / pairs if pairs else 0.0
        total += abs(within - out_sum / (n_in * n_out))
    return total


def margin_score(S, labels) -> float:
    """Class margin statistic: for each class, the gap between the mean
    within-class similarity (self-pairs excluded) and the mean similarity
    to the other classes, summed over classes."""
    labels = np.asarray(labels)
    if np.unique(labels).size < 2:
        raise ValidationError("the margin score needs at least two classes")
    if isinstance(S, NystromFactors):
        return _margin_factors(S, labels)
    return _margin_dense(np.asarray(S, dtype=float), labels)


def smss(approx, original, labels) -> float:
    """Supervised matrix similarity score ``f(approx) / f(original)``."""
    denom = margin_score(original, labels)
    if denom == 0.0:
        raise NumericalError("score undefined: the original matrix has zero class margin")
    return margin_score(approx, labels) / denom
