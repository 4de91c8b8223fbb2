"""Matrix builders and small oracles shared by the tests."""
from __future__ import annotations

import numpy as np


def signed_lowrank(n, p, q, seed):
    """Symmetric ``X diag(+1^p, -1^q) X'`` of rank ``p + q``."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p + q))
    J = np.concatenate([np.ones(p), -np.ones(q)])
    K = (X * J) @ X.T
    return 0.5 * (K + K.T)


def rel_fro(A, B):
    return np.linalg.norm(A - B) / np.linalg.norm(B)


def sorted_by_magnitude(values):
    values = np.asarray(values)
    return values[np.argsort(-np.abs(values), kind="stable")]


def independent_landmarks(K, r, seed=0):
    """``r`` indices whose landmark block has full rank ``r``."""
    rng = np.random.default_rng(seed)
    while True:
        idx = np.sort(rng.choice(K.shape[0], size=r, replace=False))
        if np.linalg.matrix_rank(K[np.ix_(idx, idx)]) == r:
            return idx


def min_enclosing_circle(P, seed=0):
    """Exact smallest enclosing circle of 2-D points (Welzl, iterative)."""
    P = np.asarray(P, dtype=float)[np.random.default_rng(seed).permutation(len(P))]

    def two(a, b):
        c = (a + b) / 2
        return c, np.linalg.norm(a - c)

    def three(a, b, c):
        ax, ay = a
        bx, by = b
        cx, cy = c
        d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
        if abs(d) < 1e-14:
            pts = [a, b, c]
            best = max(((pts[i], pts[j]) for i in range(3) for j in range(i + 1, 3)),
                       key=lambda ab: np.linalg.norm(ab[0] - ab[1]))
            return two(*best)
        ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay)
              + (cx**2 + cy**2) * (ay - by)) / d
        uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx)
              + (cx**2 + cy**2) * (bx - ax)) / d
        ctr = np.array([ux, uy])
        return ctr, np.linalg.norm(a - ctr)

    def inside(circ, p):
        return np.linalg.norm(p - circ[0]) <= circ[1] * (1 + 1e-12) + 1e-12

    circ = (P[0], 0.0)
    for i in range(1, len(P)):
        if inside(circ, P[i]):
            continue
        circ = (P[i], 0.0)
        for j in range(i):
            if inside(circ, P[j]):
                continue
            circ = two(P[i], P[j])
            for k in range(j):
                if not inside(circ, P[k]):
                    circ = three(P[i], P[j], P[k])
    return circ
