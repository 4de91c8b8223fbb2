"""Synthetic datasets for the desk-scale experiments."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .proximity import KernelFunction, LabeledDataset, double_center

BALL_RADII = (1.0, 1.1)
BALL_BOX = 10.0
ELM_WEIGHT_VARIANCE = 1.0
PE_MEAN = 1.07


def _check_n(n, what="n"):
    if n < 2:
        raise ValidationError(f"{what} must be at least 2, got {n}")


def ball_dissimilarities(centers, radii) -> np.ndarray:
    """Surface distances ``max(0, |c_a - c_b| - r_a - r_b)`` between balls."""
    centers = np.asarray(centers, dtype=float)
    radii = np.asarray(radii, dtype=float)
    diff = centers[:, None, :] - centers[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    D = np.maximum(0.0, dist - radii[:, None] - radii[None, :])
    np.fill_diagonal(D, 0.0)
    return D


def gen_ball(n_per_class: int = 100, seed: int = 0) -> LabeledDataset:
    """Balls of radius 1.0 (class 0) and 1.1 (class 1) placed uniformly in a
    10-cube; squared surface distances are double-centered into an
    indefinite similarity matrix."""
    _check_n(n_per_class, "n_per_class")
    rng = np.random.default_rng(seed)
    n = 2 * n_per_class
    centers = rng.uniform(0.0, BALL_BOX, size=(n, 3))
    labels = np.repeat([0, 1], n_per_class)
    radii = np.where(labels == 0, *BALL_RADII)
    D = ball_dissimilarities(centers, radii)
    S = double_center(D ** 2)
    return LabeledDataset(labels, kernel_matrix=S, name="ball",
                          meta={"n_per_class": n_per_class, "seed": seed})


def gen_checkerboard(n: int = 300, seed: int = 0,
                     weight_variance: float = ELM_WEIGHT_VARIANCE) -> LabeledDataset:
    """Uniform points on ``[0, 3)^2`` labelled by the parity of the cell."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    X = rng.uniform(0.0, 3.0, size=(n, 2))
    labels = (np.floor(X[:, 0]) + np.floor(X[:, 1])).astype(int) % 2
    return LabeledDataset(labels, points=X,
                          kernel=KernelFunction("elm-arcsine", weight_variance=weight_variance),
                          name="checkerboard", meta={"n": n, "seed": seed})


def gen_gauss_overlap(n: int = 200, seed: int = 0,
                      weight_variance: float = ELM_WEIGHT_VARIANCE) -> LabeledDataset:
    """Two unit-variance 2-D Gaussians whose means are 2 apart."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    means = np.array([[-1.0, 0.0], [1.0, 0.0]])
    X = means[labels] + rng.standard_normal((n, 2))
    return LabeledDataset(labels, points=X,
                          kernel=KernelFunction("elm-arcsine", weight_variance=weight_variance),
                          name="gauss_overlap", meta={"n": n, "seed": seed})


def gen_pe_gaussians(n: int = 200, seed: int = 0) -> LabeledDataset:
    """Two unit-variance Gaussians in the pseudo-Euclidean plane with
    signature (1, 1), means at ``+-(1.07, 1.07)``."""
    _check_n(n)
    rng = np.random.default_rng(seed)
    labels = np.arange(n) % 2
    means = np.array([[-PE_MEAN, -PE_MEAN], [PE_MEAN, PE_MEAN]])
    X = means[labels] + rng.standard_normal((n, 2))
    return LabeledDataset(labels, points=X,
                          kernel=KernelFunction("pseudo-euclidean", positive_dims=1),
                          name="pe_gaussians", meta={"n": n, "seed": seed})


MAG_LARGE = 500
MAG_SMALL = 20
MAG_NOISE = 0.1
MAG_SMALL_SPREAD = 0.1
MAG_SMALL_CENTERS = ((2.0, 0.0, 1.0), (-2.0, 0.0, 1.0))


def gen_magnification(seed: int = 0) -> LabeledDataset:
    """A dense 500-point class next to two sparse 20-point clusters.

    Class 0 is a 10-D Gaussian with unit spread in dimensions 0-1 and small
    noise in dimensions 3-9.  Class 1 consists of two small Gaussians centred
    at ``(+-2, 0, 1)`` that spread only along dimension 2.  With the linear
    kernel the classes are separated by dimension 2 alone, which the large
    class never uses.
    """
    rng = np.random.default_rng(seed)
    big = np.zeros((MAG_LARGE, 10))
    big[:, :2] = rng.standard_normal((MAG_LARGE, 2))
    big[:, 3:] = MAG_NOISE * rng.standard_normal((MAG_LARGE, 7))
    small = np.zeros((2 * MAG_SMALL, 10))
    small[:, :3] = np.repeat(MAG_SMALL_CENTERS, MAG_SMALL, axis=0)
    small[:, 2] += MAG_SMALL_SPREAD * rng.standard_normal(2 * MAG_SMALL)
    X = np.vstack([big, small])
    labels = np.repeat([0, 1], [MAG_LARGE, 2 * MAG_SMALL])
    return LabeledDataset(labels, points=X, kernel=KernelFunction("linear"),
                          name="magnification", meta={"seed": seed})


GENERATORS = {
    "ball": lambda n, seed: gen_ball(n, seed),
    "checkerboard": gen_checkerboard,
    "gauss_overlap": gen_gauss_overlap,
    "pe_gaussians": gen_pe_gaussians,
    "magnification": lambda n, seed: gen_magnification(seed),
}


def generate(name: str, n: int | None = None, seed: int = 0) -> LabeledDataset:
    """Dispatch by generator name; ``n`` is per class for ``ball`` and
    ignored for ``magnification``."""
    if name not in GENERATORS:
        raise ValidationError(f"unknown dataset {name!r}; choose from {sorted(GENERATORS)}")
    defaults = {"ball": 100, "checkerboard": 300, "gauss_overlap": 200,
                "pe_gaussians": 200, "magnification": 0}
    return GENERATORS[name](defaults[name] if n is None else n, seed)
