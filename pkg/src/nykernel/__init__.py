"""Probabilistic classification on large low-rank indefinite kernel matrices."""
from .config import TrainConfig
from .errors import NotPSDError, NumericalError, NyKernelError, ValidationError
from .landmarks import (LandmarkReport, MEBSolution, kmeans_landmarks, margin_score,
                        meb_coreset, meb_landmarks, random_landmarks, smss)
from .lowrank import LowRankEvd, LowRankPinv, nystrom_evd, nystrom_pinv, nystrom_square
from .proximity import (KernelFunction, LabeledDataset, NystromFactors, double_center,
                        nystrom_extend, nystrom_factorize, nystrom_reconstruct,
                        pe_embedding, row_sums, sim_to_dissim)

__version__ = "0.1.0"

__all__ = [
    "TrainConfig", "NotPSDError", "NumericalError", "NyKernelError", "ValidationError",
    "LandmarkReport", "MEBSolution", "kmeans_landmarks", "margin_score", "meb_coreset",
    "meb_landmarks", "random_landmarks", "smss",
    "LowRankEvd", "LowRankPinv", "nystrom_evd", "nystrom_pinv", "nystrom_square",
    "KernelFunction", "LabeledDataset", "NystromFactors", "double_center",
    "nystrom_extend", "nystrom_factorize", "nystrom_reconstruct", "pe_embedding",
    "row_sums", "sim_to_dissim",
]
