"""Training configuration shared by the classifiers and the harness."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import ValidationError


@dataclass(frozen=True)
class TrainConfig:
    max_iters: int = 500
    prune_threshold: float = 1e-4
    meb_epsilon: float = 0.01
    upsilon_landmark_fraction: float = 0.01
    upsilon_landmark_cap: int = 500
    small_problem_cutoff: int = 100
    rng_seed: int = 0
    dense_cutoff: int = 3000
    tol: float = 1e-6

    def __post_init__(self):
        if self.max_iters < 1 or self.upsilon_landmark_cap < 1 or self.dense_cutoff < 1:
            raise ValidationError("iteration and size limits must be positive")
        if not (self.prune_threshold > 0 and self.meb_epsilon > 0 and self.tol > 0):
            raise ValidationError("thresholds must be positive")
        if not 0 < self.upsilon_landmark_fraction <= 1:
            raise ValidationError("upsilon_landmark_fraction must lie in (0, 1]")
        if self.small_problem_cutoff < 0:
            raise ValidationError("small_problem_cutoff must be >= 0")

    def as_dict(self) -> dict:
        return asdict(self)
