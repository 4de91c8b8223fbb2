"""One-vs-rest reduction for the binary classifiers."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NyKernelError, ValidationError


@dataclass(frozen=True)
class OneVsRestModel:
    """Binary models keyed by class.  With two classes a single model is
    kept for the lowest class and the other class gets the complement."""

    classes: np.ndarray
    models: tuple

    def class_scores(self, kernel_rows) -> np.ndarray:
        """Per-class posteriors, shape ``(t, n_classes)``."""
        rows = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
        if len(self.classes) == 2:
            p = self.models[0].predict_proba(rows)
            return np.column_stack([p, 1.0 - p])
        return np.column_stack([m.predict_proba(rows) for m in self.models])

    def predict(self, kernel_rows) -> np.ndarray:
        if len(self.classes) == 2:
            # keep the binary model's own decision rule
            rows = np.atleast_2d(np.asarray(kernel_rows, dtype=float))
            return np.where(self.models[0].predict(rows) == 1, *self.classes)
        # argmax returns the first maximum, i.e. the lowest class id on ties
        return self.classes[np.argmax(self.class_scores(kernel_rows), axis=1)]


def one_vs_rest_train(trainer, labels) -> OneVsRestModel:
    """Train ``trainer(binary_labels)`` once per class (class = +1).

    ``trainer`` closes over the kernel data and the configuration; errors
    from a sub-problem are re-raised naming the class.
    """
    labels = np.asarray(labels).astype(int).ravel()
    classes = np.unique(labels)
    if classes.size < 2:
        raise ValidationError("one-vs-rest needs at least two classes")
    targets = classes[:1] if classes.size == 2 else classes
    models = []
    for c in targets:
        try:
            models.append(trainer(np.where(labels == c, 1, -1)))
        except NyKernelError as exc:
            raise type(exc)(f"class {c}: {exc}") from exc
    return OneVsRestModel(classes, tuple(models))


def one_vs_rest_predict(model: OneVsRestModel, kernel_rows):
    """Predicted labels and the per-class score matrix."""
    return model.predict(kernel_rows), model.class_scores(kernel_rows)
