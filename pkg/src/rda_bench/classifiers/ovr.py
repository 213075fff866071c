"""One-vs-rest reduction: one binary model per class, argmax of real scores.

A class absent from a training fold gets no model and scores -inf, so the
argmax still returns a class even when every binary model declines.
"""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


class OneVsRest:
    """Wraps a binary trainer into a multiclass model over fixed class codes."""

    def __init__(self, fit_binary, score_binary, n_classes: int):
        self.fit_binary = fit_binary
        self.score_binary = score_binary
        self.n_classes = n_classes
        self.models: list = []

    def fit(self, X: np.ndarray, codes: np.ndarray) -> "OneVsRest":
        if np.unique(codes).size < 2:
            raise ValueError("one-vs-rest needs at least 2 classes present")
        self.models = []
        for c in range(self.n_classes):
            y = np.where(codes == c, 1.0, -1.0)
            if not np.any(y > 0):
                logger.warning("class %d absent from training fold; scoring -inf", c)
                self.models.append(None)
                continue
            if not np.any(y < 0):
                logger.warning("class %d is the only class in this fold", c)
                self.models.append(None)
                continue
            self.models.append(self.fit_binary(X, y, c))
        return self

    def scores(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.full((X.shape[0], self.n_classes), -np.inf)
        for c, model in enumerate(self.models):
            if model is not None:
                out[:, c] = self.score_binary(model, X)
        return out

    def predict_codes(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.scores(X), axis=1)
