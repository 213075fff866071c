"""Quadratic discriminant analysis: per-class Gaussian MLE with shrinkage.

Covariances are shrunk toward their diagonal, Sigma <- (1-rho) Sigma +
rho diag(Sigma), and ridge-regularized until positive-definite so small
per-subject folds cannot produce singular models.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class QdaModel:
    means: np.ndarray       # (C, d)
    covariances: np.ndarray  # (C, d, d)
    log_priors: np.ndarray  # (C,)
    present: np.ndarray     # (C,) bool; classes absent from training score -inf


def qda_fit(X: np.ndarray, codes: np.ndarray, n_classes: int,
            shrinkage: float = 0.1, reg: float = 1e-6) -> QdaModel:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    codes = np.asarray(codes, dtype=np.int64)
    n, d = X.shape
    means = np.zeros((n_classes, d))
    covs = np.stack([np.eye(d) for _ in range(n_classes)])
    log_priors = np.full(n_classes, -np.inf)
    present = np.zeros(n_classes, dtype=bool)
    for c in range(n_classes):
        rows = X[codes == c]
        if rows.shape[0] == 0:
            logger.warning("QDA: class %d absent from training data", c)
            continue
        present[c] = True
        log_priors[c] = np.log(rows.shape[0] / n)
        means[c] = rows.mean(axis=0)
        diff = rows - means[c]
        cov = diff.T @ diff / rows.shape[0]
        cov = (1.0 - shrinkage) * cov + shrinkage * np.diag(np.diag(cov))
        ridge = reg
        while True:
            try:
                np.linalg.cholesky(cov + ridge * np.eye(d))
                break
            except np.linalg.LinAlgError:
                logger.warning("QDA: class %d covariance still singular, ridge -> %g",
                               c, ridge * 10)
                ridge *= 10.0
        covs[c] = cov + ridge * np.eye(d)
    return QdaModel(means=means, covariances=covs, log_priors=log_priors, present=present)


def qda_scores(model: QdaModel, X: np.ndarray) -> np.ndarray:
    """Per-class log prior + log density (n_rows, n_classes)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, d = X.shape
    n_classes = model.means.shape[0]
    scores = np.full((n, n_classes), -np.inf)
    for c in range(n_classes):
        if not model.present[c]:
            continue
        chol = np.linalg.cholesky(model.covariances[c])
        sol = np.linalg.solve(chol, (X - model.means[c]).T)
        quad = np.sum(sol * sol, axis=0)
        log_det = 2.0 * np.sum(np.log(np.diag(chol)))
        scores[:, c] = model.log_priors[c] - 0.5 * (
            d * np.log(2.0 * np.pi) + log_det + quad
        )
    return scores


def qda_predict(model: QdaModel, X: np.ndarray) -> np.ndarray:
    return np.argmax(qda_scores(model, X), axis=1)
