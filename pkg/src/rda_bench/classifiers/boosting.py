"""Boosted decision stumps: AdaBoost (exponential reweighting) and gradient
boosting with logistic loss.

Both trainers are binary; multiclass goes through the one-vs-rest wrapper.
The per-feature threshold scans run on the kernel backend.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .._kernels import mse_scan, stump_scan

logger = logging.getLogger(__name__)

_EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class Stump:
    """Depth-1 threshold rule: polarity +1 predicts +1 strictly right of the cut."""

    feature: int
    threshold: float
    polarity: int

    def predict(self, X: np.ndarray) -> np.ndarray:
        raw = np.where(X[:, self.feature] > self.threshold, 1.0, -1.0)
        return self.polarity * raw


def _cut_threshold(xs: np.ndarray, m: int) -> float:
    if m == 0:
        return float(xs[0] - 1.0)
    if m == xs.size:
        return float(xs[-1] + 1.0)
    return float(0.5 * (xs[m - 1] + xs[m]))


def best_stump(X: np.ndarray, y: np.ndarray, w: np.ndarray) -> tuple[Stump, float]:
    """Minimum weighted-error stump over all features and thresholds.

    Ties break toward the lowest feature index, lowest cut, polarity +1.
    """
    n, d = X.shape
    w_total = float(np.sum(w))
    w_neg = float(np.sum(w[y < 0]))
    sw = w * y
    best = None
    best_err = np.inf
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = np.ascontiguousarray(X[order, j])
        err, m, pol = stump_scan(xs, np.ascontiguousarray(sw[order]), w_neg, w_total)
        if err < best_err:
            best_err = err
            best = Stump(feature=j, threshold=_cut_threshold(xs, m), polarity=pol)
    return best, best_err


@dataclass
class AdaboostModel:
    stumps: list[Stump]
    alphas: list[float]
    epsilons: list[float]
    zs: list[float]
    weight_sums: list[float] = field(default_factory=list)  # sum D_t after each round

    @property
    def rounds(self) -> int:
        return len(self.stumps)


def adaboost_train(X: np.ndarray, y: np.ndarray, rounds: int = 100) -> AdaboostModel:
    """Boost decision stumps under the exponential reweighting rule.

    Weights start at 1/N; each round stores the best stump under the current
    distribution with alpha = 0.5 ln((1-eps)/eps) and renormalizes. Training
    stops early when no stump beats chance (eps >= 0.5, round discarded) or
    when a stump is perfect (eps floored at 1e-12 so alpha stays finite).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("both labels must be present")

    w = np.full(n, 1.0 / n)
    model = AdaboostModel(stumps=[], alphas=[], epsilons=[], zs=[])
    for _ in range(rounds):
        stump, eps = best_stump(X, y, w)
        if eps >= 0.5:
            break
        eps_eff = max(eps, _EPS_FLOOR)
        alpha = 0.5 * np.log((1.0 - eps_eff) / eps_eff)
        h = stump.predict(X)
        unnorm = w * np.exp(-alpha * y * h)
        z = float(np.sum(unnorm))
        w = unnorm / z
        model.stumps.append(stump)
        model.alphas.append(float(alpha))
        model.epsilons.append(float(eps))
        model.zs.append(z)
        model.weight_sums.append(float(np.sum(w)))
        if eps <= _EPS_FLOOR:
            break
    return model


def adaboost_scores(model: AdaboostModel, X: np.ndarray) -> np.ndarray:
    """Weighted vote sum_t alpha_t h_t(x) (sign of this is the binary decision)."""
    X = np.asarray(X, dtype=np.float64)
    scores = np.zeros(X.shape[0])
    for stump, alpha in zip(model.stumps, model.alphas):
        scores += alpha * stump.predict(X)
    return scores


# ---------------------------------------------------------------------------
# Gradient boosting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionStump:
    feature: int
    threshold: float
    left_value: float
    right_value: float

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.where(X[:, self.feature] > self.threshold, self.right_value, self.left_value)


def fit_regression_stump(X: np.ndarray, r: np.ndarray) -> RegressionStump:
    """Least-squares stump on residuals; degenerates to a constant when no cut exists."""
    n, d = X.shape
    best = None
    best_gain = -np.inf
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = np.ascontiguousarray(X[order, j])
        gain, m, sum_left, total = mse_scan(xs, np.ascontiguousarray(r[order]))
        if m > 0 and gain > best_gain:
            best_gain = gain
            best = RegressionStump(
                feature=j,
                threshold=_cut_threshold(xs, m),
                left_value=sum_left / m,
                right_value=(total - sum_left) / (n - m),
            )
    if best is None:
        mean = float(np.mean(r))
        best = RegressionStump(feature=0, threshold=0.0, left_value=mean, right_value=mean)
    return best


@dataclass
class GbdtBinaryModel:
    stages: list[RegressionStump] = field(default_factory=list)
    losses: list[float] = field(default_factory=list)
    learning_rate: float = 0.1


def _logistic_loss(y: np.ndarray, f: np.ndarray) -> float:
    return float(np.sum(np.logaddexp(0.0, -y * f)))


def gbdt_train_binary(X: np.ndarray, y: np.ndarray, rounds: int = 100,
                      learning_rate: float = 0.1) -> GbdtBinaryModel:
    """Stage-wise logistic-loss descent; each stage is a stump fit to the
    negative gradient.

    A stage whose step would raise the loss has its contribution halved until
    the loss is non-increasing, so the recorded loss trace never goes up.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    model = GbdtBinaryModel(learning_rate=learning_rate)
    f = np.zeros(X.shape[0])
    model.losses.append(_logistic_loss(y, f))
    for _ in range(rounds):
        residual = y / (1.0 + np.exp(y * f))
        stump = fit_regression_stump(X, residual)
        step = learning_rate * stump.predict(X)
        scale = 1.0
        for _ in range(40):
            loss = _logistic_loss(y, f + scale * step)
            if loss <= model.losses[-1] + 1e-12:
                break
            scale *= 0.5
        else:
            scale = 0.0
            loss = model.losses[-1]
        model.stages.append(
            RegressionStump(
                feature=stump.feature,
                threshold=stump.threshold,
                left_value=scale * learning_rate * stump.left_value,
                right_value=scale * learning_rate * stump.right_value,
            )
        )
        f = f + model.stages[-1].predict(X)
        model.losses.append(_logistic_loss(y, f))
    return model


def gbdt_scores(model: GbdtBinaryModel, X: np.ndarray) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    f = np.zeros(X.shape[0])
    for stage in model.stages:
        f += stage.predict(X)
    return f
