"""Soft-margin SVM trained by pairwise ascent on the dual (SMO).

The dual maximizes L(alpha) = sum alpha_i - 1/2 sum_ij alpha_i alpha_j y_i
y_j K(x_i, x_j) subject to 0 <= alpha_i <= C and sum alpha_i y_i = 0; the
working pair is updated analytically and the bias is recovered from the
margin support vectors. Everything is deterministic: the second index is
chosen by the largest error gap with ascending-index tie-breaks.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

logger = logging.getLogger(__name__)


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (m, d)
    sv_alpha: np.ndarray         # (m,)
    sv_labels: np.ndarray        # (m,) in {-1, +1}
    bias: float
    kernel: str
    gamma: float | None
    C: float
    converged: bool


def kernel_matrix(A: np.ndarray, B: np.ndarray, kernel: str, gamma: float | None) -> np.ndarray:
    if kernel == "linear":
        return A @ B.T
    if kernel == "rbf":
        sq = (
            np.sum(A * A, axis=1)[:, None]
            - 2.0 * (A @ B.T)
            + np.sum(B * B, axis=1)[None, :]
        )
        return np.exp(-gamma * np.maximum(sq, 0.0))
    raise ValueError(f"unknown kernel {kernel!r}")


def svm_train(X: np.ndarray, y: np.ndarray, kernel: str = "linear", C: float = 1.0,
              gamma: float | None = None, tol: float = 1e-3,
              max_sweeps: int = 1000) -> SvmModel:
    """Train a binary soft-margin SVM; y must contain both +1 and -1.

    Returns the best iterate with converged=False if the KKT conditions are
    not met within max_sweeps full passes (dual ascent never decreases, so
    the final iterate is the best).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if not (np.any(y > 0) and np.any(y < 0)):
        raise ValueError("both labels must be present")
    if C <= 0:
        raise ValueError("C must be positive")
    if kernel == "rbf" and gamma is None:
        gamma = 1.0 / X.shape[1]

    K = kernel_matrix(X, X, kernel, gamma)
    alpha = np.zeros(n)
    b = 0.0
    # errors[i] = decision(x_i) - y_i, kept incrementally up to date
    errors = -y.copy()

    def take_step(i: int, j: int) -> bool:
        nonlocal b
        if i == j:
            return False
        a_i, a_j = alpha[i], alpha[j]
        if y[i] != y[j]:
            lo, hi = max(0.0, a_j - a_i), min(C, C + a_j - a_i)
        else:
            lo, hi = max(0.0, a_i + a_j - C), min(C, a_i + a_j)
        if lo >= hi:
            return False
        eta = K[i, i] + K[j, j] - 2.0 * K[i, j]
        if eta <= 0.0:
            return False
        a_j_new = a_j + y[j] * (errors[i] - errors[j]) / eta
        a_j_new = min(max(a_j_new, lo), hi)
        if abs(a_j_new - a_j) < 1e-12 * (a_j_new + a_j + 1e-12):
            return False
        a_i_new = a_i + y[i] * y[j] * (a_j - a_j_new)

        b1 = b - errors[i] - y[i] * (a_i_new - a_i) * K[i, i] - y[j] * (a_j_new - a_j) * K[i, j]
        b2 = b - errors[j] - y[i] * (a_i_new - a_i) * K[i, j] - y[j] * (a_j_new - a_j) * K[j, j]
        i_free = 0.0 < a_i_new < C
        j_free = 0.0 < a_j_new < C
        if i_free:
            b_new = b1
        elif j_free:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        errors[:] += (
            y[i] * (a_i_new - a_i) * K[i]
            + y[j] * (a_j_new - a_j) * K[j]
            + (b_new - b)
        )
        alpha[i], alpha[j] = a_i_new, a_j_new
        b = b_new
        return True

    def examine(i: int) -> bool:
        r = errors[i] * y[i]
        if not ((r < -tol and alpha[i] < C) or (r > tol and alpha[i] > 0)):
            return False
        nonbound = np.nonzero((alpha > 0) & (alpha < C))[0]
        if nonbound.size > 1:
            j = int(nonbound[np.argmax(np.abs(errors[i] - errors[nonbound]))])
            if take_step(i, j):
                return True
        for j in nonbound:
            if take_step(i, int(j)):
                return True
        for j in range(n):
            if take_step(i, j):
                return True
        return False

    examine_all = True
    converged = False
    for _ in range(max_sweeps):
        changed = 0
        if examine_all:
            idxs = range(n)
        else:
            idxs = np.nonzero((alpha > 0) & (alpha < C))[0]
        for i in idxs:
            changed += examine(int(i))
        if examine_all:
            if changed == 0:
                converged = True
                break
            examine_all = False
        elif changed == 0:
            examine_all = True
    if not converged:
        logger.warning("SMO stopped after %d sweeps without meeting KKT tolerance", max_sweeps)

    # bias from the margin support vectors: b = y_i - sum_j alpha_j y_j K(x_j, x_i)
    raw = K @ (alpha * y)
    margin = np.nonzero((alpha > 1e-8) & (alpha < C - 1e-8 * C))[0]
    if margin.size:
        b = float(np.mean(y[margin] - raw[margin]))

    keep = np.nonzero(alpha > 1e-12)[0]
    return SvmModel(
        support_vectors=X[keep].copy(),
        sv_alpha=alpha[keep].copy(),
        sv_labels=y[keep].copy(),
        bias=b,
        kernel=kernel,
        gamma=gamma,
        C=C,
        converged=converged,
    )


def svm_decision(model: SvmModel, X: np.ndarray) -> np.ndarray:
    """Signed margin f(x) = sum_i alpha_i y_i K(x_i, x) + b."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if model.support_vectors.size == 0:
        return np.full(X.shape[0], model.bias)
    K = kernel_matrix(X, model.support_vectors, model.kernel, model.gamma)
    return K @ (model.sv_alpha * model.sv_labels) + model.bias


def svm_weight_vector(model: SvmModel) -> np.ndarray:
    """Primal weight vector (linear kernel only)."""
    if model.kernel != "linear":
        raise ValueError("weight vector only exists for the linear kernel")
    return (model.sv_alpha * model.sv_labels) @ model.support_vectors
