"""Gaussian mixture models: EM fitting, BIC component selection, classification.

One mixture is fit per class; a test vector goes to the class whose mixture
assigns it the greatest likelihood. Also provides the closed-form Gaussian
Kullback-Leibler divergence used as a class-separability diagnostic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)

COV_REG = 1e-6


@dataclass
class GmmModel:
    """One fitted mixture: simplex weights, means, SPD covariances."""

    weights: np.ndarray        # (K,)
    means: np.ndarray          # (K, d)
    covariances: np.ndarray    # (K, d, d) for "full", (K, d) for "diag"
    cov_type: str
    log_likelihoods: list[float] = field(default_factory=list)
    converged: bool = True

    @property
    def n_components(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def parameter_count(self) -> int:
        k, d = self.n_components, self.dim
        cov_params = k * d * (d + 1) // 2 if self.cov_type == "full" else k * d
        return (k - 1) + k * d + cov_params


def _logsumexp(a: np.ndarray, axis: int = -1) -> np.ndarray:
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.squeeze(m, axis=axis) + np.log(np.sum(np.exp(a - m), axis=axis))


def _component_log_pdf(X: np.ndarray, mean: np.ndarray, cov, cov_type: str) -> np.ndarray:
    d = X.shape[1]
    diff = X - mean
    if cov_type == "diag":
        return -0.5 * (
            d * np.log(2.0 * np.pi) + np.sum(np.log(cov)) + np.sum(diff * diff / cov, axis=1)
        )
    chol = np.linalg.cholesky(cov)
    sol = np.linalg.solve(chol, diff.T)
    quad = np.sum(sol * sol, axis=0)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    return -0.5 * (d * np.log(2.0 * np.pi) + log_det + quad)


def _weighted_log_pdfs(model: GmmModel, X: np.ndarray) -> np.ndarray:
    lp = np.empty((X.shape[0], model.n_components))
    for k in range(model.n_components):
        lp[:, k] = _component_log_pdf(X, model.means[k], model.covariances[k], model.cov_type)
    return lp + np.log(model.weights)


def gmm_log_density(model: GmmModel, X: np.ndarray) -> np.ndarray:
    """log p(x | model) per row of X."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.dim:
        raise ValueError(f"dimension mismatch: model is {model.dim}-d, data is {X.shape[1]}-d")
    return _logsumexp(_weighted_log_pdfs(model, X), axis=1)


def _farthest_point_means(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    chosen = [int(rng.integers(X.shape[0]))]
    dist = np.sum((X - X[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(dist))
        chosen.append(nxt)
        dist = np.minimum(dist, np.sum((X - X[nxt]) ** 2, axis=1))
    return X[chosen].copy()


def _global_cov(X: np.ndarray, cov_type: str, reg: float):
    if cov_type == "diag":
        return np.var(X, axis=0) + reg
    cov = np.atleast_2d(np.cov(X.T, bias=True))
    return cov + reg * np.eye(X.shape[1])


def gmm_fit_em(X: np.ndarray, n_components: int, cov_type: str = "full",
               seed=0, tol: float = 1e-6, max_iter: int = 200,
               reg: float = COV_REG) -> GmmModel:
    """Fit one mixture by expectation-maximization.

    Initialization is farthest-point seeding from the given seed. Iteration
    stops when the log-likelihood gain drops to tol or max_iter is reached;
    covariances get +reg*I each M-step. A component whose responsibility
    mass collapses is re-seeded from a random data point (and logged).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n, d = X.shape
    if n <= n_components:
        raise ValueError(f"{n} rows cannot support {n_components} components")
    if cov_type not in ("full", "diag"):
        raise ValueError(f"unknown covariance type {cov_type!r}")

    rng = np.random.default_rng(seed)
    means = _farthest_point_means(X, n_components, rng)
    base_cov = _global_cov(X, cov_type, reg)
    covs = np.stack([base_cov.copy() for _ in range(n_components)])
    model = GmmModel(
        weights=np.full(n_components, 1.0 / n_components),
        means=means,
        covariances=covs,
        cov_type=cov_type,
        log_likelihoods=[],
        converged=False,
    )

    for it in range(max_iter):
        weighted = _weighted_log_pdfs(model, X)
        row_lse = _logsumexp(weighted, axis=1)
        ll = float(np.sum(row_lse))
        model.log_likelihoods.append(ll)
        if it > 0 and ll - model.log_likelihoods[-2] <= tol:
            model.converged = True
            return model
        resp = np.exp(weighted - row_lse[:, None])

        nk = resp.sum(axis=0)
        degenerate = np.nonzero(nk < 1e-8)[0]
        weights = nk / n
        means = np.zeros_like(model.means)
        covs = np.empty_like(model.covariances)
        for k in range(n_components):
            if k in degenerate:
                logger.warning("re-seeding degenerate mixture component %d", k)
                means[k] = X[int(rng.integers(n))]
                covs[k] = base_cov
                weights[k] = 1.0 / n_components
                continue
            means[k] = resp[:, k] @ X / nk[k]
            diff = X - means[k]
            if cov_type == "diag":
                covs[k] = resp[:, k] @ (diff * diff) / nk[k] + reg
            else:
                covs[k] = (resp[:, k, None] * diff).T @ diff / nk[k] + reg * np.eye(d)
        model.weights = weights / weights.sum()
        model.means = means
        model.covariances = covs

    # ran out of iterations: record the likelihood of the final parameters
    model.log_likelihoods.append(float(np.sum(gmm_log_density(model, X))))
    return model


def gmm_bic(model: GmmModel, X: np.ndarray) -> float:
    """Bayesian information criterion: -2 logL + p ln(n)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    ll = float(np.sum(gmm_log_density(model, X)))
    return -2.0 * ll + model.parameter_count() * np.log(X.shape[0])


def gmm_bic_select(X: np.ndarray, k_max: int = 40, seed=0,
                   cov_types=("diag", "full"), tol: float = 1e-6,
                   max_iter: int = 200, return_candidates: bool = False):
    """Fit mixtures over K = 1..k_max and both covariance shapes; keep the lowest BIC.

    K is capped at half the row count; ties break toward smaller K, then
    toward the diagonal shape (candidates are scanned in that preference
    order with strict improvement).
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    n = X.shape[0]
    k_cap = max(1, min(k_max, n // 2))
    best = None
    best_bic = np.inf
    candidates = []
    for k in range(1, k_cap + 1):
        for ci, cov_type in enumerate(cov_types):
            fit_seed = np.random.SeedSequence((_seed_entropy(seed), k, ci))
            model = gmm_fit_em(X, k, cov_type=cov_type, seed=fit_seed,
                               tol=tol, max_iter=max_iter)
            score = gmm_bic(model, X)
            candidates.append((k, cov_type, score))
            if score < best_bic:
                best, best_bic = model, score
    if return_candidates:
        return best, candidates
    return best


def _seed_entropy(seed) -> int:
    if isinstance(seed, np.random.SeedSequence):
        return int(seed.generate_state(1)[0])
    if isinstance(seed, (tuple, list)):
        return int(np.random.SeedSequence(seed).generate_state(1)[0])
    return int(seed)


def gmm_classify(models, X: np.ndarray) -> np.ndarray:
    """Index of the class model with the greatest likelihood per row.

    Ties break toward the lowest class index. All models must share one
    feature dimension.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    dims = {m.dim for m in models}
    if len(dims) != 1:
        raise ValueError(f"class models disagree on dimension: {sorted(dims)}")
    scores = np.column_stack([gmm_log_density(m, X) for m in models])
    return np.argmax(scores, axis=1)


def kld_gaussian(mean_a, cov_a, mean_b, cov_b) -> float:
    """Closed-form KL divergence D(N_a || N_b) between two Gaussians."""
    mean_a = np.atleast_1d(np.asarray(mean_a, dtype=np.float64))
    mean_b = np.atleast_1d(np.asarray(mean_b, dtype=np.float64))
    cov_a = np.atleast_2d(np.asarray(cov_a, dtype=np.float64))
    cov_b = np.atleast_2d(np.asarray(cov_b, dtype=np.float64))
    d = mean_a.size
    if mean_b.size != d or cov_a.shape != (d, d) or cov_b.shape != (d, d):
        raise ValueError("dimension mismatch between the two Gaussians")
    try:
        chol_a = np.linalg.cholesky(cov_a)
        chol_b = np.linalg.cholesky(cov_b)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariances must be symmetric positive-definite") from exc
    trace = float(np.trace(np.linalg.solve(cov_b, cov_a)))
    diff = mean_b - mean_a
    quad = float(diff @ np.linalg.solve(cov_b, diff))
    log_det_ratio = 2.0 * (
        float(np.sum(np.log(np.diag(chol_b)))) - float(np.sum(np.log(np.diag(chol_a))))
    )
    return 0.5 * (trace + quad - d + log_det_ratio)
