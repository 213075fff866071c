"""Classifier zoo behind one train/predict contract.

Every classifier here exposes fit(X, labels), predict(X) -> labels, and
predict_scores(X) -> (n, 4) real scores over the fixed class order, and is
bit-deterministic given (data, hyperparameters, seed).
"""

from __future__ import annotations

import logging

import numpy as np

from ..audio_io import CLASS_LABELS
from . import boosting, forest, gmm, qda, svm
from .boosting import (
    AdaboostModel,
    GbdtBinaryModel,
    RegressionStump,
    Stump,
    adaboost_scores,
    adaboost_train,
    best_stump,
    fit_regression_stump,
    gbdt_scores,
    gbdt_train_binary,
)
from .detector import detect_actuation_cwt
from .forest import ForestModel, rf_train
from .gmm import (
    GmmModel,
    gmm_bic,
    gmm_bic_select,
    gmm_classify,
    gmm_fit_em,
    gmm_log_density,
    kld_gaussian,
)
from .ovr import OneVsRest
from .qda import QdaModel, qda_fit, qda_predict, qda_scores
from .svm import SvmModel, svm_decision, svm_train, svm_weight_vector

logger = logging.getLogger(__name__)

CLASSES = CLASS_LABELS


def encode_labels(labels) -> np.ndarray:
    codes = np.empty(len(labels), dtype=np.int64)
    for i, label in enumerate(labels):
        try:
            codes[i] = CLASSES.index(label)
        except ValueError:
            raise ValueError(f"unknown class label {label!r}") from None
    return codes


def decode_labels(codes) -> list[str]:
    return [CLASSES[int(c)] for c in codes]


class _ClassifierBase:
    """Shared label plumbing for the harness contract."""

    name = ""

    def __init__(self, seed: int = 0):
        self.seed = int(seed)

    def fit(self, X, labels):
        raise NotImplementedError

    def predict_scores(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict(self, X) -> list[str]:
        return decode_labels(np.argmax(self.predict_scores(X), axis=1))

    def get_params(self) -> dict:
        return {"seed": self.seed}


class GmmClassifier(_ClassifierBase):
    """Per-class mixtures chosen by BIC; scores are class log-likelihoods."""

    name = "gmm"

    def __init__(self, seed: int = 0, k_max: int = 6, cov_types=("diag", "full"),
                 tol: float = 1e-6, max_iter: int = 200):
        super().__init__(seed)
        self.k_max = k_max
        self.cov_types = tuple(cov_types)
        self.tol = tol
        self.max_iter = max_iter
        self.models: list[GmmModel | None] = []

    def fit(self, X, labels):
        X = np.asarray(X, dtype=np.float64)
        codes = encode_labels(labels)
        self.models = []
        for c in range(len(CLASSES)):
            rows = X[codes == c]
            if rows.shape[0] < 2:
                logger.warning("gmm: class %r has %d rows; scoring -inf",
                               CLASSES[c], rows.shape[0])
                self.models.append(None)
                continue
            self.models.append(
                gmm_bic_select(rows, k_max=self.k_max, seed=(self.seed, c),
                               cov_types=self.cov_types, tol=self.tol,
                               max_iter=self.max_iter)
            )
        return self

    def predict_scores(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        out = np.full((X.shape[0], len(CLASSES)), -np.inf)
        for c, model in enumerate(self.models):
            if model is not None:
                out[:, c] = gmm_log_density(model, X)
        return out

    def get_params(self) -> dict:
        return {"seed": self.seed, "k_max": self.k_max, "cov_types": list(self.cov_types),
                "tol": self.tol, "max_iter": self.max_iter}


class AdaboostClassifier(_ClassifierBase):
    name = "ada"

    def __init__(self, seed: int = 0, rounds: int = 100):
        super().__init__(seed)
        self.rounds = rounds
        self.ovr: OneVsRest | None = None

    def fit(self, X, labels):
        X = np.asarray(X, dtype=np.float64)
        self.ovr = OneVsRest(
            lambda Xb, yb, c: adaboost_train(Xb, yb, rounds=self.rounds),
            adaboost_scores,
            len(CLASSES),
        )
        self.ovr.fit(X, encode_labels(labels))
        return self

    def predict_scores(self, X) -> np.ndarray:
        return self.ovr.scores(X)

    def get_params(self) -> dict:
        return {"seed": self.seed, "rounds": self.rounds}


class GbdtClassifier(_ClassifierBase):
    name = "gbdt"

    def __init__(self, seed: int = 0, rounds: int = 100, learning_rate: float = 0.1):
        super().__init__(seed)
        self.rounds = rounds
        self.learning_rate = learning_rate
        self.ovr: OneVsRest | None = None

    def fit(self, X, labels):
        X = np.asarray(X, dtype=np.float64)
        self.ovr = OneVsRest(
            lambda Xb, yb, c: gbdt_train_binary(Xb, yb, rounds=self.rounds,
                                                learning_rate=self.learning_rate),
            gbdt_scores,
            len(CLASSES),
        )
        self.ovr.fit(X, encode_labels(labels))
        return self

    def predict_scores(self, X) -> np.ndarray:
        return self.ovr.scores(X)

    def get_params(self) -> dict:
        return {"seed": self.seed, "rounds": self.rounds, "learning_rate": self.learning_rate}


class SvmClassifier(_ClassifierBase):
    name = "svm"

    def __init__(self, seed: int = 0, kernel: str = "rbf", C: float = 1.0,
                 gamma: float | None = None, tol: float = 1e-3):
        super().__init__(seed)
        self.kernel = kernel
        self.C = C
        self.gamma = gamma
        self.tol = tol
        self.ovr: OneVsRest | None = None

    def fit(self, X, labels):
        X = np.asarray(X, dtype=np.float64)
        self.ovr = OneVsRest(
            lambda Xb, yb, c: svm_train(Xb, yb, kernel=self.kernel, C=self.C,
                                        gamma=self.gamma, tol=self.tol),
            svm_decision,
            len(CLASSES),
        )
        self.ovr.fit(X, encode_labels(labels))
        return self

    def predict_scores(self, X) -> np.ndarray:
        return self.ovr.scores(X)

    def get_params(self) -> dict:
        return {"seed": self.seed, "kernel": self.kernel, "C": self.C,
                "gamma": self.gamma, "tol": self.tol}


class RandomForestClassifier(_ClassifierBase):
    name = "rf"

    def __init__(self, seed: int = 0, n_trees: int = 100, max_features: int | None = None):
        super().__init__(seed)
        self.n_trees = n_trees
        self.max_features = max_features
        self.model: ForestModel | None = None

    def fit(self, X, labels):
        self.model = rf_train(
            np.asarray(X, dtype=np.float64),
            encode_labels(labels),
            n_classes=len(CLASSES),
            n_trees=self.n_trees,
            max_features=self.max_features,
            seed=self.seed,
        )
        return self

    def predict_scores(self, X) -> np.ndarray:
        return self.model.vote_fractions(X)

    def predict(self, X) -> list[str]:
        return decode_labels(self.model.predict_codes(X))

    def get_params(self) -> dict:
        return {"seed": self.seed, "n_trees": self.n_trees, "max_features": self.max_features}


class QdaClassifier(_ClassifierBase):
    name = "qda"

    def __init__(self, seed: int = 0, shrinkage: float = 0.1):
        super().__init__(seed)
        self.shrinkage = shrinkage
        self.model: QdaModel | None = None

    def fit(self, X, labels):
        self.model = qda_fit(np.asarray(X, dtype=np.float64), encode_labels(labels),
                             n_classes=len(CLASSES), shrinkage=self.shrinkage)
        return self

    def predict_scores(self, X) -> np.ndarray:
        return qda_scores(self.model, X)

    def get_params(self) -> dict:
        return {"seed": self.seed, "shrinkage": self.shrinkage}


CLASSIFIER_REGISTRY = {
    "gmm": GmmClassifier,
    "ada": AdaboostClassifier,
    "svm": SvmClassifier,
    "rf": RandomForestClassifier,
    "qda": QdaClassifier,
    "gbdt": GbdtClassifier,
}


def make_classifier(name: str, seed: int = 0, **params):
    try:
        cls = CLASSIFIER_REGISTRY[name]
    except KeyError:
        raise ValueError(
            f"unknown classifier {name!r}; choose from {sorted(CLASSIFIER_REGISTRY)}"
        ) from None
    return cls(seed=seed, **params)


__all__ = [
    "CLASSES",
    "CLASSIFIER_REGISTRY",
    "AdaboostClassifier",
    "AdaboostModel",
    "ForestModel",
    "GbdtBinaryModel",
    "GbdtClassifier",
    "GmmClassifier",
    "GmmModel",
    "OneVsRest",
    "QdaClassifier",
    "QdaModel",
    "RandomForestClassifier",
    "RegressionStump",
    "Stump",
    "SvmClassifier",
    "SvmModel",
    "adaboost_scores",
    "adaboost_train",
    "best_stump",
    "decode_labels",
    "detect_actuation_cwt",
    "encode_labels",
    "fit_regression_stump",
    "gbdt_scores",
    "gbdt_train_binary",
    "gmm_bic",
    "gmm_bic_select",
    "gmm_classify",
    "gmm_fit_em",
    "gmm_log_density",
    "kld_gaussian",
    "make_classifier",
    "qda_fit",
    "qda_predict",
    "qda_scores",
    "rf_train",
    "svm_decision",
    "svm_train",
    "svm_weight_vector",
]
