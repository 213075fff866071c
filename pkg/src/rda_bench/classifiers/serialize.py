"""Versioned JSON serialization for trained classifiers.

Arrays are stored as (nested) lists of Python floats, which round-trip
losslessly through json, so a reloaded model predicts identically.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import (
    AdaboostClassifier,
    GbdtClassifier,
    GmmClassifier,
    QdaClassifier,
    RandomForestClassifier,
    SvmClassifier,
    make_classifier,
)
from .boosting import (
    AdaboostModel,
    GbdtBinaryModel,
    RegressionStump,
    Stump,
    adaboost_scores,
    gbdt_scores,
)
from .forest import ForestModel, Tree
from .gmm import GmmModel
from .ovr import OneVsRest
from .qda import QdaModel
from .svm import SvmModel, svm_decision

FORMAT_NAME = "rda-bench-model"
FORMAT_VERSION = 1


def _arr(a) -> list:
    return np.asarray(a, dtype=np.float64).tolist()


def _gmm_state(model: GmmModel | None):
    if model is None:
        return None
    return {
        "weights": _arr(model.weights),
        "means": _arr(model.means),
        "covariances": _arr(model.covariances),
        "cov_type": model.cov_type,
    }


def _gmm_restore(state) -> GmmModel | None:
    if state is None:
        return None
    return GmmModel(
        weights=np.asarray(state["weights"]),
        means=np.asarray(state["means"]),
        covariances=np.asarray(state["covariances"]),
        cov_type=state["cov_type"],
    )


def _ada_state(model: AdaboostModel | None):
    if model is None:
        return None
    return {
        "stumps": [[s.feature, s.threshold, s.polarity] for s in model.stumps],
        "alphas": list(model.alphas),
        "epsilons": list(model.epsilons),
        "zs": list(model.zs),
    }


def _ada_restore(state) -> AdaboostModel | None:
    if state is None:
        return None
    return AdaboostModel(
        stumps=[Stump(feature=int(f), threshold=t, polarity=int(p))
                for f, t, p in state["stumps"]],
        alphas=list(state["alphas"]),
        epsilons=list(state["epsilons"]),
        zs=list(state["zs"]),
    )


def _gbdt_state(model: GbdtBinaryModel | None):
    if model is None:
        return None
    return {
        "stages": [[s.feature, s.threshold, s.left_value, s.right_value]
                   for s in model.stages],
        "losses": list(model.losses),
        "learning_rate": model.learning_rate,
    }


def _gbdt_restore(state) -> GbdtBinaryModel | None:
    if state is None:
        return None
    return GbdtBinaryModel(
        stages=[RegressionStump(feature=int(f), threshold=t, left_value=lv, right_value=rv)
                for f, t, lv, rv in state["stages"]],
        losses=list(state["losses"]),
        learning_rate=state["learning_rate"],
    )


def _svm_state(model: SvmModel | None):
    if model is None:
        return None
    return {
        "support_vectors": _arr(model.support_vectors),
        "sv_alpha": _arr(model.sv_alpha),
        "sv_labels": _arr(model.sv_labels),
        "bias": model.bias,
        "kernel": model.kernel,
        "gamma": model.gamma,
        "C": model.C,
        "converged": model.converged,
    }


def _svm_restore(state) -> SvmModel | None:
    if state is None:
        return None
    return SvmModel(
        support_vectors=np.asarray(state["support_vectors"]),
        sv_alpha=np.asarray(state["sv_alpha"]),
        sv_labels=np.asarray(state["sv_labels"]),
        bias=state["bias"],
        kernel=state["kernel"],
        gamma=state["gamma"],
        C=state["C"],
        converged=state["converged"],
    )


def _forest_state(model: ForestModel):
    return {
        "trees": [
            {
                "feature": list(t.feature),
                "threshold": list(t.threshold),
                "left": list(t.left),
                "right": list(t.right),
                "value": list(t.value),
            }
            for t in model.trees
        ],
        "n_classes": model.n_classes,
        "seed": model.seed,
        "max_features": model.max_features,
    }


def _forest_restore(state) -> ForestModel:
    return ForestModel(
        trees=[
            Tree(
                feature=[int(v) for v in t["feature"]],
                threshold=[float(v) for v in t["threshold"]],
                left=[int(v) for v in t["left"]],
                right=[int(v) for v in t["right"]],
                value=[int(v) for v in t["value"]],
            )
            for t in state["trees"]
        ],
        n_classes=int(state["n_classes"]),
        seed=int(state["seed"]),
        max_features=int(state["max_features"]),
    )


def _qda_state(model: QdaModel):
    return {
        "means": _arr(model.means),
        "covariances": _arr(model.covariances),
        "log_priors": _arr(model.log_priors),
        "present": [bool(p) for p in model.present],
    }


def _qda_restore(state) -> QdaModel:
    return QdaModel(
        means=np.asarray(state["means"]),
        covariances=np.asarray(state["covariances"]),
        log_priors=np.asarray(state["log_priors"]),
        present=np.asarray(state["present"], dtype=bool),
    )


def to_payload(classifier) -> dict:
    params = classifier.get_params()
    if isinstance(classifier, GmmClassifier):
        state = {"models": [_gmm_state(m) for m in classifier.models]}
    elif isinstance(classifier, AdaboostClassifier):
        state = {"ovr": [_ada_state(m) for m in classifier.ovr.models]}
    elif isinstance(classifier, GbdtClassifier):
        state = {"ovr": [_gbdt_state(m) for m in classifier.ovr.models]}
    elif isinstance(classifier, SvmClassifier):
        state = {"ovr": [_svm_state(m) for m in classifier.ovr.models]}
    elif isinstance(classifier, RandomForestClassifier):
        state = {"forest": _forest_state(classifier.model)}
    elif isinstance(classifier, QdaClassifier):
        state = {"qda": _qda_state(classifier.model)}
    else:
        raise TypeError(f"cannot serialize {type(classifier).__name__}")
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "kind": classifier.name,
        "params": params,
        "state": state,
    }


def from_payload(payload: dict):
    if payload.get("format") != FORMAT_NAME:
        raise ValueError("not a model payload")
    if payload.get("version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model version {payload.get('version')}")
    kind = payload["kind"]
    params = dict(payload["params"])
    if "cov_types" in params:
        params["cov_types"] = tuple(params["cov_types"])
    classifier = make_classifier(kind, **params)
    state = payload["state"]
    if kind == "gmm":
        classifier.models = [_gmm_restore(s) for s in state["models"]]
    elif kind in ("ada", "gbdt", "svm"):
        restore = {"ada": _ada_restore, "gbdt": _gbdt_restore, "svm": _svm_restore}[kind]
        score = {"ada": adaboost_scores, "gbdt": gbdt_scores, "svm": svm_decision}[kind]
        ovr = OneVsRest(fit_binary=None, score_binary=score, n_classes=len(state["ovr"]))
        ovr.models = [restore(s) for s in state["ovr"]]
        classifier.ovr = ovr
    elif kind == "rf":
        classifier.model = _forest_restore(state["forest"])
    elif kind == "qda":
        classifier.model = _qda_restore(state["qda"])
    else:
        raise ValueError(f"unknown model kind {kind!r}")
    return classifier


def save_model(classifier, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(to_payload(classifier), indent=2, sort_keys=True) + "\n")


def load_model(path):
    return from_payload(json.loads(Path(path).read_text()))
