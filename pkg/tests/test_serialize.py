import numpy as np
import pytest

from rda_bench.audio_io import CLASS_LABELS
from rda_bench.classifiers import make_classifier
from rda_bench.classifiers.serialize import (
    from_payload,
    load_model,
    save_model,
    to_payload,
)


def blobs(seed=0, n=160):
    rng = np.random.default_rng(seed)
    centers = np.array([[0, 0], [5, 0], [0, 5], [5, 5]], dtype=float)
    codes = rng.integers(0, 4, n)
    X = centers[codes] + rng.normal(scale=0.4, size=(n, 2))
    return X, [CLASS_LABELS[c] for c in codes]


FITTED_SPECS = [
    ("gmm", {"k_max": 2, "cov_types": ("diag",)}),
    ("ada", {"rounds": 15}),
    ("svm", {"kernel": "rbf", "C": 5.0}),
    ("rf", {"n_trees": 8}),
    ("qda", {}),
    ("gbdt", {"rounds": 15}),
]


@pytest.mark.parametrize("name,params", FITTED_SPECS)
def test_roundtrip_prediction_equality(tmp_path, name, params):
    X, labels = blobs(seed=11)
    clf = make_classifier(name, seed=3, **params).fit(X, labels)
    path = tmp_path / f"{name}.json"
    save_model(clf, path)
    back = load_model(path)
    probe, _ = blobs(seed=12, n=80)
    assert back.predict(probe) == clf.predict(probe)
    a, b = back.predict_scores(probe), clf.predict_scores(probe)
    assert np.array_equal(a, b)


def test_payload_has_version_and_kind():
    X, labels = blobs()
    clf = make_classifier("qda", seed=0).fit(X, labels)
    payload = to_payload(clf)
    assert payload["format"] == "rda-bench-model"
    assert payload["version"] == 1
    assert payload["kind"] == "qda"
    assert payload["params"]["seed"] == 0


def test_bad_payload_rejected():
    with pytest.raises(ValueError, match="not a model payload"):
        from_payload({"format": "something-else"})
    with pytest.raises(ValueError, match="version"):
        from_payload({"format": "rda-bench-model", "version": 99})


def test_unknown_classifier_name():
    with pytest.raises(ValueError, match="unknown classifier"):
        make_classifier("mlp")
