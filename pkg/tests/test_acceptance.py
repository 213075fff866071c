"""Acceptance gate: one test per criterion, each printing a [PASS]/[FAIL] line.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion lines.
Full reproduction of the published accuracy tables needs the external
recording corpus; criterion c02 therefore only runs when the environment
variable RDA_DATASET_MANIFEST points at a manifest.json for it (see README).
Everything else runs on synthetic data with the tolerances fixed below.
"""

import json
import os
import time

import numpy as np
import pytest

from rda_bench.audio_io import AudioClip, SynthSpec, synthesize_dataset
from rda_bench.classifiers import make_classifier
from rda_bench.classifiers.boosting import adaboost_scores, adaboost_train
from rda_bench.classifiers.detector import detect_actuation_cwt
from rda_bench.classifiers.gmm import gmm_bic_select, gmm_fit_em
from rda_bench.classifiers.svm import svm_train, svm_weight_vector
from rda_bench.cli import main as cli_main
from rda_bench.evaluation import (
    CSV_HEADER,
    build_dataset,
    evaluate,
    make_splits,
    metrics,
    time_benchmark,
)
from rda_bench.features import dft, mfcc
from rda_bench.framing import frame_signal

from test_boosting import xor_clusters
from test_detector import band_noise
from test_features import naive_dft
from test_svm import separable_problem


def _check(criterion: str, ok: bool, detail: str):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {criterion}: {detail}")
    assert ok, f"{criterion}: {detail}"


def _budget(criterion: str, elapsed: float, limit: float):
    print(f"       {criterion} runtime {elapsed:.1f}s (budget {limit:.0f}s)")
    assert elapsed < limit, f"{criterion} exceeded {limit}s budget ({elapsed:.1f}s)"


TABLE_I_NON_MIXED_MULTI = {
    ("svm", "mfcc"): 96.21,
    ("ada", "mfcc"): 95.91,
    ("ada", "cepst"): 95.02,
    ("gmm", "cepst"): 94.10,
    ("rf", "mfcc"): 94.87,
}


@pytest.mark.skipif(
    "RDA_DATASET_MANIFEST" not in os.environ,
    reason="external recording corpus not present (set RDA_DATASET_MANIFEST)",
)
def test_c02_external_corpus_accuracy():
    from rda_bench.audio_io import load_dataset, load_manifest

    t0 = time.time()
    manifest = load_manifest(os.environ["RDA_DATASET_MANIFEST"])
    records = load_dataset(manifest)
    hits = 0
    results = {}
    for (name, kind), expected in TABLE_I_NON_MIXED_MULTI.items():
        dataset = build_dataset(records, kind)
        plan = make_splits(dataset.segment_labels, dataset.segment_subjects,
                           "MultiSubj", "non-mixed", seed=0)
        result = evaluate(plan, lambda i: make_classifier(name, seed=i), dataset)
        acc = 100.0 * result.accuracy
        results[f"{name}-{kind}"] = acc
        hits += abs(acc - expected) <= 5.0
    _check("c02 external-corpus", hits >= 2,
           f"{hits}/5 pairs within +-5 points of the published table: {results}")
    _budget("c02", time.time() - t0, 1800)


def test_c03_dft_against_naive_oracle():
    t0 = time.time()
    rng = np.random.default_rng(303)
    sizes = list(range(4, 257)) + [300, 333, 500, 512, 768, 1000, 1023, 1024]
    worst = 0.0
    for n in sizes:
        x = rng.normal(size=n)
        spectrum = dft(x)
        scale = np.max(np.abs(spectrum))
        worst = max(worst, np.max(np.abs(spectrum - naive_dft(x))) / scale)
        back = np.fft.ifft(spectrum)
        worst = max(worst, np.max(np.abs(back - x)))
    parseval_worst = 0.0
    for _ in range(1000):
        x = rng.normal(size=320)
        lhs = np.sum(x * x)
        rhs = np.sum(np.abs(np.fft.fft(x)) ** 2) / 320
        parseval_worst = max(parseval_worst, abs(lhs - rhs) / lhs)
    ok = worst < 1e-9 and parseval_worst < 1e-9
    _check("c03 dft-oracle", ok,
           f"max oracle error {worst:.2e}, max Parseval error {parseval_worst:.2e} "
           f"over {len(sizes)} sizes + 1000 frames (tol 1e-9)")
    _budget("c03", time.time() - t0, 10)


def test_c04_mfcc_gain_invariance():
    t0 = time.time()
    rng = np.random.default_rng(404)
    worst = 0.0
    for _ in range(100):
        x = rng.uniform(-0.05, 0.05, 320 * 3)
        clip = AudioClip(samples=x, sample_rate=8000, clip_id="g")
        base = mfcc(frame_signal(clip)).data
        for c in (0.1, 2.0, 10.0):
            scaled_clip = AudioClip(samples=c * x, sample_rate=8000, clip_id="g")
            scaled = mfcc(frame_signal(scaled_clip)).data
            worst = max(worst, np.max(np.abs(scaled[:, 1:13] - base[:, 1:13])))
    _check("c04 mfcc-gain-invariance", worst < 1e-9,
           f"max change in coefficients 1..12 is {worst:.2e} over 100 frames x 3 gains "
           "(tol 1e-9)")
    _budget("c04", time.time() - t0, 5)


def test_c05_gmm_em_monotone_and_bic():
    # monotonicity is checked on mixture-structured data: the mandated
    # +1e-6*I covariance ridge breaks exact monotonicity once a component
    # collapses onto too few points, which structureless data provokes
    t0 = time.time()
    worst_drop = 0.0
    for trial in range(200):
        rng = np.random.default_rng(1000 + trial)
        k_true = 1 + trial % 3
        means = rng.uniform(-8, 8, size=(k_true, 2))
        comps = rng.integers(0, k_true, 90)
        X = means[comps] + rng.normal(size=(90, 2))
        model = gmm_fit_em(X, k_true, cov_type=("full", "diag")[trial % 2], seed=trial)
        diffs = np.diff(model.log_likelihoods)
        if diffs.size:
            worst_drop = max(worst_drop, float(-diffs.min()))
    monotone_ok = worst_drop <= 1e-8

    hits = 0
    for seed in range(20):
        blob_rng = np.random.default_rng(seed)
        means = np.array([[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]])
        comps = blob_rng.integers(0, 3, 400)
        X = means[comps] + blob_rng.normal(scale=0.7, size=(400, 2))
        hits += gmm_bic_select(X, k_max=6, seed=seed).n_components == 3
    bic_ok = hits >= 16
    _check("c05 gmm-em", monotone_ok and bic_ok,
           f"worst likelihood drop {worst_drop:.2e} over 200 fits (tol 1e-8); "
           f"BIC found K=3 in {hits}/20 trials (need >= 16)")
    _budget("c05", time.time() - t0, 60)


def test_c06_adaboost_invariants_and_xor():
    t0 = time.time()
    X, y = xor_clusters(seed=3, n=200)
    model = adaboost_train(X, y, rounds=50)
    weight_ok = np.max(np.abs(np.asarray(model.weight_sums) - 1.0)) < 1e-12
    eps_ok = all(e < 0.5 for e in model.epsilons)
    err = float(np.mean(np.sign(adaboost_scores(model, X)) != y))
    _check("c06 adaboost", weight_ok and eps_ok and err <= 0.05,
           f"weights normalized (1e-12): {weight_ok}; all eps < 0.5: {eps_ok}; "
           f"XOR-cluster training error {err:.3f} in {model.rounds} rounds (need <= 0.05)")
    _budget("c06", time.time() - t0, 30)


def test_c07_svm_dual_constraints_and_analytic_case():
    t0 = time.time()
    rng = np.random.default_rng(707)
    feasible = True
    for _ in range(50):
        X, y = separable_problem(rng, n=int(rng.integers(20, 60)))
        model = svm_train(X, y, kernel="linear", C=1.0)
        feasible &= abs(float(np.sum(model.sv_alpha * model.sv_labels))) < 1e-6
        feasible &= bool(np.all(model.sv_alpha >= -1e-12))
        feasible &= bool(np.all(model.sv_alpha <= 1.0 + 1e-9))

    X4 = np.array([[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]])
    y4 = np.array([-1.0, -1.0, 1.0, 1.0])
    model4 = svm_train(X4, y4, kernel="linear", C=1e6)
    w = svm_weight_vector(model4)
    boundary = -model4.bias / w[0]
    analytic_ok = (abs(boundary - 1.0) < 1e-3 and abs(np.linalg.norm(w) - 1.0) < 1e-3)
    _check("c07 svm-dual", feasible and analytic_ok,
           f"dual feasibility on 50 problems: {feasible}; analytic boundary at "
           f"x1={boundary:.5f} with |w|={np.linalg.norm(w):.5f} (tol 1e-3)")
    _budget("c07", time.time() - t0, 30)


def test_c08_actuation_detector():
    t0 = time.time()
    detected = 0
    false_positives = 0
    for seed in range(50):
        rng = np.random.default_rng(800 + seed)
        fs = 8000
        total = 2.0 + rng.random()
        n = int(total * fs)
        dur = rng.uniform(0.100, 0.150)
        start = rng.uniform(0.3, total - 0.5)
        x = band_noise(rng, n, fs, 150, 1200, 0.25)
        nb = int(dur * fs)
        i0 = int(start * fs)
        x[i0 : i0 + nb] += band_noise(rng, nb, fs, 2300, 3600, 0.7)
        clip = AudioClip(samples=np.clip(x, -1, 1), sample_rate=fs, clip_id=f"a{seed}")
        events = detect_actuation_cwt(clip)
        inside = [e for e in events if start - 0.03 <= e <= start + dur + 0.03]
        detected += bool(inside)
        false_positives += len(events) - len(inside)
    ok = detected >= 48 and false_positives <= 1  # >= 95% of 50, <= 1 spurious event
    _check("c08 cwt-detector", ok,
           f"{detected}/50 bursts found within +-30 ms, {false_positives} false positives "
           "(need >= 48 and <= 1)")
    _budget("c08", time.time() - t0, 60)


BENCH_GRID = [
    ("gmm", {"k_max": 4, "cov_types": ("diag",)}),
    ("ada", {"rounds": 60}),
    ("rf", {"n_trees": 60}),
    ("svm", {"kernel": "rbf", "C": 10.0}),
]


@pytest.fixture(scope="module")
def default_corpus():
    return synthesize_dataset(SynthSpec(seed=42, subjects=3, clips_per_subject=8))


def test_c09_end_to_end_synthetic_benchmark(default_corpus):
    t0 = time.time()
    _, records = default_corpus
    accuracies = {}
    for kind in ("mfcc", "cepst", "spect"):
        dataset = build_dataset(records, kind)
        for name, params in BENCH_GRID:
            for protocol in ("MultiSubj", "LOSO"):
                plan = make_splits(dataset.segment_labels, dataset.segment_subjects,
                                   protocol, "non-mixed", seed=42)
                result = evaluate(
                    plan, lambda i: make_classifier(name, seed=i, **params), dataset
                )
                accuracies[(name, kind, protocol)] = result.accuracy

    anchors_ok = (accuracies[("gmm", "cepst", "MultiSubj")] >= 0.90
                  and accuracies[("ada", "mfcc", "MultiSubj")] >= 0.90)
    pairs = [(n, k) for n, _ in BENCH_GRID for k in ("mfcc", "cepst", "spect")]
    ordered = sum(accuracies[(n, k, "LOSO")] <= accuracies[(n, k, "MultiSubj")]
                  for n, k in pairs)
    order_ok = ordered >= int(0.8 * len(pairs))
    _check("c09 end-to-end", anchors_ok and order_ok,
           f"gmm-cepst Multi {100*accuracies[('gmm','cepst','MultiSubj')]:.1f}%, "
           f"ada-mfcc Multi {100*accuracies[('ada','mfcc','MultiSubj')]:.1f}% (need >= 90); "
           f"LOSO <= Multi for {ordered}/{len(pairs)} pairs (need >= {int(0.8*len(pairs))})")
    _budget("c09", time.time() - t0, 600)


def test_c10_metric_equations_and_f1_schema():
    perfect = metrics(np.diag([5, 5, 0, 0]), 0)
    perfect_ok = (perfect["accuracy"] == 1.0 and perfect["precision"] == 1.0
                  and perfect["recall"] == 1.0 and perfect["f1"] == 1.0)

    confusion = np.array([[90, 1, 1, 0], [1, 2, 0, 0], [1, 0, 2, 0], [1, 0, 0, 1]])
    m = metrics(confusion, 0)
    hand_ok = (m["accuracy"] == pytest.approx(0.95, abs=1e-15)
               and m["precision"] == pytest.approx(90 / 93, abs=1e-15)
               and m["recall"] == pytest.approx(90 / 92, abs=1e-15)
               and m["specificity"] == pytest.approx(5 / 8, abs=1e-15))

    zero = metrics(np.array([[0, 0], [0, 5]]), 0)
    zero_ok = zero["precision"] == 0.0 and "precision_zero_division" in zero["flags"]

    schema_ok = CSV_HEADER.split(",")[4:9] == [
        "accuracy", "drug_f1", "exhale_f1", "inhale_f1", "noise_f1"
    ]
    ok = perfect_ok and hand_ok and zero_ok and schema_ok
    _check("c10 metrics", ok,
           f"perfect case: {perfect_ok}; hand-computed case: {hand_ok}; "
           f"0/0 convention: {zero_ok}; per-class F1 schema: {schema_ok}")


def test_c11_cepstrogram_slower_than_spectrogram(default_corpus):
    t0 = time.time()
    _, records = default_corpus
    medians = {}
    for kind in ("spect", "cepst"):
        dataset = build_dataset(records, kind)
        clf = make_classifier("qda", seed=0).fit(dataset.segment_vectors,
                                                 dataset.segment_labels)
        medians[kind] = time_benchmark(clf, kind, records, min_segments=100).feature_time_s
    ok = medians["cepst"] > medians["spect"]
    _check("c11 timing-order", ok,
           f"median extraction per segment: cepst {medians['cepst']*1e3:.3f} ms > "
           f"spect {medians['spect']*1e3:.3f} ms (directional)")
    _budget("c11", time.time() - t0, 120)


def test_c12_bench_reports_byte_identical(tmp_path):
    t0 = time.time()
    cfg = {
        "seed": 17,
        "synth": {"subjects": 2, "clips_per_subject": 3},
        "features": ["mfcc", "cepst"],
        "classifiers": [{"name": "qda"}, {"name": "ada", "rounds": 20}],
        "protocols": ["MultiSubj", "LOSO"],
        "mixing": ["non-mixed", "mixed"],
        "folds": 3,
    }
    digests = []
    for run in ("one", "two"):
        out = tmp_path / run
        config_path = tmp_path / f"config_{run}.json"
        config_path.write_text(json.dumps({**cfg, "out": str(out)}))
        assert cli_main(["--config", str(config_path), "--format", "csv", "bench"]) == 0
        digests.append((out / "report.csv").read_bytes())
    ok = digests[0] == digests[1]
    _check("c12 determinism", ok,
           f"two cmd_bench runs produced {'identical' if ok else 'DIFFERING'} "
           f"report.csv bytes ({len(digests[0])} bytes)")
    _budget("c12", time.time() - t0, 300)
