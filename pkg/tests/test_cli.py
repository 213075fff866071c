import json

import numpy as np
import pytest

from rda_bench.audio_io import write_wav
from rda_bench.cli import load_config, main

from test_detector import burst_clip


def run(args):
    return main(args)


def tiny_config(tmp_path, **extra):
    cfg = {
        "seed": 11,
        "out": str(tmp_path / "run"),
        "synth": {"subjects": 2, "clips_per_subject": 2},
        "features": ["mfcc"],
        "classifiers": [{"name": "qda"}],
        "protocols": ["MultiSubj"],
        "mixing": ["non-mixed"],
        "folds": 3,
    }
    cfg.update(extra)
    path = tmp_path / "config.json"
    path.write_text(json.dumps(cfg))
    return path


class TestConfig:
    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 1, "definitely_not_a_key": 2}))
        with pytest.raises(ValueError, match="unknown config keys"):
            load_config(str(path), {})

    def test_seed_mandatory(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"out": "x"}))
        with pytest.raises(ValueError, match="seed is mandatory"):
            load_config(str(path), {"seed": None})

    def test_flags_override_config(self, tmp_path):
        path = tiny_config(tmp_path)
        cfg = load_config(str(path), {"seed": 99, "out": "elsewhere"})
        assert cfg.seed == 99
        assert cfg.out == "elsewhere"

    def test_unknown_feature_rejected(self, tmp_path):
        path = tiny_config(tmp_path, features=["plp"])
        with pytest.raises(ValueError, match="unknown feature"):
            load_config(str(path), {})

    def test_jobs_env_fallback(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("RDA_BENCH_JOBS", "3")
        path = tiny_config(tmp_path)
        assert run(["--config", str(path), "synth"]) == 0


class TestSynthCommand:
    def test_writes_corpus_and_is_deterministic(self, tmp_path, capsys):
        path = tiny_config(tmp_path)
        assert run(["--config", str(path), "synth"]) == 0
        first = capsys.readouterr().out
        manifest = tmp_path / "run" / "manifest.json"
        assert manifest.exists()
        wavs = sorted((tmp_path / "run").rglob("*.wav"))
        assert len(wavs) == 4
        blob = b"".join(p.read_bytes() for p in wavs)
        assert run(["--config", str(path), "synth"]) == 0
        second = capsys.readouterr().out
        assert first == second  # includes the manifest checksum line
        assert b"".join(p.read_bytes() for p in sorted(
            (tmp_path / "run").rglob("*.wav"))) == blob

    def test_zero_subjects_fails(self, tmp_path, capsys):
        path = tiny_config(tmp_path, synth={"subjects": 0, "clips_per_subject": 1})
        assert run(["--config", str(path), "synth"]) == 1
        assert "error" in capsys.readouterr().err


class TestExtractCommand:
    def test_extract_then_cache(self, tmp_path, capsys):
        path = tiny_config(tmp_path)
        assert run(["--config", str(path), "extract"]) == 0
        out = capsys.readouterr().out
        assert "extracted 4 feature files (0 cached)" in out
        files = sorted((tmp_path / "run" / "features").glob("*.fmx"))
        assert len(files) == 4
        assert run(["--config", str(path), "extract"]) == 0
        out = capsys.readouterr().out
        assert "extracted 0 feature files (4 cached)" in out


class TestBenchCommand:
    def test_deterministic_reports(self, tmp_path, capsys):
        path = tiny_config(tmp_path)
        assert run(["--config", str(path), "--format", "csv", "bench"]) == 0
        capsys.readouterr()
        report = (tmp_path / "run" / "report.csv").read_bytes()
        lines = report.decode().splitlines()
        assert len(lines) == 2  # header + 1 grid cell
        assert run(["--config", str(path), "--format", "csv", "bench"]) == 0
        capsys.readouterr()
        assert (tmp_path / "run" / "report.csv").read_bytes() == report
        assert not (tmp_path / "run" / "timing.json").exists()

    def test_grid_row_count(self, tmp_path, capsys):
        path = tiny_config(
            tmp_path,
            classifiers=[{"name": "qda"}, {"name": "ada", "rounds": 10}],
            features=["mfcc", "volume"],
            protocols=["LOSO"],
            mixing=["non-mixed", "mixed"],
        )
        assert run(["--config", str(path), "bench"]) == 0
        capsys.readouterr()
        lines = (tmp_path / "run" / "report.csv").read_text().splitlines()
        assert len(lines) == 1 + 2 * 2 * 2  # classifiers x features x mixing

    def test_parallel_folds_reproduce_serial_report(self, tmp_path, capsys):
        cfg = tiny_config(tmp_path, classifiers=[{"name": "qda"}, {"name": "ada", "rounds": 10}],
                          protocols=["MultiSubj", "LOSO"])
        assert run(["--config", str(cfg), "bench"]) == 0
        capsys.readouterr()
        serial = (tmp_path / "run" / "report.csv").read_bytes()
        assert run(["--config", str(cfg), "--jobs", "2", "bench"]) == 0
        capsys.readouterr()
        assert (tmp_path / "run" / "report.csv").read_bytes() == serial

    def test_timing_flag_emits_json_and_dat(self, tmp_path, capsys):
        path = tiny_config(tmp_path)
        assert run(["--config", str(path), "bench", "--timing"]) == 0
        capsys.readouterr()
        doc = json.loads((tmp_path / "run" / "timing.json").read_text())
        assert doc["timing"]
        entry = doc["timing"][0]
        assert entry["sum_s"] == pytest.approx(
            entry["feature_time_s"] + entry["classification_time_s"])
        dat = (tmp_path / "run" / "timing.dat").read_text().splitlines()
        assert dat[0].startswith("# method")
        assert dat[1].split()[0] == "qda-mfcc"


class TestDetectCommand:
    def test_missing_file(self, tmp_path, capsys):
        assert run(["--seed", "1", "detect", str(tmp_path / "nope.wav")]) == 2

    def test_silent_file_no_events(self, tmp_path, capsys):
        wav = tmp_path / "silent.wav"
        write_wav(wav, np.zeros(8000), 8000)
        assert run(["--seed", "1", "detect", str(wav)]) == 0
        assert capsys.readouterr().out == ""

    def test_burst_fixture_one_event(self, tmp_path, capsys):
        clip = burst_clip(seed=5, burst_at=1.0)
        wav = tmp_path / "burst.wav"
        write_wav(wav, clip.samples, clip.sample_rate)
        assert run(["--seed", "1", "detect", str(wav)]) == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert len(out) == 1
        assert abs(float(out[0]) - 1.05) < 0.1


class TestReportCommand:
    def test_rerender_roundtrip(self, tmp_path, capsys):
        path = tiny_config(tmp_path)
        assert run(["--config", str(path), "bench"]) == 0
        capsys.readouterr()
        csv_path = tmp_path / "run" / "report.csv"
        assert run(["--seed", "1", "--format", "csv", "report", str(csv_path)]) == 0
        out = capsys.readouterr().out
        assert out == csv_path.read_text()

    def test_missing_report(self, tmp_path, capsys):
        assert run(["--seed", "1", "report", str(tmp_path / "nope.csv")]) == 2
