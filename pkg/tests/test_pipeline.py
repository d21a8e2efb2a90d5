"""Pipeline stages: manifests, determinism, reports, config."""

import json
from dataclasses import replace
from pathlib import Path

import pytest

from hbk import pipeline
from hbk.pipeline import (PipelineConfig, build_report, default_config,
                          load_config, run_full_pipeline, run_target)


def graph_cfg(tmp_path, target=2):
    return replace(default_config(target, "graph", tmp_path / "out"), jobs=1)


def test_run_target_small_graph(tmp_path, monkeypatch):
    monkeypatch.delenv("HBK_CACHE_DIR", raising=False)
    cfg = graph_cfg(tmp_path)
    classes_path = run_target(cfg, 2)
    data = json.loads(Path(classes_path).read_text())
    new = [c for c in data if not c["old"]]
    assert len(new) == 1
    assert new[0]["crossings"] == 2


def test_manifest_skips_and_byte_stability(tmp_path, monkeypatch):
    monkeypatch.delenv("HBK_CACHE_DIR", raising=False)
    cfg = graph_cfg(tmp_path)
    first = Path(run_target(cfg, 2)).read_bytes()
    stat_before = (tmp_path / "out" / "classify_graph_2.tree.json").stat()
    second = Path(run_target(cfg, 2)).read_bytes()
    stat_after = (tmp_path / "out" / "classify_graph_2.tree.json").stat()
    assert first == second
    assert stat_before.st_mtime_ns == stat_after.st_mtime_ns  # not rewritten


def test_changed_params_invalidate(tmp_path, monkeypatch):
    monkeypatch.delenv("HBK_CACHE_DIR", raising=False)
    cfg = graph_cfg(tmp_path)
    run_target(cfg, 2)
    tweaked = replace(cfg, schedule=("spine", "constituent:S3", "ks:S3"))
    run_target(tweaked, 2)
    manifest = json.loads(
        (tmp_path / "out" / "classify_graph_2.manifest.json").read_text())
    assert manifest["stamp"]["params"]["schedule"] == list(tweaked.schedule)


def test_cache_dir_env(tmp_path, monkeypatch):
    cache = tmp_path / "cachehome"
    monkeypatch.setenv("HBK_CACHE_DIR", str(cache))
    cfg = graph_cfg(tmp_path)
    run_target(cfg, 2)
    assert (cache / "classify_graph_2.classes.json").exists()


def test_full_pipeline_outputs(tmp_path, monkeypatch):
    monkeypatch.delenv("HBK_CACHE_DIR", raising=False)
    cfg = graph_cfg(tmp_path)
    outputs = run_full_pipeline(cfg)
    assert outputs["report"].exists()
    summary = json.loads(outputs["summary"].read_text())
    assert summary["classes_new"] == 1
    report = outputs["report"].read_text()
    assert report.startswith("class\tleaf\trepresentative")


def test_config_validation(tmp_path):
    with pytest.raises(ValueError):
        PipelineConfig(target=-1).validate()
    with pytest.raises(ValueError):
        PipelineConfig(mode="bogus").validate()
    with pytest.raises(ValueError):
        PipelineConfig(schedule=()).validate()
    with pytest.raises(ValueError):
        PipelineConfig(certify_depth=0).validate()


def test_load_config_toml(tmp_path):
    path = tmp_path / "cfg.toml"
    path.write_text('target = 3\nmode = "graph"\nout_dir = "o"\n'
                    'schedule = ["spine", "ks:S3"]\njobs = 2\n')
    cfg = load_config(path)
    assert cfg.target == 3
    assert cfg.mode == "graph"
    assert cfg.schedule == ("spine", "ks:S3")
    assert cfg.jobs == 2


def test_graph_only_schedule_rejected_in_hk(tmp_path, monkeypatch):
    monkeypatch.delenv("HBK_CACHE_DIR", raising=False)
    cfg = replace(default_config(0, "hk", tmp_path / "out"),
                  schedule=("spine", "ks:S3"))
    with pytest.raises(RuntimeError, match="not handlebody-knot invariants"):
        run_target(cfg, 0)


def test_build_report_counts():
    classes = [
        {"leaf": 1, "representative": "aa", "crossings": 7, "origins": ["3conn"],
         "old": False, "reducible_by_construction": False, "verdict": "irreducible",
         "hard_leaf": False, "code": "x", "rank_bound": 3, "ks_A4": 1, "ks_A5": 1,
         "size": 1, "members": ["aa"], "annotations": []},
        {"leaf": 2, "representative": "bb", "crossings": 7, "origins": ["conn1"],
         "old": False, "reducible_by_construction": True, "verdict": "inconclusive",
         "hard_leaf": False, "code": "y", "rank_bound": 4, "ks_A4": 10, "ks_A5": 17,
         "size": 1, "members": ["bb"], "annotations": []},
        {"leaf": 3, "representative": "cc", "crossings": 0, "origins": ["baseline"],
         "old": True, "reducible_by_construction": False, "verdict": "inconclusive",
         "hard_leaf": False, "code": "z", "rank_bound": 2, "ks_A4": 22, "ks_A5": 77,
         "size": 1, "members": ["cc"], "annotations": []},
    ]
    report, summary = build_report(classes, 7, {})
    assert summary == {"target": 7, "classes_new": 2, "irreducible": 1,
                       "reducible": 1, "unresolved": 0, "hard_leaves": 0}
    assert "cc" not in report  # old classes are excluded from the table
