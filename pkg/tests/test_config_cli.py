import json

import pytest
import yaml

from attrition import __version__
from attrition.cli import main
from attrition.config import (
    config_from_dict,
    config_hash,
    default_config,
    default_config_path,
    load_config,
)
from attrition.errors import ConfigError, MissingRequired, ParseError, UnknownKey
from attrition.learners import SPECS
from attrition.llmtune import MockService

# Small learners keep the stage-by-stage CLI runs fast.
FAST_LEARNERS = {
    "LogisticRegression": {},
    "DecisionTree": {"max_depth": 3},
    "RandomForest": {"n_trees": 10, "max_depth": 3},
    "GradientBoost": {"n_estimators": 20, "max_depth": 2, "learning_rate": 0.1},
}


@pytest.fixture
def fast_config(tmp_path):
    doc = yaml.safe_load(default_config_path().read_text())
    doc["learners"] = FAST_LEARNERS
    path = tmp_path / "fast.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


# config --------------------------------------------------------------------

def test_default_config_values():
    cfg = default_config()
    assert cfg.seed == 0 and cfg.split.test_fraction == 0.2
    assert cfg.smote.k_neighbors == 5 and cfg.pipeline.skew_threshold == 0.5
    assert cfg.learner_names() == list(SPECS)
    assert cfg.learners["SVM"] == {"kernel": "rbf", "C": 200}
    assert cfg.learners["GradientBoost"]["n_estimators"] == 350
    assert not cfg.llm.enabled


def test_unknown_key_suggests_fix():
    with pytest.raises(UnknownKey, match="did you mean 'smote'"):
        config_from_dict({"seed": 0, "smoote": {}})
    with pytest.raises(UnknownKey, match="k_neighbors"):
        config_from_dict({"seed": 0, "smote": {"k_neighbor": 3}})
    with pytest.raises(UnknownKey, match="RandomForest"):
        config_from_dict({"seed": 0, "learners": {"RandomForrest": {}}})


def test_missing_seed():
    with pytest.raises(MissingRequired):
        config_from_dict({"split": {"test_fraction": 0.3}})


@pytest.mark.parametrize("doc", [
    {"seed": 0, "split": {"test_fraction": 1.5}},
    {"seed": -1},
    {"seed": 0, "smote": {"k_neighbors": 0}},
    {"seed": 0, "learners": {"KNN": {"k": 0}}},
    {"seed": 0, "learners": {}},
    {"seed": 0, "dataset": "/no/such/file.csv"},
])
def test_invalid_values(doc):
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_parse_error_reports_line(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("seed: 0\nsplit:\n  test_fraction: [0.2\n")
    with pytest.raises(ParseError) as info:
        load_config(path)
    assert info.value.line is not None and info.value.line >= 3


def test_relative_dataset_resolved_against_config(tmp_path):
    data = tmp_path / "data.csv"
    data.write_text("x\n1\n")
    path = tmp_path / "cfg.yaml"
    path.write_text("seed: 1\ndataset: data.csv\n")
    assert load_config(path).dataset == str(data.resolve())


def test_config_hash():
    cfg = default_config()
    assert config_hash(cfg) == config_hash(default_config())
    assert config_hash(cfg) == config_hash(cfg.replace(output_dir="elsewhere"))
    assert config_hash(cfg) != config_hash(cfg.replace(seed=1))
    assert json.loads(json.dumps(cfg.to_dict())) == cfg.to_dict()


# cli -----------------------------------------------------------------------

def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_inspect(capsys):
    assert main(["inspect", "--column", "Age", "--bins", "5"]) == 0
    out = capsys.readouterr().out
    assert "rows=1470 cols=35" in out
    age = next(line for line in out.splitlines() if line.startswith("Age "))
    assert age.split()[1:3] == ["1470", "36.92"]
    assert "Age histogram (5 bins)" in out
    assert "No" in out and "1233" in out


def test_report_on_empty_dir_is_clean_error(tmp_path, capsys):
    assert main(["report", "--in", str(tmp_path)]) != 0
    err = capsys.readouterr().err
    assert err.startswith("error:") and "[report]" in err
    assert "Traceback" not in err


def test_bad_config_is_clean_error(tmp_path, capsys):
    path = tmp_path / "c.yaml"
    path.write_text("seed: 0\nsmoote: {}\n")
    assert main(["prepare", "--config", str(path), "--out", str(tmp_path / "o")]) == 2
    assert "did you mean 'smote'" in capsys.readouterr().err


def test_train_before_prepare(tmp_path, capsys):
    assert main(["train", "--in", str(tmp_path)]) == 2
    assert "[train]" in capsys.readouterr().err


def test_stages_equal_single_run(tmp_path, fast_config, capsys):
    staged, whole = tmp_path / "staged", tmp_path / "whole"
    cfg = ["--config", str(fast_config)]
    assert main(["prepare", *cfg, "--out", str(staged)]) == 0
    for cmd in ("train", "evaluate", "report"):
        assert main([cmd, "--in", str(staged)]) == 0
    assert main(["run", *cfg, "--out", str(whole)]) == 0
    out = capsys.readouterr().out
    assert "Gradient" in out or "XGBoost" in out
    for name in ("report.csv", "report.txt", "metrics.json", "prepared.npz"):
        assert (staged / name).read_bytes() == (whole / name).read_bytes(), name
    a = json.loads((staged / "manifest.json").read_text())
    b = json.loads((whole / "manifest.json").read_text())
    assert a["config_sha256"] == b["config_sha256"]
    assert a["counts"] == b["counts"]


def test_seed_override_changes_split(tmp_path, fast_config):
    for seed in ("0", "7"):
        assert main(["prepare", "--config", str(fast_config), "--seed", seed,
                     "--out", str(tmp_path / seed)]) == 0
    cfg0 = json.loads((tmp_path / "0" / "config.json").read_text())
    cfg7 = json.loads((tmp_path / "7" / "config.json").read_text())
    assert (cfg0["seed"], cfg7["seed"]) == (0, 7)
    assert (tmp_path / "0" / "prepared.npz").read_bytes() != (tmp_path / "7" / "prepared.npz").read_bytes()


def test_llm_commands_against_mock(tmp_path, fast_config, monkeypatch, capsys):
    run = tmp_path / "run"
    assert main(["prepare", "--config", str(fast_config), "--out", str(run)]) == 0
    assert main(["llm-prepare", "--in", str(run)]) == 0
    assert "wrote 1176 records" in capsys.readouterr().out
    with MockService(polls_to_succeed=1) as svc:
        url = ["--llm-url", svc.url]
        monkeypatch.delenv("ATTRITION_LLM_API_KEY", raising=False)
        assert main(["llm-finetune", "--in", str(run), *url]) == 2
        assert "[llm-finetune]" in capsys.readouterr().err
        assert svc.state.requests == []
        monkeypatch.setenv("ATTRITION_LLM_API_KEY", svc.api_key)
        assert main(["llm-finetune", "--in", str(run), *url]) == 0
        assert "succeeded" in capsys.readouterr().out
        assert main(["llm-predict", "--in", str(run), *url]) == 0
        # held-out prompts are unknown to the echo mock, so all are unparseable
        assert "unparseable=294" in capsys.readouterr().out
