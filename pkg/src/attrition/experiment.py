"""Stage runner: prepare -> train -> evaluate -> report, with files between stages.

A run directory holds every artifact, so each stage can be invoked on its own::

    config.json  stages.json  pipeline.json  prepared.npz
    models/<Variant>.json  metrics.json
    report.txt  report.csv  manifest.json
    corpus.jsonl  llm_job.json  llm_predictions.csv      (LLM stages only)

Seeds: one master seed fans out through :func:`derive_seed` to ``("split",)``,
``("smote",)`` and ``("learner", variant)``, so adding or removing a learner does
not perturb the others.
"""
from __future__ import annotations

import contextlib
import csv
import hashlib
import io
import json
import logging
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, config_from_dict, config_hash
from .datasets import ibm_hr_path, load_ibm_hr
from .errors import AttritionError, StageError
from .learners import DISPLAY_NAMES, derive_seed, fit, load_model, save_model
from .metrics import evaluate as weighted_report
from .metrics import ClassReport, WeightedReport, render_report, render_report_csv
from .preprocess import FittedPipeline, PipelineSpec, fit_pipeline
from .resample import SmoteConfig, smote_oversample

log = logging.getLogger(__name__)

LLM_ROW_NAME = "GPT-3.5"
CLASS_NAMES = {0: "No", 1: "Yes"}


@contextlib.contextmanager
def stage(name: str):
    """Tag any exception escaping the block with the stage name."""
    try:
        yield
    except AttritionError as exc:
        if exc.stage is None:
            exc.stage = name
        raise
    except Exception as exc:
        err = StageError(f"{type(exc).__name__}: {exc}")
        err.stage = name
        raise err from exc


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_json(path: Path, doc):
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _read_json(path: Path):
    return json.loads(path.read_text(encoding="utf-8"))


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise FileNotFoundError(f"{path} not found; run the {what} stage first")
    return path


def _class_counts(y) -> dict:
    labels, counts = np.unique(y, return_counts=True)
    return {CLASS_NAMES[int(k)]: int(c) for k, c in zip(labels, counts)}


def _record_stage(run_dir: Path, name: str, seconds: float, **extra):
    path = run_dir / "stages.json"
    doc = _read_json(path) if path.exists() else {"timings": {}}
    doc["timings"][name] = round(seconds, 4)
    doc.update(extra)
    _write_json(path, doc)


def load_run_config(run_dir) -> ExperimentConfig:
    path = _require(Path(run_dir) / "config.json", "prepare")
    return config_from_dict(_read_json(path))


def pipeline_spec(cfg: ExperimentConfig) -> PipelineSpec:
    p = cfg.pipeline
    return PipelineSpec(drop_columns=tuple(p.drop_columns), skew_threshold=p.skew_threshold,
                        composites=tuple(p.composites), target=p.target,
                        test_fraction=cfg.split.test_fraction,
                        seed=derive_seed(cfg.seed, "split"), standardize=p.standardize)


def prepare(cfg: ExperimentConfig, run_dir) -> dict:
    """Load, preprocess, split, scale and SMOTE; persist arrays and the fitted pipeline."""
    run_dir = Path(run_dir)
    t0 = time.perf_counter()
    with stage("prepare"):
        run_dir.mkdir(parents=True, exist_ok=True)
        data_path = Path(cfg.dataset) if cfg.dataset else ibm_hr_path()
        raw = load_ibm_hr(data_path)
        fitted, split = fit_pipeline(raw, pipeline_spec(cfg))
        X_train, X_test = split.X_train.to_matrix(), split.X_test.to_matrix()
        if cfg.smote.enabled:
            smote = SmoteConfig(cfg.smote.k_neighbors, cfg.smote.target_ratio,
                                derive_seed(cfg.seed, "smote"))
            X_bal, y_bal = smote_oversample(X_train, split.y_train, smote)
        else:
            X_bal, y_bal = X_train.copy(), split.y_train.copy()
        counts = {
            "raw": {"rows": raw.n_rows, "cols": raw.n_cols},
            "clean": {"rows": raw.n_rows, "features": len(fitted.feature_names)},
            "split": {"train": len(X_train), "test": len(X_test),
                      "train_classes": _class_counts(split.y_train),
                      "test_classes": _class_counts(split.y_test)},
            "smote": {"before": len(X_train), "synthetic": len(X_bal) - len(X_train),
                      "after": len(X_bal), "classes": _class_counts(y_bal)},
        }
        _write_json(run_dir / "config.json", cfg.to_dict())
        (run_dir / "pipeline.json").write_text(fitted.to_json() + "\n", encoding="utf-8")
        np.savez(run_dir / "prepared.npz", X_train=X_train, y_train=split.y_train,
                 X_test=X_test, y_test=split.y_test, X_bal=X_bal, y_bal=y_bal,
                 train_index=split.train_index, test_index=split.test_index)
    _record_stage(run_dir, "prepare", time.perf_counter() - t0, counts=counts,
                  dataset_sha256=sha256_file(data_path), config_sha256=config_hash(cfg))
    log.info("prepared %s: train %d -> %d after SMOTE, test %d", run_dir, len(X_train),
             len(X_bal), len(X_test))
    return counts


def load_prepared(run_dir) -> dict:
    path = _require(Path(run_dir) / "prepared.npz", "prepare")
    with np.load(path) as npz:
        return {k: npz[k] for k in npz.files}


def train(run_dir, cfg: ExperimentConfig | None = None) -> list[str]:
    """Fit every configured learner on the balanced training set."""
    run_dir = Path(run_dir)
    t0 = time.perf_counter()
    with stage("train"):
        cfg = cfg or load_run_config(run_dir)
        data = load_prepared(run_dir)
        models_dir = run_dir / "models"
        models_dir.mkdir(exist_ok=True)
        trained = []
        for name, spec in cfg.learner_specs().items():
            t = time.perf_counter()
            model = fit(spec, data["X_bal"], data["y_bal"], seed=derive_seed(cfg.seed, "learner", name))
            (models_dir / f"{name}.json").write_bytes(save_model(model))
            log.info("trained %s in %.2fs", name, time.perf_counter() - t)
            trained.append(name)
    _record_stage(run_dir, "train", time.perf_counter() - t0)
    return trained


def evaluate(run_dir, cfg: ExperimentConfig | None = None) -> dict:
    """Weighted precision/recall/F1 of every trained model on the held-out test set."""
    run_dir = Path(run_dir)
    t0 = time.perf_counter()
    with stage("evaluate"):
        cfg = cfg or load_run_config(run_dir)
        data = load_prepared(run_dir)
        results = {}
        for name in cfg.learner_names():
            payload = _require(run_dir / "models" / f"{name}.json", "train").read_bytes()
            model = load_model(payload)
            rep = weighted_report(data["y_test"], model.predict(data["X_test"]))
            results[name] = _report_dict(rep)
        _write_json(run_dir / "metrics.json", results)
    _record_stage(run_dir, "evaluate", time.perf_counter() - t0)
    return results


def _report_dict(rep: WeightedReport) -> dict:
    return {"precision": rep.precision, "recall": rep.recall, "f1": rep.f1,
            "support": rep.support,
            "classes": [{"label": CLASS_NAMES[c.label], "precision": c.precision,
                         "recall": c.recall, "f1": c.f1, "support": c.support}
                        for c in rep.classes]}


def _as_report(d: dict) -> WeightedReport:
    classes = tuple(ClassReport(1 if c["label"] == "Yes" else 0, c["precision"], c["recall"],
                                c["f1"], c["support"]) for c in d["classes"])
    return WeightedReport(classes, d["precision"], d["recall"], d["f1"])


def llm_metrics(run_dir) -> dict | None:
    """Weighted metrics from ``llm_predictions.csv``; unparseable answers count as wrong."""
    path = Path(run_dir) / "llm_predictions.csv"
    if not path.exists():
        return None
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    y_true = np.array([int(r["true_label"]) for r in rows], dtype=np.int64)
    parsed = [r["parsed"] for r in rows]
    y_pred = np.array([1 if p == "Yes" else 0 if p == "No" else 1 - t
                       for p, t in zip(parsed, y_true)], dtype=np.int64)
    out = _report_dict(weighted_report(y_true, y_pred))
    out["unparseable"] = sum(p not in ("Yes", "No") for p in parsed)
    return out


def report(run_dir, cfg: ExperimentConfig | None = None) -> str:
    """Write report.txt, report.csv and manifest.json; returns the text table."""
    run_dir = Path(run_dir)
    t0 = time.perf_counter()
    with stage("report"):
        if not run_dir.is_dir() or not any(run_dir.iterdir()):
            raise FileNotFoundError(f"run directory {run_dir} is empty or missing")
        cfg = cfg or load_run_config(run_dir)
        metrics = _read_json(_require(run_dir / "metrics.json", "evaluate"))
        rows = [(DISPLAY_NAMES.get(n, n), _as_report(metrics[n])) for n in cfg.learner_names()]
        llm = llm_metrics(run_dir)
        if llm is not None:
            rows.append((LLM_ROW_NAME, _as_report(llm)))
        text = render_report(rows)
        (run_dir / "report.txt").write_text(text, encoding="utf-8")
        (run_dir / "report.csv").write_text(render_report_csv(rows), encoding="utf-8")
    _record_stage(run_dir, "report", time.perf_counter() - t0)
    write_manifest(run_dir, cfg, metrics, llm)
    return text


def write_manifest(run_dir: Path, cfg: ExperimentConfig, metrics: dict, llm: dict | None):
    stages = _read_json(_require(run_dir / "stages.json", "prepare"))
    models = {n: {k: metrics[n][k] for k in ("precision", "recall", "f1", "support")}
              for n in cfg.learner_names()}
    if llm is not None:
        models[LLM_ROW_NAME] = {k: llm[k] for k in ("precision", "recall", "f1", "support",
                                                    "unparseable")}
    manifest = {
        "version": __version__,
        "config_sha256": config_hash(cfg),
        "dataset_sha256": stages["dataset_sha256"],
        "seed": cfg.seed,
        "counts": stages["counts"],
        "metrics": models,
        "timings": stages["timings"],
    }
    _write_json(run_dir / "manifest.json", manifest)
    return manifest


def check_count_chain(counts: dict):
    """Assert the manifest counts are internally consistent."""
    split, smote = counts["split"], counts["smote"]
    assert counts["raw"]["rows"] == counts["clean"]["rows"] == split["train"] + split["test"]
    assert sum(split["train_classes"].values()) == split["train"]
    assert sum(split["test_classes"].values()) == split["test"]
    assert smote["before"] == split["train"]
    assert smote["before"] + smote["synthetic"] == smote["after"]
    assert sum(smote["classes"].values()) == smote["after"]


def run_experiment(cfg: ExperimentConfig, run_dir=None) -> dict:
    """All classic stages in order; returns the manifest."""
    run_dir = Path(run_dir or cfg.output_dir)
    stale = run_dir / "stages.json"
    if stale.exists():
        stale.unlink()
    prepare(cfg, run_dir)
    train(run_dir, cfg)
    evaluate(run_dir, cfg)
    report(run_dir, cfg)
    return _read_json(run_dir / "manifest.json")


# LLM stages -------------------------------------------------------------

def _clean_raw(cfg: ExperimentConfig, run_dir: Path):
    fitted = FittedPipeline.from_json(_require(run_dir / "pipeline.json", "prepare").read_text())
    raw = load_ibm_hr(Path(cfg.dataset) if cfg.dataset else ibm_hr_path())
    return fitted, raw


def _raw_records(raw, fitted: FittedPipeline, rows) -> list[dict]:
    from .llmtune import employee_records

    keep = [n for n in raw.names if n not in set(fitted.dropped) and n != fitted.target]
    sub = raw.take(rows)
    return employee_records(sub.with_columns([sub.column_schema(n) for n in keep], sub.columns))


def llm_prepare(run_dir, include_synthetic: bool | None = None) -> Path:
    """Write the prompt/completion corpus for the training split."""
    from .llmtune import build_jsonl, readable_rows

    run_dir = Path(run_dir)
    t0 = time.perf_counter()
    with stage("llm-prepare"):
        cfg = load_run_config(run_dir)
        if include_synthetic is None:
            include_synthetic = cfg.llm.include_synthetic
        data = load_prepared(run_dir)
        fitted, raw = _clean_raw(cfg, run_dir)
        records = _raw_records(raw, fitted, data["train_index"])
        labels = list(data["y_train"])
        if include_synthetic:
            n = len(data["X_train"])
            records += readable_rows(data["X_bal"][n:], fitted, fitted.feature_names)
            labels += list(data["y_bal"][n:])
        out = run_dir / cfg.llm.corpus_file
        out.write_bytes(build_jsonl(records, labels).encode("utf-8"))
    _record_stage(run_dir, "llm-prepare", time.perf_counter() - t0)
    return out


def _client_config(cfg: ExperimentConfig, url: str | None, **kw):
    from .llmtune import ClientConfig

    return ClientConfig(base_url=url or cfg.llm.service_url, api_key_env=cfg.llm.api_key_env,
                        base_model=cfg.llm.base_model, max_tokens=cfg.llm.max_tokens,
                        parallelism=cfg.llm.parallelism, **kw)


def llm_finetune(run_dir, url: str | None = None, **client_kw):
    from .llmtune import run_finetune

    run_dir = Path(run_dir)
    t0 = time.perf_counter()
    with stage("llm-finetune"):
        cfg = load_run_config(run_dir)
        corpus = _require(run_dir / cfg.llm.corpus_file, "llm-prepare").read_text(encoding="utf-8")
        job = run_finetune(_client_config(cfg, url, **client_kw), corpus)
        _write_json(run_dir / "llm_job.json", {"job_id": job.job_id, "status": job.status,
                                               "fine_tuned_model": job.fine_tuned_model})
        if job.status != "succeeded":
            raise RuntimeError(f"fine-tune job {job.job_id} ended with status {job.status}")
    _record_stage(run_dir, "llm-finetune", time.perf_counter() - t0)
    return job


def llm_predict_stage(run_dir, url: str | None = None, split: str = "test", **client_kw) -> Path:
    """Query the fine-tuned model for every row of ``split``; write the prediction log."""
    from .llmtune import FineTuneClient

    run_dir = Path(run_dir)
    t0 = time.perf_counter()
    with stage("llm-predict"):
        cfg = load_run_config(run_dir)
        job = _read_json(_require(run_dir / "llm_job.json", "llm-finetune"))
        if not job.get("fine_tuned_model"):
            raise RuntimeError(f"job {job['job_id']} has no fine-tuned model")
        data = load_prepared(run_dir)
        fitted, raw = _clean_raw(cfg, run_dir)
        index, y = data[f"{split}_index"], data[f"y_{split}"]
        records = _raw_records(raw, fitted, index)
        client = FineTuneClient(_client_config(cfg, url, **client_kw))
        preds = client.predict_many(job["fine_tuned_model"], records)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row_index", "raw_completion", "parsed", "true_label"])
        for i, p, t in zip(index, preds, y):
            w.writerow([int(i), p.raw_completion, p.parsed.value, int(t)])
        out = run_dir / "llm_predictions.csv"
        out.write_text(buf.getvalue(), encoding="utf-8")
    _record_stage(run_dir, "llm-predict", time.perf_counter() - t0)
    return out
