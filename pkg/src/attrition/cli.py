"""Command-line entry point: ``attrition <subcommand> ...``."""
from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .config import default_config_path, load_config
from .errors import AttritionError, StageError

log = logging.getLogger("attrition")


def _config(args):
    cfg = load_config(args.config or default_config_path())
    if getattr(args, "seed", None) is not None:
        cfg = cfg.replace(seed=args.seed)
    if getattr(args, "smote_k", None) is not None:
        cfg = cfg.replace(smote=dataclasses.replace(cfg.smote, k_neighbors=args.smote_k))
    if getattr(args, "no_llm", False):
        cfg = cfg.replace(llm=dataclasses.replace(cfg.llm, enabled=False))
    if getattr(args, "llm_url", None):
        cfg = cfg.replace(llm=dataclasses.replace(cfg.llm, service_url=args.llm_url))
    return cfg


def cmd_inspect(args):
    from .datasets import load_ibm_hr
    from .tabular import NUMERIC, class_distribution, histogram, render_histogram, summarize

    cfg = _config(args)
    table = load_ibm_hr(args.data or cfg.dataset)
    print(f"rows={table.n_rows} cols={table.n_cols}")
    columns = args.column or [c.name for c in table.schema if c.kind == NUMERIC]
    head = f"{'column':<26}{'count':>7}{'mean':>11}{'std':>11}{'min':>9}{'25%':>9}{'50%':>9}{'75%':>9}{'max':>9}"
    print(head)
    for name in columns:
        s = summarize(table, name)
        print(f"{name:<26}{s.count:>7}{s.mean:>11.2f}{s.std:>11.2f}{s.min:>9g}{s.q25:>9g}"
              f"{s.q50:>9g}{s.q75:>9g}{s.max:>9g}")
    target = table.target
    if target:
        print(f"\n{target} distribution")
        for label, count, frac in class_distribution(table, target):
            print(f"  {label:<6}{count:>6}  {frac:.3f}")
    if args.bins:
        for name in columns:
            print(f"\n{name} histogram ({args.bins} bins)")
            print(render_histogram(histogram(table, name, args.bins)).rstrip("\n"))
    return 0


def cmd_prepare(args):
    from .experiment import prepare

    cfg = _config(args)
    out = Path(args.out or cfg.output_dir)
    counts = prepare(cfg, out)
    print(f"prepared {out}: train {counts['split']['train']} test {counts['split']['test']} "
          f"balanced {counts['smote']['after']}")
    return 0


def cmd_train(args):
    from .experiment import train

    names = train(args.run_dir)
    print(f"trained {len(names)} models: {', '.join(names)}")
    return 0


def cmd_evaluate(args):
    from .experiment import evaluate

    for name, m in evaluate(args.run_dir).items():
        print(f"{name:<20} precision={m['precision']:.4f} recall={m['recall']:.4f} f1={m['f1']:.4f}")
    return 0


def cmd_report(args):
    from .experiment import report

    print(report(args.run_dir), end="")
    return 0


def cmd_run(args):
    from .experiment import llm_finetune, llm_predict_stage, llm_prepare, report, run_experiment

    cfg = _config(args)
    out = Path(args.out or cfg.output_dir)
    run_experiment(cfg, out)
    if cfg.llm.enabled:
        llm_prepare(out)
        llm_finetune(out)
        llm_predict_stage(out)
        report(out)
    print((out / "report.txt").read_text(), end="")
    print(f"artifacts in {out}")
    return 0


def cmd_llm_prepare(args):
    from .experiment import llm_prepare

    path = llm_prepare(args.run_dir, include_synthetic=args.include_synthetic or None)
    n = sum(1 for _ in path.open(encoding="utf-8"))
    print(f"wrote {n} records to {path}")
    return 0


def cmd_llm_finetune(args):
    from .experiment import llm_finetune

    job = llm_finetune(args.run_dir, url=args.llm_url)
    print(f"job {job.job_id}: {job.status} -> {job.fine_tuned_model}")
    return 0


def cmd_llm_predict(args):
    from .experiment import llm_metrics, llm_predict_stage

    path = llm_predict_stage(args.run_dir, url=args.llm_url)
    m = llm_metrics(args.run_dir)
    print(f"wrote {path}; weighted f1={m['f1']:.4f}, unparseable={m['unparseable']}")
    return 0


def cmd_mock_serve(args):
    from .llmtune import MockService

    svc = MockService(port=args.port, api_key=args.api_key, polls_to_succeed=args.polls).start()
    print(f"mock fine-tuning service on {svc.url} (api key {args.api_key!r}); Ctrl-C to stop",
          flush=True)
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        pass
    finally:
        svc.stop()
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="attrition", description=__doc__)
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def with_config(sp):
        sp.add_argument("--config", help="YAML experiment config (default: bundled)")
        sp.add_argument("--seed", type=int, help="override the master seed")
        return sp

    def with_run_dir(sp):
        sp.add_argument("--in", dest="run_dir", required=True, help="run directory")
        return sp

    sp = with_config(sub.add_parser("inspect", help="dataset statistics and histograms"))
    sp.add_argument("--data", help="CSV path (default: config dataset)")
    sp.add_argument("--column", action="append", help="restrict to a column (repeatable)")
    sp.add_argument("--bins", type=int, default=0, help="print ASCII histograms")
    sp.set_defaults(func=cmd_inspect)

    sp = with_config(sub.add_parser("prepare", help="preprocess, split and SMOTE"))
    sp.add_argument("--out", help="run directory")
    sp.add_argument("--smote-k", type=int, help="SMOTE neighbour count")
    sp.set_defaults(func=cmd_prepare)

    with_run_dir(sub.add_parser("train", help="fit all configured learners")).set_defaults(func=cmd_train)
    with_run_dir(sub.add_parser("evaluate", help="score models on the test split")).set_defaults(
        func=cmd_evaluate)
    with_run_dir(sub.add_parser("report", help="write report.txt/csv and manifest")).set_defaults(
        func=cmd_report)

    sp = with_config(sub.add_parser("run", help="every stage end to end"))
    sp.add_argument("--out", help="run directory")
    sp.add_argument("--smote-k", type=int, help="SMOTE neighbour count")
    sp.add_argument("--no-llm", action="store_true", help="skip the LLM stages")
    sp.add_argument("--llm-url", help="fine-tuning service base URL")
    sp.set_defaults(func=cmd_run)

    sp = with_run_dir(sub.add_parser("llm-prepare", help="write the JSONL fine-tuning corpus"))
    sp.add_argument("--include-synthetic", action="store_true",
                    help="also include SMOTE rows (decoded to readable values)")
    sp.set_defaults(func=cmd_llm_prepare)
    for name, func, text in (("llm-finetune", cmd_llm_finetune, "upload corpus and fine-tune"),
                             ("llm-predict", cmd_llm_predict, "query the fine-tuned model")):
        sp = with_run_dir(sub.add_parser(name, help=text))
        sp.add_argument("--llm-url", help="fine-tuning service base URL")
        sp.set_defaults(func=func)

    sp = sub.add_parser("mock-serve", help="run the offline mock fine-tuning service")
    sp.add_argument("--port", type=int, default=8765)
    sp.add_argument("--api-key", default="mock-key")
    sp.add_argument("--polls", type=int, default=2, help="polls before a job succeeds")
    sp.set_defaults(func=cmd_mock_serve)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except AttritionError as exc:
        if exc.stage is None:
            exc.stage = args.command
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError, KeyError) as exc:
        err = StageError(f"{type(exc).__name__}: {exc}")
        err.stage = args.command
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
